"""Domain types: semiclassical parameters, the three-bump Hamiltonian
schedule, symplectic affine frames, phase-space and momentum fields,
marginals, metrics, and moment measurement.

Coordinates: fields live on a rectangular grid in frame coordinates (u, v)
with lab coordinates x = s_x * u, p = s_p * v and s_x * s_p = 1, so the
frame map is area preserving and densities carry over without a Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Literal, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    CoverageError,
    DomainError,
    GridMismatchError,
    InvalidParameterError,
)

__all__ = [
    "SemiclassicalParams",
    "BumpProfile",
    "Schedule",
    "standard_schedule",
    "AffineFrame",
    "GridSpec",
    "PhaseSpaceField",
    "GaussianSpec",
    "ConditionalGaussianSpec",
    "MomentumDistribution",
    "ObservableSpec",
    "MomentRecord",
    "initial_coherent_field",
    "gaussian_field",
    "conditional_gaussian_field",
    "momentum_marginal",
    "position_marginal",
    "l1_distance",
    "resample_distribution",
    "expect_observable",
    "measure_central_moments",
    "decoherence_length",
]

FieldKind = Literal["wigner", "classical"]


@dataclass(frozen=True)
class SemiclassicalParams:
    """Planck constant and diffusion strength in reference units (hbar = 2h)."""

    hbar: float
    D: float = 0.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise InvalidParameterError("hbar must be positive")
        if self.D < 0:
            raise InvalidParameterError("diffusion strength D must be >= 0")

    @property
    def h(self) -> float:
        """Half of hbar; the uncertainty product sigma_x*sigma_p of a pure state."""
        return self.hbar / 2.0


def decoherence_length(params: SemiclassicalParams) -> float:
    """Phase-space scale hbar / sqrt(D) above which superpositions decohere."""
    if params.D == 0:
        raise DomainError("decoherence length is undefined at D = 0")
    return params.hbar / math.sqrt(params.D)


def _default_bump_raw(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0.0) & (s < 1.0)
    si = s[inside]
    out[inside] = np.exp(1.0 / (4.0 * si * (si - 1.0)))
    return out


class BumpProfile:
    """A smooth nonnegative bump on (0, 1) normalized to unit integral.

    The default shape is exp(1/(4s(s-1))) on (0,1); it and all one-sided
    derivatives vanish at the endpoints. Alternative shapes may be supplied
    via ``raw`` (unnormalized; compact support on (0,1) is the caller's
    responsibility).
    """

    _TABLE_N = 1 << 14

    def __init__(self, profile_id: str = "exp-reciprocal",
                 raw: Callable = _default_bump_raw):
        self.profile_id = profile_id
        self._raw = raw
        s = np.linspace(0.0, 1.0, self._TABLE_N + 1)
        vals = raw(s)
        if np.any(vals < 0):
            raise InvalidParameterError("bump shape must be nonnegative")
        # Trapezoid on the closed interval; for shapes with all endpoint
        # derivatives vanishing this converges faster than any power of N.
        ds = 1.0 / self._TABLE_N
        cum = np.concatenate([[0.0], np.cumsum((vals[1:] + vals[:-1]) * (ds / 2.0))])
        total = cum[-1]
        if total <= 0:
            raise InvalidParameterError("bump shape integrates to zero")
        self.normalization = 1.0 / total
        self._cum_spline = CubicSpline(s, cum / total)
        self._s_table = s

    def value(self, s):
        """Normalized bump chi(s); zero outside (0, 1)."""
        out = self._raw(np.asarray(s, dtype=float)) * self.normalization
        return float(out) if np.isscalar(s) else out

    def cumulative(self, s):
        """X(s) = integral of chi from 0 to s, clipped to [0, 1]."""
        arr = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        out = np.clip(self._cum_spline(arr), 0.0, 1.0)
        return float(out) if np.isscalar(s) else out


@dataclass(frozen=True)
class Schedule:
    """Three sequential bump windows driving H1 = xp, H2 = -x^3/3, H3 = -xp.

    Each window i has duration tau_i and bump chi_i(t) = chi((t - t_{i-1}) / tau_i),
    so that int chi_i dt = tau_i. ``technical_ok`` records whether
    tau1 < (1/4) log(1/h) held for the h the schedule was built for (None if
    no h was supplied).
    """

    tau1: float
    tau2: float
    tau3: float
    bump: BumpProfile = dc_field(default_factory=BumpProfile)
    technical_ok: Optional[bool] = None

    def __post_init__(self):
        if min(self.tau1, self.tau2, self.tau3) <= 0:
            raise InvalidParameterError("all schedule durations must be positive")

    @property
    def t0(self) -> float:
        return 0.0

    @property
    def t1(self) -> float:
        return self.tau1

    @property
    def t2(self) -> float:
        return self.tau1 + self.tau2

    @property
    def t3(self) -> float:
        return self.tau1 + self.tau2 + self.tau3

    def taus(self):
        return (self.tau1, self.tau2, self.tau3)

    def window(self, i: int):
        """(start, duration) of window i in {1, 2, 3}."""
        starts = {1: self.t0, 2: self.t1, 3: self.t2}
        return starts[i], self.taus()[i - 1]

    def chi(self, i: int, t):
        """Bump value chi_i(t) = chi((t - t_{i-1}) / tau_i), whose time
        integral over the window is tau_i."""
        start, tau = self.window(i)
        return self.bump.value((np.asarray(t, dtype=float) - start) / tau)

    def bump_integral(self, i: int, ta: float, tb: float) -> float:
        """int_ta^tb chi_i(t) dt, exact at window boundaries."""
        start, tau = self.window(i)
        return tau * (self.bump.cumulative((tb - start) / tau)
                      - self.bump.cumulative((ta - start) / tau))


def standard_schedule(h: float) -> Schedule:
    """The reference durations tau1 = (1/6) log(1/h), tau2 = 1,
    tau3 = (2/3) log(1/h)."""
    if not 0 < h < 1:
        raise InvalidParameterError("standard schedule requires 0 < h < 1")
    log_inv = math.log(1.0 / h)
    return Schedule(
        tau1=log_inv / 6.0,
        tau2=1.0,
        tau3=2.0 * log_inv / 3.0,
        technical_ok=True,  # 1/6 < 1/4 always
    )


def is_standard_schedule(schedule: Schedule, h: float, tol: float = 1e-12) -> bool:
    log_inv = math.log(1.0 / h)
    return (
        abs(schedule.tau1 - log_inv / 6.0) <= tol * max(1.0, log_inv)
        and abs(schedule.tau3 - 2.0 * log_inv / 3.0) <= tol * max(1.0, log_inv)
    )


@dataclass(frozen=True)
class AffineFrame:
    """Area-preserving diagonal rescaling x = s_x u, p = s_p v with
    s_x = exp(a), s_p = exp(-a)."""

    a: float = 0.0

    @property
    def s_x(self) -> float:
        return math.exp(self.a)

    @property
    def s_p(self) -> float:
        return math.exp(-self.a)

    def compose(self, other: "AffineFrame") -> "AffineFrame":
        return AffineFrame(self.a + other.a)

    def shifted(self, da: float) -> "AffineFrame":
        return AffineFrame(self.a + da)


@dataclass(frozen=True)
class GridSpec:
    """Grid geometry in frame coordinates: n points and half-extents per axis."""

    n_u: int = 512
    n_v: int = 1024
    half_extent_u: float = 1.0
    half_extent_v: float = 1.0

    @staticmethod
    def for_h(h: float, n_u: int = 512, n_v: int = 1024,
              widths_u: float = 16.0, widths_v: float = 64.0) -> "GridSpec":
        """Extents in units of sqrt(h), the state's frame-coordinate scale.

        The v half-extent defaults to 64*sqrt(h): the cubic kick displaces the
        column at u = c*sqrt(h) by tau2*c^2*sqrt(h) in v, so 16*sqrt(h) would
        clip columns beyond c = 4 while 64 keeps everything out to c ~ 7.5.
        """
        root = math.sqrt(h)
        return GridSpec(n_u=n_u, n_v=n_v,
                        half_extent_u=widths_u * root,
                        half_extent_v=widths_v * root)

    def axes(self):
        u = np.linspace(-self.half_extent_u, self.half_extent_u, self.n_u,
                        endpoint=False)
        v = np.linspace(-self.half_extent_v, self.half_extent_v, self.n_v,
                        endpoint=False)
        return u, v


@dataclass(frozen=True)
class PhaseSpaceField:
    """A real density on a frame-coordinate grid.

    ``kind`` distinguishes Wigner functions (may be negative) from classical
    densities (nonnegative up to discretization ringing).
    """

    frame: AffineFrame
    u: np.ndarray
    v: np.ndarray
    values: np.ndarray  # shape (n_u, n_v)
    kind: FieldKind

    @property
    def du(self) -> float:
        return float(self.u[1] - self.u[0])

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0])

    def mass(self) -> float:
        return float(self.values.sum() * self.du * self.dv)

    def min_value(self) -> float:
        return float(self.values.min())

    def with_values(self, values: np.ndarray) -> "PhaseSpaceField":
        return replace(self, values=values)

    def with_frame(self, frame: AffineFrame) -> "PhaseSpaceField":
        return replace(self, frame=frame)


@dataclass(frozen=True)
class GaussianSpec:
    """A (generally squeezed) Gaussian phase-space density in lab coordinates."""

    mean_x: float
    mean_p: float
    cov: np.ndarray  # 2x2 symmetric positive definite

    def __post_init__(self):
        c = np.asarray(self.cov, dtype=float)
        if c.shape != (2, 2) or abs(c[0, 1] - c[1, 0]) > 1e-14 * (1 + abs(c[0, 1])):
            raise InvalidParameterError("covariance must be symmetric 2x2")
        if np.linalg.det(c) <= 0 or c[0, 0] <= 0:
            raise InvalidParameterError("covariance must be positive definite")

    def is_pure_quantum(self, h: float, rtol: float = 1e-9) -> bool:
        """Uncertainty saturation det(cov) = h^2."""
        return abs(float(np.linalg.det(np.asarray(self.cov))) - h * h) <= rtol * h * h

    def density(self, x, p):
        c = np.asarray(self.cov, dtype=float)
        inv = np.linalg.inv(c)
        dx = x - self.mean_x
        dp = p - self.mean_p
        quad = inv[0, 0] * dx * dx + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
        return np.exp(-quad / 2.0) / (2.0 * math.pi * math.sqrt(np.linalg.det(c)))


@dataclass(frozen=True)
class ConditionalGaussianSpec:
    """Density G_{sigma_x}(x) * G_{sigma_p}(p - r x^2); the exact closed
    classical state throughout the schedule."""

    sigma_x: float
    sigma_p: float
    r: float = 0.0

    def __post_init__(self):
        if self.sigma_x <= 0 or self.sigma_p <= 0:
            raise InvalidParameterError("widths must be positive")
        if self.r < 0:
            raise InvalidParameterError("kick curvature r must be >= 0")

    @property
    def b(self) -> float:
        return self.r * self.sigma_x ** 2 / self.sigma_p

    def density(self, x, p):
        gx = np.exp(-x * x / (2 * self.sigma_x ** 2)) / (
            math.sqrt(2 * math.pi) * self.sigma_x)
        arg = p - self.r * x * x
        gp = np.exp(-arg * arg / (2 * self.sigma_p ** 2)) / (
            math.sqrt(2 * math.pi) * self.sigma_p)
        return gx * gp


@dataclass(frozen=True)
class MomentumDistribution:
    """A one-dimensional density over lab momentum on a uniform grid."""

    p: np.ndarray
    q: np.ndarray

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def mass(self) -> float:
        return float(self.q.sum() * self.dp)


@dataclass(frozen=True)
class ObservableSpec:
    """g_n(p) = p^n * exp(-p^2); with gaussian_weight=False just p^n."""

    n: int = 0
    gaussian_weight: bool = True

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError("observable index n must be >= 0")

    def g(self, p):
        p = np.asarray(p, dtype=float)
        out = p ** self.n if self.n else np.ones_like(p)
        if self.gaussian_weight:
            out = out * np.exp(-p * p)
        return out


@dataclass(frozen=True)
class MomentRecord:
    """Lab-coordinate means and central moments of x and p."""

    mean_x: float
    mean_p: float
    var_x: float
    m3_x: float
    m4_x: float
    var_p: float
    m3_p: float
    m4_p: float


def _sample_field(frame, grid: GridSpec, kind: FieldKind, fn) -> PhaseSpaceField:
    u, v = grid.axes()
    x = frame.s_x * u[:, None]
    p = frame.s_p * v[None, :]
    return PhaseSpaceField(frame=frame, u=u, v=v, values=fn(x, p), kind=kind)


def initial_coherent_field(params: SemiclassicalParams, grid: GridSpec,
                           kind: FieldKind = "wigner") -> PhaseSpaceField:
    """The isotropic coherent-state density exp[-(x^2+p^2)/2h] / (2 pi h),
    sampled in the identity frame."""
    h = params.h
    root = math.sqrt(h)
    if grid.half_extent_u < 8 * root or grid.half_extent_v < 8 * root:
        raise CoverageError("grid extents must be at least 8*sqrt(h) per axis")
    field = _sample_field(
        AffineFrame(0.0), grid, kind,
        lambda x, p: np.exp(-(x * x + p * p) / (2 * h)) / (2 * math.pi * h))
    if abs(field.mass() - 1.0) > 1e-8:
        raise CoverageError("more than 1e-8 of the state's mass lies off-grid")
    return field


def gaussian_field(spec: GaussianSpec, grid: GridSpec,
                   frame: AffineFrame = AffineFrame(0.0),
                   kind: FieldKind = "classical") -> PhaseSpaceField:
    return _sample_field(frame, grid, kind, spec.density)


def conditional_gaussian_field(spec: ConditionalGaussianSpec, grid: GridSpec,
                               frame: AffineFrame = AffineFrame(0.0),
                               kind: FieldKind = "classical") -> PhaseSpaceField:
    return _sample_field(frame, grid, kind, spec.density)


def momentum_marginal(field: PhaseSpaceField) -> MomentumDistribution:
    """Marginal over lab momentum: integrate over u, rescale v to p."""
    s_p = field.frame.s_p
    density_v = field.values.sum(axis=0) * field.du
    return MomentumDistribution(p=s_p * field.v, q=density_v / s_p)


def position_marginal(field: PhaseSpaceField) -> MomentumDistribution:
    """Marginal over lab position (returned in the same 1-D container)."""
    s_x = field.frame.s_x
    density_u = field.values.sum(axis=1) * field.dv
    return MomentumDistribution(p=s_x * field.u, q=density_u / s_x)


def resample_distribution(dist: MomentumDistribution,
                          new_p: np.ndarray) -> MomentumDistribution:
    """Band-limited (trigonometric) interpolation onto a new uniform grid.

    The source is treated as periodic on its own extent; target points
    outside that extent get zero (the density is assumed to have decayed).
    """
    n = len(dist.p)
    period = n * dist.dp
    coeff = np.fft.rfft(dist.q) / n
    k = 2.0 * math.pi * np.arange(len(coeff)) / period
    rel = np.asarray(new_p, dtype=float) - dist.p[0]
    inside = (rel >= 0) & (rel < period)
    phases = np.exp(1j * np.outer(rel[inside], k))
    weights = np.full(len(coeff), 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    vals = np.zeros(len(rel))
    vals[inside] = (phases * (weights * coeff)).real.sum(axis=1)
    return MomentumDistribution(p=np.asarray(new_p, dtype=float), q=vals)


def l1_distance(a: MomentumDistribution, b: MomentumDistribution,
                resample_tol: float = 1e-6) -> float:
    """L1 distance between two momentum densities; in [0, 2] for
    probability densities."""
    if len(a.p) == len(b.p) and np.allclose(a.p, b.p, rtol=0, atol=1e-12 * (1 + abs(a.p[-1]))):
        return float(np.abs(a.q - b.q).sum() * a.dp)
    rb = resample_distribution(b, a.p)
    if abs(rb.mass() - b.mass()) > resample_tol * max(1.0, abs(b.mass())):
        raise GridMismatchError("resampling lost more mass than the tolerance allows")
    return float(np.abs(a.q - rb.q).sum() * a.dp)


def expect_observable(dist: MomentumDistribution, obs: ObservableSpec) -> float:
    return float((obs.g(dist.p) * dist.q).sum() * dist.dp)


def measure_central_moments(field: PhaseSpaceField) -> MomentRecord:
    """Means and 2nd/3rd/4th central moments in lab coordinates by direct
    quadrature on the grid (robust to Wigner negativity)."""
    w = field.values * (field.du * field.dv)
    total = w.sum()
    x = field.frame.s_x * field.u
    p = field.frame.s_p * field.v
    wx = w.sum(axis=1)
    wp = w.sum(axis=0)
    mean_x = float((wx * x).sum() / total)
    mean_p = float((wp * p).sum() / total)
    cx = x - mean_x
    cp = p - mean_p

    def mom(weights, c, k):
        return float((weights * c ** k).sum() / total)

    return MomentRecord(
        mean_x=mean_x, mean_p=mean_p,
        var_x=mom(wx, cx, 2), m3_x=mom(wx, cx, 3), m4_x=mom(wx, cx, 4),
        var_p=mom(wp, cp, 2), m3_p=mom(wp, cp, 3), m4_p=mom(wp, cp, 4),
    )
