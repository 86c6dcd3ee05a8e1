"""Independent reference implementations used to validate the spectral
evolver: a closed-system Schrodinger solver, a position-basis Lindblad
density-matrix solver, and a Langevin Monte-Carlo sampler.

These are deliberately different discretizations of the same dynamics; they
trade speed for independence and run at modest scales only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import BumpProfile, MomentumDistribution, Schedule, SemiclassicalParams
from .errors import InvalidParameterError, ResolutionError, SolverFailureError

__all__ = [
    "WavefunctionField",
    "DensityMatrixField",
    "TrajectoryEnsemble",
    "coherent_wavefunction",
    "schrodinger_closed",
    "momentum_distribution",
    "coherent_density_matrix",
    "lindblad_dm_evolve",
    "dm_momentum_marginal",
    "wigner_from_dm",
    "langevin_sample",
    "histogram_distribution",
]


@dataclass(frozen=True)
class WavefunctionField:
    """Complex wavefunction on a uniform grid in frame coordinates.

    The lab wavefunction is psi(x) = scale^(-1/2) * values(x / scale), so
    dilations are represented exactly by updating ``scale``.
    """

    xi: np.ndarray
    values: np.ndarray
    scale: float = 1.0

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    def norm_sq(self) -> float:
        return float((np.abs(self.values) ** 2).sum() * self.dxi)

    def lab_x(self) -> np.ndarray:
        return self.scale * self.xi


def coherent_wavefunction(h: float, n: int = 8192,
                          half_extent: float = None) -> WavefunctionField:
    """Ground-state Gaussian psi0(x) = (2 pi h)^(-1/4) exp(-x^2 / 4h)."""
    if half_extent is None:
        half_extent = 16.0 * math.sqrt(h)
    xi = np.linspace(-half_extent, half_extent, n, endpoint=False)
    vals = (2.0 * math.pi * h) ** (-0.25) * np.exp(-xi * xi / (4.0 * h))
    return WavefunctionField(xi=xi, values=vals.astype(complex), scale=1.0)


def schrodinger_closed(psi0: WavefunctionField, schedule: Schedule, h: float):
    """Closed (D = 0) quantum evolution through the schedule.

    Steps 1 and 3 are exact dilations (scale updates); step 2 multiplies by
    the cubic phase exp(i tau2 x^3 / 6h). Returns the four checkpoint
    wavefunctions. Raises if the cubic phase is undersampled where the
    state carries mass (more than 1e-8 of probability past the well-sampled
    region).
    """
    cp0 = psi0
    cp1 = replace(psi0, scale=psi0.scale * math.exp(schedule.tau1))

    x = cp1.lab_x()
    # local phase gradient tau2 x^2 / 2h; require < pi/4 per grid cell
    dx = cp1.scale * cp1.dxi
    grad = schedule.tau2 * x * x / (2.0 * h)
    bad = grad * dx > math.pi / 4.0
    if np.any(bad):
        stray = float((np.abs(cp1.values[bad]) ** 2).sum() * cp1.dxi)
        if stray > 1e-8:
            raise ResolutionError(
                f"cubic phase undersampled over probability {stray:.2e}")
    phase = schedule.tau2 * x ** 3 / (6.0 * h)
    cp2 = replace(cp1, values=cp1.values * np.exp(1j * phase))

    cp3 = replace(cp2, scale=cp2.scale * math.exp(-schedule.tau3))
    return (cp0, cp1, cp2, cp3)


def momentum_distribution(psi: WavefunctionField, h: float,
                          pad: int = 8) -> MomentumDistribution:
    """|psi_hat(p)|^2 with psi_hat the hbar-scaled Fourier transform,
    zero-padded for a finer momentum grid."""
    hbar = 2.0 * h
    dx = psi.scale * psi.dxi
    n = len(psi.values) * pad
    spec = np.fft.fft(psi.values, n=n)
    p = 2.0 * math.pi * hbar * np.fft.fftfreq(n, d=dx)
    # |psi_hat|^2 with psi_hat = (2 pi hbar)^(-1/2) integral of the lab
    # wavefunction; the grid-origin phase drops out of the modulus
    q = (psi.dxi ** 2 * psi.scale / (2.0 * math.pi * hbar)) * np.abs(spec) ** 2
    order = np.argsort(p)
    return MomentumDistribution(p=p[order], q=q[order])


@dataclass(frozen=True)
class DensityMatrixField:
    """Complex rho(x, x') on a shared uniform grid in frame coordinates;
    lab-frame rho is scale^(-1) * values(x/scale, x'/scale)."""

    xi: np.ndarray
    values: np.ndarray  # (n, n) complex
    scale: float = 1.0

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    def trace(self) -> float:
        return float(np.real(np.trace(self.values)) * self.dxi)

    def purity(self) -> float:
        return float((np.abs(self.values) ** 2).sum() * self.dxi ** 2)

    def hermiticity_defect(self) -> float:
        d = np.abs(self.values - self.values.conj().T).max()
        return float(d / max(np.abs(self.values).max(), 1e-300))


def coherent_density_matrix(h: float, n: int = 1024,
                            half_extent: float = None) -> DensityMatrixField:
    if half_extent is None:
        half_extent = 14.0 * math.sqrt(h)
    xi = np.linspace(-half_extent, half_extent, n, endpoint=False)
    psi = (2.0 * math.pi * h) ** (-0.25) * np.exp(-xi * xi / (4.0 * h))
    return DensityMatrixField(xi=xi, values=np.outer(psi, psi).astype(complex))


def _dm_check(rho: DensityMatrixField, label: str) -> None:
    if abs(rho.trace() - 1.0) > 1e-4:
        raise SolverFailureError(f"trace drifted to {rho.trace()} at {label}")
    if rho.hermiticity_defect() > 1e-8:
        raise SolverFailureError(f"Hermiticity lost at {label}")


def lindblad_dm_evolve(rho0: DensityMatrixField, schedule: Schedule,
                       params: SemiclassicalParams, steps: int = 100):
    """Position-basis Lindblad evolution; returns the four checkpoints.

    Dilations are carried by the scale; decoherence acts as the diagonal
    multiplier exp[-(D/2 hbar^2)(x-x')^2 dt] plus the double-Fourier
    multiplier exp[-(D/2)(k+k')^2 dt], Strang-split per substep. The cubic
    phase of window 2 is diagonal in position and commutes with the
    x-decoherence factor.
    """
    hbar = params.hbar
    D = params.D
    xi = rho0.xi
    diff = xi[:, None] - xi[None, :]

    def substep_windows(i, sign):
        start, tau = schedule.window(i)
        n = max(1, steps)
        return [(start + tau * j / n, start + tau * (j + 1) / n) for j in range(n)]

    def gauss_int(i, sign, a0, ta, tb, expfac):
        # integral of exp(expfac * a(t)) over [ta, tb], 5-point Gauss
        nodes = ta + (tb - ta) * _GL_X
        start, _ = schedule.window(i)
        a_nodes = a0 + sign * np.array(
            [schedule.bump_integral(i, start, t) for t in nodes])
        return (tb - ta) * float((_GL_W * np.exp(expfac * a_nodes)).sum())

    def p_decoherence(vals, coeff):
        if coeff == 0.0:
            return vals
        k = 2.0 * math.pi * np.fft.fftfreq(len(xi), d=rho0.dxi)
        spec = np.fft.fft2(vals)
        spec *= np.exp(-coeff * (k[:, None] + k[None, :]) ** 2)
        return np.fft.ifft2(spec)

    def stretch_window(rho, i, sign):
        a0 = math.log(rho.scale)
        if D == 0.0:
            _, tau = schedule.window(i)
            return replace(rho, scale=math.exp(a0 + sign * tau))
        vals = rho.values
        for ta, tb in substep_windows(i, sign):
            I_x = gauss_int(i, sign, a0, ta, tb, 2.0)    # int s^2 dt
            I_p = gauss_int(i, sign, a0, ta, tb, -2.0)   # int s^-2 dt
            xdec = np.exp(-(D / (2.0 * hbar ** 2)) * diff ** 2 * (I_x / 2.0))
            vals = vals * xdec
            vals = p_decoherence(vals, (D / 2.0) * I_p)
            vals = vals * xdec
        start, tau = schedule.window(i)
        return replace(rho, values=vals, scale=math.exp(a0 + sign * tau))

    def kick_window(rho):
        start, tau = schedule.window(2)
        s = rho.scale
        x = s * xi
        vals = rho.values
        n = max(1, steps)
        phase_unit = (x[:, None] ** 3 - x[None, :] ** 3) / (3.0 * hbar)
        for j in range(n):
            ta = start + tau * j / n
            tb = start + tau * (j + 1) / n
            delta = schedule.bump_integral(2, ta, tb)
            dt = tb - ta
            half = np.exp(1j * phase_unit * (delta / 2.0))
            if D > 0.0:
                half = half * np.exp(-(D / (2.0 * hbar ** 2))
                                     * (s * diff) ** 2 * (dt / 2.0))
            vals = vals * half
            if D > 0.0:
                vals = p_decoherence(vals, (D / 2.0) * dt / s ** 2)
            vals = vals * half
        return replace(rho, values=vals)

    cp0 = rho0
    _dm_check(cp0, "t0")
    cp1 = stretch_window(cp0, 1, +1.0)
    _dm_check(cp1, "t1")
    cp2 = kick_window(cp1)
    _dm_check(cp2, "t2")
    cp3 = stretch_window(cp2, 3, -1.0)
    _dm_check(cp3, "t3")
    return (cp0, cp1, cp2, cp3)


def dm_momentum_marginal(rho: DensityMatrixField, params: SemiclassicalParams,
                         pad: int = 4) -> MomentumDistribution:
    """q(p) = <p|rho|p> via the autocorrelation C(y) = int rho(x, x - y) dx
    followed by an hbar-scaled Fourier transform."""
    hbar = params.hbar
    n = len(rho.xi)
    dx = rho.scale * rho.dxi
    # C at lab offsets y = r * dx, r = -(n-1) .. n-1
    C = np.empty(2 * n - 1, dtype=complex)
    for r in range(n):
        C[n - 1 + r] = np.trace(rho.values, offset=-r)
        if r:
            C[n - 1 - r] = np.trace(rho.values, offset=r)
    C *= rho.dxi  # sum over the diagonal becomes an integral (lab measure
    # s * dxi against lab density s^-1 * values)
    m = (2 * n - 1) * pad
    # q(p) = (1/2 pi hbar) int C(y) e^{-i p y / hbar} dy
    y0 = -(n - 1) * dx
    spec = np.fft.fft(C, n=m)
    p = 2.0 * math.pi * hbar * np.fft.fftfreq(m, d=dx)
    q = np.real(np.exp(-1j * p * y0 / hbar) * spec) * dx / (2.0 * math.pi * hbar)
    order = np.argsort(p)
    return MomentumDistribution(p=p[order], q=q[order])


def wigner_from_dm(rho: DensityMatrixField, params: SemiclassicalParams):
    """Wigner function on the (x, p) grid implied by the density matrix.

    Uses the anti-diagonal extraction rho(x + y/2, x - y/2) at even lattice
    offsets, so the x grid has half the resolution of the rho grid.
    Returns (x, p, W).
    """
    hbar = params.hbar
    n = len(rho.xi)
    dx = rho.scale * rho.dxi
    half = n // 2
    x = rho.scale * rho.xi[::2][:half]
    # A[m, r] = rho[m + r, m - r], y = 2 r dx
    A = np.zeros((half, n), dtype=complex)
    for m in range(half):
        mm = 2 * m
        rmax = min(mm, n - 1 - mm)
        r = np.arange(-rmax, rmax + 1)
        A[m, r % n] = rho.values[mm + r, mm - r]
    spec = np.fft.fft(A, axis=1)
    p = 2.0 * math.pi * hbar * np.fft.fftfreq(n, d=2.0 * dx)
    # lab rho carries a factor scale^-1, cancelling one scale in dy = 2 dx
    W = np.real(spec) * (2.0 * rho.dxi) / (2.0 * math.pi * hbar)
    order = np.argsort(p)
    return x, p[order], W[:, order]


@dataclass(frozen=True)
class TrajectoryEnsemble:
    x: np.ndarray
    p: np.ndarray
    seed: int

    @property
    def count(self) -> int:
        return len(self.x)


def langevin_sample(m: int, schedule: Schedule, params: SemiclassicalParams,
                    dt: float = 1e-3, seed: int = 0):
    """Euler-Maruyama sampling of the classical dynamics; returns the four
    checkpoint ensembles. All samples start from the coherent-state
    Gaussian with sigma_x = sigma_p = sqrt(h)."""
    if m < 1:
        raise InvalidParameterError("need at least one sample")
    if dt > 1e-3:
        raise InvalidParameterError("dt must be <= 1e-3 for this oracle")
    rng = np.random.Generator(np.random.PCG64(seed))
    sig = math.sqrt(params.h)
    x = rng.normal(0.0, sig, m)
    p = rng.normal(0.0, sig, m)
    root_D_dt = math.sqrt(params.D * dt)
    out = [TrajectoryEnsemble(x.copy(), p.copy(), seed)]
    for i in (1, 2, 3):
        start, tau = schedule.window(i)
        n = int(math.ceil(tau / dt))
        step = tau / n
        rd = math.sqrt(params.D * step)
        for j in range(n):
            t = start + (j + 0.5) * step
            c1 = float(schedule.chi(1, t))
            c2 = float(schedule.chi(2, t))
            c3 = float(schedule.chi(3, t))
            dx = (c1 - c3) * x * step
            dp = (c3 - c1) * p * step + c2 * x * x * step
            x = x + dx
            p = p + dp
            if params.D > 0.0:
                x = x + rd * rng.standard_normal(m)
                p = p + rd * rng.standard_normal(m)
        if np.abs(x).max() > 50.0:
            raise SolverFailureError("trajectory ran away past |x| = 50")
        out.append(TrajectoryEnsemble(x.copy(), p.copy(), seed))
    return tuple(out)


def histogram_distribution(samples: np.ndarray, bins: int,
                           lo: float, hi: float) -> MomentumDistribution:
    """Normalized density histogram on a uniform grid (bin centers)."""
    counts, edges = np.histogram(samples, bins=bins, range=(lo, hi))
    width = edges[1] - edges[0]
    centers = 0.5 * (edges[1:] + edges[:-1])
    q = counts / (len(samples) * width)
    return MomentumDistribution(p=centers, q=q)


_GL_X = (np.polynomial.legendre.leggauss(5)[0] + 1.0) / 2.0
_GL_W = np.polynomial.legendre.leggauss(5)[1] / 2.0
