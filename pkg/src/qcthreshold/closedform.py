"""Analytic final-time momentum distributions, checkpoint moment tables,
and the error-bound constants of the diffusive correction estimates.

The closed evolution sends the initial coherent state through stretch,
cubic kick, and squeeze. The final quantum momentum density is an Airy
function squared times an exponential; the classical one is the law of
Z + g*Xi^2 with Z standard normal and Xi standard normal independent,
expressible through the parabolic cylinder function D_{-1/2}.

Scaled variables used throughout: with

    S = sqrt(h) * exp(tau3 - tau1)      (momentum scale at the final time)
    g = tau2 * sqrt(h) * exp(3*tau1)    (kick strength in scaled units)

the final classical momentum is S * (Z + g*Xi^2). At the standard
durations tau1 = (1/6)log(1/h), tau3 = (2/3)log(1/h) both S = 1 and
g = tau2, which is why the final densities are h-independent there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import erf as _erf_vec

from .core import MomentRecord, Schedule, is_standard_schedule
from .errors import InvalidParameterError, RangeError, ValidityError
from .specialfn import (
    PCF_MAX_ARG,
    QuadratureSpec,
    adaptive_integral,
    airy_ai,
    airy_ai_prime,
    erf,
    parabolic_cylinder_D,
)

__all__ = [
    "BoundConstants",
    "quantum_momentum_pdf",
    "classical_momentum_pdf",
    "predicted_moments",
    "constants",
    "duhamel_bound",
]

#: Exponent above which exp() would overflow double precision.
_EXP_OVERFLOW = 700.0
#: Airy arguments past this are evaluated as negligible or rejected.
_AIRY_CUT = 50.0


def _scales(tau1: float, tau2: float, tau3: float, h: float):
    if h <= 0 or min(tau1, tau2, tau3) <= 0:
        raise InvalidParameterError("need h > 0 and all durations positive")
    S = math.sqrt(h) * math.exp(tau3 - tau1)
    g = tau2 * math.sqrt(h) * math.exp(3.0 * tau1)
    return S, g


def quantum_momentum_pdf(p, tau1: float, tau2: float, tau3: float, h: float):
    """Final-time quantum momentum density.

    Equals (2^(1/6) sqrt(pi) / (tau2^(2/3) h^(5/6) e^(tau1+tau3)))
    * exp[(E - 6p) / (12 tau2 h e^(2 tau1 + tau3))] * Ai(zeta)^2 with
    E = e^(tau3 - 4 tau1) / tau2 and
    zeta = (E - 4p) / (2^(8/3) tau2^(1/3) h^(2/3) e^(tau3)).
    Accepts scalar or array p.
    """
    if h <= 0 or min(tau1, tau2, tau3) <= 0:
        raise InvalidParameterError("need h > 0 and all durations positive")
    arr = np.asarray(p, dtype=float)
    E = math.exp(tau3 - 4.0 * tau1) / tau2
    denom_exp = 12.0 * tau2 * h * math.exp(2.0 * tau1 + tau3)
    denom_ai = 2.0 ** (8.0 / 3.0) * tau2 ** (1.0 / 3.0) * h ** (2.0 / 3.0) \
        * math.exp(tau3)
    amp = 2.0 ** (1.0 / 6.0) * math.sqrt(math.pi) / (
        tau2 ** (2.0 / 3.0) * h ** (5.0 / 6.0) * math.exp(tau1 + tau3))

    expo = (E - 6.0 * arr) / denom_exp
    zeta = (E - 4.0 * arr) / denom_ai
    if np.any(expo > _EXP_OVERFLOW):
        raise RangeError("momentum so negative the exponential factor overflows")

    out = np.zeros_like(arr)
    near = np.abs(zeta) <= _AIRY_CUT
    out[near] = amp * np.exp(expo[near]) * airy_ai(zeta[near]) ** 2
    # Past the Airy evaluation range the density must be negligible to be
    # safely zeroed. For zeta > 50 (momentum far below the support) Ai^2
    # decays like exp(-(4/3) zeta^(3/2)), which dominates any exponential
    # prefactor here; for zeta < -50 Ai^2 only oscillates with bounded
    # amplitude, so the envelope itself must be tiny.
    high = zeta > _AIRY_CUT
    if np.any(expo[high] - (4.0 / 3.0) * zeta[high] ** 1.5 > -30.0):
        raise RangeError("Airy argument out of range at non-negligible weight")
    low = zeta < -_AIRY_CUT
    if np.any(expo[low] > -30.0):
        raise RangeError("Airy argument out of range at non-negligible weight")
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


def _classical_unit_pdf_point(P: float, g: float) -> float:
    """Density of Z + g*Xi^2 at P by direct quadrature (any P)."""
    upper = max(4.0, P + 40.0)

    def f(s):
        return math.exp(-0.5 * (P - s) ** 2 - s / (2.0 * g)) / math.sqrt(s)

    res = adaptive_integral(f, (0.0, upper),
                            QuadratureSpec(abs_tol=1e-14, rel_tol=1e-11,
                                           max_subdivisions=400,
                                           substitution="sqrt_lower"))
    return res.value / (2.0 * math.pi * math.sqrt(g))


def classical_momentum_pdf(p, tau1: float, tau2: float, tau3: float, h: float):
    """Final-time classical momentum density.

    In scaled units P = p/S the density is
        (1 / (2 sqrt(pi g))) * exp[-P^2/2 + (P - 1/(2g))^2 / 4] * D_{-1/2}(1/(2g) - P),
    divided by S to return to lab momentum. Where the parabolic cylinder
    argument leaves the supported range the integral representation is
    evaluated directly instead. Accepts scalar or array p.
    """
    S, g = _scales(tau1, tau2, tau3, h)
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    P = arr / S
    z = 1.0 / (2.0 * g) - P
    out = np.empty_like(P)

    near = np.abs(z) <= PCF_MAX_ARG
    if np.any(near):
        Pn, zn = P[near], z[near]
        out[near] = (np.exp(-0.5 * Pn * Pn + 0.25 * zn * zn)
                     * parabolic_cylinder_D(-0.5, zn)
                     / (2.0 * math.sqrt(math.pi * g)))
    idx = np.nonzero(~near)[0]
    for i in idx:
        out.flat[i] = _classical_unit_pdf_point(float(P.flat[i]), g)
    out = out / S
    if np.isscalar(p) or np.asarray(p).ndim == 0:
        return float(out[0])
    return out.reshape(np.asarray(p).shape)


def _gauss_kernel(t: np.ndarray, deriv: int) -> np.ndarray:
    phi = np.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
    if deriv == 0:
        return phi
    if deriv == 2:
        return (t * t - 1.0) * phi
    raise InvalidParameterError("only derivatives 0 and 2 are supported")


def _classical_unit_curve(P: np.ndarray, g: float, deriv: int = 0) -> np.ndarray:
    """Density of Z + g*Xi^2 (or its 2nd derivative) on a uniform P grid.

    Convolves exact per-cell masses of the Gamma(1/2, 2g) component with a
    sampled standard normal kernel; cell-midpoint error is O(dP^2).
    """
    d = float(P[1] - P[0])
    s_max = 2.0 * g * 45.0  # Gamma tail below ~1e-9 of total mass
    M = int(math.ceil(s_max / d))
    edges = d * np.arange(M + 1)
    masses = _erf_vec(np.sqrt(edges[1:] / (2.0 * g))) \
        - _erf_vec(np.sqrt(edges[:-1] / (2.0 * g)))
    centers = 0.5 * (edges[1:] + edges[:-1])
    # c(P_i) = sum_j mass_j * phi(P_i - s_j); indices line up as a linear
    # convolution over the common spacing d.
    kernel = _gauss_kernel(P[0] - centers[0] + np.arange(-(M - 1), len(P)) * d, deriv)
    return fftconvolve(kernel, masses, mode="valid")


def _quantum_unit_curve(p: np.ndarray, tau2: float, deriv: int = 0) -> np.ndarray:
    """Standard-schedule quantum density (h-independent form) or its second
    derivative, from the analytic differentiation of exp * Ai^2."""
    amp = 2.0 ** (1.0 / 6.0) * math.sqrt(math.pi) / tau2 ** (2.0 / 3.0)
    beta = -1.0 / (2.0 * tau2)
    dz = 2.0 ** (8.0 / 3.0) * tau2 ** (1.0 / 3.0)
    zp = -4.0 / dz
    zeta = (1.0 / tau2 - 4.0 * p) / dz
    # outside |zeta| <= 50 the density is negligible: for zeta > 50 the Airy
    # factor is exponentially small, for zeta < -50 the envelope is
    expo = np.exp((1.0 / tau2 - 6.0 * p) / (12.0 * tau2))
    near = np.abs(zeta) <= _AIRY_CUT
    zeta = np.where(near, zeta, 0.0)
    ai = np.where(near, airy_ai(zeta), 0.0)
    q = amp * expo * ai * ai
    if deriv == 0:
        return q
    aip = np.where(near, airy_ai_prime(zeta), 0.0)
    cross = amp * expo * ai * aip
    prime_sq = amp * expo * aip * aip
    # (e^{beta p} Ai^2)'' with Ai'' = zeta * Ai
    return (beta * beta * q + 4.0 * beta * zp * cross
            + 2.0 * zp * zp * (prime_sq + zeta * q))


@dataclass(frozen=True)
class BoundConstants:
    """Constants of the diffusive Duhamel estimates and the final bound."""

    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    C_qu: float
    C_cl: float
    c_bar: float
    c0: float
    C_total: float


def _standard_grid(tau2: float, n: int = 1 << 15):
    sigma = math.sqrt(1.0 + 2.0 * tau2 * tau2)
    lo = -14.0 - 2.0 * sigma
    hi = 40.0 * tau2 + 12.0 * sigma + 6.0
    return np.linspace(lo, hi, n)


@lru_cache(maxsize=16)
def constants(tau2: float = 1.0) -> BoundConstants:
    """All ten bound constants at the standard schedule with the given tau2.

    C1, C3, C4 are exact formulas; C2 and C5 are L1 norms of second
    derivatives of the closed-form densities; c_bar and c0 compare the two
    densities in L1 and through the observable exp(-p^2).
    """
    if tau2 <= 0:
        raise InvalidParameterError("tau2 must be positive")
    t2 = tau2 * tau2
    C1 = 0.25 * (1.0 + math.sqrt(3.0) + (1.0 + 2.0 * t2)
                 + math.sqrt(3.0 + 12.0 * t2 + 60.0 * t2 * t2))
    C3 = 2.0 * math.sqrt(2.0 / (math.pi * math.e))
    C4 = math.sqrt(2.0 / math.pi) * (
        1.0 + 4.0 * math.exp(-0.25) / math.sqrt(math.pi) - 2.0 * erf(0.5))

    p = _standard_grid(tau2)
    dp = float(p[1] - p[0])
    q = _quantum_unit_curve(p, tau2)
    c = _classical_unit_curve(p, tau2)
    q2 = _quantum_unit_curve(p, tau2, deriv=2)
    c2 = _classical_unit_curve(p, tau2, deriv=2)

    C2 = 0.5 * float(np.abs(q2).sum() * dp)
    C5 = float(np.abs(c2).sum() * dp)
    c_bar = float(np.abs(c - q).sum() * dp)
    w = np.exp(-p * p)
    c0 = abs(float(((q - c) * w).sum() * dp))

    C_qu = C1 + (2.0 / 3.0) * C2
    C_cl = (C3 * (1.0 + 4.0 * t2) / (1.0 + 2.0 * t2)
            + C4 * tau2 / math.sqrt(1.0 + 2.0 * t2)
            + 0.5 * C5)
    return BoundConstants(C1=C1, C2=C2, C3=C3, C4=C4, C5=C5,
                          C_qu=C_qu, C_cl=C_cl, c_bar=c_bar, c0=c0,
                          C_total=C_cl + C_qu)


def predicted_moments(checkpoint: int, tau1: float, tau2: float, tau3: float,
                      h: float, kind: str = "classical") -> MomentRecord:
    """Analytic lab-frame means and central moments at a checkpoint.

    Quantum and classical agree in everything except the third central
    momentum moment from checkpoint 2 on, where the cubic correction to the
    transport subtracts exactly 2*tau2*h^2 (scaled by e^(3*tau3) at the end).
    """
    if checkpoint not in (0, 1, 2, 3):
        raise InvalidParameterError("checkpoint must be 0..3")
    if kind not in ("wigner", "quantum", "classical"):
        raise InvalidParameterError(f"unknown kind {kind!r}")
    if h <= 0 or min(tau1, tau2, tau3) <= 0:
        raise InvalidParameterError("need h > 0 and all durations positive")
    quantum = kind in ("wigner", "quantum")

    if checkpoint == 0:
        return MomentRecord(0.0, 0.0, h, 0.0, 3 * h * h, h, 0.0, 3 * h * h)

    e2t1 = math.exp(2.0 * tau1)
    var_x = h * e2t1
    m4_x = 3.0 * h * h * e2t1 * e2t1
    if checkpoint == 1:
        return MomentRecord(0.0, 0.0, var_x, 0.0, m4_x,
                            h / e2t1, 0.0, 3.0 * h * h / (e2t1 * e2t1))

    # checkpoint 2: kick adds tau2 * x^2 to p; x-moments unchanged
    u = tau2 * tau2 * h * e2t1 ** 3  # g^2 in the scaled-variable sense
    mean_p = tau2 * h * e2t1
    var_p = (h / e2t1) * (1.0 + 2.0 * u)
    m3_p = 8.0 * tau2 ** 3 * h ** 3 * e2t1 ** 3
    if quantum:
        m3_p -= 2.0 * tau2 * h * h
    m4_p = (3.0 * h * h / (e2t1 * e2t1)) * (1.0 + 4.0 * u + 20.0 * u * u)
    if checkpoint == 2:
        return MomentRecord(0.0, mean_p, var_x, 0.0, m4_x, var_p, m3_p, m4_p)

    # checkpoint 3: x scales by e^{-tau3}, p by e^{tau3}
    ex = math.exp(-tau3)
    ep = math.exp(tau3)
    return MomentRecord(0.0, mean_p * ep,
                        var_x * ex * ex, 0.0, m4_x * ex ** 4,
                        var_p * ep * ep, m3_p * ep ** 3, m4_p * ep ** 4)


def duhamel_bound(side: str, h: float, D: float, schedule: Schedule) -> float:
    """Upper bound on the L1 deviation of the diffusive final momentum
    density from its closed-system counterpart.

    For the standard schedule this is C_side * (1 + log(1/h)) * D / h^(4/3);
    otherwise the pre-simplification two-term form is used.
    """
    if side not in ("quantum", "classical"):
        raise InvalidParameterError(f"side must be quantum or classical, got {side!r}")
    if h <= 0 or D < 0:
        raise InvalidParameterError("need h > 0 and D >= 0")
    if schedule.tau1 >= 0.25 * math.log(1.0 / h):
        raise ValidityError("bound requires tau1 < (1/4) log(1/h)")
    k = constants(schedule.tau2)
    if is_standard_schedule(schedule, h):
        C = k.C_qu if side == "quantum" else k.C_cl
        return C * (1.0 + math.log(1.0 / h)) * D / h ** (4.0 / 3.0)
    t2 = schedule.tau2 * schedule.tau2
    early = (schedule.tau1 + schedule.tau2) * D * math.exp(2 * schedule.tau1) / h
    late = schedule.tau3 * D * math.exp(2 * schedule.tau3)
    if side == "quantum":
        return k.C1 * early + k.C2 * late
    pref = (k.C3 * (1.0 + 4.0 * t2) / (1.0 + 2.0 * t2)
            + k.C4 * schedule.tau2 / math.sqrt(1.0 + 2.0 * t2))
    return pref * early + 0.5 * k.C5 * late
