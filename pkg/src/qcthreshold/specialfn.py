"""Special functions and quadrature used by the closed-form evaluators.

Airy Ai, the parabolic cylinder function D_ell (via its real integral
representation, valid for ell < 0), Gamma, erf, and a thin adaptive
quadrature wrapper with endpoint-singularity substitutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import integrate
from scipy import special as _sp

from .errors import ConvergenceError, DomainError, RangeError

__all__ = [
    "QuadratureSpec",
    "IntegralResult",
    "adaptive_integral",
    "airy_ai",
    "airy_ai_prime",
    "parabolic_cylinder_D",
    "gamma",
    "erf",
]

gamma = math.gamma
erf = math.erf

#: |z| beyond which airy_ai refuses to evaluate (deep under/overflow regime).
AIRY_MAX_ARG = 50.0

#: |z| beyond which the D_ell integrand would overflow double precision.
PCF_MAX_ARG = 36.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and subdivision budget for adaptive integration.

    ``substitution`` handles integrable endpoint singularities:
      - "none": integrand is smooth on the (open) domain
      - "sqrt_lower": integrand behaves like s**(-1/2) at the lower endpoint;
        the change of variables s = a + u**2 removes it.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    substitution: str = "none"

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.substitution not in ("none", "sqrt_lower"):
            raise DomainError(f"unknown substitution {self.substitution!r}")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float


def adaptive_integral(
    f: Callable[[float], float],
    domain: Tuple[float, float],
    spec: QuadratureSpec = QuadratureSpec(),
) -> IntegralResult:
    """Adaptively integrate ``f`` over ``domain`` (upper bound may be inf).

    Returns the estimate together with the achieved error estimate. Raises
    ConvergenceError (carrying the partial result) if the subdivision budget
    is exhausted before the tolerance is met.
    """
    a, b = domain
    g = f
    if spec.substitution == "sqrt_lower":
        if not math.isfinite(a):
            raise DomainError("sqrt_lower substitution needs a finite lower endpoint")

        def g(u, _f=f, _a=a):
            return 2.0 * u * _f(_a + u * u)

        a, b = 0.0, math.sqrt(b - a) if math.isfinite(b) else math.inf

    out = integrate.quad(
        g, a, b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, err = out[0], out[1]
    ier = 0 if len(out) < 4 else 1
    if ier or err > max(spec.abs_tol, spec.rel_tol * abs(value)) * 50:
        raise ConvergenceError(
            f"quadrature did not converge (estimate {value}, error {err})",
            partial_result=IntegralResult(value, err),
        )
    return IntegralResult(value, err)


def airy_ai(z):
    """Airy function Ai(z) for real z with |z| <= AIRY_MAX_ARG.

    Accepts scalars or arrays. Backed by the library implementation; the
    test suite cross-checks it against quadrature of the oscillatory
    integral representation along a rotated contour.
    """
    arr = np.asarray(z, dtype=float)
    if np.any(np.abs(arr) > AIRY_MAX_ARG):
        raise RangeError(f"airy_ai argument exceeds |z| = {AIRY_MAX_ARG}")
    ai = _sp.airy(arr)[0]
    return float(ai) if np.isscalar(z) or arr.ndim == 0 else ai


def airy_ai_prime(z):
    """Derivative Ai'(z), same domain policy as :func:`airy_ai`."""
    arr = np.asarray(z, dtype=float)
    if np.any(np.abs(arr) > AIRY_MAX_ARG):
        raise RangeError(f"airy_ai_prime argument exceeds |z| = {AIRY_MAX_ARG}")
    aip = _sp.airy(arr)[1]
    return float(aip) if np.isscalar(z) or arr.ndim == 0 else aip


def _pcf_integral(ell: float, z: float) -> float:
    """Integral part of D_ell: int_0^inf exp(-z*s - s^2/2) s^(-ell-1) ds.

    Uses s = u**2, which turns the s^(-1/2) endpoint singularity at
    ell = -1/2 into a smooth integrand:
        2 * int_0^inf exp(-z*u^2 - u^4/2) u^(-2*ell - 1) du
    """
    # Truncate where the exponent is below -800 relative to its maximum.
    zmag = abs(z)
    upper = math.sqrt(zmag + math.sqrt(zmag * zmag + 1600.0)) + 1.0

    def integrand(u):
        return 2.0 * math.exp(-z * u * u - 0.5 * u ** 4) * u ** (-2.0 * ell - 1.0)

    out = integrate.quad(integrand, 0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=400)
    return out[0]


def parabolic_cylinder_D(ell: float, z):
    """Parabolic cylinder function D_ell(z) for ell < 0.

    Computed from the real integral representation
        D_ell(z) = exp(-z^2/4) / Gamma(-ell) * int_0^inf e^{-zs - s^2/2} s^{-ell-1} ds,
    which is valid only for Re(ell) < 0. Accepts scalar or array z with
    |z| <= PCF_MAX_ARG.
    """
    if ell >= 0:
        raise DomainError("integral representation of D_ell requires ell < 0")
    arr = np.asarray(z, dtype=float)
    if np.any(np.abs(arr) > PCF_MAX_ARG):
        raise RangeError(f"parabolic_cylinder_D argument exceeds |z| = {PCF_MAX_ARG}")
    norm = 1.0 / gamma(-ell)

    def one(zv: float) -> float:
        return norm * math.exp(-zv * zv / 4.0) * _pcf_integral(ell, zv)

    if np.isscalar(z) or arr.ndim == 0:
        return one(float(arr))
    return np.array([one(zv) for zv in arr.ravel()]).reshape(arr.shape)
