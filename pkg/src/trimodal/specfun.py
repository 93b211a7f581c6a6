"""Special functions, adaptive quadrature and root finding.

Everything downstream (normalizers, CDFs, entropies, information matrices)
funnels through this module so that tolerances live in one place.  The heavy
lifting is delegated to scipy's C implementations; this layer adds the
domain checks, the tolerance policy and the failure semantics the rest of
the package relies on.
"""

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special as sc

from .errors import BracketError, DomainError, IntegrationError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "regularized_lower_gamma",
    "erf",
    "gauss_2f1_neg",
    "integrate",
    "find_root",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance policy for adaptive quadrature.

    ``abs_tol``/``rel_tol`` bound the acceptable error estimate,
    ``max_subdivisions`` caps the interval splits of the adaptive rule.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be strictly positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureSpec()


def regularized_lower_gamma(p, u):
    """Regularized lower incomplete gamma function P(p, u).

    Parameters
    ----------
    p : float or ndarray, > 0
    u : float or ndarray, >= 0

    Returns
    -------
    Value in [0, 1], nondecreasing in ``u``.
    """
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    if np.any(p <= 0):
        raise DomainError("regularized_lower_gamma requires p > 0")
    if np.any(u < 0):
        raise DomainError("regularized_lower_gamma requires u >= 0")
    out = sc.gammainc(p, u)
    return float(out) if out.ndim == 0 else out


def erf(x):
    """Gauss error function, odd, mapping the real line into (-1, 1)."""
    out = sc.erf(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def gauss_2f1_neg(p, z):
    """Gauss hypergeometric value 2F1(1/2, p + 1/2; 3/2; -z) for z >= 0.

    This is the only hypergeometric pattern the package needs: it carries
    the closed-form normalizer of the Gaussian family member.  The argument
    ``-z`` stays on the continuable side, where the value lies in (0, 1].
    """
    p = np.asarray(p, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(p <= 0):
        raise DomainError("gauss_2f1_neg requires p > 0")
    if np.any(z < 0):
        raise DomainError("gauss_2f1_neg requires z >= 0")
    out = sc.hyp2f1(0.5, p + 0.5, 1.5, -z)
    if not np.all(np.isfinite(out)):
        raise IntegrationError("hypergeometric evaluation did not converge")
    return float(out) if out.ndim == 0 else out


def integrate(f, a, b, spec=None):
    """Adaptive quadrature of ``f`` on (a, b), endpoints may be infinite.

    Returns
    -------
    (value, err_est) : tuple of float

    Raises
    ------
    IntegrationError
        When the adaptive rule reports non-convergence and the error
        estimate exceeds the tolerance; the partial value and estimate are
        attached to the exception.
    """
    spec = spec or DEFAULT_QUAD
    result = scipy.integrate.quad(
        f,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, err_est = result[0], result[1]
    if len(result) > 3:  # quad appended a warning message
        tol = max(spec.abs_tol, spec.rel_tol * abs(value))
        if not np.isfinite(value) or err_est > 100 * tol:
            raise IntegrationError(
                f"quadrature did not converge: {result[3]}",
                value=value,
                err_est=err_est,
            )
    return value, err_est


def find_root(f, lo, hi, tol=1e-12):
    """Brent root of a continuous ``f`` bracketed on [lo, hi].

    The endpoints must satisfy f(lo) * f(hi) <= 0.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"
        )
    return float(scipy.optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
