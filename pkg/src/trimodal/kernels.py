"""Base kernel densities used to build the trimodal family.

Six kernels are shipped: normal, laplace, logistic, cauchy, student_t and
gumbel.  Each exposes the density, CDF, quantile, log-density and the
derivative ratio g'(x)/g(x).  The four kernels of the symmetric class
g'(x) = -x * h(x**2) * g(x) additionally expose their radial decay
function ``h`` which drives the analytic modality classifier.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc

from . import specfun
from .errors import DomainError, MomentError, UnsupportedKernelError

__all__ = ["Kernel", "HFunction", "get_kernel", "KERNEL_NAMES"]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class HFunction:
    """Radial decay function h with g'(x) = -x * h(x**2) * g(x).

    ``constant`` kind evaluates to ``c``; the other kinds follow the
    rational form c / (shift + y)**exponent.
    """

    kind: str  # constant | inverse_sqrt | cauchy_like | student_like
    c: float = 1.0
    shift: float = 0.0
    exponent: float = 0.0

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(np.float64(self.c), y.shape).copy() if y.ndim else float(self.c)
        out = self.c / (self.shift + y) ** self.exponent
        return float(out) if out.ndim == 0 else out


def _as_float(x):
    return np.asarray(x, dtype=float)


def _maybe_scalar(out):
    return float(out) if np.ndim(out) == 0 else out


class Kernel:
    """A standardized kernel density g with CDF G on the whole real line."""

    name = ""
    symmetric_about_zero = True
    support = (-math.inf, math.inf)
    shape_param = None

    # -- densities ----------------------------------------------------
    def pdf(self, x):
        return _maybe_scalar(np.exp(self.log_pdf(x)))

    def log_pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def quantile(self, u):
        u = _as_float(u)
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise DomainError("quantile requires u in (0, 1)")
        return _maybe_scalar(self._quantile(u))

    def _quantile(self, u):
        raise NotImplementedError

    def log_pdf_derivative_ratio(self, x):
        """g'(x) / g(x), defined wherever g(x) > 0."""
        raise NotImplementedError

    # -- symmetric-class structure -------------------------------------
    def h_function(self):
        raise UnsupportedKernelError(
            f"kernel '{self.name}' has no radial decay function h"
        )

    # -- moments --------------------------------------------------------
    def max_moment_order(self):
        """Largest n (exclusive upper bound inf allowed) with E|W|^n finite."""
        return math.inf

    def even_moment(self, k):
        """E[W**(2k)] for integer k >= 0."""
        if k < 0 or k != int(k):
            raise DomainError("even_moment requires integer k >= 0")
        k = int(k)
        if k == 0:
            return 1.0
        if 2 * k >= self.max_moment_order():
            raise MomentError(
                f"E[W^{2 * k}] does not exist for kernel '{self.name}'"
            )
        return self._even_moment(k)

    def _even_moment(self, k):
        value, _ = specfun.integrate(
            lambda w: w ** (2 * k) * self.pdf(w), -math.inf, math.inf
        )
        return value

    def __repr__(self):
        extra = f", nu={self.shape_param}" if self.shape_param is not None else ""
        return f"Kernel({self.name!r}{extra})"


class NormalKernel(Kernel):
    name = "normal"

    def log_pdf(self, x):
        x = _as_float(x)
        return _maybe_scalar(-0.5 * x * x - _LOG_SQRT_2PI)

    def cdf(self, x):
        return _maybe_scalar(sc.ndtr(_as_float(x)))

    def _quantile(self, u):
        return sc.ndtri(u)

    def log_pdf_derivative_ratio(self, x):
        return _maybe_scalar(-_as_float(x))

    def h_function(self):
        return HFunction(kind="constant", c=1.0)

    def _even_moment(self, k):
        # (2k-1)!! = (2k)! / (2^k k!)
        return math.exp(sc.gammaln(2 * k + 1) - k * math.log(2.0) - sc.gammaln(k + 1))


class LaplaceKernel(Kernel):
    name = "laplace"

    def log_pdf(self, x):
        x = _as_float(x)
        return _maybe_scalar(-np.abs(x) - math.log(2.0))

    def cdf(self, x):
        x = _as_float(x)
        out = np.where(x < 0, 0.5 * np.exp(-np.abs(x)), 1.0 - 0.5 * np.exp(-np.abs(x)))
        return _maybe_scalar(out)

    def _quantile(self, u):
        return np.where(u < 0.5, np.log(2.0 * u), -np.log(2.0 * (1.0 - u)))

    def log_pdf_derivative_ratio(self, x):
        return _maybe_scalar(-np.sign(_as_float(x)))

    def h_function(self):
        return HFunction(kind="inverse_sqrt", c=1.0, shift=0.0, exponent=0.5)

    def _even_moment(self, k):
        return math.gamma(2 * k + 1)


class LogisticKernel(Kernel):
    name = "logistic"

    def log_pdf(self, x):
        x = _as_float(x)
        a = np.abs(x)
        return _maybe_scalar(-a - 2.0 * np.log1p(np.exp(-a)))

    def cdf(self, x):
        return _maybe_scalar(sc.expit(_as_float(x)))

    def _quantile(self, u):
        return np.log(u / (1.0 - u))

    def log_pdf_derivative_ratio(self, x):
        return _maybe_scalar(-np.tanh(_as_float(x) / 2.0))


class CauchyKernel(Kernel):
    name = "cauchy"

    def log_pdf(self, x):
        x = _as_float(x)
        return _maybe_scalar(-math.log(math.pi) - np.log1p(x * x))

    def cdf(self, x):
        x = _as_float(x)
        return _maybe_scalar(np.arctan(x) / math.pi + 0.5)

    def _quantile(self, u):
        return np.tan(math.pi * (u - 0.5))

    def log_pdf_derivative_ratio(self, x):
        x = _as_float(x)
        return _maybe_scalar(-2.0 * x / (1.0 + x * x))

    def h_function(self):
        return HFunction(kind="cauchy_like", c=2.0, shift=1.0, exponent=1.0)

    def max_moment_order(self):
        return 1  # not even the mean exists


class StudentTKernel(Kernel):
    name = "student_t"

    def __init__(self, nu):
        if not (nu > 0):
            raise DomainError("student_t requires nu > 0")
        self.shape_param = float(nu)
        self._log_const = (
            sc.gammaln((nu + 1.0) / 2.0)
            - sc.gammaln(nu / 2.0)
            - 0.5 * math.log(nu * math.pi)
        )

    def log_pdf(self, x):
        x = _as_float(x)
        nu = self.shape_param
        return _maybe_scalar(self._log_const - 0.5 * (nu + 1.0) * np.log1p(x * x / nu))

    def cdf(self, x):
        return _maybe_scalar(sc.stdtr(self.shape_param, _as_float(x)))

    def _quantile(self, u):
        return sc.stdtrit(self.shape_param, u)

    def log_pdf_derivative_ratio(self, x):
        x = _as_float(x)
        nu = self.shape_param
        return _maybe_scalar(-(nu + 1.0) * x / (nu + x * x))

    def h_function(self):
        nu = self.shape_param
        return HFunction(kind="student_like", c=nu + 1.0, shift=nu, exponent=1.0)

    def max_moment_order(self):
        return self.shape_param

    def _even_moment(self, k):
        nu = self.shape_param
        return math.exp(
            k * math.log(nu)
            + sc.gammaln(k + 0.5)
            + sc.gammaln(nu / 2.0 - k)
            - sc.gammaln(0.5)
            - sc.gammaln(nu / 2.0)
        )


class GumbelKernel(Kernel):
    name = "gumbel"
    symmetric_about_zero = False

    def log_pdf(self, x):
        x = _as_float(x)
        with np.errstate(over="ignore"):
            return _maybe_scalar(-x - np.exp(-x))

    def cdf(self, x):
        x = _as_float(x)
        with np.errstate(over="ignore"):
            return _maybe_scalar(np.exp(-np.exp(-x)))

    def _quantile(self, u):
        return -np.log(-np.log(u))

    def log_pdf_derivative_ratio(self, x):
        x = _as_float(x)
        return _maybe_scalar(np.expm1(-x))


_REGISTRY = {
    "normal": NormalKernel,
    "laplace": LaplaceKernel,
    "logistic": LogisticKernel,
    "cauchy": CauchyKernel,
    "student_t": StudentTKernel,
    "gumbel": GumbelKernel,
}

KERNEL_NAMES = tuple(_REGISTRY)


def get_kernel(name, nu=None):
    """Look up a kernel by its CLI/config name.

    ``student_t`` requires the degrees-of-freedom argument ``nu``; for every
    other kernel ``nu`` must be omitted.
    """
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise UnsupportedKernelError(
            f"unknown kernel '{name}'; choose from {sorted(_REGISTRY)}"
        ) from None
    if cls is StudentTKernel:
        if nu is None:
            raise DomainError("student_t kernel requires nu")
        return cls(nu)
    if nu is not None:
        raise DomainError(f"kernel '{name}' does not take nu")
    return cls()
