"""The trimodal distribution family.

A kernel density g is reweighted by ``rho + delta * T((x - mu) / sigma)``
where T is the regularized lower incomplete gamma of (x/alpha)**2, and
renormalized.  Depending on (alpha, rho, delta, p) the resulting density has
one, two or three modes; the root count of an explicit radial function
decides which, without ever scanning the density itself.

Conventions
-----------
The density is ``f(x) = [rho + delta * T(w)] * g(w) / Z`` with
``w = (x - mu) / sigma`` and the normalizing factor

    Z = (rho + delta) * sigma + delta * sigma * (E[G(-a*sqrt(Y))] - E[G(a*sqrt(Y))]),

Y ~ Gamma(p, 1).  Z carries the dimension of sigma, so f integrates to one.
For the normal kernel Z has a closed form through 2F1; every other kernel
uses quadrature.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize
import scipy.special as sc

from . import specfun
from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    ModalityError,
    MomentError,
    UnsupportedKernelError,
)
from .kernels import Kernel

__all__ = [
    "ParamVector",
    "TrimodalDistribution",
    "ModalityReport",
    "MixtureWeights",
    "t_transform",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

UNIMODAL = "Unimodal"
BIMODAL = "Bimodal"
TRIMODAL = "Trimodal"


def t_transform(x, alpha, p):
    """Gamma-CDF reweighting factor T(x) = P(p, (x/alpha)**2).

    Even in x, zero at the origin and increasing to one in both tails.
    For p = 3/2 this is the Maxwell CDF with scale ``alpha`` on x > 0.
    """
    if not (alpha > 0):
        raise DomainError("t_transform requires alpha > 0")
    if not (p > 0):
        raise DomainError("t_transform requires p > 0")
    x = np.asarray(x, dtype=float)
    out = sc.gammainc(p, (x / alpha) ** 2)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ParamVector:
    """The five free parameters plus the fixed shape exponent p."""

    mu: float
    sigma: float
    alpha: float
    rho: float
    delta: float
    p: float = 1.5

    def __post_init__(self):
        if not np.isfinite([self.mu, self.sigma, self.alpha, self.rho, self.delta, self.p]).all():
            raise DomainError("parameters must be finite")
        if not self.sigma > 0:
            raise DomainError("sigma must be > 0")
        if not self.alpha > 0:
            raise DomainError("alpha must be > 0")
        if self.rho < 0 or self.delta < 0:
            raise DomainError("rho and delta must be >= 0")
        if self.rho == 0 and self.delta == 0:
            raise DomainError("rho and delta cannot both be zero")
        if not self.p > 0:
            raise DomainError("p must be > 0")

    def as_array(self):
        """Free parameters in the canonical order (mu, sigma, alpha, rho, delta)."""
        return np.array([self.mu, self.sigma, self.alpha, self.rho, self.delta])

    @property
    def p_is_integer(self):
        return self.p >= 1.0 and abs(self.p - round(self.p)) < 1e-12


@dataclass(frozen=True)
class ModalityReport:
    modality: str  # Unimodal | Bimodal | Trimodal
    modes: tuple
    minima: tuple
    r_roots: tuple


@dataclass(frozen=True)
class MixtureWeights:
    """Weights of the expansion f = c0 * f0 + sum_k ck * fk, k = p..K."""

    c0: float
    ck: tuple
    truncation_K: int
    partial_sum: float
    converged: bool


class _GammaKernelTable:
    """Cumulative fixed-panel quadrature of  int_0^v  f(z) z**(2p-1) e**(-z*z) dz.

    The origin panel uses a Gauss-Jacobi rule so the z**(2p-1) weight is
    integrated exactly for any p > 0; interior panels use Gauss-Legendre.
    The table caps the upper limit at Z_CAP where the Gaussian factor is
    below 1e-35.
    """

    Z_CAP = 9.0
    PANEL = 0.5
    NODES = 24

    def __init__(self, p, f):
        self.beta = 2.0 * p - 1.0
        self.f = f
        xj, wj = sc.roots_jacobi(self.NODES, 0.0, self.beta)
        self._jac_t = (1.0 + xj) / 2.0
        self._jac_w = wj / 2.0 ** (self.beta + 1.0)
        xl, wl = sc.roots_legendre(self.NODES)
        self._leg_x = xl
        self._leg_w = wl
        self.breaks = np.arange(0.0, self.Z_CAP + 0.5 * self.PANEL, self.PANEL)

        # cumulative integrals at the breakpoints, all nodes evaluated in one call
        b_lo = self.breaks[1:-1]
        b_hi = self.breaks[2:]
        mid = 0.5 * (b_lo + b_hi)[:, None]
        half = 0.5 * (b_hi - b_lo)[:, None]
        leg_nodes = mid + half * xl[None, :]
        jac_nodes = self.breaks[1] * self._jac_t
        vals = f(np.concatenate([jac_nodes, leg_nodes.ravel()]))
        jac_vals = vals[: self.NODES]
        leg_vals = vals[self.NODES :].reshape(leg_nodes.shape)

        first = self.breaks[1] ** (self.beta + 1.0) * np.dot(
            jac_vals * np.exp(-jac_nodes**2), self._jac_w
        )
        interior = np.einsum(
            "ij,j->i",
            leg_vals * leg_nodes**self.beta * np.exp(-(leg_nodes**2)),
            wl,
        ) * half[:, 0]
        self.cum = np.concatenate([[0.0, first], first + np.cumsum(interior)])
        self.total = float(self.cum[-1])

    def lower(self, v):
        """Vectorized integral from 0 to min(v, Z_CAP)."""
        v = np.minimum(np.asarray(v, dtype=float), self.breaks[-1])
        scalar = v.ndim == 0
        v = np.atleast_1d(v)
        idx = np.clip(
            np.searchsorted(self.breaks, v, side="right") - 1, 0, len(self.breaks) - 2
        )
        out = self.cum[idx].copy()

        origin = idx == 0
        if np.any(origin):
            a = v[origin]
            nodes = a[:, None] * self._jac_t[None, :]
            vals = self.f(nodes) * np.exp(-(nodes**2))
            out[origin] = a ** (self.beta + 1.0) * (vals @ self._jac_w)
        inner = ~origin
        if np.any(inner):
            lo = self.breaks[idx[inner]]
            hi = v[inner]
            mid = 0.5 * (lo + hi)[:, None]
            half = 0.5 * (hi - lo)[:, None]
            nodes = mid + half * self._leg_x[None, :]
            vals = self.f(nodes) * nodes**self.beta * np.exp(-(nodes**2))
            out[inner] += (vals @ self._leg_w) * half[:, 0]
        return float(out[0]) if scalar else out


class TrimodalDistribution:
    """A kernel bound to a parameter vector, with the normalizer cached.

    Immutable after construction; all evaluation methods accept scalars or
    arrays and are safe to call concurrently.
    """

    def __init__(self, kernel: Kernel, params: ParamVector):
        if not isinstance(params, ParamVector):
            params = ParamVector(*params)
        self.kernel = kernel
        self.params = params

        p, alpha, rho, delta, sigma = params.p, params.alpha, params.rho, params.delta, params.sigma
        self._two_over_gamma_p = 2.0 / math.gamma(p)
        self._table_plus = None
        self._table_minus = None

        self._e_minus = None
        self._e_plus = None
        if delta == 0.0:
            self.z_norm = rho * sigma
        else:
            e_minus, e_plus = self.kernel_gamma_expectations()
            self.z_norm = (rho + delta) * sigma + delta * sigma * (e_minus - e_plus)

        if not (0.0 < self.z_norm <= (rho + delta) * sigma * (1.0 + 1e-12)):
            raise DomainError(f"normalizing factor out of range: {self.z_norm}")
        self._dz_dalpha = None

    # ------------------------------------------------------------------
    # construction helpers
    # ------------------------------------------------------------------
    @staticmethod
    def _normal_eta(alpha, p):
        """eta = E[Phi(alpha sqrt(Y))] - 1/2 through the 2F1 closed form."""
        coef = alpha * math.exp(sc.gammaln(p + 0.5) - sc.gammaln(p)) / _SQRT_2PI
        return coef * specfun.gauss_2f1_neg(p, alpha**2 / 2.0)

    def _ensure_tables(self):
        if self._table_minus is None:
            alpha, p = self.params.alpha, self.params.p
            G = self.kernel.cdf
            self._table_minus = _GammaKernelTable(p, lambda z: G(-alpha * z))
            self._table_plus = _GammaKernelTable(p, lambda z: G(alpha * z))

    def kernel_gamma_expectations(self):
        """(E[G(-alpha sqrt(Y))], E[G(alpha sqrt(Y))]) at the bound alpha, p.

        Computed on demand and cached; needed even at delta = 0 by the
        delta-score at the boundary.
        """
        if self._e_minus is None:
            alpha, p = self.params.alpha, self.params.p
            if self.kernel.name == "normal":
                eta = self._normal_eta(alpha, p)
                self._e_minus = 0.5 - eta
                self._e_plus = 0.5 + eta
            else:
                self._ensure_tables()
                e_minus = self._two_over_gamma_p * self._table_minus.total
                self._e_minus = e_minus
                if self.kernel.symmetric_about_zero:
                    self._e_plus = 1.0 - e_minus
                else:
                    self._e_plus = self._two_over_gamma_p * self._table_plus.total
        return self._e_minus, self._e_plus

    @property
    def e_minus(self):
        return self.kernel_gamma_expectations()[0]

    @property
    def e_plus(self):
        return self.kernel_gamma_expectations()[1]

    def normalizer_alpha_derivative(self):
        """dZ/dalpha at the bound parameters (zero when delta = 0)."""
        if self._dz_dalpha is not None:
            return self._dz_dalpha
        p_, alpha, delta, sigma = (
            self.params.p,
            self.params.alpha,
            self.params.delta,
            self.params.sigma,
        )
        if delta == 0.0:
            value = 0.0
        elif self.kernel.name == "normal":
            coef = math.exp(sc.gammaln(p_ + 0.5) - sc.gammaln(p_)) / _SQRT_2PI
            value = -2.0 * delta * sigma * coef * (1.0 + alpha**2 / 2.0) ** (-(p_ + 0.5))
        else:
            g = self.kernel.pdf

            def integrand(z):
                return z ** (2.0 * p_) * (g(alpha * z) + g(-alpha * z)) * np.exp(-z * z)

            val, _ = specfun.integrate(integrand, 0.0, np.inf)
            value = -delta * sigma * self._two_over_gamma_p * val
        self._dz_dalpha = value
        return value

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def _w(self, x):
        return (np.asarray(x, dtype=float) - self.params.mu) / self.params.sigma

    def t_value(self, w):
        """T(w) = P(p, (w/alpha)**2) on the standardized scale."""
        return sc.gammainc(self.params.p, (np.asarray(w, float) / self.params.alpha) ** 2)

    def pdf(self, x):
        w = self._w(x)
        pr = self.params
        weight = pr.rho if pr.delta == 0.0 else pr.rho + pr.delta * self.t_value(w)
        out = weight * self.kernel.pdf(w) / self.z_norm
        return float(out) if np.ndim(out) == 0 else out

    def log_pdf(self, x):
        w = self._w(x)
        pr = self.params
        if pr.delta == 0.0:
            out = math.log(pr.rho) + self.kernel.log_pdf(w) - math.log(self.z_norm)
        else:
            out = (
                np.log(pr.rho + pr.delta * self.t_value(w))
                + self.kernel.log_pdf(w)
                - math.log(self.z_norm)
            )
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, x):
        w = self._w(x)
        pr = self.params
        G = self.kernel.cdf(w)
        if pr.delta == 0.0:
            return G
        self._ensure_tables()
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        v = np.abs(w_arr) / pr.alpha
        lower = np.where(
            w_arr >= 0.0, self._table_plus.lower(v), self._table_minus.lower(v)
        )
        B = self._two_over_gamma_p * lower
        T = self.t_value(w_arr)
        G_arr = np.atleast_1d(np.asarray(G, dtype=float))
        F = (pr.sigma / self.z_norm) * (
            pr.rho * G_arr + pr.delta * (self._e_minus + T * G_arr - B)
        )
        F = np.clip(F, 0.0, 1.0)
        return float(F[0]) if np.ndim(w) == 0 else F

    def quantile(self, u):
        """Inverse CDF; scalar or vectorized, accurate to |F(x) - u| < 1e-10."""
        scalar = np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise DomainError("quantile requires u in (0, 1)")
        pr = self.params
        if pr.delta == 0.0:
            out = pr.mu + pr.sigma * np.asarray(self.kernel.quantile(u))
            return float(out[()]) if scalar else out

        lo, hi = self._bracket(u.min(), u.max())
        lo_a = np.full(u.shape, lo)
        hi_a = np.full(u.shape, hi)
        for _ in range(48):
            mid = 0.5 * (lo_a + hi_a)
            below = self.cdf(mid) < u
            lo_a = np.where(below, mid, lo_a)
            hi_a = np.where(below, hi_a, mid)
            if np.max(hi_a - lo_a) < 1e-13 * pr.sigma:
                break
        x = 0.5 * (lo_a + hi_a)
        for _ in range(2):  # Newton polish, guarded by the bracket
            fx = self.pdf(x)
            step = np.where(fx > 0.0, (self.cdf(x) - u) / np.maximum(fx, 1e-300), 0.0)
            x = np.clip(x - step, lo_a, hi_a)
        return float(x[0]) if scalar else x

    def _bracket(self, u_lo, u_hi):
        pr = self.params
        span = 10.0 * pr.sigma
        lo = pr.mu - span
        for _ in range(200):
            if self.cdf(lo) < u_lo:
                break
            span *= 2.0
            lo = pr.mu - span
        else:
            raise BracketError("could not bracket the lower quantile")
        span = 10.0 * pr.sigma
        hi = pr.mu + span
        for _ in range(200):
            if self.cdf(hi) > u_hi:
                break
            span *= 2.0
            hi = pr.mu + span
        else:
            raise BracketError("could not bracket the upper quantile")
        return lo, hi

    def sample(self, n, seed):
        """n inverse-CDF draws, fully determined by ``seed``."""
        if n < 1:
            raise DomainError("sample requires n >= 1")
        rng = np.random.default_rng(seed)
        u = rng.random(int(n))
        tiny = np.finfo(float).tiny
        u = np.clip(u, tiny, 1.0 - np.finfo(float).epsneg)
        return self.quantile(u)

    def support(self):
        lo, hi = self.kernel.support
        pr = self.params
        return (pr.mu + pr.sigma * lo, pr.mu + pr.sigma * hi)

    # ------------------------------------------------------------------
    # modality
    # ------------------------------------------------------------------
    def root_function(self, y):
        """Radial function whose positive roots mark off-center critical points.

        For the symmetric kernel class with decay function h this is

            R(y) = 2 delta (1/a^2)^p y^(p-1) e^(-y/a^2) / Gamma(p)
                   - [rho + delta P(p, y/a^2)] h(y),   y > 0,

        with h = 1 for the normal kernel.  Critical points of the density
        away from mu satisfy R(((x - mu)/sigma)**2) = 0.
        """
        h = self.kernel.h_function()  # raises UnsupportedKernelError if absent
        pr = self.params
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            log_gamma_term = (
                math.log(2.0 * pr.delta) if pr.delta > 0 else -np.inf
            ) - 2.0 * pr.p * math.log(pr.alpha) + (pr.p - 1.0) * np.log(y) - y / pr.alpha**2 - sc.gammaln(pr.p)
        gamma_term = np.exp(log_gamma_term)
        cdf_term = (pr.rho + pr.delta * sc.gammainc(pr.p, y / pr.alpha**2)) * h(y)
        out = gamma_term - cdf_term
        return float(out) if out.ndim == 0 else out

    def _scan_roots(self):
        pr = self.params
        if pr.delta == 0.0:
            return []
        y_max = pr.alpha**2 * (pr.p + 40.0)
        ys = np.geomspace(y_max * 1e-14, y_max, 4096)
        vals = self.root_function(ys)
        roots = []
        sign = np.sign(vals)
        for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
            roots.append(specfun.find_root(self.root_function, ys[i], ys[i + 1], tol=1e-14))
        roots.extend(float(y) for y in ys[vals == 0.0])
        return sorted(roots)

    def _grid_extrema(self, points=100_001, span=None):
        pr = self.params
        if span is None:
            # wide enough to cover any root of the radial function
            span = max(8.0, 1.05 * pr.alpha * math.sqrt(pr.p + 40.0))
            points = min(int(points * span / 8.0), 500_001)
        xs = np.linspace(pr.mu - span * pr.sigma, pr.mu + span * pr.sigma, points)
        fs = self.pdf(xs)
        d = np.diff(fs)
        tol = 4.0 * np.finfo(float).eps * fs.max()
        s = np.sign(d)
        s[np.abs(d) < tol] = 0.0
        nz = np.nonzero(s)[0]
        maxima, minima = [], []
        if nz.size:
            s_nz = s[nz]
            for t in np.nonzero(np.diff(s_nz))[0]:
                if s_nz[t] > 0 > s_nz[t + 1]:
                    seg = slice(nz[t], nz[t + 1] + 2)
                    maxima.append(xs[seg][np.argmax(fs[seg])])
                elif s_nz[t] < 0 < s_nz[t + 1]:
                    seg = slice(nz[t], nz[t + 1] + 2)
                    minima.append(xs[seg][np.argmin(fs[seg])])
        return maxima, minima

    def classify_modality(self, cross_check=True):
        """Classify the density as Unimodal/Bimodal/Trimodal.

        Kernels with a known decay function h use the root count of
        :meth:`root_function` (0, 1 or 2 roots); the remaining kernels fall
        back to a dense grid scan.  With ``cross_check`` the analytic class
        is verified against the grid scan and a mismatch raises
        :class:`ModalityError`.
        """
        pr = self.params
        try:
            self.kernel.h_function()
            analytic = True
        except UnsupportedKernelError:
            analytic = False

        if analytic:
            roots = self._scan_roots()
            if len(roots) > 2:
                raise ModalityError(
                    f"found {len(roots)} roots of the radial function; at most 2 expected"
                )
            if len(roots) == 0:
                report = ModalityReport(UNIMODAL, (pr.mu,), (), ())
            elif len(roots) == 1:
                a = roots[0]
                report = ModalityReport(
                    BIMODAL,
                    (pr.mu - pr.sigma * math.sqrt(a), pr.mu + pr.sigma * math.sqrt(a)),
                    (pr.mu,),
                    tuple(roots),
                )
            else:
                a, b = roots
                report = ModalityReport(
                    TRIMODAL,
                    (
                        pr.mu - pr.sigma * math.sqrt(b),
                        pr.mu,
                        pr.mu + pr.sigma * math.sqrt(b),
                    ),
                    (pr.mu - pr.sigma * math.sqrt(a), pr.mu + pr.sigma * math.sqrt(a)),
                    tuple(roots),
                )
            if cross_check:
                grid_max, _ = self._grid_extrema()
                if len(grid_max) != len(report.modes):
                    raise ModalityError(
                        f"radial-function class {report.modality} "
                        f"({len(report.modes)} modes) disagrees with grid scan "
                        f"({len(grid_max)} maxima)"
                    )
            return report

        # grid-scan fallback (logistic, gumbel)
        maxima, minima = self._grid_extrema()
        maxima = [self._refine_extremum(x, maximum=True) for x in maxima]
        minima = [self._refine_extremum(x, maximum=False) for x in minima]
        label = {1: UNIMODAL, 2: BIMODAL, 3: TRIMODAL}.get(len(maxima))
        if label is None:
            raise ModalityError(f"grid scan found {len(maxima)} maxima")
        if self.kernel.symmetric_about_zero:
            r_roots = sorted(
                ((x - pr.mu) / pr.sigma) ** 2 for x in (maxima + minima) if not np.isclose(x, pr.mu, atol=1e-9 * pr.sigma)
            )
            r_roots = tuple(dict.fromkeys(np.round(r_roots, 12)))
        else:
            r_roots = ()
        return ModalityReport(label, tuple(sorted(maxima)), tuple(sorted(minima)), r_roots)

    def _refine_extremum(self, x0, maximum, width=None):
        pr = self.params
        width = width or 0.01 * pr.sigma
        sgn = -1.0 if maximum else 1.0
        res = scipy.optimize.minimize_scalar(
            lambda x: sgn * self.pdf(x),
            bounds=(x0 - width, x0 + width),
            method="bounded",
            options={"xatol": 1e-12 * pr.sigma},
        )
        return float(res.x)

    # ------------------------------------------------------------------
    # expectations
    # ------------------------------------------------------------------
    def truncated_expectation(self, L, b):
        """E[L(X); X <= b] by quadrature; ``b`` may be +inf."""
        pr = self.params

        def integrand(x):
            return L(x) * self.pdf(x)

        if b <= pr.mu:
            value, _ = specfun.integrate(integrand, -np.inf, b)
            return value
        left, _ = specfun.integrate(integrand, -np.inf, pr.mu)
        right, _ = specfun.integrate(integrand, pr.mu, b)
        return left + right

    def moment(self, n, central=False, method="auto"):
        """n-th raw (or central) moment.

        ``method`` is one of auto/closed/quadrature; the closed path exists
        only for the normal kernel with integer p and is selected
        automatically there.
        """
        if n < 1 or n != int(n):
            raise DomainError("moment order must be a positive integer")
        n = int(n)
        if n >= self.kernel.max_moment_order():
            raise MomentError(
                f"moment of order {n} does not exist for kernel '{self.kernel.name}'"
            )
        if central:
            centered = TrimodalDistribution(self.kernel, replace(self.params, mu=0.0))
            return centered.moment(n, central=False, method=method)

        closed_ok = self.kernel.name == "normal" and self.params.p_is_integer
        if method == "closed" and not closed_ok:
            raise DomainError("closed-form moments need the normal kernel and integer p")
        if method == "auto":
            method = "closed" if closed_ok else "quadrature"

        if method == "closed":
            return self._moment_closed(n)
        pr = self.params

        def integrand(x):
            return x**n * self.pdf(x)

        left, _ = specfun.integrate(integrand, -np.inf, pr.mu)
        right, _ = specfun.integrate(integrand, pr.mu, np.inf)
        return left + right

    def _truncated_gaussian_gamma_moments(self, k_max, alpha=None):
        """Stable evaluation of m_k = E[ 1{Z <= +-alpha sqrt(Y)} Z^k ], k = 0..k_max.

        Returns (m_minus, m_plus) arrays.  Uses the integration-by-parts
        recursion of the truncated normal moments averaged over
        Y ~ Gamma(p, 1); the minus branch accumulates positive terms only
        and the plus branch is recovered от the full moments by symmetry.
        """
        pr = self.params
        a = pr.alpha if alpha is None else alpha
        p_ = pr.p
        eta = self._normal_eta(a, p_)
        scale = 1.0 + a * a / 2.0

        def h(k):  # E_Y[(a sqrt(Y))^(k-1) phi(a sqrt(Y))]
            return math.exp(
                (k - 1) * math.log(a)
                + sc.gammaln(p_ + (k - 1) / 2.0)
                - sc.gammaln(p_)
                - (p_ + (k - 1) / 2.0) * math.log(scale)
            ) / _SQRT_2PI

        m_minus = np.empty(k_max + 1)
        m_plus = np.empty(k_max + 1)
        m_minus[0] = 0.5 - eta
        m_plus[0] = 0.5 + eta
        if k_max >= 1:
            # E_Y[ M_1(+-a sqrt(Y)) ] = -E_Y[ phi(a sqrt(Y)) ], identical branches
            m_minus[1] = m_plus[1] = -1.0 / (_SQRT_2PI * scale**p_)
        for k in range(2, k_max + 1):
            hk = h(k)
            if k % 2 == 0:
                # positive accumulation on the minus branch, reflection for plus
                m_minus[k] = (k - 1) * m_minus[k - 2] + hk
                full = math.exp(
                    sc.gammaln(k + 1) - (k / 2) * math.log(2.0) - sc.gammaln(k / 2 + 1)
                )
                m_plus[k] = full - m_minus[k]
            else:
                # odd orders coincide by symmetry of z^k phi(z) about the tail
                m_minus[k] = m_plus[k] = (k - 1) * m_minus[k - 2] - hk
        return m_minus, m_plus

    def _moment_closed(self, n):
        pr = self.params
        m_minus, m_plus = self._truncated_gaussian_gamma_moments(n)
        sig_w = (pr.rho + pr.delta) * pr.sigma / self.z_norm
        del_w = pr.delta * pr.sigma / self.z_norm
        total = 0.0
        for k in range(n + 1):
            if k % 2 == 0:
                full = math.exp(
                    sc.gammaln(k + 1) - (k / 2) * math.log(2.0) - sc.gammaln(k / 2 + 1)
                )
            else:
                full = 0.0
            Mk = sig_w * full + del_w * (m_minus[k] - m_plus[k])
            total += math.comb(n, k) * pr.mu ** (n - k) * pr.sigma**k * Mk
        return total

    # ------------------------------------------------------------------
    # entropies
    # ------------------------------------------------------------------
    def shannon_entropy(self, method="quadrature"):
        """Differential Shannon entropy.

        ``method='series'`` uses the closed expansion available for the
        normal kernel with integer p; on non-convergence it warns and falls
        back to quadrature.
        """
        if method == "series":
            try:
                return self._shannon_entropy_series()
            except (ConvergenceError, DomainError) as exc:
                warnings.warn(f"entropy series unavailable ({exc}); using quadrature")
                method = "quadrature"
        if method != "quadrature":
            raise DomainError(f"unknown entropy method '{method}'")
        pr = self.params

        def integrand(x):
            f = self.pdf(x)
            return np.where(f > 0.0, -f * np.log(np.maximum(f, 1e-320)), 0.0)

        left, _ = specfun.integrate(integrand, -np.inf, pr.mu)
        right, _ = specfun.integrate(integrand, pr.mu, np.inf)
        return left + right

    def _shannon_entropy_series(self, tol=1e-12, max_terms=400):
        """Series entropy for the normal kernel, integer p.

        Splits -E log f into the normalizer, the log-weight term and the
        Gaussian term.  The log-weight expectations are expanded through
        log(rho + delta*T) = log(rho+delta) + log1p(-u) with
        u = delta/(rho+delta) * e^(-V) * P(V), V = (Z/alpha)^2, whose powers
        have closed Gaussian-gamma expectations; the expansion converges
        geometrically at rate delta/(rho+delta).
        """
        pr = self.params
        if self.kernel.name != "normal":
            raise DomainError("entropy series requires the normal kernel")
        if not pr.p_is_integer:
            raise DomainError("entropy series requires integer p")
        if pr.delta == 0.0:
            return math.log(_SQRT_2PI * pr.sigma) + 0.5
        p_int = int(round(pr.p))
        alpha, rho, delta, sigma = pr.alpha, pr.rho, pr.delta, pr.sigma
        Z = self.z_norm
        s1z = math.log(_SQRT_2PI) + 0.5
        eta = self._e_plus - 0.5
        cphi = math.exp(sc.gammaln(pr.p + 0.5) - sc.gammaln(pr.p)) / _SQRT_2PI

        r = delta / (rho + delta)
        base = np.array([1.0 / math.factorial(j) for j in range(p_int)])

        A0 = math.log(rho + delta)
        Adiff = math.log(rho + delta) * (self._e_minus - self._e_plus)
        coeffs = np.array([1.0])
        converged = False
        for ell in range(1, max_terms + 1):
            coeffs = np.convolve(coeffs, base)  # coefficients of P(v)^ell
            j_max = coeffs.size - 1
            alpha_l = math.sqrt(alpha**2 + 2.0 * ell)
            m_minus, m_plus = self._truncated_gaussian_gamma_moments(
                2 * j_max, alpha=alpha_l
            )
            js = np.arange(j_max + 1)
            log_df = sc.gammaln(2 * js + 1) - js * math.log(2.0) - sc.gammaln(js + 1)
            # E[V^j e^(-l V)] = (2j-1)!! alpha / alpha_l^(2j+1); logs keep it in range
            w_full = coeffs * alpha * np.exp(log_df - (2 * js + 1) * math.log(alpha_l))
            term0 = (r**ell / ell) * float(np.sum(w_full))
            scale_trunc = coeffs * alpha * np.exp(-(2 * js + 1) * math.log(alpha_l))
            diff = m_minus[2 * js] - m_plus[2 * js]
            term_diff = (r**ell / ell) * float(np.sum(scale_trunc * diff))
            A0 -= term0
            Adiff -= term_diff
            if abs(term0) < tol * max(1.0, abs(A0)) and abs(term_diff) < tol * max(
                1.0, abs(Adiff)
            ):
                converged = True
                break
            if not np.isfinite(term0) or not np.isfinite(term_diff):
                raise ConvergenceError("entropy series overflowed")
        if not converged:
            raise ConvergenceError(
                f"entropy series did not converge within {max_terms} terms"
            )

        b_plus = -(alpha / 2.0) * cphi * (1.0 + alpha**2 / 2.0) ** (-(pr.p + 0.5)) + s1z * self._e_plus
        b_minus = (alpha / 2.0) * cphi * (1.0 + alpha**2 / 2.0) ** (-(pr.p + 0.5)) + s1z * self._e_minus

        sig_w = (rho + delta) * sigma / Z
        del_w = delta * sigma / Z
        return (
            math.log(Z)
            - sig_w * A0
            - del_w * Adiff
            + sig_w * s1z
            + del_w * (b_minus - b_plus)
        )

    def tsallis_entropy(self, q):
        """Tsallis entropy S_q = (1 - int f^q) / (q - 1), q > 0, q != 1."""
        if not (q > 0):
            raise DomainError("tsallis_entropy requires q > 0")
        if q == 1.0:
            raise DomainError("q = 1 is the Shannon limit; call shannon_entropy")
        name = self.kernel.name
        if name == "cauchy" and q <= 0.5:
            raise ConvergenceError("f^q is not integrable for the cauchy kernel with q <= 1/2")
        if name == "student_t" and q * (self.kernel.shape_param + 1.0) <= 1.0:
            raise ConvergenceError("f^q is not integrable for this student_t/q combination")
        pr = self.params

        def integrand(x):
            return self.pdf(x) ** q

        left, _ = specfun.integrate(integrand, -np.inf, pr.mu)
        right, _ = specfun.integrate(integrand, pr.mu, np.inf)
        return (1.0 - (left + right)) / (q - 1.0)

    # ------------------------------------------------------------------
    # mixture decomposition
    # ------------------------------------------------------------------
    def mixture_weights(self, K=None, tol=1e-10, k_max=200):
        """Weights of the even-power weighted-density expansion.

        Requires integer p (the factorial (k-p)! in the weights) and finite
        kernel moments E[W^(2k)].  The weights alternate in sign and the
        series converges only when the kernel moments grow slower than
        k! alpha^(2k) (for the normal kernel: alpha^2 > 2); the
        ``converged`` flag records whether the terms decayed below ``tol``.
        With ``K=None`` the truncation index is chosen adaptively.
        """
        pr = self.params
        if not pr.p_is_integer:
            raise DomainError("mixture weights require integer p >= 1")
        p_int = int(round(pr.p))
        adaptive = K is None
        if not adaptive and K < p_int:
            raise DomainError("K must be at least p")
        c0 = pr.rho * pr.sigma / self.z_norm
        if pr.delta == 0.0:
            K = p_int if adaptive else K
            return MixtureWeights(c0, tuple(0.0 for _ in range(p_int, K + 1)), K, c0, True)

        lead = pr.delta * pr.sigma / (math.gamma(pr.p) * self.z_norm)
        ck = []
        partial = c0
        converged = False
        growth = 0
        last = K if not adaptive else k_max
        with np.errstate(over="raise"):
            for k in range(p_int, last + 1):
                try:
                    moment = self.kernel.even_moment(k)
                    term = (
                        lead
                        * (-1.0) ** (k - p_int)
                        * moment
                        / (k * math.factorial(k - p_int) * pr.alpha ** (2 * k))
                    )
                except (OverflowError, FloatingPointError):
                    term = math.inf
                ck.append(term)
                if math.isfinite(term):
                    partial += term
                if len(ck) >= 2 and (
                    not math.isfinite(term) or abs(term) > abs(ck[-2])
                ):
                    growth += 1
                else:
                    growth = 0
                if adaptive:
                    if math.isfinite(term) and abs(term) < tol * max(1.0, abs(partial)):
                        converged = True
                        break
                    if growth >= 5:  # clearly diverging, stop early
                        break
        if not adaptive:
            converged = (
                all(math.isfinite(t) for t in ck)
                and abs(ck[-1]) <= abs(ck[0])
                and abs(ck[-1]) < tol * max(1.0, abs(partial))
            )
        return MixtureWeights(c0, tuple(ck), p_int + len(ck) - 1, partial, converged)

    def __repr__(self):
        pr = self.params
        return (
            f"TrimodalDistribution({self.kernel.name}, mu={pr.mu:g}, sigma={pr.sigma:g}, "
            f"alpha={pr.alpha:g}, rho={pr.rho:g}, delta={pr.delta:g}, p={pr.p:g})"
        )
