"""Maximum log_q-likelihood estimation and information-based uncertainty.

The estimator maximizes sum_i log_q f(x_i; theta) over the five free
parameters with a bounded multi-start Nelder-Mead search; q = 1 recovers
plain maximum likelihood.  Standard errors come from the inverse of the
log_q Fisher information, whose entries are quadratures of
score_j * score_k * f^(2-q).

Caveat: the family is over-parameterized in (rho, delta) -- scaling both by
the same constant leaves the density unchanged, so the exact information
matrix is singular along that ray and the (rho, delta) variances are
essentially unbounded.  The location/scale/shape block is unaffected.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.special as sc

from .distribution import ParamVector, TrimodalDistribution
from .errors import (
    DegenerateDataError,
    DomainError,
    FitError,
    SingularMatrixError,
)
from .gof import ks_statistic

__all__ = [
    "FitConfig",
    "FitResult",
    "FisherInformation",
    "QGridResult",
    "PARAM_NAMES",
    "log_q",
    "logq_likelihood",
    "score",
    "fit",
    "fit_q_grid",
    "fisher_information",
    "confidence_intervals",
]

PARAM_NAMES = ("mu", "sigma", "alpha", "rho", "delta")

_REJECT = -1e300  # likelihood sentinel for invalid parameter points

DEFAULT_BOUNDS = {
    "mu": (-math.inf, math.inf),
    "sigma": (1e-6, math.inf),
    "alpha": (1e-6, 100.0),
    "rho": (1e-6, 100.0),
    "delta": (1e-6, 100.0),
}


@dataclass(frozen=True)
class FitConfig:
    q: float = 1.0
    bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    n_starts: int = 16
    max_iters: int = 2000
    ftol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.q <= 1.0):
            raise DomainError("q must lie in (0, 1]")
        if self.n_starts < 1:
            raise DomainError("n_starts must be >= 1")
        for name in PARAM_NAMES:
            lo, hi = self.bounds[name]
            if not lo < hi:
                raise DomainError(f"empty bounds for {name}: ({lo}, {hi})")

    def bounds_arrays(self):
        lo = np.array([self.bounds[n][0] for n in PARAM_NAMES])
        hi = np.array([self.bounds[n][1] for n in PARAM_NAMES])
        return lo, hi


@dataclass
class FitResult:
    theta_hat: ParamVector
    loglq: float
    loglik_at_q1: float
    std_errors: dict | None
    converged: bool
    n_evals: int
    start_diagnostics: list
    stationarity_residual: float
    q: float
    information: "FisherInformation | None" = None

    def summary(self):
        lines = [f"q = {self.q:g}, log_q L = {self.loglq:.4f}, log L = {self.loglik_at_q1:.4f}"]
        for name in PARAM_NAMES:
            est = getattr(self.theta_hat, name)
            se = self.std_errors.get(name) if self.std_errors else None
            se_txt = f" ({se:.5g})" if se is not None else ""
            lines.append(f"  {name:6s} = {est:.6g}{se_txt}")
        return "\n".join(lines)


@dataclass
class FisherInformation:
    """log_q information matrix for a sample of size n (factor n included).

    The family is scale-invariant in (rho, delta), so the exact matrix is
    singular along (0, 0, 0, rho, delta): expect an enormous condition
    number and meaningless (rho, delta) variances.  The (mu, sigma, alpha)
    block of the inverse is unaffected by that null direction.
    """

    matrix: np.ndarray
    converged: np.ndarray  # (5, 5) bool mask of clean quadratures
    q: float
    n: int

    @property
    def cond(self):
        return float(np.linalg.cond(self.matrix))

    def inverse(self):
        """(inverse, condition number); raises only on a hard failure."""
        try:
            inv = np.linalg.inv(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError(
                f"information matrix could not be inverted ({exc}); "
                "bootstrap standard errors are recommended"
            ) from exc
        if not np.all(np.isfinite(inv)):
            raise SingularMatrixError(
                "information matrix inverse is not finite; "
                "bootstrap standard errors are recommended"
            )
        return inv, self.cond


def log_q(x, q):
    """Deformed logarithm (x**(1-q) - 1) / (1 - q); natural log at q = 1."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("log_q requires x > 0")
    if q == 1.0:
        out = np.log(x)
    else:
        out = np.expm1((1.0 - q) * np.log(x)) / (1.0 - q)
    return float(out) if out.ndim == 0 else out


def _as_params(theta, p=1.5):
    if isinstance(theta, ParamVector):
        return theta
    return ParamVector(*theta, p=p)


def logq_likelihood(data, kernel, theta, q=1.0, p=1.5):
    """sum_i log_q f(x_i; theta); -1e300 when the point is infeasible.

    The sentinel (rather than an exception) lets derivative-free optimizers
    treat invalid parameter vectors as plain rejections.
    """
    data = np.asarray(data, dtype=float)
    try:
        params = _as_params(theta, p)
        dist = TrimodalDistribution(kernel, params)
    except DomainError:
        return _REJECT
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lp = np.asarray(dist.log_pdf(data))
        if q == 1.0:
            total = float(np.sum(lp))
        else:
            total = float(np.sum(np.expm1((1.0 - q) * lp)) / (1.0 - q))
    return total if np.isfinite(total) else _REJECT


def _score_given(dist, x):
    """Score vector(s) of log f at the bound parameters; shape (5,) or (5, n)."""
    pr = dist.params
    x = np.asarray(x, dtype=float)
    w = (x - pr.mu) / pr.sigma
    T = dist.t_value(w)
    denom = pr.rho + pr.delta * T
    v2 = (w / pr.alpha) ** 2
    gp = math.gamma(pr.p)
    with np.errstate(divide="ignore", invalid="ignore"):
        core = v2 ** (pr.p - 1.0) * np.exp(-v2)
        t_prime = 2.0 * (w / pr.alpha**2) * core / gp
    # limit of w * (w/alpha)^(2p-2) at the center: zero whenever 2p > 1
    t_prime = np.where(w == 0.0, 0.0 if pr.p > 0.5 else np.inf, t_prime)
    dT_dalpha = -(2.0 / pr.alpha) * v2**pr.p * np.exp(-v2) / gp
    ratio = dist.kernel.log_pdf_derivative_ratio(w)
    Z = dist.z_norm
    e_minus, e_plus = dist.kernel_gamma_expectations()

    s_mu = -(pr.delta * t_prime / denom + ratio) / pr.sigma
    s_sigma = -1.0 / pr.sigma - (w / pr.sigma) * (pr.delta * t_prime / denom + ratio)
    s_alpha = -dist.normalizer_alpha_derivative() / Z + pr.delta * dT_dalpha / denom
    s_rho = -pr.sigma / Z + 1.0 / denom
    s_delta = -pr.sigma * (1.0 + e_minus - e_plus) / Z + T / denom
    return np.stack(
        [np.broadcast_to(s, np.shape(w)) for s in (s_mu, s_sigma, s_alpha, s_rho, s_delta)]
    )


def score(kernel, theta, x, p=1.5):
    """Analytic gradient of log f(x; theta) in (mu, sigma, alpha, rho, delta).

    Returns shape (5,) for scalar x and (5, n) for an array.  Central finite
    differences of the log-density are the binding contract for these
    expressions (verified in the test-suite).
    """
    params = _as_params(theta, p)
    dist = TrimodalDistribution(kernel, params)
    return _score_given(dist, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------
def _run_start(args):
    (index, data, kernel, cfg, p, mu0, sigma0, shape0, lo, hi) = args
    x0 = np.array([mu0, sigma0, *shape0])
    steps = np.array([0.6 * sigma0, 0.35 * sigma0, 0.45, 0.45, 0.45])
    simplex = np.vstack([x0, x0 + np.diag(steps)])
    simplex = np.clip(simplex, lo + 1e-12, np.minimum(hi, 1e12))

    def objective(vec):
        if np.any(vec < lo) or np.any(vec > hi):
            return 1e300
        return -logq_likelihood(data, kernel, vec, q=cfg.q, p=p)

    res = scipy.optimize.minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "maxiter": cfg.max_iters,
            "maxfev": 4 * cfg.max_iters,
            "initial_simplex": simplex,
            "fatol": cfg.ftol,
            "xatol": 1e-7 * max(1.0, sigma0),
            "adaptive": True,
        },
    )
    return {
        "start": index,
        "x0": x0,
        "theta": res.x,
        "loglq": -res.fun,
        "loglq_at_start": -objective(x0),
        "converged": bool(res.success),
        "n_evals": int(res.nfev),
    }


def fit(data, kernel, cfg=None, p=1.5, n_jobs=1):
    """Maximum log_q-likelihood fit with multi-start bounded Nelder-Mead.

    Starts are initialized at (median, MAD) for location/scale and uniform
    (0,1) draws for (alpha, rho, delta); the best final value wins.
    Deterministic for fixed (data, cfg.seed).
    """
    cfg = cfg or FitConfig()
    data = np.asarray(data, dtype=float)
    if data.ndim != 1:
        raise DegenerateDataError("data must be one-dimensional")
    if not np.all(np.isfinite(data)):
        raise DegenerateDataError("data contains non-finite values")
    if data.size < 5:
        raise DegenerateDataError("need at least 5 observations")
    mu0 = float(np.median(data))
    sigma0 = float(np.median(np.abs(data - mu0)))
    if sigma0 == 0.0:
        raise DegenerateDataError("data has zero median absolute deviation")

    lo, hi = cfg.bounds_arrays()
    rng = np.random.default_rng(cfg.seed)
    shape_starts = np.clip(rng.random((cfg.n_starts, 3)), 1e-3, None)
    tasks = [
        (i, data, kernel, cfg, p, mu0, sigma0, shape_starts[i], lo, hi)
        for i in range(cfg.n_starts)
    ]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            diagnostics = list(pool.map(_run_start, tasks))
    else:
        diagnostics = [_run_start(t) for t in tasks]

    best = max(diagnostics, key=lambda r: (r["loglq"], -r["start"]))
    if best["loglq"] <= _REJECT:
        raise FitError("all optimizer starts failed")
    theta_hat = ParamVector(*best["theta"], p=p)
    dist = TrimodalDistribution(kernel, theta_hat)

    with np.errstate(over="ignore"):
        s = _score_given(dist, data)
        weights = (
            np.ones(data.size)
            if cfg.q == 1.0
            else np.exp((1.0 - cfg.q) * np.asarray(dist.log_pdf(data)))
        )
        residual = float(np.max(np.abs(s @ weights)))

    info = None
    std_errors = None
    try:
        info = fisher_information(kernel, theta_hat, cfg.q, data.size)
        inv, _cond = info.inverse()
        variances = np.diag(inv)
        # non-positive entries sit in the singular (rho, delta) direction
        std_errors = {
            name: float(math.sqrt(v))
            for name, v in zip(PARAM_NAMES, variances)
            if v > 0
        } or None
    except Exception:
        std_errors = None

    return FitResult(
        theta_hat=theta_hat,
        loglq=best["loglq"],
        loglik_at_q1=logq_likelihood(data, kernel, theta_hat, q=1.0, p=p),
        std_errors=std_errors,
        converged=best["converged"],
        n_evals=int(sum(r["n_evals"] for r in diagnostics)),
        start_diagnostics=diagnostics,
        stationarity_residual=residual,
        q=cfg.q,
        information=info,
    )


@dataclass
class QGridResult:
    best_q: float
    fits: dict
    ks: dict


def fit_q_grid(data, kernel, cfg=None, q_grid=(0.90, 0.95, 0.98, 0.99, 1.0), p=1.5):
    """Fit once per q on the grid and select the q with the smallest KS."""
    cfg = cfg or FitConfig()
    data_sorted = np.sort(np.asarray(data, dtype=float))
    fits, ks = {}, {}
    for q in q_grid:
        cfg_q = FitConfig(
            q=q,
            bounds=cfg.bounds,
            n_starts=cfg.n_starts,
            max_iters=cfg.max_iters,
            ftol=cfg.ftol,
            seed=cfg.seed,
        )
        res = fit(data, kernel, cfg_q, p=p)
        dist = TrimodalDistribution(kernel, res.theta_hat)
        fits[q] = res
        ks[q] = ks_statistic(data_sorted, dist.cdf)
    best_q = min(ks, key=lambda q: (ks[q], -q))
    return QGridResult(best_q=best_q, fits=fits, ks=ks)


# ---------------------------------------------------------------------------
# information matrix
# ---------------------------------------------------------------------------
def fisher_information(kernel, theta, q=1.0, n=1, p=1.5):
    """log_q Fisher information for a sample of size n.

    Entries are n * integral of score_j score_k f^(2-q) dx, evaluated by
    adaptive vector quadrature on mu +- 12 sigma plus tail corrections.
    Entries whose quadrature fails are masked in ``converged``.
    """
    params = _as_params(theta, p)
    dist = TrimodalDistribution(kernel, params)
    iu = np.triu_indices(5)

    def integrand(x):
        s = _score_given(dist, x)
        f = dist.pdf(x)
        weight = f ** (2.0 - q) if f > 0.0 else 0.0
        return (s[iu[0]] * s[iu[1]]) * weight

    mu, sigma = params.mu, params.sigma
    segments = [
        (-np.inf, mu - 12.0 * sigma),
        (mu - 12.0 * sigma, mu),
        (mu, mu + 12.0 * sigma),
        (mu + 12.0 * sigma, np.inf),
    ]
    total = np.zeros(len(iu[0]))
    ok = True
    for a, b in segments:
        res = scipy.integrate.quad_vec(integrand, a, b, epsabs=1e-11, epsrel=1e-11)
        val, err = res[0], res[1]
        total += val
        if not np.all(np.isfinite(val)) or err > 1e-6 * max(1.0, np.max(np.abs(total))):
            ok = False
    total[np.abs(total) < 1e-14] = 0.0

    matrix = np.zeros((5, 5))
    matrix[iu] = total
    matrix[(iu[1], iu[0])] = total
    mask = np.full((5, 5), ok)
    return FisherInformation(matrix=n * matrix, converged=mask, q=q, n=n)


def confidence_intervals(fit_result, fi, n, level=0.95):
    """Wald intervals theta_hat -+ z * sqrt(diag(FI^-1)).

    Lower limits of sigma, alpha, rho and delta are clamped at zero, where
    their parameter space ends.  Parameters whose inverse-information
    variance is non-positive (the singular (rho, delta) direction) come
    back as (nan, nan) with a warning pointing at bootstrap errors; if no
    parameter has a usable variance a SingularMatrixError is raised.
    """
    if not (0.0 < level < 1.0):
        raise DomainError("level must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be >= 1")
    fi_obj = (
        fi
        if isinstance(fi, FisherInformation)
        else FisherInformation(np.asarray(fi, dtype=float), np.full((5, 5), True), 1.0, n)
    )
    inv, _cond = fi_obj.inverse()
    variances = np.diag(inv)
    if np.all(variances <= 0):
        raise SingularMatrixError(
            "inverse information has no positive diagonal entries; "
            "bootstrap standard errors are recommended"
        )
    if np.any(variances <= 0):
        bad = [n_ for n_, v in zip(PARAM_NAMES, variances) if v <= 0]
        warnings.warn(
            f"no information-based interval for {bad} (singular direction); "
            "bootstrap standard errors are recommended"
        )
    z = sc.ndtri(0.5 * (1.0 + level))
    out = {}
    estimates = fit_result.theta_hat.as_array()
    for i, name in enumerate(PARAM_NAMES):
        if variances[i] <= 0:
            out[name] = (math.nan, math.nan)
            continue
        se = math.sqrt(variances[i])
        lo_i = estimates[i] - z * se
        hi_i = estimates[i] + z * se
        if name != "mu":
            lo_i = max(lo_i, 0.0)
        out[name] = (lo_i, hi_i)
    return out
