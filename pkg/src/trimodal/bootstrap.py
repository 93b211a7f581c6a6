"""Bootstrap resampling harness: resample, refit every model, aggregate.

Each replicate draws n values with replacement from the observed data and
refits the requested models; per-replicate RNG streams are derived from
(seed, replicate_index) so results are bit-for-bit reproducible regardless
of worker count.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.special as sc

from . import gof
from .baselines import kde_fit, normal_mle
from .distribution import TrimodalDistribution
from .errors import DegenerateDataError, DomainError, FitError, TrimodalError
from .inference import PARAM_NAMES, FitConfig, fit
from .kernels import get_kernel

__all__ = ["BootstrapPlan", "BootstrapSummary", "run", "write_replicates_csv"]

MODEL_LABELS = ("tdq", "td", "kde", "normal")

GOF_FIELDS = (
    "ks",
    "cvm_paper",
    "cvm_standard",
    "ad_paper",
    "ad_standard",
    "loglik",
    "aic",
    "bic",
)

_MODEL_PARAMS = {
    "tdq": PARAM_NAMES,
    "td": PARAM_NAMES,
    "kde": ("mean", "sd", "bandwidth"),
    "normal": ("mu", "sigma"),
}

_MODEL_K = {"tdq": 5, "td": 5, "kde": 1, "normal": 2}


@dataclass(frozen=True)
class BootstrapPlan:
    replications: int = 1000
    seed: int = 0
    models: tuple = MODEL_LABELS
    fit_cfg: FitConfig = field(default_factory=FitConfig)
    kernel_name: str = "normal"
    nu: float | None = None
    p: float = 1.5
    kde_adaptive: bool = False

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        unknown = set(self.models) - set(MODEL_LABELS)
        if unknown:
            raise DomainError(f"unknown model labels: {sorted(unknown)}")


@dataclass
class BootstrapSummary:
    plan: BootstrapPlan
    n: int
    parameters: dict  # model -> param -> {mean, sd, ci_lo, ci_hi}
    gof: dict  # model -> stat -> {mean, sd, ci_lo, ci_hi}
    failure_count: dict  # model -> int
    estimates: dict  # model -> param -> ndarray over replicates (NaN on failure)
    statistics: dict  # model -> stat -> ndarray over replicates

    def to_dict(self):
        return {
            "replications": self.plan.replications,
            "seed": self.plan.seed,
            "models": list(self.plan.models),
            "n": self.n,
            "parameters": self.parameters,
            "gof": self.gof,
            "failure_count": self.failure_count,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def resample(data, seed, index):
    """The ``index``-th bootstrap resample: n draws with replacement."""
    data = np.asarray(data, dtype=float)
    rng = np.random.default_rng((seed, index))
    return data[rng.integers(0, data.size, data.size)]


def _fit_one_model(label, sample, plan):
    """Fit one model on one resample; returns (params dict, gof dict)."""
    sample_sorted = np.sort(sample)
    if label in ("tdq", "td"):
        cfg = plan.fit_cfg
        if label == "td" and cfg.q != 1.0:
            cfg = FitConfig(
                q=1.0,
                bounds=cfg.bounds,
                n_starts=cfg.n_starts,
                max_iters=cfg.max_iters,
                ftol=cfg.ftol,
                seed=cfg.seed,
            )
        kernel = get_kernel(plan.kernel_name, nu=plan.nu)
        res = fit(sample, kernel, cfg, p=plan.p)
        dist = TrimodalDistribution(kernel, res.theta_hat)
        params = {name: getattr(res.theta_hat, name) for name in PARAM_NAMES}
        report = gof.evaluate_model(
            sample_sorted, dist.cdf, res.loglik_at_q1, _MODEL_K[label], label
        )
    elif label == "kde":
        model = kde_fit(sample, adaptive=plan.kde_adaptive)
        params = {"mean": model.mean, "sd": model.sd, "bandwidth": model.bandwidth}
        report = gof.evaluate_model(
            sample_sorted,
            model.cdf,
            model.log_likelihood(sample),
            _MODEL_K[label],
            label,
        )
    elif label == "normal":
        mu, sigma = normal_mle(sample)
        if sigma <= 0.0:
            raise DegenerateDataError("zero-variance resample")
        params = {"mu": mu, "sigma": sigma}
        z = (sample - mu) / sigma
        loglik = float(
            -0.5 * np.sum(z * z) - sample.size * (math.log(sigma) + 0.5 * math.log(2 * math.pi))
        )
        report = gof.evaluate_model(
            sample_sorted,
            lambda x: sc.ndtr((np.asarray(x) - mu) / sigma),
            loglik,
            _MODEL_K[label],
            label,
        )
    else:  # pragma: no cover - guarded by BootstrapPlan
        raise DomainError(f"unknown model '{label}'")
    stats = {name: getattr(report, name) for name in GOF_FIELDS}
    return params, stats


def _run_replicate(args):
    index, data, plan = args
    sample = resample(data, plan.seed, index)
    out = {}
    for label in plan.models:
        try:
            out[label] = _fit_one_model(label, sample, plan)
        except (TrimodalError, FloatingPointError, ValueError):
            out[label] = None
    return out


def _aggregate(values):
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return {"mean": math.nan, "sd": math.nan, "ci_lo": math.nan, "ci_hi": math.nan}
    lo, hi = np.percentile(finite, [2.5, 97.5])
    return {
        "mean": float(np.mean(finite)),
        "sd": float(np.std(finite, ddof=1)) if finite.size > 1 else 0.0,
        "ci_lo": float(lo),
        "ci_hi": float(hi),
    }


def run(data, plan, n_jobs=1):
    """Execute the bootstrap plan; aborts if any model fails on >50% of
    replicates.  Output is independent of ``n_jobs``."""
    data = np.asarray(data, dtype=float)
    if data.size == 0:
        raise DegenerateDataError("data must be nonempty")
    reps = plan.replications
    tasks = [(i, data, plan) for i in range(reps)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_replicate, tasks))
    else:
        results = [_run_replicate(t) for t in tasks]

    estimates = {
        label: {name: np.full(reps, np.nan) for name in _MODEL_PARAMS[label]}
        for label in plan.models
    }
    statistics = {
        label: {name: np.full(reps, np.nan) for name in GOF_FIELDS}
        for label in plan.models
    }
    failures = {label: 0 for label in plan.models}
    for i, rep in enumerate(results):
        for label in plan.models:
            if rep[label] is None:
                failures[label] += 1
                continue
            params, stats = rep[label]
            for name, value in params.items():
                estimates[label][name][i] = value
            for name, value in stats.items():
                statistics[label][name][i] = value

    for label, count in failures.items():
        if count > 0.5 * reps:
            raise FitError(
                f"bootstrap aborted: model '{label}' failed on {count}/{reps} replicates"
            )

    parameters = {
        label: {name: _aggregate(vals) for name, vals in estimates[label].items()}
        for label in plan.models
    }
    gof_summary = {
        label: {name: _aggregate(vals) for name, vals in statistics[label].items()}
        for label in plan.models
    }
    return BootstrapSummary(
        plan=plan,
        n=int(data.size),
        parameters=parameters,
        gof=gof_summary,
        failure_count=failures,
        estimates=estimates,
        statistics=statistics,
    )


def write_replicates_csv(summary, path):
    """Long-format CSV of per-replicate parameter estimates."""
    with open(path, "w") as fh:
        fh.write("replicate,model,parameter,value\n")
        for label, params in summary.estimates.items():
            for name, values in params.items():
                for i, v in enumerate(values):
                    fh.write(f"{i},{label},{name},{float(v)!r}\n")
