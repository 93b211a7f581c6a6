"""Goodness-of-fit statistics, information criteria and comparison reports.

Two flavors of the Cramer-von Mises and Anderson-Darling statistics are
computed side by side: the textbook definitions, and the variants used by
the reference workflow this package mirrors (which adds 1/(12n) per term to
CvM and pairs log F_i with log(1 - F_i) at the same index in AD).  Reported
tables carry both so results stay comparable in either convention.
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "GofReport",
    "ks_statistic",
    "cvm_statistic",
    "ad_statistic",
    "information_criteria",
    "evaluate_model",
    "format_table",
]

_CLAMP = 1e-12

TABLE_COLUMNS = ("model", "mu", "sigma", "KS", "CVM", "AD", "log(L)", "AIC", "BIC")


@dataclass
class GofReport:
    """One comparison row: GOF statistics plus information criteria."""

    model_label: str
    ks: float
    cvm_paper: float
    cvm_standard: float
    ad_paper: float
    ad_standard: float
    loglik: float
    aic: float
    bic: float
    n: int
    k_params: int
    mu: float | None = None
    sigma: float | None = None

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _model_probs(data, F):
    data = np.asarray(data, dtype=float)
    if data.ndim != 1 or data.size < 1:
        raise DomainError("need a one-dimensional, nonempty sample")
    if np.any(np.diff(data) < 0):
        raise DomainError("data must be sorted ascending")
    z = np.asarray(F(data), dtype=float)
    return data, z


def ks_statistic(data, F):
    """Kolmogorov-Smirnov sup-distance between the empirical CDF and F.

    ``data`` must be sorted ascending; ``F`` maps values to [0, 1].
    """
    _, z = _model_probs(data, F)
    n = z.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - z)
    d_minus = np.max(z - (i - 1) / n)
    return float(max(d_plus, d_minus))


def cvm_statistic(data, F):
    """Cramer-von Mises statistic; returns (paper_variant, standard).

    standard:  W^2 = sum (F_i - (2i-1)/(2n))^2 + 1/(12n)
    paper:     adds 1/(12n) inside every term, i.e. sum(...) + 1/12
    """
    _, z = _model_probs(data, F)
    n = z.size
    i = np.arange(1, n + 1)
    core = float(np.sum((z - (2.0 * i - 1.0) / (2.0 * n)) ** 2))
    return core + 1.0 / 12.0, core + 1.0 / (12.0 * n)


def ad_statistic(data, F):
    """Anderson-Darling statistic; returns (paper_variant, standard).

    standard:  A^2 = -n - (1/n) sum (2i-1) [ln F_i + ln(1 - F_{n+1-i})]
    paper:     (-1/n) sum (2i-1) [ln F_i + ln(1 - F_i)]  (same-index pairing)

    Probabilities are clamped to [1e-12, 1 - 1e-12] before taking logs; a
    warning reports when clamping was actually needed.
    """
    _, z = _model_probs(data, F)
    n = z.size
    if np.any(z <= 0.0) or np.any(z >= 1.0):
        warnings.warn("model CDF values at the data hit 0/1; clamping for logs")
    z = np.clip(z, _CLAMP, 1.0 - _CLAMP)
    i = np.arange(1, n + 1)
    paper = float(-np.sum((2.0 * i - 1.0) * (np.log(z) + np.log1p(-z))) / n)
    standard = float(
        -n - np.sum((2.0 * i - 1.0) * (np.log(z) + np.log1p(-z[::-1]))) / n
    )
    return paper, standard


def information_criteria(loglik, k_params, n):
    """(AIC, BIC) = (-2L + 2k, -2L + k log n)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if k_params < 0:
        raise DomainError("k_params must be >= 0")
    aic = -2.0 * loglik + 2.0 * k_params
    bic = -2.0 * loglik + k_params * math.log(n)
    return aic, bic


def evaluate_model(data, cdf, loglik, k_params, label, mu=None, sigma=None):
    """Assemble a full GofReport for one (data, model) pair.

    ``data`` need not be sorted; ``cdf`` is the model CDF and ``loglik`` the
    model log-likelihood of the sample.
    """
    data = np.sort(np.asarray(data, dtype=float))
    ks = ks_statistic(data, cdf)
    cvm_paper, cvm_std = cvm_statistic(data, cdf)
    ad_paper, ad_std = ad_statistic(data, cdf)
    aic, bic = information_criteria(loglik, k_params, data.size)
    return GofReport(
        model_label=label,
        ks=ks,
        cvm_paper=cvm_paper,
        cvm_standard=cvm_std,
        ad_paper=ad_paper,
        ad_standard=ad_std,
        loglik=loglik,
        aic=aic,
        bic=bic,
        n=int(data.size),
        k_params=int(k_params),
        mu=mu,
        sigma=sigma,
    )


def format_table(reports, variant="paper"):
    """Aligned text table with one row per model, mirroring the usual
    comparison layout (estimates | GOF statistics | log L and criteria)."""
    if variant not in ("paper", "standard"):
        raise DomainError("variant must be 'paper' or 'standard'")
    rows = [TABLE_COLUMNS]
    for r in reports:
        cvm = r.cvm_paper if variant == "paper" else r.cvm_standard
        ad = r.ad_paper if variant == "paper" else r.ad_standard
        rows.append(
            (
                r.model_label,
                "-" if r.mu is None else f"{r.mu:.6g}",
                "-" if r.sigma is None else f"{r.sigma:.6g}",
                f"{r.ks:.6g}",
                f"{cvm:.6g}",
                f"{ad:.6g}",
                f"{r.loglik:.6g}",
                f"{r.aic:.6g}",
                f"{r.bic:.6g}",
            )
        )
    widths = [max(len(row[j]) for row in rows) for j in range(len(TABLE_COLUMNS))]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
