"""Command-line front end: fit, eval, sample, modality, gof, bootstrap.

Reads single-column numeric text/CSV, emits JSON (schema_version 1) or
aligned text tables.  Every error exits nonzero; with ``--format json`` a
machine-readable error object is printed to stderr.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import bootstrap as bootstrap_mod
from . import gof as gof_mod
from .baselines import kde_fit, normal_mle, robust_stats
from .distribution import ParamVector, TrimodalDistribution
from .errors import TrimodalError
from .inference import PARAM_NAMES, FitConfig, fit, fit_q_grid
from .kernels import KERNEL_NAMES, get_kernel

SCHEMA_VERSION = 1

_MODEL_K = {"tdq": 5, "td": 5, "kde": 1, "normal": 2}


class CliError(TrimodalError):
    pass


# ---------------------------------------------------------------------------
# data ingestion
# ---------------------------------------------------------------------------
def read_numeric_column(path, column=None):
    """Numeric vector from a plain/CSV text file.

    Blank lines are skipped.  ``column`` selects by header name or 0-based
    index; single-column files need no selector.  Bad cells are reported
    with their line numbers.
    """
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise CliError(f"cannot read '{path}': {exc}") from exc

    rows = []
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text:
            continue
        cells = [c.strip() for c in (text.split(",") if "," in text else text.split())]
        rows.append((lineno, cells))
    if not rows:
        raise CliError(f"'{path}' contains no data")

    def _is_number(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = None
    if not all(_is_number(c) for c in rows[0][1]):
        header = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise CliError(f"'{path}' contains a header but no data rows")

    if column is None:
        width = len(rows[0][1])
        if width != 1:
            raise CliError(
                f"'{path}' has {width} columns; select one with --column"
            )
        col_idx = 0
    else:
        if header is not None and column in header:
            col_idx = header.index(column)
        else:
            try:
                col_idx = int(column)
            except ValueError:
                raise CliError(
                    f"column '{column}' not found in header {header}"
                ) from None

    values, bad = [], []
    for lineno, cells in rows:
        if col_idx >= len(cells):
            bad.append(lineno)
            continue
        try:
            values.append(float(cells[col_idx]))
        except ValueError:
            bad.append(lineno)
    if bad:
        shown = ", ".join(map(str, bad[:10]))
        raise CliError(f"non-numeric rows in '{path}' at lines: {shown}")
    return np.asarray(values)


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------
def _kernel_from_args(args):
    return get_kernel(args.kernel, nu=args.nu)


def _params_from_args(args):
    return ParamVector(args.mu, args.sigma, args.alpha, args.rho, args.delta, p=args.p)


def _emit(args, text):
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _fit_cfg(args, q=1.0):
    return FitConfig(
        q=q, n_starts=args.starts, max_iters=args.max_iters, seed=args.seed
    )


def _td_report(label, data, result, kernel):
    dist = TrimodalDistribution(kernel, result.theta_hat)
    report = gof_mod.evaluate_model(
        data,
        dist.cdf,
        result.loglik_at_q1,
        _MODEL_K[label],
        label,
        mu=result.theta_hat.mu,
        sigma=result.theta_hat.sigma,
    )
    entry = report.to_dict()
    entry["estimates"] = {n: getattr(result.theta_hat, n) for n in PARAM_NAMES}
    entry["std_errors"] = result.std_errors
    entry["q"] = result.q
    entry["loglq"] = result.loglq
    entry["converged"] = result.converged
    return report, entry


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def cmd_fit(args):
    data = read_numeric_column(args.input, args.column)
    kernel = _kernel_from_args(args)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    unknown = set(models) - set(_MODEL_K)
    if unknown:
        raise CliError(f"unknown models: {sorted(unknown)}")

    reports, entries = [], []
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "fit",
        "input": {"path": args.input, "n": int(data.size)},
        "kernel": args.kernel,
        "p": args.p,
        "seed": args.seed,
        "models": entries,
    }

    q_fit = None
    if "tdq" in models:
        if args.q_grid:
            grid = [float(v) for v in args.q_grid.split(",")]
            qres = fit_q_grid(data, kernel, _fit_cfg(args), q_grid=grid, p=args.p)
            q_fit = qres.fits[qres.best_q]
            payload["selected_q"] = qres.best_q
            payload["q_grid_ks"] = {f"{q:g}": ks for q, ks in qres.ks.items()}
        else:
            q_fit = fit(data, kernel, _fit_cfg(args, q=args.q), p=args.p)
            payload["q"] = args.q

    for label in models:
        if label == "tdq":
            report, entry = _td_report("tdq", data, q_fit, kernel)
        elif label == "td":
            res = fit(data, kernel, _fit_cfg(args, q=1.0), p=args.p)
            report, entry = _td_report("td", data, res, kernel)
        elif label == "kde":
            model = kde_fit(data, adaptive=args.kde_adaptive)
            report = gof_mod.evaluate_model(
                data,
                model.cdf,
                model.log_likelihood(data),
                _MODEL_K[label],
                label,
                mu=model.mean,
                sigma=model.sd,
            )
            entry = report.to_dict()
            entry["estimates"] = {
                "mean": model.mean,
                "sd": model.sd,
                "bandwidth": model.bandwidth,
            }
        else:  # normal
            mu, sigma = normal_mle(data)
            z = (data - mu) / max(sigma, 1e-300)
            loglik = float(
                -0.5 * np.sum(z * z)
                - data.size * (math.log(max(sigma, 1e-300)) + 0.5 * math.log(2 * math.pi))
            )
            import scipy.special as sc

            report = gof_mod.evaluate_model(
                data,
                lambda x: sc.ndtr((np.asarray(x) - mu) / max(sigma, 1e-300)),
                loglik,
                _MODEL_K[label],
                label,
                mu=mu,
                sigma=sigma,
            )
            entry = report.to_dict()
            entry["estimates"] = {"mu": mu, "sigma": sigma}
        reports.append(report)
        entries.append(entry)

    med, mad = robust_stats(data)
    payload["robust"] = {"median": med, "mad": mad}

    if args.format == "json":
        _emit(args, json.dumps(payload, indent=2))
    else:
        lines = [gof_mod.format_table(reports)]
        if "selected_q" in payload:
            lines.append(f"selected q: {payload['selected_q']:g} (by KS over grid)")
        for entry in entries:
            if "estimates" in entry and entry["model_label"] in ("tdq", "td"):
                ses = entry.get("std_errors") or {}
                est = entry["estimates"]
                parts = [
                    f"{n}={est[n]:.6g}" + (f" ({ses[n]:.4g})" if n in ses else "")
                    for n in PARAM_NAMES
                ]
                lines.append(f"{entry['model_label']}: " + ", ".join(parts))
        lines.append(f"robust: median={med:.6g}, MAD={mad:.6g}")
        _emit(args, "\n".join(lines))


def cmd_eval(args):
    kernel = _kernel_from_args(args)
    dist = TrimodalDistribution(kernel, _params_from_args(args))
    if args.at:
        xs = np.array([float(v) for v in args.at.split(",")])
    else:
        lo = args.x_min if args.x_min is not None else args.mu - 6.0 * args.sigma
        hi = args.x_max if args.x_max is not None else args.mu + 6.0 * args.sigma
        xs = np.linspace(lo, hi, args.num)
    pdf = np.atleast_1d(dist.pdf(xs))
    cdf = np.atleast_1d(dist.cdf(xs))
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "eval",
            "grid": [
                {"x": float(x), "pdf": float(p), "cdf": float(c)}
                for x, p, c in zip(xs, pdf, cdf)
            ],
        }
        _emit(args, json.dumps(payload, indent=2))
    else:
        lines = [f"{'x':>14s} {'pdf':>14s} {'cdf':>14s}"]
        lines += [f"{x:14.6g} {p:14.6g} {c:14.6g}" for x, p, c in zip(xs, pdf, cdf)]
        _emit(args, "\n".join(lines))


def cmd_sample(args):
    kernel = _kernel_from_args(args)
    dist = TrimodalDistribution(kernel, _params_from_args(args))
    values = dist.sample(args.n, seed=args.seed)
    _emit(args, "\n".join(repr(float(v)) for v in values))


def cmd_modality(args):
    kernel = _kernel_from_args(args)
    dist = TrimodalDistribution(kernel, _params_from_args(args))
    report = dist.classify_modality()
    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "command": "modality",
            "modality": report.modality,
            "modes": list(report.modes),
            "minima": list(report.minima),
            "r_roots": list(report.r_roots),
        }
        _emit(args, json.dumps(payload, indent=2))
    else:
        lines = [
            report.modality,
            "modes:   " + ", ".join(f"{m:.8g}" for m in report.modes),
            "minima:  " + (", ".join(f"{m:.8g}" for m in report.minima) or "-"),
            "r_roots: " + (", ".join(f"{r:.8g}" for r in report.r_roots) or "-"),
        ]
        _emit(args, "\n".join(lines))


def cmd_gof(args):
    data = read_numeric_column(args.input, args.column)
    kernel = _kernel_from_args(args)
    dist = TrimodalDistribution(kernel, _params_from_args(args))
    loglik = float(np.sum(dist.log_pdf(data)))
    report = gof_mod.evaluate_model(
        data, dist.cdf, loglik, 5, "td", mu=args.mu, sigma=args.sigma
    )
    if args.format == "json":
        payload = {"schema_version": SCHEMA_VERSION, "command": "gof"}
        payload.update(report.to_dict())
        _emit(args, json.dumps(payload, indent=2))
    else:
        _emit(args, gof_mod.format_table([report]))


def cmd_bootstrap(args):
    data = read_numeric_column(args.input, args.column)
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    plan = bootstrap_mod.BootstrapPlan(
        replications=args.replications,
        seed=args.seed,
        models=models,
        fit_cfg=_fit_cfg(args, q=args.q),
        kernel_name=args.kernel,
        nu=args.nu,
        p=args.p,
        kde_adaptive=args.kde_adaptive,
    )
    summary = bootstrap_mod.run(data, plan, n_jobs=args.jobs)
    if args.replicates_csv:
        bootstrap_mod.write_replicates_csv(summary, args.replicates_csv)
    if args.format == "json":
        payload = {"schema_version": SCHEMA_VERSION, "command": "bootstrap"}
        payload.update(summary.to_dict())
        _emit(args, json.dumps(payload, indent=2))
    else:
        lines = [f"bootstrap: {plan.replications} replications, n={summary.n}"]
        for label in plan.models:
            lines.append(f"[{label}] failures: {summary.failure_count[label]}")
            for name, agg in summary.parameters[label].items():
                lines.append(
                    f"  {name:10s} mean={agg['mean']:.6g} sd={agg['sd']:.6g} "
                    f"ci=({agg['ci_lo']:.6g}, {agg['ci_hi']:.6g})"
                )
        _emit(args, "\n".join(lines))


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def _add_common(parser):
    parser.add_argument("--kernel", default="normal", choices=KERNEL_NAMES)
    parser.add_argument("--nu", type=float, default=None, help="student_t degrees of freedom")
    parser.add_argument("--p", type=float, default=1.5, help="fixed shape exponent")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("json", "table"), default="table")
    parser.add_argument("--output", default=None, help="output path (default stdout)")


def _add_data(parser):
    parser.add_argument("--input", required=True, help="numeric text/CSV file")
    parser.add_argument("--column", default=None, help="column name or 0-based index")


def _add_params(parser):
    parser.add_argument("--mu", type=float, required=True)
    parser.add_argument("--sigma", type=float, required=True)
    parser.add_argument("--alpha", type=float, required=True)
    parser.add_argument("--rho", type=float, required=True)
    parser.add_argument("--delta", type=float, required=True)


def _add_fit_control(parser):
    parser.add_argument("--q", type=float, default=1.0)
    parser.add_argument("--starts", type=int, default=16)
    parser.add_argument("--max-iters", type=int, default=2000)
    parser.add_argument("--kde-adaptive", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trimodal",
        description="Trimodal reweighted-kernel distribution toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit models and report GOF comparison")
    _add_common(p_fit)
    _add_data(p_fit)
    _add_fit_control(p_fit)
    p_fit.add_argument("--q-grid", default=None, help="comma list of q values")
    p_fit.add_argument("--models", default="tdq,td,kde,normal")
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser("eval", help="tabulate (x, pdf, cdf)")
    _add_common(p_eval)
    _add_params(p_eval)
    p_eval.add_argument("--x-min", type=float, default=None)
    p_eval.add_argument("--x-max", type=float, default=None)
    p_eval.add_argument("--num", type=int, default=101)
    p_eval.add_argument("--at", default=None, help="comma list of x values")
    p_eval.set_defaults(func=cmd_eval)

    p_sample = sub.add_parser("sample", help="draw inverse-CDF samples")
    _add_common(p_sample)
    _add_params(p_sample)
    p_sample.add_argument("-n", "--n", type=int, required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_mod = sub.add_parser("modality", help="classify uni/bi/trimodality")
    _add_common(p_mod)
    _add_params(p_mod)
    p_mod.set_defaults(func=cmd_modality)

    p_gof = sub.add_parser("gof", help="GOF statistics of a given model on data")
    _add_common(p_gof)
    _add_data(p_gof)
    _add_params(p_gof)
    p_gof.set_defaults(func=cmd_gof)

    p_boot = sub.add_parser("bootstrap", help="bootstrap refits and aggregates")
    _add_common(p_boot)
    _add_data(p_boot)
    _add_fit_control(p_boot)
    p_boot.add_argument("--replications", type=int, default=1000)
    p_boot.add_argument("--models", default="tdq,td,kde,normal")
    p_boot.add_argument("--jobs", type=int, default=1)
    p_boot.add_argument("--replicates-csv", default=None)
    p_boot.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (TrimodalError, OSError, ValueError) as exc:
        if getattr(args, "format", "table") == "json":
            err = {
                "schema_version": SCHEMA_VERSION,
                "error": {"type": type(exc).__name__, "message": str(exc)},
            }
            print(json.dumps(err), file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
