"""Command-line entry point: extend, cv, bootstrap, robustify, simulate.

Every workflow writes its tables into ``--out``. Failures print one JSON
line ``{"error": {"code", "origin", "message"}}`` to stderr and exit 1.
"""
import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DataFormatError, ExtSampleError
from .extension import ExtensionConfig, NormScope, extend_sample
from .fileio import (fmt4, load_csv, load_scenario, predictor_names, write_json,
                     write_table)
from .inference import SE_METHODS, BootstrapSpec, bootstrap_se, standard_error_study
from .regression import Dataset, fit_ols, naive_standard_errors
from .simulation import METRICS, run_study
from .tuning import DEFAULT_ALPHAS, CvPlan, best_grid_point, cv_scores

COMMANDS = ("extend", "cv", "bootstrap", "robustify", "simulate")


@dataclass(frozen=True)
class RunConfig:
    command: str
    out: Path
    prob: Path = None
    nonprob: Path = None
    response: str = "y"
    scenario: str = None
    alpha_st: float = 0.05
    alpha_ch: float = 0.05
    use_cv: bool = False
    norm_scope: NormScope = NormScope.FULL
    k: int = 5
    grid: tuple = DEFAULT_ALPHAS
    full_grid: bool = False
    n_boot: int = None
    n_rep: int = 100
    n_datasets: int = None
    seed: int = None
    output_format: str = "csv"

    @property
    def cv_plan(self):
        seed = 0 if self.seed is None else self.seed
        if self.full_grid:
            return CvPlan.full(self.grid, self.k, seed)
        return CvPlan.reduced(self.grid, self.k, seed)

    @property
    def extension_config(self):
        return ExtensionConfig(self.alpha_st, self.alpha_ch, self.norm_scope)


def _alphas(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="extsample",
        description="Extend a probability sample with screened non-probability observations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        if data:
            p.add_argument("--prob", type=Path, required=True, help="probability-sample CSV")
            p.add_argument("--response", required=True, help="name of the response column")
        p.add_argument("--alpha-st", type=float, default=0.05)
        p.add_argument("--alpha-ch", type=float, default=0.05)
        p.add_argument("--cv", action="store_true", help="choose alphas by k-fold cross-validation")
        p.add_argument("--norm", choices=("full", "slopes"), default="full",
                       help="coefficients entering the relative-change norm")
        p.add_argument("--k", type=int, default=5, help="cross-validation folds")
        p.add_argument("--grid", type=_alphas, default=DEFAULT_ALPHAS,
                       help="alpha values for cross-validation, comma separated")
        p.add_argument("--full-grid", action="store_true",
                       help="search all (alpha_st, alpha_ch) pairs instead of alpha_st == alpha_ch")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--format", dest="output_format", choices=("csv", "json"), default="csv")

    for name, helptext in (("extend", "screen and extend the probability sample"),
                           ("cv", "select alphas by cross-validation, then extend"),
                           ("bootstrap", "extend and bootstrap the standard errors")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--nonprob", type=Path, required=True, help="non-probability-sample CSV")
        if name == "bootstrap":
            p.add_argument("--n-boot", type=int, default=100)

    p = sub.add_parser("robustify", help="screen the probability sample against itself")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo study of a scenario config")
    common(p, data=False)
    p.add_argument("--scenario", required=True, help="scenario file or built-in name")
    p.add_argument("--n-datasets", type=int, default=None,
                   help="replications (default 50 for one predictor, else 100)")
    p.add_argument("--n-boot", type=int, default=None,
                   help="also run the standard-error study with this many bootstrap draws")
    p.add_argument("--n-rep", type=int, default=100, help="draws for the actual standard error")
    return parser


def config_from_args(ns):
    return RunConfig(
        command=ns.command, out=ns.out, prob=getattr(ns, "prob", None),
        nonprob=getattr(ns, "nonprob", None), response=getattr(ns, "response", "y"),
        scenario=getattr(ns, "scenario", None), alpha_st=ns.alpha_st, alpha_ch=ns.alpha_ch,
        use_cv=ns.cv or ns.command == "cv",
        norm_scope=NormScope.SLOPES if ns.norm == "slopes" else NormScope.FULL,
        k=ns.k, grid=tuple(ns.grid), full_grid=ns.full_grid,
        n_boot=getattr(ns, "n_boot", None), n_rep=getattr(ns, "n_rep", 100),
        n_datasets=getattr(ns, "n_datasets", None), seed=ns.seed,
        output_format=ns.output_format)


class _Report:
    def __init__(self):
        self.tables = {}
        self.summary = []

    def table(self, name, header, rows):
        self.tables[name] = (header, rows)

    def note(self, line=""):
        self.summary.append(line)

    def block(self, title, header, rows):
        self.note(title)
        cells = [header] + [[fmt4(v) for v in row] for row in rows]
        widths = [max(len(str(r[j])) for r in cells) for j in range(len(header))]
        for r in cells:
            self.note("  " + "  ".join(str(c).rjust(w) for c, w in zip(r, widths)))
        self.note()

    def write(self, out, output_format):
        out.mkdir(parents=True, exist_ok=True)
        if output_format == "json":
            write_json(out / "report.json", self.tables)
        else:
            for name, (header, rows) in self.tables.items():
                write_table(out / f"{name}.csv", header, rows)
        (out / "summary.txt").write_text("\n".join(self.summary) + "\n", encoding="utf-8")


def _load_pair(cfg):
    prob = load_csv(cfg.prob, cfg.response)
    names = predictor_names(cfg.prob, cfg.response)
    if cfg.nonprob is None:
        return prob, Dataset.empty(prob.p), names
    nonprob = load_csv(cfg.nonprob, cfg.response, min_rows=0)
    if predictor_names(cfg.nonprob, cfg.response) != names:
        raise DataFormatError(f"{cfg.nonprob}: predictor columns differ from {cfg.prob}")
    return prob, nonprob, names


def _choose_config(cfg, prob, nonprob, report):
    if not cfg.use_cv:
        return cfg.extension_config
    plan = cfg.cv_plan
    scores = cv_scores(prob, nonprob, plan, cfg.norm_scope)
    report.table("cv_scores", ["alpha_st", "alpha_ch", "score"],
                 [[a, c, math.nan if s is None else s] for s, (a, c) in zip(scores, plan.grid)])
    a_st, a_ch = best_grid_point(scores, plan.grid)
    report.block(f"cross-validation ({plan.k} folds)", ["alpha_st", "alpha_ch", "score"],
                 [[a, c, s] for s, (a, c) in zip(scores, plan.grid) if s is not None])
    return ExtensionConfig(a_st, a_ch, cfg.norm_scope)


def _decisions(report, res):
    rows = [[i, res.r_star[i], res.delta[i], res.pass_residual[i], res.pass_change[i],
             res.included[i], "degenerate" if res.degenerate[i] else ""]
            for i in range(len(res.r_star))]
    report.table("decisions", ["id", "r_star", "delta", "pass_residual", "pass_change",
                               "included", "diagnostic"], rows)


def _coefficients(report, terms, fits):
    """``fits`` is a list of (fit label, estimates, se method, ses)."""
    rows = []
    for label, est, method, se in fits:
        for t, b, s in zip(terms, est, se):
            rows.append([t, label, b, method, s])
    report.table("coefficients", ["term", "fit", "estimate", "se_method", "se"], rows)
    report.block("coefficients", ["term", "fit", "estimate", "se_method", "se"], rows)


def _run_extend(cfg, report):
    prob, nonprob, names = _load_pair(cfg)
    config = _choose_config(cfg, prob, nonprob, report)
    res = extend_sample(prob, nonprob, config)
    report.note(f"alpha_st = {config.alpha_st:g}, alpha_ch = {config.alpha_ch:g}, "
                f"norm = {config.norm_scope.value}")
    report.note(f"t_s = {fmt4(res.t_s)}, t_c = {fmt4(res.t_c)}")
    report.note(f"probability sample n = {prob.n}; candidates = {nonprob.n}; "
                f"included = {res.included_ids.size}; extended n = {res.extended_sample.n}")
    report.note()
    _decisions(report, res)
    terms = ["intercept", *names]
    fits = [("base", res.base_fit.coefficients, "prob_sample", naive_standard_errors(res.base_fit)),
            ("extended", res.extended_fit.coefficients, "naive", naive_standard_errors(res.extended_fit))]
    if cfg.command == "bootstrap":
        spec = BootstrapSpec(cfg.n_boot, 0 if cfg.seed is None else cfg.seed)
        fits.append(("extended", res.extended_fit.coefficients, "bootstrap",
                     bootstrap_se(prob, nonprob, config, spec)))
    _coefficients(report, terms, fits)


def _run_robustify(cfg, report):
    prob = load_csv(cfg.prob, cfg.response)
    names = predictor_names(cfg.prob, cfg.response)
    config = _choose_config(cfg, prob, prob, report)
    res = extend_sample(prob, prob, config)
    reduced = prob.subset(res.included_ids)
    kept = reduced.n
    report.note(f"kept {kept} of {prob.n} observations (proportion {fmt4(kept / prob.n)})")
    report.note()
    _decisions(report, res)
    fits = [("base", res.base_fit.coefficients, "prob_sample", naive_standard_errors(res.base_fit))]
    if kept > reduced.n_coef:
        rfit = fit_ols(reduced)
        fits.append(("reduced", rfit.coefficients, "naive", naive_standard_errors(rfit)))
    _coefficients(report, ["intercept", *names], fits)
    report.table("reduced", ["id", cfg.response, *names],
                 [[i, prob.responses[i], *prob.predictors[i]] for i in res.included_ids])


def _run_simulate(cfg, report):
    spec = load_scenario(cfg.scenario)
    if cfg.seed is not None:
        spec = replace(spec, seed=cfg.seed)
    n_datasets = cfg.n_datasets or (50 if spec.p == 1 else 100)
    config = cfg.extension_config
    plan = cfg.cv_plan if cfg.use_cv else None
    study = run_study(spec, config, n_datasets, cfg.use_cv, plan)
    rows = []
    for rec in study.per_replication:
        for m in METRICS:
            rows.append([rec.replication, m, getattr(rec, m)])
        if rec.error:
            rows.append([rec.replication, "error", rec.error])
    report.table("study", ["replication", "metric", "value"], rows)
    n_ok = len(study.per_replication) - len(study.failures)
    agg = [[m, *study.aggregates[m], n_ok] for m in METRICS]
    report.table("aggregate", ["metric", "mean", "sd", "n_ok"], agg)
    report.note(f"scenario {cfg.scenario}: {n_datasets} datasets, seed {spec.seed}, "
                f"{len(study.failures)} failed")
    report.note()
    report.block("aggregate", ["metric", "mean", "sd", "n_ok"], agg)
    if cfg.n_boot:
        se = standard_error_study(spec, config, n_studies=n_datasets, n_rep=cfg.n_rep,
                                  n_boot=cfg.n_boot)
        terms = ["intercept", *(f"x{j + 1}" for j in range(spec.p))]
        se_rows = [[m, t, v] for m in SE_METHODS for t, v in zip(terms, se[m])]
        report.table("se_table", ["method", "term", "se"], se_rows)
        report.block(f"standard errors (n_rep = {cfg.n_rep}, n_boot = {cfg.n_boot}, "
                     f"{n_datasets} studies)", ["method", *terms],
                     [[m, *se[m]] for m in SE_METHODS])


_RUNNERS = {"extend": _run_extend, "cv": _run_extend, "bootstrap": _run_extend,
            "robustify": _run_robustify, "simulate": _run_simulate}


def run_command(cfg):
    """Execute one workflow and write its artifacts; returns the exit status."""
    report = _Report()
    report.note(f"extsample {cfg.command}")
    report.note()
    _RUNNERS[cfg.command](cfg, report)
    report.write(Path(cfg.out), cfg.output_format)
    return 0


def error_line(exc):
    if isinstance(exc, ExtSampleError):
        code, origin = exc.code, exc.origin
    else:
        code, origin = "IO", "cli"
    return json.dumps({"error": {"code": code, "origin": origin, "message": str(exc)}},
                      sort_keys=True)


def main(argv=None):
    ns = build_parser().parse_args(argv)
    try:
        with np.errstate(all="ignore"):
            return run_command(config_from_args(ns))
    except (ExtSampleError, OSError) as exc:
        print(error_line(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
