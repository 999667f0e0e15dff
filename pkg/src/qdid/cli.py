"""Command-line front end: CSV in, per-cell effect processes and tables out.

Input files are long-format CSV (UTF-8, comma-separated, header row): one
row per (unit, period) for panel mode, one row per observation for repeated
cross sections. Reports are written as versioned JSON plus two CSVs: a
plot-ready band file (one row per cell, estimator, and tau) and a compact
per-cell summary with the sup-test decision and estimates at selected
quantiles.

Exit codes: 0 success, 2 input/validation failure, 3 estimation infeasible
(no covariate cell is large enough).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .data_model import (
    DEFAULT_MIN_CELL_SIZE,
    CovariateCell,
    PanelData,
    RcsData,
    ValidationError,
    build_cells,
    validate,
)
from .estimators import extract_cell
from .inference import (
    BootstrapConfig,
    InferenceReport,
    analyze_cell,
    analyze_unconditional,
)
from .simulation import DgpSpec, McResult, run_mc, simulate, substream

__all__ = [
    "RunConfig",
    "RunResult",
    "CellAnalysis",
    "LoadError",
    "InfeasibleError",
    "load_csv",
    "tau_grid",
    "run_estimation",
    "report_dict",
    "main",
]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3

REPORT_SCHEMA = "qdid.report.v1"
SUMMARY_TAUS = (0.1, 0.5, 0.9)


class LoadError(ValueError):
    """Input file cannot be parsed into a dataset."""


class InfeasibleError(RuntimeError):
    """No covariate cell satisfies the minimum size requirement."""


def tau_grid(tau_min: float, tau_max: float, tau_step: float) -> np.ndarray:
    """Evenly spaced quantile grid, rounded to sidestep float drift."""
    if not (0.0 < tau_min <= tau_max < 1.0) or tau_step <= 0:
        raise ValueError("grid must satisfy 0 < tau_min <= tau_max < 1, step > 0")
    count = int(np.floor((tau_max - tau_min) / tau_step + 1e-9)) + 1
    grid = np.round(tau_min + tau_step * np.arange(count), 12)
    return grid


@dataclass(frozen=True)
class RunConfig:
    input_path: str
    mode: str = "panel"
    unit_col: str = "unit"
    period_col: str = "period"
    outcome_col: str = "y"
    treatment_col: str = "d"
    covariate_cols: tuple[str, ...] = ()
    tau_min: float = 0.05
    tau_max: float = 0.95
    tau_step: float = 0.01
    bootstrap: int = 1000
    alpha: float = 0.05
    seed: int = 0
    scheme: str = "multinomial"
    estimators: tuple[str, ...] = ("ddid",)
    unconditional: bool = False
    min_cell_size: int = DEFAULT_MIN_CELL_SIZE
    output_format: str = "both"

    def __post_init__(self):
        if self.mode not in ("panel", "rcs"):
            raise ValueError("mode must be 'panel' or 'rcs'")
        for est in self.estimators:
            if est not in ("ddid", "cic"):
                raise ValueError(f"unknown estimator {est!r}")
        if self.output_format not in ("json", "csv", "both"):
            raise ValueError("output format must be json, csv, or both")


def _parse_float(token: str, line: int, col: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise LoadError(f"line {line}: cannot parse {col}={token!r} as a number") from None
    if not np.isfinite(value):
        raise LoadError(f"line {line}: non-finite {col}={token!r}")
    return value


def _parse_binary(token: str, line: int, col: str) -> int:
    if token.strip() in ("0", "1"):
        return int(token)
    raise LoadError(f"line {line}: {col}={token!r} must be 0 or 1")


def _parse_code(token: str, line: int, col: str) -> int:
    try:
        return int(token.strip())
    except ValueError:
        raise LoadError(
            f"line {line}: covariate {col}={token!r} must be an integer code"
        ) from None


def load_csv(config: RunConfig) -> PanelData | RcsData:
    """Read a long-format CSV into a dataset; errors carry file line numbers."""
    try:
        handle = open(config.input_path, newline="", encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot open {config.input_path}: {exc}") from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError("empty file") from None
        header = [h.strip() for h in header]
        required = [config.period_col, config.outcome_col, config.treatment_col]
        required += list(config.covariate_cols)
        has_unit = config.unit_col in header
        if config.mode == "panel" and not has_unit:
            required = [config.unit_col] + required
        missing = [c for c in required if c not in header]
        if missing:
            raise LoadError(f"missing columns: {', '.join(missing)}")
        pos = {c: header.index(c) for c in header}

        rows = []
        for i, row in enumerate(reader):
            line = i + 2
            if not row:
                continue
            if len(row) != len(header):
                raise LoadError(f"line {line}: expected {len(header)} fields, got {len(row)}")
            y = _parse_float(row[pos[config.outcome_col]], line, config.outcome_col)
            period = _parse_binary(row[pos[config.period_col]], line, config.period_col)
            d = _parse_binary(row[pos[config.treatment_col]], line, config.treatment_col)
            covs = tuple(
                _parse_code(row[pos[c]], line, c) for c in config.covariate_cols
            )
            unit = row[pos[config.unit_col]].strip() if has_unit else None
            rows.append((unit, period, y, d, covs, line))
        if not rows:
            raise LoadError("no data rows")

    if config.mode == "rcs":
        unit_ids = np.array([r[0] for r in rows]) if has_unit else None
        return RcsData(
            y=np.array([r[2] for r in rows]),
            period=np.array([r[1] for r in rows]),
            treated=np.array([r[3] for r in rows], dtype=bool),
            covariates=np.array([r[4] for r in rows], dtype=int).reshape(
                len(rows), len(config.covariate_cols)
            ),
            unit_ids=unit_ids,
        )

    by_unit: dict[str, dict[int, tuple]] = {}
    for unit, period, y, d, covs, line in rows:
        periods = by_unit.setdefault(unit, {})
        if period in periods:
            raise LoadError(f"line {line}: duplicate (unit={unit}, period={period}) row")
        periods[period] = (y, d, covs, line)
    units = list(by_unit)
    for unit in units:
        periods = by_unit[unit]
        if set(periods) != {0, 1}:
            raise LoadError(
                f"unit {unit}: panel mode requires exactly one row per period "
                f"(found periods {sorted(periods)})"
            )
        y0, d0, x0, line0 = periods[0]
        y1, d1, x1, line1 = periods[1]
        if x0 != x1:
            raise LoadError(
                f"unit {unit}: covariates differ across periods "
                f"(lines {line0} and {line1})"
            )
        if d0 not in (0, d1):
            raise LoadError(
                f"unit {unit}: pre-period treatment flag {d0} inconsistent with "
                f"post-period {d1} (no one is treated before the policy)"
            )
    return PanelData(
        unit_ids=np.array(units),
        y_pre=np.array([by_unit[u][0][0] for u in units]),
        y_post=np.array([by_unit[u][1][0] for u in units]),
        treated=np.array([by_unit[u][1][1] for u in units], dtype=bool),
        covariates=np.array(
            [by_unit[u][1][2] for u in units], dtype=int
        ).reshape(len(units), len(config.covariate_cols)),
    )


@dataclass(frozen=True)
class CellAnalysis:
    cell: CovariateCell
    reports: dict[str, InferenceReport] | None


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    taus: np.ndarray
    n_total: int
    cells: list[CellAnalysis]
    unconditional: InferenceReport | None


def run_estimation(config: RunConfig) -> RunResult:
    """Full pipeline: load, validate, partition into cells, analyze each."""
    dataset = load_csv(config)
    report = validate(dataset)
    if not report.ok:
        raise ValidationError(report)
    cells = build_cells(dataset, config.min_cell_size)
    if not any(c.viable for c in cells):
        raise InfeasibleError(
            "no viable covariate cells: "
            + "; ".join(f"cell {c.label()}: {c.reason}" for c in cells)
        )
    grid = tau_grid(config.tau_min, config.tau_max, config.tau_step)
    boot = BootstrapConfig(
        iterations=config.bootstrap,
        alpha=config.alpha,
        seed=config.seed,
        scheme=config.scheme,
    )
    analyses: list[CellAnalysis] = []
    viable: list[tuple[int, object]] = []
    for index, cell in enumerate(cells):
        if not cell.viable:
            analyses.append(CellAnalysis(cell, None))
            continue
        extracted = extract_cell(dataset, cell)
        viable.append((index, extracted))
        reports = {
            est: analyze_cell(
                extracted, grid, boot, est, dataset.n_total, cell_index=index
            )
            for est in config.estimators
        }
        analyses.append(CellAnalysis(cell, reports))
    unconditional = None
    if config.unconditional:
        unconditional = analyze_unconditional(viable, grid, boot, dataset.n_total)
    return RunResult(
        config=config,
        taus=grid,
        n_total=dataset.n_total,
        cells=analyses,
        unconditional=unconditional,
    )


def _report_block(report: InferenceReport) -> dict:
    return {
        "taus": [float(t) for t in report.process.taus],
        "estimate": [float(v) for v in report.process.values],
        "lower": [float(v) for v in report.lower],
        "upper": [float(v) for v in report.upper],
        "pointwise_se": [float(v) for v in report.pointwise_se],
        "ks_statistic": float(report.ks_statistic),
        "critical_value": float(report.critical_value),
        "reject": bool(report.reject),
        "n_control": int(report.process.n_control),
        "n_treated": int(report.process.n_treated),
    }


def report_dict(result: RunResult) -> dict:
    cfg = asdict(result.config)
    cfg["covariate_cols"] = list(result.config.covariate_cols)
    cfg["estimators"] = list(result.config.estimators)
    cells = []
    for analysis in result.cells:
        entry = {
            "code": list(analysis.cell.code),
            "n_control": analysis.cell.n_control,
            "n_treated": analysis.cell.n_treated,
            "viable": analysis.cell.viable,
            "reason": analysis.cell.reason,
            "estimators": None,
        }
        if analysis.reports is not None:
            entry["estimators"] = {
                est: _report_block(rep) for est, rep in analysis.reports.items()
            }
        cells.append(entry)
    return {
        "schema": REPORT_SCHEMA,
        "config": cfg,
        "taus": [float(t) for t in result.taus],
        "n_total": result.n_total,
        "cells": cells,
        "unconditional": (
            _report_block(result.unconditional)
            if result.unconditional is not None
            else None
        ),
    }


def _fnum(x) -> str:
    return repr(float(x))


def _cell_columns(config: RunConfig) -> list[str]:
    return ["cell"] + list(config.covariate_cols)


def _cell_values(config: RunConfig, code: tuple[int, ...] | None) -> list[str]:
    if code is None:
        return ["unconditional"] + ["*"] * len(config.covariate_cols)
    label = "all" if not code else "|".join(map(str, code))
    return [label] + [str(c) for c in code]


def write_bands_csv(path: str, result: RunResult) -> None:
    """One row per (cell, estimator, tau): estimate with simultaneous band and SE."""
    config = result.config
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            _cell_columns(config)
            + ["estimator", "tau", "estimate", "lower", "upper", "pointwise_se"]
        )

        def rows_for(code, est, rep: InferenceReport):
            for j, tau in enumerate(rep.process.taus):
                writer.writerow(
                    _cell_values(config, code)
                    + [
                        est,
                        _fnum(tau),
                        _fnum(rep.process.values[j]),
                        _fnum(rep.lower[j]),
                        _fnum(rep.upper[j]),
                        _fnum(rep.pointwise_se[j]),
                    ]
                )

        for analysis in result.cells:
            if analysis.reports is None:
                continue
            for est, rep in analysis.reports.items():
                rows_for(analysis.cell.code, est, rep)
        if result.unconditional is not None:
            rows_for(None, "ddid", result.unconditional)


def _nearest_indices(grid: np.ndarray, targets) -> list[int]:
    return [int(np.argmin(np.abs(grid - t))) for t in targets]


def write_summary_csv(path: str, result: RunResult) -> None:
    """One row per (cell, estimator): sup-test decision plus selected quantiles."""
    config = result.config
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        stat_cols = []
        for t in SUMMARY_TAUS:
            stat_cols += [f"estimate_{t}", f"se_{t}"]
        writer.writerow(
            _cell_columns(config)
            + ["estimator", "n_control", "n_treated", "viable", "reason"]
            + ["ks_statistic", "critical_value", "reject"]
            + stat_cols
        )

        def row_for(code, est, rep: InferenceReport | None, cell: CovariateCell | None):
            base = _cell_values(config, code)
            if rep is None:
                writer.writerow(
                    base
                    + [est, cell.n_control, cell.n_treated, "false", cell.reason]
                    + [""] * (3 + 2 * len(SUMMARY_TAUS))
                )
                return
            picks = _nearest_indices(rep.process.taus, SUMMARY_TAUS)
            stats = []
            for j in picks:
                stats += [_fnum(rep.process.values[j]), _fnum(rep.pointwise_se[j])]
            writer.writerow(
                base
                + [est, rep.process.n_control, rep.process.n_treated, "true", ""]
                + [
                    _fnum(rep.ks_statistic),
                    _fnum(rep.critical_value),
                    "true" if rep.reject else "false",
                ]
                + stats
            )

        for analysis in result.cells:
            if analysis.reports is None:
                row_for(analysis.cell.code, "", None, analysis.cell)
                continue
            for est, rep in analysis.reports.items():
                row_for(analysis.cell.code, est, rep, analysis.cell)
        if result.unconditional is not None:
            row_for(None, "ddid", result.unconditional, None)


def write_report(result: RunResult, out_prefix: str) -> list[str]:
    written = []
    fmt = result.config.output_format
    if fmt in ("json", "both"):
        path = f"{out_prefix}.json"
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(report_dict(result), handle, indent=2)
            handle.write("\n")
        written.append(path)
    if fmt in ("csv", "both"):
        bands = f"{out_prefix}.bands.csv"
        write_bands_csv(bands, result)
        summary = f"{out_prefix}.summary.csv"
        write_summary_csv(summary, result)
        written += [bands, summary]
    return written


def _mc_table_rows(results: list[tuple[float, McResult]], param_name: str):
    """Rows (statistic, param, est x tau values...) in table order."""
    first = results[0][1]
    header = ["statistic", param_name]
    for est in first.estimators:
        for tau in first.taus:
            header.append(f"{est}_{tau}")
    rows = [header]
    stats = [("bias", "bias"), ("rmse", "rmse")]
    if first.rejection is not None:
        stats.append(("rej_prob", "rejection"))
    for label, attr in stats:
        for param, res in results:
            row = [label, repr(float(param)) if param_name == "rho_bar" else str(int(param))]
            table = getattr(res, attr)
            for est in res.estimators:
                row += [_fnum(v) for v in table[est]]
            rows.append(row)
    return rows


def write_mc_outputs(
    results: list[tuple[float, McResult]], param_name: str, out_prefix: str
) -> list[str]:
    rows = _mc_table_rows(results, param_name)
    csv_path = f"{out_prefix}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        csv.writer(handle).writerows(rows)
    first = results[0][1]
    payload = {
        "schema": "qdid.mc.v1",
        "spec": {
            "variant": first.spec.variant,
            "te": first.spec.te,
            "theta": first.spec.theta,
        },
        "reps": first.reps,
        "taus": list(first.taus),
        "estimators": list(first.estimators),
        "bootstrap_iterations": first.bootstrap_iterations,
        "alpha": first.alpha,
        "scheme": first.scheme,
        "seed": first.seed,
        "results": [
            {
                param_name: float(param),
                "n_per_arm": res.spec.n_per_arm,
                "bias": {est: [float(v) for v in res.bias[est]] for est in res.estimators},
                "rmse": {est: [float(v) for v in res.rmse[est]] for est in res.estimators},
                "rejection": (
                    {
                        est: [float(v) for v in res.rejection[est]]
                        for est in res.estimators
                    }
                    if res.rejection is not None
                    else None
                ),
            }
            for param, res in results
        ],
    }
    json_path = f"{out_prefix}.json"
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
    return [csv_path, json_path]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdid",
        description="Quantile treatment effects on the treated for two-period designs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="estimate effect processes from a CSV file")
    est.add_argument("--input", "-i", required=True)
    est.add_argument("--mode", choices=("panel", "rcs"), default="panel")
    est.add_argument("--unit", default="unit", help="unit id column")
    est.add_argument("--period", default="period", help="period column (0=pre, 1=post)")
    est.add_argument("--outcome", default="y", help="outcome column")
    est.add_argument("--treatment", default="d", help="treatment group column (0/1)")
    est.add_argument(
        "--covariates",
        default="",
        help="comma-separated covariate columns (integer-coded)",
    )
    est.add_argument("--tau-min", type=float, default=0.05)
    est.add_argument("--tau-max", type=float, default=0.95)
    est.add_argument("--tau-step", type=float, default=0.01)
    est.add_argument("--bootstrap", "-b", type=int, default=1000)
    est.add_argument("--alpha", type=float, default=0.05)
    est.add_argument("--seed", type=int, default=0)
    est.add_argument("--scheme", choices=("multinomial", "dirichlet"), default="multinomial")
    est.add_argument("--estimators", default="ddid", help="comma-separated: ddid,cic")
    est.add_argument("--unconditional", action="store_true")
    est.add_argument("--min-cell-size", type=int, default=DEFAULT_MIN_CELL_SIZE)
    est.add_argument("--format", choices=("json", "csv", "both"), default="both")
    est.add_argument("--out", "-o", required=True, help="output path prefix")

    mc = sub.add_parser("mc", help="Monte Carlo performance tables")
    mc.add_argument("--dgp", type=int, choices=(1, 2), required=True)
    mc.add_argument("--n", default="200", help="comma-separated per-arm sizes")
    mc.add_argument("--te", type=float, default=0.0)
    mc.add_argument("--rho", default="0", help="comma-separated rho_bar values (dgp 2)")
    mc.add_argument("--reps", type=int, default=1000)
    mc.add_argument("--taus", default="0.1,0.5,0.9")
    mc.add_argument("--bootstrap", "-b", type=int, default=1000)
    mc.add_argument("--alpha", type=float, default=0.05)
    mc.add_argument("--seed", type=int, default=0)
    mc.add_argument("--scheme", choices=("multinomial", "dirichlet"), default="multinomial")
    mc.add_argument("--estimators", default="ddid,cic")
    mc.add_argument("--out", "-o", required=True, help="output path prefix")

    sim = sub.add_parser("simulate", help="write one simulated draw as a long CSV")
    sim.add_argument("--dgp", type=int, choices=(1, 2), required=True)
    sim.add_argument("--n", type=int, default=200, help="per-arm size")
    sim.add_argument("--te", type=float, default=0.0)
    sim.add_argument("--rho", type=float, default=0.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", "-o", required=True)
    return parser


def _cmd_estimate(args) -> int:
    covs = tuple(c.strip() for c in args.covariates.split(",") if c.strip())
    config = RunConfig(
        input_path=args.input,
        mode=args.mode,
        unit_col=args.unit,
        period_col=args.period,
        outcome_col=args.outcome,
        treatment_col=args.treatment,
        covariate_cols=covs,
        tau_min=args.tau_min,
        tau_max=args.tau_max,
        tau_step=args.tau_step,
        bootstrap=args.bootstrap,
        alpha=args.alpha,
        seed=args.seed,
        scheme=args.scheme,
        estimators=tuple(e.strip() for e in args.estimators.split(",") if e.strip()),
        unconditional=args.unconditional,
        min_cell_size=args.min_cell_size,
        output_format=args.format,
    )
    result = run_estimation(config)
    for path in write_report(result, args.out):
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_mc(args) -> int:
    estimators = tuple(e.strip() for e in args.estimators.split(",") if e.strip())
    taus = _float_list(args.taus)
    results: list[tuple[float, McResult]] = []
    if args.dgp == 1:
        param_name = "n"
        for n in _float_list(args.n):
            spec = DgpSpec(variant=1, n_per_arm=int(n), te=args.te)
            results.append(
                (
                    n,
                    run_mc(
                        spec,
                        args.reps,
                        taus,
                        estimators,
                        bootstrap_iterations=args.bootstrap,
                        alpha=args.alpha,
                        scheme=args.scheme,
                        seed=args.seed,
                    ),
                )
            )
    else:
        param_name = "rho_bar"
        ns = _float_list(args.n)
        if len(ns) != 1:
            raise LoadError("dgp 2 tables vary rho_bar; pass a single --n")
        for rho in _float_list(args.rho):
            spec = DgpSpec(variant=2, n_per_arm=int(ns[0]), te=args.te, rho_bar=rho)
            results.append(
                (
                    rho,
                    run_mc(
                        spec,
                        args.reps,
                        taus,
                        estimators,
                        bootstrap_iterations=args.bootstrap,
                        alpha=args.alpha,
                        scheme=args.scheme,
                        seed=args.seed,
                    ),
                )
            )
    for path in write_mc_outputs(results, param_name, args.out):
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = DgpSpec(variant=args.dgp, n_per_arm=args.n, te=args.te, rho_bar=args.rho)
    data = simulate(spec, substream(args.seed, 0))
    with open(args.out, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["unit", "period", "y", "d"])
        for i in range(data.n_units):
            d = int(data.treated[i])
            writer.writerow([int(data.unit_ids[i]), 0, _fnum(data.y_pre[i]), d])
            writer.writerow([int(data.unit_ids[i]), 1, _fnum(data.y_post[i]), d])
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "mc":
            return _cmd_mc(args)
        return _cmd_simulate(args)
    except (LoadError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
