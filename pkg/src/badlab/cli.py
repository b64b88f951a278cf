"""Command-line orchestration of the analysis pipelines.

Every subcommand is deterministic for a given input and seed: output files
carry no timestamps, dictionary keys are sorted, and floats are formatted
reproducibly, so artifacts can be diffed across runs.  Data errors exit with
status 1 and one machine-readable JSON line on stderr; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import badfit as badfit_mod
from . import dataset as dataset_mod
from . import diagnostics as diagnostics_mod
from . import distributions as distributions_mod
from . import logistic as logistic_mod
from . import meta as meta_mod
from . import normalization as normalization_mod
from . import published
from . import synthetic as synthetic_mod
from . import thresholds as thresholds_mod
from .errors import BadlabError
from .svgplot import Series, render_plot

SEED_ENV_VAR = "BADLAB_SEED"


def _default_seed(value) -> int:
    if value is not None:
        return int(value)
    return int(os.environ.get(SEED_ENV_VAR, "0"))


def _load_dataset(path: str) -> dataset_mod.ExamDataset:
    if not Path(path).exists():
        raise FileNotFoundError(f"file not found: {path}")
    return dataset_mod.parse_exam_table(path)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_estimates(path: str | None) -> dict[str, normalization_mod.NormalizationEstimate]:
    if path is None:
        return normalization_mod.reference_estimates()
    if not Path(path).exists():
        raise FileNotFoundError(f"file not found: {path}")
    suite = normalization_mod.NormalizationSuite.from_json(Path(path).read_text("utf-8"))
    return suite.estimates


def _plot_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else repr(float(v)) for v in row))
    _write(path, "\n".join(lines) + "\n")


def cmd_ingest(args) -> int:
    mapping = (
        dataset_mod.ColumnMapping.from_json(Path(args.mapping).read_text("utf-8"))
        if args.mapping
        else None
    )
    if not Path(args.input).exists():
        raise FileNotFoundError(f"file not found: {args.input}")
    ds = dataset_mod.parse_exam_table(args.input, mapping)
    ds = dataset_mod.filter_ok(ds)
    if not args.keep_all_eyes:
        ds = dataset_mod.select_one_eye_per_patient(ds, _default_seed(args.seed))
    dataset_mod.write_canonical_csv(ds, args.out)
    report = ds.parse_report
    print(
        json.dumps(
            {
                "records": len(ds),
                "unparseable_cells": sum(report.unparseable.values()) if report else 0,
                "invalid_cells": sum(report.invalid.values()) if report else 0,
                "out": args.out,
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_recover(args) -> int:
    ds = _load_dataset(args.input)
    suite = normalization_mod.fit_all_indices(ds)
    out = Path(args.out)
    _write(out / "normalization.json", suite.to_json())
    _write(out / "normalization.csv", suite.to_csv())
    print(f"recovered {len(suite.estimates)} normalizations, {len(suite.failures)} failures -> {out}")
    return 0


def cmd_fit(args) -> int:
    ds = _load_dataset(args.input)
    fit = badfit_mod.fit_bad(ds)
    out = Path(args.out)
    _write(out / "badfit.json", fit.to_json())
    _write(out / "badfit.csv", fit.to_csv_row())
    print(f"C={fit.intercept_c:.6f} adjusted_r2={fit.adjusted_r_squared:.12f} n={fit.n} -> {out}")
    return 0


def cmd_diagnose(args) -> int:
    ds = _load_dataset(args.input)
    out = Path(args.out)
    columns = list(badfit_mod.MODEL_INDICES) + ["d_final"]
    corr = diagnostics_mod.correlation_matrix(ds, columns)
    _write(out / "correlation.csv", corr.to_csv())
    report = diagnostics_mod.vif(ds, list(badfit_mod.MODEL_INDICES))
    _write(out / "vif.csv", report.to_csv())
    pairs = [(name, "d_final") for name in badfit_mod.MODEL_INDICES]
    linearity = diagnostics_mod.linearity_report(ds, pairs, span=args.span)
    _write(out / "linearity.csv", linearity.to_csv())

    for name in badfit_mod.MODEL_INDICES:
        x, y = ds.column(name), ds.column("d_final")
        mask = np.isfinite(x) & np.isfinite(y)
        x, y = x[mask], y[mask]
        curve = diagnostics_mod.loess_smooth(x, y, span=args.span)
        line = diagnostics_mod.nonlinearity_score(x, y, span=args.span)
        line_y = line.intercept + line.slope * curve.grid
        _plot_csv(
            out / f"scatter_{name}.csv",
            ["grid", "loess", "ols_line"],
            zip(curve.grid, curve.values, line_y),
        )
        # Raw points (and their line residuals) so spread-vs-level patterns
        # can be examined; no formal heteroscedasticity test is run.
        residuals = y - (line.intercept + line.slope * x)
        _plot_csv(out / f"points_{name}.csv", [name, "d_final", "line_residual"], zip(x, y, residuals))
        svg = render_plot(
            [
                Series(x, y, kind="scatter", label="exams"),
                Series(curve.grid, line_y, label="least squares", color="#1f77b4"),
                Series(curve.grid, curve.values, label="local regression", color="#d62728"),
            ],
            title=f"{name} vs d_final",
            xlabel=name,
            ylabel="d_final",
        )
        _write(out / f"scatter_{name}.svg", svg)
    print(f"diagnostics (correlation, vif, linearity, {len(badfit_mod.MODEL_INDICES)} plots) -> {out}")
    return 0


def cmd_thresholds(args) -> int:
    estimates = _load_estimates(args.estimates)
    rows = thresholds_mod.cutoff_table(estimates, suspicious=args.suspicious, abnormal=args.abnormal)
    text = thresholds_mod.render_cutoff_csv(rows)
    if args.out:
        _write(Path(args.out), text)
        print(f"cutoff table ({len(rows)} indices) -> {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_dist(args) -> int:
    ds = _load_dataset(args.input)
    out = Path(args.out)
    columns = list(published.ALL_INDICES) + ["d_final"]
    lines = [
        "index,mode,source_measure,source_mode,"
        "normal,suspicious,abnormal,target_normal,target_suspicious,target_abnormal"
    ]
    for name in columns:
        values = ds.column(name)
        values = values[np.isfinite(values)]
        if values.size < 10:
            continue
        abnormal = args.dfinal_abnormal if name == "d_final" else args.abnormal
        breakdown = distributions_mod.category_breakdown(values, args.suspicious, abnormal)
        target = distributions_mod.standard_normal_targets(args.suspicious, abnormal)
        curve = distributions_mod.kde(values, bandwidth=args.bandwidth)
        source_name, source_mode = "", ""
        definition = dataset_mod.INDEX_DEFINITION_BY_NAME.get(name)
        if definition is not None:
            source_values = np.array(
                [v for v in (definition.source_value(r) for r in ds.records) if v is not None]
            )
            if source_values.size >= 10 and np.ptp(source_values) > 0:
                source_name = definition.source_name
                source_mode = f"{distributions_mod.mode_estimate(source_values):.4f}"
        lines.append(
            f"{name},{curve.mode():.4f},{source_name},{source_mode},"
            f"{breakdown.normal:.4f},{breakdown.suspicious:.4f},"
            f"{breakdown.abnormal:.4f},{target.normal:.4f},{target.suspicious:.4f},{target.abnormal:.4f}"
        )
        reference = np.exp(-0.5 * curve.grid**2) / math.sqrt(2 * math.pi)
        _plot_csv(
            out / f"density_{name}.csv",
            ["grid", "density", "standard_normal"],
            zip(curve.grid, curve.density, reference),
        )
        svg = render_plot(
            [
                Series(curve.grid, curve.density, label="empirical"),
                Series(curve.grid, reference, label="standard normal", color="#d62728", dashed=True),
            ],
            title=f"density of {name}",
            xlabel=name,
            ylabel="density",
        )
        _write(out / f"density_{name}.svg", svg)
    _write(out / "categories.csv", "\n".join(lines) + "\n")
    print(f"distribution report -> {out}")
    return 0


def cmd_logit_view(args) -> int:
    ds = _load_dataset(args.input)
    out = Path(args.out)
    fit = badfit_mod.fit_bad(ds)
    report = logistic_mod.logit_linearity_report(ds, fit, span=args.span)
    _write(out / "logit_linearity.csv", report.to_csv())
    for entry in report.entries:
        x, y = ds.column(entry.index), ds.column("d_final")
        mask = np.isfinite(x) & np.isfinite(y)
        x, y = x[mask], y[mask]
        curve = diagnostics_mod.loess_smooth(x, y, span=args.span)
        line_y = entry.intercept + entry.slope * curve.grid
        svg = render_plot(
            [
                Series(x, y, kind="scatter", label="exams"),
                Series(curve.grid, line_y, label="least squares", color="#1f77b4"),
                Series(curve.grid, curve.values, label="local regression", color="#d62728"),
            ],
            title=f"{entry.index} vs model output",
            xlabel=entry.index,
            ylabel="d_final",
        )
        _write(out / f"logit_{entry.index}.svg", svg)
    baseline = logistic_mod.baseline_probability(fit)
    print(f"baseline probability logistic(C) = {baseline:.4f}; report -> {out}")
    return 0


def cmd_synth(args) -> int:
    if args.spec:
        if not Path(args.spec).exists():
            raise FileNotFoundError(f"file not found: {args.spec}")
        spec = synthetic_mod.PopulationSpec.from_json(Path(args.spec).read_text("utf-8"))
    else:
        spec = synthetic_mod.default_population_spec()
    # Seed precedence: explicit --seed, then the environment fallback (only
    # when no spec file pinned one), then the spec's own seed.
    env_seed = os.environ.get(SEED_ENV_VAR)
    seed = spec.seed
    if args.seed is not None:
        seed = args.seed
    elif args.spec is None and env_seed is not None:
        seed = int(env_seed)
    if args.n is not None or seed != spec.seed:
        import dataclasses

        spec = dataclasses.replace(spec, n=args.n if args.n is not None else spec.n, seed=seed)
    ds = synthetic_mod.make_population(spec)
    dataset_mod.write_canonical_csv(ds, args.out)
    if args.dump_spec:
        _write(Path(args.dump_spec), spec.to_json())
    print(f"synthetic population n={len(ds)} seed={spec.seed} -> {args.out}")
    return 0


def cmd_roundtrip(args) -> int:
    if args.spec:
        if not Path(args.spec).exists():
            raise FileNotFoundError(f"file not found: {args.spec}")
        spec = synthetic_mod.PopulationSpec.from_json(Path(args.spec).read_text("utf-8"))
    else:
        spec = synthetic_mod.default_population_spec()
    report = synthetic_mod.recovery_roundtrip(spec)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: observed {check.observed:.9g} vs target {check.target:.9g}"
              f" (tol {check.tolerance:.3g})")
    if report.flagged_vif:
        print(f"note: VIF above threshold for {', '.join(report.flagged_vif)}")
    if args.out:
        _write(Path(args.out), report.to_json())
    print(f"roundtrip {'PASSED' if report.all_passed else 'FAILED'} "
          f"({len(report.checks)} checks)")
    return 0 if report.all_passed else 1


def cmd_meta(args) -> int:
    if args.studies:
        if not Path(args.studies).exists():
            raise FileNotFoundError(f"file not found: {args.studies}")
        raw = json.loads(Path(args.studies).read_text("utf-8"))
        studies = [meta_mod.StudySummary.from_dict(entry) for entry in raw["studies"]]
    else:
        studies = meta_mod.load_bundled_studies()
    report = meta_mod.study_table(studies, normalization_mod.reference_estimates())
    out = Path(args.out)
    _write(out / "studies.csv", report.to_csv())
    _write(out / "studies.md", report.to_markdown())
    _write(out / "welch.csv", report.welch_csv())
    print(f"{len(report.rows)} study rows, {len(report.welch)} pairwise comparisons -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="badlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an exam export into the canonical CSV schema")
    p.add_argument("--input", required=True)
    p.add_argument("--mapping", help="column mapping JSON (defaults to the canonical schema)")
    p.add_argument("--seed", type=int, help=f"selection seed (default ${SEED_ENV_VAR} or 0)")
    p.add_argument("--keep-all-eyes", action="store_true", help="skip one-eye-per-patient selection")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("recover", help="recover per-index normalization parameters")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("fit", help="refit the regression model")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("diagnose", help="correlations, VIF, and linearity diagnostics")
    p.add_argument("--input", required=True)
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("thresholds", help="translate SD cutoffs into source units")
    p.add_argument("--estimates", help="normalization JSON (defaults to published reference values)")
    p.add_argument("--suspicious", type=float, default=published.SUSPICIOUS_SD)
    p.add_argument("--abnormal", type=float, default=published.ABNORMAL_SD)
    p.add_argument("--out")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("dist", help="densities, modes, and category breakdowns")
    p.add_argument("--input", required=True)
    p.add_argument("--suspicious", type=float, default=published.SUSPICIOUS_SD)
    p.add_argument("--abnormal", type=float, default=published.ABNORMAL_SD)
    p.add_argument("--dfinal-abnormal", type=float, default=published.DFINAL_ABNORMAL_SD)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("logit-view", help="per-index linearity against the model output")
    p.add_argument("--input", required=True)
    p.add_argument("--span", type=float, default=0.75)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_logit_view)

    p = sub.add_parser("synth", help="generate a synthetic population")
    p.add_argument("--spec", help="population spec JSON (defaults to the built-in spec)")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dump-spec", help="also write the spec that was used")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("roundtrip", help="verify recovery pipelines against a known spec")
    p.add_argument("--spec")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("meta", help="published-study tables and Welch comparisons")
    p.add_argument("--studies", help="study fixtures JSON (defaults to the bundled fixtures)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_meta)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BadlabError, OSError, ValueError, KeyError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
