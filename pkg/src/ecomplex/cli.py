"""Command-line pipeline.

Each subcommand reads files produced by earlier stages (or supplied by the
user) and writes its results into ``--out`` (default: ``$ECOMPLEX_OUT`` or the
current directory).

Exit codes: 0 success, 2 bad input (files, parameters, no data),
3 computation undefined on otherwise valid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from . import io as eio
from .capability import SweepConfig, run_sweep
from .empirics import (
    CountrySeries,
    ProductAttributeMap,
    baseline_indices,
    growth_regression,
    labor_diversity,
    new_exports,
)
from .errors import ComputationError, DegenerateDistributionError, InputError
from .matrix import build_matrix
from .nulls import NullLevel, NullModelSpec, null_comparison
from .reflections import DEFAULT_DEPTH, correlate_external, normalize, rank_shift, reflect

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTATION = 3
OUT_ENV = "ECOMPLEX_OUT"

log = logging.getLogger("ecomplex")


def _require_files(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise InputError(f"{p}: no such file")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    _require_files(args.trade_csv)
    if not args.threshold > 0:
        raise InputError("--threshold must be positive")
    tables = eio.read_trade_csv(args.trade_csv)
    out = _out_dir(args)
    for year, table in tables.items():
        m = build_matrix(table, args.threshold)
        meta = eio.make_metadata("ingest", {"threshold": args.threshold, "year": year}, None, [args.trade_csv])
        edge_path, _ = eio.write_matrix(m, out / f"matrix_{year}.csv", meta)
        log.info(
            "year %s: %d countries, %d products, %d edges (%d/%d isolated)",
            year, len(m.countries), len(m.products), m.n_edges,
            len(m.isolated_countries), len(m.isolated_products),
        )
        print(edge_path)
    return EXIT_OK


def cmd_reflect(args) -> int:
    _require_files(args.matrix, args.gdp)
    m = eio.read_matrix(args.matrix)
    traj = reflect(m, args.depth)
    out = _out_dir(args)
    params = {"depth": args.depth, "log_gdp": args.log_gdp, "gdp": Path(args.gdp).name if args.gdp else None}
    inputs = [args.matrix] + ([args.gdp] if args.gdp else [])
    meta = eio.make_metadata("reflect", params, None, inputs)

    rows = []
    for n in range(traj.depth + 1):
        rows += [("country", c, n, v) for c, v in zip(traj.countries, traj.country_levels[n].tolist())]
        rows += [("product", p, n, v) for p, v in zip(traj.products, traj.product_levels[n].tolist())]
    print(eio.write_table(out / "trajectory", ["side", "id", "level", "value"], rows, meta, args.format))

    zrows = []
    for n in range(traj.depth + 1):
        try:
            z = normalize(traj, n)
        except DegenerateDistributionError:
            log.warning("level %d has zero variance; not normalized", n)
            continue
        zrows += [(c, n, v) for c, v in zip(z.countries, z.values.tolist())]
    print(eio.write_table(out / "normalized", ["country", "level", "z"], zrows, meta, args.format))

    # ranking of countries by successive even levels, each against level 0
    rrows = []
    for n in range(0, traj.depth + 1, 2):
        shift = rank_shift(traj, 0, n)
        rrows += [(c, n, rb, rb - ra, shift.correlation) for c, ra, rb in shift.rows]
    print(
        eio.write_table(
            out / "rank_shift", ["country", "level", "rank", "delta_vs_level0", "spearman_vs_level0"],
            rrows, meta, args.format,
        )
    )

    if args.gdp:
        series = eio.read_series_csv(args.gdp)
        try:
            corr = correlate_external(traj, series, log_transform=args.log_gdp)
        except ComputationError as exc:
            log.warning("correlation step skipped: %s", exc)
        else:
            crow = [(n, r, abs(r), corr.n_overlap) for n, r in corr.correlations.items()]
            print(eio.write_table(out / "correlations", ["level", "pearson_r", "abs_r", "n_overlap"], crow, meta, args.format))
    return EXIT_OK


def _load_sweep(path) -> SweepConfig:
    if path is None:
        return SweepConfig()
    _require_files(path)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return SweepConfig.from_dict(data)


def cmd_simulate(args) -> int:
    config = _load_sweep(args.config)
    if args.seed is not None:
        config = SweepConfig(config.grid, config.replicates, args.seed, config.base)
    out = _out_dir(args)
    results = run_sweep(config, n_jobs=args.jobs)
    inputs = [args.config] if args.config else []
    summary = []
    for j, res in enumerate(results):
        params = dict(config.to_dict(), cell=j, cell_params=asdict(res.params))
        meta = eio.make_metadata("simulate", params, config.seed, inputs)
        print(
            eio.write_table(
                out / f"sweep_cell_{j:03d}",
                ["replicate", "country", "capability_count", "k_c0", "k_c1"],
                list(res.rows()), meta, args.format,
            )
        )
        p = res.params
        summary.append(
            (j, p.n_countries, p.n_products, p.n_capabilities, p.r, p.q, config.replicates,
             len(res.degenerate_replicates), res.n_excluded_countries,
             res.pearson_k0_k1, res.spearman_cap_k0, res.spearman_cap_k1)
        )
    meta = eio.make_metadata("simulate", config.to_dict(), config.seed, inputs)
    print(
        eio.write_table(
            out / "sweep_summary",
            ["cell", "n_countries", "n_products", "n_capabilities", "r", "q", "replicates",
             "degenerate_replicates", "excluded_countries", "pearson_k0_k1",
             "spearman_cap_k0", "spearman_cap_k1"],
            summary, meta, args.format,
        )
    )
    return EXIT_OK


def cmd_null(args) -> int:
    _require_files(args.matrix)
    spec = NullModelSpec(args.level, args.samples, args.seed, args.swap_factor)
    m = eio.read_matrix(args.matrix)
    res = null_comparison(m, spec)
    out = _out_dir(args)
    params = {"level": spec.level.value, "samples": spec.n_samples, "swap_factor": spec.swap_factor}
    meta = eio.make_metadata("null", params, spec.seed, [args.matrix])
    rows = [(i, float(v)) for i, v in enumerate(res.null_values)]
    print(eio.write_table(out / "null_distribution", ["sample", "statistic"], rows, meta, args.format))
    summary = {
        "statistic": "pearson(k_c0, k_c1)",
        "observed": res.observed,
        "mean": res.mean,
        "stdev": res.stdev,
        "p_value": res.p_value,
        "n_samples": spec.n_samples,
        "n_degenerate": res.n_degenerate,
        "no_rewiring_possible": res.no_rewiring_possible,
    }
    print(eio.write_json(out / "null_summary.json", summary, meta))
    return EXIT_OK


def cmd_regress(args) -> int:
    _require_files(args.matrix, args.gdp_t, args.gdp_t1)
    depth = max(args.level + 1, args.depth if args.depth is not None else 0)
    m = eio.read_matrix(args.matrix)
    traj = reflect(m, depth)
    g0 = CountrySeries(eio.read_series_csv(args.gdp_t), "gdp_t")
    g1 = CountrySeries(eio.read_series_csv(args.gdp_t1), "gdp_t_plus")
    res = growth_regression(g0, g1, traj, args.level, log_gdp=args.log_gdp)
    out = _out_dir(args)
    params = {"level": args.level, "depth": depth, "log_gdp": args.log_gdp}
    meta = eio.make_metadata("regress", params, None, [args.matrix, args.gdp_t, args.gdp_t1])
    print(eio.write_json(out / "regression.json", res.to_dict(), meta))
    rows = [(c, res.observed[c], res.predictions[c]) for c in res.predictions]
    print(eio.write_table(out / "growth_scatter", ["country", "observed_growth", "predicted_growth"], rows, meta, args.format))
    return EXIT_OK


def cmd_newexports(args) -> int:
    _require_files(args.trade_t0, args.trade_t1)
    t0 = eio.read_single_year(args.trade_t0, args.year_t0)
    t1 = eio.read_single_year(args.trade_t1, args.year_t1)
    res = new_exports(t0, t1, args.low, args.high, args.threshold, args.leave_one_out)
    out = _out_dir(args)
    params = {
        "low": args.low, "high": args.high, "threshold": args.threshold,
        "leave_one_out": args.leave_one_out, "year_t0": t0.year, "year_t1": t1.year,
    }
    meta = eio.make_metadata("newexports", params, None, [args.trade_t0, args.trade_t1])
    rows = [(r.country, r.k_c0, r.k_c1, r.mean_kp0, r.mean_kp1, r.n_new_products) for r in res.rows]
    print(
        eio.write_table(
            out / "new_exports", ["country", "k_c0", "k_c1", "mean_kp0", "mean_kp1", "n_new_products"],
            rows, meta, args.format,
        )
    )
    prow = [(c, p) for c, ps in res.new_products.items() for p in sorted(ps)]
    print(eio.write_table(out / "new_export_products", ["country", "product"], prow, meta, args.format))
    return EXIT_OK


def cmd_baseline(args) -> int:
    _require_files(args.trade_csv)
    table = eio.read_single_year(args.trade_csv, args.year)
    res = baseline_indices(table)
    out = _out_dir(args)
    meta = eio.make_metadata("baseline", {"year": table.year}, None, [args.trade_csv])
    rows = [(c, res.hhi[c], res.entropy[c]) for c in res.hhi]
    print(eio.write_table(out / "baseline_indices", ["country", "hhi", "entropy"], rows, meta, args.format))
    return EXIT_OK


def cmd_labor(args) -> int:
    _require_files(args.matrix, args.attributes)
    m = eio.read_matrix(args.matrix)
    attrs = ProductAttributeMap.from_pairs(eio.read_attribute_csv(args.attributes))
    res = labor_diversity(m, attrs, depth=args.depth)
    out = _out_dir(args)
    meta = eio.make_metadata("labor", {"depth": args.depth}, None, [args.matrix, args.attributes])
    rows = [(c, v, res.coverage.get(c, 0.0)) for c, v in res.averages.items()]
    print(eio.write_table(out / "labor_diversity", ["country", "mean_attributes", "coverage"], rows, meta, args.format))
    crow = [(lv, r) for lv, r in res.correlations.items()]
    print(eio.write_table(out / "labor_correlations", ["level", "pearson_r"], crow, meta, args.format))
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _non_negative_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out", default=os.environ.get(OUT_ENV, "."),
        help=f"output directory (default: ${OUT_ENV} or the current directory)",
    )
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="format of tabular outputs")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")

    parser = argparse.ArgumentParser(
        prog="ecomplex",
        description="Country-product networks, method of reflections, capability and null models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="trade CSV -> binary matrix artifacts, one per year")
    p.add_argument("trade_csv", help="CSV with header year,country,product,value")
    p.add_argument("--threshold", type=float, default=1.0, help="RCA threshold for an edge (default 1)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("reflect", parents=[common], help="method of reflections on a matrix artifact")
    p.add_argument("matrix", help="edge list CSV written by ingest")
    p.add_argument("--depth", type=_non_negative_int, default=DEFAULT_DEPTH, help="iterations (default 19)")
    p.add_argument("--gdp", help="optional country,value CSV to correlate against")
    p.add_argument("--log-gdp", action="store_true", help="log-transform the --gdp series")
    p.set_defaults(func=cmd_reflect)

    p = sub.add_parser("simulate", parents=[common], help="capability-model ensemble sweep")
    p.add_argument("config", nargs="?", help="sweep config JSON (default: built-in grid)")
    p.add_argument("--seed", type=_non_negative_int, help="override the config's master seed")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads for replicates")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("null", parents=[common], help="null-model distribution of corr(k_c0, k_c1)")
    p.add_argument("matrix", help="edge list CSV written by ingest")
    p.add_argument("--level", choices=[lv.value for lv in NullLevel], default=NullLevel.PRESERVE_BOTH.value)
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--seed", type=_non_negative_int, default=0)
    p.add_argument("--swap-factor", type=float, default=10.0, help="preserve_both swaps per edge")
    p.set_defaults(func=cmd_null)

    p = sub.add_parser("regress", parents=[common], help="growth regression on k_c,N and k_c,N+1")
    p.add_argument("matrix", help="edge list CSV for the start year")
    p.add_argument("--gdp-t", required=True, help="country,value CSV of GDP at the start year")
    p.add_argument("--gdp-t1", required=True, help="country,value CSV of GDP at the end year")
    p.add_argument("--level", type=_non_negative_int, default=0, help="N; uses k_c,N and k_c,N+1")
    p.add_argument("--depth", type=_non_negative_int, help="reflection depth (default: level + 1)")
    p.add_argument("--log-gdp", action="store_true", help="use log GDP(t) as the income regressor")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("newexports", parents=[common], help="new exports between two years")
    p.add_argument("trade_t0", help="trade CSV for the start year")
    p.add_argument("trade_t1", help="trade CSV for the end year")
    p.add_argument("--year-t0", type=int, help="year to use from trade_t0 if it holds several")
    p.add_argument("--year-t1", type=int, help="year to use from trade_t1 if it holds several")
    p.add_argument("--low", type=float, default=0.1, help="RCA at t0 below which a product is absent")
    p.add_argument("--high", type=float, default=1.0, help="RCA at t1 from which a product is exported")
    p.add_argument("--threshold", type=float, default=1.0, help="RCA threshold of the t0 matrix")
    p.add_argument("--leave-one-out", action="store_true", help="drop the focal country from k_p averages")
    p.set_defaults(func=cmd_newexports)

    p = sub.add_parser("baseline", parents=[common], help="Herfindahl and entropy of export shares")
    p.add_argument("trade_csv")
    p.add_argument("--year", type=int)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("labor", parents=[common], help="labor-input diversity of export baskets")
    p.add_argument("matrix")
    p.add_argument("attributes", help="CSV with header product,attribute")
    p.add_argument("--depth", type=_non_negative_int, default=2)
    p.set_defaults(func=cmd_labor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
