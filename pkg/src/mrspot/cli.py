"""Command-line front end.

    mrspot curve         --scenario s.json --out curve.csv
    mrspot vols          --scenario s.json --out vols.csv
    mrspot error-bounds  --scenario s.json --out pricing.csv
    mrspot hedge-bounds  --scenario s.json --out hedging.csv
    mrspot mc-check      --scenario s.json --seed 42 --out report.json
    mrspot figures       --out figures/

Scenario files are layered over the built-in example, so every command runs
without one. Exit codes: 0 success, 2 invalid input, 3 unsupported regime or
precondition, 4 Monte Carlo disagreement.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import bounds, forward, montecarlo, pricing
from . import scenario as scn
from .errors import PreconditionError, ValidationError
from .scenario import Grid, Scenario

log = logging.getLogger("mrspot")

EXIT_OK, EXIT_INVALID, EXIT_PRECONDITION, EXIT_ORACLE = 0, 2, 3, 4
DEFAULT_T_MAX = 80.0
AVERAGE_STEPS = 64
AVERAGE_PATHS = 100_000


class OracleFailure(Exception):
    pass


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory and rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def _grid(s: Scenario, args, t_min: float) -> list[float]:
    if getattr(args, "grid", None):
        g = Grid.parse(args.grid)
    elif s.grid is not None:
        g = s.grid
    else:
        g = Grid(t_min, max(DEFAULT_T_MAX, s.option.T, t_min), 1.0)
    return g.values()


def curve_rows(s: Scenario, grid: Sequence[float]):
    return forward.forward_curve(s.model, s.state, grid)


def vol_rows(s: Scenario, grid: Sequence[float]):
    return pricing.vol_table(s.model, s.state.t, s.option.tau, grid, s.selection)


def pricing_reports(s: Scenario, grid: Sequence[float]):
    return bounds.pricing_error_table(s.model, s.state, s.option, s.selection, grid)


def hedging_reports(s: Scenario, grid: Sequence[float]):
    return bounds.hedging_error_table(s.model, s.state, s.option, s.selection, grid)


def _json_rows(command: str, out, columns, rows) -> str:
    return json.dumps({"command": command, "out": out, "columns": columns, "rows": rows}) + "\n"


def cmd_curve(s: Scenario, args) -> int:
    quotes = curve_rows(s, _grid(s, args, s.state.t))
    text = forward.curve_to_csv(quotes)
    _emit(text, args.out)
    if args.json:
        rows = [[q.T, q.price, q.deterministic_part] for q in quotes]
        sys.stdout.write(_json_rows("curve", args.out, ["T", "f", "h"], rows))
    return EXIT_OK


def cmd_vols(s: Scenario, args) -> int:
    rows = vol_rows(s, _grid(s, args, s.option.tau))
    _emit(pricing.vol_table_to_csv(rows), args.out)
    if args.json:
        sys.stdout.write(
            _json_rows("vols", args.out, ["T", "sigma_I", "sigma_J", "sigma_B"], [list(r) for r in rows])
        )
    return EXIT_OK


def _report_json(command, out, reports) -> str:
    rows = [[r.T, r.exact, r.lower, r.upper, r.relative] for r in reports]
    return _json_rows(command, out, ["T", "exact", "lower", "upper", "relative"], rows)


def cmd_error_bounds(s: Scenario, args) -> int:
    reports = pricing_reports(s, _grid(s, args, s.option.tau + 1.0))
    _emit(bounds.report_to_csv(reports), args.out)
    if args.json:
        sys.stdout.write(_report_json("error-bounds", args.out, reports))
    return EXIT_OK


def cmd_hedge_bounds(s: Scenario, args) -> int:
    reports = hedging_reports(s, _grid(s, args, s.option.tau + 1.0))
    _emit(bounds.report_to_csv(reports), args.out)
    if args.json:
        sys.stdout.write(_report_json("hedge-bounds", args.out, reports))
    return EXIT_OK


def _check(name: str, est: montecarlo.McEstimate, closed: float) -> dict:
    z = est.z_score(closed)
    return {
        "name": name,
        "estimate": {"mean": est.mean, "stderr": est.stderr, "ci95": list(est.ci95)},
        "closed_form": closed,
        "z_score": z if math.isfinite(z) else None,
        "pass": bool(math.isfinite(z) and abs(z) <= 3.0),
    }


def mc_check_report(s: Scenario, cfg: montecarlo.McConfig) -> dict:
    """Compare every Monte Carlo estimator against its closed form."""
    m, st, opt = s.model, s.state, s.option
    full = s.full
    checks = [
        _check("forward", montecarlo.mc_forward(m, st, opt.T, cfg), forward.forward_price(m, st, opt.T).price),
        _check("option_I", montecarlo.mc_option(m, st, opt, full, cfg), pricing.option_price(m, st, opt, full)),
        _check(
            "option_J",
            montecarlo.mc_option(m, st, opt, s.selection, cfg),
            pricing.option_price(m, st, opt, s.selection),
        ),
        _check(
            "z_variance_I",
            montecarlo.mc_log_return_variance(m, st, opt, full, cfg),
            pricing.total_vol(m, st.t, opt.tau, opt.T, full).variance,
        ),
    ]
    if opt.T > opt.tau:
        # delivery period [tau, 2T - tau] has midpoint T
        T1, T2 = opt.tau, 2.0 * opt.T - opt.tau
        avg_paths = min(cfg.paths, AVERAGE_PATHS)
        avg_cfg = replace(cfg, paths=avg_paths - avg_paths % 2 if cfg.antithetic else avg_paths)
        checks.append(
            _check(
                "average_forward",
                montecarlo.mc_average_forward(m, st, T1, T2, AVERAGE_STEPS, avg_cfg),
                forward.average_forward(m, st, T1, T2, s.quad_nodes),
            )
        )
    return {
        "seed": cfg.seed,
        "paths": cfg.paths,
        "antithetic": cfg.antithetic,
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }


def _mc_config(s: Scenario, args) -> montecarlo.McConfig:
    base = s.mc
    seed = args.seed if args.seed is not None else (base.seed if base else None)
    if seed is None:
        raise ValidationError("mc-check needs an explicit seed (--seed or mc.seed)")
    return montecarlo.McConfig(
        seed=seed,
        paths=args.paths if args.paths is not None else (base.paths if base else 1_000_000),
        antithetic=base.antithetic if base else True,
        chunks=args.chunks if args.chunks is not None else (base.chunks if base else None),
    )


def cmd_mc_check(s: Scenario, args) -> int:
    report = mc_check_report(s, _mc_config(s, args))
    text = json.dumps(report, indent=2) + "\n"
    _emit(text, args.out)
    if not report["pass"]:
        failed = [c["name"] for c in report["checks"] if not c["pass"]]
        raise OracleFailure(f"Monte Carlo disagrees with closed form for {', '.join(failed)}")
    return EXIT_OK


FIGURES = (
    "fig1_curve.csv",
    "fig2_vols.csv",
    "fig3_pricing_error.csv",
    "fig4_pricing_relative.csv",
    "fig5_hedge_error.csv",
    "fig6_hedge_relative.csv",
)


def _table(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def figure_tables(s: Scenario, args) -> dict[str, str]:
    curve = curve_rows(s, _grid(s, args, s.state.t))
    vols = vol_rows(s, _grid(s, args, s.option.tau))
    price = pricing_reports(s, _grid(s, args, s.option.tau + 1.0))
    hedge = hedging_reports(s, _grid(s, args, s.option.tau + 1.0))
    return {
        "fig1_curve.csv": forward.curve_to_csv(curve),
        "fig2_vols.csv": pricing.vol_table_to_csv(vols),
        "fig3_pricing_error.csv": _table(
            ["T", "exact", "lower", "upper"], [(r.T, r.exact, r.lower, r.upper) for r in price]
        ),
        "fig4_pricing_relative.csv": _table(["T", "relative"], [(r.T, r.relative) for r in price]),
        "fig5_hedge_error.csv": _table(
            ["T", "exact", "lower", "upper"], [(r.T, r.exact, r.lower, r.upper) for r in hedge]
        ),
        "fig6_hedge_relative.csv": _table(["T", "relative"], [(r.T, r.relative) for r in hedge]),
    }


def cmd_figures(s: Scenario, args) -> int:
    out_dir = Path(args.out or "figures")
    # compute everything first so a failure leaves no files behind
    tables = figure_tables(s, args)
    for name in FIGURES:
        write_atomic(out_dir / name, tables[name])
    if args.json:
        sys.stdout.write(json.dumps({"command": "figures", "out": str(out_dir), "files": list(FIGURES)}) + "\n")
    return EXIT_OK


COMMANDS = {
    "curve": cmd_curve,
    "vols": cmd_vols,
    "error-bounds": cmd_error_bounds,
    "hedge-bounds": cmd_hedge_bounds,
    "mc-check": cmd_mc_check,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrspot",
        description="Options on energy forwards under a multi-factor mean-reverting spot model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", help="JSON scenario file (defaults to the built-in example)")
        p.add_argument("--out", help="output file (directory for 'figures'); stdout if omitted")
        p.add_argument("--grid", help="delivery grid a:b[:step] in days")
        p.add_argument("--seed", type=int, help="RNG seed (mc-check)")
        p.add_argument("--paths", type=int, help="Monte Carlo paths (mc-check)")
        p.add_argument("--chunks", type=int, help="parallel chunks (mc-check); does not change results")
        p.add_argument("--json", action="store_true", help="also print a machine-readable report")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        s = scn.load(args.scenario)
        return COMMANDS[args.command](s, args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PreconditionError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OracleFailure as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE


if __name__ == "__main__":
    sys.exit(main())
