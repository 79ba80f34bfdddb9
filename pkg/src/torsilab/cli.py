"""Command-line interface.

Subcommands: solve (single rigidity), flow (series), certify (series +
envelopes + verdicts), sweep (convergence study), check-identities
(first-variation residual table).  Exit codes: 0 success, 2 config error,
3 numeric/solver error, 4 theorem-verdict violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import (
    BlowUpError,
    ConfigError,
    NumericError,
    RangeError,
    SolverError,
    TorsilabError,
    UsageError,
)
from .runner import (
    _atomic_write,
    _fmt,
    check_identities,
    convergence_sweep,
    run,
    validate_config,
    write_report,
)

log = logging.getLogger("torsilab")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERDICT = 4


def _setup_logging():
    level = os.environ.get("TORSILAB_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s %(levelname)s %(message)s")


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as e:
        raise ConfigError(str(e), "$") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e}", "$") from e


def _output_paths(config, args):
    out = config.get("outputs", {})
    return args.out_csv or out.get("csv"), args.out_json or out.get("json")


def _cmd_solve(args) -> int:
    config = _load_config(args.config)
    config.setdefault("flow", {}).setdefault("t_grid", [0.0])
    config["flow"]["t_grid"] = [0.0]
    report = run(validate_config(config), threads=args.threads)
    csv_path, json_path = _output_paths(config, args)
    write_report(report, csv_path, json_path)
    s = report.series
    print(
        f"T={_fmt(s.T[0])} V={_fmt(s.V[0])} T_energy={_fmt(report.T_energy[0])} "
        f"residual={_fmt(report.residuals[0])}"
    )
    return EXIT_OK


def _cmd_flow(args) -> int:
    report = run(validate_config(_load_config(args.config)), threads=args.threads)
    csv_path, json_path = _output_paths(report.provenance["config"], args)
    write_report(report, csv_path, json_path)
    for i, t in enumerate(report.series.t):
        print(f"t={t:g} T={_fmt(report.series.T[i])} V={_fmt(report.series.V[i])}")
    return EXIT_OK


def _cmd_certify(args) -> int:
    report = run(validate_config(_load_config(args.config)), threads=args.threads)
    csv_path, json_path = _output_paths(report.provenance["config"], args)
    write_report(report, csv_path, json_path)
    for v in report.verdicts:
        if v.passed is None:
            continue
        status = "PASS" if v.passed else "FAIL"
        print(f"{v.functional} {v.direction}: {status} (worst violation {v.worst_violation:.3e})")
    if not report.passed:
        log.error("a certified monotonicity verdict failed")
        return EXIT_VERDICT
    return EXIT_OK


def _cmd_sweep(args) -> int:
    report = convergence_sweep(validate_config(_load_config(args.config)), args.levels, threads=args.threads)
    for lvl, h, T in zip(report.levels, report.h, report.T):
        print(f"level={lvl} h={h:g} T={_fmt(T)}")
    orders = " ".join(f"{p:.3f}" for p in report.observed_orders)
    print(f"observed orders: {orders}")
    print(f"extrapolated T: {_fmt(report.T_extrapolated)}")
    if args.out_json:
        obj = {
            "levels": report.levels,
            "h": report.h,
            "T": report.T,
            "observed_orders": report.observed_orders,
            "T_extrapolated": report.T_extrapolated,
            "provenance": report.provenance,
        }
        _atomic_write(args.out_json, json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _cmd_check_identities(args) -> int:
    rows = check_identities(validate_config(_load_config(args.config)), seed=args.seed)
    print("t,h,vol_rate,grad_rate,field_rate,div_rate")
    lines = ["t,h,vol_rate,grad_rate,field_rate,div_rate"]
    for r in rows:
        line = ",".join(_fmt(r[k]) for k in ("t", "h", "vol_rate", "grad_rate", "field_rate", "div_rate"))
        print(line)
        lines.append(line)
    if args.out_csv:
        _atomic_write(args.out_csv, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="torsilab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("solve", _cmd_solve),
        ("flow", _cmd_flow),
        ("certify", _cmd_certify),
        ("sweep", _cmd_sweep),
        ("check-identities", _cmd_check_identities),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out-csv", default=None, help="CSV report path (overrides config)")
        p.add_argument("--out-json", default=None, help="JSON report path (overrides config)")
        p.add_argument("--threads", type=int, default=1, help="concurrent time samples")
        p.add_argument("--seed", type=int, default=0, help="seed for identity-check sampling")
        p.set_defaults(fn=fn)
        if name == "sweep":
            p.add_argument("--levels", type=int, default=3, help="number of refinement levels")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, NumericError, BlowUpError, RangeError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except TorsilabError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
