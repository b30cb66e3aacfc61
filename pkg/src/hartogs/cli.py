"""Command-line front-end.

``hartogs run``
    Execute one task from a JSON config and write ``OUT`` (CSV) plus
    ``OUT.json`` (resolved config, versions, seed, per-row errors,
    verdicts).  Passing a sidecar back as ``--config`` repeats the run.
``hartogs kernel``
    Print kernel quantities for one pair of points as JSON.
``hartogs schema``
    Print the JSON schema of run configs.

Exit status: 0 success, 2 inconclusive verdict, 1 error or failed check.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np
import pydantic
import scipy
from pydantic import ValidationError

from . import __version__
from .config import TASKS, RunConfig, run_config_schema
from .exceptions import DomainError
from .kernels import (
    HartogsPoint,
    bergman_kernel,
    kernel_diag,
    p_kernel,
    r_factor,
    skwarczynski_distance,
)
from .tasks import COLUMNS, run_task


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return "%.17g" % x


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return str(v)


def dumps17(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if not any(isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps17(v) for v in obj) + "]"
        items = [f"{pad}{dumps17(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj)) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def versions() -> dict:
    return {
        "hartogs": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": pydantic.VERSION,
    }


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_cell(v) for v in row])


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _columns_help() -> str:
    return "CSV columns per task:\n" + "\n".join(
        f"  {t}: {','.join(cols)}" for t, cols in COLUMNS.items()
    )


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hartogs", description="Kernel, transform and Carleson diagnostics on Hartogs triangles.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser(
        "run",
        help="run a task from a JSON config",
        epilog=_columns_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run.add_argument("--config", type=Path, help="JSON config (or a sidecar from an earlier run)")
    run.add_argument("--out", type=Path, help="CSV output path; the sidecar is OUT.json")
    run.add_argument("--task", choices=TASKS)
    run.add_argument("--k", type=int)
    run.add_argument("--delta", type=float, help="single delta for vanishing profiles")
    run.add_argument("--jmax", type=int, help="j_max for repro:weak-limit")
    run.add_argument("--seed", type=int)

    ker = sub.add_parser("kernel", help="evaluate kernel quantities at one pair of points")
    ker.add_argument("--k", type=int, required=True)
    ker.add_argument("--z", nargs=2, required=True, metavar="RE,IM", help="z1 z2 as re,im pairs")
    ker.add_argument("--w", nargs=2, required=True, metavar="RE,IM", help="w1 w2 as re,im pairs")

    sub.add_parser("schema", help="print the run-config JSON schema")
    return p


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 're,im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def _load_config(args) -> RunConfig:
    raw: dict = {}
    if args.config is not None:
        raw = json.loads(args.config.read_text(encoding="utf-8"))
        if isinstance(raw, dict) and "config" in raw and "versions" in raw:
            raw = raw["config"]
    if args.task is not None:
        raw["task"] = args.task
    if args.k is not None:
        raw["k"] = args.k
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = str(args.out)
    params = dict(raw.get("params", {}))
    if args.delta is not None:
        if raw.get("task") == "vanishing-profile":
            params["deltas"] = [args.delta]
        elif raw.get("task") == "carleson-check":
            van = dict(params.get("vanishing") or {})
            van["deltas"] = [args.delta]
            params["vanishing"] = van
        else:
            raise ValueError("--delta applies to vanishing-profile and carleson-check")
    if args.jmax is not None:
        if raw.get("task") != "repro:weak-limit":
            raise ValueError("--jmax applies to repro:weak-limit")
        params["j_max"] = args.jmax
    raw["params"] = params
    if "task" not in raw:
        raise ValueError("no task given: use --task or a config with 'task'")
    return RunConfig.model_validate(raw)


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for e in exc.errors():
        loc = ".".join(str(x) for x in e["loc"]) or "<config>"
        lines.append(f"config error at '{loc}': {e['msg']}")
    return "\n".join(lines)


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args)
    except ValidationError as exc:
        print(_format_validation(exc), file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg.out is None:
        print("error: no output path: use --out or set 'out' in the config", file=sys.stderr)
        return 1
    try:
        outcome = run_task(cfg)
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = Path(cfg.out)
    write_csv(out, outcome.columns, outcome.rows)
    err_col = outcome.columns.index("err") if "err" in outcome.columns else None
    row_errors = [
        {"row": i, "err": r[err_col]} for i, r in enumerate(outcome.rows) if err_col is not None and r[err_col]
    ]
    sidecar = {
        "config": cfg.resolved(),
        "versions": versions(),
        "seed": cfg.seed,
        "columns": outcome.columns,
        "n_rows": len(outcome.rows),
        "row_errors": row_errors,
        "summary": outcome.summary,
        "status": outcome.status,
        "exit_code": outcome.exit_code,
    }
    Path(str(out) + ".json").write_text(dumps17(sidecar) + "\n", encoding="utf-8")
    print(f"{cfg.task}: {outcome.status}; wrote {out} ({len(outcome.rows)} rows)")
    return outcome.exit_code


def _pair(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def cmd_kernel(args) -> int:
    try:
        z = HartogsPoint(*(_parse_complex(v) for v in args.z))
        w = HartogsPoint(*(_parse_complex(v) for v in args.w))
        k = args.k
        kz = bergman_kernel(k, z, w)
        rec = {
            "k": k,
            "z": [[z.z1.real, z.z1.imag], [z.z2.real, z.z2.imag]],
            "w": [[w.z1.real, w.z1.imag], [w.z2.real, w.z2.imag]],
            "K": _pair(kz),
            "P": _pair(p_kernel(k, z, w)),
            "R": _pair(r_factor(k, z, w)),
            "d_S": float(skwarczynski_distance(k, z, w)),
            "K_zz": float(kernel_diag(k, z)),
            "K_ww": float(kernel_diag(k, w)),
        }
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(dumps17(rec))
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(run_config_schema(), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "kernel": cmd_kernel, "schema": cmd_schema}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
