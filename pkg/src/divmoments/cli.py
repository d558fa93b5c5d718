"""Command-line front end: ``divmoments <command> [flags]``.

Every command produces a table (columns + rows) written as CSV, JSON or a
gnuplot data file.  A plain ``key = value`` file given by ``--config`` supplies
defaults for the command's flags; flags on the command line win.

Exit codes: 0 success, 2 usage, 3 resource budget, 4 cache integrity.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ChecksumError, InvalidArgument, ResourceError

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_CACHE = 0, 2, 3, 4
COMMANDS = ("sieve", "delta", "moment", "series", "count", "expsum", "bump", "report")
REPORT_KINDS = ("voronoi", "gap", "fractional", "coefficients", "tail")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    cache_dir: str = ""
    output: str | None = None
    format: str = "csv"
    threads: int = 1
    seed: int = 0


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    note: str = ""


def default_cache_dir() -> str:
    env = os.environ.get("DIVMOMENTS_CACHE_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "divmoments")


def _floats(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _ints(s: str) -> list[int]:
    try:
        return [int(float(v)) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _int(s: str) -> int:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v != int(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}")
    return int(v)


def _signs(s: str) -> list[int]:
    if s and set(s) <= {"+", "-"}:
        return [1 if c == "+" else -1 for c in s]
    try:
        return [int(v) for v in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"signs must look like '++-' or '1,1,-1', got {s!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _global_options(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="key = value file with defaults for the command's flags")
    p.add_argument("--output", "-o", default=d(None), help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json", "gnuplot"), default=d("csv"))
    p.add_argument("--cache-dir", default=d(None), help="cache directory (env DIVMOMENTS_CACHE_DIR)")
    p.add_argument("--threads", type=int, default=d(1))
    p.add_argument("--seed", type=int, default=d(0))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="divmoments", description="Divisor-problem moments, series and counting checks.")
    _global_options(p, suppress=False)
    # global options are accepted after the command name as well
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("sieve", parents=[common], help="sieve d(n) up to X, cached on disk")
    s.add_argument("--X", type=_int, required=True)
    s.add_argument("--block", type=_int, default=1 << 15)
    s.add_argument("--no-cache", action="store_true")

    s = sub.add_parser("delta", parents=[common], help="Delta(x) at given points")
    s.add_argument("--x", type=_floats, required=True)

    s = sub.add_parser("moment", parents=[common], help="integral of Delta**k over [T0, T] with main term")
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--grid", type=_floats, default=[1e4, 1e5, 1e6])
    s.add_argument("--y", type=_int, default=256)
    s.add_argument("--quad-order", type=_int, default=8)
    s.add_argument("--T0", type=float, default=2.0)
    s.add_argument("--absolute", action="store_true", help="integrate |Delta|**k instead")
    s.add_argument("--allow-large", action="store_true", help="permit grid points above 1e6")

    s = sub.add_parser("series", parents=[common], help="truncated singular series s_{k;l}(d; y)")
    s.add_argument("--k", type=_int, required=True)
    s.add_argument("--l", type=_int, required=True)
    s.add_argument("--y", type=_int, required=True)
    s.add_argument("--method", choices=("auto", "enumerate", "kernel"), default="enumerate")

    s = sub.add_parser("count", parents=[common], help="exact count of small signed square-root sums in a dyadic box")
    s.add_argument("--Ns", type=_ints, required=True)
    s.add_argument("--signs", type=_signs, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--include-zero", action="store_true")

    s = sub.add_parser("expsum", parents=[common], help="moments of S(x; N) against their bounds")
    s.add_argument("--N", type=_ints, default=[64, 256, 1024])
    s.add_argument("--power", type=_int, choices=(2, 7), default=2)
    s.add_argument("--U", type=float, default=None)
    s.add_argument("--quad-order", type=_int, default=8)

    s = sub.add_parser("bump", parents=[common], help="smoothing bump: bound check or profile")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--smooth", type=_int, required=True)
    s.add_argument("--check-grid", default="log:1e-3:1e6:200")
    s.add_argument("--profile", action="store_true", help="emit (y, phi(y)) instead")

    s = sub.add_parser("report", parents=[common], help="auxiliary reports")
    s.add_argument("--kind", choices=REPORT_KINDS, required=True)
    s.add_argument("--T", type=float, default=1e4)
    s.add_argument("--N", type=_ints, default=[16, 64, 256])
    s.add_argument("--samples", type=_int, default=4096)
    s.add_argument("--k", type=_int, default=3)
    s.add_argument("--l", type=_int, default=1)
    s.add_argument("--signs", type=_signs, default=None)
    s.add_argument("--Nmax", type=_ints, default=[10, 20, 40, 80, 160])
    s.add_argument("--alpha", type=float, default=math.sqrt(2.0))
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--K", type=_int, default=1000)
    s.add_argument("--delta", type=float, default=0.05)
    s.add_argument("--y", type=_ints, default=[16, 32, 64])
    return p


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise UsageError(f"unknown command {command!r}")


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and '#' comments are ignored."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(parser, command: str, path) -> None:
    cfg = read_config(path)
    sub = _subparser(parser, command)
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    top = {"output", "format", "cache_dir", "threads", "seed"}
    defaults = {}
    for key, value in cfg.items():
        if key in top:
            defaults[key] = int(value) if key in ("threads", "seed") else value
            continue
        if key not in actions or key == "config":
            raise UsageError(f"unknown config key {key!r} for command {command}")
        a = actions[key]
        if isinstance(a, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            try:
                defaults[key] = a.type(value) if a.type else value
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config key {key}: {exc}") from None
            if a.choices is not None and defaults[key] not in a.choices:
                raise UsageError(f"config key {key}: {value!r} not in {list(a.choices)}")
        a.required = False
    sub.set_defaults(**defaults)
    parser.set_defaults(**{k: v for k, v in defaults.items() if k in top})


def parse_run_config(argv) -> RunConfig:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config:
        if command is None:
            raise UsageError("--config needs a command")
        _apply_config(parser, command, known.config)
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    params = {k: v for k, v in vars(ns).items()
              if k not in ("config", "output", "format", "cache_dir", "threads", "seed", "command")}
    if ns.threads < 1:
        raise UsageError("--threads must be >= 1")
    return RunConfig(command=ns.command, parameters=params,
                     cache_dir=ns.cache_dir or default_cache_dir(), output=ns.output,
                     format=ns.format, threads=ns.threads, seed=ns.seed)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def render(table: Table, fmt: str, command: str) -> str:
    buf = io.StringIO()
    if fmt == "json":
        doc = {"schema": 1, "command": command, "columns": table.columns,
               "rows": [[_jsonable(v) for v in r] for r in table.rows]}
        if table.note:
            doc["note"] = table.note
        json.dump(doc, buf, indent=1, sort_keys=True)
        buf.write("\n")
    elif fmt == "csv":
        buf.write(f"# {command}: columns " + ", ".join(table.columns) + "\n")
        if table.note:
            buf.write(f"# {table.note}\n")
        buf.write(",".join(table.columns) + "\n")
        for r in table.rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
    else:
        buf.write("# " + " ".join(table.columns) + "\n")
        if table.note:
            buf.write(f"# {table.note}\n")
        for r in table.rows:
            buf.write(" ".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def _write(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _cmd_sieve(cfg: RunConfig, p) -> Table:
    from .divisor_core import load_table, save_table, sieve_divisor_table
    X, block = p["X"], p["block"]
    table = None
    path = None
    if not p["no_cache"]:
        os.makedirs(cfg.cache_dir, exist_ok=True)
        key = hashlib.sha256(f"ddt1:{X}:{block}".encode()).hexdigest()[:16]
        path = os.path.join(cfg.cache_dir, f"divisors-{X}-{key}.ddt")
        if os.path.exists(path):
            table = load_table(path)
    if table is None:
        table = sieve_divisor_table(X, block, cfg.threads)
        if path:
            save_table(table, path)
    v = table.values
    digest = hashlib.sha256(np.ascontiguousarray(v, dtype="<u4").tobytes()).hexdigest()[:16]
    return Table(["X", "D_X", "max_d", "argmax_d", "sha256_prefix"],
                 [[X, table.total(), int(v.max()), int(v.argmax()), digest]])


def _cmd_delta(cfg, p) -> Table:
    from .divisor_core import delta_at
    rows = []
    for x in p["x"]:
        s = delta_at(x)
        rows.append([s.x, s.D, s.delta])
    return Table(["x", "D", "delta"], rows)


def _cmd_moment(cfg, p) -> Table:
    from .moments import moment_report
    grid = p["grid"]
    if max(grid) > 1e6 and not p["allow_large"]:
        raise InvalidArgument("grid points above 1e6 need --allow-large")
    k = p["k"]
    signed = not p["absolute"]
    res = moment_report(int(k) if signed else k, grid, p["y"], p["quad_order"], signed, p["T0"])
    rows = [[r.k_or_A, int(r.signed), r.T0, r.T1, r.empirical, r.predicted, r.ratio, r.slope] for r in res]
    return Table(["k", "signed", "T0", "T", "empirical", "predicted", "ratio", "slope"], rows)


def _cmd_series(cfg, p) -> Table:
    from .singular_series import series_partial
    cache = cfg.cache_dir if p["method"] == "enumerate" else None
    v = series_partial(None, p["k"], p["l"], p["y"], p["method"], cache_dir=cache)
    return Table(["k", "l", "y", "value", "n_solutions", "tail_bound", "method"],
                 [[v.k, v.l, v.y, v.value, v.n_solutions, v.tail_bound, v.method]])


def _cmd_count(cfg, p) -> Table:
    from .dio_count import DyadicBox, count_solutions
    box = DyadicBox(tuple(p["Ns"]), tuple(p["signs"]))
    r = count_solutions(box, p["delta"], exclude_zero=not p["include_zero"])
    return Table(["lemma_id", "box", "delta", "count", "bound", "ratio"],
                 [[r.lemma_id, box.spec(), p["delta"], r.count, r.bound, r.ratio]])


def _cmd_expsum(cfg, p) -> Table:
    from .expsum_smoothing import mean_square_S, seventh_moment_S
    rows = []
    for N in p["N"]:
        r = mean_square_S(N, p["quad_order"]) if p["power"] == 2 else seventh_moment_S(N, p["U"], p["quad_order"])
        rows.append([r.N, r.U, r.integral, r.bound, r.ratio])
    return Table(["N", "U", "integral", "bound", "ratio"], rows)


def _cmd_bump(cfg, p) -> Table:
    from .expsum_smoothing import BumpConfig, build_bump, check_bound, parse_grid
    bump = build_bump(BumpConfig(p["a"], p["delta"], p["smooth"]))
    if p["profile"]:
        ys = np.linspace(-1.25 * bump.support, 1.25 * bump.support, 201)
        return Table(["y", "phi"], [[y, v] for y, v in zip(ys.tolist(), bump.phi(ys).tolist())])
    chk = check_bound(bump, parse_grid(p["check_grid"]))
    rows = [[x, v, b, int(br), int(v <= b * (1 + 1e-12))]
            for x, v, b, br in zip(chk.xs.tolist(), chk.values.tolist(), chk.bounds.tolist(), chk.branch.tolist())]
    return Table(["x", "abs_Phi", "bound", "branch", "ok"], rows, note=f"violations {chk.violations}")


def _cmd_report(cfg, p) -> Table:
    kind = p["kind"]
    if kind == "voronoi":
        from .voronoi_series import TruncationConfig, mean_square_R2
        seed = cfg.seed if cfg.seed else None
        rows = []
        for N in p["N"]:
            est, ratio = mean_square_R2(p["T"], TruncationConfig.build(N), p["samples"], seed)
            rows.append([p["T"], N, est, ratio])
        return Table(["T", "N", "mean_square", "normalized_ratio"], rows)
    if kind == "gap":
        from .dio_count import min_nonzero_gap
        signs = p["signs"] or [1] + [-1] * (p["k"] - 1)
        rows = []
        for Nmax in p["Nmax"]:
            g = min_nonzero_gap(len(signs), signs, Nmax)
            rows.append([len(signs), Nmax, g.gap, " ".join(map(str, g.witness)), g.scaled])
        return Table(["k", "Nmax", "gap", "witness", "scaled_gap"], rows)
    if kind == "fractional":
        from .dio_count import fractional_count
        r = fractional_count(p["alpha"], p["beta"], p["K"], p["delta"])
        return Table(["lemma_id", "alpha", "beta", "K", "delta", "count", "bound", "ratio"],
                     [[4, p["alpha"], p["beta"], p["K"], p["delta"], r.count, r.bound, r.ratio]])
    if kind == "coefficients":
        from .singular_series import coefficient_Ck
        rows = [[2, 0, coefficient_Ck(2)]]
        for y in p["y"]:
            for k in (3, 4, 7):
                rows.append([k, y, coefficient_Ck(k, y)])
        return Table(["k", "y", "C_k"], rows)
    from .singular_series import tail_differences
    rows = [[p["k"], p["l"], y, d, s] for y, d, s in tail_differences(p["k"], p["l"], p["y"])]
    return Table(["k", "l", "y", "abs_diff", "scaled_diff"], rows)


_HANDLERS = {"sieve": _cmd_sieve, "delta": _cmd_delta, "moment": _cmd_moment, "series": _cmd_series,
             "count": _cmd_count, "expsum": _cmd_expsum, "bump": _cmd_bump, "report": _cmd_report}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        table = _HANDLERS[config.command](config, config.parameters)
        _write(render(table, config.format, config.command), config.output)
    except (InvalidArgument, UsageError) as exc:
        print(f"divmoments: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"divmoments: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ChecksumError as exc:
        print(f"divmoments: cache integrity: {exc}", file=sys.stderr)
        return EXIT_CACHE
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_run_config(argv)
    except UsageError as exc:
        print(f"divmoments: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"divmoments: usage error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
