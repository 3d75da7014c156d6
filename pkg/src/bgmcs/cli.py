"""Command-line front end.

Examples::

    bgmcs scan --m 2 --j 0 --r 0..3:61 --theta 0,1.5708 --quantity hur -o hur.csv
    bgmcs period --m 2 --j 0 --r 1
    bgmcs coeffs --m 3 --j 2 --r 0 --format json

Values starting with ``-`` need the ``--flag=value`` form, e.g.
``--x=-5..5:201``.  A flat ``key = value`` config file may be given with ``--config``; flags on
the command line override its values.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import export
from .dynamics import DEFAULT_THRESHOLD, autocorrelation, estimate_period
from .fock_algebra import DEFAULT_N_CAP, ModelParams, WeightFunction
from .mcs_states import coherent_table
from .observables import ConsistencyError, mean_energy, observable_report, uncertainty_product
from .wavefunctions import OscillatorBasis, default_grid, density

COMMANDS = ("coeffs", "observables", "density", "evolve", "autocorr", "period", "scan")
DEFAULT_FORMAT = {"period": "json"}


def parse_grid(text: str) -> np.ndarray:
    """``a..b:n`` (inclusive linspace), ``a,b,c`` or a single number."""
    text = text.strip()
    try:
        if ".." in text:
            span, _, count = text.partition(":")
            lo, _, hi = span.partition("..")
            n = int(count) if count else 2
            if n < 1:
                raise ValueError
            return np.linspace(float(lo), float(hi), n)
        values = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use a..b:n, a,b,c or a number") from None
    if values.size == 0:
        raise argparse.ArgumentTypeError("empty grid")
    return values


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into argv tokens."""
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":" if ":" in line else None
            if sep is None:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition(sep)
            key = key.strip().replace("_", "-")
            value = value.strip()
            if key == "check":
                if value.lower() in ("1", "true", "yes", "on"):
                    tokens.append("--check")
                continue
            tokens += [f"--{key}", value]
    return tokens


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--m", type=int, default=2, help="multiphoton order m >= 1")
    g.add_argument("--j", type=int, default=0, help="sector index 0 <= j < m")
    g.add_argument("--r", type=parse_grid, default=np.array([1.0]), help="|alpha| (grid for scan)")
    g.add_argument("--theta", type=parse_grid, default=np.array([0.0]), help="arg(alpha) in radians")
    g.add_argument("--omega-c", type=float, default=1.0, help="cyclotron frequency")
    g.add_argument("--k", type=float, default=0.0, help="wavenumber along y")
    g.add_argument("--weight", default=None, help="'one' (f = 1) or 'table' (needs --f)")
    g.add_argument("--f", type=parse_floats, default=None, help="weight table f(1),f(2),...")
    g.add_argument("--tol", type=float, default=1e-14, help="truncation tolerance")
    g.add_argument("--n-cap", type=int, default=DEFAULT_N_CAP, help="highest allowed level")
    o = common.add_argument_group("output")
    o.add_argument("-o", "--output", default="-", help="output file ('-' for stdout)")
    o.add_argument("--format", choices=("csv", "json"), default=None)
    o.add_argument("--check", action="store_true", help="cross-check closed forms against the ladder oracle")
    common.add_argument("--config", default=None, help="flat key = value file")

    parser = argparse.ArgumentParser(prog="bgmcs", description="Bilayer graphene multiphoton coherent states")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coeffs", parents=[common], help="normalized coefficient table")
    sub.add_parser("observables", parents=[common], help="moments, HUR and mean energy")
    p = sub.add_parser("density", parents=[common], help="position density at one time")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--x", type=parse_grid, default=None, help="x grid (default: +-8 widths, 2001 points)")
    p.add_argument("--scale", type=float, default=None, help="oscillator exponent (default omega_c)")
    p = sub.add_parser("evolve", parents=[common], help="density over a time grid")
    p.add_argument("--t", type=parse_grid, default=np.linspace(0.0, 25.0, 101))
    p.add_argument("--x", type=parse_grid, default=None)
    p.add_argument("--scale", type=float, default=None)
    p = sub.add_parser("autocorr", parents=[common], help="auto-correlation C(t)")
    p.add_argument("--t", type=parse_grid, default=np.linspace(0.0, 25.0, 5001))
    p = sub.add_parser("period", parents=[common], help="spectral and auto-correlation periods")
    p.add_argument("--t", type=parse_grid, default=np.linspace(0.0, 25.0, 5001))
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p = sub.add_parser("scan", parents=[common], help="observables over an alpha grid")
    p.add_argument("--quantity", choices=("hur", "energy", "all"), default="all")
    return parser


def parse_args(argv: list[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and argv and argv[0] in COMMANDS:
        # file values first so later command-line flags win
        argv = [argv[0]] + read_config(known.config) + argv[1:]
    return build_parser().parse_args(argv)


def make_weight(args) -> WeightFunction:
    kind = args.weight or ("table" if args.f else "one")
    if kind in ("one", "constant-one"):
        if args.f:
            raise ValueError("--f given but --weight is 'one'")
        return WeightFunction.constant_one()
    if kind in ("table", "user-table"):
        if not args.f:
            raise ValueError("--weight table needs --f")
        return WeightFunction.from_values(args.f)
    raise ValueError(f"unknown weight {kind!r}; expected 'one' or 'table'")


def make_params(args, r: float, theta: float) -> ModelParams:
    return ModelParams.polar(
        args.m, args.j, r, theta, omega_c=args.omega_c, k=args.k,
        weight=make_weight(args), tol=args.tol, n_cap=args.n_cap,
    )


def single(values: np.ndarray, name: str) -> float:
    if values.size != 1:
        raise ValueError(f"--{name} must be a single value for this command")
    return float(values[0])


def _basis(args, table):
    return OscillatorBasis.for_params(table.params, scale=args.scale)


def _observables_row(table, quantity: str, check: bool) -> list:
    p = table.params
    head = [p.alpha.real, p.alpha.imag, p.m_order, p.j_index]
    if quantity == "hur":
        u = uncertainty_product(table, check)
        return head + [u.sigma_q, u.sigma_p, u.product]
    if quantity == "energy":
        return head + [mean_energy(table, check)]
    rep = observable_report(table, check)
    return head + [rep.sigma_q, rep.sigma_p, rep.product, rep.mean_energy]


SCAN_COLUMNS = {
    "hur": ["re", "im", "m", "j", "sigma_q", "sigma_p", "product"],
    "energy": ["re", "im", "m", "j", "mean_energy"],
    "all": ["re", "im", "m", "j", "sigma_q", "sigma_p", "product", "mean_energy"],
}


def thread_count() -> int:
    env = os.environ.get("MCS_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("MCS_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def run(args) -> str:
    """Execute one command and return the file contents."""
    fmt = args.format or DEFAULT_FORMAT.get(args.command, "csv")
    check = args.check

    if args.command == "scan":
        if np.any(args.r < 0):
            raise ValueError("r must be >= 0")
        points = [(r, th) for th in args.theta for r in args.r]

        def row(point):
            return _observables_row(coherent_table(make_params(args, *point)), args.quantity, check)

        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            rows = list(pool.map(row, points))
        columns = SCAN_COLUMNS[args.quantity]
        if fmt == "json":
            return export.json_text([dict(zip(columns, r)) for r in rows])
        base = make_params(args, 0.0, 0.0)
        return export.csv_text(columns, rows, export.params_meta(base, drop_alpha=True))

    params = make_params(args, single(args.r, "r"), single(args.theta, "theta"))
    table = coherent_table(params)

    if args.command == "coeffs":
        return export.table_json(table) if fmt == "json" else export.table_csv(table)

    if args.command == "observables":
        rep = observable_report(table, check)
        if fmt == "json":
            return export.json_text({"params": export.params_meta(params), **rep.to_dict()})
        cols = ["re", "im", "m", "j", "mean_S0", "mean_S1", "mean_S2_0", "mean_S2_1",
                "sigma_q", "sigma_p", "product", "mean_energy"]
        row = [params.alpha.real, params.alpha.imag, params.m_order, params.j_index,
               *rep.mean_S, *rep.mean_S2, rep.sigma_q, rep.sigma_p, rep.product, rep.mean_energy]
        return export.csv_text(cols, [row], export.params_meta(params))

    if args.command == "density":
        basis = _basis(args, table)
        grid = density(table, basis, args.x, args.t)
        return export.density_json(grid) if fmt == "json" else export.density_csv(grid)

    if args.command == "evolve":
        basis = _basis(args, table)
        xs = default_grid(table, basis) if args.x is None else args.x
        grids = [density(table, basis, xs, t) for t in args.t]
        if fmt == "json":
            meta = grids[0].metadata()
            meta.pop("t")
            return export.json_text({"metadata": meta, "t": args.t.tolist(), "x": xs.tolist(),
                                     "rho": [g.rho.tolist() for g in grids]})
        rows = ((g.t, x, rho) for g in grids for x, rho in zip(g.xs, g.rho))
        return export.csv_text(["t", "x", "rho"], rows, export.params_meta(params))

    if args.command == "autocorr":
        series = autocorrelation(table, args.t)
        return export.autocorr_json(series) if fmt == "json" else export.autocorr_csv(series)

    if args.command == "period":
        est = estimate_period(table, args.t, args.threshold)
        return export.period_json(est, params) if fmt == "json" else export.period_csv(est, params)

    raise ValueError(f"unknown command {args.command!r}")


def write_output(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except (OSError, ValueError) as exc:
        print(f"bgmcs: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        # argparse has already printed usage or help
        return exc.code if isinstance(exc.code, int) else 2
    try:
        text = run(args)
        write_output(args.output, text)
    except (ValueError, RuntimeError, ConsistencyError, OSError) as exc:
        print(f"bgmcs: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
