"""Command-line front end: ``nfresolvent <eig|solve|table|figure|det|residual> ...``.

Every flag can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment); flags given on the command line win. Errors are
reported as one line ``error[CODE]: message`` with exit status 2 (parse or
usage), 3 (asymmetric kernel), 4 (eigenvalue hit), 5 (I/O) or 1 (other).
"""

from __future__ import annotations

import argparse
import contextlib
import io
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import benchmark, detseries
from .errors import (
    AsymmetricKernelError,
    EigenvalueHitError,
    ExprError,
    ResolventError,
)
from .kernel import SCHEMES, GridFunction, Kernel, build_iterated
from .quadrature import DEFAULT_NODES, gauss_legendre
from .resolvent import MixedSeriesParams, MixedSolver, resolvent_defect
from .spectral import eigendecompose

__all__ = ["main", "RunConfig", "build_parser", "load_config", "format_float"]

EXIT_OTHER = 1
EXIT_USAGE = 2
EXIT_IO = 5


class UsageError(Exception):
    exit_code = EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # single-line errors instead of usage dumps
        raise UsageError(message)


def format_float(v: float) -> str:
    return "%.17g" % v


@dataclass
class RunConfig:
    kernel: str = "min"
    rhs: str = "x"
    interval: tuple = (0.0, 1.0)
    nodes: int = DEFAULT_NODES
    m: int = 1
    n_fourier: int = 6
    lam: Optional[float] = None
    alpha: Optional[float] = None
    scheme: str = "product"
    method: str = "jacobi"
    output: Optional[str] = None
    format: str = "text"

    def validate(self) -> None:
        a, b = self.interval
        if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
            raise UsageError(f"interval needs a < b, got [{a}, {b}]")
        if self.nodes < 8:
            raise UsageError(f"nodes must be >= 8, got {self.nodes}")
        if self.m < 0:
            raise UsageError(f"m must be >= 0, got {self.m}")
        if self.n_fourier < 1:
            raise UsageError(f"n-fourier must be >= 1, got {self.n_fourier}")


# -- parser -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--kernel", default="min", help="builtin name or expression in x, t")
    p.add_argument("--rhs", default="x", help="right-hand side f(x)")
    p.add_argument("--interval", nargs=2, type=float, default=[0.0, 1.0], metavar=("A", "B"))
    p.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    p.add_argument("--scheme", choices=SCHEMES, default="product")
    p.add_argument("--method", choices=("jacobi", "lapack"), default="jacobi")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nfresolvent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("eig", help="characteristic values and eigen-residuals")
    _common(p)
    p.add_argument("--count", type=int, default=10)

    p = sub.add_parser("solve", help="solution y(x) on a uniform grid")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n-fourier", dest="n_fourier", type=int, default=6)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--grid", type=int, default=101)

    p = sub.add_parser("table", help="errors at x = 1 for the min(x,t) example")
    _common(p)
    p.add_argument("--formula", choices=benchmark.FORMULAS, default=None)
    p.add_argument("--source", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--lambda", dest="lam", type=float, nargs="+",
                   default=list(benchmark.TABLE_LAMBDAS))

    p = sub.add_parser("figure", help="error curves for the min(x,t) example")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=4.0)
    p.add_argument("--n-list", dest="n_list", type=int, nargs="+", default=[4, 5, 6])
    p.add_argument("--grid", type=int, default=201)

    p = sub.add_parser("det", help="Fredholm determinant coefficients")
    _common(p)
    p.add_argument("--order", type=int, default=detseries.DEFAULT_ORDER)
    p.add_argument("--lambda", dest="lam", type=float, nargs="*", default=[])
    p.add_argument("--check-eigen", dest="check_eigen", type=int, default=None, metavar="N")

    p = sub.add_parser("residual", help="resolvent identity defect")
    _common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=4.0)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n-fourier", dest="n_fourier", type=int, default=6)
    p.add_argument("--x", type=float, default=0.5)
    p.add_argument("--t", type=float, default=0.3)
    return parser


# -- config file ------------------------------------------------------------


def load_config(path: str) -> dict:
    """Parse ``key = value`` lines; keys may use ``-`` or ``_``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read config {path!r}: {exc.strerror or exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(sub: argparse.ArgumentParser, cfg: dict, path: str) -> None:
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    aliases = {"lambda": "lam"}
    defaults = {}
    for key, raw in cfg.items():
        dest = aliases.get(key, key)
        action = actions.get(dest)
        if action is None:
            raise UsageError(f"{path}: unknown key {key!r} for this command")
        convert = action.type or str
        try:
            if action.nargs in ("+", "*") or isinstance(action.nargs, int):
                value = [convert(v) for v in raw.replace(",", " ").split()]
            else:
                value = convert(raw)
        except ValueError:
            raise UsageError(f"{path}: bad value {raw!r} for {key!r}") from None
        if action.choices is not None:
            vals = value if isinstance(value, list) else [value]
            bad = [v for v in vals if v not in action.choices]
            if bad:
                raise UsageError(f"{path}: invalid choice {bad[0]!r} for {key!r}")
        defaults[dest] = value
    sub.set_defaults(**defaults)


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = load_config(args.config)
        _apply_config(_subparser(parser, args.command), cfg, args.config)
        args = parser.parse_args(argv)
    return args


def _run_config(args) -> RunConfig:
    cfg = RunConfig(
        kernel=args.kernel,
        rhs=args.rhs,
        interval=tuple(args.interval),
        nodes=args.nodes,
        m=getattr(args, "m", 1),
        n_fourier=getattr(args, "n_fourier", 6),
        lam=getattr(args, "lam", None),
        alpha=getattr(args, "alpha", None),
        scheme=args.scheme,
        method=args.method,
        output=args.output,
        format=args.format,
    )
    cfg.validate()
    return cfg


# -- output -----------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def render(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    cells = [[_cell(v) for v in row] for row in rows]
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(r) for r in cells]
    else:
        widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths)).rstrip()]
        lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


def _emit(text: str, cfg: RunConfig, out) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


# -- commands ---------------------------------------------------------------


def _setup(cfg: RunConfig):
    a, b = cfg.interval
    kernel = Kernel.resolve(cfg.kernel, a, b)
    rule = gauss_legendre(cfg.nodes, a, b)
    return kernel, rule


def cmd_eig(args, cfg: RunConfig):
    kernel, rule = _setup(cfg)
    kernel.require_symmetric()
    with _quiet_warnings():
        spec = eigendecompose(kernel, rule, args.count, cfg.scheme, cfg.method)
    rows = [(k + 1, spec.lambdas[k], spec.residuals[k]) for k in range(spec.count)]
    note = None
    if spec.short:
        note = f"only {spec.count} eigenpairs retained, {args.count} requested"
    return ("k", "lambda", "residual"), rows, note


def _spectrum_and_stack(cfg: RunConfig, kernel, rule, depth: int):
    kernel.require_symmetric()
    stack = build_iterated(kernel, rule, max(depth, 1), cfg.scheme)
    with _quiet_warnings():
        spec = eigendecompose(kernel, rule, rule.n, cfg.scheme, cfg.method, matrix=stack.matrix(1))
    return stack, spec


def cmd_solve(args, cfg: RunConfig):
    if args.grid < 2:
        raise UsageError(f"grid must be >= 2, got {args.grid}")
    kernel, rule = _setup(cfg)
    f = GridFunction.from_expression(rule, cfg.rhs)
    stack, spec = _spectrum_and_stack(cfg, kernel, rule, cfg.m)
    alphas = () if cfg.alpha is None else (cfg.alpha,)
    params = MixedSeriesParams(cfg.lam, cfg.m, cfg.n_fourier, alphas)
    solver = MixedSolver(stack, spec, f, cfg.m, cfg.n_fourier)
    x = np.linspace(rule.a, rule.b, args.grid)
    y = solver.solve(params, x)
    return ("x", "y"), list(zip(x, y)), None


def cmd_table(args, cfg: RunConfig):
    ms = benchmark.TABLE_M if args.formula is None else (benchmark.FORMULAS.index(args.formula),)
    lams = tuple(args.lam)
    if args.source == "analytic":
        errors = benchmark.table1(ms, benchmark.TABLE_N, lams)
    else:
        example = benchmark.NumericExample(cfg.nodes, scheme=cfg.scheme, method=cfg.method)
        errors = benchmark.numeric_table1(example, ms, benchmark.TABLE_N, lams)
    rows = benchmark.table1_rows(errors, ms, benchmark.TABLE_N, lams)
    return ("formula", "m", "n_fourier", "lambda", "abs_error"), rows, None


def cmd_figure(args, cfg: RunConfig):
    if args.grid < 2:
        raise UsageError(f"grid must be >= 2, got {args.grid}")
    data = benchmark.figure1(args.lam, tuple(args.n_list), args.grid)
    header = ["x"] + [f"err_m{m}_n{n}" for m in (0, 1) for n in args.n_list]
    rows = list(zip(*(data[h] for h in header)))
    return tuple(header), rows, None


def cmd_det(args, cfg: RunConfig):
    if args.order < 0:
        raise UsageError(f"order must be >= 0, got {args.order}")
    kernel, rule = _setup(cfg)
    coeffs = detseries.compute_coefficients(kernel, rule, args.order, cfg.scheme)
    header = ["quantity", "arg", "value"]
    eig = None
    if args.check_eigen is not None:
        kernel.require_symmetric()
        with _quiet_warnings():
            spec = eigendecompose(kernel, rule, args.check_eigen, cfg.scheme, cfg.method)
        if spec.count < args.check_eigen:
            raise UsageError(f"check-eigen {args.check_eigen} exceeds the {spec.count} retained pairs")
        eig = detseries.symmetric_function_check(spec, args.check_eigen)
        header += ["eigen_sum", "difference"]
    rows = []
    for n, cn in enumerate(coeffs.c):
        row = ["c", n, float(cn)]
        if eig is not None:
            e = eig[n - 1] if n in (1, 2) else None
            row += [e, None if e is None else float(cn) - e]
        rows.append(row)
    for lam in args.lam:
        row = ["delta", format_float(lam), detseries.delta_eval(coeffs, lam)]
        if eig is not None:
            row += [None, None]
        rows.append(row)
    return tuple(header), rows, None


def cmd_residual(args, cfg: RunConfig):
    kernel, rule = _setup(cfg)
    stack, spec = _spectrum_and_stack(cfg, kernel, rule, cfg.m)
    params = MixedSeriesParams(cfg.lam, cfg.m, cfg.n_fourier)
    defect = resolvent_defect(stack, spec, params, args.x, args.t)
    header = ("x", "t", "lambda", "m", "n_fourier", "defect")
    return header, [(args.x, args.t, cfg.lam, cfg.m, cfg.n_fourier, abs(defect))], None


COMMANDS = {
    "eig": cmd_eig,
    "solve": cmd_solve,
    "table": cmd_table,
    "figure": cmd_figure,
    "det": cmd_det,
    "residual": cmd_residual,
}


@contextlib.contextmanager
def _quiet_warnings():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def _error_code(exc: BaseException) -> tuple[str, int]:
    if isinstance(exc, ExprError):
        return "parse", exc.exit_code
    if isinstance(exc, AsymmetricKernelError):
        return "asymmetric", exc.exit_code
    if isinstance(exc, EigenvalueHitError):
        return "eigenvalue", exc.exit_code
    if isinstance(exc, ResolventError):
        return "solver", exc.exit_code
    if isinstance(exc, UsageError):
        return "usage", EXIT_USAGE
    if isinstance(exc, OSError):
        return "io", EXIT_IO
    return "error", EXIT_OTHER


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        try:
            args = parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        benchmark.worker_count()  # validate RESOLVENT_THREADS early
        cfg = _run_config(args)
        header, rows, note = COMMANDS[args.command](args, cfg)
        _emit(render(header, rows, cfg.format), cfg, stdout)
        if note:
            stderr.write(f"note: {note}\n")
        return 0
    except (ResolventError, UsageError, OSError, ValueError) as exc:
        code, status = _error_code(exc)
        message = " ".join(str(exc).split())
        stderr.write(f"error[{code}]: {message}\n")
        return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
