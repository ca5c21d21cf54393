"""
Command-line frontend: ``capacity``, ``audit``, ``simulate``, ``codegen``
and ``mono``. Every run is determined by its arguments; output is CSV.

Exit status is 0 on success, 1 when a library error is raised and 2 on
a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import traceback
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import evalbench
from .errors import SkCodesError
from .ldpc import (
    HALF_RATE_IRREGULAR,
    LdpcCode,
    build_irregular_ldpc,
    build_regular_ldpc,
    dump_alist,
    read_alist,
)
from .lincode import LinearCode, as_fraction, dump_code, named_code, read_code
from .sources import SourceModel, capacity, make_model, read_model

DEFAULT_N = 1000
DEFAULT_BLOCKS = 1000
DEFAULT_ITERS = 60


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on; built from argv and nothing else."""

    command: str
    args: argparse.Namespace


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: usage error: {message}\n")


def _p_list(text: str) -> list[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty probability list")
    for s in items:
        try:
            Fraction(s)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"not a probability: {s!r}") from exc
    return items


def _edge(text: str):
    try:
        i, j, p = text.split(":")
        Fraction(p)
        return int(i), int(j), p
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"edge must look like I:J:P, got {text!r}") from exc


def _add_model_args(p: argparse.ArgumentParser, default_model: Optional[int] = None) -> None:
    g = p.add_argument_group("source model")
    g.add_argument("--model", type=int, choices=(1, 2, 3, 4), default=default_model, help="source model number")
    g.add_argument("--p", type=_p_list, default=None, help="crossover probability (a comma list for simulate)")
    g.add_argument("--q", default=None, help="second parameter of Models 2 and 4")
    g.add_argument("--edge", type=_edge, action="append", default=None, help="Model 3 tree edge I:J:P (repeat per edge)")
    g.add_argument("--model-file", type=Path, default=None, help="model file; overrides the flags above")


def _add_code_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("linear code")
    g.add_argument("--code", default="hamming74", help="hamming74, hamming84, hamming63, rep3, rep-N or random:n,m,seed")
    g.add_argument("--code-file", type=Path, default=None, help="code file ('n m' header then the rows of A); overrides --code")


def _add_ldpc_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("LDPC code")
    g.add_argument("--ldpc", default="3,6", help="'dv,dc' for a regular code, 'irregular' for the built-in pair, or an alist path")
    g.add_argument("--n", type=int, default=DEFAULT_N, help="block length of a generated code")
    g.add_argument("--code-seed", type=int, default=None, help="construction seed (defaults to --seed)")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None, help="output file (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="skcodes", description=__doc__.strip().splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cap = sub.add_parser("capacity", help="closed-form key capacity of a model", formatter_class=fmt)
    _add_model_args(cap)

    aud = sub.add_parser("audit", help="exact secrecy audit by enumeration", formatter_class=fmt)
    _add_model_args(aud)
    _add_code_args(aud)
    g = aud.add_argument_group("regular partition (Models 2 and 4)")
    g.add_argument("--xi", default=None, help="typicality constant")
    g.add_argument("--eps-prime", default=None, help="rate back-off eps'")
    g.add_argument("--L", dest="key_range", type=int, default=None, help="key range override")
    aud.add_argument("--budget", type=int, default=evalbench.DEFAULT_AUDIT_BUDGET, help="maximum number of enumerated outcomes")
    _add_out(aud)

    sim = sub.add_parser("simulate", help="Monte Carlo KBER sweep of the Model 1 LDPC pipeline", formatter_class=fmt)
    _add_model_args(sim, default_model=1)
    _add_ldpc_args(sim)
    sim.add_argument("--blocks", type=int, default=DEFAULT_BLOCKS, help="blocks per grid point")
    sim.add_argument("--iters", type=int, default=DEFAULT_ITERS, help="BP iteration cap")
    sim.add_argument("--seed", type=int, required=True, help="master seed for per-block seeds")
    sim.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    _add_out(sim)

    gen = sub.add_parser("codegen", help="generate a code and export it", formatter_class=fmt)
    gen.add_argument("--kind", choices=("ldpc", "linear"), default="ldpc", help="code family")
    _add_ldpc_args(gen)
    _add_code_args(gen)
    gen.add_argument("--seed", type=int, default=0, help="construction seed used when --code-seed is absent")
    _add_out(gen)

    mono = sub.add_parser("mono", help="monotonicity of the exact ML error probability", formatter_class=fmt)
    _add_code_args(mono)
    mono.add_argument("--grid", type=_p_list, default=None, help="explicit comma-separated p-grid")
    mono.add_argument("--points", type=int, default=20, help="evenly spaced points when --grid is absent")
    mono.add_argument("--p-min", type=float, default=0.01, help="left end of the default grid (exclusive)")
    mono.add_argument("--p-max", type=float, default=0.45, help="right end of the default grid (exclusive)")
    _add_out(mono)
    return parser


# ---------------------------------------------------------------------------


def _model(a: argparse.Namespace) -> SourceModel:
    if a.model_file is not None:
        return read_model(a.model_file)
    if a.model is None:
        raise argparse.ArgumentTypeError("--model or --model-file is required")
    if a.model == 3:
        return make_model(3, edges=a.edge)
    if a.p is None:
        raise argparse.ArgumentTypeError(f"model {a.model} needs --p")
    if len(a.p) != 1:
        raise argparse.ArgumentTypeError("--p takes a single value here")
    return make_model(a.model, p=a.p[0], q=a.q)


def _linear_code(a: argparse.Namespace) -> LinearCode:
    if a.code_file is not None:
        return read_code(a.code_file)
    return named_code(a.code)


def _ldpc_code(a: argparse.Namespace, seed: int) -> LdpcCode:
    spec = a.ldpc.strip()
    if spec == "irregular":
        return build_irregular_ldpc(a.n, HALF_RATE_IRREGULAR, seed)
    if "," in spec and not Path(spec).exists():
        dv, dc = (int(v) for v in spec.split(","))
        return build_regular_ldpc(a.n, dv, dc, seed)
    return read_alist(spec)


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


_FORMS = {1: "1-h(p)", 2: "h(p+q-2pq)-h(p)", 3: "1-h(p_max)", 4: "h(p+q-2pq)-h(p)"}


def _cmd_capacity(a) -> None:
    model = _model(a)
    c = capacity(model)
    _write(_csv_text(("model", "params", "closed_form", "capacity_bits"),
                     [(model.kind, model.describe(), _FORMS[model.kind], repr(c))]), None)


def _cmd_audit(a) -> None:
    model = _model(a)
    code = _linear_code(a)
    rep = evalbench.exact_secrecy_audit(model, code, xi=a.xi and Fraction(a.xi),
                                        eps_prime=a.eps_prime and Fraction(a.eps_prime),
                                        key_range=a.key_range, budget=a.budget)
    evalbench.emit_report(rep, a.out if a.out is not None else sys.stdout)


def _cmd_simulate(a) -> None:
    if a.model_file is not None:
        model = read_model(a.model_file)
        ps = a.p or [str(model.p)] if model.kind == 1 else None
    else:
        model, ps = None, a.p
    if a.model not in (None, 1) or (model is not None and model.kind != 1):
        raise argparse.ArgumentTypeError("simulate runs the Model 1 pipeline only")
    if not ps:
        raise argparse.ArgumentTypeError("simulate needs --p")
    if a.threads < 1 or a.blocks < 1 or a.iters < 1:
        raise argparse.ArgumentTypeError("--threads, --blocks and --iters must be positive")
    code = _ldpc_code(a, a.seed if a.code_seed is None else a.code_seed)
    grid = sorted(float(Fraction(p)) for p in ps)
    rows = evalbench.kber_sweep(code, grid, a.blocks, a.iters, a.seed, a.threads)
    evalbench.emit_report(rows, a.out if a.out is not None else sys.stdout)


def _cmd_codegen(a) -> None:
    if a.kind == "ldpc":
        code = _ldpc_code(a, a.seed if a.code_seed is None else a.code_seed)
        _write(dump_alist(code), a.out)
    else:
        _write(dump_code(_linear_code(a)), a.out)


def _cmd_mono(a) -> None:
    code = _linear_code(a)
    if a.grid is not None:
        grid = [Fraction(p) for p in a.grid]
    else:
        if a.points < 2:
            raise argparse.ArgumentTypeError("--points must be at least 2")
        lo, hi = as_fraction(a.p_min), as_fraction(a.p_max)
        grid = [lo + (hi - lo) * (i + 1) / (a.points + 1) for i in range(a.points)]
    ok, values = evalbench.monotonicity_check(code, grid)
    rows = [(code.label(), code.n, code.m, evalbench._fmt(p), evalbench._fmt(v)) for p, v in zip(grid, values)]
    text = _csv_text(("code", "n", "m", "p", "p_err"), rows)
    _write(text + f"# strictly_increasing={int(ok)}\n", a.out)


_COMMANDS = {
    "capacity": _cmd_capacity,
    "audit": _cmd_audit,
    "simulate": _cmd_simulate,
    "codegen": _cmd_codegen,
    "mono": _cmd_mono,
}


def _origin(exc: BaseException) -> str:
    frames = traceback.extract_tb(exc.__traceback__)
    for fr in reversed(frames):
        path = Path(fr.filename)
        if path.parent.name == "skcodes":
            return f"skcodes.{path.stem}"
    return "skcodes"


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = RunConfig(args.command, args)
    try:
        _COMMANDS[config.command](config.args)
    except argparse.ArgumentTypeError as exc:
        print(f"skcodes {config.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except SkCodesError as exc:
        print(f"{_origin(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"skcodes: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())
