"""Command-line front end.

Subcommands: gen, eval, verify, random, stats, bench.  Machine-readable
output goes to standard output, diagnostics to standard error.

Exit codes: 0 success, 1 parse or usage error, 2 det(g) != 1, 3 unsupported
dimension, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .bruhat import (
    RATIO_LIMIT,
    bruhat_full,
    bruhat_step2,
    step2_length_bound,
    step2_quota_bound,
    total_length_ratio,
    verify,
)
from .gf import field_from_header, field_of_order
from .matgroup import Matrix, format_matrix, parse_matrices, standard_generators
from .mslp import ParseError, Program, evaluate, input_slots, parse, serialize

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_DET = 2
EXIT_DIM = 3
EXIT_VERIFY = 4

# Length measured for one random GL(250, 2) matrix by the reference
# implementation; reported by bench for comparison only.
REFERENCE_LENGTH_250_2 = 525_394


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


# -- helpers ----------------------------------------------------------------------------


def random_sl(d: int, q: int, rng: np.random.Generator) -> Matrix:
    """Seeded random element of SL(d, q).

    Entries are drawn uniformly until the matrix is invertible, then the first
    row is scaled by det^-1.
    """
    if d < 3:
        raise ValueError(f"unsupported dimension d={d}; need d >= 3")
    F = field_of_order(q)
    while True:
        a = rng.integers(0, q, size=(d, d))
        g = Matrix.from_entries(F, a)
        det = g.det()
        if det:
            break
    if det != 1:
        scale = F.inv(det)
        a[0] = [F.mul(scale, int(x)) for x in a[0]]
        g = Matrix.from_entries(F, a)
    return g


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_matrices(path: str) -> list[Matrix]:
    try:
        mats = parse_matrices(_read_text(path))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    return mats


def _load_group_element(path: str) -> Matrix:
    mats = _load_matrices(path)
    if len(mats) != 1:
        raise CliError(EXIT_PARSE, f"{path}: expected exactly one matrix, found {len(mats)}")
    g = mats[0]
    if g.d < 3:
        raise CliError(EXIT_DIM, f"unsupported dimension d={g.d}; need d >= 3")
    if g.det() != 1:
        raise CliError(EXIT_DET, f"det(g) = {g.det()}, expected 1")
    return g


def _load_program(path: str) -> Program:
    try:
        return parse(_read_text(path))
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _record(items: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in items.items())


# -- subcommands ------------------------------------------------------------------------


def cmd_gen(args) -> int:
    g = _load_group_element(args.infile)
    if args.mode == "step2":
        res = bruhat_step2(g)
        program = res.program
        st = program.stats()
        stats = {
            "length": st.length,
            "copies": st.copies,
            "shows": st.shows,
            "quota": st.quota,
            "peak_slots": st.peak_slots,
            "field_ops": res.field_ops,
            "d": g.d,
            "q": g.field.q,
        }
    else:
        res = bruhat_full(g)
        program = res.program
        stats = res.stats()
    text = serialize(program)
    if args.out is None:
        sys.stdout.write(text)
        sys.stderr.write(_record(stats))
    else:
        Path(args.out).write_text(text)
        sys.stdout.write(_record(stats))
    if args.factors:
        Path(args.factors).write_text("".join(format_matrix(m) for m in (res.w, res.u1, res.u2)))
    return EXIT_OK


def _standard_memory(program: Program, payload: list[Matrix]) -> list[Matrix]:
    d, p, f, mod = program.header
    if not d:
        raise CliError(EXIT_PARSE, "program header has no field; pass --gens")
    if d < 3:
        raise CliError(EXIT_DIM, f"unsupported dimension d={d}; need d >= 3")
    try:
        F = field_from_header(p, f, mod)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"bad program header: {exc}") from None
    if len(payload) > 3:
        raise CliError(EXIT_PARSE, f"payload holds {len(payload)} matrices, at most 3 fit in slots 11-13")
    for m in payload:
        if m.field != F or m.d != d:
            raise CliError(EXIT_PARSE, f"payload matrix over GF({m.field.q}) of size {m.d} does not match the program header")
    gens = standard_generators(d, F)
    mem = gens.memory(*payload, quota=max(program.quota, 13))
    if program.quota < 13:
        high = [k for k in input_slots(program) if k > program.quota]
        if high:
            raise CliError(EXIT_PARSE, f"program reads slots {high} beyond its quota")
        mem = mem[: program.quota]
    return mem


def _list_memory(program: Program, gens: list[Matrix]) -> list[Matrix]:
    k = len(gens)
    if not k:
        raise CliError(EXIT_PARSE, "no generators given")
    first = gens[0]
    if any(m.field != first.field or m.d != first.d for m in gens):
        raise CliError(EXIT_PARSE, "generators differ in field or dimension")
    d, p, f, mod = program.header
    if d and (d, p, f, mod) != (first.d, first.field.p, first.field.f, first.field.packed_modulus):
        raise CliError(EXIT_PARSE, f"program header {program.header} does not match the generators")
    if k > program.quota:
        raise CliError(EXIT_PARSE, f"{k} generators given but the program has only {program.quota} slots")
    unset = [s for s in input_slots(program) if s > k]
    if unset:
        raise CliError(EXIT_PARSE, f"program reads slots {unset} but only {k} generators were given")
    one = first.identity_like()
    return list(gens) + [one] * (program.quota - k)


def cmd_eval(args) -> int:
    program = _load_program(args.infile)
    if args.gens:
        gens = [m for path in args.gens for m in _load_matrices(path)]
        memory = _list_memory(program, gens)
    else:
        payload = _load_matrices(args.payload) if args.payload else []
        memory = _standard_memory(program, payload)
    result = evaluate(program, memory)
    mats = result if isinstance(result, list) else [result]
    _write_text(args.out, "".join(format_matrix(m) for m in mats))
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _load_group_element(args.infile)
    res = bruhat_full(g)
    checks = verify(g, res, evaluate_programs=not args.no_eval)
    for c in checks:
        print(c)
    ok = all(c.passed for c in checks)
    print("OK" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def _check_params(d: int, q: int) -> None:
    if d < 3:
        raise CliError(EXIT_DIM, f"unsupported dimension d={d}; need d >= 3")
    try:
        field_of_order(q)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None


def cmd_random(args) -> int:
    _check_params(args.d, args.q)
    g = random_sl(args.d, args.q, np.random.default_rng(args.seed))
    _write_text(args.out, format_matrix(g))
    return EXIT_OK


def cmd_stats(args) -> int:
    program = _load_program(args.infile)
    d, p, f, _ = program.header
    extra = {"d": d, "q": p**f if p else 0}
    sys.stdout.write(program.stats().record(**extra))
    return EXIT_OK


def cmd_bench(args) -> int:
    _check_params(args.d, args.q)
    d, q = args.d, args.q
    F = field_of_order(q)
    f = F.f
    rng = np.random.default_rng(args.seed)
    evaluate_programs = d <= args.eval_limit
    length_bound = step2_length_bound(d, q, f)
    quota_bound = 2 * f + 18
    print("trial length step2_length quota peak_slots ratio verified seconds")
    rows = []
    for trial in range(args.trials):
        g = random_sl(d, q, rng)
        t0 = time.perf_counter()
        res = bruhat_full(g)
        checks = verify(g, res, evaluate_programs=evaluate_programs)
        dt = time.perf_counter() - t0
        st = res.program.stats()
        s2 = res.step2_program.stats()
        ok = all(c.passed for c in checks)
        ratio = total_length_ratio(st.length, d, q)
        rows.append((st.length, s2.length, st.quota, st.peak_slots, ok, dt))
        print(f"{trial} {st.length} {s2.length} {st.quota} {st.peak_slots} {ratio:.3f} {'yes' if ok else 'NO'} {dt:.2f}")
        for c in checks:
            if not c.passed:
                print(f"  {c}", file=sys.stderr)
    lengths = [r[0] for r in rows]
    summary = {
        "d": d,
        "q": q,
        "trials": args.trials,
        "programs_evaluated": "yes" if evaluate_programs else "no",
        "length_min": min(lengths),
        "length_mean": f"{sum(lengths) / len(lengths):.1f}",
        "length_max": max(lengths),
        "step2_length_max": max(r[1] for r in rows),
        "step2_length_bound": f"{length_bound:.0f}",
        "step2_quota_bound": step2_quota_bound(d, f),
        "quota_max": max(r[2] for r in rows),
        "peak_slots_max": max(r[3] for r in rows),
        "quota_bound": quota_bound,
        "ratio_limit": RATIO_LIMIT,
        "all_verified": "yes" if all(r[4] for r in rows) else "no",
        "seconds_total": f"{sum(r[5] for r in rows):.2f}",
    }
    if (d, q) == (250, 2):
        summary["reference_length"] = REFERENCE_LENGTH_250_2
    sys.stdout.write(_record(summary))
    return EXIT_OK if all(r[4] for r in rows) else EXIT_VERIFY


# -- argument parsing ---------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="bruhat-mslp", description="MSLPs for Bruhat decomposition in SL(d, q)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="emit the MSLP for a matrix")
    p.add_argument("--in", dest="infile", required=True, help="matrix file ('-' for stdin)")
    p.add_argument("--out", help="program file; without it the program goes to stdout and stats to stderr")
    p.add_argument("--mode", choices=("step2", "full"), default="full")
    p.add_argument("--factors", help="also write w, u1, u2 to this matrix file")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eval", help="evaluate a program")
    p.add_argument("--in", dest="infile", required=True, help="program file")
    p.add_argument("--gens", nargs="+", help="matrix files filling slots 1..k (default: standard generators)")
    p.add_argument("--payload", help="matrix file with up to three matrices for slots 11-13")
    p.add_argument("--out", help="output matrix file (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="decompose a matrix and check the result")
    p.add_argument("--in", dest="infile", required=True, help="matrix file")
    p.add_argument("--no-eval", action="store_true", help="skip re-evaluating the programs")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", help="seeded random element of SL(d, q)")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("stats", help="print the stats record of a program file")
    p.add_argument("--in", dest="infile", required=True, help="program file")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="decompose seeded random matrices and tabulate")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eval-limit", type=int, default=24,
                   help="re-evaluate programs only when d is at most this")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"bruhat-mslp: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
