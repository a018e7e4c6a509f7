"""Bruhat decomposition g = u1 * w * u2 of g in SL(d, q) as an MSLP.

Step 2 reduces g to a monomial matrix by lower transvections, column by
column from the right.  For column c with top nonzero row r, rows below r
are cleared with t_ir(-g_ic / g_rc) on the left, then row r is cleared to the
left of c with t_cj(-g_rj / g_rc) on the right.  The emitted program runs over
Y(g, 1, 1) and leaves Y(w, u1, u2); the matrices themselves are tracked in
parallel by plain row and column operations so the multipliers are known.

Transvections come from the sets T_i = {t_{i(i-1)}(omega^l)}, which are built
once for i = 2 and then shifted along by conjugation with v (or v^-1), and
from commutators [t_ik(a), t_kj(b)] = t_ij(ab).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gf import GF
from .matgroup import (
    Matrix,
    classify,
    is_lower_unitriangular,
    is_monomial,
    regular_rep,
    standard_generators,
)
from .mslp import (
    Inv,
    Mul,
    Program,
    SlotBuilder,
    concat,
    emit_commutator,
    emit_powers,
    evaluate,
    header_for,
)
from .wordgen import Y_SLOTS, monomial_word

__all__ = [
    "TransvectionBasis",
    "trans_arbitrary",
    "trans_offdiag",
    "bruhat_step2",
    "bruhat_full",
    "verify",
    "BruhatResult",
    "Step2Result",
    "Call",
    "Check",
    "step2_length_bound",
    "step2_quota_bound",
    "perm_word_bound",
    "diag_word_bound",
    "first_transvections_bound",
    "left_update_bound",
    "arbitrary_transvection_bound",
    "total_length_ratio",
    "RATIO_LIMIT",
]

Y = Y_SLOTS
RATIO_LIMIT = 20


# -- bounds ------------------------------------------------------------------------------


def step2_length_bound(d: int, q: int, f: int) -> float:
    """Length bound for step 2: odd d uses 5f+1, even d 5f+2 as constant term."""
    lg = math.log2(q)
    const = 5 * f + (2 if d % 2 == 0 else 1)
    return d * d * (2 * lg + 5 * f + 10) + 4 * d * (lg + 1) + const


def step2_quota_bound(d: int, f: int) -> int:
    return f + 18 if d % 2 else 2 * f + 18


def perm_word_bound(d: int) -> float:
    return 2 * d * math.log2(d) + 4 * d


def diag_word_bound(d: int, q: int) -> float:
    return 2 * d * math.log2(d) + 2 * d * math.log2(q) + 3 * d


def arbitrary_transvection_bound(q: int, f: int) -> float:
    return 2 * math.log2(q) + f - 1


def first_transvections_bound(r: int, q: int, f: int) -> float:
    return f * (2 * r - 1) + 2 * math.log2(q) + 2


def left_update_bound(q: int, f: int) -> float:
    return 2 * math.log2(q) + 3 * f + 10


def total_length_ratio(length: int, d: int, q: int) -> float:
    return length / (d * d * math.log2(q))


# -- transvection sets T_i -------------------------------------------------------------------


class TransvectionBasis:
    """Slots holding T_i = {t_{i(i-1)}(omega^l) : l < f} for a window of i.

    Odd d keeps one set live and shifts it in place.  Even d shifts by two,
    so it keeps a consecutive pair T_a, T_{a+1}.  T_2 is built on first use.
    """

    def __init__(self, B: SlotBuilder, d: int, f: int):
        self.B = B
        self.d = d
        self.f = f
        self.even = d % 2 == 0
        self.live: dict[int, list[int]] = {}
        self.steps = 0  # number of single-index shifts performed so far

    def slots(self, i: int) -> list[int]:
        return self.live[i]

    def build_t2(self) -> list[int]:
        """Emit T_2: 2 instructions for f = 1, 2f + 4 otherwise."""
        B, f = self.B, self.f
        basis = [B.alloc(f"T2[{l}]") for l in range(f)]
        B.mul(basis[0], Y["s"], Y["t_inv"])
        B.mul(basis[0], basis[0], Y["s_inv"])
        if f > 1:
            # y = diag(omega^-1, 1, omega, 1, ...); conjugating by y scales the
            # (2,1) entry by omega
            conj, conj_inv = ("x_inv", "x") if self.even else ("v", "v_inv")
            y = B.alloc("y")
            B.mul(y, Y["delta_inv"], Y[conj])
            B.mul(y, y, Y["delta_inv"])
            B.mul(y, y, Y[conj_inv])
            y_inv = basis[-1]  # parked in the last, not yet computed, slot
            B.inv(y_inv, y)
            for l in range(1, f - 1):
                B.mul(basis[l], y, basis[l - 1])
                B.mul(basis[l], basis[l], y_inv)
            B.mul(y, y, basis[f - 2])
            B.mul(basis[-1], y, y_inv)
            B.free(y)
        self.live = {2: basis}
        return basis

    def _conjugate(self, slots: list[int], left: str, right: str) -> None:
        self.steps += 1
        for s in slots:
            self.B.mul(s, Y[left], s)
            self.B.mul(s, s, Y[right])

    def _build_t3(self) -> None:
        """Even d: T_3 = (x v^-1) T_2 (x v^-1)^-1, kept beside T_2."""
        B = self.B
        a = B.alloc("xv^-1")
        a_inv = B.alloc("vx^-1")
        B.mul(a, Y["x"], Y["v_inv"])
        B.mul(a_inv, Y["v"], Y["x_inv"])
        t3 = []
        for l, s in enumerate(self.live[2]):
            n = B.alloc(f"T3[{l}]")
            B.mul(n, a, s)
            B.mul(n, n, a_inv)
            t3.append(n)
        B.free(a, a_inv)
        self.live[3] = t3
        self.steps += 1

    def ensure(self, i: int) -> list[int]:
        """Shift the live window until T_i is available; return its slots."""
        if not 2 <= i <= self.d:
            raise ValueError(f"T_{i} does not exist for d={self.d}")
        if not self.live:
            self.build_t2()
        while i not in self.live:
            lo, hi = min(self.live), max(self.live)
            if not self.even:
                slots = self.live.pop(lo)
                if i > lo:
                    self._conjugate(slots, "v", "v_inv")
                    self.live[lo + 1] = slots
                else:
                    self._conjugate(slots, "v_inv", "v")
                    self.live[lo - 1] = slots
            elif i > hi:
                if hi == 2:
                    self._build_t3()
                else:
                    slots = self.live.pop(lo)
                    self._conjugate(slots, "v_inv", "v")
                    self.live[lo + 2] = slots
            else:
                slots = self.live.pop(hi)
                self._conjugate(slots, "v", "v_inv")
                self.live[hi - 2] = slots
        return self.live[i]


def trans_arbitrary(B: SlotBuilder, field: GF, basis: list[int], alpha: int) -> int | None:
    """t_{i(i-1)}(alpha) as a product of powers of the basis slots.

    Returns the slot holding it: a basis slot itself when alpha = omega^l,
    a freshly allocated slot otherwise, or None when alpha = 0.  Uses at most
    one scratch slot for squaring besides the result.
    """
    terms = [(l, a) for l, a in enumerate(field.coeffs(alpha)) if a]
    if not terms:
        return None
    if len(terms) == 1 and terms[0][1] == 1:
        return basis[terms[0][0]]
    dst = B.alloc("t(alpha)")
    for n, (l, a) in enumerate(terms):
        emit_powers(B, basis[l], [a], [dst], accumulate=n > 0)
    return dst


def trans_offdiag(B: SlotBuilder, first: int, second: int, dst: int) -> None:
    """t_ij(ab) = [t_ik(a), t_kj(b)] for slots holding the two factors."""
    emit_commutator(B, first, second, dst)


# -- field-level mirror ------------------------------------------------------------------------


class _Mirror:
    """A d x d matrix over GF(p^f) held in its GL(df, p) form, for row/column ops."""

    def __init__(self, m: Matrix):
        self.field = m.field
        self.d = m.d
        self.f = m.field.f
        self.p = m.field.p
        self.a = m._m.astype(np.int64)

    def entry(self, i: int, j: int) -> int:
        f = self.f
        return self.field.from_coeffs(self.a[(i - 1) * f, (j - 1) * f : j * f])

    def column(self, c: int) -> list[int]:
        f = self.f
        block = self.a[::f, (c - 1) * f : c * f]
        return self.field.undigits(block.T).tolist()

    def row(self, r: int) -> list[int]:
        f = self.f
        block = self.a[(r - 1) * f].reshape(self.d, f)
        return self.field.undigits(block.T).tolist()

    def _rep(self, alpha: int) -> np.ndarray:
        return regular_rep(self.field, alpha).astype(np.int64)

    def add_row(self, i: int, r: int, alpha: int) -> None:
        """row i += alpha * row r (left multiplication by t_ir(alpha))."""
        f = self.f
        ri, rr = slice((i - 1) * f, i * f), slice((r - 1) * f, r * f)
        self.a[ri] = (self.a[ri] + self._rep(alpha) @ self.a[rr]) % self.p

    def add_col(self, j: int, c: int, alpha: int) -> None:
        """col j += col c * alpha (right multiplication by t_cj(alpha))."""
        f = self.f
        cj, cc = slice((j - 1) * f, j * f), slice((c - 1) * f, c * f)
        self.a[:, cj] = (self.a[:, cj] + self.a[:, cc] @ self._rep(alpha)) % self.p

    def matrix(self) -> Matrix:
        return Matrix(self.field, self.d, self.a.astype(np.float64))


# -- step 2 -------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Call:
    """One subroutine invocation and the instructions it emitted."""

    name: str
    arg: int
    length: int
    column: int = 0
    steps: int = 0  # basis shifts T_i -> T_(i+-1) (or i+-2) performed in the call


@dataclass
class Step2Result:
    g: Matrix
    w: Matrix
    u1: Matrix
    u2: Matrix
    program: Program
    pivots: list[tuple[int, int]]
    calls: list[Call]
    field_ops: int


def _neg_ratio(F: GF, a: int, pivot_inv: int) -> int:
    return F.neg(F.mul(a, pivot_inv))


def bruhat_step2(g: Matrix, debug: bool = False) -> Step2Result:
    """Emit the step-2 program for ``g`` and compute (w, u1, u2) alongside.

    With ``debug`` the identity u1_acc * g * u2_acc = w is checked after every
    column.
    """
    F, d = g.field, g.d
    if d < 3:
        raise ValueError(f"unsupported dimension d={d}; need d >= 3")
    if g.det() != 1:
        raise ValueError("g must have determinant 1")
    f = F.f

    B = SlotBuilder(reserved=13)
    T = TransvectionBasis(B, d, f)
    W = _Mirror(g)
    U1 = _Mirror(Matrix.identity(F, d))  # accumulated left factor
    U2 = _Mirror(Matrix.identity(F, d))  # accumulated right factor
    calls: list[Call] = []
    pivots: list[tuple[int, int]] = []
    field_ops = 0
    touched = {"u1": False, "u2": False}

    def apply_left(t_slot: int, i: int, r: int, alpha: int) -> None:
        nonlocal field_ops
        B.mul(Y["w"], t_slot, Y["w"])
        B.mul(Y["u1"], t_slot, Y["u1"])
        W.add_row(i, r, alpha)
        U1.add_row(i, r, alpha)
        touched["u1"] = True
        field_ops += 4 * d

    def apply_right(t_slot: int, c: int, j: int, alpha: int) -> None:
        nonlocal field_ops
        B.mul(Y["w"], Y["w"], t_slot)
        B.mul(Y["u2"], Y["u2"], t_slot)
        W.add_col(j, c, alpha)
        U2.add_col(j, c, alpha)
        touched["u2"] = True
        field_ops += 4 * d

    def basis_at(i: int) -> list[int]:
        if not T.live:
            mark = B.length
            T.build_t2()
            calls.append(Call("ComputeT2", 2, B.length - mark))
        return T.ensure(i)

    def record(name: str, arg: int, mark: int, steps: int, c: int) -> None:
        calls.append(Call(name, arg, B.length - mark, c, T.steps - steps))

    def release(slot: int | None, basis: list[int]) -> None:
        if slot is not None and slot not in basis:
            B.free(slot)

    for c in range(d, 0, -1):
        col = W.column(c)
        r = next(i for i, a in enumerate(col, 1) if a)
        pivots.append((c, r))
        pivot_inv = F.inv(col[r - 1])
        field_ops += 1

        # clear column c below the pivot
        below = [i for i in range(r + 1, d + 1) if col[i - 1]]
        if below:
            last = below[-1]
            if not T.live:
                basis_at(2)
            mark, steps = B.length, T.steps
            basis = basis_at(r + 1)
            alpha = _neg_ratio(F, col[r], pivot_inv) if col[r] else 0
            field_ops += 2
            t = trans_arbitrary(B, F, basis, alpha)
            if t is not None:
                apply_left(t, r + 1, r, alpha)
                release(t, basis)
            unit = None
            if last >= r + 2:
                unit = B.alloc("t_(i-1)r(1)")
                B.copy(unit, basis[0])
            record("FirstTransvections", r, mark, steps, c)
            for i in range(r + 2, last + 1):
                mark, steps = B.length, T.steps
                basis = basis_at(i)
                alpha = _neg_ratio(F, col[i - 1], pivot_inv) if col[i - 1] else 0
                field_ops += 2
                t = trans_arbitrary(B, F, basis, alpha)
                if t is not None:
                    tir = B.alloc("t_ir(alpha)")
                    trans_offdiag(B, t, unit, tir)  # [t_i(i-1)(a), t_(i-1)r(1)]
                    release(t, basis)
                    apply_left(tir, i, r, alpha)
                    B.free(tir)
                if i < last:
                    nxt = B.alloc("t_ir(1)")
                    trans_offdiag(B, basis[0], unit, nxt)
                    B.free(unit)
                    unit = nxt
                record("LeftUpdate", i, mark, steps, c)
            if unit is not None:
                B.free(unit)

        # clear row r to the left of column c
        row = W.row(r)
        left = [j for j in range(1, c) if row[j - 1]]
        if left:
            first = left[0]
            if not T.live:
                basis_at(2)
            mark, steps = B.length, T.steps
            basis = basis_at(c)
            alpha = _neg_ratio(F, row[c - 2], pivot_inv) if row[c - 2] else 0
            field_ops += 2
            t = trans_arbitrary(B, F, basis, alpha)
            if t is not None:
                apply_right(t, c, c - 1, alpha)
                release(t, basis)
            unit = None
            if first <= c - 2:
                unit = B.alloc("t_c(j+1)(1)")
                B.copy(unit, basis[0])
            record("LastTransvections", c, mark, steps, c)
            for j in range(c - 2, first - 1, -1):
                mark, steps = B.length, T.steps
                basis = basis_at(j + 1)
                alpha = _neg_ratio(F, row[j - 1], pivot_inv) if row[j - 1] else 0
                field_ops += 2
                t = trans_arbitrary(B, F, basis, alpha)
                if t is not None:
                    tcj = B.alloc("t_cj(alpha)")
                    trans_offdiag(B, unit, t, tcj)  # [t_c(j+1)(1), t_(j+1)j(a)]
                    release(t, basis)
                    apply_right(tcj, c, j, alpha)
                    B.free(tcj)
                if j > first:
                    nxt = B.alloc("t_cj(1)")
                    trans_offdiag(B, unit, basis[0], nxt)
                    B.free(unit)
                    unit = nxt
                record("RightUpdate", j, mark, steps, c)
            if unit is not None:
                B.free(unit)

        if debug:
            lhs = U1.matrix() * g * U2.matrix()
            if lhs != W.matrix():
                raise AssertionError(f"loop invariant broken after column {c}")

    mark = B.length
    if touched["u1"]:
        B.inv(Y["u1"], Y["u1"])
    if touched["u2"]:
        B.inv(Y["u2"], Y["u2"])
    if B.length > mark:
        calls.append(Call("Invert", 0, B.length - mark))

    program = B.program(**header_for(F, d))
    program = Program(max(program.quota, 13), program.instructions, *program.header)
    return Step2Result(
        g=g,
        w=W.matrix(),
        u1=U1.matrix().inverse(),
        u2=U2.matrix().inverse(),
        program=program,
        pivots=pivots,
        calls=calls,
        field_ops=field_ops,
    )


# -- full pipeline ------------------------------------------------------------------------------


@dataclass
class BruhatResult:
    """g = u1 * w * u2 with the programs that produce it.

    ``step2_program`` runs over Y(g, 1, 1) and leaves Y(w, u1, u2).
    ``monomial_program`` writes w into slot 11 from the ten generators.
    ``program`` is their concatenation (the complete MSLP).
    ``word_program`` drops the w-updates from step 2 and then appends the
    monomial word, so it needs no g at all: run over Y(1, 1, 1) it leaves
    Y(w, u1, u2), exhibiting all three as words in the standard generators.
    """

    g: Matrix
    w: Matrix
    u1: Matrix
    u2: Matrix
    step2_program: Program
    monomial_program: Program
    program: Program
    word_program: Program
    pivots: list[tuple[int, int]]
    calls: list[Call]
    field_ops: int
    monomial_info: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.g.d

    @property
    def field(self) -> GF:
        return self.g.field

    @property
    def length(self) -> int:
        return self.program.length

    def stats(self, program: Program | None = None) -> dict:
        prog = self.program if program is None else program
        st = prog.stats()
        return {
            "length": st.length,
            "copies": st.copies,
            "shows": st.shows,
            "quota": st.quota,
            "peak_slots": st.peak_slots,
            "field_ops": self.field_ops,
            "d": self.d,
            "q": self.field.q,
        }


def _strip_w_updates(program: Program) -> Program:
    w = Y["w"]
    kept = [ins for ins in program.instructions if not (type(ins) is Mul and ins.dst == w)]
    return Program(program.quota, kept, *program.header)


def bruhat_full(g: Matrix, debug: bool = False) -> BruhatResult:
    s2 = bruhat_step2(g, debug=debug)
    mono, info = monomial_word(s2.w)
    field_ops = s2.field_ops + s2.w.d  # one discrete log per diagonal entry
    return BruhatResult(
        g=g,
        w=s2.w,
        u1=s2.u1,
        u2=s2.u2,
        step2_program=s2.program,
        monomial_program=mono,
        program=concat(s2.program, mono),
        word_program=concat(_strip_w_updates(s2.program), mono),
        pivots=s2.pivots,
        calls=s2.calls,
        field_ops=field_ops,
        monomial_info=info,
    )


# -- verification -------------------------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


def _payload_matches(program: Program, memory: list[Matrix], res: BruhatResult) -> bool:
    if program.instructions:
        evaluate(program, memory)
    return memory[10] == res.w and memory[11] == res.u1 and memory[12] == res.u2


def verify(g: Matrix, res: BruhatResult, evaluate_programs: bool = True) -> list[Check]:
    """Check a decomposition and its programs; failures are reported, not raised."""
    F, d = g.field, g.d
    f, q = F.f, F.q
    checks = [
        Check("product u1*w*u2 == g", res.u1 * res.w * res.u2 == g),
        Check("w monomial", is_monomial(res.w), classify(res.w)),
        Check("u1 lower unitriangular", is_lower_unitriangular(res.u1)),
        Check("u2 lower unitriangular", is_lower_unitriangular(res.u2)),
    ]
    if evaluate_programs:
        gens = standard_generators(d, F)
        quota = max(res.program.quota, res.word_program.quota)
        one = Matrix.identity(F, d)
        ok = _payload_matches(res.step2_program, gens.memory(g, quota=res.step2_program.quota), res)
        checks.append(Check("step-2 program on Y(g,1,1) gives Y(w,u1,u2)", ok))
        ok = _payload_matches(res.program, gens.memory(g, quota=res.program.quota), res)
        checks.append(Check("complete program on Y(g,1,1) gives Y(w,u1,u2)", ok))
        ok = _payload_matches(res.word_program, gens.memory(one, quota=quota)[: res.word_program.quota], res)
        checks.append(Check("word program on Y(1,1,1) gives Y(w,u1,u2)", ok))
    s2 = res.step2_program.stats()
    bound = step2_length_bound(d, q, f)
    checks.append(Check("step-2 length bound", s2.length <= bound, f"{s2.length} <= {bound:.1f}"))
    qb = step2_quota_bound(d, f)
    checks.append(Check("step-2 quota bound", s2.quota <= qb, f"{s2.quota} <= {qb}"))
    full = res.program.stats()
    pb = 2 * f + 18
    checks.append(Check("peak slots", full.peak_slots <= pb and full.quota <= pb, f"quota {full.quota}, peak {full.peak_slots} <= {pb}"))
    ratio = total_length_ratio(full.length, d, q)
    checks.append(Check("length / (d^2 log2 q)", ratio <= RATIO_LIMIT, f"{ratio:.3f} <= {RATIO_LIMIT}"))
    return checks
