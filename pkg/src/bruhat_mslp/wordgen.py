"""Words for monomial matrices in the standard generators of SL(d, q).

A monomial w is split as w = h * w' where w' is a word in s and a d-cycle
(realising the permutation Psi(w)) and h = w * w'^-1 is diagonal.  The
permutation part sifts through the chain v_1 = (1 d d-1 ... 2),
v_i = s_{i-1} v_{i-1}, s_i = v_1 s_{i-1} v_1^-1; the diagonal part is a
product of powers of h_j = diag(1, .., omega, omega^-1, .., 1).

Slot numbers below refer to the generator list Y = [s, s^-1, t, t^-1,
delta, delta^-1, v, v^-1, x, x^-1, w, u1, u2].
"""

from __future__ import annotations

from dataclasses import dataclass

from .gf import GF
from .matgroup import Matrix, Permutation, classify, psi, standard_generators
from .mslp import Program, SlotBuilder, emit_powers, evaluate, header_for

__all__ = [
    "PermWordPlan",
    "DiagWordPlan",
    "plan_perm_word",
    "plan_diag_word",
    "emit_perm_word",
    "emit_diag_word",
    "perm_word",
    "diag_word",
    "monomial_word",
    "cycle_relabelling",
    "Y_SLOTS",
]

Y_SLOTS = {
    "s": 1, "s_inv": 2, "t": 3, "t_inv": 4, "delta": 5, "delta_inv": 6,
    "v": 7, "v_inv": 8, "x": 9, "x_inv": 10, "w": 11, "u1": 12, "u2": 13,
}


# -- permutations -----------------------------------------------------------------


@dataclass(frozen=True)
class PermWordPlan:
    """Sifting exponents: target = (prod_i v_i ** exponents[i-1]) ** -1."""

    target: Permutation
    exponents: tuple[int, ...]

    @property
    def depth(self) -> int:
        """Largest i with a nonzero exponent (0 for the identity)."""
        nz = [i for i, e in enumerate(self.exponents, 1) if e]
        return nz[-1] if nz else 0


def sift_cycle(d: int, i: int) -> Permutation:
    """v_i = (i d d-1 ... i+1)."""
    return Permutation.from_cycles(d, [i, *range(d, i, -1)]) if i < d else Permutation.identity(d)


def plan_perm_word(pi: Permutation) -> PermWordPlan:
    d = pi.degree
    cur = pi
    exps = []
    for i in range(1, d + 1):
        e = cur(i) - i
        exps.append(e)
        if e:
            cur = cur * sift_cycle(d, i) ** e
    assert cur == Permutation.identity(d)
    return PermWordPlan(pi, tuple(exps))


def emit_perm_word(B: SlotBuilder, plan: PermWordPlan, s1: int, v1: int, v1_inv: int) -> int | None:
    """Emit the word for ``plan.target``; returns its slot, or None for the identity.

    ``s1``, ``v1``, ``v1_inv`` hold images of (1 2), (1 2 ... d)^-1 and its
    inverse.  Scratch: one slot each for the s_i and v_i chains, one
    accumulator and one squaring slot.
    """
    depth = plan.depth
    if depth == 0:
        return None
    s_cur = v_cur = None  # None means "still the input slot"
    acc = B.alloc("perm acc")
    started = False
    for i in range(1, depth + 1):
        if i >= 2:
            # v_i = s_{i-1} v_{i-1}, with s_1 and v_1 read straight from the inputs
            if v_cur is None:
                v_cur = B.alloc("v_i")
                B.mul(v_cur, s1 if s_cur is None else s_cur, v1)
            else:
                B.mul(v_cur, s1 if s_cur is None else s_cur, v_cur)
        e = plan.exponents[i - 1]
        if e:
            src = v1 if i == 1 else v_cur
            emit_powers(B, src, [e], [acc], accumulate=started)
            started = True
        if 2 <= i < depth:
            # s_i = v_1 s_{i-1} v_1^-1, needed for v_{i+1}
            if s_cur is None:
                s_cur = B.alloc("s_i")
                B.mul(s_cur, v1, s1)
            else:
                B.mul(s_cur, v1, s_cur)
            B.mul(s_cur, s_cur, v1_inv)
    B.inv(acc, acc)
    for slot in (s_cur, v_cur):
        if slot is not None:
            B.free(slot)
    return acc


def perm_word(pi: Permutation) -> tuple[Program, int | None]:
    """Standalone program over [s1, v1, v1^-1] computing ``pi``.

    Returns the program and the result slot (None when ``pi`` is trivial).
    A final Show of the result slot is appended.
    """
    B = SlotBuilder(reserved=3)
    slot = emit_perm_word(B, plan_perm_word(pi), 1, 2, 3)
    if slot is not None:
        B.show(slot)
    return B.program(), slot


def perm_inputs(d: int) -> list[Permutation]:
    v1 = Permutation.from_cycles(d, [1, *range(d, 1, -1)])
    return [Permutation.from_cycles(d, [1, 2]), v1, v1.inverse()]


# -- diagonal matrices ---------------------------------------------------------------


@dataclass(frozen=True)
class DiagWordPlan:
    """h = diag(omega^l_1, ..., omega^l_d) = prod_j h_j ** partial[j-1]."""

    exponents: tuple[int, ...]
    partial: tuple[int, ...]
    order: int

    @property
    def depth(self) -> int:
        nz = [j for j, lam in enumerate(self.partial, 1) if lam]
        return nz[-1] if nz else 0


def plan_diag_word(exponents, q: int) -> DiagWordPlan:
    n = q - 1
    ell = tuple(int(e) % n for e in exponents)
    if sum(ell) % n:
        raise ValueError("diagonal exponents must sum to 0 mod q-1 (det 1)")
    partial = []
    run = 0
    for e in ell[:-1]:
        run = (run + e) % n
        partial.append(run)
    return DiagWordPlan(ell, tuple(partial), n)


def emit_diag_word(B: SlotBuilder, plan: DiagWordPlan, d: int) -> int | None:
    """Emit the diagonal word over the Y layout; returns its slot or None."""
    depth = plan.depth
    if depth == 0:
        return None
    Y = Y_SLOTS
    even = d % 2 == 0
    acc = B.alloc("diag acc")
    started = False
    # odd d keeps one h_j slot; even d keeps one per parity of j
    chain: list[int | None] = [None, None]
    for j in range(1, depth + 1):
        if j == 1:
            cur = Y["delta"]
        elif not even:
            if chain[0] is None:
                chain[0] = B.alloc("h_j")
                B.mul(chain[0], Y["v"], Y["delta"])
            else:
                B.mul(chain[0], Y["v"], chain[0])
            B.mul(chain[0], chain[0], Y["v_inv"])
            cur = chain[0]
        elif j == 2:
            chain[0] = B.alloc("h_even")
            B.mul(chain[0], Y["x_inv"], Y["delta"])
            B.mul(chain[0], chain[0], Y["x"])
            cur = chain[0]
        else:
            k = j % 2
            if chain[k] is None:
                chain[k] = B.alloc("h_odd")
                B.mul(chain[k], Y["v_inv"], Y["delta"])
            else:
                B.mul(chain[k], Y["v_inv"], chain[k])
            B.mul(chain[k], chain[k], Y["v"])
            cur = chain[k]
        lam = plan.partial[j - 1]
        if lam:
            emit_powers(B, cur, [lam], [acc], accumulate=started)
            started = True
    for slot in chain:
        if slot is not None:
            B.free(slot)
    return acc


def diag_word(exponents, field: GF, d: int) -> tuple[Program, int | None]:
    """Standalone program over the ten generators computing the diagonal word."""
    plan = plan_diag_word(exponents, field.q)
    if len(plan.exponents) != d:
        raise ValueError(f"need {d} exponents")
    B = SlotBuilder(reserved=10)
    slot = emit_diag_word(B, plan, d)
    if slot is not None:
        B.show(slot)
    return B.program(**header_for(field, d)), slot


# -- monomial matrices -----------------------------------------------------------------


def even_cycle_word() -> tuple[str, str]:
    """Generators whose product z has Psi(z) a d-cycle through 1 -> 2 or 2 -> 1."""
    return ("v", "x")


def cycle_relabelling(cycle: Permutation) -> Permutation:
    """Bijection sigma with sigma (1 2 ... d) sigma^-1 = cycle, fixing {1, 2}.

    ``cycle`` must be a d-cycle in which 1 and 2 are adjacent.  The result
    maps k to the k-th point of the cycle, starting from whichever of 1, 2
    precedes the other.
    """
    d = cycle.degree
    start = 1 if cycle(1) == 2 else 2
    if cycle(start) != 3 - start:
        raise ValueError("1 and 2 are not adjacent in the cycle")
    pts = [start]
    for _ in range(d - 1):
        pts.append(cycle(pts[-1]))
    if len(set(pts)) != d:
        raise ValueError("not a d-cycle")
    return Permutation(pts)


def monomial_plan(w: Matrix) -> tuple[Permutation, PermWordPlan, Permutation | None]:
    """Target permutation, sifting plan, and the relabelling used (even d)."""
    d = w.d
    pi = psi(w)
    if d % 2:
        return pi, plan_perm_word(pi), None
    gens = standard_generators(d, w.field)
    a, b = even_cycle_word()
    sigma = cycle_relabelling(psi(getattr(gens, a) * getattr(gens, b)))
    # the word for rho evaluates to sigma-conjugated rho on the matrices
    rho = Permutation(sigma.inverse()(pi(sigma(k))) for k in range(1, d + 1))
    return pi, plan_perm_word(rho), sigma


def emit_monomial_word(B: SlotBuilder, w: Matrix, target: int | None = None) -> dict:
    """Emit a word for monomial ``w`` into slot ``target`` (default: Y's w slot).

    Reads only the ten generator slots.  Returns bookkeeping: the target
    permutation, the permutation-part matrix w', the diagonal plan, and
    per-part instruction counts.
    """
    kind = classify(w)
    if kind not in ("monomial", "diagonal"):
        raise ValueError("monomial_word needs a monomial matrix")
    if w.det() != 1:
        raise ValueError("monomial_word needs det(w) = 1")
    F, d = w.field, w.d
    Y = Y_SLOTS
    target = Y["w"] if target is None else target
    pi, plan, sigma = monomial_plan(w)
    start = B.length
    first = len(B.instructions)

    # perm part
    if d % 2:
        w_slot = emit_perm_word(B, plan, Y["s"], Y["v"], Y["v_inv"])
        extra = 0
    else:
        z_inv = z = None
        if plan.depth:
            a, b = even_cycle_word()
            z = B.alloc("z")
            z_inv = B.alloc("z^-1")
            B.mul(z, Y[a], Y[b])
            B.mul(z_inv, Y[b + "_inv"], Y[a + "_inv"])
        extra = B.length - start
        w_slot = emit_perm_word(B, plan, Y["s"], z_inv, z) if plan.depth else None
        for slot in (z, z_inv):
            if slot is not None:
                B.free(slot)
    perm_len = B.length - start

    # w' as a matrix, by evaluating the same word
    gens = standard_generators(d, F)
    if w_slot is None:
        w_prime = Matrix.identity(F, d)
    else:
        frag = Program(max(B.high, 13), B.instructions[first:])
        mem = gens.memory(quota=frag.quota)
        evaluate(frag, mem)
        w_prime = mem[w_slot - 1]
    if psi(w_prime) != pi:
        raise AssertionError("permutation word does not realise Psi(w)")

    h = w * w_prime.inverse()
    diag = h.entries().diagonal()
    ells = [F.dlog(int(a)) for a in diag]
    dplan = plan_diag_word(ells, F.q)
    mark = B.length
    h_slot = emit_diag_word(B, dplan, d)
    diag_len = B.length - mark

    if h_slot is None and w_slot is None:
        pass  # w is the identity; the target slot is left as is
    elif h_slot is None:
        B.copy(target, w_slot)
    elif w_slot is None:
        B.copy(target, h_slot)
    else:
        B.mul(target, h_slot, w_slot)
    for slot in (h_slot, w_slot):
        if slot is not None and slot != target and B.owner(slot) is not None:
            B.free(slot)
    return {
        "perm": pi,
        "relabel": sigma,
        "perm_plan": plan,
        "w_prime": w_prime,
        "h": h,
        "diag_plan": dplan,
        "perm_length": perm_len,
        "cycle_setup_length": extra,
        "diag_length": diag_len,
        "length": B.length - start,
    }


def monomial_word(w: Matrix) -> tuple[Program, dict]:
    """Program over Y writing the monomial ``w`` into slot 11.

    Slots 1-10 and 12-13 are preserved.  When w is the identity the program
    is empty, so slot 11 must then already hold the identity (as it does
    after the step-2 program, or in Y(1, 1, 1)).
    """
    B = SlotBuilder(reserved=13)
    B.free(Y_SLOTS["w"])  # its old contents are dead; reuse it as scratch
    info = emit_monomial_word(B, w)
    return B.program(**header_for(w.field, w.d)), info
