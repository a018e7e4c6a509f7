from __future__ import annotations

import dataclasses
import random

import pytest

from bruhat_mslp import bruhat as br
from bruhat_mslp.gf import field_of_order, make_field
from bruhat_mslp.matgroup import (
    Matrix,
    is_lower_unitriangular,
    is_monomial,
    standard_generators,
    transvection,
)
from bruhat_mslp.mslp import Program, SlotBuilder, evaluate
from bruhat_mslp.wordgen import diag_word

import oracles
from conftest import random_monomial, sl_sample

ORACLE_QS = [2, 3, 4, 5, 8, 9]


# -- transvection identities ---------------------------------------------------------------


@pytest.mark.parametrize("check", oracles.ALL_CHECKS, ids=lambda c: c.__name__)
@pytest.mark.parametrize("q", ORACLE_QS)
@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_transvection_identities(check, d, q):
    n = check(field_of_order(q), d)
    assert n >= 0


# -- emitted transvections ------------------------------------------------------------------


def run_builder(B: SlotBuilder, F, d: int, quota: int | None = None) -> list[Matrix]:
    prog = B.program()
    mem = standard_generators(d, F).memory(quota=max(prog.quota, 13))
    if prog.instructions:
        evaluate(prog, mem)
    return mem


@pytest.mark.parametrize("q", ORACLE_QS + [7, 16, 27])
@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_basis_t2(d, q):
    F = field_of_order(q)
    B = SlotBuilder(13)
    T = br.TransvectionBasis(B, d, F.f)
    slots = T.build_t2()
    assert B.length <= 5 * F.f - 1
    mem = run_builder(B, F, d)
    for l, s in enumerate(slots):
        assert mem[s - 1] == transvection(F, d, 2, 1, F.omega_pow(l))


def test_basis_t2_prime_field_is_short():
    F = make_field(5)
    B = SlotBuilder(13)
    br.TransvectionBasis(B, 4, 1).build_t2()
    assert B.length <= 4


@pytest.mark.parametrize("q", [2, 4, 9])
@pytest.mark.parametrize("d", [3, 4, 5, 6, 7, 8])
def test_basis_walk(d, q):
    """Walk the window up to T_d and back down, checking every set on the way."""
    F = field_of_order(q)
    B = SlotBuilder(13)
    T = br.TransvectionBasis(B, d, F.f)
    order = list(range(2, d + 1)) + list(range(d - 1, 1, -1))
    for i in order:
        slots = list(T.ensure(i))
        mem = run_builder(B, F, d)
        for l, s in enumerate(slots):
            assert mem[s - 1] == transvection(F, d, i, i - 1, F.omega_pow(l)), (i, l)


def test_basis_out_of_range():
    B = SlotBuilder(13)
    T = br.TransvectionBasis(B, 4, 1)
    T.ensure(3)
    with pytest.raises(ValueError):
        T.ensure(5)
    with pytest.raises(ValueError):
        T.ensure(1)


def _arbitrary(F, d, alpha):
    B = SlotBuilder(13)
    T = br.TransvectionBasis(B, d, F.f)
    basis = T.build_t2()
    mark = B.length
    slot = br.trans_arbitrary(B, F, basis, alpha)
    return B, basis, slot, B.length - mark


def test_arbitrary_basis_element_is_free():
    F = field_of_order(8)
    for l in range(3):
        B, basis, slot, cost = _arbitrary(F, 4, F.omega_pow(l))
        assert slot == basis[l] and cost == 0


def test_arbitrary_zero():
    F = make_field(5)
    assert _arbitrary(F, 3, 0)[2] is None


def test_arbitrary_q5_alpha3():
    F = make_field(5)
    B, _, slot, cost = _arbitrary(F, 3, 3)
    assert cost <= 2 * 1.585
    assert run_builder(B, F, 3)[slot - 1] == transvection(F, 3, 2, 1, 3)


@pytest.mark.parametrize("q", [4, 8, 9, 25, 27])
def test_arbitrary_all_alpha(q):
    F = field_of_order(q)
    for alpha in range(1, q):
        B, basis, slot, cost = _arbitrary(F, 4, alpha)
        assert cost <= br.arbitrary_transvection_bound(q, F.f)
        assert run_builder(B, F, 4)[slot - 1] == transvection(F, 4, 2, 1, alpha)


def test_arbitrary_q8_omega_squared_plus_one():
    F = field_of_order(8)
    alpha = F.add(F.omega_pow(2), 1)
    B, _, slot, cost = _arbitrary(F, 3, alpha)
    assert cost == 1
    assert run_builder(B, F, 3)[slot - 1] == transvection(F, 3, 2, 1, alpha)


def _offdiag(F, d, first, second):
    gens = standard_generators(d, F).memory(quota=15)
    gens[13], gens[14] = first, second
    B = SlotBuilder(15)
    dst = B.alloc()
    br.trans_offdiag(B, 14, 15, dst)
    return evaluate(B.program(), gens + [gens[0]] * (B.program().quota - 15))


def test_offdiag_d4():
    F = field_of_order(9)
    for alpha in range(9):
        got = _offdiag(F, 4, transvection(F, 4, 4, 3, alpha), transvection(F, 4, 3, 1, 1))
        assert got == transvection(F, 4, 4, 1, alpha)


def test_offdiag_d3_q5():
    F = make_field(5)
    assert _offdiag(F, 3, transvection(F, 3, 3, 2, 2), transvection(F, 3, 2, 1, 1)) == transvection(F, 3, 3, 1, 2)
    assert _offdiag(F, 3, Matrix.identity(F, 3), transvection(F, 3, 2, 1, 1)) == Matrix.identity(F, 3)


# -- step 2 --------------------------------------------------------------------------------


def assert_decomposition(g, w, u1, u2):
    assert u1 * w * u2 == g
    assert is_monomial(w)
    assert is_lower_unitriangular(u1) and is_lower_unitriangular(u2)


def test_identity_input():
    F = make_field(5)
    one = Matrix.identity(F, 4)
    s2 = br.bruhat_step2(one)
    assert s2.w == one and s2.u1 == one and s2.u2 == one
    assert s2.program.length == 0


@pytest.mark.parametrize("q", [2, 5, 9])
@pytest.mark.parametrize("d", [3, 4, 7])
def test_monomial_input_is_fixed(d, q):
    F = field_of_order(q)
    rng = random.Random(d + q)
    for _ in range(5):
        g = random_monomial(F, d, rng)
        s2 = br.bruhat_step2(g)
        assert s2.w == g
        assert s2.u1 == s2.u2 == Matrix.identity(F, d)
        assert s2.program.length == 0


def test_rejects_bad_input():
    F = make_field(5)
    with pytest.raises(ValueError):
        br.bruhat_step2(Matrix.diagonal(F, [2, 1, 1]))
    with pytest.raises(ValueError):
        br.bruhat_step2(Matrix.identity(F, 2))


@pytest.mark.parametrize("q", [2, 3, 4, 5, 8, 9])
@pytest.mark.parametrize("d", [3, 4, 5])
def test_random_step2(d, q):
    for g in sl_sample(d, q, seed=d * 10 + q, count=100):
        s2 = br.bruhat_step2(g, debug=True)
        assert_decomposition(g, s2.w, s2.u1, s2.u2)
        assert [c for c, _ in s2.pivots] == list(range(d, 0, -1))
        assert sorted(r for _, r in s2.pivots) == list(range(1, d + 1))


def test_step2_program_reproduces_factors():
    F = field_of_order(9)
    for g in sl_sample(5, 9, seed=1, count=5):
        s2 = br.bruhat_step2(g)
        mem = standard_generators(5, F).memory(g, quota=s2.program.quota)
        evaluate(s2.program, mem)
        assert (mem[10], mem[11], mem[12]) == (s2.w, s2.u1, s2.u2)


@pytest.mark.parametrize("q", [2, 3, 4, 8, 9, 16, 27])
@pytest.mark.parametrize("d", range(3, 10))
def test_per_call_bounds(d, q):
    F = field_of_order(q)
    f = F.f
    for g in sl_sample(d, q, seed=7 * d + q, count=6):
        s2 = br.bruhat_step2(g)
        names = {c.name for c in s2.calls}
        assert names <= {"ComputeT2", "FirstTransvections", "LeftUpdate", "LastTransvections", "RightUpdate", "Invert"}
        for c in s2.calls:
            if c.name == "ComputeT2":
                assert c.length <= 5 * f - 1
            elif c.name in ("FirstTransvections", "LastTransvections"):
                # T_2 is built once up front, so the shifts the call made stand in for r - 1
                assert c.length <= br.first_transvections_bound(c.steps + 1, q, f), c
            elif c.name in ("LeftUpdate", "RightUpdate"):
                assert c.steps <= 1
                assert c.length <= br.left_update_bound(q, f), c
            else:
                assert c.length <= 2
        assert sum(c.length for c in s2.calls) == s2.program.length
        assert s2.program.length <= br.step2_length_bound(d, q, f)
        assert s2.program.quota <= br.step2_quota_bound(d, f)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
@pytest.mark.parametrize("q", [16, 32, 64, 81])
def test_quota_bound_larger_f(d, q):
    F = field_of_order(q)
    for g in sl_sample(d, q, seed=q, count=2):
        s2 = br.bruhat_step2(g)
        assert s2.program.quota <= br.step2_quota_bound(d, F.f)


# -- full pipeline ----------------------------------------------------------------------------


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_delta_input(d):
    F = make_field(7)
    delta = standard_generators(d, F).delta
    res = br.bruhat_full(delta)
    assert res.w == delta
    assert res.step2_program.length == 0
    expected, _ = diag_word([1, F.q - 2] + [0] * (d - 2), F, d)
    assert res.monomial_program.stats().length == expected.length == 0


def test_identity_full():
    F = field_of_order(4)
    res = br.bruhat_full(Matrix.identity(F, 5))
    assert res.program.length == 0 and res.word_program.length == 0
    assert all(c.passed for c in br.verify(res.g, res))


def test_word_program_sl48():
    F = field_of_order(8)
    for g in sl_sample(4, 8, seed=48, count=5):
        res = br.bruhat_full(g)
        mem = standard_generators(4, F).memory(quota=res.word_program.quota)
        evaluate(res.word_program, mem)
        assert mem[10] == res.w
        assert mem[11] * mem[10] * mem[12] == g


@pytest.mark.parametrize("q", [2, 7, 16])
@pytest.mark.parametrize("d", [3, 6, 9, 12])
def test_full_pipeline_verifies(d, q):
    for g in sl_sample(d, q, seed=d + 1000 * q, count=3):
        res = br.bruhat_full(g, debug=True)
        checks = br.verify(g, res)
        assert all(c.passed for c in checks), [str(c) for c in checks if not c.passed]
        st = res.stats()
        assert set(st) == {"length", "copies", "shows", "quota", "peak_slots", "field_ops", "d", "q"}
        assert st["length"] == res.step2_program.length + res.monomial_program.length


def test_verify_flags_tampered_u1():
    F = make_field(5)
    g = sl_sample(4, 5, seed=3, count=1)[0]
    res = br.bruhat_full(g)
    a = res.u1.tolist()
    a[3][0] = (a[3][0] + 1) % 5
    bad = dataclasses.replace(res, u1=Matrix.from_entries(F, a))
    checks = {c.name: c.passed for c in br.verify(g, bad, evaluate_programs=False)}
    assert not checks["product u1*w*u2 == g"]


def test_verify_flags_quota():
    g = sl_sample(4, 5, seed=3, count=1)[0]
    res = br.bruhat_full(g)
    big = Program(30, res.program.instructions, *res.program.header)
    bad = dataclasses.replace(res, program=big)
    checks = {c.name: c.passed for c in br.verify(g, bad, evaluate_programs=False)}
    assert not checks["peak slots"]
    assert "FAIL peak slots" in [str(c).split(":")[0] for c in br.verify(g, bad, evaluate_programs=False)]


def test_bound_formulas():
    assert br.step2_length_bound(3, 2, 1) == 9 * (2 + 5 + 10) + 12 * 2 + 6
    assert br.step2_length_bound(4, 2, 1) == 16 * 17 + 16 * 2 + 7
    assert br.step2_quota_bound(3, 2) == 20 and br.step2_quota_bound(4, 2) == 22
    assert br.perm_word_bound(4) == 2 * 4 * 2 + 16
    assert round(br.step2_length_bound(250, 2, 1)) == 1_064_507
