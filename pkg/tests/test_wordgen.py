from __future__ import annotations

import math
import random

import pytest

from bruhat_mslp.gf import field_of_order, make_field
from bruhat_mslp.matgroup import Matrix, Permutation, psi, standard_generators
from bruhat_mslp.mslp import evaluate
from bruhat_mslp.wordgen import (
    cycle_relabelling,
    diag_word,
    monomial_word,
    perm_inputs,
    perm_word,
    plan_diag_word,
    plan_perm_word,
    sift_cycle,
)

from conftest import random_monomial


def run_perm_word(pi: Permutation) -> tuple[Permutation, object]:
    prog, _ = perm_word(pi)
    d = pi.degree
    mem = perm_inputs(d) + [Permutation.identity(d)] * (prog.quota - 3)
    out = evaluate(prog, mem)
    return (out[0] if isinstance(out, list) else out), prog


def run_diag_word(exponents, F, d) -> tuple[Matrix, object]:
    prog, _ = diag_word(exponents, F, d)
    gens = standard_generators(d, F).as_list()
    one = Matrix.identity(F, d)
    mem = (gens + [one] * max(0, prog.quota - 10))[: prog.quota]
    out = evaluate(prog, mem)
    return (out[0] if isinstance(out, list) else out), prog


def random_perm(d: int, rng: random.Random) -> Permutation:
    images = list(range(1, d + 1))
    rng.shuffle(images)
    return Permutation(images)


# -- permutations ------------------------------------------------------------------------


def test_perm_inputs():
    s1, v1, v1_inv = perm_inputs(5)
    assert s1 == Permutation.from_cycles(5, (1, 2))
    assert v1 * v1_inv == Permutation.identity(5)
    assert v1 == sift_cycle(5, 1)


def test_sift_cycle_shape():
    assert sift_cycle(6, 2) == Permutation.from_cycles(6, (2, 6, 5, 4, 3))
    assert sift_cycle(6, 6) == Permutation.identity(6)


def test_identity_permutation_word_is_empty():
    plan = plan_perm_word(Permutation.identity(7))
    assert all(e == 0 for e in plan.exponents)
    out, prog = run_perm_word(Permutation.identity(7))
    assert prog.length == 0 and out == Permutation.identity(7)


def test_transposition_d3():
    pi = Permutation.from_cycles(3, (1, 2))
    out, _ = run_perm_word(pi)
    assert out == pi


def test_random_permutations_d5():
    rng = random.Random(11)
    for _ in range(50):
        pi = random_perm(5, rng)
        out, _ = run_perm_word(pi)
        assert out == pi


def test_all_permutations_small_degrees():
    import itertools

    for d in (3, 4, 5):
        for images in itertools.permutations(range(1, d + 1)):
            pi = Permutation(images)
            out, prog = run_perm_word(pi)
            assert out == pi
            assert prog.length <= 2 * d * math.log2(d) + 4 * d


@pytest.mark.parametrize("d", [8, 17, 33, 64])
def test_perm_word_bounds(d):
    rng = random.Random(d)
    for _ in range(10):
        pi = random_perm(d, rng)
        out, prog = run_perm_word(pi)
        assert out == pi
        assert prog.length <= 2 * d * math.log2(d) + 4 * d
        assert prog.quota <= 8


# -- diagonal matrices ---------------------------------------------------------------------


def test_zero_exponents_is_identity():
    F = make_field(5)
    out, prog = run_diag_word([0, 0, 0, 0], F, 4)
    assert prog.length == 0 and out == Matrix.identity(F, 4)


@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_delta_is_a_single_copy(d):
    F = make_field(5)
    ell = [1, F.q - 2] + [0] * (d - 2)
    out, prog = run_diag_word(ell, F, d)
    assert prog.length == 0
    assert prog.stats().copies == 1
    assert out == standard_generators(d, F).delta


def test_scalar_d4_q5():
    F = make_field(5)
    out, _ = run_diag_word([1, 1, 1, 1], F, 4)
    assert out == Matrix.diagonal(F, [2, 2, 2, 2])


def test_plan_rejects_det_not_one():
    with pytest.raises(ValueError):
        plan_diag_word([1, 0, 0], 5)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
@pytest.mark.parametrize("d", range(3, 9))
def test_random_diagonals(d, q):
    F = field_of_order(q)
    rng = random.Random(d * 100 + q)
    for _ in range(5):
        ell = [rng.randrange(q - 1) for _ in range(d - 1)]
        ell.append(-sum(ell) % (q - 1))
        out, prog = run_diag_word(ell, F, d)
        assert out == Matrix.diagonal(F, [F.omega_pow(e) for e in ell])
        bound = 2 * d * math.log2(d) + 2 * d * math.log2(q) + 3 * d
        assert prog.length <= bound
        assert prog.quota <= 15


def test_partial_sums():
    plan = plan_diag_word([1, 2, 3, 2], 5)
    # lambda_d is always 0 and is not stored
    assert list(plan.partial) == [1, 3, 2]


# -- monomial matrices ---------------------------------------------------------------------


def run_monomial_word(w: Matrix):
    prog, info = monomial_word(w)
    gens = standard_generators(w.d, w.field)
    mem = gens.memory(quota=max(prog.quota, 13))
    if prog.instructions:
        evaluate(prog, mem)
    return mem[10], prog, info


def test_identity_monomial_is_empty():
    F = make_field(5)
    out, prog, _ = run_monomial_word(Matrix.identity(F, 4))
    assert prog.length == 0 and out == Matrix.identity(F, 4)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_delta_monomial(d):
    F = make_field(7)
    delta = standard_generators(d, F).delta
    out, prog, _ = run_monomial_word(delta)
    assert out == delta
    assert prog.length == 0


def test_random_monomials_d3_q4():
    F = field_of_order(4)
    rng = random.Random(4)
    for _ in range(50):
        w = random_monomial(F, 3, rng)
        out, _, _ = run_monomial_word(w)
        assert out == w


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
@pytest.mark.parametrize("d", range(3, 10))
def test_random_monomials(d, q):
    F = field_of_order(q)
    rng = random.Random(d * 31 + q)
    for _ in range(4):
        w = random_monomial(F, d, rng)
        out, prog, _ = run_monomial_word(w)
        assert out == w
        assert prog.quota <= 20


@pytest.mark.parametrize("d", [4, 6, 8, 10])
def test_even_cycle_relabelling(d):
    G = standard_generators(d, make_field(3))
    z = psi(G.v * G.x)
    sigma = cycle_relabelling(z)
    # relabelling by sigma turns z into k -> k+1
    assert all(z(sigma(k)) == sigma(k % d + 1) for k in range(1, d + 1))
