from __future__ import annotations

import random

import numpy as np
import pytest

from bruhat_mslp.cli import random_sl
from bruhat_mslp.gf import GF, field_of_order
from bruhat_mslp.matgroup import Matrix, Permutation

ACCEPTANCE_LINES: list[str] = []


def naive_mul(F: GF, a, b):
    """Schoolbook product of nested lists over F; the oracle for Matrix.__mul__."""
    n = len(a)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(n):
                acc = F.add(acc, F.mul(a[i][k], b[k][j]))
            out[i][j] = acc
    return out


def naive_det(F: GF, a) -> int:
    """Determinant by cofactor-free Gaussian elimination over F."""
    m = [list(r) for r in a]
    n = len(m)
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = F.neg(det)
        det = F.mul(det, m[c][c])
        inv = F.inv(m[c][c])
        for r in range(c + 1, n):
            if m[r][c]:
                k = F.mul(m[r][c], inv)
                m[r] = [F.sub(x, F.mul(k, y)) for x, y in zip(m[r], m[c])]
    return det


def random_monomial(F: GF, d: int, rng: random.Random) -> Matrix:
    """Random monomial matrix of determinant 1."""
    images = list(range(1, d + 1))
    rng.shuffle(images)
    pi = Permutation(images)
    a = [[0] * d for _ in range(d)]
    for i in range(d):
        a[i][pi(i + 1) - 1] = rng.randrange(1, F.q)
    m = Matrix.from_entries(F, a)
    det = m.det()
    r = 0
    a[r][pi(r + 1) - 1] = F.mul(a[r][pi(r + 1) - 1], F.inv(det))
    return Matrix.from_entries(F, a)


def sl_sample(d: int, q: int, seed: int, count: int) -> list[Matrix]:
    rng = np.random.default_rng(seed)
    return [random_sl(d, q, rng) for _ in range(count)]


@pytest.fixture
def field():
    return field_of_order


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
