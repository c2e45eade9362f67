import itertools
from functools import reduce
from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st

from todabracket.exactlin import (FieldMatrix, IntMatrix, NoSolution, Subquotient,
                                  abelian_subquotient, integer_kernel, kernel_mod,
                                  rank_gf2_dense, rank_kernel_image, rank_mod, rref, smith_normal_form,
                                  solve, solve_mod, matmul_mod)


def matrices(p, max_rows=5, max_cols=6):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: st.lists(st.integers(0, p - 1), min_size=s[0] * s[1], max_size=s[0] * s[1])
        .map(lambda xs: np.array(xs, dtype=np.int64).reshape(s)))


def brute_kernel_size(a, p):
    n = a.shape[1]
    return sum(1 for x in itertools.product(range(p), repeat=n)
               if not np.any(a @ np.array(x) % p))


def determinantal_divisors(rows):
    """d_k = gcd of k x k minors; the invariant factors are d_k / d_{k-1}."""
    m, n = len(rows), len(rows[0])
    out, prev = [], 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for I in itertools.combinations(range(m), k):
            for J in itertools.combinations(range(n), k):
                g = gcd(g, IntMatrix([[rows[i][j] for j in J] for i in I]).determinant())
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def test_identity_rank():
    r, K, _ = rank_kernel_image(FieldMatrix.identity(2, 3))
    assert r == 3 and K.cols == 0


def test_zero_rank():
    r, K, _ = rank_kernel_image(FieldMatrix.zeros(3, 2, 5))
    assert r == 0 and K.cols == 5


def test_all_ones():
    r, K, img = rank_kernel_image(FieldMatrix(2, [[1, 1], [1, 1]]))
    assert r == 1
    assert K.entries.T.tolist() == [[1, 1]]
    assert img.cols == 1


def test_solve_identity_and_zero():
    b = np.array([1, 2, 0])
    assert list(solve(FieldMatrix.identity(3, 3), b)) == [1, 2, 0]
    assert solve(FieldMatrix.zeros(3, 3, 3), b) is NoSolution


def test_solve_tie_break():
    # both (1, 0) and (0, 1) solve; free variables are set to zero
    assert list(solve(FieldMatrix(2, [[1, 1]]), [1])) == [1, 0]


def test_smith_examples():
    assert smith_normal_form(IntMatrix([[2, 0], [0, 4]]))[0] == [2, 4]
    assert smith_normal_form(IntMatrix([[2, 0], [0, 3]]))[0] == [1, 6]
    assert smith_normal_form(IntMatrix([[0, 0], [0, 0]]))[0] == []


def test_no_solution_is_falsy_singleton():
    assert not NoSolution
    assert NoSolution is type(NoSolution)()


@given(st.sampled_from([2, 3, 5]).flatmap(lambda p: st.tuples(st.just(p), matrices(p))))
def test_rank_transpose(pm):
    p, a = pm
    assert rank_mod(a, p) == rank_mod(a.T, p)


@given(st.sampled_from([2, 3]).flatmap(lambda p: st.tuples(st.just(p), matrices(p, 4, 5))))
def test_kernel_against_enumeration(pm):
    p, a = pm
    K = kernel_mod(a, p)
    assert not np.any(a @ K % p)
    assert rank_mod(K, p) == K.shape[1]
    assert p ** K.shape[1] == brute_kernel_size(a, p)


@given(st.sampled_from([2, 3, 7]).flatmap(
    lambda p: st.tuples(st.just(p), matrices(p), st.data())))
def test_solve_consistent(pmd):
    p, a, data = pmd
    x = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=a.shape[1],
                                    max_size=a.shape[1])))
    b = a @ x % p
    y = solve_mod(a, b, p)
    assert y is not NoSolution
    assert np.array_equal(a @ y % p, b)


@given(st.integers(1, 4).flatmap(lambda n: st.lists(
    st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=1, max_size=4)))
def test_smith_against_minors(rows):
    diag, U, V = smith_normal_form(IntMatrix(rows))
    assert diag == determinantal_divisors(rows)
    D = U @ IntMatrix(rows) @ V
    for i in range(D.rows):
        for j in range(D.cols):
            want = diag[i] if i == j and i < len(diag) else 0
            assert abs(D.data[i][j]) == abs(want)
    assert abs(U.determinant()) == 1 and abs(V.determinant()) == 1
    for a, b in zip(diag, diag[1:]):
        assert b % a == 0


@given(st.integers(1, 4).flatmap(lambda n: st.lists(
    st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_smith_product_is_determinant(rows):
    det = IntMatrix(rows).determinant()
    diag = smith_normal_form(IntMatrix(rows))[0]
    if det != 0:
        assert reduce(lambda x, y: x * y, diag, 1) == abs(det)


@given(st.lists(st.lists(st.integers(-4, 4), min_size=4, max_size=4), min_size=1, max_size=3))
def test_integer_kernel(rows):
    K = integer_kernel(rows, 4)
    for v in K:
        assert all(sum(r[i] * v[i] for i in range(4)) == 0 for r in rows)
    rk = len(smith_normal_form(IntMatrix(rows))[0])
    assert len(K) == 4 - rk


def test_abelian_subquotient():
    # Z^2 / <(2, 0), (0, 3)> = Z/2 + Z/3 = Z/6
    assert abelian_subquotient([[1, 0], [0, 1]], [[2, 0], [0, 3]], 2) == [6]
    assert abelian_subquotient([[1, 0], [0, 1]], [[2, 0]], 2) == [2, 0]
    assert abelian_subquotient([[1, 0]], [], 2) == [0]


def test_subquotient_coordinates():
    Z = np.eye(3, dtype=np.int64)
    B = np.array([[1], [1], [0]])
    sq = Subquotient(Z, B, 2)
    assert sq.dim == 2
    assert sq.is_zero(np.array([1, 1, 0]))
    assert not sq.is_zero(np.array([1, 0, 0]))
    with pytest.raises(ValueError):
        Subquotient(np.array([[1], [0], [0]]), np.zeros((3, 0)), 2).coords(np.array([0, 1, 0]))


@given(matrices(2, 80, 80))
def test_gf2_fast_rank_matches(a):
    assert rank_gf2_dense(a) == len(rref(a, 2)[1])


def test_field_matrix_immutable():
    m = FieldMatrix(3, [[1, 2], [4, 5]])
    assert m.entries.tolist() == [[1, 2], [1, 2]]
    with pytest.raises(AttributeError):
        m.p = 5
    with pytest.raises(ValueError):
        m.entries[0, 0] = 2
    with pytest.raises(ValueError):
        FieldMatrix(4, [[1]])


@given(st.sampled_from([2, 3, 7, 1000003, 2 ** 31 - 1]), st.integers(0, 10 ** 6))
def test_matmul_mod_exact(p, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, p, size=(5, 40))
    b = rng.integers(0, p, size=(40, 3))
    ref = np.array([[sum(int(a[i, k]) * int(b[k, j]) for k in range(40)) % p for j in range(3)]
                    for i in range(5)])
    assert np.array_equal(matmul_mod(a, b, p), ref)
