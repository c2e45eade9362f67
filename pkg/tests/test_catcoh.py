import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from todabracket.catcoh import (CategoryComplex, FiniteCategory, FiniteRing, InfiniteCochainSpace,
                                RingBimodule, coboundary, cohomology_of_category,
                                constant_bimodule, cyclic_group_table, free_module_category,
                                graded_restriction, group_category, group_cohomology_bar,
                                group_module_bimodule, hom_bimodule, matrix_bimodule,
                                random_cochain, random_pointed_category, restrict_to_group,
                                truncated_HML, Bimodule, category_from_monoid)
from todabracket.graded import DegreeWindow, laurent_ring, ring_from_table


def permutation_group_table(n):
    perms = list(itertools.permutations(range(n)))
    pos = {g: i for i, g in enumerate(perms)}
    return [[pos[tuple(g[h[i]] for i in range(n))] for h in perms] for g in perms]


def identity_category(k):
    ident = list(range(k))
    comp = -np.ones((k, k), dtype=np.int64)
    for i in range(k):
        comp[i, i] = i
    return FiniteCategory(range(k), ident, ident, comp, ident)


def doubled_group_category(table):
    """Two isomorphic objects with Hom(i, j) = G for all i, j: equivalent to BG."""
    T = np.asarray(table)
    G = T.shape[0]
    e = [a for a in range(G) if all(T[a, b] == b for b in range(G))][0]
    mor = [(i, j, g) for i in range(2) for j in range(2) for g in range(G)]
    idx = {m: n for n, m in enumerate(mor)}
    comp = -np.ones((len(mor), len(mor)), dtype=np.int64)
    for (i1, j1, g1), f in idx.items():
        for (i2, j2, g2), g in idx.items():
            if j2 == i1:
                comp[f, g] = idx[(i2, j1, int(T[g1, g2]))]
    return FiniteCategory([0, 1], [m[0] for m in mor], [m[1] for m in mor], comp,
                          [idx[(0, 0, e)], idx[(1, 1, e)]])


def test_identity_only_category():
    C = identity_category(3)
    D = constant_bimodule(C, [0])
    assert cohomology_of_category(C, D, 0) == [0, 0, 0]
    for n in (1, 2, 3):
        assert cohomology_of_category(C, D, n) == []
    c = random_cochain(C, D, 0, np.random.default_rng(0))
    assert coboundary(c).is_zero()


def test_coboundary_on_two_element_monoid():
    # End(F_2) = {0, 1} with Hom coefficients; c(0) = 0, c(1) = 1
    C = free_module_category(FiniteRing.prime_field(2), 1)
    D = hom_bimodule(C)
    X = 1
    zero = [f for f in C.hom(X, X) if not np.any(C.matrices[f])][0]
    one = C.identities[X]
    vals = {(zero,): np.array([0]), (one,): np.array([1])}
    from todabracket.catcoh import CategoryCochain
    c = CategoryCochain(C, D, 1, vals)
    dc = coboundary(c)
    for g1, g2 in itertools.product((zero, one), repeat=2):
        expect = (int(C.matrices[g1][0, 0, 0]) * int(vals[(g2,)][0]) - int(vals[(C.compose(g1, g2),)][0])
                  + int(vals[(g1,)][0]) * int(C.matrices[g2][0, 0, 0])) % 2
        assert int(dc(g1, g2)[0]) == expect


def test_bz2_third_cohomology():
    T = cyclic_group_table(2)
    C = group_category(T)
    assert cohomology_of_category(C, constant_bimodule(C, [2]), 3) == [2]
    assert group_cohomology_bar(T, 3, 2) == [2]
    # integral coefficients: H^3(Z/2; Z) = 0 and H^2 = Z/2
    Dz = constant_bimodule(C, [0])
    assert cohomology_of_category(C, Dz, 2) == [2]
    assert cohomology_of_category(C, Dz, 3) == []


@pytest.mark.parametrize("n,p", [(3, 3), (4, 2), (3, 2)])
def test_group_cohomology_against_bar(n, p):
    T = cyclic_group_table(n)
    C = group_category(T)
    for k in range(4):
        assert cohomology_of_category(C, constant_bimodule(C, [p]), k) == group_cohomology_bar(T, k, p)


def test_undeclared_group_is_infinite():
    C = identity_category(2)
    D = Bimodule(C, {(0, 0): [2], (1, 1): [2]}, lambda h, X: np.eye(1), lambda g, Y: np.eye(1),
                 check=False)
    with pytest.raises(InfiniteCochainSpace):
        cohomology_of_category(C, D, 1)


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 3))
def test_coboundary_squares_to_zero(seed, n):
    rng = np.random.default_rng(seed)
    C = random_pointed_category(rng, k=2, p=2, max_size=8)
    D = matrix_bimodule(C)
    mode = ["full", "normalized"][seed % 2]
    c = random_cochain(C, D, n, rng, mode=mode)
    assert coboundary(coboundary(c, mode), mode).is_zero()


@given(st.integers(0, 10 ** 6))
def test_coboundary_squares_to_zero_integral(seed):
    rng = np.random.default_rng(seed)
    C = group_category(permutation_group_table(3))
    D = constant_bimodule(C, [0, 4])
    c = random_cochain(C, D, int(rng.integers(0, 3)), rng)
    assert coboundary(coboundary(c)).is_zero()


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32 - 1))
def test_normalized_agrees_with_full(seed):
    rng = np.random.default_rng(seed)
    C = random_pointed_category(rng, k=2, p=2, max_size=6)
    D = matrix_bimodule(C)
    for n in range(3):
        assert cohomology_of_category(C, D, n, mode="full") == \
            cohomology_of_category(C, D, n, mode="normalized")


def test_hom_coefficients_normalized_and_full():
    C = free_module_category(FiniteRing.prime_field(2), 1)
    D = hom_bimodule(C)
    for n in range(4):
        assert cohomology_of_category(C, D, n, mode="full") == \
            cohomology_of_category(C, D, n, mode="normalized")


def test_restriction_to_group():
    T = permutation_group_table(3)
    C = group_category(T)
    D = group_module_bimodule(C, [3], lambda g: np.array([[1 if g in (0, 3, 4) else -1]]))
    r = restrict_to_group(C, D, 0)
    for n in range(4):
        assert r.commutes(n, 3)
        assert r.is_isomorphism(n, 3)
    # the identity 0-cochain goes to the identity bar cochain
    assert np.array_equal(r.matrix(0) % 3, np.eye(1))


def test_restriction_on_gl2():
    C = free_module_category(FiniteRing.prime_field(2), 2)
    D = hom_bimodule(C)
    r = restrict_to_group(C, D, 2)
    assert len(r.auts) == 6
    for n in range(3):
        assert r.commutes(n, 2)
    # a category 2-cocycle on Aut(X) maps to a bar 2-cocycle
    rng = np.random.default_rng(1)
    d1, d2 = r.category_differential(1) % 2, r.category_differential(2) % 2
    c = d1 @ rng.integers(0, 2, size=d1.shape[1]) % 2
    assert not np.any(d2 @ c % 2)
    assert not np.any(r.bar.differential(2) @ (r.matrix(2) @ c) % 2)


def test_truncated_hml_small():
    F2 = FiniteRing.prime_field(2)
    assert truncated_HML(F2, 0, 1)["invariants"] == [2]
    for s in (1, 2, 3):
        assert truncated_HML(FiniteRing.zero(), s, 2)["invariants"] == []
    assert truncated_HML(F2, 2, 2)["q"] == 2


@pytest.mark.parametrize("q,s", [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2)])
def test_constant_summand_cancels(q, s):
    F2 = FiniteRing.prime_field(2)
    assert truncated_HML(F2, s, q)["invariants"] == \
        truncated_HML(F2, s, q, extra_source=1)["invariants"]


def test_graded_restriction_laurent():
    R = laurent_ring(2, 2, DegreeWindow(-8, 8))
    r = graded_restriction(R, 2, 1, 3)
    assert r["agree"]


def test_graded_restriction_needs_central_unit():
    with pytest.raises(ValueError):
        graded_restriction(laurent_ring(3, 1, DegreeWindow(-6, 6)), 1, 1, 1)
    with pytest.raises(ValueError):
        graded_restriction(ring_from_table(2, ["1"], [0], {}), 2, 1, 1)


def test_isomorphic_relabelling():
    rng = np.random.default_rng(7)
    C = random_pointed_category(rng, k=2, p=2, max_size=8)
    perm = rng.permutation(C.num_morphisms)
    inv = np.argsort(perm)
    comp = -np.ones_like(C.comp)
    for f in range(C.num_morphisms):
        for g in range(C.num_morphisms):
            if C.comp[f, g] >= 0:
                comp[inv[f], inv[g]] = inv[C.comp[f, g]]
    C2 = FiniteCategory(C.objects, C.sources[perm], C.targets[perm], comp,
                        [int(inv[i]) for i in C.identities])
    for n in range(3):
        assert cohomology_of_category(C, constant_bimodule(C, [2]), n) == \
            cohomology_of_category(C2, constant_bimodule(C2, [2]), n)


@pytest.mark.parametrize("table", [cyclic_group_table(2), cyclic_group_table(3)])
def test_equivalent_categories(table):
    B = group_category(table)
    B2 = doubled_group_category(table)
    for p in (2, 3):
        for n in range(4):
            assert cohomology_of_category(B, constant_bimodule(B, [p]), n) == \
                cohomology_of_category(B2, constant_bimodule(B2, [p]), n)
