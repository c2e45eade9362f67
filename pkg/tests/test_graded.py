import numpy as np
import pytest
from hypothesis import given, strategies as st

from todabracket.dga import cohomology, heisenberg_dga
from todabracket.graded import (DegreeWindow, GradedMap, GradedModule, NotSparse,
                                WindowExhausted, build_ko_ring, element_of_free,
                                free_map_entries, free_map_from_matrix, free_module,
                                free_resolution, laurent_ring, quotient_module, residue_module,
                                ring_coefficients, truncated_polynomial_ring)


def dual():
    return truncated_polynomial_ring(2, 1, 1)


def test_ko_components():
    R = build_ko_ring(DegreeWindow(-8, 16))
    assert R.component(0) == [0]
    assert R.component(1) == [2]
    assert R.component(2) == [2]
    assert R.component(3) == []
    assert R.component(4) == [0]
    eta, eta2 = R.element("eta"), R.element("eta^2")
    assert list(R.mul(eta, eta)) == list(eta2)
    assert not any(R.mul(eta, eta2))
    assert not any(R.reduce(2 * eta))
    # omega^2 = 4 beta
    w = R.element("omega")
    assert R.mul(w, w)[R.labels.index("beta")] == 4
    assert R.check()


def test_ko_window_must_contain_low_degrees():
    with pytest.raises(ValueError):
        build_ko_ring(DegreeWindow(3, 10))


def test_window_parse_and_shrink():
    w = DegreeWindow.parse("-3..5")
    assert (w.lo, w.hi) == (-3, 5)
    assert w.shrink(2) == DegreeWindow(-1, 3)
    with pytest.raises(WindowExhausted):
        w.shrink(5)
    with pytest.raises(ValueError):
        DegreeWindow(2, 1)


def test_free_module_resolution_is_trivial():
    R = dual()
    F = free_module(R, [0, 2])
    Q = free_resolution(F, 3)
    assert Q.modules[0].gens == [0, 2]
    assert np.array_equal(Q.maps[0].matrix, np.eye(F.dim, dtype=np.int64))
    assert all(P.dim == 0 for P in Q.modules[1:])


def test_zero_module_resolution():
    R = dual()
    Z = GradedModule(R, [], np.zeros((0, R.dim, 0)))
    Q = free_resolution(Z, 3)
    assert Q.length == 3 and all(P.dim == 0 for P in Q.modules)
    Q.verify()


def test_dual_numbers_residue_resolution():
    R = dual()
    Q = free_resolution(residue_module(R), 5)
    x = R.element("x")
    for s in range(1, 6):
        assert Q.modules[s].gens == [s]
        e = free_map_entries(Q.maps[s])
        assert len(e) == 1 and np.array_equal(e[0][0], x)
    assert Q.verify()


def test_truncated_laurent_resolution_exhausts():
    R = laurent_ring(2, 2, DegreeWindow(-2, 2))
    with pytest.raises(WindowExhausted):
        free_resolution(free_module(R, [0]), 3)


def test_declared_sparse_ring_checked():
    with pytest.raises(NotSparse):
        from todabracket.graded import GradedRing
        GradedRing(2, [0, 1], np.zeros((2, 2, 2)), [1, 0], sparse_period=2)


def test_bad_module_rejected():
    R = dual()
    act = np.zeros((1, 2, 1), dtype=np.int64)
    with pytest.raises(ValueError):
        GradedModule(R, [0], act)          # unit acts as zero


# -- random modules and maps

def heis_ring():
    return cohomology(heisenberg_dga(2))


RINGS = {"dual": dual, "cube": lambda: truncated_polynomial_ring(3, 1, 2),
         "heis": heis_ring}


@st.composite
def quotients(draw):
    R = RINGS[draw(st.sampled_from(sorted(RINGS)))]()
    k = draw(st.integers(1, 2))
    gens = sorted(draw(st.lists(st.integers(0, 1), min_size=k, max_size=k)))
    F = free_module(R, gens)
    rels = []
    for _ in range(draw(st.integers(0, 2))):
        d = draw(st.sampled_from(F.support()))
        idx = F.basis_in_degree(d)
        v = np.zeros(F.dim, dtype=np.int64)
        v[idx] = draw(st.lists(st.integers(0, R.p - 1), min_size=len(idx), max_size=len(idx)))
        rels.append(v)
    Q, _, _ = quotient_module(R, gens, rels)
    return Q


@given(quotients())
def test_resolutions_exact(M):
    Q = free_resolution(M, 3)
    assert Q.verify()
    for i in range(1, Q.length + 1):
        assert not np.any(Q.maps[i - 1].matrix @ Q.maps[i].matrix % M.p)


@given(quotients())
def test_resolution_deterministic(M):
    a, b = free_resolution(M, 2), free_resolution(M, 2)
    for f, g in zip(a.maps, b.maps):
        assert np.array_equal(f.matrix, g.matrix)


@st.composite
def free_maps(draw, R=None):
    R = R or RINGS[draw(st.sampled_from(sorted(RINGS)))]()
    a = draw(st.lists(st.integers(0, 2), min_size=1, max_size=2))
    b = draw(st.lists(st.integers(0, 2), min_size=1, max_size=2))
    F, G = free_module(R, a), free_module(R, b)
    t = draw(st.integers(-1, 1))
    imgs = []
    for g in a:
        idx = G.basis_in_degree(g + t)
        v = np.zeros(G.dim, dtype=np.int64)
        if len(idx):
            v[idx] = draw(st.lists(st.integers(0, R.p - 1), min_size=len(idx), max_size=len(idx)))
        imgs.append(v)
    return GradedMap.from_images(F, G, imgs, degree=t, check=True)


@given(st.data())
def test_composition_degrees_and_matrices(data):
    R = RINGS[data.draw(st.sampled_from(sorted(RINGS)))]()
    f = data.draw(free_maps(R))
    G = f.target
    t = data.draw(st.integers(-1, 1))
    H = free_module(R, data.draw(st.lists(st.integers(0, 2), min_size=1, max_size=2)))
    imgs = []
    for g in G.gens:
        idx = H.basis_in_degree(g + t)
        v = np.zeros(H.dim, dtype=np.int64)
        if len(idx):
            v[idx] = data.draw(st.lists(st.integers(0, R.p - 1), min_size=len(idx),
                                        max_size=len(idx)))
        imgs.append(v)
    g = GradedMap.from_images(G, H, imgs, degree=t, check=True)
    h = g.compose(f)
    assert h.degree == f.degree + g.degree
    assert np.array_equal(h.matrix, g.matrix @ f.matrix % R.p)
    h.check()


@given(free_maps(), st.integers(-2, 2))
def test_shift_round_trip(f, i):
    # f : M -> N of degree t is a degree zero map M -> N[t]; shifting both
    # sides by i keeps the matrix and the linearity
    M, N = f.source, f.target
    g = GradedMap(M.shift(-i), N.shift(-i), f.degree, f.matrix)
    back = GradedMap(g.source.shift(i), g.target.shift(i), g.degree, g.matrix)
    assert np.array_equal(back.matrix, f.matrix)
    assert np.array_equal(back.source.degrees, M.degrees)
    h = GradedMap(M, N.shift(f.degree), 0, f.matrix)
    h.check()


@given(free_maps())
def test_entries_round_trip(f):
    e = free_map_entries(f)
    g = free_map_from_matrix(f.source, f.target, e, degree=f.degree)
    assert np.array_equal(g.matrix, f.matrix)


def test_element_of_free_round_trip():
    R = heis_ring()
    F = free_module(R, [0, 1])
    c = [R.element("[x]"), R.element("[1]")]
    v = element_of_free(F, c)
    back = ring_coefficients(F, v)
    assert all(np.array_equal(a, b) for a, b in zip(c, back))
