import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from todabracket.ainf import HochschildComplex, matric_extension, universal_class
from todabracket.dga import cohomology, heisenberg_dga
from todabracket.exactlin import NoSolution, kernel_mod, solve_mod
from todabracket.extcup import (KernelObject, canonical_resolution, class_pushforward,
                                cup_product, cup_sign, ext_group, random_resolution,
                                yoneda_class)
from todabracket.graded import (GradedMap, element_of_free, free_map_from_matrix, free_module,
                                quotient_module, residue_module, ring_from_table,
                                truncated_polynomial_ring)


_UNIVERSAL = {}


def heis(p):
    if p not in _UNIVERSAL:
        m, _ = universal_class(heisenberg_dga(p), 1)
        _UNIVERSAL[p] = m
    m = _UNIVERSAL[p]
    return m.H, m


def modules(H):
    """The bundled test modules over H: H/[x]H, H/([x], [y])H and the residue field."""
    x, y = H.element("[x]"), H.element("[y]")
    Mx = quotient_module(H, [0], [x])
    Mxy = quotient_module(H, [0], [x, y])
    return {"Mx": Mx, "Mxy": Mxy, "k": (residue_module(H), None, None)}


def hom_basis(Mq, N, t=0):
    """Degree t maps out of a cyclic-free quotient Q = F/S into N, as GradedMaps."""
    Q, F, proj = Mq
    p = Q.p
    slots = []
    for j, g in enumerate(F.gens):
        slots.extend((j, i) for i in N.basis_in_degree(g + t))
    if not slots:
        return []
    # relations: generator images must send ker(proj) to zero
    K = kernel_mod(proj, p)
    cond, maps = [], []
    for j, i in slots:
        imgs = [np.zeros(N.dim, dtype=np.int64) for _ in F.gens]
        imgs[j][i] = 1
        f = GradedMap.from_images(F, N, imgs, t)
        maps.append(f)
        cond.append((f.matrix @ K % p).ravel())
    C = np.array(cond, dtype=np.int64).T
    out = []
    for v in kernel_mod(C, p).T:
        fF = sum((m.scale(int(c)) for m, c in zip(maps, v)), GradedMap.zero(F, N, t))
        G = solve_mod(proj.T % p, fF.matrix.T % p, p)
        assert G is not NoSolution
        out.append(GradedMap(Q, N, t, G.T % p))
    return out


def module_map(Mq, N, coeffs):
    basis = hom_basis(Mq, N)
    f = GradedMap.zero(Mq[0], N)
    for b, c in zip(basis, coeffs):
        f = f + b.scale(int(c))
    return f


# -- Ext groups

def test_ext_zero_is_hom():
    H, _ = heis(2)
    mods = modules(H)
    Mq = mods["Mx"]
    for name in ("Mx", "Mxy"):
        N = mods[name][0]
        for t in (0, 1, 2):
            assert ext_group(Mq[0], N, 0, t).dim == len(hom_basis(Mq, N, t))


def test_ext_over_a_field_vanishes():
    F = ring_from_table(3, ["1"], [0], {})
    M = free_module(F, [0, 2])
    for s in (1, 2):
        for t in range(-3, 4):
            assert ext_group(M, M, s, t).dim == 0
    assert ext_group(M, M, 0, 0).dim == 2


def test_ext_over_dual_numbers():
    R = truncated_polynomial_ring(2, 1, 1)
    k = residue_module(R)
    for s in range(5):
        assert ext_group(k, k, s, -s).dim == 1
        assert ext_group(k, k, s, 1 - s).dim == 0


def test_yoneda_class_of_resolution_is_in_normal_form():
    H, _ = heis(2)
    M = modules(H)["Mx"][0]
    Q = canonical_resolution(M, 3)
    K = KernelObject(Q.maps[1])
    psi = yoneda_class([Q.maps[0], Q.maps[1], K.inclusion])
    assert psi.s == 2 and psi.t == 0
    assert not psi.is_zero()


# -- the cup product

@pytest.mark.parametrize("p", [2, 3])
def test_cup_with_zero_inputs(p):
    H, m = heis(p)
    Mq = modules(H)["Mx"]
    M = Mq[0]
    assert cup_product(GradedMap.identity(M), matric_extension(m.scale(0))).is_zero()
    assert cup_product(GradedMap.zero(M, M), matric_extension(m)).is_zero()


def test_cup_sign():
    assert [cup_sign(n) for n in range(1, 6)] == [1, -1, -1, 1, 1]


def test_identity_cup_heisenberg():
    H, m = heis(2)
    M = modules(H)["Mx"][0]
    y = cup_product(GradedMap.identity(M), matric_extension(m))
    assert (y.s, y.t) == (3, -1)
    assert y.ext.dim == 8
    assert not y.is_zero()
    # on the residue field Ext^{3,-1} vanishes
    k = residue_module(H)
    assert cup_product(GradedMap.identity(k), matric_extension(m)).ext.dim == 0


@settings(max_examples=15)
@given(st.sampled_from([2, 3]), st.integers(0, 10 ** 6))
def test_independent_of_cocycle(p, seed):
    rng = np.random.default_rng(seed)
    H, m = heis(p)
    M = modules(H)["Mx"][0]
    C = HochschildComplex(H, -1)
    b = C.cochain(rng.integers(0, p, size=len(C.basis(2))), 2)
    D = C.differential(2)
    m2 = C.cochain((C.vector(m) + D @ C.vector(b)) % p, 3)
    f = GradedMap.identity(M)
    assert cup_product(f, matric_extension(m2)) == cup_product(f, matric_extension(m))


@settings(max_examples=15)
@given(st.sampled_from([2, 3]), st.sampled_from(["Mx", "Mxy"]), st.integers(0, 10 ** 6))
def test_independent_of_resolution(p, name, seed):
    rng = np.random.default_rng(seed)
    H, m = heis(p)
    M = modules(H)[name][0]
    R = random_resolution(M, 3, rng, extra=int(rng.integers(1, 3)))
    R.verify()
    f = GradedMap.identity(M)
    c = matric_extension(m)
    assert cup_product(f, c, resolution=R) == cup_product(f, c)


@settings(max_examples=15)
@given(st.sampled_from([2, 3]), st.integers(0, 10 ** 6))
def test_bilinear_and_natural(p, seed):
    rng = np.random.default_rng(seed)
    H, m = heis(p)
    mods = modules(H)
    Mq, Nq = mods["Mx"], mods["Mxy"]
    M, N = Mq[0], Nq[0]
    c = matric_extension(m)
    nb = len(hom_basis(Mq, N))
    f1 = module_map(Mq, N, rng.integers(0, p, size=nb))
    f2 = module_map(Mq, N, rng.integers(0, p, size=nb))
    a = int(rng.integers(0, p))
    lhs = cup_product(f1 + f2.scale(a), c)
    assert lhs == cup_product(f1, c) + cup_product(f2, c).scale(a)
    # naturality along g : N -> k
    k = mods["k"][0]
    g = module_map(Nq, k, [1])
    assert cup_product(g.compose(f1), c) == class_pushforward(g, cup_product(f1, c))
    # linearity in the cocycle
    assert cup_product(f1, matric_extension(m.scale(a))) == cup_product(f1, c).scale(a)


# -- pushforward

def _kernel_sequence(M, s):
    Q = canonical_resolution(M, s + 1)
    K = KernelObject(Q.maps[s - 1])
    maps = [Q.maps[i] for i in range(s)] + [K.inclusion]
    return Q, K, maps


@pytest.mark.parametrize("p", [2, 3])
def test_pushforward_identity_and_zero(p):
    H, _ = heis(p)
    M = modules(H)["Mx"][0]
    Q, K, maps = _kernel_sequence(M, 2)
    psi = yoneda_class(maps)
    Kmod = K.module
    assert class_pushforward(GradedMap.identity(Kmod), psi) == psi
    assert class_pushforward(GradedMap.zero(Kmod, Kmod), psi).is_zero()


@settings(max_examples=15)
@given(st.sampled_from([2, 3]), st.integers(0, 10 ** 6))
def test_pushforward_ignores_maps_through_the_free_term(p, seed):
    rng = np.random.default_rng(seed)
    H, _ = heis(p)
    M = modules(H)["Mxy"][0]
    Q, K, maps = _kernel_sequence(M, 2)
    psi = yoneda_class(maps)
    Kmod = K.module
    P = Q.modules[1]
    imgs = []
    for g in P.gens:
        v = np.zeros(Kmod.dim, dtype=np.int64)
        idx = Kmod.basis_in_degree(g)
        v[idx] = rng.integers(0, p, size=len(idx))
        imgs.append(v)
    h = GradedMap.from_images(P, Kmod, imgs)
    f = GradedMap.identity(Kmod)
    assert class_pushforward(f + h.compose(K.inclusion), psi) == class_pushforward(f, psi)


@settings(max_examples=10)
@given(st.sampled_from([2, 3]), st.integers(0, 10 ** 6))
def test_splice_with_split_sequence(p, seed):
    # add F --id--> F at spots i + 1 -> i of the kernel sequence
    rng = np.random.default_rng(seed)
    H, _ = heis(p)
    M = modules(H)["Mx"][0]
    s = 3
    Q, K, maps = _kernel_sequence(M, s)
    psi = yoneda_class(maps)
    i = int(rng.integers(0, s - 1))
    mods = [Q.modules[j] for j in range(s)]
    g = int(rng.choice(mods[i].gens))
    new = list(mods)
    new[i] = free_module(H, list(mods[i].gens) + [g])
    new[i + 1] = free_module(H, list(mods[i + 1].gens) + [g])
    for j in (i, i + 1):
        assert new[j]._layout[:mods[j].dim] == mods[j]._layout

    def pad(f, src, tgt):
        A = np.zeros((tgt.dim, src.dim), dtype=np.int64)
        A[:f.matrix.shape[0], :f.matrix.shape[1]] = f.matrix
        return A

    seq = []
    for j, f in enumerate(maps):
        src = new[j] if j < s else K.module
        tgt = new[j - 1] if j >= 1 else M
        A = pad(f, src, tgt)
        if j == i + 1:
            A[mods[i].dim:, mods[i + 1].dim:] = np.eye(new[i].dim - mods[i].dim, dtype=np.int64)
        seq.append(GradedMap(src, tgt, 0, A))
    assert yoneda_class(seq) == psi
