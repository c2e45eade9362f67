"""
Homotopy transfer of the dga structure to an A-infinity structure on H^*(A),
Hochschild cochains of H^*(A), and the class of m_{n+2} for n-sparse H.

Two sign conventions appear.  Operations are stored in the usual form
m_k of degree 2 - k, with Stasheff relations

    sum_{r+s+t=N} (-1)^{r+st} m_{r+1+t}(1^r (x) m_s (x) 1^t) = 0

(Koszul signs for m_s of degree 2 - s passing the first r inputs).  The
transfer itself is run in bar form, on suspended inputs, where every
operation has degree +1, the product becomes b_2(u, v) = (-1)^{|u|+1} uv
and the tree formula has no signs.  The two forms are related by

    m_k(a_1, ..., a_k) = (-1)^{k(k-1)/2 + sum_i (k-i)|a_i|} b_k(a_1, ..., a_k).
"""

import itertools
import string

import numpy as np

from .exactlin import NoSolution, solve_mod, kernel_mod
from .dga import cohomology, contraction, Contraction, ContractionInvalid
from .graded import NotSparse, WindowExhausted


def _letters(n, skip=""):
    pool = [c for c in string.ascii_letters if c not in skip]
    return pool[:n]


def suspension_signs(degrees, k):
    """The sign tensor relating an arity k operation to its bar form."""
    degrees = np.asarray(degrees, dtype=np.int64)
    s = np.full((len(degrees),) * k, (-1) ** (k * (k - 1) // 2 % 2), dtype=np.int64)
    for i in range(k):
        v = np.where(((k - 1 - i) * degrees) % 2, -1, 1)
        shape = [1] * k
        shape[i] = len(degrees)
        s = s * v.reshape(shape)
    return s


def _prefix_sign(degrees, k, r, weight):
    """(-1)^{weight * sum_{i<r} deg[a_i]} as a tensor over k inputs."""
    degrees = np.asarray(degrees, dtype=np.int64)
    s = np.ones((len(degrees),) * k, dtype=np.int64)
    if weight % 2 == 0:
        return s
    v = np.where(degrees % 2, -1, 1)
    for i in range(r):
        shape = [1] * k
        shape[i] = len(degrees)
        s = s * v.reshape(shape)
    return s


def insert(outer, r, inner, ku, ks):
    """outer(1^r (x) inner (x) 1^t) as a tensor, no signs.

    outer has ku inputs, inner has ks inputs; the result has ku + ks - 1.
    """
    N = ku + ks - 1
    L = _letters(N, skip="yz")
    inner_idx = "".join(L[r:r + ks]) + "y"
    outer_idx = "".join(L[:r]) + "y" + "".join(L[r + ks:]) + "z"
    return np.einsum("%s,%s->%sz" % (inner_idx, outer_idx, "".join(L)), inner, outer)


def to_bar(tensor, degrees, k):
    return tensor * suspension_signs(degrees, k)[..., None]


def from_bar(tensor, degrees, k):
    return tensor * suspension_signs(degrees, k)[..., None]


# ---------------------------------------------------------------------------

class AInfinityStructure:
    """Minimal A-infinity operations m_2, ..., m_K on a graded ring H."""

    def __init__(self, H, ops, max_order, contraction=None):
        self.H = H
        self.p = H.p
        self.ops = {k: np.mod(np.asarray(v, dtype=np.int64), self.p) for k, v in ops.items()}
        self.max_order = max_order
        self.contraction = contraction

    def m(self, k, *args):
        t = self.ops[k]
        for a in args:
            t = np.tensordot(np.asarray(a, dtype=np.int64), t, axes=([0], [0]))
        return np.mod(t, self.p)

    def m_basis(self, k, *labels):
        return self.m(k, *[self.H.element(l) for l in labels])

    def is_zero(self, k):
        return not np.any(self.ops[k])

    def stasheff_defect(self, N):
        """The Stasheff sum at arity N as a tensor (zero when the relation holds)."""
        deg = self.H.degrees
        p = self.p
        h = self.H.dim
        total = np.zeros((h,) * N + (h,), dtype=np.int64)
        for s in range(2, N):
            u = N - s + 1
            if s not in self.ops or u not in self.ops:
                continue
            for r in range(0, N - s + 1):
                t = N - r - s
                sign = (-1) ** ((r + s * t) % 2)
                term = insert(self.ops[u], r, self.ops[s], u, s)
                term = term * _prefix_sign(deg, N, r, 2 - s)[..., None]
                total = (total + sign * term) % p
        return total

    def check_stasheff(self, upto=None):
        upto = upto or self.max_order
        for N in range(3, upto + 2):
            needed = [s for s in range(2, N) if s in self.ops and N - s + 1 in self.ops]
            if len(needed) < N - 2:
                continue
            if np.any(self.stasheff_defect(N)):
                return False
        return True

    def check_bar_stasheff(self, upto=None):
        """The same relations in bar form: sum b(1^r (x) b_s (x) 1^t) = 0."""
        upto = upto or self.max_order
        deg = self.H.degrees
        sdeg = deg - 1
        bar = {k: to_bar(v, deg, k) for k, v in self.ops.items()}
        h = self.H.dim
        for N in range(3, upto + 2):
            if any(s not in bar for s in range(2, N)):
                continue
            total = np.zeros((h,) * N + (h,), dtype=np.int64)
            for s in range(2, N):
                u = N - s + 1
                for r in range(0, N - s + 1):
                    term = insert(bar[u], r, bar[s], u, s)
                    total = total + term * _prefix_sign(sdeg, N, r, 1)[..., None]
            if np.any(total % self.p):
                return False
        return True

    def sparse_vanishing(self, n):
        """m_i = 0 for 2 < i < n + 2, as forced by n-sparseness."""
        return all(self.is_zero(k) for k in self.ops if 2 < k < n + 2)

    def cochain(self, k):
        return HochschildCochain(self.H, k, 2 - k, self.ops[k])


def transfer(A, c=None, max_order=4):
    """Transfer the dga structure of A along a contraction onto H^*(A).

    q_1 = iota, q_k = sum_{s+t=k} b_2(h' q_s, h' q_t) with h' q_1 = iota and
    h' q_j = h q_j otherwise; the bar operations are b_k = pi q_k.
    """
    if max_order < 3:
        raise ValueError("max_order must be at least 3")
    c = c or contraction(A)
    c.check()
    p = A.p
    H = c.H
    h = H.dim
    sg = np.where(A.degrees % 2, 1, -1)  # (-1)^{|u| + 1}
    b2 = A.mult * sg[:, None, None]
    q = {1: c.iota.T.copy()}           # shape (h, N)
    hq = {1: c.iota.T.copy()}
    ops = {}
    for k in range(2, max_order + 1):
        acc = np.zeros((h,) * k + (A.dim,), dtype=np.int64)
        for s in range(1, k):
            t = k - s
            L = hq[s].reshape(h ** s, A.dim)
            R = hq[t].reshape(h ** t, A.dim)
            term = np.einsum("ia,jb,abc->ijc", L, R, b2, optimize=True)
            acc = (acc + term.reshape((h,) * k + (A.dim,))) % p
        q[k] = acc
        hq[k] = np.einsum("...a,ba->...b", acc, c.h) % p
        bar = np.einsum("...a,ba->...b", acc, c.pi) % p
        ops[k] = from_bar(bar, H.degrees, k) % p
    S = AInfinityStructure(H, ops, max_order, contraction=c)
    if not S.check_stasheff():
        raise ContractionInvalid("transferred operations fail the Stasheff relations")
    return S


# ---------------------------------------------------------------------------
# Hochschild cochains

class HochschildCochain:
    """A multilinear map H^{(x) s} -> H of internal degree t, as a tensor."""

    def __init__(self, H, arity, degree, tensor, normalized=None):
        self.H = H
        self.p = H.p
        self.arity = int(arity)
        self.degree = int(degree)
        self.tensor = np.mod(np.asarray(tensor, dtype=np.int64), self.p).reshape((H.dim,) * (arity + 1))
        self.normalized = self.is_normalized() if normalized is None else normalized

    def __call__(self, *args):
        t = self.tensor
        for a in args:
            t = np.tensordot(np.asarray(a, dtype=np.int64), t, axes=([0], [0]))
        return np.mod(t, self.p)

    def is_normalized(self):
        u = self._unit_index()
        if u is None:
            return True
        for i in range(self.arity):
            sl = [slice(None)] * (self.arity + 1)
            sl[i] = u
            if np.any(self.tensor[tuple(sl)]):
                return False
        return True

    def _unit_index(self):
        nz = np.flatnonzero(self.H.unit)
        return int(nz[0]) if len(nz) == 1 and self.H.unit[nz[0]] == 1 else None

    def is_homogeneous(self):
        deg = self.H.degrees
        for idx in zip(*np.nonzero(self.tensor)):
            if deg[idx[-1]] != sum(deg[i] for i in idx[:-1]) + self.degree:
                return False
        return True

    def is_zero(self):
        return not np.any(self.tensor)

    def __add__(self, other):
        return HochschildCochain(self.H, self.arity, self.degree, self.tensor + other.tensor)

    def __sub__(self, other):
        return HochschildCochain(self.H, self.arity, self.degree, self.tensor - other.tensor)

    def __neg__(self):
        return HochschildCochain(self.H, self.arity, self.degree, -self.tensor)

    def scale(self, c):
        return HochschildCochain(self.H, self.arity, self.degree, int(c) * self.tensor)

    def __eq__(self, other):
        return (self.arity, self.degree) == (other.arity, other.degree) and \
            np.array_equal(self.tensor, other.tensor)

    def __hash__(self):
        return hash((self.arity, self.degree, self.tensor.tobytes()))

    def __repr__(self):
        return "HochschildCochain(arity=%d, degree=%d, support=%d)" % (
            self.arity, self.degree, int(np.count_nonzero(self.tensor)))


def product_cochain(H):
    return HochschildCochain(H, 2, 0, H.mult)


def hochschild_differential(c):
    """delta c = [b_2, c] computed in bar form and converted back.

    In bar form delta F = b_2 o F - (-1)^{|F|'} F o b_2, where |F|' = t + s - 1
    and o is the Gerstenhaber composition with Koszul signs on suspended
    degrees.
    """
    H, s, t = c.H, c.arity, c.degree
    deg = H.degrees
    sdeg = deg - 1
    p = c.p
    B2 = to_bar(H.mult, deg, 2)
    F = to_bar(c.tensor, deg, s)
    fdeg = t + s - 1
    N = s + 1
    out = np.zeros((H.dim,) * N + (H.dim,), dtype=np.int64)
    # b_2 o F
    for r in (0, 1):
        term = insert(B2, r, F, 2, s) * _prefix_sign(sdeg, N, r, fdeg)[..., None]
        out = out + term
    # F o b_2
    eps = -1 if fdeg % 2 == 0 else 1
    for r in range(s):
        term = insert(F, r, B2, s, 2) * _prefix_sign(sdeg, N, r, 1)[..., None]
        out = out + eps * term
    out = from_bar(out % p, deg, N)
    return HochschildCochain(H, N, t, out)


def cochain_basis(H, arity, degree, normalized=True):
    """Index tuples (inputs..., output) spanning homogeneous cochains."""
    deg = H.degrees
    u = None
    nz = np.flatnonzero(H.unit)
    if normalized and len(nz) == 1:
        u = int(nz[0])
    inputs = [i for i in range(H.dim) if i != u]
    out = []
    for tup in itertools.product(inputs, repeat=arity):
        target = sum(int(deg[i]) for i in tup) + degree
        for j in np.flatnonzero(deg == target):
            out.append(tup + (int(j),))
    return out


class HochschildComplex:
    """Normalized homogeneous Hochschild cochains of fixed internal degree."""

    def __init__(self, H, degree):
        self.H, self.degree, self.p = H, int(degree), H.p
        self._basis, self._diff = {}, {}

    def basis(self, s):
        if s not in self._basis:
            self._basis[s] = cochain_basis(self.H, s, self.degree)
        return self._basis[s]

    def vector(self, c):
        return np.array([c.tensor[idx] for idx in self.basis(c.arity)], dtype=np.int64) % self.p

    def cochain(self, vec, s):
        T = np.zeros((self.H.dim,) * (s + 1), dtype=np.int64)
        for idx, v in zip(self.basis(s), vec):
            T[idx] = v
        return HochschildCochain(self.H, s, self.degree, T)

    def differential(self, s):
        if s not in self._diff:
            src, tgt = self.basis(s), self.basis(s + 1)
            M = np.zeros((len(tgt), len(src)), dtype=np.int64)
            for j in range(len(src)):
                e = np.zeros(len(src), dtype=np.int64)
                e[j] = 1
                M[:, j] = self.vector(hochschild_differential(self.cochain(e, s)))
            self._diff[s] = M % self.p
        return self._diff[s]

    def solve_coboundary(self, c):
        """A normalized b with delta b = c, or None."""
        if c.arity < 1:
            return None if not c.is_zero() else c
        D = self.differential(c.arity - 1)
        x = solve_mod(D, self.vector(c), self.p)
        if x is NoSolution:
            return None
        return self.cochain(x, c.arity - 1)


class HochschildClass:
    """The class of a normalized Hochschild cocycle, with equality modulo coboundaries."""

    def __init__(self, cocycle, n=None):
        self.cocycle = cocycle
        self.n = n
        self.complex = HochschildComplex(cocycle.H, cocycle.degree)

    def is_cocycle(self):
        return hochschild_differential(self.cocycle).is_zero()

    def is_zero(self):
        return self.complex.solve_coboundary(self.cocycle) is not None

    def equals(self, other):
        if (self.cocycle.arity, self.cocycle.degree) != (other.cocycle.arity, other.cocycle.degree):
            return False
        return self.complex.solve_coboundary(self.cocycle - other.cocycle) is not None

    def witness(self, other):
        return self.complex.solve_coboundary(self.cocycle - other.cocycle)

    def __repr__(self):
        return "HochschildClass(arity=%d, degree=%d)" % (self.cocycle.arity, self.cocycle.degree)


def universal_class(A, n, c=None, rng=None):
    """The cocycle m_{n+2} of a transfer to an n-sparse H^*(A), and its class.

    Returns (cocycle, class handle).  `c` fixes the contraction; otherwise a
    deterministic one is built (or a random one from `rng`).
    """
    H = cohomology(A)
    if not H.is_sparse(n):
        raise NotSparse("H^*(A) is not %d-sparse" % n)
    if c is None:
        c = contraction(A, rng=rng)
    S = transfer(A, c, max_order=n + 2)
    if not S.sparse_vanishing(n):
        raise ContractionInvalid("lower operations do not vanish on a sparse cohomology")
    m = S.cochain(n + 2)
    cls = HochschildClass(m, n)
    if not cls.is_cocycle():
        raise ContractionInvalid("m_{n+2} is not a Hochschild cocycle")
    return m, cls


# ---------------------------------------------------------------------------
# matric extension

class MatricCochain:
    """Entrywise extension of a Hochschild cochain to composable matrices.

    Matrices are arrays E[i, j, :] of ring vectors (entry of generator j in
    target generator i).  Evaluation on (E_1, ..., E_s), with E_k the
    matrix of a map F_k -> F_{k-1}, sums c over all index paths:

        c(E)_{i_0 i_s} = sum c(E_1[i_0, i_1], ..., E_s[i_{s-1}, i_s]).

    With `twist` the coefficient action carries the sign (-1)^{t |e|} on
    each entry e past the output, for odd characteristic.
    """

    def __init__(self, cochain, twist=False):
        self.cochain = cochain
        self.H = cochain.H
        self.p = cochain.p
        self.arity = cochain.arity
        self.degree = cochain.degree
        self.twist = twist

    def __call__(self, *mats):
        if len(mats) != self.arity:
            raise ValueError("expected %d matrices" % self.arity)
        if self.twist and self.degree % 2:
            sgn = np.where(self.H.degrees % 2, -1, 1)
            mats = [np.asarray(m, dtype=np.int64) * sgn[None, None, :] for m in mats]
        acc = np.einsum("ija,a...->ij...", np.asarray(mats[0], dtype=np.int64), self.cochain.tensor)
        for E in mats[1:]:
            acc = np.einsum("ija...,jka->ik...", acc, np.asarray(E, dtype=np.int64))
        return acc % self.p


def matric_extension(c, twist=False):
    """The entrywise matrix extension of a Hochschild cochain."""
    return MatricCochain(c, twist=twist)


def matrix_product(H, *mats):
    """Product of matrices over the ring H (entries as ring vectors)."""
    acc = np.asarray(mats[0], dtype=np.int64)
    for E in mats[1:]:
        acc = np.einsum("ija,jkb,abc->ikc", acc, np.asarray(E, dtype=np.int64), H.mult) % H.p
    return acc
