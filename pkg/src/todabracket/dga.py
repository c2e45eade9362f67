"""
Finite dimensional dg-algebras over F_p and right dg-modules over them.

Grading is cohomological: d raises degree by one, with Leibniz rule
d(ab) = d(a) b + (-1)^|a| a d(b).  The shift X[t] has (X[t])^k = X^{k+t}
and differential (-1)^t d; right actions are unchanged by shifting.

Semifree modules are the working model of the derived category: a
semifree module is the free right A-module on generators e_j of degree d_j
with d(e_j) = sum_i e_i D[i, j] for a matrix D over A.  Maps out of a
semifree module are determined by the images of the generators, and
homotopy classes of maps are computed as cohomology of the Hom-complex
with differential D(f) = d f - (-1)^k f d for f of degree k.
"""

import itertools

import numpy as np

from .exactlin import (NoSolution, Subquotient, independent_columns, kernel_mod,
                       rank_mod, solve_mod, is_prime)
from .graded import GradedRing, GradedModule, DegreeWindow, WindowExhausted


def _mod(a, p):
    return np.mod(np.asarray(a, dtype=np.int64), p)


def _sign(k):
    return -1 if k % 2 else 1


class DGModule:
    """A finite dimensional right dg-module over a DGAlgebra, on a flat basis."""

    def __init__(self, algebra, degrees, d, act, labels=None, check=True):
        self.algebra = algebra
        self.p = algebra.p
        self.degrees = np.asarray(degrees, dtype=np.int64).reshape(-1)
        n = len(self.degrees)
        self.d = _mod(d, self.p).reshape(n, n)
        self.act = _mod(act, self.p).reshape(n, algebra.dim, n)
        self.labels = labels if labels is not None else ["v%d" % i for i in range(n)]
        self._coh = None
        if check:
            self.check()

    @property
    def dim(self):
        return len(self.degrees)

    def basis_in_degree(self, k):
        return np.flatnonzero(self.degrees == k)

    def support(self):
        return sorted(set(int(k) for k in self.degrees))

    def right_mult(self, v, a):
        return _mod(np.einsum("m,a,man->n", _mod(v, self.p), _mod(a, self.p), self.act), self.p)

    def right_mult_matrix(self, a):
        return _mod(np.einsum("a,man->nm", _mod(a, self.p), self.act), self.p)

    def check(self):
        p, A = self.p, self.algebra
        n = self.dim
        if np.any(self.d @ self.d % p):
            raise ValueError("d^2 != 0")
        for j, i in zip(*np.nonzero(self.d.T)):
            if self.degrees[i] != self.degrees[j] + 1:
                raise ValueError("differential does not raise degree by one")
        for m in range(n):
            for a in range(A.dim):
                for c in np.flatnonzero(self.act[m, a]):
                    if self.degrees[c] != self.degrees[m] + A.degrees[a]:
                        raise ValueError("action not homogeneous")
        one = np.einsum("a,man->mn", A.unit, self.act) % p
        if not np.array_equal(one, np.eye(n, dtype=np.int64)):
            raise ValueError("unit does not act as identity")
        lhs = np.einsum("man,nbk->mabk", self.act, self.act) % p
        rhs = np.einsum("abc,mck->mabk", A.mult, self.act) % p
        if not np.array_equal(lhs, rhs):
            raise ValueError("action not associative")
        # d(m a) = d(m) a + (-1)^|m| m d(a)
        sg = np.array([_sign(k) for k in self.degrees], dtype=np.int64)
        lhs = np.einsum("man,kn->mak", self.act, self.d)
        rhs = np.einsum("jm,jak->mak", self.d, self.act) + \
            sg[:, None, None] * np.einsum("ba,mbk->mak", A.d, self.act)
        if np.any((lhs - rhs) % p):
            raise ValueError("module Leibniz rule fails")
        return True

    def shift(self, t):
        return DGModule(self.algebra, self.degrees - t, _sign(t) * self.d, self.act,
                        labels=self.labels, check=False)

    # -- cohomology --------------------------------------------------------

    def cohomology_data(self):
        """Per degree Subquotient Z/B with chosen representatives."""
        if self._coh is None:
            out = {}
            p = self.p
            for k in self.support():
                idx = self.basis_in_degree(k)
                nxt = self.basis_in_degree(k + 1)
                prv = self.basis_in_degree(k - 1)
                dk = self.d[np.ix_(nxt, idx)] if len(nxt) else np.zeros((0, len(idx)), dtype=np.int64)
                Z = kernel_mod(dk, p) if len(nxt) else np.eye(len(idx), dtype=np.int64)
                B = self.d[np.ix_(idx, prv)] if len(prv) else np.zeros((len(idx), 0), dtype=np.int64)
                out[k] = (idx, Subquotient(Z, B, p))
            self._coh = out
        return self._coh

    def betti(self):
        return {k: sq.dim for k, (idx, sq) in self.cohomology_data().items() if sq.dim}

    def is_acyclic(self):
        return not self.betti()

    def cocycle_class(self, v):
        """Coordinates of the class of a homogeneous cocycle, with its degree."""
        v = _mod(v, self.p)
        nz = np.flatnonzero(v)
        if nz.size == 0:
            return None, None
        k = int(self.degrees[nz[0]])
        if np.any(self.d @ v % self.p):
            raise ValueError("not a cocycle")
        idx, sq = self.cohomology_data()[k]
        return k, sq.coords(v[idx])

    def is_coboundary(self, v):
        k, c = self.cocycle_class(v)
        return k is None or not np.any(c)

    def __repr__(self):
        return "DGModule(dim=%d, betti=%s)" % (self.dim, self.betti())


class DGAlgebra:
    """A finite dimensional dg-algebra over F_p on a flat basis with unit."""

    def __init__(self, p, degrees, d, mult, unit, labels=None, name=None, check=True):
        if not is_prime(p):
            raise ValueError("characteristic must be prime")
        self.p = int(p)
        self.degrees = np.asarray(degrees, dtype=np.int64).reshape(-1)
        n = len(self.degrees)
        self.d = _mod(d, p).reshape(n, n)
        self.mult = _mod(mult, p).reshape(n, n, n)
        self.unit = _mod(unit, p).reshape(n)
        self.labels = labels if labels is not None else ["a%d" % i for i in range(n)]
        self.name = name
        nz = np.flatnonzero(self.unit)
        if len(nz) != 1 or self.unit[nz[0]] != 1:
            raise ValueError("the unit must be a basis vector")
        self.unit_index = int(nz[0])
        if check:
            self.check()
        self._module = None
        self._cohomology = None

    @property
    def dim(self):
        return len(self.degrees)

    @property
    def window(self):
        return DegreeWindow(int(self.degrees.min()), int(self.degrees.max()))

    def basis_in_degree(self, k):
        return np.flatnonzero(self.degrees == k)

    def element(self, label):
        v = np.zeros(self.dim, dtype=np.int64)
        v[self.labels.index(label)] = 1
        return v

    def mul(self, a, b):
        return _mod(np.einsum("a,b,abc->c", _mod(a, self.p), _mod(b, self.p), self.mult), self.p)

    def left_mult_matrix(self, a):
        return _mod(np.einsum("a,abc->cb", _mod(a, self.p), self.mult), self.p)

    def right_mult_matrix(self, b):
        return _mod(np.einsum("b,abc->ca", _mod(b, self.p), self.mult), self.p)

    def diff(self, a):
        return self.d @ _mod(a, self.p) % self.p

    def degree_of(self, v):
        nz = np.flatnonzero(_mod(v, self.p))
        ds = set(int(self.degrees[i]) for i in nz)
        if len(ds) > 1:
            raise ValueError("inhomogeneous element")
        return ds.pop() if ds else None

    def check(self):
        p, n = self.p, self.dim
        if np.any(self.d @ self.d % p):
            raise ValueError("d^2 != 0")
        for j, i in zip(*np.nonzero(self.d.T)):
            if self.degrees[i] != self.degrees[j] + 1:
                raise ValueError("differential does not raise degree by one")
        for a, b in itertools.product(range(n), repeat=2):
            for c in np.flatnonzero(self.mult[a, b]):
                if self.degrees[c] != self.degrees[a] + self.degrees[b]:
                    raise ValueError("product not homogeneous")
        E = np.eye(n, dtype=np.int64)
        if not np.array_equal(self.left_mult_matrix(self.unit), E) or \
           not np.array_equal(self.right_mult_matrix(self.unit), E):
            raise ValueError("unit law fails")
        lhs = np.einsum("abx,xcy->abcy", self.mult, self.mult) % p
        rhs = np.einsum("bcx,axy->abcy", self.mult, self.mult) % p
        if not np.array_equal(lhs, rhs):
            raise ValueError("product not associative")
        sg = np.array([_sign(k) for k in self.degrees], dtype=np.int64)
        lhs = np.einsum("abx,yx->aby", self.mult, self.d)
        rhs = np.einsum("xa,xby->aby", self.d, self.mult) + \
            sg[:, None, None] * np.einsum("xb,axy->aby", self.d, self.mult)
        if np.any((lhs - rhs) % p):
            raise ValueError("Leibniz rule fails")
        return True

    def as_module(self):
        """A as a right dg-module over itself."""
        if self._module is None:
            self._module = SemifreeModule(self, [0], np.zeros((1, 1, self.dim), dtype=np.int64))
        return self._module

    def is_formal_trivially(self):
        return not np.any(self.d)

    def __repr__(self):
        return "DGAlgebra(%s, p=%d, dim=%d)" % (self.name or "", self.p, self.dim)


# ---------------------------------------------------------------------------
# constructors

def algebra_from_table(p, labels, degrees, products, differential=None, name=None):
    """Build a dga from labelled basis products {(x, y): {z: c}} and d {x: {y: c}}.

    The label "1" is the unit and products with it are implied.
    """
    n = len(labels)
    ix = {l: i for i, l in enumerate(labels)}
    mult = np.zeros((n, n, n), dtype=np.int64)
    u = ix["1"]
    for i in range(n):
        mult[u, i, i] = 1
        mult[i, u, i] = 1
    for (x, y), out in products.items():
        for z, c in out.items():
            mult[ix[x], ix[y], ix[z]] = c
    d = np.zeros((n, n), dtype=np.int64)
    for x, out in (differential or {}).items():
        for y, c in out.items():
            d[ix[y], ix[x]] = c
    unit = np.zeros(n, dtype=np.int64)
    unit[u] = 1
    return DGAlgebra(p, degrees, d, mult, unit, labels=labels, name=name)


def exterior_algebra(p, names, degrees, differential=None, name=None):
    """Graded-commutative exterior algebra on odd generators.

    `differential` maps a generator name to a list of (coefficient, monomial
    as a tuple of generator names in increasing order).
    """
    k = len(names)
    monos = []
    for r in range(k + 1):
        monos.extend(itertools.combinations(range(k), r))
    labels = ["1" if not m else "".join(names[i] for i in m) for m in monos]
    degs = [sum(degrees[i] for i in m) for m in monos]
    pos = {m: i for i, m in enumerate(monos)}
    n = len(monos)

    def times(m1, m2):
        if set(m1) & set(m2):
            return 0, None
        seq = list(m1) + list(m2)
        sign = 1
        for i in range(len(seq)):
            for j in range(i + 1, len(seq)):
                if seq[i] > seq[j] and degrees[seq[i]] % 2 and degrees[seq[j]] % 2:
                    sign = -sign
        return sign, tuple(sorted(seq))

    mult = np.zeros((n, n, n), dtype=np.int64)
    for a, m1 in enumerate(monos):
        for b, m2 in enumerate(monos):
            s, m = times(m1, m2)
            if s:
                mult[a, b, pos[m]] = s
    # differential on generators, extended by the Leibniz rule
    dgen = {}
    for gname, terms in (differential or {}).items():
        v = np.zeros(n, dtype=np.int64)
        for c, mono in terms:
            v[pos[tuple(sorted(names.index(x) for x in mono))]] += c
        dgen[names.index(gname)] = v
    d = np.zeros((n, n), dtype=np.int64)
    E = np.eye(n, dtype=np.int64)
    for a, m in enumerate(monos):
        out = np.zeros(n, dtype=np.int64)
        for t, g in enumerate(m):
            if g not in dgen:
                continue
            left = E[pos[m[:t]]]
            right = E[pos[m[t + 1:]]]
            sgn = _sign(sum(degrees[i] for i in m[:t]))
            term = np.einsum("a,b,abc->c", left, dgen[g], mult)
            term = np.einsum("a,b,abc->c", term, right, mult)
            out += sgn * term
        d[:, a] = out
    unit = np.zeros(n, dtype=np.int64)
    unit[pos[()]] = 1
    return DGAlgebra(p, degs, d, mult, unit, labels=labels, name=name)


def heisenberg_dga(p=2):
    """Exterior algebra on x, y, z of degree 1 with dz = xy."""
    return exterior_algebra(p, ["x", "y", "z"], [1, 1, 1],
                            {"z": [(1, ("x", "y"))]}, name="heisenberg")


def formal_dga(ring):
    """A graded ring over F_p viewed as a dga with zero differential."""
    n = ring.dim
    return DGAlgebra(ring.p, ring.degrees, np.zeros((n, n), dtype=np.int64), ring.mult,
                     ring.unit, labels=list(ring.labels), name="formal")


def truncated_free_dga(p, gens, top, differential, name=None):
    """Free associative algebra on generators modulo words of degree > top.

    `gens` is a list of (name, degree); `differential` maps a generator to a
    list of (coefficient, word as tuple of names).
    """
    names = [g for g, _ in gens]
    deg = dict(gens)
    words = [()]
    frontier = [()]
    while frontier:
        new = []
        for w in frontier:
            for g in names:
                v = w + (g,)
                if sum(deg[x] for x in v) <= top:
                    new.append(v)
        words.extend(new)
        frontier = new
    words.sort(key=lambda w: (sum(deg[x] for x in w), len(w), [names.index(x) for x in w]))
    pos = {w: i for i, w in enumerate(words)}
    n = len(words)
    labels = ["1" if not w else "".join(w) for w in words]
    degs = [sum(deg[x] for x in w) for w in words]
    mult = np.zeros((n, n, n), dtype=np.int64)
    for a, w1 in enumerate(words):
        for b, w2 in enumerate(words):
            w = w1 + w2
            if w in pos:
                mult[a, b, pos[w]] = 1
    dgen = {}
    for gname, terms in differential.items():
        v = np.zeros(n, dtype=np.int64)
        for c, w in terms:
            if tuple(w) in pos:
                v[pos[tuple(w)]] += c
        dgen[gname] = v
    E = np.eye(n, dtype=np.int64)
    d = np.zeros((n, n), dtype=np.int64)
    for a, w in enumerate(words):
        out = np.zeros(n, dtype=np.int64)
        for t, g in enumerate(w):
            if g not in dgen:
                continue
            sgn = _sign(sum(deg[x] for x in w[:t]))
            term = np.einsum("a,b,abc->c", E[pos[w[:t]]], dgen[g], mult)
            term = np.einsum("a,b,abc->c", term, E[pos[w[t + 1:]]], mult)
            out += sgn * term
        d[:, a] = out
    unit = np.zeros(n, dtype=np.int64)
    unit[0] = 1
    return DGAlgebra(p, degs, d, mult, unit, labels=labels, name=name)


def massey4_dga(p=2):
    """A dga whose cohomology is 2-sparse with a nonzero 4-fold Massey product.

    Free on a (degree 2), b (3), c (4) modulo words of degree > 6, with
    db = a^2 and dc = ab - ba.  Cohomology has basis 1, [a] and three
    classes in degree 6; <a, a, a, a> is the class of ac + b^2 + ca up to
    sign conventions.
    """
    return truncated_free_dga(p, [("a", 2), ("b", 3), ("c", 4)], 6,
                              {"b": [(1, ("a", "a"))],
                               "c": [(1, ("a", "b")), (-1, ("b", "a"))]},
                              name="massey4")


# ---------------------------------------------------------------------------
# semifree modules

class SemifreeModule(DGModule):
    """Free right A-module on generators e_j with d(e_j) = sum_i e_i D[i, j].

    D has shape (r, r, dim A); entry D[i, j] is an element of A of degree
    d_j + 1 - d_i.  The flat basis lists e_j a_b in generator-major order.
    """

    def __init__(self, algebra, gen_degrees, D, names=None, check=True):
        A = algebra
        p = A.p
        self.gens = [int(g) for g in gen_degrees]
        r = len(self.gens)
        self.D = _mod(D, p).reshape(r, r, A.dim)
        self.names = names or ["e%d" % j for j in range(r)]
        N = A.dim
        degrees = [g + int(A.degrees[b]) for g in self.gens for b in range(N)]
        n = r * N
        d = np.zeros((n, n), dtype=np.int64)
        act = np.zeros((n, N, n), dtype=np.int64)
        for j in range(r):
            blk = slice(j * N, (j + 1) * N)
            # e_j a_b -> (-1)^{d_j} e_j d(a_b) + sum_i e_i D_ij a_b
            d[blk, blk] += _sign(self.gens[j]) * A.d
            for i in range(r):
                if np.any(self.D[i, j]):
                    d[i * N:(i + 1) * N, blk] += A.left_mult_matrix(self.D[i, j])
            # (e_j a_b) a_c = e_j (a_b a_c)
            act[blk, :, blk] = A.mult
        labels = ["%s*%s" % (self.names[j], A.labels[b]) for j in range(r) for b in range(N)]
        DGModule.__init__(self, A, degrees, d, act, labels=labels, check=False)
        if check:
            self.check_semifree()

    @property
    def rank(self):
        return len(self.gens)

    def gen_index(self, j):
        return j * self.algebra.dim + self.algebra.unit_index

    def gen_vector(self, j):
        v = np.zeros(self.dim, dtype=np.int64)
        v[self.gen_index(j)] = 1
        return v

    def element(self, coeffs):
        """sum_j e_j coeffs[j] for A-vectors coeffs[j]."""
        return _mod(np.concatenate([np.asarray(c, dtype=np.int64) for c in coeffs]), self.p) \
            if coeffs else np.zeros(0, dtype=np.int64)

    def coefficients(self, v):
        N = self.algebra.dim
        v = _mod(v, self.p)
        return [v[j * N:(j + 1) * N] for j in range(self.rank)]

    def check_semifree(self):
        A, p = self.algebra, self.p
        for i in range(self.rank):
            for j in range(self.rank):
                dg = A.degree_of(self.D[i, j])
                if dg is not None and dg != self.gens[j] + 1 - self.gens[i]:
                    raise ValueError("entry D[%d, %d] has the wrong degree" % (i, j))
        # filtration: D strictly upper triangular after ordering generators
        # by the stage at which they were attached is not enforced; d^2 = 0 is
        self.check()
        return True

    def shift(self, t):
        return SemifreeModule(self.algebra, [g - t for g in self.gens], _sign(t) * self.D,
                              names=self.names, check=False)

    def direct_sum(self, other):
        r, s = self.rank, other.rank
        N = self.algebra.dim
        D = np.zeros((r + s, r + s, N), dtype=np.int64)
        D[:r, :r] = self.D
        D[r:, r:] = other.D
        return SemifreeModule(self.algebra, self.gens + other.gens, D,
                              names=self.names + other.names, check=False)

    def __repr__(self):
        return "SemifreeModule(gens=%s)" % (self.gens,)


def free_dg_module(algebra, gen_degrees, names=None):
    """Semifree module with zero differential on generators of given degrees."""
    r = len(gen_degrees)
    return SemifreeModule(algebra, gen_degrees, np.zeros((r, r, algebra.dim), dtype=np.int64),
                          names=names)


# ---------------------------------------------------------------------------
# maps

class ChainMap:
    """A right A-linear map of degree k between dg-modules.

    `matrix` is the flat matrix (target.dim x source.dim).  A chain map
    commutes with differentials up to the sign d f = (-1)^k f d.
    """

    def __init__(self, source, target, degree, matrix, check=False):
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.p = source.p
        self.matrix = _mod(matrix, self.p).reshape(target.dim, source.dim)
        if check:
            self.check()

    @classmethod
    def from_generators(cls, source, target, degree, images, check=False):
        """Map out of a semifree module given by generator images (flat vectors)."""
        A = source.algebra
        N = A.dim
        M = np.zeros((target.dim, source.dim), dtype=np.int64)
        for j in range(source.rank):
            img = _mod(images[j], source.p)
            M[:, j * N:(j + 1) * N] = np.einsum("m,mbn->nb", img, target.act)
        return cls(source, target, degree, M, check=check)

    @classmethod
    def from_matrix_over_A(cls, source, target, degree, Phi, check=False):
        """Map between semifree modules, e_j -> sum_i e'_i Phi[i, j]."""
        imgs = [target.element([Phi[i, j] for i in range(target.rank)])
                for j in range(source.rank)]
        return cls.from_generators(source, target, degree, imgs, check=check)

    def generator_images(self):
        return [self.matrix[:, self.source.gen_index(j)] for j in range(self.source.rank)]

    def matrix_over_A(self):
        """For semifree source and target: the matrix Phi with e_j -> sum e'_i Phi_ij."""
        imgs = self.generator_images()
        r, s = self.target.rank, self.source.rank
        N = self.source.algebra.dim
        Phi = np.zeros((r, s, N), dtype=np.int64)
        for j, v in enumerate(imgs):
            for i, c in enumerate(self.target.coefficients(v)):
                Phi[i, j] = c
        return Phi

    def check(self):
        p = self.p
        for j, i in zip(*np.nonzero(self.matrix.T)):
            if self.target.degrees[i] != self.source.degrees[j] + self.degree:
                raise ValueError("map does not have degree %d" % self.degree)
        A = self.source.algebra
        E = np.eye(A.dim, dtype=np.int64)
        for a in range(A.dim):
            lhs = self.matrix @ self.source.right_mult_matrix(E[a]) % p
            rhs = self.target.right_mult_matrix(E[a]) @ self.matrix % p
            if not np.array_equal(lhs, rhs):
                raise ValueError("map is not A-linear")
        return True

    def boundary(self):
        """D(f) = d f - (-1)^k f d as a map of degree k + 1."""
        m = self.target.d @ self.matrix - _sign(self.degree) * (self.matrix @ self.source.d)
        return ChainMap(self.source, self.target, self.degree + 1, m)

    def is_chain_map(self):
        return not np.any(self.boundary().matrix)

    def compose(self, other):
        """self o other."""
        return ChainMap(other.source, self.target, self.degree + other.degree,
                        self.matrix @ other.matrix)

    def __add__(self, other):
        return ChainMap(self.source, self.target, self.degree, self.matrix + other.matrix)

    def __sub__(self, other):
        return ChainMap(self.source, self.target, self.degree, self.matrix - other.matrix)

    def __neg__(self):
        return ChainMap(self.source, self.target, self.degree, -self.matrix)

    def scale(self, c):
        return ChainMap(self.source, self.target, self.degree, int(c) * self.matrix)

    def is_zero(self):
        return not np.any(self.matrix)

    def retarget(self, source=None, target=None, degree=None):
        """The same underlying map viewed between shifted modules."""
        return ChainMap(source or self.source, target or self.target,
                        self.degree if degree is None else degree, self.matrix)

    def on_cohomology(self, v):
        return self.matrix @ _mod(v, self.p) % self.p

    @classmethod
    def zero(cls, source, target, degree=0):
        return cls(source, target, degree, np.zeros((target.dim, source.dim), dtype=np.int64))

    @classmethod
    def identity(cls, M):
        return cls(M, M, 0, np.eye(M.dim, dtype=np.int64))

    def __repr__(self):
        return "ChainMap(degree=%d, %s -> %s)" % (self.degree, self.source, self.target)


class ChainHomotopy(ChainMap):
    """A map h of degree k - 1 with f - g = D(h) for maps f, g of degree k."""

    def witnesses(self, f, g):
        return not np.any((f.matrix - g.matrix - self.boundary().matrix) % self.p)


# ---------------------------------------------------------------------------
# cohomology of a dga and contractions

def cohomology(A):
    """H^*(A) as a GradedRing, with cocycle representatives attached.

    The returned ring carries `reps` (columns in A, one per basis class,
    the unit class first) and `algebra`.
    """
    if A._cohomology is not None:
        return A._cohomology
    p = A.p
    reps, degs, labels = [], [], []
    data = {}
    for k in sorted(set(int(x) for x in A.degrees)):
        idx = A.basis_in_degree(k)
        nxt = A.basis_in_degree(k + 1)
        prv = A.basis_in_degree(k - 1)
        Z = kernel_mod(A.d[np.ix_(nxt, idx)], p) if len(nxt) else np.eye(len(idx), dtype=np.int64)
        if k == 0:
            Z = np.hstack([A.unit[idx][:, None], Z])
        B = A.d[np.ix_(idx, prv)] if len(prv) else np.zeros((len(idx), 0), dtype=np.int64)
        sq = Subquotient(Z, B, p)
        data[k] = (idx, sq)
        for c in range(sq.dim):
            v = np.zeros(A.dim, dtype=np.int64)
            v[idx] = sq.reps[:, c]
            reps.append(v)
            degs.append(k)
            nz = np.flatnonzero(v)
            labels.append("[" + "+".join(A.labels[i] if v[i] == 1 else "%d%s" % (v[i], A.labels[i])
                                        for i in nz) + "]")
    R = np.array(reps, dtype=np.int64).T if reps else np.zeros((A.dim, 0), dtype=np.int64)
    h = R.shape[1]
    offs = {}
    pos = 0
    for k in sorted(data):
        offs[k] = pos
        pos += data[k][1].dim

    def coords(v):
        v = _mod(v, p)
        out = np.zeros(h, dtype=np.int64)
        for k, (idx, sq) in data.items():
            if np.any(v[idx]) and sq.dim:
                out[offs[k]:offs[k] + sq.dim] = sq.coords(v[idx])
            elif np.any(v[idx]) and not sq.contains(v[idx]):
                raise ValueError("not a cocycle")
        return out

    mult = np.zeros((h, h, h), dtype=np.int64)
    for a in range(h):
        for b in range(h):
            prod = A.mul(R[:, a], R[:, b])
            if np.any(prod):
                mult[a, b] = coords(prod)
    unit = np.zeros(h, dtype=np.int64)
    if h:
        unit[0] = 1
    H = GradedRing(p, degs, mult, unit, labels=labels)
    H.reps = R
    H.coords = coords
    H.algebra = A
    H._data = data
    H._offsets = offs
    A._cohomology = H
    return H


class ContractionInvalid(Exception):
    pass


class Contraction:
    """pi: A -> H, iota: H -> A, h: A -> A of degree -1 with
    pi iota = 1, iota pi - 1 = d h + h d, h h = 0, h iota = 0, pi h = 0."""

    def __init__(self, algebra, H, pi, iota, h):
        self.algebra = algebra
        self.H = H
        self.pi = _mod(pi, algebra.p)
        self.iota = _mod(iota, algebra.p)
        self.h = _mod(h, algebra.p)

    def check(self):
        A, p = self.algebra, self.algebra.p
        n = A.dim
        I = np.eye(n, dtype=np.int64)
        bad = []
        if np.any((self.pi @ self.iota - np.eye(self.H.dim, dtype=np.int64)) % p):
            bad.append("pi iota != 1")
        if np.any((self.iota @ self.pi - I - A.d @ self.h - self.h @ A.d) % p):
            bad.append("iota pi - 1 != dh + hd")
        if np.any(self.h @ self.h % p):
            bad.append("h^2 != 0")
        if np.any(self.h @ self.iota % p):
            bad.append("h iota != 0")
        if np.any(self.pi @ self.h % p):
            bad.append("pi h != 0")
        if np.any(A.d @ self.iota % p):
            bad.append("iota does not land in cocycles")
        if np.any(self.pi @ A.d % p):
            bad.append("pi does not kill coboundaries")
        for j, i in zip(*np.nonzero(self.h.T)):
            if A.degrees[i] != A.degrees[j] - 1:
                bad.append("h does not have degree -1")
                break
        if bad:
            raise ContractionInvalid("; ".join(bad))
        return True


def contraction(A, rng=None):
    """A contraction of A onto H^*(A) built from complement bases.

    With rng=None the choices are the deterministic ones; otherwise the
    cocycle representatives and the complement of the cocycles are
    perturbed at random (the basis of H stays the same).
    """
    p = A.p
    H = cohomology(A)
    n, hdim = A.dim, H.dim
    iota = H.reps.copy()
    pi = np.zeros((hdim, n), dtype=np.int64)
    h = np.zeros((n, n), dtype=np.int64)
    degs = sorted(set(int(x) for x in A.degrees))
    split = {}
    # A^k = B^k + R^k + C^k with R^k the chosen representatives and C^k a
    # complement of the cocycles
    for k in degs:
        idx = A.basis_in_degree(k)
        prv = A.basis_in_degree(k - 1)
        nxt = A.basis_in_degree(k + 1)
        Z = kernel_mod(A.d[np.ix_(nxt, idx)], p) if len(nxt) else np.eye(len(idx), dtype=np.int64)
        B = A.d[np.ix_(idx, prv)] if len(prv) else np.zeros((len(idx), 0), dtype=np.int64)
        Bb = B[:, independent_columns(B, p)] if B.size else B
        cols = [c for c in range(hdim) if H.degrees[c] == k]
        R = iota[idx][:, cols]
        if rng is not None and Bb.shape[1] and R.shape[1]:
            R = (R + Bb @ rng.integers(0, p, size=(Bb.shape[1], R.shape[1]))) % p
            iota[np.ix_(idx, cols)] = R
        cand = np.eye(len(idx), dtype=np.int64)
        if rng is not None:
            cand = np.hstack([rng.integers(0, p, size=(len(idx), len(idx))), cand])
        full = np.hstack([Z, cand])
        C = full[:, [c for c in independent_columns(full, p) if c >= Z.shape[1]]]
        basis = np.hstack([Bb, R, C])
        if basis.shape[1] != len(idx):
            raise ContractionInvalid("complement bases do not fit in degree %d" % k)
        inv = solve_mod(basis, np.eye(len(idx), dtype=np.int64), p)
        nb, nr = Bb.shape[1], R.shape[1]
        pi[np.ix_(cols, idx)] = inv[nb:nb + nr]
        split[k] = (idx, Bb, C, inv)
    # h(d c) = -c for c in C^{k-1}, zero on R^k and C^k
    for k in degs:
        idx, Bb, _, inv = split[k]
        if not Bb.shape[1]:
            continue
        prv, _, Cp, _ = split[k - 1]
        dC = A.d[np.ix_(idx, prv)] @ Cp % p
        X = solve_mod(Bb, dC, p)
        Xinv = solve_mod(X, np.eye(X.shape[0], dtype=np.int64), p)
        h[np.ix_(prv, idx)] = (-Cp @ Xinv) @ inv[:Bb.shape[1]] % p
    c = Contraction(A, H, pi, iota, h)
    # side conditions, then the correction h -> -h d h for this sign convention
    c.h = (-(c.h @ A.d @ c.h)) % p
    c.check()
    return c


# ---------------------------------------------------------------------------
# cones

class Triangle:
    """A distinguished triangle X --f--> Y --i--> C --q--> X[1]."""

    def __init__(self, f, i, q, cone):
        self.f, self.i, self.q, self.cone = f, i, q, cone


def cone(f):
    """Cone of a degree zero chain map f: X -> Y, namely Y + X[1] with
    differential [[d_Y, f], [0, -d_X]].  Returns a Triangle."""
    if f.degree != 0:
        raise ValueError("cone needs a degree zero chain map")
    X, Y = f.source, f.target
    p = f.p
    if isinstance(X, SemifreeModule) and isinstance(Y, SemifreeModule):
        r, s = Y.rank, X.rank
        N = X.algebra.dim
        D = np.zeros((r + s, r + s, N), dtype=np.int64)
        D[:r, :r] = Y.D
        D[r:, r:] = -X.D
        D[:r, r:] = f.matrix_over_A()
        C = SemifreeModule(X.algebra, Y.gens + [g - 1 for g in X.gens], D,
                           names=Y.names + [nm + "'" for nm in X.names], check=False)
        ny = Y.dim
    else:
        ny, nx = Y.dim, X.dim
        d = np.zeros((ny + nx, ny + nx), dtype=np.int64)
        d[:ny, :ny] = Y.d
        d[:ny, ny:] = f.matrix
        d[ny:, ny:] = -X.d
        act = np.zeros((ny + nx, X.algebra.dim, ny + nx), dtype=np.int64)
        act[:ny, :, :ny] = Y.act
        act[ny:, :, ny:] = X.act
        C = DGModule(X.algebra, np.concatenate([Y.degrees, X.degrees - 1]), d, act,
                     labels=Y.labels + [l + "'" for l in X.labels], check=False)
    n = C.dim
    I = np.eye(n, dtype=np.int64)
    Xs = X.shift(1)
    inc = ChainMap(Y, C, 0, I[:, :ny])
    proj = ChainMap(C, Xs, 0, I[ny:, :])
    return Triangle(f, inc, proj, C)


# ---------------------------------------------------------------------------
# Hom complexes and homotopy classes

class HomComplex:
    """Hom(P, M) for semifree P, in a range of degrees.

    A degree k element is a tuple of generator images m_j in M^{d_j + k},
    flattened over the index list basis(k) = [(j, m), ...].
    """

    def __init__(self, P, M):
        if not isinstance(P, SemifreeModule):
            raise TypeError("the source must be semifree")
        self.P, self.M = P, M
        self.p = P.p
        self._basis = {}
        self._diff = {}
        self._sq = {}

    def basis(self, k):
        if k not in self._basis:
            out = []
            for j, g in enumerate(self.P.gens):
                for m in self.M.basis_in_degree(g + k):
                    out.append((j, int(m)))
            self._basis[k] = out
        return self._basis[k]

    def dim(self, k):
        return len(self.basis(k))

    def to_vector(self, f):
        imgs = f.generator_images() if isinstance(f, ChainMap) else f
        return np.array([imgs[j][m] for j, m in self.basis(f.degree if isinstance(f, ChainMap) else None)],
                        dtype=np.int64) % self.p

    def vector(self, imgs, k):
        return np.array([int(imgs[j][m]) for j, m in self.basis(k)], dtype=np.int64) % self.p

    def images(self, vec, k):
        imgs = [np.zeros(self.M.dim, dtype=np.int64) for _ in self.P.gens]
        for (j, m), c in zip(self.basis(k), vec):
            imgs[j][m] = (imgs[j][m] + c) % self.p
        return imgs

    def map(self, vec, k):
        return ChainMap.from_generators(self.P, self.M, k, self.images(vec, k))

    def vector_of(self, f):
        return self.vector(f.generator_images(), f.degree)

    def differential(self, k):
        """Matrix of D: Hom^k -> Hom^{k+1}."""
        if k not in self._diff:
            P, M, p = self.P, self.M, self.p
            src, tgt = self.basis(k), self.basis(k + 1)
            tpos = {x: i for i, x in enumerate(tgt)}
            out = np.zeros((len(tgt), len(src)), dtype=np.int64)
            s = _sign(k)
            for c, (i, m) in enumerate(src):
                # (Df)(e_i) += d_M e_m
                for mm in np.flatnonzero(M.d[:, m]):
                    out[tpos[(i, int(mm))], c] += M.d[mm, m]
                # (Df)(e_j) -= (-1)^k e_m D_ij
                for j in range(P.rank):
                    Dij = P.D[i, j]
                    if not np.any(Dij):
                        continue
                    w = np.einsum("a,an->n", Dij, M.act[m])
                    for mm in np.flatnonzero(w % p):
                        out[tpos[(j, int(mm))], c] -= s * w[mm]
            self._diff[k] = out % p
        return self._diff[k]

    def cohomology(self, k):
        if k not in self._sq:
            dk = self.differential(k)
            Z = kernel_mod(dk, self.p) if dk.shape[0] else np.eye(self.dim(k), dtype=np.int64)
            B = self.differential(k - 1)
            self._sq[k] = Subquotient(Z, B, self.p)
        return self._sq[k]


class HomotopyGroup:
    """T(P, M)_t: degree t chain maps P -> M modulo null-homotopic ones.

    With the grading conventions here, T(P[t], M) is the degree -t part and
    the group of degree t maps is T(P, M[t]).
    """

    def __init__(self, P, M, t, hom=None):
        self.hom = hom or HomComplex(P, M)
        self.P, self.M, self.degree = P, M, int(t)
        self.sq = self.hom.cohomology(self.degree)

    @property
    def dim(self):
        return self.sq.dim

    def representatives(self):
        return [self.hom.map(self.sq.reps[:, c], self.degree) for c in range(self.dim)]

    def coords(self, f):
        v = self.hom.vector_of(f)
        if np.any(self.hom.differential(self.degree) @ v % self.hom.p):
            raise ValueError("not a chain map")
        return self.sq.coords(v)

    def is_null(self, f):
        return not np.any(self.coords(f))

    def contains_span(self, maps):
        """Matrix whose columns are class coordinates of the given maps."""
        if not maps:
            return np.zeros((self.dim, 0), dtype=np.int64)
        return np.array([self.coords(f) for f in maps], dtype=np.int64).T


def homotopy_classes(P, M, t=0):
    """The group of homotopy classes of degree t chain maps P -> M."""
    return HomotopyGroup(P, M, t)


class LiftFailed(Exception):
    def __init__(self, msg, group=None):
        Exception.__init__(self, msg)
        self.group = group


def _compose_vector(kind, q, basis_map, Hq):
    comp = q.compose(basis_map) if kind == "post" else basis_map.compose(q)
    return Hq.vector_of(comp)


def solve_homotopy_equation(P, M, k, constraints, rng=None):
    """Find a degree k chain map f: P -> M satisfying each constraint up to homotopy.

    A constraint ("post", q, g) asks for q f - g = D(u), and ("pre", s, g)
    asks for f s - g = D(u), with u a free map of the appropriate degree.
    The source of s and of the post-composites must be semifree.  Raises
    LiftFailed when no such f exists; `rng` picks a random solution.
    """
    H = HomComplex(P, M)
    p = H.p
    dk = H.differential(k)
    n_f = H.dim(k)
    blocks = []
    for kind, q, g in constraints:
        Hq = HomComplex(g.source, g.target)
        E = np.eye(n_f, dtype=np.int64)
        cols = [_compose_vector(kind, q, H.map(E[c], k), Hq) for c in range(n_f)]
        Lmat = np.array(cols, dtype=np.int64).T if cols else np.zeros((Hq.dim(g.degree), 0), dtype=np.int64)
        blocks.append((Lmat, Hq.differential(g.degree - 1), Hq.vector_of(g)))
    n_u = sum(Du.shape[1] for _, Du, _ in blocks)
    rows = [np.hstack([dk, np.zeros((dk.shape[0], n_u), dtype=np.int64)])]
    rhs = [np.zeros(dk.shape[0], dtype=np.int64)]
    off = n_f
    for Lmat, Du, t in blocks:
        row = np.zeros((Lmat.shape[0], n_f + n_u), dtype=np.int64)
        row[:, :n_f] = Lmat
        row[:, off:off + Du.shape[1]] = -Du
        off += Du.shape[1]
        rows.append(row)
        rhs.append(t)
    Mtx = np.vstack(rows) % p
    b = np.concatenate(rhs) % p
    x = solve_mod(Mtx, b, p)
    if x is NoSolution:
        raise LiftFailed("no chain map solves the lifting problem")
    if rng is not None:
        K = kernel_mod(Mtx, p)
        if K.shape[1]:
            x = (x + K @ rng.integers(0, p, size=K.shape[1])) % p
    return H.map(x[:n_f], k)


def null_homotopy(f, rng=None):
    """A map u of degree k-1 with D(u) = f, or LiftFailed."""
    H = HomComplex(f.source, f.target)
    k = f.degree
    Du = H.differential(k - 1)
    x = solve_mod(Du, H.vector_of(f), H.p)
    if x is NoSolution:
        raise LiftFailed("map is not null-homotopic")
    if rng is not None:
        K = kernel_mod(Du, H.p)
        if K.shape[1]:
            x = (x + K @ rng.integers(0, H.p, size=K.shape[1])) % H.p
    return H.map(x, k - 1)


# ---------------------------------------------------------------------------
# semifree resolutions

class SemifreeResolution:
    def __init__(self, P, eps, stages, safe_window):
        self.P, self.eps, self.stages, self.safe_window = P, eps, stages, safe_window


def semifree_resolution(M, window, max_stages=200, max_rank=200):
    """A semifree module P with a quasi-isomorphism P -> M.

    Generators are attached in stages, each stage killing the lowest degree
    cohomology of the cone of the current map inside the degree window.  The map is verified
    to be a quasi-isomorphism in `window` (the safe window); WindowExhausted
    is raised if the attaching process does not settle inside it.
    """
    A = M.algebra
    p = A.p
    if isinstance(M, SemifreeModule):
        return SemifreeResolution(M, ChainMap.identity(M), [M.rank], window)
    gens = []
    D = np.zeros((0, 0, A.dim), dtype=np.int64)
    stages = []
    P = SemifreeModule(A, [], D, check=False)
    eps = ChainMap(P, M, 0, np.zeros((M.dim, 0), dtype=np.int64))
    for stage in range(max_stages):
        tri = cone(eps)
        C = tri.cone
        new = []
        # classes of the cone: C = M + P[1]; a class in degree k is killed by a
        # generator of degree k-1 if it comes from P, or realised by a generator
        # of degree k mapping to it if it comes from M
        for k, (idx, sq) in sorted(C.cohomology_data().items()):
            if k not in window:
                continue
            for c in range(sq.dim):
                v = np.zeros(C.dim, dtype=np.int64)
                v[idx] = sq.reps[:, c]
                new.append((k, v))
        if not new:
            break
        # only the lowest degree classes are killed in one stage
        low = min(k for k, _ in new)
        new = [(k, v) for k, v in new if k == low]
        if stage == max_stages - 1:
            raise WindowExhausted("semifree resolution did not settle")
        # a cone cocycle (m, x) has x in P^{k+1} a cocycle and d m = -eps(x);
        # a generator e of degree k with d e = x and eps(e) = -m kills it
        r = len(gens)
        if any(k < window.lo - 1 for k, _ in new):
            raise WindowExhausted("a generator is needed below the window")
        newgens = gens + [k for k, _ in new]
        if len(newgens) > max_rank:
            raise WindowExhausted("resolution needs more than %d generators" % max_rank)
        s = len(newgens)
        D2 = np.zeros((s, s, A.dim), dtype=np.int64)
        D2[:r, :r] = D
        imgs = list(eps.generator_images())
        for t, (k, v) in enumerate(new):
            if r:
                for i, c in enumerate(P.coefficients(v[M.dim:])):
                    D2[i, r + t] = c
            imgs.append((-v[:M.dim]) % p)
        P = SemifreeModule(A, newgens, D2, check=False)
        eps = ChainMap.from_generators(P, M, 0, imgs)
        gens, D = newgens, D2
        stages.append(len(new))
    P.check()
    if not eps.is_chain_map():
        raise ValueError("resolution map is not a chain map")
    return SemifreeResolution(P, eps, stages, window)


def is_quasi_isomorphism(f, window):
    C = cone(f).cone
    betti = C.betti()
    return all(k not in window for k in betti)


# ---------------------------------------------------------------------------
# cohomology modules

def cohomology_module(X, H=None):
    """H^*(X) as a graded right module over H^*(A).

    Returns (module, reps, coords) where reps are cocycles of X (columns)
    and coords maps a cocycle of X to module coordinates.
    """
    A = X.algebra
    H = H or cohomology(A)
    p = X.p
    data = X.cohomology_data()
    reps, degs = [], []
    offs = {}
    for k in sorted(data):
        idx, sq = data[k]
        offs[k] = len(reps)
        for c in range(sq.dim):
            v = np.zeros(X.dim, dtype=np.int64)
            v[idx] = sq.reps[:, c]
            reps.append(v)
            degs.append(k)
    R = np.array(reps, dtype=np.int64).T if reps else np.zeros((X.dim, 0), dtype=np.int64)
    n = R.shape[1]

    def coords(v):
        v = _mod(v, p)
        out = np.zeros(n, dtype=np.int64)
        if np.any(X.d @ v % p):
            raise ValueError("not a cocycle")
        for k, (idx, sq) in data.items():
            if sq.dim and np.any(v[idx]):
                out[offs[k]:offs[k] + sq.dim] = sq.coords(v[idx])
        return out

    act = np.zeros((n, H.dim, n), dtype=np.int64)
    for m in range(n):
        for r in range(H.dim):
            w = X.right_mult(R[:, m], H.reps[:, r])
            if np.any(w):
                act[m, r] = coords(w)
    Mod = GradedModule(H, degs, act)
    return Mod, R, coords


def induced_map(f, src, tgt):
    """Matrix of H(f) between cohomology modules (module, reps, coords) triples."""
    Msrc, Rs, _ = src
    Mtgt, _, ct = tgt
    cols = [ct(f.matrix @ Rs[:, c] % f.p) for c in range(Rs.shape[1])]
    if not cols:
        return np.zeros((Mtgt.dim, 0), dtype=np.int64)
    return np.array(cols, dtype=np.int64).T
