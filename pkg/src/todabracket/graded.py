"""
Graded rings and graded right modules given by structure constants.

Everything lives on a flat basis: each basis vector carries a degree, the
product is a tensor mult[a, b, c] (e_a e_b = sum_c mult[a, b, c] e_c) and a
right module action is a tensor act[m, r, m'] (e_m e_r = sum act[m, r, m'] e_m').

Rings that are infinite in either direction are cut down to a DegreeWindow.
Products leaving the window are dropped, so such a ring is only associative
for triples whose partial products stay inside; the attribute `edge` records
how far from the boundary results stop being trustworthy.

Module degrees follow the convention (M[t])^k = M^{k+t}.  For a ring graded
homologically (Lambda_k = T(N,N)_k) this is (M[t])_k = M_{k-t}, and it agrees
with the shift of dg-modules used in `dga`.
"""

import itertools

import numpy as np

from .exactlin import (NoSolution, matmul_mod, independent_columns, kernel_mod, rank_mod,
                       solve_mod, abelian_subquotient, is_prime)


class WindowExhausted(Exception):
    """A computation needed degrees outside the available window."""


class NotSparse(Exception):
    """A sparseness hypothesis failed."""


class DegreeWindow:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo, hi = int(lo), int(hi)
        if lo > hi:
            raise ValueError("empty window [%d, %d]" % (lo, hi))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, k, v):
        raise AttributeError("DegreeWindow is immutable")

    @classmethod
    def parse(cls, text):
        lo, hi = text.split("..")
        return cls(int(lo), int(hi))

    def __contains__(self, d):
        return self.lo <= d <= self.hi

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def shrink(self, k):
        if self.hi - self.lo < 2 * k:
            raise WindowExhausted("window [%d, %d] cannot shrink by %d"
                                  % (self.lo, self.hi, k))
        return DegreeWindow(self.lo + k, self.hi - k)

    def __eq__(self, other):
        return isinstance(other, DegreeWindow) and (self.lo, self.hi) == (other.lo, other.hi)

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return "DegreeWindow(%d, %d)" % (self.lo, self.hi)


# ---------------------------------------------------------------------------

class GradedRing:
    """A graded ring on a finite basis.

    p is a prime for algebras over F_p, or 0 for a ring whose homogeneous
    parts are finitely generated abelian groups; then `orders[i]` is the
    additive order of basis vector i (0 for infinite order).
    """

    def __init__(self, p, degrees, mult, unit, window=None, labels=None,
                 orders=None, sparse_period=1, grading="cohomological", edge=0):
        self.p = int(p)
        self.degrees = np.asarray(degrees, dtype=np.int64)
        n = len(self.degrees)
        self.mult = np.asarray(mult, dtype=object if self.p == 0 else np.int64).reshape(n, n, n)
        self.unit = np.asarray(unit, dtype=np.int64).reshape(n)
        if window is None:
            window = DegreeWindow(int(self.degrees.min()) if n else 0,
                                  int(self.degrees.max()) if n else 0)
        self.window = window
        self.labels = list(labels) if labels is not None else ["e%d" % i for i in range(n)]
        if self.p:
            if not is_prime(self.p):
                raise ValueError("characteristic must be prime or 0")
            self.orders = np.full(n, self.p, dtype=np.int64)
            self.mult = np.mod(self.mult, self.p)
        else:
            self.orders = np.asarray(orders if orders is not None else [0] * n, dtype=np.int64)
            self.mult = np.array([[[self._red(int(self.mult[a, b, c]), c) for c in range(n)]
                                   for b in range(n)] for a in range(n)], dtype=object).reshape(n, n, n)
        self.sparse_period = int(sparse_period)
        self.grading = grading
        self.edge = int(edge)
        if any(d not in window for d in self.degrees):
            raise ValueError("basis element outside the window")
        if self.sparse_period > 1 and not self.is_sparse(self.sparse_period):
            raise NotSparse("ring declared %d-sparse is not" % self.sparse_period)

    def _red(self, x, c):
        o = int(self.orders[c])
        return x % o if o else x

    @property
    def dim(self):
        return len(self.degrees)

    @property
    def truncated(self):
        return self.edge > 0

    def basis_in_degree(self, d):
        return np.flatnonzero(self.degrees == d)

    def support(self):
        return sorted(set(int(d) for d in self.degrees))

    def element(self, label):
        v = np.zeros(self.dim, dtype=np.int64)
        v[self.labels.index(label)] = 1
        return v

    def reduce(self, v):
        if self.p:
            return np.mod(np.asarray(v, dtype=np.int64), self.p)
        return np.array([self._red(int(x), i) for i, x in enumerate(v)], dtype=object)

    def mul(self, a, b):
        if self.p:
            out = np.einsum("a,b,abc->c", np.asarray(a, dtype=np.int64),
                            np.asarray(b, dtype=np.int64), self.mult)
            return np.mod(out, self.p)
        out = [0] * self.dim
        for i in np.flatnonzero(np.asarray(a, dtype=object) != 0):
            for j in np.flatnonzero(np.asarray(b, dtype=object) != 0):
                for c in np.flatnonzero(self.mult[i, j] != 0):
                    out[c] += int(a[i]) * int(b[j]) * int(self.mult[i, j, c])
        return self.reduce(out)

    def degree_of(self, v):
        nz = np.flatnonzero(np.asarray(v) != 0)
        ds = set(int(self.degrees[i]) for i in nz)
        if len(ds) > 1:
            raise ValueError("inhomogeneous element")
        return ds.pop() if ds else None

    def is_sparse(self, n):
        return all(int(d) % n == 0 for d in self.degrees)

    def check(self):
        """Verify unit laws and associativity inside the window."""
        n = self.dim
        E = np.eye(n, dtype=np.int64)
        for i in range(n):
            if np.any(self.reduce(self.mul(self.unit, E[i]) - E[i])) or \
               np.any(self.reduce(self.mul(E[i], self.unit) - E[i])):
                raise ValueError("unit law fails at %s" % self.labels[i])
        w = self.window
        for a, b, c in itertools.product(range(n), repeat=3):
            da, db, dc = (int(self.degrees[x]) for x in (a, b, c))
            if self.truncated and not (da + db in w and db + dc in w):
                continue
            lhs = self.mul(self.mul(E[a], E[b]), E[c])
            rhs = self.mul(E[a], self.mul(E[b], E[c]))
            if np.any(self.reduce(lhs - rhs)):
                raise ValueError("associativity fails on (%s, %s, %s)"
                                 % (self.labels[a], self.labels[b], self.labels[c]))
        for a, b in itertools.product(range(n), repeat=2):
            for c in np.flatnonzero(self.mult[a, b] != 0):
                if self.degrees[c] != self.degrees[a] + self.degrees[b]:
                    raise ValueError("product not homogeneous")
        return True

    def component(self, d):
        """Invariant factors of the degree d part (0 for a free summand)."""
        idx = self.basis_in_degree(d)
        if self.p:
            return [self.p] * len(idx)
        return sorted(int(self.orders[i]) for i in idx if self.orders[i] != 0) + \
            [0] * sum(1 for i in idx if self.orders[i] == 0)

    def subgroup(self, gens, d):
        """Invariants of the subgroup of the degree d part spanned by gens."""
        idx = list(self.basis_in_degree(d))
        if not gens:
            return []
        if self.p:
            m = np.array([[int(g[i]) for i in idx] for g in gens], dtype=np.int64).T
            return [self.p] * rank_mod(m, self.p)
        rel = []
        for k, i in enumerate(idx):
            if self.orders[i]:
                v = [0] * len(idx)
                v[k] = int(self.orders[i])
                rel.append(v)
        Z = [[int(g[i]) for i in idx] for g in gens] + rel
        return abelian_subquotient(Z, rel, len(idx))

    def __repr__(self):
        return "GradedRing(p=%d, dim=%d, window=%r)" % (self.p, self.dim, self.window)


def ring_from_table(p, labels, degrees, products, window=None, **kw):
    """Build a ring from a dict {(x, y): {z: c}} of products of labels.

    The label "1" must be present; products with the unit are implied.
    """
    n = len(labels)
    mult = np.zeros((n, n, n), dtype=object if p == 0 else np.int64)
    ix = {l: i for i, l in enumerate(labels)}
    u = ix["1"]
    for i in range(n):
        mult[u, i, i] = 1
        mult[i, u, i] = 1
    for (x, y), out in products.items():
        for z, c in out.items():
            mult[ix[x], ix[y], ix[z]] = c
    unit = np.zeros(n, dtype=np.int64)
    unit[u] = 1
    return GradedRing(p, degrees, mult, unit, window=window, labels=labels, **kw)


def build_ko_ring(window):
    """The coefficient ring of real K-theory inside a degree window.

    Generated by eta (degree 1), omega (degree 4) and beta^{+-1} (degree 8)
    subject to 2 eta = 0, eta^3 = 0, eta omega = 0, omega^2 = 4 beta.
    Graded homologically.
    """
    if not (window.lo <= 0 and window.hi >= 2):
        raise ValueError("window must contain [0, 2]")
    labels, degrees, orders, key = [], [], [], {}
    for k in range(window.lo // 8 - 1, window.hi // 8 + 2):
        for r, (name, order) in ((0, ("", 0)), (1, ("eta", 2)), (2, ("eta^2", 2)),
                                 (4, ("omega", 0))):
            d = 8 * k + r
            if d not in window:
                continue
            b = "" if k == 0 else ("beta" if k == 1 else "beta^%d" % k)
            lab = "*".join(x for x in (name, b) if x) or "1"
            key[(r, k)] = len(labels)
            labels.append(lab)
            degrees.append(d)
            orders.append(order)
    n = len(labels)
    mult = np.zeros((n, n, n), dtype=object)
    inv = {v: k for k, v in key.items()}
    for a in range(n):
        for b in range(n):
            (ra, ka), (rb, kb) = inv[a], inv[b]
            k = ka + kb
            if ra == 4 and rb == 4:
                r, c = 0, 4
                k += 1
            elif ra == 4 or rb == 4:
                if ra and rb:
                    continue
                r, c = 4, 1
            else:
                r, c = ra + rb, 1
                if r > 2:
                    continue
            if (r, k) in key:
                mult[a, b, key[(r, k)]] = c
    unit = np.zeros(n, dtype=np.int64)
    unit[key[(0, 0)]] = 1
    return GradedRing(0, degrees, mult, unit, window=window, labels=labels,
                      orders=orders, grading="homological", edge=8)


def truncated_polynomial_ring(p, var_degree, top, var="x"):
    """F_p[x]/(x^{top+1}) with |x| = var_degree."""
    labels = ["1"] + [var if k == 1 else "%s^%d" % (var, k) for k in range(1, top + 1)]
    degrees = [k * var_degree for k in range(top + 1)]
    n = top + 1
    mult = np.zeros((n, n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            if a + b <= top:
                mult[a, b, a + b] = 1
    unit = np.zeros(n, dtype=np.int64)
    unit[0] = 1
    per = abs(var_degree) if var_degree else 1
    return GradedRing(p, degrees, mult, unit, labels=labels,
                      sparse_period=per if top else 1)


def laurent_ring(p, var_degree, window, var="u"):
    """F_p[u, u^{-1}] with |u| = var_degree, cut down to a window."""
    ks = [k for k in range(window.lo // var_degree - 1, window.hi // var_degree + 2)
          if k * var_degree in window]
    labels = ["1" if k == 0 else (var if k == 1 else "%s^%d" % (var, k)) for k in ks]
    degrees = [k * var_degree for k in ks]
    n = len(ks)
    pos = {k: i for i, k in enumerate(ks)}
    mult = np.zeros((n, n, n), dtype=np.int64)
    for a, ka in enumerate(ks):
        for b, kb in enumerate(ks):
            if ka + kb in pos:
                mult[a, b, pos[ka + kb]] = 1
    unit = np.zeros(n, dtype=np.int64)
    unit[pos[0]] = 1
    return GradedRing(p, degrees, mult, unit, window=window, labels=labels,
                      sparse_period=abs(var_degree), edge=abs(var_degree))


# ---------------------------------------------------------------------------

class GradedModule:
    """A graded right module over a GradedRing over F_p, on a flat basis."""

    def __init__(self, ring, degrees, act, labels=None, gens=None, check=True):
        if not ring.p:
            raise ValueError("modules are only supported over F_p")
        self.ring = ring
        self.p = ring.p
        self.degrees = np.asarray(degrees, dtype=np.int64).reshape(-1)
        n = len(self.degrees)
        self.act = np.mod(np.asarray(act, dtype=np.int64).reshape(n, ring.dim, n), self.p)
        self.labels = labels if labels is not None else ["m%d" % i for i in range(n)]
        # free modules record their generator degrees and basis layout
        self.gens = None if gens is None else [int(g) for g in gens]
        self._layout = None
        if check:
            self.check()

    @property
    def dim(self):
        return len(self.degrees)

    @property
    def is_free(self):
        return self.gens is not None

    def basis_in_degree(self, d):
        return np.flatnonzero(self.degrees == d)

    def support(self):
        return sorted(set(int(d) for d in self.degrees))

    def act_on(self, v, r):
        v = np.asarray(v, dtype=np.int64)
        nz = np.flatnonzero(v)
        t = np.tensordot(v[nz], self.act[nz], axes=(0, 0))
        return np.mod(np.asarray(r, dtype=np.int64) @ t, self.p)

    def right_mult_matrix(self, r):
        """Matrix of m -> m r."""
        return np.mod(np.einsum("r,mrn->nm", np.asarray(r, dtype=np.int64), self.act), self.p)

    def check(self):
        R = self.ring
        n = self.dim
        for m in range(n):
            for r in range(R.dim):
                for c in np.flatnonzero(self.act[m, r]):
                    if self.degrees[c] != self.degrees[m] + R.degrees[r]:
                        raise ValueError("action not homogeneous")
        one = np.einsum("r,mrn->mn", R.unit, self.act) % self.p
        if not np.array_equal(one, np.eye(n, dtype=np.int64)):
            raise ValueError("unit does not act as identity")
        # (m r) s = m (r s)
        lhs = np.einsum("mrn,nsk->mrsk", self.act, self.act) % self.p
        rhs = np.einsum("rst,mtk->mrsk", R.mult, self.act) % self.p
        if R.truncated:
            ok = (R.degrees[:, None] + R.degrees[None, :])
            mask = np.isin(ok, list(R.window))
            lhs = lhs * mask[None, :, :, None]
            rhs = rhs * mask[None, :, :, None]
        if not np.array_equal(lhs, rhs):
            raise ValueError("module action not associative")
        return True

    def shift(self, t):
        """M[t], with (M[t])^k = M^{k+t}."""
        return GradedModule(self.ring, self.degrees - t, self.act, labels=self.labels,
                            gens=None if self.gens is None else [g - t for g in self.gens],
                            check=False)

    def layout(self):
        """For a free module: list of (generator, ring basis index) per basis vector."""
        return self._layout

    def __repr__(self):
        return "GradedModule(dim=%d, support=%s)" % (self.dim, self.support())


def free_module(ring, gen_degrees, window=None):
    """The free right module on generators of the given degrees."""
    if window is None:
        window = ring.window
        if gen_degrees:
            window = DegreeWindow(min(window.lo, window.lo + min(gen_degrees)),
                                  max(window.hi, window.hi + max(gen_degrees)))
    layout, degrees, labels = [], [], []
    for j, g in enumerate(gen_degrees):
        for b in range(ring.dim):
            d = g + int(ring.degrees[b])
            if d in window:
                layout.append((j, b))
                degrees.append(d)
                labels.append("g%d*%s" % (j, ring.labels[b]))
    n = len(layout)
    pos = {x: i for i, x in enumerate(layout)}
    act = np.zeros((n, ring.dim, n), dtype=np.int64)
    for i, (j, b) in enumerate(layout):
        for r in range(ring.dim):
            for c in np.flatnonzero(ring.mult[b, r]):
                k = pos.get((j, int(c)))
                if k is not None:
                    act[i, r, k] = (act[i, r, k] + ring.mult[b, r, c]) % ring.p
    M = GradedModule(ring, degrees, act, labels=labels, gens=list(gen_degrees),
                     check=False)
    M._layout = layout
    M._pos = pos
    M.window = window
    return M


def shifted_free(ring, shifts):
    """Sum of the modules ring[a] for a in shifts (generator of ring[a] in degree -a)."""
    return free_module(ring, [-a for a in shifts])


def generator_vector(F, j):
    v = np.zeros(F.dim, dtype=np.int64)
    v[F._pos[(j, int(np.flatnonzero(F.ring.unit)[0]))]] = 1
    return v


def element_of_free(F, coeffs):
    """Element sum_j g_j coeffs[j] of a free module, coeffs being ring vectors."""
    v = np.zeros(F.dim, dtype=np.int64)
    for j, c in enumerate(coeffs):
        for b in np.flatnonzero(np.asarray(c) % F.p):
            k = F._pos.get((j, int(b)))
            if k is None:
                raise WindowExhausted("element leaves the window of the free module")
            v[k] = (v[k] + int(c[b])) % F.p
    return v


def ring_coefficients(F, v):
    """Inverse of element_of_free: per generator ring vectors."""
    out = [np.zeros(F.ring.dim, dtype=np.int64) for _ in F.gens]
    for i in np.flatnonzero(np.asarray(v) % F.p):
        j, b = F._layout[i]
        out[j][b] = (out[j][b] + v[i]) % F.p
    return out


def residue_module(ring, degree=0):
    """The ground field F_p in one degree, acted on through augmentation."""
    act = np.zeros((1, ring.dim, 1), dtype=np.int64)
    act[0, :, 0] = ring.unit
    return GradedModule(ring, [degree], act, labels=["k"])


def quotient_module(ring, gen_degrees, relations):
    """Cokernel of the map into a free module given by relation vectors.

    Returns (Q, F, proj) with F the free module and proj the quotient map
    as a matrix.
    """
    F = free_module(ring, gen_degrees)
    S = submodule_span(F, [np.asarray(r) for r in relations])
    nS = S.shape[1]
    piv = independent_columns(np.hstack([S, np.eye(F.dim, dtype=np.int64)]), F.p)
    keep = [c - nS for c in piv if c >= nS]
    B = np.hstack([S, np.eye(F.dim, dtype=np.int64)[:, keep]])
    proj = solve_mod(B, np.eye(F.dim, dtype=np.int64), F.p)[nS:]
    n = len(keep)
    act = np.zeros((n, ring.dim, n), dtype=np.int64)
    for i, k in enumerate(keep):
        for r in range(ring.dim):
            act[i, r] = proj @ F.act[k, r] % F.p
    Q = GradedModule(ring, F.degrees[keep], act, labels=[F.labels[k] for k in keep])
    return Q, F, proj


def _deg_of(M, v):
    nz = np.flatnonzero(np.asarray(v) % M.p)
    if nz.size == 0:
        return None
    return int(M.degrees[nz[0]])


def submodule_span(M, vectors):
    """Columns spanning the submodule generated by homogeneous vectors."""
    cols = []
    for v in vectors:
        v = np.asarray(v, dtype=np.int64) % M.p
        if not np.any(v):
            continue
        for r in range(M.ring.dim):
            w = M.act_on(v, np.eye(M.ring.dim, dtype=np.int64)[r])
            if np.any(w):
                cols.append(w)
    if not cols:
        return np.zeros((M.dim, 0), dtype=np.int64)
    C = np.array(cols, dtype=np.int64).T
    return C[:, independent_columns(C, M.p)]


# ---------------------------------------------------------------------------

class GradedMap:
    """A map M -> N[t] of graded modules, i.e. raising degrees by t."""

    def __init__(self, source, target, degree, matrix, check=True):
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.matrix = np.mod(np.asarray(matrix, dtype=np.int64).reshape(target.dim, source.dim),
                             source.p)
        if check:
            self.check()

    @property
    def p(self):
        return self.source.p

    def check(self):
        for j, i in zip(*np.nonzero(self.matrix.T)):
            if self.target.degrees[i] != self.source.degrees[j] + self.degree:
                raise ValueError("map does not have degree %d" % self.degree)
        R = self.source.ring
        E = np.eye(R.dim, dtype=np.int64)
        for r in range(R.dim):
            lhs = self.matrix @ self.source.right_mult_matrix(E[r]) % self.p
            rhs = self.target.right_mult_matrix(E[r]) @ self.matrix % self.p
            if not np.array_equal(lhs, rhs):
                raise ValueError("map is not Lambda-linear")
        return True

    def __call__(self, v):
        return self.matrix @ np.asarray(v, dtype=np.int64) % self.p

    def compose(self, other):
        """self o other."""
        return GradedMap(other.source, self.target, self.degree + other.degree,
                         matmul_mod(self.matrix, other.matrix, self.p), check=False)

    def __add__(self, other):
        return GradedMap(self.source, self.target, self.degree,
                         self.matrix + other.matrix, check=False)

    def __sub__(self, other):
        return GradedMap(self.source, self.target, self.degree,
                         self.matrix - other.matrix, check=False)

    def scale(self, c):
        return GradedMap(self.source, self.target, self.degree, self.matrix * int(c),
                         check=False)

    def is_zero(self):
        return not np.any(self.matrix)

    def kernel(self):
        return kernel_mod(self.matrix, self.p)

    def image(self):
        return self.matrix[:, independent_columns(self.matrix, self.p)]

    @classmethod
    def zero(cls, source, target, degree=0):
        return cls(source, target, degree, np.zeros((target.dim, source.dim), dtype=np.int64),
                   check=False)

    @classmethod
    def identity(cls, M):
        return cls(M, M, 0, np.eye(M.dim, dtype=np.int64), check=False)

    @classmethod
    def from_images(cls, F, N, images, degree=0, check=False):
        """The map on a free module F sending generator j to images[j]."""
        if not F.is_free:
            raise ValueError("source must be free")
        E = np.eye(F.ring.dim, dtype=np.int64)
        M = np.zeros((N.dim, F.dim), dtype=np.int64)
        for i, (j, b) in enumerate(F._layout):
            M[:, i] = N.act_on(images[j], E[b])
        return cls(F, N, degree, M, check=check)

    def generator_images(self):
        F = self.source
        return [self.matrix[:, F._pos[(j, int(np.flatnonzero(F.ring.unit)[0]))]]
                for j in range(len(F.gens))]


def free_map_from_matrix(F, G, entries, degree=0):
    """Map of free modules from a matrix of ring vectors.

    entries[i][j] is the coefficient of target generator i in the image of
    source generator j, so g_j -> sum_i h_i entries[i][j].
    """
    imgs = [element_of_free(G, [entries[i][j] for i in range(len(G.gens))])
            for j in range(len(F.gens))]
    return GradedMap.from_images(F, G, imgs, degree)


def free_map_entries(f):
    """Matrix of ring vectors of a map between free modules."""
    F, G = f.source, f.target
    imgs = f.generator_images()
    cols = [ring_coefficients(G, v) for v in imgs]
    return [[cols[j][i] for j in range(len(F.gens))] for i in range(len(G.gens))]


# ---------------------------------------------------------------------------

def minimal_generators(M, sub, sparse_period=1, allowed=None):
    """Minimal homogeneous generators of a submodule of M.

    `sub` holds columns spanning a graded subspace closed under the action.
    Generators are chosen in increasing degree, ties broken by basis order.
    Over a truncated ring with elements of both signs (a Laurent ring cut to
    a window) any degree generates its neighbours, so the search instead runs
    outward from the middle of the window, away from the lossy edges.
    """
    p = M.p
    if sub.shape[1] == 0:
        return []
    degs = [_deg_of(M, sub[:, k]) for k in range(sub.shape[1])]
    order = sorted(set(degs))
    R = M.ring
    if R.truncated and R.degrees.min() < 0 < R.degrees.max():
        mid = (R.window.lo + R.window.hi) / 2
        order.sort(key=lambda d: (abs(d - mid), d))
    gens = []
    for d in order:
        Kd = sub[:, [k for k, e in enumerate(degs) if e == d]]
        span = submodule_span(M, gens) if gens else np.zeros((M.dim, 0), dtype=np.int64)
        Sd = span[:, [k for k in range(span.shape[1]) if _deg_of(M, span[:, k]) == d]]
        full = np.hstack([Sd, Kd])
        piv = independent_columns(full, p)
        new = [Kd[:, c - Sd.shape[1]] for c in piv if c >= Sd.shape[1]]
        if new and sparse_period > 1 and d % sparse_period:
            raise NotSparse("generator needed in degree %d" % d)
        if new and allowed is not None and d not in allowed:
            raise WindowExhausted("generator needed in degree %d outside %r" % (d, allowed))
        gens.extend(new)
    return gens


def homogeneous_kernel(f):
    """Kernel of a graded map, as homogeneous columns."""
    cols = []
    for d in f.source.support():
        idx = f.source.basis_in_degree(d)
        K = kernel_mod(f.matrix[:, idx], f.p)
        for k in range(K.shape[1]):
            v = np.zeros(f.source.dim, dtype=np.int64)
            v[idx] = K[:, k]
            cols.append(v)
    if not cols:
        return np.zeros((f.source.dim, 0), dtype=np.int64)
    return np.array(cols, dtype=np.int64).T


class Resolution:
    """A free resolution ... -> P_1 -> P_0 -> M.

    maps[i] is lambda_i: P_i -> P_{i-1} for i >= 1 and maps[0] is the
    augmentation P_0 -> M.  `safe_window` is the range of degrees where
    exactness has been verified.
    """

    def __init__(self, module, modules, maps, safe_window):
        self.module = module
        self.modules = modules
        self.maps = maps
        self.safe_window = safe_window

    @property
    def length(self):
        return len(self.modules) - 1

    def verify(self):
        M = self.module
        eps = self.maps[0]
        if rank_mod(eps.matrix, M.p) != M.dim:
            raise ValueError("augmentation not onto")
        for i in range(1, len(self.maps)):
            f, g = self.maps[i - 1], self.maps[i]
            if np.any(f.matrix @ g.matrix % M.p):
                raise ValueError("not a complex at P_%d" % (i - 1))
            for d in self.safe_window:
                idx = f.source.basis_in_degree(d)
                jdx = g.source.basis_in_degree(d)
                kd = len(idx) - rank_mod(f.matrix[:, idx], M.p) if len(idx) else 0
                im = rank_mod(g.matrix[np.ix_(idx, jdx)], M.p) if len(idx) and len(jdx) else 0
                if kd != im:
                    raise ValueError("not exact at P_%d in degree %d" % (i - 1, d))
        return True


def free_resolution(M, length, sparse_period=1, window=None):
    """Minimal free resolution of M of the given length.

    Raises WindowExhausted when a generator would be needed outside the
    window.  For rings cut down to a window, the trusted range shrinks by the
    ring's edge at each step.
    """
    R = M.ring
    if window is None and R.truncated:
        window = R.window
    if window is None:
        lo = min([R.window.lo] + M.support()) - (length + 2) * max(1, max(abs(int(d)) for d in R.degrees) if R.dim else 1)
        hi = max([R.window.hi] + M.support()) + (length + 2) * max(1, max(abs(int(d)) for d in R.degrees) if R.dim else 1)
        window = DegreeWindow(lo, hi)
    safe = window
    if M.dim == 0:
        P0 = free_module(R, [])
        return Resolution(M, [P0] * (length + 1),
                          [GradedMap.zero(P0, M)] + [GradedMap.zero(P0, P0)] * length, safe)
    gens = minimal_generators(M, np.eye(M.dim, dtype=np.int64), sparse_period, allowed=safe)
    P = free_module(R, [_deg_of(M, g) for g in gens], window=window)
    eps = GradedMap.from_images(P, M, gens)
    modules, maps = [P], [eps]
    K = homogeneous_kernel(eps)
    for i in range(1, length + 1):
        if R.truncated:
            safe = safe.shrink(R.edge)
        gens = minimal_generators(P, K, sparse_period, allowed=safe)
        Q = free_module(R, [_deg_of(P, g) for g in gens], window=window)
        lam = GradedMap.from_images(Q, P, gens)
        modules.append(Q)
        maps.append(lam)
        P = Q
        K = homogeneous_kernel(lam)
    return Resolution(M, modules, maps, safe)


def resolution_from_maps(M, modules, maps, safe_window=None):
    r = Resolution(M, modules, maps, safe_window or DegreeWindow(
        min(min(P.support() or [0]) for P in modules),
        max(max(P.support() or [0]) for P in modules)))
    r.verify()
    return r
