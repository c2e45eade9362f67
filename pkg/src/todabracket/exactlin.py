"""
Exact linear algebra over prime fields F_p and over the integers.

Matrices over F_p are numpy int64 arrays with entries in [0, p).  Every
reduction pivots on the first nonzero entry, scanning columns left to right
and rows top to bottom, so all downstream choices of representatives are
reproducible.

Integer matrices use Python ints (arbitrary precision) held in lists of rows.
"""

import numpy as np


class _NoSolution:
    """Returned by `solve` when the right hand side is not in the column space."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = object.__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NoSolution = _NoSolution()


def is_prime(p):
    p = int(p)
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def as_mod(a, p):
    a = np.asarray(a, dtype=np.int64)
    return np.mod(a, p)


def matmul_mod(a, b, p):
    """a @ b mod p.  Reduced operands go through float64 BLAS when every dot
    product stays below 2^53, which keeps the result exact."""
    a, b = as_mod(a, p), as_mod(b, p)
    if a.ndim == 2 and b.ndim == 2 and a.shape[1] * (p - 1) ** 2 < 2 ** 52:
        return np.mod(np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64), p)
    if a.shape[-1] * (p - 1) ** 2 < 2 ** 63:
        return np.mod(a @ b, p)
    return np.mod(a.astype(object) @ b.astype(object), p).astype(np.int64)


# ---------------------------------------------------------------------------
# raw array routines

def rref(a, p):
    """Reduced row echelon form of a mod p.

    Returns (R, pivots) with pivots the list of pivot columns.
    """
    a = as_mod(a, p).copy()
    if a.ndim != 2:
        raise ValueError("rref expects a 2d array")
    rows, cols = a.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r, c:] = (a[r, c:] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        nzr = np.flatnonzero(col)
        if nzr.size:
            a[np.ix_(nzr, np.arange(c, cols))] = (
                a[np.ix_(nzr, np.arange(c, cols))]
                - np.outer(col[nzr], a[r, c:])) % p
        piv.append(c)
        r += 1
    return a, piv


def rank_mod(a, p):
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if p == 2 and min(a.shape) > 64:
        return rank_gf2_dense(a)
    return len(rref(a, p)[1])


def kernel_mod(a, p):
    """Columns spanning the right kernel of a (shape cols x k)."""
    a = as_mod(a, p)
    rows, cols = a.shape
    if rows == 0:
        return np.eye(cols, dtype=np.int64)
    R, piv = rref(a, p)
    free = [c for c in range(cols) if c not in set(piv)]
    K = np.zeros((cols, len(free)), dtype=np.int64)
    for j, f in enumerate(free):
        K[f, j] = 1
        for i, c in enumerate(piv):
            K[c, j] = (-R[i, f]) % p
    return K


def solve_mod(a, b, p):
    """Solve a x = b mod p for a vector or matrix b.

    Free variables are set to 0.  Returns NoSolution if some column of b is
    not in the column space.
    """
    a = as_mod(a, p)
    b = as_mod(b, p)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    rows, cols = a.shape
    if rows == 0:
        return np.zeros((cols,) if vec else (cols, b.shape[1]), dtype=np.int64)
    R, piv = rref(np.hstack([a, b]), p)
    if piv and piv[-1] >= cols:
        return NoSolution
    x = np.zeros((cols, b.shape[1]), dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = R[i, cols:]
    return x[:, 0] if vec else x


def independent_columns(a, p):
    """Indices of the first maximal independent subset of columns."""
    a = np.asarray(a)
    if a.size == 0:
        return []
    return rref(a, p)[1]


# ---------------------------------------------------------------------------
# fast rank over F_2 for big sparse coboundary matrices

try:
    import numba

    _njit = numba.njit(cache=True)
except ImportError:  # pragma: no cover
    def _njit(f):
        return f


@_njit
def _gf2_sparse_rank(indptr, indices, ncols, target):
    W = (ncols + 63) // 64
    cap = min(ncols, target)
    basis = np.zeros((cap + 1, W), dtype=np.uint64)
    pivot = -np.ones(ncols, dtype=np.int64)
    v = np.zeros(W, dtype=np.uint64)
    one = np.uint64(1)
    r = 0
    nrows = indptr.shape[0] - 1
    for i in range(nrows):
        if r >= cap:
            break
        for w in range(W):
            v[w] = 0
        for q in range(indptr[i], indptr[i + 1]):
            j = indices[q]
            v[j >> 6] ^= one << np.uint64(j & 63)
        for q in range(indptr[i], indptr[i + 1]):
            j = indices[q]
            if (v[j >> 6] >> np.uint64(j & 63)) & one:
                k = pivot[j]
                if k >= 0:
                    for w in range(W):
                        v[w] ^= basis[k, w]
        c = -1
        for w in range(W):
            if v[w] != 0:
                x = v[w]
                b = 0
                while not ((x >> np.uint64(b)) & one):
                    b += 1
                c = w * 64 + b
                break
        if c < 0:
            continue
        cw = c >> 6
        cb = np.uint64(c & 63)
        for k in range(r):
            if (basis[k, cw] >> cb) & one:
                for w in range(W):
                    basis[k, w] ^= v[w]
        for w in range(W):
            basis[r, w] = v[w]
        pivot[c] = r
        r += 1
    return r


def rank_gf2_sparse(indptr, indices, ncols, target=None):
    """Rank over F_2 of a sparse 0/1 matrix in CSR form.

    Repeated indices in a row cancel in pairs.  `target` is an upper bound
    on the rank; elimination stops once it is reached.
    """
    if target is None:
        target = ncols
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    if ncols == 0 or indptr.shape[0] <= 1:
        return 0
    return int(_gf2_sparse_rank(indptr, indices, int(ncols), int(target)))


def rank_gf2_dense(a):
    a = np.asarray(a) % 2
    if a.shape[0] < a.shape[1]:
        a = a.T
    rows, cols = np.nonzero(a)
    indptr = np.searchsorted(rows, np.arange(a.shape[0] + 1))
    return rank_gf2_sparse(indptr, cols, a.shape[1])


# ---------------------------------------------------------------------------
# FieldMatrix

class FieldMatrix:
    """An immutable matrix over F_p."""

    __slots__ = ("p", "entries")

    def __init__(self, p, entries, shape=None):
        p = int(p)
        if not is_prime(p):
            raise ValueError("modulus %d is not prime" % p)
        a = np.array(entries, dtype=np.int64)
        if shape is not None:
            a = a.reshape(shape)
        if a.ndim == 1 and shape is None:
            a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
        if a.ndim != 2:
            raise ValueError("entries must form a 2d array")
        a = np.mod(a, p)
        a.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "entries", a)

    def __setattr__(self, k, v):
        raise AttributeError("FieldMatrix is immutable")

    @classmethod
    def zeros(cls, p, rows, cols):
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p, n):
        return cls(p, np.eye(n, dtype=np.int64))

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    @property
    def shape(self):
        return self.entries.shape

    @property
    def T(self):
        return FieldMatrix(self.p, self.entries.T)

    def _check(self, other):
        if not isinstance(other, FieldMatrix) or other.p != self.p:
            raise ValueError("matrices over different fields")

    def __matmul__(self, other):
        if isinstance(other, FieldMatrix):
            self._check(other)
            return FieldMatrix(self.p, (self.entries @ other.entries) % self.p)
        return (self.entries @ as_mod(other, self.p)) % self.p

    def __add__(self, other):
        self._check(other)
        return FieldMatrix(self.p, self.entries + other.entries)

    def __sub__(self, other):
        self._check(other)
        return FieldMatrix(self.p, self.entries - other.entries)

    def __neg__(self):
        return FieldMatrix(self.p, -self.entries)

    def scale(self, c):
        return FieldMatrix(self.p, self.entries * int(c))

    def __eq__(self, other):
        return (isinstance(other, FieldMatrix) and other.p == self.p
                and other.shape == self.shape
                and bool(np.array_equal(other.entries, self.entries)))

    def __hash__(self):
        return hash((self.p, self.shape, self.entries.tobytes()))

    def __repr__(self):
        return "FieldMatrix(p=%d, %s)" % (self.p, self.entries.tolist())

    def rank(self):
        return rank_mod(self.entries, self.p)


def rank_kernel_image(m):
    """Rank, kernel basis (as columns) and image basis (as columns) of m."""
    p = m.p
    a = m.entries
    if a.size == 0:
        return 0, FieldMatrix.identity(p, m.cols), FieldMatrix.zeros(p, m.rows, 0)
    R, piv = rref(a, p)
    K = kernel_mod(a, p)
    img = a[:, piv] if piv else np.zeros((m.rows, 0), dtype=np.int64)
    return (len(piv), FieldMatrix(p, K, shape=K.shape),
            FieldMatrix(p, img, shape=img.shape))


def solve(m, b):
    """A solution x of m x = b, or NoSolution.

    Among all solutions the one with every free variable 0 is returned,
    which is the lexicographically first assignment of the free variables.
    """
    b = np.asarray(b, dtype=np.int64).reshape(-1)
    if b.shape[0] != m.rows:
        raise ValueError("right hand side has %d entries, expected %d"
                         % (b.shape[0], m.rows))
    return solve_mod(m.entries, b, m.p)


# ---------------------------------------------------------------------------
# subquotients Z / B over F_p

class Subquotient:
    """The quotient span(Z) / span(B) of column spaces, with B inside Z.

    `reps` are columns of Z completing a basis of B to a basis of Z; the
    coordinates of a vector of Z are read off against that combined basis.
    """

    def __init__(self, Z, B, p):
        self.p = p
        Z = as_mod(Z, p)
        B = as_mod(B, p)
        if Z.ndim == 1:
            Z = Z[:, None]
        if B.ndim == 1:
            B = B[:, None]
        n = Z.shape[0]
        if B.shape[0] != n:
            B = np.zeros((n, 0), dtype=np.int64)
        self.ambient = n
        bi = independent_columns(B, p)
        Bb = B[:, bi]
        full = np.hstack([Bb, Z])
        piv = independent_columns(full, p) if full.size else []
        nb = len(bi)
        self.B = Bb
        self.reps = full[:, [c for c in piv if c >= nb]]
        self.dim = self.reps.shape[1]
        self._basis = np.hstack([self.B, self.reps])

    def coords(self, v):
        """Class coordinates of v (a vector, or columns) in terms of reps."""
        v = as_mod(v, self.p)
        vec = v.ndim == 1
        if vec:
            v = v[:, None]
        if self._basis.shape[1] == 0:
            if np.any(v):
                raise ValueError("vector is not in Z")
            out = np.zeros((0, v.shape[1]), dtype=np.int64)
            return out[:, 0] if vec else out
        x = solve_mod(self._basis, v, self.p)
        if x is NoSolution:
            raise ValueError("vector is not in Z")
        out = x[self.B.shape[1]:]
        return out[:, 0] if vec else out

    def is_zero(self, v):
        return not np.any(self.coords(v))

    def contains(self, v):
        v = as_mod(v, self.p)
        if v.ndim == 1:
            v = v[:, None]
        if self._basis.shape[1] == 0:
            return not np.any(v)
        return solve_mod(self._basis, v, self.p) is not NoSolution


# ---------------------------------------------------------------------------
# integer matrices

class IntMatrix:
    """An immutable matrix of arbitrary precision integers."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data, rows=None, cols=None):
        data = [[int(x) for x in row] for row in data]
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError("ragged integer matrix")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", tuple(tuple(r) for r in data))

    def __setattr__(self, k, v):
        raise AttributeError("IntMatrix is immutable")

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def zeros(cls, rows, cols):
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    def tolist(self):
        return [list(r) for r in self.data]

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        oc = list(zip(*other.data)) if other.rows else [()] * other.cols
        return IntMatrix([[sum(a * b for a, b in zip(r, c)) for c in oc]
                          for r in self.data], self.rows, other.cols)

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self.data == other.data \
            and self.rows == other.rows and self.cols == other.cols

    def __hash__(self):
        return hash(self.data)

    def __repr__(self):
        return "IntMatrix(%s)" % (self.tolist(),)

    def determinant(self):
        """Exact determinant by fraction-free (Bareiss) elimination."""
        n = self.rows
        if n != self.cols:
            raise ValueError("not square")
        a = self.tolist()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k]:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1] if n else 1


def _smith(data, rows, cols, want_vinv=False):
    A = [list(r) for r in data]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]
    Vi = [[int(i == j) for j in range(cols)] for i in range(cols)] if want_vinv else None

    def rowop(i, k, q):  # row_i += q row_k
        A[i] = [x + q * y for x, y in zip(A[i], A[k])]
        U[i] = [x + q * y for x, y in zip(U[i], U[k])]

    def rowswap(i, k):
        A[i], A[k] = A[k], A[i]
        U[i], U[k] = U[k], U[i]

    def colop(j, k, q):  # col_j += q col_k
        for r in A:
            r[j] += q * r[k]
        for r in V:
            r[j] += q * r[k]
        if Vi is not None:  # inverse: row_k -= q row_j
            Vi[k] = [x - q * y for x, y in zip(Vi[k], Vi[j])]

    def colswap(j, k):
        for r in A:
            r[j], r[k] = r[k], r[j]
        for r in V:
            r[j], r[k] = r[k], r[j]
        if Vi is not None:
            Vi[j], Vi[k] = Vi[k], Vi[j]

    diag = []
    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                x = A[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        rowswap(t, i)
        colswap(t, j)
        while True:
            done = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    rowop(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        rowswap(t, i)
                        done = False
            for j in range(t + 1, cols):
                if A[t][j]:
                    colop(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        colswap(t, j)
                        done = False
            if not done:
                continue
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if A[i][j] % A[t][t]:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            rowop(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        diag.append(A[t][t])
        t += 1
    return diag, U, V, Vi


def smith_normal_form(m):
    """Smith normal form: (diag, U, V) with U m V diagonal.

    `diag` lists the nonzero invariant factors, each dividing the next;
    U and V are unimodular.
    """
    diag, U, V, _ = _smith(m.data, m.rows, m.cols)
    return diag, IntMatrix(U, m.rows, m.rows), IntMatrix(V, m.cols, m.cols)


def invariant_factors(rows):
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return []
    return _smith(rows, len(rows), len(rows[0]))[0]


def lattice_echelon(gens, n):
    """Basis of the sublattice of Z^n spanned by the given vectors.

    The basis vectors c_0, c_1, ... have strictly increasing pivot rows and
    vanish above their pivot; returned as (basis, pivots).
    """
    cols = [list(map(int, g)) for g in gens if any(g)]
    basis, pivots = [], []
    for row in range(n):
        live = [c for c in cols if c[row]]
        if not live:
            continue
        rest = [c for c in cols if not c[row]]
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[row]))
            piv = live[0]
            nxt = [piv]
            for c in live[1:]:
                q = c[row] // piv[row]
                c = [x - q * y for x, y in zip(c, piv)]
                if c[row]:
                    nxt.append(c)
                elif any(c):
                    rest.append(c)
            live = nxt
        piv = live[0]
        if piv[row] < 0:
            piv = [-x for x in piv]
        basis.append(piv)
        pivots.append(row)
        cols = rest
    return basis, pivots


def lattice_coords(basis, pivots, v):
    """Integer coordinates of v in an echelon lattice basis."""
    v = list(map(int, v))
    out = []
    for c, r in zip(basis, pivots):
        q, rem = divmod(v[r], c[r])
        if rem:
            raise ValueError("vector not in lattice")
        out.append(q)
        if q:
            v = [x - q * y for x, y in zip(v, c)]
    if any(v):
        raise ValueError("vector not in lattice")
    return out


def integer_kernel(rows, ncols):
    """Lattice basis (list of vectors) of the integer kernel of a matrix."""
    if not rows:
        return [[int(i == j) for i in range(ncols)] for j in range(ncols)]
    diag, U, V, _ = _smith(rows, len(rows), ncols)
    r = len(diag)
    return [[V[i][j] for i in range(ncols)] for j in range(r, ncols)]


def abelian_subquotient(Z, B, n):
    """Invariants of span(Z) / span(B) for lattices B inside Z inside Z^n.

    Returns the list of invariant factors, with 0 standing for a free
    summand and trivial factors 1 dropped.
    """
    basis, pivots = lattice_echelon(Z, n)
    k = len(basis)
    if k == 0:
        return []
    coords = [lattice_coords(basis, pivots, b) for b in B if any(b)]
    if not coords:
        return [0] * k
    mat = [[c[i] for c in coords] for i in range(k)]
    diag = invariant_factors(mat)
    return sorted(d for d in diag if d != 1) + [0] * (k - len(diag))
