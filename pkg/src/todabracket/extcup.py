"""
Yoneda Ext over a graded ring and the cup product of a module map with a
Mac Lane (here: matric Hochschild) cohomology class.

Every class is stored in a normal form: a cocycle Q_s -> N of degree t on
the canonical minimal resolution Q of the source module.  An exact sequence
is brought into normal form by lifting the identity of M to a comparison
map from Q; equality of classes is then a linear algebra question in
Hom(Q_*, N).
"""

import numpy as np

from .exactlin import NoSolution, Subquotient, kernel_mod, solve_mod
from .graded import (GradedMap, GradedModule, WindowExhausted, free_map_entries,
                     free_map_from_matrix, free_module, free_resolution,
                     resolution_from_maps)


class ResolutionTooShort(Exception):
    pass


class NotExact(Exception):
    pass


def _key(M):
    return (id(M.ring), M.degrees.tobytes(), M.act.tobytes())


_CANONICAL = {}


def canonical_resolution(M, length):
    """The minimal free resolution of M of at least the given length (cached)."""
    k = _key(M)
    R = _CANONICAL.get(k)
    if R is None or R.length < length:
        R = free_resolution(M, max(length, 2))
        try:
            R.verify()
        except ValueError as e:
            if not M.ring.truncated:
                raise
            # near the edge of a truncated ring products are lost
            raise WindowExhausted("resolution not trustworthy in this window: %s" % e)
        _CANONICAL[k] = R
    return R


def register_resolution(M, R):
    """Install R (for instance one reloaded from disk) as the canonical resolution of M."""
    if not same_module(R.module, M):
        raise ValueError("resolution of a different module")
    R.verify()
    _CANONICAL[_key(M)] = R
    return R


def same_module(M, N):
    return M.ring is N.ring and np.array_equal(M.degrees, N.degrees) and \
        np.array_equal(M.act, N.act)


# ---------------------------------------------------------------------------

class FreeHom:
    """Degree t maps F -> N out of a free module, coordinatized by generator images."""

    def __init__(self, F, N, t):
        self.F, self.N, self.t = F, N, int(t)
        self.p = N.p
        self.basis = [(j, int(m)) for j, g in enumerate(F.gens)
                      for m in N.basis_in_degree(g + self.t)]

    @property
    def dim(self):
        return len(self.basis)

    def map(self, vec):
        imgs = [np.zeros(self.N.dim, dtype=np.int64) for _ in self.F.gens]
        for (j, m), c in zip(self.basis, vec):
            imgs[j][m] = (imgs[j][m] + int(c)) % self.p
        return GradedMap.from_images(self.F, self.N, imgs, self.t)

    def vector(self, f):
        imgs = f.generator_images()
        return np.array([imgs[j][m] for j, m in self.basis], dtype=np.int64) % self.p

    def precompose_matrix(self, g, other):
        """Matrix of phi -> phi o g into the FreeHom `other`."""
        E = np.eye(self.dim, dtype=np.int64)
        cols = [other.vector(self.map(E[c]).compose(g)) for c in range(self.dim)]
        if not cols:
            return np.zeros((other.dim, 0), dtype=np.int64)
        return np.array(cols, dtype=np.int64).T % self.p


class ExtGroup:
    """Ext^{s,t}(M, N) = H^s Hom(Q_*, N[t]) on the canonical resolution Q."""

    def __init__(self, M, N, s, t, resolution=None):
        if M.p != N.p:
            raise ValueError("modules over different fields")
        self.M, self.N, self.s, self.t = M, N, int(s), int(t)
        self.p = M.p
        Q = resolution or canonical_resolution(M, s + 1)
        if Q.length < s + 1:
            raise ResolutionTooShort("need a resolution of length %d" % (s + 1))
        self.Q = Q
        self.hom = FreeHom(Q.modules[s], N, t)
        nxt = FreeHom(Q.modules[s + 1], N, t)
        self.cocycle_matrix = self.hom.precompose_matrix(Q.maps[s + 1], nxt)
        if s > 0:
            prev = FreeHom(Q.modules[s - 1], N, t)
            self.coboundary_matrix = prev.precompose_matrix(Q.maps[s], self.hom)
        else:
            self.coboundary_matrix = np.zeros((self.hom.dim, 0), dtype=np.int64)
        if self.cocycle_matrix.shape[0]:
            Z = kernel_mod(self.cocycle_matrix, self.p)
        else:
            Z = np.eye(self.hom.dim, dtype=np.int64)
        self.sq = Subquotient(Z, self.coboundary_matrix, self.p)

    @property
    def dim(self):
        return self.sq.dim

    def is_cocycle(self, vec):
        return not np.any(self.cocycle_matrix @ vec % self.p)

    def coords(self, vec):
        return self.sq.coords(vec)

    def generators(self):
        return [YonedaClass(self, self.sq.reps[:, c]) for c in range(self.dim)]

    def zero(self):
        return YonedaClass(self, np.zeros(self.hom.dim, dtype=np.int64))

    def class_of(self, f):
        """The class of a cocycle Q_s -> N given as a GradedMap of degree t."""
        return YonedaClass(self, self.hom.vector(f))

    def __repr__(self):
        return "Ext^{%d,%d} of dimension %d" % (self.s, self.t, self.dim)


_EXT = {}


def ext_group(M, N, s, t):
    """Ext^{s,t}_Lambda(M, N) with representative classes, cached."""
    k = (_key(M), _key(N), int(s), int(t))
    E = _EXT.get(k)
    if E is None:
        E = _EXT[k] = ExtGroup(M, N, s, t)
    return E


class YonedaClass:
    """An element of Ext^{s,t}(M, N), as a normal form cocycle on Q_s."""

    def __init__(self, ext, vector, sequence=None):
        self.ext = ext
        self.vector = np.asarray(vector, dtype=np.int64) % ext.p
        if not ext.is_cocycle(self.vector):
            raise NotExact("normal form is not a cocycle")
        self.sequence = sequence

    @property
    def s(self):
        return self.ext.s

    @property
    def t(self):
        return self.ext.t

    @property
    def cocycle(self):
        return self.ext.hom.map(self.vector)

    def coords(self):
        return self.ext.coords(self.vector)

    def is_zero(self):
        return not np.any(self.coords())

    def _compatible(self, other):
        e, f = self.ext, other.ext
        if (e.s, e.t) != (f.s, f.t) or not same_module(e.M, f.M) or not same_module(e.N, f.N):
            raise ValueError("classes live in different Ext groups")
        if e is not f and e.Q is not f.Q:
            raise ValueError("classes are normalized on different resolutions")

    def __eq__(self, other):
        self._compatible(other)
        return self.ext.sq.is_zero(self.vector - other.vector)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(tuple(self.coords()))

    def __add__(self, other):
        self._compatible(other)
        return YonedaClass(self.ext, self.vector + other.vector)

    def __neg__(self):
        return YonedaClass(self.ext, -self.vector)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return YonedaClass(self.ext, int(c) * self.vector)

    def __repr__(self):
        return "YonedaClass(s=%d, t=%d, coords=%s)" % (self.s, self.t, list(self.coords()))


# ---------------------------------------------------------------------------
# exact sequences and comparison maps

def homogeneous_preimage(f, y):
    """Some x with f(x) = y, homogeneous of degree deg(y) - deg f, or NoSolution."""
    y = np.asarray(y, dtype=np.int64) % f.p
    x = np.zeros(f.source.dim, dtype=np.int64)
    nz = np.flatnonzero(y)
    if nz.size == 0:
        return x
    d = int(f.target.degrees[nz[0]])
    if np.any(f.target.degrees[nz] != d):
        raise ValueError("inhomogeneous element")
    tidx = f.target.basis_in_degree(d)
    sidx = f.source.basis_in_degree(d - f.degree)
    if len(sidx) == 0:
        return NoSolution
    sol = solve_mod(f.matrix[np.ix_(tidx, sidx)], y[tidx], f.p)
    if sol is NoSolution:
        return NoSolution
    x[sidx] = sol
    return x


def _lift_images(Qi, images, through):
    out = []
    for y in images:
        x = homogeneous_preimage(through, y)
        if x is NoSolution:
            raise NotExact("comparison map does not lift: sequence is not exact")
        out.append(x)
    return GradedMap.from_images(Qi, through.source, out, 0)


def comparison_maps(Q, maps, stop=None):
    """Lift id_M from the resolution Q to a complex ending in M.

    `maps` = [eps: E_0 -> M, l_1: E_1 -> E_0, ..., l_r: E_r -> E_{r-1}];
    returns [c_0, ..., c_r] with l_i c_i = c_{i-1} lam_i and eps c_0 = eps_Q.
    Only surjectivity onto the kernels is used, which is exactness.
    """
    r = len(maps) - 1 if stop is None else stop
    if Q.length < r:
        raise ResolutionTooShort("the resolution has length %d < %d" % (Q.length, r))
    eps_Q = Q.maps[0]
    c = [_lift_images(Q.modules[0], eps_Q.generator_images(), maps[0])]
    for i in range(1, r + 1):
        lam = Q.maps[i]
        imgs = [c[i - 1](v) for v in lam.generator_images()]
        c.append(_lift_images(Q.modules[i], imgs, maps[i]))
    return c


def yoneda_class(maps, t=0, N=None):
    """The Yoneda class of an exact sequence 0 -> N[t] -> E_{s-1} -> ... -> E_0 -> M -> 0.

    `maps` = [eps, l_1, ..., l_{s-1}, iota] with iota: N[t] -> E_{s-1} injective.
    N defaults to the unshifted module underlying iota's source.
    """
    s = len(maps) - 1
    if s < 1:
        raise ValueError("an extension needs at least one middle term")
    M = maps[0].target
    iota = maps[-1]
    Nt = iota.source
    if N is None:
        N = Nt.shift(-t)
    if np.any(kernel_mod(iota.matrix, iota.p)) and iota.source.dim:
        raise NotExact("the left end is not injective")
    verify_exact(maps)
    E = ext_group(M, N, s, t)
    c = comparison_maps(E.Q, maps)
    cocycle = GradedMap(E.Q.modules[s], N, t, c[s].matrix, check=False)
    return YonedaClass(E, E.hom.vector(cocycle), sequence=maps)


def verify_exact(maps):
    """Check that eps is onto and each spot of the sequence is exact."""
    p = maps[0].p
    eps = maps[0]
    from .exactlin import rank_mod
    if rank_mod(eps.matrix, p) != eps.target.dim:
        raise NotExact("augmentation is not onto")
    for i in range(1, len(maps)):
        f, g = maps[i - 1], maps[i]
        if np.any(f.matrix @ g.matrix % p):
            raise NotExact("not a complex at position %d" % (i - 1))
        ker = f.source.dim - rank_mod(f.matrix, p)
        im = rank_mod(g.matrix, p)
        if ker != im:
            raise NotExact("not exact at position %d" % (i - 1))
    return True


def class_pushforward(f, psi):
    """f_*(Psi) for f: N -> N' of degree u, giving a class in Ext^{s, t+u}(M, N')."""
    E = psi.ext
    if not same_module(f.source, E.N):
        raise ValueError("map does not start at the target of the class")
    phi = f.compose(psi.cocycle)
    F = ext_group(E.M, f.target, E.s, E.t + f.degree)
    if F.Q is not E.Q:
        F = ExtGroup(E.M, f.target, E.s, E.t + f.degree, resolution=E.Q)
    return YonedaClass(F, F.hom.vector(phi))


# ---------------------------------------------------------------------------
# alternative resolutions

def _unitriangular(P, rng):
    """A random automorphism 1 + N of a free module, N nilpotent and homogeneous."""
    R = P.ring
    gens = P.gens
    r = len(gens)
    order = sorted(range(r), key=lambda j: (gens[j], j))
    rank = {j: k for k, j in enumerate(order)}
    ent = [[np.zeros(R.dim, dtype=np.int64) for _ in range(r)] for _ in range(r)]
    for i in range(r):
        ent[i][i] = R.unit.copy()
        for j in range(r):
            if rank[i] < rank[j]:
                idx = R.basis_in_degree(gens[j] - gens[i])
                if len(idx):
                    ent[i][j][idx] = rng.integers(0, R.p, size=len(idx))
    return free_map_from_matrix(P, P, ent)


def _inverse_unipotent(phi):
    """(1 + N)^{-1} = sum (-N)^k."""
    I = GradedMap.identity(phi.source)
    Nm = phi - I
    out, term = I, I
    for _ in range(phi.source.dim + 1):
        term = term.compose(Nm).scale(-1)
        if term.is_zero():
            break
        out = out + term
    return out


def random_resolution(M, length, rng, extra=1, sparse_period=1):
    """A non-minimal, randomly based free resolution of M.

    Starting from the minimal one, `extra` trivial summands F -> F are
    spliced in and every module is twisted by a random unipotent
    automorphism.
    """
    Q = canonical_resolution(M, length)
    R = M.ring
    mods = [Q.modules[i] for i in range(length + 1)]
    ent = [None] + [free_map_entries(Q.maps[i]) for i in range(1, length + 1)]
    gens = [list(P.gens) for P in mods]
    support = [d for d in R.support()]
    for _ in range(extra):
        i = int(rng.integers(0, length))
        base = gens[i] + gens[i + 1] or [0]
        g = int(rng.choice(base)) + int(rng.choice(support))
        if sparse_period > 1:
            g -= g % sparse_period
        # P_i += F(g), P_{i+1} += F(g) with the identity between the new summands
        gens[i].append(g)
        gens[i + 1].append(g)
        z = np.zeros(R.dim, dtype=np.int64)
        if i >= 1:
            ent[i] = [row + [z.copy()] for row in ent[i]]
        e = ent[i + 1]
        e = [row + [z.copy()] for row in e]
        e.append([z.copy() for _ in range(len(gens[i + 1]) - 1)] + [R.unit.copy()])
        ent[i + 1] = e
        if i + 2 <= length:
            ent[i + 2] = ent[i + 2] + [[z.copy() for _ in range(len(gens[i + 2]))]]
    mods = [free_module(R, g) for g in gens]
    eps_imgs = list(Q.maps[0].generator_images())
    eps_imgs += [np.zeros(M.dim, dtype=np.int64)] * (len(gens[0]) - len(eps_imgs))
    maps = [GradedMap.from_images(mods[0], M, eps_imgs)]
    for i in range(1, length + 1):
        maps.append(free_map_from_matrix(mods[i], mods[i - 1], ent[i]))
    phis = [_unitriangular(P, rng) for P in mods]
    inv = [_inverse_unipotent(f) for f in phis]
    new = [maps[0].compose(inv[0])]
    for i in range(1, length + 1):
        new.append(phis[i - 1].compose(maps[i]).compose(inv[i]))
    return resolution_from_maps(M, mods, new, Q.safe_window)


# ---------------------------------------------------------------------------
# the cup product

class CupInput:
    """f: M -> N, a normalized cocycle evaluated on composable free maps, and a resolution.

    `cochain` is any callable taking entry arrays E[i, j, :] of the maps
    lambda_1, ..., lambda_s and returning the entry array of
    c(lambda_1, ..., lambda_s); its `arity` is s and `degree` is t.
    """

    def __init__(self, f, cochain, resolution=None, n=1):
        self.f = f
        self.cochain = cochain
        self.s = int(cochain.arity)
        self.t = int(cochain.degree)
        self.n = int(n)
        M = f.source
        self.resolution = resolution or canonical_resolution(M, self.s + 1)
        if self.resolution.length < self.s:
            raise ResolutionTooShort("the cup product needs %d resolution maps" % self.s)


def entry_array(f):
    """Entries of a map of free modules as an array E[i, j, :]."""
    ent = free_map_entries(f)
    R = f.source.ring
    rows, cols = len(f.target.gens), len(f.source.gens)
    E = np.zeros((rows, cols, R.dim), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            E[i, j] = ent[i][j]
    return E


def evaluate_on_resolution(cochain, res, s=None):
    """c(lambda_1, ..., lambda_s) as a map M_s -> M_0 of degree t."""
    s = cochain.arity if s is None else s
    mats = [entry_array(res.maps[i]) for i in range(1, s + 1)]
    C = cochain(*mats)
    P0, Ps = res.modules[0], res.modules[s]
    ent = [[C[i, j] for j in range(len(Ps.gens))] for i in range(len(P0.gens))]
    return free_map_from_matrix(Ps, P0, ent, degree=cochain.degree)


class KernelObject:
    """ker(lambda) as a graded module with an explicit basis and its inclusion."""

    def __init__(self, lam):
        from .graded import homogeneous_kernel
        P = lam.source
        K = homogeneous_kernel(lam)
        self.basis = K
        n = K.shape[1]
        degs = [int(P.degrees[np.flatnonzero(K[:, c])[0]]) for c in range(n)]
        act = np.zeros((n, P.ring.dim, n), dtype=np.int64)
        E = np.eye(P.ring.dim, dtype=np.int64)
        for c in range(n):
            for r in range(P.ring.dim):
                w = P.act_on(K[:, c], E[r])
                if np.any(w):
                    x = solve_mod(K, w, P.p)
                    act[c, r] = x
        self.module = GradedModule(P.ring, degs, act, check=False)
        self.inclusion = GradedMap(self.module, P, 0, K, check=False)

    def coords(self, v):
        x = solve_mod(self.basis, v, self.inclusion.p)
        if x is NoSolution:
            raise NotExact("vector is not in the kernel")
        return x


def cup_sign(n):
    return -1 if (n * (n + 3) // 2) % 2 else 1


def cup(inp):
    """f cup gamma in Ext^{s,t}(M, N).

    The cocycle is evaluated on lambda_1..lambda_s, factored through
    ker lambda_{s-1} = im lambda_s as tau, pushed forward along f[t] tau and
    multiplied by (-1)^{n(n+3)/2}.
    """
    f, res, s, t = inp.f, inp.resolution, inp.s, inp.t
    M, N = f.source, f.target
    p = M.p
    if res.length < s:
        raise ResolutionTooShort("resolution too short")
    c_eval = evaluate_on_resolution(inp.cochain, res, s)
    top = res.maps[0].compose(c_eval)            # lambda_0[t] c(...): M_s -> M, degree t
    lam_s = res.maps[s]
    if s >= 2:
        Kobj = KernelObject(res.maps[s - 1])
    else:
        Kobj = KernelObject(res.maps[0])
    K = Kobj.module
    # tau on ker lambda_{s-1}: tau(lambda_s x) = top(x) for a spanning set
    cols = [Kobj.coords(lam_s.matrix[:, c]) for c in range(lam_s.source.dim)]
    Lk = np.array(cols, dtype=np.int64).T if cols else np.zeros((K.dim, 0), dtype=np.int64)
    tau_T = solve_mod(Lk.T % p, top.matrix.T % p, p)
    if tau_T is NoSolution:
        raise NotExact("the cocycle does not factor through the kernel")
    tau = GradedMap(K, M, t, tau_T.T, check=False)
    # Psi: 0 -> ker -> M_{s-1} -> ... -> M_0 -> M -> 0 in normal form
    maps = [res.maps[i] for i in range(s)] + [Kobj.inclusion]
    E = ext_group(M, N, s, t)
    comp = comparison_maps(E.Q, maps)
    psi_cocycle = comp[s]                      # Q_s -> ker lambda_{s-1}
    phi = f.compose(tau).compose(psi_cocycle).scale(cup_sign(inp.n))
    out = YonedaClass(E, E.hom.vector(phi))
    out.tau = tau
    out.kernel = Kobj
    return out


def cup_product(f, cochain, resolution=None, n=1):
    return cup(CupInput(f, cochain, resolution=resolution, n=n))
