"""
Toda brackets in D(A) through filtered objects, Postnikov systems realizing
a free resolution of an H^*(A)-module, and their obstruction classes.

Objects are semifree dg-modules; a homotopy class is represented by a chain
map together with the group of classes it lives in.  Shifts of maps keep the
matrix: for a degree zero f: X -> Y, f[t]: X[t] -> Y[t] has the same entries.
"""

import numpy as np

from .exactlin import NoSolution, Subquotient, independent_columns, solve_mod
from .dga import (ChainMap, HomComplex, HomotopyGroup, LiftFailed, SemifreeModule,
                  cohomology, cohomology_module, cone, free_dg_module,
                  null_homotopy, solve_homotopy_equation)
from .graded import (GradedMap, NotSparse, free_map_entries, ring_coefficients)
from .extcup import (canonical_resolution, cup_product, homogeneous_preimage,
                     yoneda_class)


class CompositeNonzero(Exception):
    pass


class NotSplit(Exception):
    pass


class ObstructionNonzero(Exception):
    def __init__(self, msg, kappa=None, system=None):
        Exception.__init__(self, msg)
        self.kappa = kappa
        self.system = system


def shift_map(f, t):
    """f[t] for a degree zero map."""
    return ChainMap(f.source.shift(t), f.target.shift(t), f.degree, f.matrix)


def is_null(f):
    """Whether a chain map out of a semifree module is null-homotopic."""
    return HomotopyGroup(f.source, f.target, f.degree).is_null(f)


def multiplication_map(A, a, source_degree, target_degree=0, name=None):
    """e -> e' a between rank one free dg-modules, for a cocycle a of A."""
    X1 = free_dg_module(A, [source_degree])
    X0 = free_dg_module(A, [target_degree])
    return ChainMap.from_generators(X1, X0, 0, [X0.element([a])])


def chain_of_multiplications(A, elements, top=0, degrees=None):
    """The composable maps lambda_i: X_i -> X_{i-1}, e_i -> e_{i-1} a_i.

    X_0 has its generator in degree `top`; the degree of e_i is the sum of
    the degrees of a_1, ..., a_i (plus top).  Zero elements need their
    degree from `degrees`.  Returns [lambda_1, ...].
    """
    degs = [top]
    for i, a in enumerate(elements):
        d = A.degree_of(a) if degrees is None or degrees[i] is None else degrees[i]
        if d is None:
            raise ValueError("the degree of a zero element must be given")
        degs.append(degs[-1] + d)
    mods = [free_dg_module(A, [d]) for d in degs]
    return [ChainMap.from_generators(mods[i + 1], mods[i], 0, [mods[i].element([a])])
            for i, a in enumerate(elements)]


# ---------------------------------------------------------------------------
# filtered objects

class FilteredObject:
    """An n-filtered object in {mu_1, ..., mu_{n-1}} built by iterated cones.

    stages[j] = F_{j} for j = 1..n (F_0 = 0 omitted); incl[j] is i_j: F_j -> F_{j+1};
    proj[j] is p_j: F_j -> Y_{j-1}[j-1]; conn[j] is d_j: Y_j[j] -> F_j[1]
    stored as a degree zero map with the matrix of alpha_j.
    """

    def __init__(self, maps):
        self.maps = list(maps)
        self.stages = {}
        self.incl = {}
        self.proj = {}
        self.conn = {}
        self.alpha = {}
        self.sigma_prime = None
        self.sigma = None

    @property
    def n(self):
        return len(self.maps) + 1

    @property
    def X(self):
        return self.stages[self.n]

    def check(self):
        """(p_j[1]) d_j = mu_j[j] up to homotopy, and each i_j is a cone inclusion."""
        for j in range(1, self.n):
            pj = self.proj[j]
            lhs = pj.compose(self.alpha[j])
            rhs = shift_map(self.maps[j - 1], j - 1)
            diff = ChainMap(rhs.source, rhs.target, 0, lhs.matrix - rhs.matrix)
            if not is_null(diff):
                return False
        return True


def build_filtered(maps, rng=None, check=True):
    """A (l+1)-filtered object in {mu_1, ..., mu_l} for composable chain maps.

    The first stage is the cone of mu_1; each further stage is the cone of a
    map alpha_j: Y_j[j-1] -> F_j lifting mu_j[j-1] through sigma.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("need at least one map")
    if check:
        for a, b in zip(maps, maps[1:]):
            if not is_null(a.compose(b)):
                raise CompositeNonzero("consecutive composite is not null-homotopic")
    F = FilteredObject(maps)
    Y0 = maps[0].target
    F.stages[1] = Y0
    F.proj[1] = ChainMap.identity(Y0)
    F.sigma_prime = ChainMap.identity(Y0)
    for j in range(1, len(maps) + 1):
        mu = shift_map(maps[j - 1], j - 1)       # Y_j[j-1] -> Y_{j-1}[j-1]
        Fj = F.stages[j]
        if j == 1:
            alpha = ChainMap(mu.source, Fj, 0, mu.matrix)
        else:
            try:
                alpha = solve_homotopy_equation(mu.source, Fj, 0,
                                                [("post", F.proj[j], mu)], rng=rng)
            except LiftFailed:
                G = HomotopyGroup(shift_map(maps[j - 2], j - 1).source, F.stages[j - 1], -1) \
                    if j >= 2 else None
                raise LiftFailed("no lift of mu_%d through sigma; the group "
                                 "T(Y_%d[%d], F_%d) has dimension %s"
                                 % (j, j - 1, j - 1, j - 1, None if G is None else G.dim),
                                 group=G)
        T = cone(alpha)
        F.alpha[j] = alpha
        F.stages[j + 1] = T.cone
        F.incl[j] = T.i
        # p_{j+1} = -q and d_j = alpha[1] make F_j -> F_{j+1} -> Y_j[j] -> F_j[1] distinguished
        F.proj[j + 1] = -T.q
        F.conn[j] = ChainMap(T.q.target, Fj.shift(1), 0, alpha.matrix)
        F.sigma_prime = T.i.compose(F.sigma_prime)
    F.sigma = F.proj[F.n]
    return F


# ---------------------------------------------------------------------------
# brackets

class BracketResult:
    """A coset gamma + I inside T(X_m[m-2], X_0) for a bracket of m maps."""

    def __init__(self, maps, representative, indeterminacy, group, witnesses=None):
        self.maps = maps
        self.representative = representative
        self.group = group
        self.indeterminacy = indeterminacy       # columns: class coordinates
        self.witnesses = witnesses or {}
        self.empty = representative is None
        self._sq = Subquotient(np.eye(group.dim, dtype=np.int64),
                               indeterminacy, group.p if hasattr(group, "p") else group.hom.p)

    @property
    def p(self):
        return self.group.hom.p

    @property
    def coords(self):
        return self.group.coords(self.representative)

    @property
    def indeterminacy_dim(self):
        return len(independent_columns(self.indeterminacy, self.p)) if self.indeterminacy.size else 0

    def contains(self, f):
        """Whether the class of f lies in the bracket."""
        v = self.group.coords(f) if isinstance(f, ChainMap) else np.asarray(f)
        return self._sq.is_zero((v - self.coords) % self.p)

    def contains_zero(self):
        return self._sq.is_zero(self.coords)

    def ring_value(self):
        """For rank one objects: the bracket representative as an element of H^*(A)."""
        f = self.representative
        if f.source.rank != 1 or f.target.rank != 1:
            raise ValueError("ring values need rank one objects")
        A = f.source.algebra
        H = cohomology(A)
        a = f.target.coefficients(f.generator_images()[0])[0]
        return H.coords(a)

    def indeterminacy_ring(self):
        """Indeterminacy as ring vectors (rank one objects)."""
        reps = self.group.representatives()
        H = cohomology(self.representative.source.algebra)
        out = []
        for c in range(self.indeterminacy.shape[1]):
            g = sum((r.scale(int(x)) for r, x in zip(reps, self.indeterminacy[:, c])),
                    ChainMap.zero(self.group.P, self.group.M))
            a = g.target.coefficients(g.generator_images()[0])[0]
            out.append(H.coords(a))
        return out

    def __repr__(self):
        return "BracketResult(coords=%s, indeterminacy=%d)" % (list(self.coords), self.indeterminacy_dim)


def indeterminacy(maps):
    """(lambda_1)_* T(X_m[m-2], X_1) + (lambda_m[m-2])^* T(X_{m-1}[m-2], X_0).

    Returns (columns of class coordinates, the ambient group)."""
    m = len(maps)
    l1, lm = maps[0], maps[-1]
    src = lm.source.shift(m - 2)
    G = HomotopyGroup(src, l1.target, 0)
    cols = []
    for f in HomotopyGroup(src, l1.source, 0).representatives():
        cols.append(G.coords(l1.compose(f)))
    lms = shift_map(lm, m - 2)
    for g in HomotopyGroup(lms.target, l1.target, 0).representatives():
        cols.append(G.coords(g.compose(lms)))
    p = G.hom.p
    if not cols:
        return np.zeros((G.dim, 0), dtype=np.int64), G
    C = np.array(cols, dtype=np.int64).T % p
    return C[:, independent_columns(C, p)], G


def toda_bracket(maps, rng=None):
    """An element of the m-fold bracket with the indeterminacy of the split case.

    Uses an (m-1)-filtered object X in {lambda_2, ..., lambda_{m-1}} and
    maps gamma_0: X -> X_0, gamma_m: X_m[m-2] -> X with gamma_0 sigma' = lambda_1
    and sigma gamma_m = lambda_m[m-2].
    """
    maps = list(maps)
    m = len(maps)
    if m < 3:
        raise ValueError("a bracket needs at least three maps")
    for a, b in zip(maps, maps[1:]):
        if not is_null(a.compose(b)):
            raise CompositeNonzero("consecutive composite is not null-homotopic")
    F = build_filtered(maps[1:m - 1], rng=rng, check=False)
    X = F.X
    l1 = maps[0]
    lm = shift_map(maps[-1], m - 2)
    try:
        g0 = solve_homotopy_equation(X, l1.target, 0, [("pre", F.sigma_prime, l1)], rng=rng)
        gm = solve_homotopy_equation(lm.source, X, 0, [("post", F.sigma, lm)], rng=rng)
    except LiftFailed:
        return BracketResult(maps, None, np.zeros((0, 0), dtype=np.int64),
                             HomotopyGroup(lm.source, l1.target, 0))
    gamma = g0.compose(gm)
    ind, G = indeterminacy(maps)
    return BracketResult(maps, gamma, ind, G,
                         witnesses={"filtered": F, "gamma_0": g0, "gamma_m": gm})


def triple_bracket(l1, l2, l3, rng=None):
    return toda_bracket([l1, l2, l3], rng=rng)


def check_split(objects, n, window=None):
    """T(X, Y)_* is n-sparse for all listed semifree objects."""
    for X in objects:
        for Y in objects:
            Hc = HomComplex(X, Y)
            lo = int(min(Y.degrees)) - max(X.gens) - 1
            hi = int(max(Y.degrees)) - min(X.gens) + 1
            for k in range(lo, hi + 1):
                if k % n and Hc.cohomology(k).dim:
                    return False
    return True


def higher_bracket(maps, n, rng=None, verify_split=True):
    """The (n+2)-fold bracket in an n-split situation."""
    if len(maps) != n + 2:
        raise ValueError("an n-split bracket has n + 2 maps")
    if verify_split:
        objs = [maps[0].target] + [f.source for f in maps]
        if not check_split(objs, n):
            raise NotSplit("the objects do not span an %d-split subcategory" % n)
    res = toda_bracket(maps, rng=rng)
    if res.empty:
        raise LiftFailed("bracket is empty")
    return res


def ring_indeterminacy(ring, elements, n=1):
    """Indeterminacy lambda_1 Lambda + Lambda lambda_m of a bracket of ring elements.

    The objects are shifted copies of the free rank one module; the bracket
    of m = n + 2 maps of degrees d_i lives in degree sum d_i + n for a
    homologically graded ring (sum d_i - n cohomologically).
    """
    m = len(elements)
    sgn = 1 if getattr(ring, "grading", "cohomological") == "homological" else -1
    degs = [ring.degree_of(e) for e in elements]
    if any(d is None for d in degs):
        return {"degree": None, "invariants": []}
    D = sum(degs) + sgn * (m - 2)
    gens = []
    for b in ring.basis_in_degree(D - degs[0]):
        E = np.zeros(ring.dim, dtype=np.int64)
        E[b] = 1
        gens.append(ring.mul(elements[0], E))
    for b in ring.basis_in_degree(D - degs[-1]):
        E = np.zeros(ring.dim, dtype=np.int64)
        E[b] = 1
        gens.append(ring.mul(E, elements[-1]))
    gens = [g for g in gens if any(int(x) for x in g)]
    return {"degree": D, "invariants": [int(x) for x in ring.subgroup(gens, D)]}


# ---------------------------------------------------------------------------
# chain-level oracles

def massey_oracle(A, a, b, c):
    """<[a], [b], [c]> by the defining formula a w - (-1)^{|a|} z c, dz = ab, dw = bc.

    Returns (class coordinates, indeterminacy columns) in H^*(A).  The
    bracket of the multiplication maps e -> e a, e -> e b, e -> e c is
    (-1)^{|a|} times this class.
    """
    H = cohomology(A)
    p = A.p
    z = solve_mod(A.d, A.mul(a, b), p)
    w = solve_mod(A.d, A.mul(b, c), p)
    if z is NoSolution or w is NoSolution:
        raise CompositeNonzero("a product is not a coboundary")
    da = A.degree_of(a)
    val = (A.mul(a, w) - (-1) ** (da % 2) * A.mul(z, c)) % p
    cls = H.coords(val)
    D = (da + A.degree_of(b) + A.degree_of(c) - 1)
    ha, hc = H.coords(a), H.coords(c)
    cols = []
    for r in range(H.dim):
        e = np.zeros(H.dim, dtype=np.int64)
        e[r] = 1
        for v in (H.mul(ha, e), H.mul(e, hc)):
            if np.any(v) and H.degree_of(v) == D:
                cols.append(v)
    ind = np.array(cols, dtype=np.int64).T if cols else np.zeros((H.dim, 0), dtype=np.int64)
    return cls, ind


# ---------------------------------------------------------------------------
# realizing free modules

class Realization:
    """Free H^*(A)-modules realized as semifree modules with zero differential.

    A basis element (j, b) of a free module corresponds to the cocycle
    e_j * r_b, where r_b is the representative of the basis class b.
    """

    def __init__(self, A, rng=None):
        self.A = A
        self.H = cohomology(A)
        R = self.H.reps.copy()
        if rng is not None:
            # move representatives by coboundaries
            B = A.d
            for c in range(R.shape[1]):
                dg = self.H.degrees[c]
                prv = A.basis_in_degree(dg - 1)
                if len(prv):
                    u = np.zeros(A.dim, dtype=np.int64)
                    u[prv] = rng.integers(0, A.p, size=len(prv))
                    R[:, c] = (R[:, c] + B @ u) % A.p
        self.reps = R
        self._mods = {}

    def rep(self, h):
        return self.reps @ np.asarray(h, dtype=np.int64) % self.A.p

    def module(self, P):
        key = id(P)
        if key not in self._mods:
            self._mods[key] = (P, free_dg_module(self.A, list(P.gens)))
        return self._mods[key][1]

    def element(self, P, v):
        X = self.module(P)
        return X.element([self.rep(c) for c in ring_coefficients(P, v)]) if P.gens else \
            np.zeros(0, dtype=np.int64)

    def map(self, f):
        """Chain map X(P) -> X(P') realizing a map of free modules."""
        X, Y = self.module(f.source), self.module(f.target)
        ent = free_map_entries(f)
        imgs = [Y.element([self.rep(ent[i][j]) for i in range(len(f.target.gens))])
                for j in range(len(f.source.gens))]
        return ChainMap.from_generators(X, Y, f.degree, imgs)

    def coords(self, P, w):
        """The element of P whose realization is cohomologous to the cocycle w."""
        X = self.module(P)
        p = self.A.p
        cols = [self.element(P, e) for e in np.eye(P.dim, dtype=np.int64)]
        R = np.array(cols, dtype=np.int64).T if cols else np.zeros((X.dim, 0), dtype=np.int64)
        Bd = X.d
        x = solve_mod(np.hstack([R, Bd]) % p, np.asarray(w) % p, p)
        if x is NoSolution:
            raise ValueError("not a cocycle of the realization")
        return x[:P.dim]


# ---------------------------------------------------------------------------
# Postnikov systems

class PostnikovSystem:
    """Data (X_j, Y_j, iota_j, pi_j, alpha_j) realizing a free resolution of M.

    Y_0 = X_0 and Y_j = cone(iota_j)[-1] = Y_{j-1}[-1] + X_j, with alpha_j the
    degree one inclusion Y_{j-1} -> Y_j and pi_j the projection onto X_j.
    The maps d_j = pi_{j-1} iota_j realize the resolution maps.
    """

    def __init__(self, A, M, resolution, realization, k):
        self.A, self.M, self.resolution, self.realization, self.k = A, M, resolution, realization, k
        self.X, self.Y, self.iota, self.pi, self.alpha, self.d = {}, {}, {}, {}, {}, {}

    def alpha_composite(self):
        """alpha_{k-1} ... alpha_1 as a degree k-1 map Y_0 -> Y_{k-1}."""
        k = self.k
        f = ChainMap.identity(self.Y[0])
        for j in range(1, k):
            f = self.alpha[j].compose(f)
        return f

    def check(self):
        """Chain map conditions and that pi_{j-1} iota_j realizes the resolution."""
        for j in range(1, self.k + 1):
            if not self.iota[j].is_chain_map():
                return False
            comp = self.iota[j] if j == 1 else self.pi[j - 1].compose(self.iota[j])
            diff = comp - self.d[j]
            if not is_null(diff):
                return False
        for j in range(1, self.k):
            if not (self.pi[j].is_chain_map() and self.alpha[j].is_chain_map()):
                return False
        return True

    def verify_exactness(self):
        """T(A, -)_* of the realized resolution is exact (it is the given resolution)."""
        return self.resolution.verify()


def build_postnikov(A, M, k, resolution=None, rng=None, realization=None):
    """An exact k-Postnikov system for an H^*(A)-module M.

    Raises ObstructionNonzero with the blocking class when some iota_j does
    not exist.
    """
    H = cohomology(A)
    if M.ring is not H:
        raise ValueError("M must be a module over cohomology(A)")
    if k < 1:
        raise ValueError("k must be positive")
    res = resolution or canonical_resolution(M, k)
    if res.length < k:
        raise ValueError("resolution too short")
    real = realization or Realization(A, rng=rng)
    S = PostnikovSystem(A, M, res, real, k)
    for j in range(0, k + 1):
        S.X[j] = real.module(res.modules[j])
    for j in range(1, k + 1):
        S.d[j] = real.map(res.maps[j])
    S.Y[0] = S.X[0]
    iota = S.d[1]
    if rng is not None:
        iota = iota + _random_boundary(S.X[1], S.Y[0], rng)
    S.iota[1] = iota
    for j in range(1, k):
        T = cone(S.iota[j])
        Yj = T.cone.shift(-1)
        ny = S.Y[j - 1].dim
        I = np.eye(Yj.dim, dtype=np.int64)
        S.Y[j] = Yj
        S.alpha[j] = ChainMap(S.Y[j - 1], Yj, 1, I[:, :ny])
        S.pi[j] = ChainMap(Yj, S.X[j], 0, I[ny:, :])
        try:
            S.iota[j + 1] = solve_homotopy_equation(S.X[j + 1], Yj, 0,
                                                    [("post", S.pi[j], S.d[j + 1])], rng=rng)
        except LiftFailed:
            S.k = j
            kappa = obstruction(S)
            raise ObstructionNonzero("the %d-Postnikov system does not extend" % j,
                                     kappa=kappa, system=S)
    return S


def _random_boundary(X, Y, rng):
    Hc = HomComplex(X, Y)
    D = Hc.differential(-1)
    u = rng.integers(0, X.p, size=D.shape[1]) if D.shape[1] else np.zeros(0, dtype=np.int64)
    vec = D @ u % X.p if D.shape[1] else np.zeros(Hc.dim(0), dtype=np.int64)
    return Hc.map(vec, 0)


class ObstructionClass:
    def __init__(self, kappa, sequence, system):
        self.kappa = kappa
        self.sequence = sequence
        self.system = system

    def is_zero(self):
        return self.kappa.is_zero()

    def __eq__(self, other):
        return self.kappa == other.kappa

    def __repr__(self):
        return "ObstructionClass(kappa_%d, %r)" % (self.system.k + 1, self.kappa)


def obstruction(system):
    """kappa_{k+1}(M) as the Yoneda class of
    0 -> M[1-k] -> H(Y_{k-1}) -> P_{k-1} -> ... -> P_0 -> M -> 0."""
    S = system
    k = S.k
    if k < 2:
        raise ValueError("obstructions start with k = 2")
    M, res, real = S.M, S.resolution, S.realization
    p = M.p
    Yk = S.Y[k - 1]
    E, Ereps, Ecoords = cohomology_module(Yk, real.H)
    alpha = S.alpha_composite()
    eps = res.maps[0]
    P0 = res.modules[0]
    Ms = M.shift(1 - k)
    cols = []
    for m in range(M.dim):
        v = homogeneous_preimage(eps, np.eye(M.dim, dtype=np.int64)[m])
        w = real.element(P0, v)
        cols.append(Ecoords(alpha.matrix @ w % p))
    eta = GradedMap(Ms, E, 0, np.array(cols, dtype=np.int64).T if cols else
                    np.zeros((E.dim, 0), dtype=np.int64), check=False)
    Pk = res.modules[k - 1]
    pcols = [real.coords(Pk, S.pi[k - 1].matrix @ Ereps[:, c] % p) for c in range(E.dim)]
    pi_star = GradedMap(E, Pk, 0, np.array(pcols, dtype=np.int64).T if pcols else
                        np.zeros((Pk.dim, 0), dtype=np.int64), check=False)
    seq = [res.maps[i] for i in range(k)] + [pi_star, eta]
    kappa = yoneda_class(seq, t=1 - k, N=M)
    return ObstructionClass(kappa, seq, S)


def kappa(A, M, k, rng=None, resolution=None):
    """kappa_{k+1}(M) from a (possibly randomized) k-Postnikov system."""
    S = build_postnikov(A, M, k, resolution=resolution, rng=rng)
    return obstruction(S)


# ---------------------------------------------------------------------------

def verify_main_theorem(A, n, M, rng=None):
    """Compare id_M cup [m_{n+2}] with kappa_{n+2}(M), computed independently."""
    from .ainf import matric_extension, universal_class
    H = cohomology(A)
    if not H.is_sparse(n):
        raise NotSparse("H^*(A) is not %d-sparse" % n)
    m, cls = universal_class(A, n, rng=rng)
    lhs = cup_product(GradedMap.identity(M), matric_extension(m), n=n)
    rhs = kappa(A, M, n + 1, rng=rng).kappa
    equal = lhs == rhs
    return {
        "n": n,
        "lhs": [int(x) for x in lhs.coords()],
        "rhs": [int(x) for x in rhs.coords()],
        "lhs_zero": bool(lhs.is_zero()),
        "rhs_zero": bool(rhs.is_zero()),
        "equal": bool(equal),
        "equal_up_to_sign": bool(equal or lhs == -rhs),
        "ext_dim": int(lhs.ext.dim),
        "lhs_class": lhs,
        "rhs_class": rhs,
    }
