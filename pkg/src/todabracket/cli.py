"""
Command line front end.

A workspace is a YAML document declaring dgas, rings, modules, maps,
complexes, categories and bimodules by name, plus a task list whose entries
supply default arguments for the verbs:

    todabracket verify_theorem heisenberg
    todabracket massey formal --format machine
    todabracket catcoh bz2 --degree 3

Reports are deterministic.  The machine format is canonical JSON, so equal
inputs give byte-identical result files.  Expensive intermediates
(minimal resolutions, transferred A-infinity operations) can be cached on
disk with --cache; a cached run writes exactly the same result file as a
cold one.
"""

import argparse
import hashlib
import json
import os
import re
import sys
import time
from importlib import resources

import numpy as np
import yaml

from . import extcup
from .ainf import (AInfinityStructure, HochschildClass, matric_extension, transfer)
from .catcoh import (CochainSpaceTooLarge, FiniteRing, InfiniteCochainSpace, category_from_monoid,
                     cohomology_of_category, constant_bimodule, cyclic_group_table,
                     free_module_category, group_module_bimodule, hom_bimodule)
from .dga import (ContractionInvalid, DGAlgebra, LiftFailed, algebra_from_table, cohomology,
                  contraction, exterior_algebra, formal_dga, truncated_free_dga)
from .exactlin import NoSolution, solve_mod
from .extcup import NotExact, ResolutionTooShort, cup_product, ext_group
from .graded import (DegreeWindow, GradedMap, NotSparse, WindowExhausted, build_ko_ring,
                     free_module, laurent_ring, quotient_module, residue_module, ring_from_table,
                     truncated_polynomial_ring, Resolution)
from .toda import (CompositeNonzero, NotSplit, ObstructionNonzero, chain_of_multiplications,
                   higher_bracket, kappa, massey_oracle, ring_indeterminacy, toda_bracket)

FORMAT_VERSION = 1
VERBS = ("cohomology", "transfer", "massey", "universal_class", "cup", "obstruction",
         "verify_theorem", "catcoh")
FULL_LIMIT = 64          # arrays with more entries are reported by hash

EXIT_OK, EXIT_VALIDATION, EXIT_MATH, EXIT_WINDOW = 0, 1, 2, 3
MATH_ERRORS = (CompositeNonzero, NotSplit, NotSparse, LiftFailed, ObstructionNonzero,
               ContractionInvalid, NotExact, ResolutionTooShort, InfiniteCochainSpace,
               CochainSpaceTooLarge)


class ValidationError(Exception):
    """A problem with the workspace or the command line, located by field path and line."""

    def __init__(self, msg, field=None, line=None):
        self.field, self.line = field, line
        where = ""
        if field:
            where = field + (" (line %d)" % line if line else "") + ": "
        super().__init__(where + msg)


class MathFailure(Exception):
    """A computation finished with a negative verdict."""


# ---------------------------------------------------------------------------
# YAML with line numbers

class _Map(dict):
    """A mapping that remembers the source line of each key."""
    line = None
    key_lines = None


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _Map()
    out.line = node.start_mark.line + 1
    out.key_lines = {}
    for k, v in node.value:
        key = loader.construct_object(k, deep=True)
        if key in out:
            raise ValidationError("duplicate key %r" % key, line=k.start_mark.line + 1)
        out[key] = loader.construct_object(v, deep=True)
        out.key_lines[key] = k.start_mark.line + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _line(node, key=None):
    if isinstance(node, _Map):
        if key is not None and node.key_lines and key in node.key_lines:
            return node.key_lines[key]
        return node.line
    return None


def _parse_int(x, field, line=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError("expected an integer, got %r" % (x,), field, line)
    return x


def bundled_workspaces():
    root = resources.files(__package__) / "workspaces"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def read_workspace_text(name_or_path):
    if os.path.exists(name_or_path):
        with open(name_or_path) as fh:
            return fh.read(), name_or_path
    root = resources.files(__package__) / "workspaces"
    f = root / (name_or_path + ".yaml")
    if f.is_file():
        return f.read_text(), "bundled:" + name_or_path
    raise ValidationError("no workspace file or bundled workspace %r (bundled: %s)"
                          % (name_or_path, ", ".join(bundled_workspaces())), "workspace")


# ---------------------------------------------------------------------------
# element parsing

_TERM = re.compile(r"\s*([+-]?)\s*(\d*)\s*\*?\s*([^+\-\s][^+]*?)\s*(?=[+-]|$)")


def parse_element(text, labels, p, field, line=None):
    """A vector from '2 ab + c - x', a mapping {label: coefficient} or 0."""
    n = len(labels)
    v = np.zeros(n, dtype=object if p == 0 else np.int64)
    if isinstance(text, int) and not isinstance(text, bool):
        if text == 0:
            return v
        text = str(text)
    if isinstance(text, dict):
        items = []
        for k, c in text.items():
            items.append((str(k), _parse_int(c, field + "." + str(k), _line(text, k))))
    elif isinstance(text, str):
        items = []
        pos = 0
        s = text.strip()
        while pos < len(s):
            m = _TERM.match(s, pos)
            if not m or m.end() == pos:
                raise ValidationError("cannot parse element %r" % text, field, line)
            sign, coef, lab = m.groups()
            c = int(coef) if coef else 1
            if sign == "-":
                c = -c
            lab = lab.strip()
            if lab not in labels and coef and not lab:
                lab = "1"
            items.append((lab, c))
            pos = m.end()
    else:
        raise ValidationError("expected an element, got %r" % (text,), field, line)
    for lab, c in items:
        if lab.isdigit() and lab not in labels and "1" in labels:
            c, lab = c * int(lab), "1"
        if lab not in labels:
            raise ValidationError("unknown basis label %r (known: %s)"
                                  % (lab, ", ".join(labels)), field, line)
        v[labels.index(lab)] += c
    if p:
        v %= p
    return v


# ---------------------------------------------------------------------------
# the workspace

class Workspace:
    """A validated workspace document; objects are built on first use and memoized."""

    SECTIONS = ("dgas", "rings", "modules", "maps", "complexes", "classes", "categories",
                "bimodules", "tasks")

    def __init__(self, text, source="<string>", window=None, max_rank=None):
        try:
            doc = yaml.load(text, Loader=_Loader)
        except ValidationError:
            raise
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ValidationError("malformed document: %s" % getattr(e, "problem", e),
                                  "document", mark.line + 1 if mark else None)
        if not isinstance(doc, dict):
            raise ValidationError("a workspace is a mapping", "document")
        self.doc, self.source = doc, source
        self.digest = hashlib.sha256(text.encode()).hexdigest()
        for k in doc:
            if k not in ("format", "characteristic", "window", "max_rank", "description") + \
                    self.SECTIONS:
                raise ValidationError("unknown top level field", str(k), _line(doc, k))
        fmt = doc.get("format")
        if fmt != FORMAT_VERSION:
            raise ValidationError("unsupported format version %r (expected %d)"
                                  % (fmt, FORMAT_VERSION), "format", _line(doc, "format"))
        p = doc.get("characteristic")
        _parse_int(p, "characteristic", _line(doc, "characteristic"))
        if p < 0:
            raise ValidationError("negative characteristic", "characteristic",
                                  _line(doc, "characteristic"))
        self.p = p
        if window is not None:
            self.window = window
        elif "window" in doc:
            try:
                self.window = DegreeWindow.parse(str(doc["window"]))
            except ValueError as e:
                raise ValidationError("bad window %r: %s" % (doc["window"], e), "window",
                                      _line(doc, "window"))
        else:
            self.window = None
        self.max_rank = max_rank if max_rank is not None else doc.get("max_rank")
        self.sections = {}
        for s in self.SECTIONS:
            sec = doc.get(s, [] if s == "tasks" else {})
            if s == "tasks":
                if not isinstance(sec, list):
                    raise ValidationError("tasks is a list", "tasks", _line(doc, s))
            elif not isinstance(sec, dict):
                raise ValidationError("expected a mapping of named declarations", s, _line(doc, s))
            self.sections[s] = sec
        self._built = {}
        self.validate()

    # -- generic access

    def decl(self, section, name):
        sec = self.sections[section]
        if name not in sec:
            known = ", ".join(sorted(sec)) or "none"
            raise ValidationError("undeclared name %r (declared: %s)" % (name, known), section)
        d = sec[name]
        if not isinstance(d, dict):
            raise ValidationError("declaration must be a mapping", "%s.%s" % (section, name),
                                  _line(sec, name))
        return d

    def field(self, section, name, key=None):
        return "%s.%s" % (section, name) + ("." + key if key else "")

    def line(self, section, name, key=None):
        d = self.sections[section].get(name)
        if key is not None and isinstance(d, _Map):
            return _line(d, key)
        return _line(self.sections[section], name)

    def kind_of(self, name):
        """The section declaring `name` among dgas and rings."""
        if name in self.sections["dgas"]:
            return "dgas"
        if name in self.sections["rings"]:
            return "rings"
        return None

    def validate(self):
        """Check references and build every declared object (re-verifying its axioms)."""
        for sec in ("dgas", "rings", "modules", "maps", "complexes", "classes", "categories",
                    "bimodules"):
            for name in self.sections[sec]:
                self.get(sec, name)
        for i, t in enumerate(self.sections["tasks"]):
            fld = "tasks[%d]" % i
            if not isinstance(t, dict) or t.get("verb") not in VERBS:
                raise ValidationError("a task needs a verb among %s" % ", ".join(VERBS), fld,
                                      _line(t) or _line(self.doc, "tasks"))
            refs = {"dga": ("dgas",), "module": ("modules",), "complex": ("complexes",),
                    "f": ("maps",), "class": ("classes",), "category": ("categories",),
                    "bimodule": ("bimodules",), "target": ("dgas", "rings", "modules")}
            for key, secs in refs.items():
                if key in t and not any(t[key] in self.sections[s] for s in secs):
                    raise ValidationError("undeclared name %r" % t[key], fld + "." + key,
                                          _line(t, key))

    def task_defaults(self, verb):
        for t in self.sections["tasks"]:
            if t.get("verb") == verb:
                return dict(t)
        return {}

    def get(self, section, name):
        key = (section, name)
        if key not in self._built:
            builder = getattr(self, "_build_" + section)
            d = self.decl(section, name)
            try:
                self._built[key] = builder(name, d)
            except ValidationError:
                raise
            except (ValueError, KeyError, TypeError, IndexError) as e:
                raise ValidationError("invalid declaration: %s" % e, self.field(section, name),
                                      self.line(section, name))
        return self._built[key]

    def _require(self, d, key, section, name):
        if key not in d:
            raise ValidationError("missing field %r" % key, self.field(section, name),
                                  self.line(section, name))
        return d[key]

    def _only_one(self, d, kinds, section, name):
        found = [k for k in kinds if k in d]
        if len(found) != 1:
            raise ValidationError("exactly one of %s is required" % ", ".join(kinds),
                                  self.field(section, name), self.line(section, name))
        return found[0]

    # -- dgas

    def _build_dgas(self, name, d):
        p = self.p
        if p < 2:
            raise ValidationError("dgas need a prime characteristic", "characteristic",
                                  _line(self.doc, "characteristic"))
        kind = self._only_one(d, ("builtin", "exterior", "free_truncated", "table", "formal"),
                              "dgas", name)
        spec = d[kind]
        if kind == "builtin":
            from .dga import heisenberg_dga, massey4_dga
            table = {"heisenberg": heisenberg_dga, "massey4": massey4_dga}
            if spec not in table:
                raise ValidationError("unknown builtin %r (known: %s)" % (spec, ", ".join(table)),
                                      self.field("dgas", name, kind), self.line("dgas", name, kind))
            A = table[spec](p)
        elif kind == "exterior":
            gens = self._require(spec, "generators", "dgas", name)
            names = [str(g) for g in gens]
            degs = [_parse_int(gens[g], self.field("dgas", name, "generators." + str(g)))
                    for g in gens]
            diff = {}
            for g, terms in (spec.get("differential") or {}).items():
                diff[str(g)] = [(int(c), tuple(str(x) for x in mono)) for c, mono in terms]
                for _, mono in diff[str(g)]:
                    for x in mono:
                        if x not in names:
                            raise ValidationError("unknown generator %r" % x,
                                                  self.field("dgas", name, "differential." + str(g)),
                                                  _line(spec.get("differential"), g))
            A = exterior_algebra(p, names, degs, diff, name=name)
        elif kind == "free_truncated":
            gens = self._require(spec, "generators", "dgas", name)
            top = _parse_int(self._require(spec, "top", "dgas", name),
                             self.field("dgas", name, "top"))
            diff = {str(g): [(int(c), tuple(str(x) for x in w)) for c, w in terms]
                    for g, terms in (spec.get("differential") or {}).items()}
            A = truncated_free_dga(p, [(str(g), int(k)) for g, k in gens.items()], top, diff,
                                   name=name)
        elif kind == "table":
            labels = [str(x) for x in self._require(spec, "labels", "dgas", name)]
            degrees = self._require(spec, "degrees", "dgas", name)
            products = {}
            for entry in spec.get("products") or []:
                x, y, out = entry
                products[(str(x), str(y))] = {str(z): int(c) for z, c in out.items()}
            diff = {str(x): {str(y): int(c) for y, c in out.items()}
                    for x, out in (spec.get("differential") or {}).items()}
            A = algebra_from_table(p, labels, degrees, products, diff, name=name)
        else:
            if spec not in self.sections["rings"]:
                raise ValidationError("undeclared ring %r" % spec, self.field("dgas", name, kind),
                                      self.line("dgas", name, kind))
            A = formal_dga(self.get("rings", spec))
            A.name = name
        A.check()
        return A

    # -- rings

    def _build_rings(self, name, d):
        kind = self._only_one(d, ("builtin", "truncated_polynomial", "laurent", "table"),
                              "rings", name)
        spec = d[kind]
        fld = self.field("rings", name, kind)
        if kind == "builtin":
            if spec != "ko":
                raise ValidationError("unknown builtin ring %r (known: ko)" % spec, fld,
                                      self.line("rings", name, kind))
            if self.window is None:
                raise ValidationError("the ko ring needs a degree window", "window")
            R = build_ko_ring(self.window)
        elif kind == "truncated_polynomial":
            R = truncated_polynomial_ring(self.p, int(spec["degree"]), int(spec["top"]),
                                          var=str(spec.get("var", "x")))
        elif kind == "laurent":
            if self.window is None:
                raise ValidationError("a Laurent ring needs a degree window", "window")
            R = laurent_ring(self.p, int(spec["degree"]), self.window,
                             var=str(spec.get("var", "u")))
        else:
            labels = [str(x) for x in spec["labels"]]
            products = {}
            for entry in spec.get("products") or []:
                x, y, out = entry
                products[(str(x), str(y))] = {str(z): int(c) for z, c in out.items()}
            R = ring_from_table(self.p, labels, spec["degrees"], products, window=self.window)
        if not R.check():
            raise ValidationError("ring axioms fail", self.field("rings", name),
                                  self.line("rings", name))
        return R

    def ring_over(self, name, field, line):
        """The graded ring named by a dga (its cohomology) or a ring."""
        kind = self.kind_of(name)
        if kind == "dgas":
            return cohomology(self.get("dgas", name))
        if kind == "rings":
            return self.get("rings", name)
        raise ValidationError("undeclared dga or ring %r" % name, field, line)

    # -- modules

    def _build_modules(self, name, d):
        over = self._require(d, "over", "modules", name)
        R = self.ring_over(over, self.field("modules", name, "over"),
                           self.line("modules", name, "over"))
        kind = self._only_one(d, ("residue", "free", "quotient"), "modules", name)
        spec = d[kind]
        fld, ln = self.field("modules", name, kind), self.line("modules", name, kind)
        if kind == "residue":
            return residue_module(R, _parse_int(spec, fld, ln))
        if kind == "free":
            return free_module(R, [_parse_int(g, fld, ln) for g in spec])
        gens = [_parse_int(g, fld, ln) for g in spec.get("generators", [0])]
        rels = []
        F = free_module(R, gens)
        from .graded import element_of_free
        for i, r in enumerate(spec.get("relations") or []):
            parts = r if isinstance(r, list) else [r]
            if len(parts) != len(gens):
                raise ValidationError("relation needs one ring element per generator",
                                      "%s.relations[%d]" % (fld, i), ln)
            coeffs = [parse_element(x, list(R.labels), R.p, "%s.relations[%d]" % (fld, i), ln)
                      for x in parts]
            v = element_of_free(F, coeffs)
            if len({int(F.degrees[j]) for j in np.flatnonzero(v % R.p)}) > 1:
                raise ValidationError("relation is not homogeneous",
                                      "%s.relations[%d]" % (fld, i), ln)
            rels.append(v)
        Q, _, _ = quotient_module(R, gens, rels)
        return Q

    # -- maps

    def _build_maps(self, name, d):
        if "identity" in d:
            M = self.get("modules", str(d["identity"]))
            return GradedMap.identity(M)
        src = self.get("modules", str(self._require(d, "source", "maps", name)))
        tgt = self.get("modules", str(self._require(d, "target", "maps", name)))
        mat = np.array(self._require(d, "matrix", "maps", name), dtype=np.int64)
        if mat.shape != (tgt.dim, src.dim):
            raise ValidationError("matrix must have shape %s" % ((tgt.dim, src.dim),),
                                  self.field("maps", name, "matrix"),
                                  self.line("maps", name, "matrix"))
        return GradedMap(src, tgt, int(d.get("degree", 0)), mat % src.p)

    # -- complexes

    def _build_complexes(self, name, d):
        over = self._require(d, "over", "complexes", name)
        elems = self._require(d, "elements", "complexes", name)
        fld, ln = self.field("complexes", name, "elements"), self.line("complexes", name, "elements")
        if not isinstance(elems, list) or len(elems) < 3:
            raise ValidationError("a complex needs at least three elements", fld, ln)
        kind = self.kind_of(over)
        if kind == "dgas":
            A = self.get("dgas", over)
            H = cohomology(A)
            out = []
            for i, e in enumerate(elems):
                if isinstance(e, str) and e.strip().startswith("["):
                    h = parse_element(e, list(H.labels), A.p, "%s[%d]" % (fld, i), ln)
                    v = H.reps @ h % A.p
                else:
                    v = parse_element(e, A.labels, A.p, "%s[%d]" % (fld, i), ln)
                if np.any(A.diff(v)):
                    raise ValidationError("element %r is not a cocycle" % (e,), "%s[%d]" % (fld, i), ln)
                if A.degree_of(v) is None:
                    raise ValidationError("element %r is zero" % (e,), "%s[%d]" % (fld, i), ln)
                out.append(v)
            return ("dga", A, out)
        if kind == "rings":
            R = self.get("rings", over)
            return ("ring", R, [parse_element(e, list(R.labels), R.p, "%s[%d]" % (fld, i), ln)
                                for i, e in enumerate(elems)])
        raise ValidationError("undeclared dga or ring %r" % over,
                              self.field("complexes", name, "over"),
                              self.line("complexes", name, "over"))

    # -- classes

    def _build_classes(self, name, d):
        dga = str(self._require(d, "universal", "classes", name))
        n = _parse_int(self._require(d, "n", "classes", name), self.field("classes", name, "n"))
        self.get("dgas", dga)
        return {"dga": dga, "n": n}

    # -- categories and bimodules

    def _build_categories(self, name, d):
        kind = self._only_one(d, ("cyclic", "group_table", "monoid_table", "free_modules"),
                              "categories", name)
        spec = d[kind]
        if kind == "cyclic":
            C = category_from_monoid(cyclic_group_table(int(spec)))
        elif kind in ("group_table", "monoid_table"):
            C = category_from_monoid(spec)
        else:
            R = self._finite_ring(spec, self.field("categories", name, kind),
                                  self.line("categories", name, kind))
            q = spec.get("rank", self.max_rank)
            if q is None:
                raise ValidationError("rank missing (give rank or --max-rank)",
                                      self.field("categories", name, kind),
                                      self.line("categories", name, kind))
            if self.max_rank is not None:
                q = min(int(q), int(self.max_rank))
            C = free_module_category(R, int(q))
        C.check()
        return C

    def _finite_ring(self, spec, field, line):
        if "prime_field" in spec:
            return FiniteRing.prime_field(int(spec["prime_field"]))
        if "ring" in spec:
            return FiniteRing.from_graded(self.get("rings", spec["ring"]))
        raise ValidationError("a free module category needs prime_field or ring", field, line)

    def _build_bimodules(self, name, d):
        cat = str(self._require(d, "category", "bimodules", name))
        C = self.get("categories", cat)
        kind = self._only_one(d, ("constant", "hom", "group_module"), "bimodules", name)
        spec = d[kind]
        if kind == "constant":
            D = constant_bimodule(C, [int(x) for x in spec])
        elif kind == "hom":
            D = hom_bimodule(C)
        else:
            inv = [int(x) for x in spec["invariants"]]
            mats = [np.array(m, dtype=np.int64) for m in spec["action"]]
            if len(mats) != C.num_morphisms:
                raise ValidationError("one action matrix per group element is needed",
                                      self.field("bimodules", name, kind),
                                      self.line("bimodules", name, kind))
            D = group_module_bimodule(C, inv, lambda h: mats[h])
        D.check()
        return D


def load_workspace(name_or_path, window=None, max_rank=None):
    text, source = read_workspace_text(name_or_path)
    return Workspace(text, source, window=window, max_rank=max_rank)


# ---------------------------------------------------------------------------
# on-disk cache

def _digest(*parts):
    h = hashlib.sha256()
    for x in parts:
        if isinstance(x, np.ndarray):
            a = np.ascontiguousarray(x.astype(np.int64) if x.dtype != object else
                                     np.array(x.tolist(), dtype=np.int64))
            h.update(str(a.shape).encode())
            h.update(a.tobytes())
        else:
            h.update(repr(x).encode())
        h.update(b"|")
    return h.hexdigest()[:32]


def _ring_digest(R):
    return _digest(R.p, np.asarray(R.degrees), np.asarray(R.mult), np.asarray(R.unit))


class DiskCache:
    """Minimal resolutions and transferred operations stored as .npz files."""

    def __init__(self, root):
        self.root = root
        os.makedirs(root, exist_ok=True)
        self.hits = self.misses = 0

    def _path(self, kind, key):
        return os.path.join(self.root, "%s-%s.npz" % (kind, key))

    def resolution(self, M, length):
        key = _digest(_ring_digest(M.ring), M.degrees, M.act, length)
        path = self._path("resolution", key)
        if os.path.exists(path):
            self.hits += 1
            return extcup.register_resolution(M, load_resolution(path, M))
        self.misses += 1
        R = extcup.canonical_resolution(M, length)
        save_resolution(path, R)
        return R

    def transfer(self, A, max_order, contraction_obj, key_extra):
        key = _digest(A.p, A.degrees, A.d, A.mult, A.unit, max_order, key_extra)
        path = self._path("transfer", key)
        H = cohomology(A)
        if os.path.exists(path):
            self.hits += 1
            with np.load(path) as z:
                ops = {int(k[2:]): z[k] for k in z.files}
            return AInfinityStructure(H, ops, max_order)
        self.misses += 1
        S = transfer(A, contraction_obj(), max_order=max_order)
        _atomic_savez(path, **{"op%d" % k: v for k, v in S.ops.items()})
        return S


def _atomic_savez(path, **arrays):
    tmp = path + ".tmp.npz"
    np.savez(tmp, **arrays)
    os.replace(tmp, path)


def save_resolution(path, R):
    arrays = {"safe": np.array([R.safe_window.lo, R.safe_window.hi])}
    for i, (P, f) in enumerate(zip(R.modules, R.maps)):
        arrays["gens%d" % i] = np.array(P.gens, dtype=np.int64)
        arrays["window%d" % i] = np.array([P.window.lo, P.window.hi])
        arrays["map%d" % i] = f.matrix
        arrays["degree%d" % i] = np.array([f.degree])
    _atomic_savez(path, **arrays)


def load_resolution(path, M):
    with np.load(path) as z:
        n = sum(1 for k in z.files if k.startswith("gens"))
        mods, maps = [], []
        for i in range(n):
            P = free_module(M.ring, [int(g) for g in z["gens%d" % i]],
                            window=DegreeWindow(*[int(x) for x in z["window%d" % i]]))
            tgt = M if i == 0 else mods[-1]
            maps.append(GradedMap(P, tgt, int(z["degree%d" % i][0]), z["map%d" % i], check=False))
            mods.append(P)
        safe = DegreeWindow(*[int(x) for x in z["safe"]])
    return Resolution(M, mods, maps, safe)


# ---------------------------------------------------------------------------
# reports

class Report:
    """A verb's result: text lines for people and a JSON-safe dict for machines."""

    def __init__(self, verb, workspace, args, verdict):
        self.verb = verb
        self.lines = []
        self.data = {"verb": verb, "workspace": workspace.source, "workspace_sha256": workspace.digest,
                     "arguments": {k: v for k, v in sorted(args.items()) if v is not None},
                     "format": FORMAT_VERSION, "verdict": verdict, "results": {}}
        self.exit_code = EXIT_OK

    @property
    def verdict(self):
        return self.data["verdict"]

    @verdict.setter
    def verdict(self, v):
        self.data["verdict"] = v

    def put(self, key, value):
        self.data["results"][key] = value

    def say(self, line):
        self.lines.append(line)

    def text(self):
        head = "%s on %s: %s" % (self.verb, self.data["workspace"], self.verdict)
        return "\n".join([head] + ["  " + l for l in self.lines]) + "\n"

    def machine(self):
        return dump_result(self.data)


def dump_result(data):
    return json.dumps(data, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def load_result(text):
    return json.loads(text)


def ints(v):
    return [int(x) for x in np.asarray(v).reshape(-1)]


def array_entry(a):
    """Small arrays in full, large ones by shape, support size and hash."""
    a = np.asarray(a)
    if a.size <= FULL_LIMIT:
        return {"shape": list(a.shape), "entries": ints(a)}
    return {"shape": list(a.shape), "nonzero": int(np.count_nonzero(a)),
            "sha256": _digest(a)}


def format_vector(v, labels):
    terms = []
    for i in np.flatnonzero(np.asarray(v)):
        c = int(v[i])
        terms.append(labels[i] if c == 1 else "%d*%s" % (c, labels[i]))
    return " + ".join(terms) or "0"


def format_group(inv):
    if not inv:
        return "0"
    return " + ".join("Z" if x == 0 else "Z/%d" % x for x in inv)


# ---------------------------------------------------------------------------
# commands

class Context:
    """Per-run options shared by the verbs."""

    def __init__(self, seed=None, cache=None, max_order=None):
        self.seed = seed
        self.cache = DiskCache(cache) if cache else None
        self.max_order = max_order

    def rng(self, stream):
        if self.seed is None:
            return None
        return np.random.default_rng([int(self.seed), stream])

    def resolution(self, M, length):
        if self.cache is not None:
            return self.cache.resolution(M, length)
        return extcup.canonical_resolution(M, length)

    def transfer(self, A, max_order):
        rng = self.rng(0)

        def make():
            return contraction(A, rng=rng)

        if self.cache is not None:
            return self.cache.transfer(A, max_order, make, ("seed", self.seed))
        return transfer(A, make(), max_order=max_order)


def _arg(ws, verb, args, key, required=True):
    v = args.get(key)
    if v is None:
        v = ws.task_defaults(verb).get(key)
    if v is None and required:
        raise ValidationError("no %r given and no %s task declares one" % (key, verb), "--" + key)
    return v


def cmd_cohomology(ws, ctx, target=None, s_max=None):
    """H^*(A) of a dga, the graded pieces of a ring, or Ext^{s,*}(M, M) of a module."""
    target = _arg(ws, "cohomology", {"target": target}, "target")
    rep = Report("cohomology", ws, {"target": target}, "ok")
    if target in ws.sections["dgas"]:
        A = ws.get("dgas", target)
        H = cohomology(A)
        rep.put("kind", "dga")
        rep.put("labels", list(H.labels))
        rep.put("degrees", ints(H.degrees))
        rep.put("betti", {str(k): len(H.basis_in_degree(k)) for k in sorted(set(ints(H.degrees)))})
        prods = []
        for a in range(1, H.dim):
            for b in range(1, H.dim):
                v = H.mult[a, b]
                if np.any(v):
                    prods.append([H.labels[a], H.labels[b], format_vector(v, H.labels)])
        rep.put("products", prods)
        rep.put("representatives", {H.labels[c]: format_vector(H.reps[:, c], A.labels)
                                    for c in range(H.dim)})
        rep.verdict = "H^* has dimension %d" % H.dim
        for k in sorted(set(ints(H.degrees))):
            rep.say("H^%d: %s" % (k, ", ".join(H.labels[i] for i in H.basis_in_degree(k))))
        for x, y, z in prods:
            rep.say("%s * %s = %s" % (x, y, z))
        return rep
    if target in ws.sections["rings"]:
        R = ws.get("rings", target)
        rep.put("kind", "ring")
        rep.put("grading", getattr(R, "grading", "cohomological"))
        table = {}
        for k in sorted(set(int(x) for x in R.degrees)):
            idx = R.basis_in_degree(k)
            table[str(k)] = [R.labels[i] for i in idx]
            orders = getattr(R, "orders", None)
            grp = [int(orders[i]) if orders is not None else R.p for i in idx]
            rep.say("degree %d: %s  (%s)" % (k, ", ".join(table[str(k)]), format_group(grp)))
        rep.put("basis", table)
        rep.verdict = "ring of rank %d in window %d..%d" % (R.dim, R.window.lo, R.window.hi)
        return rep
    M = ws.get("modules", target)
    s_max = int(s_max if s_max is not None else ws.task_defaults("cohomology").get("s_max", 3))
    Q = ctx.resolution(M, s_max + 1)
    rep.put("kind", "module")
    table = {}
    rdeg = [int(x) for x in M.ring.degrees]
    for s in range(s_max + 1):
        gens = list(Q.modules[s].gens)
        ts = sorted({int(m) - g - r for m in M.degrees for g in gens for r in rdeg} |
                    {int(m) - g for m in M.degrees for g in gens})
        row = {}
        for t in ts:
            dim = ext_group(M, M, s, t).dim
            if dim:
                row[str(t)] = dim
        table[str(s)] = row
        rep.say("Ext^%d: %s" % (s, ", ".join("t=%s: %d" % (t, v) for t, v in
                                             sorted(row.items(), key=lambda x: int(x[0])))
                                 or "0"))
    rep.put("ext_dims", table)
    rep.verdict = "Ext^{s,t}(M, M) for s <= %d" % s_max
    return rep


def cmd_transfer(ws, ctx, dga=None, max_order=None):
    dga = _arg(ws, "transfer", {"dga": dga}, "dga")
    K = max_order or ctx.max_order or ws.task_defaults("transfer").get("max_order", 4)
    K = int(K)
    A = ws.get("dgas", dga)
    S = ctx.transfer(A, K)
    rep = Report("transfer", ws, {"dga": dga, "max_order": K, "seed": ctx.seed}, "")
    H = S.H
    ok = S.check_stasheff()
    ops = {}
    for k in range(2, K + 1):
        t = S.ops[k]
        nz = []
        for idx in zip(*np.nonzero(t)):
            nz.append([[H.labels[i] for i in idx[:-1]], H.labels[idx[-1]], int(t[idx])])
        ops[str(k)] = {"nonzero_entries": len(nz), "tensor": array_entry(t),
                       "entries": nz if len(nz) <= FULL_LIMIT else None}
        rep.say("m_%d: %s" % (k, "zero" if not nz else "%d nonzero entries" % len(nz)))
        if k > 2 and len(nz) <= 12:
            for idx in sorted(set(i[:-1] for i in zip(*np.nonzero(t)))):
                rep.say("  m_%d(%s) = %s" % (k, ", ".join(H.labels[i] for i in idx),
                                             format_vector(t[idx], H.labels)))
    rep.put("labels", list(H.labels))
    rep.put("operations", ops)
    rep.put("stasheff", bool(ok))
    rep.verdict = "Stasheff relations hold up to order %d" % K if ok else "STASHEFF FAILURE"
    if not ok:
        rep.exit_code = EXIT_MATH
    return rep


def cmd_massey(ws, ctx, complex=None):
    name = _arg(ws, "massey", {"complex": complex}, "complex")
    kind, obj, elems = ws.get("complexes", name)
    rep = Report("massey", ws, {"complex": name, "seed": ctx.seed}, "")
    if kind == "ring":
        R = obj
        n = len(elems) - 2
        ind = ring_indeterminacy(R, elems, n=n)
        rep.put("degree", ind["degree"])
        rep.put("indeterminacy", ind["invariants"])
        rep.put("value", None)
        rep.say("bracket of %s in degree %s" % (
            ", ".join(format_vector(e, R.labels) for e in elems), ind["degree"]))
        rep.say("indeterminacy %s" % format_group(ind["invariants"]))
        rep.say("no dga model: only the indeterminacy is computed")
        rep.verdict = "indeterminacy %s" % format_group(ind["invariants"])
        return rep
    A = obj
    H = cohomology(A)
    n = len(elems) - 2
    maps = chain_of_multiplications(A, elems)
    rng = ctx.rng(2)
    res = toda_bracket(maps, rng=rng) if n == 1 else higher_bracket(maps, n, rng=rng)
    value = res.ring_value()
    indet = [ints(v) for v in res.indeterminacy_ring()]
    idim = res.indeterminacy_dim
    zero_in = bool(res.contains_zero())
    rep.put("labels", list(H.labels))
    rep.put("elements", [format_vector(H.coords(e), H.labels) for e in elems])
    rep.put("value", ints(value))
    rep.put("value_text", format_vector(value, H.labels))
    rep.put("indeterminacy_generators", indet)
    rep.put("indeterminacy_dim", int(idim))
    rep.put("contains_zero", zero_in)
    rep.say("<%s> = %s" % (", ".join(rep.data["results"]["elements"]),
                           format_vector(value, H.labels)))
    rep.say("indeterminacy of dimension %d" % idim)
    if n == 1:
        try:
            oc, ocols = massey_oracle(A, *elems)
            # the bracket of multiplication maps is (-1)^{|a|} times the formula
            sgn = -1 if (A.degree_of(elems[0]) or 0) % 2 else 1
            agree = _in_coset((sgn * oc) % A.p, value, indet, A.p)
            agree_sign = agree or _in_coset((-sgn * oc) % A.p, value, indet, A.p)
            rep.put("oracle", {"value": ints(oc), "sign": sgn, "agrees": agree,
                               "agrees_up_to_sign": agree_sign})
            rep.say("chain-level formula gives %s (%s)" % (
                format_vector(oc, H.labels),
                "agrees" if agree else ("agrees up to sign" if agree_sign else "DISAGREES")))
        except CompositeNonzero:
            pass
    if zero_in:
        rep.verdict = "0 ∈ bracket, indeterminacy %d" % idim
    else:
        rep.verdict = "bracket %s, indeterminacy %d" % (format_vector(value, H.labels), idim)
    return rep


def _in_coset(v, base, gens, p):
    diff = (np.asarray(v) - np.asarray(base)) % p
    if not np.any(diff):
        return True
    if not gens:
        return False
    return solve_mod(np.array(gens, dtype=np.int64).T, diff, p) is not NoSolution


def _universal(ws, ctx, dga, n):
    A = ws.get("dgas", dga)
    H = cohomology(A)
    if not H.is_sparse(n):
        raise NotSparse("H^*(%s) is not %d-sparse" % (dga, n))
    S = ctx.transfer(A, n + 2)
    if not S.sparse_vanishing(n):
        raise ContractionInvalid("lower operations do not vanish on a sparse cohomology")
    m = S.cochain(n + 2)
    cls = HochschildClass(m, n)
    if not cls.is_cocycle():
        raise ContractionInvalid("m_%d is not a Hochschild cocycle" % (n + 2))
    return A, H, m, cls


def cmd_universal_class(ws, ctx, dga=None, n=None):
    dga = _arg(ws, "universal_class", {"dga": dga}, "dga")
    n = int(_arg(ws, "universal_class", {"n": n}, "n"))
    A, H, m, cls = _universal(ws, ctx, dga, n)
    zero = bool(cls.is_zero())
    rep = Report("universal_class", ws, {"dga": dga, "n": n, "seed": ctx.seed},
                 "class zero" if zero else "class nonzero")
    entries = []
    for idx in zip(*np.nonzero(m.tensor)):
        entries.append([[H.labels[i] for i in idx[:-1]], H.labels[idx[-1]], int(m.tensor[idx])])
    rep.put("arity", n + 2)
    rep.put("degree", -n)
    rep.put("labels", list(H.labels))
    rep.put("cocycle", array_entry(m.tensor))
    rep.put("cocycle_entries", entries if len(entries) <= FULL_LIMIT else None)
    rep.put("class_zero", zero)
    rep.say("m_%d has %d nonzero entries" % (n + 2, len(entries)))
    for ins, out, c in entries[:FULL_LIMIT]:
        rep.say("  m_%d(%s) = %s%s" % (n + 2, ", ".join(ins), "" if c == 1 else "%d*" % c, out))
    if len(entries) > FULL_LIMIT:
        rep.say("  ... (%d more, tensor hash %s)" % (len(entries) - FULL_LIMIT,
                                                    rep.data["results"]["cocycle"]["sha256"]))
    return rep


def cmd_cup(ws, ctx, f=None, class_=None, module=None):
    args = {"f": f, "class": class_, "module": module}
    cname = _arg(ws, "cup", args, "class")
    fname = _arg(ws, "cup", args, "f", required=False)
    mname = _arg(ws, "cup", args, "module", required=fname is None)
    c = ws.get("classes", cname)
    if fname is not None:
        fmap = ws.get("maps", fname)
    else:
        fmap = GradedMap.identity(ws.get("modules", mname))
    A, H, m, cls = _universal(ws, ctx, c["dga"], c["n"])
    n = c["n"]
    M = fmap.source
    if M.ring is not H:
        raise ValidationError("the map must be between modules over H^*(%s)" % c["dga"], "--f")
    ctx.resolution(M, n + 3)
    y = cup_product(fmap, matric_extension(m), n=n)
    rep = Report("cup", ws, {"f": fname, "class": cname, "module": mname, "seed": ctx.seed},
                 "class zero" if y.is_zero() else "class nonzero")
    rep.put("s", n + 2)
    rep.put("t", -n)
    rep.put("ext_dim", int(y.ext.dim))
    rep.put("class", ints(y.coords()))
    rep.say("f cup [m_%d] in Ext^{%d,%d}, a group of dimension %d" % (n + 2, n + 2, -n, y.ext.dim))
    rep.say("coordinates %s" % ints(y.coords()))
    return rep


def cmd_obstruction(ws, ctx, module=None, k=None):
    mname = _arg(ws, "obstruction", {"module": module}, "module")
    k = int(_arg(ws, "obstruction", {"k": k}, "k"))
    M = ws.get("modules", mname)
    A = getattr(M.ring, "algebra", None)
    if A is None:
        raise ValidationError("the module must be declared over a dga", "modules." + mname)
    Q = ctx.resolution(M, k + 2)
    K = kappa(A, M, k, rng=ctx.rng(1), resolution=Q)
    y = K.kappa
    rep = Report("obstruction", ws, {"module": mname, "k": k, "seed": ctx.seed},
                 "kappa_%d zero" % (k + 1) if y.is_zero() else "kappa_%d nonzero" % (k + 1))
    rep.put("s", k + 1)
    rep.put("t", 1 - k)
    rep.put("ext_dim", int(y.ext.dim))
    rep.put("class", ints(y.coords()))
    rep.put("system_checked", bool(K.system.check()))
    rep.say("kappa_%d in Ext^{%d,%d}, a group of dimension %d" % (k + 1, k + 1, 1 - k, y.ext.dim))
    rep.say("coordinates %s" % ints(y.coords()))
    return rep


def cmd_verify_theorem(ws, ctx, dga=None, n=None, module=None):
    args = {"dga": dga, "n": n, "module": module}
    dga = _arg(ws, "verify_theorem", args, "dga")
    n = int(_arg(ws, "verify_theorem", args, "n"))
    mname = _arg(ws, "verify_theorem", args, "module")
    A, H, m, cls = _universal(ws, ctx, dga, n)
    M = ws.get("modules", mname)
    if M.ring is not H:
        raise ValidationError("module %r is not over H^*(%s)" % (mname, dga), "--module")
    Q = ctx.resolution(M, n + 3)
    t0 = time.perf_counter()
    lhs = cup_product(GradedMap.identity(M), matric_extension(m), n=n)
    rhs = kappa(A, M, n + 1, rng=ctx.rng(1), resolution=Q).kappa
    equal = lhs == rhs
    sign = equal or lhs == -rhs
    zero = lhs.is_zero()
    if equal:
        verdict = "EQUAL, class %s" % ("zero" if zero else "nonzero")
    elif sign:
        verdict = "EQUAL UP TO SIGN, class nonzero"
    else:
        verdict = "NOT EQUAL"
    rep = Report("verify_theorem", ws, {"dga": dga, "n": n, "module": mname, "seed": ctx.seed},
                 verdict)
    rep.put("s", n + 2)
    rep.put("t", -n)
    rep.put("ext_dim", int(lhs.ext.dim))
    rep.put("cup", ints(lhs.coords()))
    rep.put("kappa", ints(rhs.coords()))
    rep.put("equal", bool(equal))
    rep.put("class_zero", bool(zero))
    rep.say("id_M cup [m_%d] = %s" % (n + 2, ints(lhs.coords())))
    rep.say("kappa_%d(M)    = %s" % (n + 2, ints(rhs.coords())))
    rep.say("in Ext^{%d,%d}(M, M) of dimension %d (%.2fs)" % (n + 2, -n, lhs.ext.dim,
                                                            time.perf_counter() - t0))
    if not equal:
        rep.exit_code = EXIT_MATH
    return rep


def cmd_catcoh(ws, ctx, category=None, bimodule=None, degree=None, normalized=None):
    args = {"category": category, "bimodule": bimodule, "degree": degree}
    bname = _arg(ws, "catcoh", args, "bimodule")
    cname = _arg(ws, "catcoh", args, "category", required=False)
    degree = int(_arg(ws, "catcoh", args, "degree"))
    D = ws.get("bimodules", bname)
    decl_cat = ws.decl("bimodules", bname)["category"]
    if cname is not None and cname != decl_cat:
        raise ValidationError("bimodule %r lives on category %r" % (bname, decl_cat), "--category")
    cname = decl_cat
    C = ws.get("categories", cname)
    if normalized is None:
        normalized = bool(ws.task_defaults("catcoh").get("normalized", False))
    inv = cohomology_of_category(C, D, degree, normalized=normalized)
    rep = Report("catcoh", ws, {"category": cname, "bimodule": bname, "degree": degree,
                                "normalized": normalized}, format_group(inv))
    rep.put("invariants", [int(x) for x in inv])
    rep.put("objects", C.num_objects)
    rep.put("morphisms", C.num_morphisms)
    rep.say("H^%d(%s; %s) = %s" % (degree, cname, bname, format_group(inv)))
    return rep


COMMANDS = {
    "cohomology": lambda ws, ctx, a: cmd_cohomology(ws, ctx, a.target),
    "transfer": lambda ws, ctx, a: cmd_transfer(ws, ctx, a.dga, a.max_order),
    "massey": lambda ws, ctx, a: cmd_massey(ws, ctx, a.complex),
    "universal_class": lambda ws, ctx, a: cmd_universal_class(ws, ctx, a.dga, a.n),
    "cup": lambda ws, ctx, a: cmd_cup(ws, ctx, a.f, a.cls, a.module),
    "obstruction": lambda ws, ctx, a: cmd_obstruction(ws, ctx, a.module, a.k),
    "verify_theorem": lambda ws, ctx, a: cmd_verify_theorem(ws, ctx, a.dga, a.n, a.module),
    "catcoh": lambda ws, ctx, a: cmd_catcoh(ws, ctx, a.category, a.bimodule, a.degree),
}


# ---------------------------------------------------------------------------

def _window(text):
    try:
        return DegreeWindow.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO..HI, got %r" % text)


def build_parser():
    ap = argparse.ArgumentParser(prog="todabracket",
                                 description="Brackets, obstructions and cohomology of small dgas.")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("workspace", help="a workspace file or the name of a bundled one")
    ap.add_argument("--window", type=_window, help="degree window LO..HI")
    ap.add_argument("--max-rank", type=int, dest="max_rank", help="rank bound for free module categories")
    ap.add_argument("--max-order", type=int, dest="max_order", help="highest A-infinity operation")
    ap.add_argument("--cache", help="directory for cached resolutions and transfers")
    ap.add_argument("--seed", type=int, help="seed for randomized choices")
    ap.add_argument("--format", choices=("text", "machine"), default="text")
    ap.add_argument("--out", help="also write the machine report to this file")
    for name in ("dga", "module", "complex", "f", "category", "bimodule", "target"):
        ap.add_argument("--" + name)
    ap.add_argument("--class", dest="cls")
    ap.add_argument("--n", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--degree", type=int)
    return ap


def run(argv=None, stdout=None, stderr=None):
    """Run the command line; returns (exit code, report or None)."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return (EXIT_OK if e.code == 0 else EXIT_VALIDATION), None
    if a.max_order is not None and a.max_order < 3:
        stderr.write("error: --max-order: must be at least 3\n")
        return EXIT_VALIDATION, None
    try:
        ws = load_workspace(a.workspace, window=a.window, max_rank=a.max_rank)
        ctx = Context(seed=a.seed, cache=a.cache, max_order=a.max_order)
        rep = COMMANDS[a.verb](ws, ctx, a)
    except ValidationError as e:
        stderr.write("validation error: %s\n" % e)
        return EXIT_VALIDATION, None
    except WindowExhausted as e:
        stderr.write("window exhausted: %s\n" % e)
        return EXIT_WINDOW, None
    except MATH_ERRORS + (ValueError,) as e:
        stderr.write("mathematical failure (%s): %s\n" % (type(e).__name__, e))
        return EXIT_MATH, None
    out = rep.machine() if a.format == "machine" else rep.text()
    stdout.write(out)
    if a.out:
        with open(a.out, "w") as fh:
            fh.write(rep.machine())
    return rep.exit_code, rep


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
