"""Finite-index subgroups: membership, cosets, normalizers, intersections.

Three canonical families cover everything the built-in chains need:

* ``sublattice`` -- a full-rank integer lattice in a free abelian model,
  given by a square basis matrix (columns generate).
* ``heisenberg-bm`` -- the set B.Z^2 x mZ inside the Heisenberg model.
  This set is a subgroup iff m divides gcd(row1(B)) * gcd(row2(B)); the
  simpler sufficient test "m divides every entry of one row" is exposed
  separately as :func:`row_divisibility_criterion`.
* ``diag-scales`` -- {(a*x, b*y, c*z)} inside the split extension; always
  a subgroup because -I preserves every diagonal lattice.

Coset enumeration is breadth-first from the identity over left
multiplication, merging g and h exactly when g^-1 h lies in the subgroup;
the merge is realized through exact canonical residue keys, and the
first-discovered element of each coset is kept as its representative.
"""

from __future__ import annotations

import json
import math
import os
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from . import intlinalg as la
from .groups import (
    FREE_ABELIAN,
    HEISENBERG,
    SPLIT_EXT,
    Elem,
    GroupModel,
    ModelMismatch,
    inverse,
    multiply,
)

SUBLATTICE = "sublattice"
HEISENBERG_BM = "heisenberg-bm"
DIAG_SCALES = "diag-scales"

DEFAULT_COSET_CAP = 10**6


class EnumerationCapExceeded(RuntimeError):
    """Coset enumeration hit its cap: index too large or infinite."""


class UnsupportedShape(ValueError):
    """Operation restricted to the canonical family shapes."""


@dataclass(frozen=True)
class FiniteIndexSubgroup:
    model: GroupModel
    kind: str
    data: tuple

    # -- constructors ------------------------------------------------

    @staticmethod
    def sublattice(model: GroupModel, basis) -> "FiniteIndexSubgroup":
        if model.kind != FREE_ABELIAN:
            raise UnsupportedShape("sublattice data requires a free-abelian model")
        b = la.mat(basis)
        n = model.arity
        if len(b) != n or any(len(row) != n for row in b):
            raise ValueError(f"basis must be {n}x{n}")
        if la.det(b) == 0:
            raise ValueError("basis must have nonzero determinant")
        return FiniteIndexSubgroup(model, SUBLATTICE, b)

    @staticmethod
    def heisenberg_bm(model: GroupModel, b, m: int) -> "FiniteIndexSubgroup":
        if model.kind != HEISENBERG:
            raise UnsupportedShape("heisenberg-bm data requires the heisenberg model")
        bm = la.mat(b)
        if len(bm) != 2 or any(len(row) != 2 for row in bm):
            raise ValueError("B must be 2x2")
        if la.det(bm) == 0:
            raise ValueError("B must have nonzero determinant")
        if m < 1:
            raise ValueError("m must be a positive integer")
        return FiniteIndexSubgroup(model, HEISENBERG_BM, (bm, int(m)))

    @staticmethod
    def diag_scales(model: GroupModel, a: int, b: int, c: int) -> "FiniteIndexSubgroup":
        if model.kind != SPLIT_EXT:
            raise UnsupportedShape("diag-scales data requires the split-ext model")
        if min(a, b, c) < 1:
            raise ValueError("scales must be positive")
        return FiniteIndexSubgroup(model, DIAG_SCALES, (int(a), int(b), int(c)))

    @staticmethod
    def whole_group(model: GroupModel) -> "FiniteIndexSubgroup":
        if model.kind == FREE_ABELIAN:
            return FiniteIndexSubgroup.sublattice(model, la.identity_matrix(model.arity))
        if model.kind == HEISENBERG:
            return FiniteIndexSubgroup.heisenberg_bm(model, la.identity_matrix(2), 1)
        return FiniteIndexSubgroup.diag_scales(model, 1, 1, 1)

    # -- basic facts ---------------------------------------------------

    def index(self) -> int:
        """Index in the whole model group."""
        if self.kind == SUBLATTICE:
            return abs(la.det(self.data))
        if self.kind == HEISENBERG_BM:
            b, m = self.data
            return abs(la.det(b)) * m
        a, b, c = self.data
        return a * b * c

    def is_whole_group(self) -> bool:
        return self.index() == 1

    def is_diagonal(self) -> bool:
        if self.kind == HEISENBERG_BM:
            b, _ = self.data
            return b[0][1] == 0 and b[1][0] == 0
        if self.kind == SUBLATTICE:
            n = len(self.data)
            return all(self.data[i][j] == 0 for i in range(n) for j in range(n) if i != j)
        return True

    def canonical_form(self) -> str:
        """Stable textual form; equal subgroups (as sets) agree on it."""
        if self.kind == SUBLATTICE:
            h = la.hnf(self.data)
            return f"{SUBLATTICE}:{h}"
        if self.kind == HEISENBERG_BM:
            b, m = self.data
            h = tuple(la.lattice_basis(la.columns(b), 2))
            return f"{HEISENBERG_BM}:{h}:{m}"
        return f"{DIAG_SCALES}:{self.data}"

    def describe(self) -> str:
        return self.canonical_form()

    def to_json_dict(self) -> dict:
        return {"model": self.model.describe(), "kind": self.kind, "data": _data_json(self)}

    def _lattice(self) -> list[tuple[int, ...]]:
        return _lattice_of(self)


@lru_cache(maxsize=4096)
def _lattice_of(s: "FiniteIndexSubgroup") -> list[tuple[int, ...]]:
    """HNF column basis of the lattice part."""
    if s.kind == SUBLATTICE:
        return la.lattice_basis(la.columns(s.data), s.model.arity)
    if s.kind == HEISENBERG_BM:
        return la.lattice_basis(la.columns(s.data[0]), 2)
    raise UnsupportedShape(s.kind)


def _data_json(s: FiniteIndexSubgroup):
    if s.kind == HEISENBERG_BM:
        b, m = s.data
        return {"B": [list(r) for r in b], "m": m}
    if s.kind == SUBLATTICE:
        return {"basis": [list(r) for r in s.data]}
    return {"scales": list(s.data)}


def subgroup_equal(s: FiniteIndexSubgroup, t: FiniteIndexSubgroup) -> bool:
    return s.model == t.model and s.canonical_form() == t.canonical_form()


# -- membership ------------------------------------------------------


def contains(s: FiniteIndexSubgroup, g: Elem) -> bool:
    if g.model != s.model:
        raise ModelMismatch("element and subgroup live in different models")
    if s.kind == SUBLATTICE:
        return la.lattice_contains(s._lattice(), g.coords)
    if s.kind == HEISENBERG_BM:
        b, m = s.data
        u, v, w = g.coords
        if w % m != 0:
            return False
        if s.is_diagonal():
            return u % b[0][0] == 0 and v % b[1][1] == 0
        return la.solve_2x2(b, u, v) is not None
    a, b, c = s.data
    x, y, z = g.coords
    return x % a == 0 and y % b == 0 and z % c == 0


# -- subgroup criterion ----------------------------------------------


def row_divisibility_criterion(s: FiniteIndexSubgroup) -> bool:
    """m divides both entries of some row of B.  Sufficient, not necessary."""
    if s.kind != HEISENBERG_BM:
        raise UnsupportedShape("row criterion applies to heisenberg-bm data")
    (i, j), (k, l) = s.data[0]
    m = s.data[1]
    return (i % m == 0 and j % m == 0) or (k % m == 0 and l % m == 0)


def check_subgroup(s: FiniteIndexSubgroup) -> bool:
    """Exact closure test for the represented set.

    For heisenberg-bm the set B.Z^2 x mZ is closed exactly when
    m | gcd(B row 1) * gcd(B row 2): products pick up a cross term
    u1*v2 whose possible values form that ideal.  The one-row
    divisibility test implies this but is strictly weaker.
    """
    if s.kind in (SUBLATTICE, DIAG_SCALES):
        return True
    (i, j), (k, l) = s.data[0]
    m = s.data[1]
    return (math.gcd(i, j) * math.gcd(k, l)) % m == 0


# -- generators ------------------------------------------------------


def generators(s: FiniteIndexSubgroup) -> list[Elem]:
    model = s.model
    if s.kind == SUBLATTICE:
        return [Elem(model, col) for col in la.columns(s.data)]
    if s.kind == HEISENBERG_BM:
        if not check_subgroup(s):
            raise ValueError("not a subgroup: closure fails for this (B, m)")
        b, m = s.data
        c1, c2 = la.columns(b)
        return [
            Elem(model, (c1[0], c1[1], 0)),
            Elem(model, (c2[0], c2[1], 0)),
            Elem(model, (0, 0, m)),
        ]
    a, bb, c = s.data
    return [Elem(model, (a, 0, 0)), Elem(model, (0, bb, 0)), Elem(model, (0, 0, c))]


# -- closure oracle ---------------------------------------------------


def closure_escape(s: FiniteIndexSubgroup, radius: int) -> Elem | None:
    """First product of <= radius slate factors that leaves the set, if any."""
    if radius > 6:
        raise ValueError("closure oracle radius capped at 6")
    model = s.model
    if s.kind == HEISENBERG_BM:
        b, m = s.data
        c1, c2 = la.columns(b)
        slate = [
            Elem(model, (c1[0], c1[1], 0)),
            Elem(model, (c2[0], c2[1], 0)),
            Elem(model, (0, 0, m)),
        ]
    else:
        slate = generators(s)
    factors = slate + [inverse(g) for g in slate]
    layer = [model.identity()]
    seen = {model.identity().coords}
    for _ in range(radius):
        nxt = []
        for g in layer:
            for f in factors:
                ng = multiply(g, f)
                if ng.coords in seen:
                    continue
                seen.add(ng.coords)
                if not contains(s, ng):
                    return ng
                nxt.append(ng)
        layer = nxt
    return None


def closure_oracle(s: FiniteIndexSubgroup, radius: int) -> bool:
    """Brute-force closure check, independent of :func:`check_subgroup`."""
    return closure_escape(s, radius) is None


# -- box enumeration --------------------------------------------------


def members_in_box(s: FiniteIndexSubgroup, box: int) -> list[Elem]:
    """All members of s with every coordinate in [-box, box], sorted."""

    def progression(step: int) -> list[int]:
        step = abs(step)
        return [k * step for k in range(-(box // step), box // step + 1)] if step else [0]

    model = s.model
    out: list[tuple[int, ...]] = []
    if s.kind == DIAG_SCALES:
        a, b, c = s.data
        out = [t for t in product(progression(a), progression(b), progression(c))]
    elif s.kind == HEISENBERG_BM:
        b, m = s.data
        g1 = math.gcd(b[0][0], b[0][1])
        g2 = math.gcd(b[1][0], b[1][1])
        for u in progression(g1):
            for v in progression(g2):
                if la.solve_2x2(b, u, v) is None:
                    continue
                for w in progression(m):
                    out.append((u, v, w))
    else:
        basis = s._lattice()
        steps = [math.gcd(*(col[i] for col in basis)) for i in range(model.arity)]
        for t in product(*(progression(st) for st in steps)):
            if la.lattice_contains(basis, t):
                out.append(t)
    return [Elem(model, t) for t in sorted(out)]


# -- coset keys --------------------------------------------------------


def coset_key_fn(s: FiniteIndexSubgroup):
    """Exact canonical key: key(g) == key(h) iff g^-1 h is in s (left cosets)."""
    if s.kind == DIAG_SCALES:
        a, b, c = s.data

        def key(coords: tuple[int, ...]):
            return (coords[0] % a, coords[1] % b, coords[2] % c)

        return key
    if s.kind == HEISENBERG_BM:
        b, m = s.data
        if s.is_diagonal():
            d1, d2 = abs(b[0][0]), abs(b[1][1])

            def key(coords: tuple[int, ...]):
                x, y, z = coords
                yb = y % d2
                return (x % d1, yb, (z + x * (yb - y)) % m)

            return key
        basis = s._lattice()

        def key(coords: tuple[int, ...]):
            x, y, z = coords
            xb, yb = la.lattice_reduce(basis, (x, y))
            return (xb, yb, (z + x * (yb - y)) % m)

        return key
    basis = s._lattice()

    def key(coords: tuple[int, ...]):
        return la.lattice_reduce(basis, coords)

    return key


def residue_moduli(s: FiniteIndexSubgroup) -> tuple[int, int, int] | None:
    """Per-coordinate moduli when the coset key is plain residues plus, for
    heisenberg-bm, the documented twist; None when not of that shape."""
    if s.kind == DIAG_SCALES:
        return s.data
    if s.kind == HEISENBERG_BM and s.is_diagonal():
        b, m = s.data
        return (abs(b[0][0]), abs(b[1][1]), m)
    return None


# -- coset tables ------------------------------------------------------


class CosetTable:
    """Immutable left-coset table with exact representative lookup.

    For the plain-residue families the position index is a direct-address
    int64 array over residue triples; otherwise a dict keyed on the
    canonical coset key.
    """

    def __init__(self, model: GroupModel, subgroup: FiniteIndexSubgroup, reps: list[Elem],
                 ambient: FiniteIndexSubgroup | None = None, pos_arr=None):
        self.model = model
        self.subgroup = subgroup
        self.reps = reps
        self.ambient = ambient
        self._key = coset_key_fn(subgroup)
        self._mods = residue_moduli(subgroup) if ambient is None else None
        if self._mods is not None:
            if pos_arr is None:
                m1, m2, m3 = self._mods
                pos_arr = np.full(m1 * m2 * m3, -1, dtype=np.int64)
                for i, r in enumerate(reps):
                    pos_arr[self._linear(r.coords)] = i
            self._pos_arr = pos_arr
            self._pos = None
        else:
            self._pos_arr = None
            self._pos = {self._key(r.coords): i for i, r in enumerate(reps)}

    def _linear(self, coords) -> int:
        m1, m2, m3 = self._mods
        k = self._key(coords)
        return (k[0] * m2 + k[1]) * m3 + k[2]

    @property
    def index(self) -> int:
        return len(self.reps)

    def lookup(self, g: Elem) -> int:
        if self._pos_arr is not None:
            i = int(self._pos_arr[self._linear(g.coords)])
            if i < 0:
                raise KeyError(g)
            return i
        return self._pos[self._key(g.coords)]

    def key_of(self, g: Elem):
        return self._key(g.coords)

    def to_json_dict(self) -> dict:
        return {
            "subgroup": self.subgroup.to_json_dict(),
            "index": self.index,
            "reps": [list(r.coords) for r in self.reps],
        }


def _cache_path(s: FiniteIndexSubgroup, ambient, slate) -> str | None:
    root = os.environ.get("CHAINLAB_CACHE_DIR")
    if not root:
        return None
    import hashlib

    tag = "|".join(
        [
            s.model.describe(),
            s.canonical_form(),
            ambient.canonical_form() if ambient else "whole",
            ";".join(str(g.coords) for g in slate),
        ]
    )
    h = hashlib.sha256(tag.encode()).hexdigest()[:24]
    return os.path.join(root, f"cosets-{h}.json")


def _raw_multiply(model: GroupModel):
    """Tuple-level group law for the enumeration hot loop.

    Mirrors :func:`chainlab.groups.multiply`; the equivalence is pinned by
    tests.  Coordinates stay far below 64-bit range here because BFS only
    ever adds bounded generator coordinates.
    """
    if model.kind == HEISENBERG:

        def mul(a, b):
            return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    elif model.kind == SPLIT_EXT:

        def mul(a, b):
            if a[2] % 2:
                return (a[0] - b[0], a[1] - b[1], a[2] + b[2])
            return (a[0] + b[0], a[1] + b[1], a[2] + b[2])

    else:

        def mul(a, b):
            return tuple(x + y for x, y in zip(a, b))

    return mul


_TABLE_MEMO: dict[tuple, CosetTable] = {}


def clear_table_memo() -> None:
    _TABLE_MEMO.clear()


def enumerate_cosets(
    s: FiniteIndexSubgroup,
    group_generators: list[Elem] | None = None,
    cap: int = DEFAULT_COSET_CAP,
    ambient: FiniteIndexSubgroup | None = None,
) -> CosetTable:
    """BFS coset table of s, optionally relative to an ambient subgroup.

    The BFS runs over left multiplication by the generating slate and its
    inverses (inverses after positives, slate order fixed), so tables are
    deterministic across runs.  Tables are memoized in-process; set
    CHAINLAB_CACHE_DIR for an on-disk cache as well.
    """
    if not check_subgroup(s):
        raise ValueError("not a subgroup: closure fails")
    model = s.model
    if group_generators is None:
        slate = generators(ambient) if ambient is not None else model.standard_generators()
    else:
        slate = list(group_generators)

    memo_key = (
        model,
        s.canonical_form(),
        ambient.canonical_form() if ambient else None,
        tuple(g.coords for g in slate),
    )
    hit = _TABLE_MEMO.get(memo_key)
    if hit is not None:
        if hit.index > cap:
            raise EnumerationCapExceeded(
                f"coset enumeration exceeded cap {cap}: index too large or infinite"
            )
        return hit

    path = _cache_path(s, ambient, slate)
    if path and os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        reps = [Elem(model, tuple(c)) for c in payload["reps"]]
        table = CosetTable(model, s, reps, ambient)
        _TABLE_MEMO[memo_key] = table
        return table

    # the hot loop runs on raw coordinate tuples; element objects are built
    # once at the end
    factor_coords = [g.coords for g in slate] + [inverse(g).coords for g in slate]
    raw_mul = _raw_multiply(model)
    key = coset_key_fn(s)
    ident = model.identity().coords
    rep_coords = [ident]
    dq = deque([ident])
    mods = residue_moduli(s) if ambient is None else None
    pos_arr = None
    overflow_msg = f"coset enumeration exceeded cap {cap}: index too large or infinite"
    if mods is not None:
        # direct-address visited structure over residue triples
        m1, m2, m3 = mods
        seen = [-1] * (m1 * m2 * m3)
        k0 = key(ident)
        seen[(k0[0] * m2 + k0[1]) * m3 + k0[2]] = 0
        while dq:
            g = dq.popleft()
            for f in factor_coords:
                ng = raw_mul(f, g)
                k = key(ng)
                lin = (k[0] * m2 + k[1]) * m3 + k[2]
                if seen[lin] < 0:
                    if len(rep_coords) >= cap:
                        raise EnumerationCapExceeded(overflow_msg)
                    seen[lin] = len(rep_coords)
                    rep_coords.append(ng)
                    dq.append(ng)
        pos_arr = np.array(seen, dtype=np.int64)
    else:
        pos = {key(ident): 0}
        while dq:
            g = dq.popleft()
            for f in factor_coords:
                ng = raw_mul(f, g)
                k = key(ng)
                if k not in pos:
                    if len(rep_coords) >= cap:
                        raise EnumerationCapExceeded(overflow_msg)
                    pos[k] = len(rep_coords)
                    rep_coords.append(ng)
                    dq.append(ng)

    reps = [Elem(model, c) for c in rep_coords]
    table = CosetTable(model, s, reps, ambient, pos_arr=pos_arr)
    _TABLE_MEMO[memo_key] = table
    if path:
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump({"reps": [list(r.coords) for r in reps]}, fh)
        os.replace(tmp, path)
    return table


# -- normalizer --------------------------------------------------------


@dataclass
class NormalizerReport:
    subgroup: FiniteIndexSubgroup
    table: CosetTable
    normalizing_positions: list[int]

    @property
    def normalizing_reps(self) -> list[Elem]:
        return [self.table.reps[i] for i in self.normalizing_positions]

    @property
    def index_over_subgroup(self) -> int:
        """|N : S| -- the count of normalizing cosets."""
        return len(self.normalizing_positions)

    def equals_subgroup(self) -> bool:
        return self.normalizing_positions == [0]

    def is_whole_group(self) -> bool:
        return len(self.normalizing_positions) == self.table.index

    def to_json_dict(self) -> dict:
        return {
            "subgroup": self.subgroup.to_json_dict(),
            "group_index": self.table.index,
            "normalizer_index_over_subgroup": self.index_over_subgroup,
            "normalizing_reps": [list(r.coords) for r in self.normalizing_reps],
            "equals_subgroup": self.equals_subgroup(),
            "is_whole_group": self.is_whole_group(),
        }


def normalizer(
    s: FiniteIndexSubgroup,
    table: CosetTable | None = None,
    cap: int = DEFAULT_COSET_CAP,
    ambient: FiniteIndexSubgroup | None = None,
) -> NormalizerReport:
    """Representatives r with r*gen*r^-1 in s for every generator of s.

    Conjugation by a fixed element preserves index, so containment of the
    conjugated generators already forces r s r^-1 = s.  Normalizing is a
    property of the whole coset, so the table restriction is exact.
    """
    if table is None:
        table = enumerate_cosets(s, cap=cap, ambient=ambient)
    gens = generators(s)
    out = []
    for i, r in enumerate(table.reps):
        rinv = inverse(r)
        if all(contains(s, multiply(multiply(r, g), rinv)) for g in gens):
            out.append(i)
    return NormalizerReport(s, table, out)


def normalizes(h: Elem, s: FiniteIndexSubgroup) -> bool:
    """h s h^-1 == s, tested on generators (exact: conjugation preserves index)."""
    hinv = inverse(h)
    return all(contains(s, multiply(multiply(h, g), hinv)) for g in generators(s))


# -- intersection -------------------------------------------------------


def intersect(s: FiniteIndexSubgroup, t: FiniteIndexSubgroup) -> FiniteIndexSubgroup:
    if s.model != t.model:
        raise ModelMismatch("subgroups of different models")
    if s.kind != t.kind:
        raise UnsupportedShape("intersection needs matching canonical families")
    if s.kind == DIAG_SCALES:
        a = tuple(math.lcm(x, y) for x, y in zip(s.data, t.data))
        return FiniteIndexSubgroup.diag_scales(s.model, *a)
    if s.kind == HEISENBERG_BM:
        if not (s.is_diagonal() and t.is_diagonal()):
            raise UnsupportedShape("not in canonical family: non-diagonal intersection")
        (b1, m1), (b2, m2) = s.data, t.data
        d1 = math.lcm(b1[0][0], b2[0][0])
        d2 = math.lcm(b1[1][1], b2[1][1])
        return FiniteIndexSubgroup.heisenberg_bm(s.model, la.diag_matrix((d1, d2)), math.lcm(m1, m2))
    inter = la.lattice_intersection(s.data, t.data)
    return FiniteIndexSubgroup.sublattice(s.model, inter)


def subset_of(s: FiniteIndexSubgroup, t: FiniteIndexSubgroup) -> bool:
    """s a subset of t, decided on s's generators (exact for these families)."""
    return all(contains(t, g) for g in generators(s))
