"""Word-metric balls, coset-space growth, degree estimation, and the
lower-central-series growth degree.

Ball counts are exact breadth-first enumerations keyed on raw coordinate
tuples.  Degree estimation reports two estimators: the doubling ratio
log2(f(2r)/f(r)) at the largest usable pair, and a least-squares slope of
log f against log r over the top half of the radii; acceptance checks
use the slope.

The growth degree of a finitely generated nilpotent group is
sum (l+1) * r_l over the lower central series, where r_l is the free
rank of the l-th successive quotient.  For the built-in models the
series is computed from generator commutators as an integer lattice
iteration; a radius-bounded brute-force sweep cross-checks it in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import intlinalg as la
from .groups import (
    FREE_ABELIAN,
    HEISENBERG,
    Elem,
    GroupModel,
    commutator,
    inverse,
    multiply,
)
from .subgroups import FiniteIndexSubgroup, coset_key_fn, generators

DEFAULT_ELEMENT_CAP = 5_000_000


class MemoryCapExceeded(RuntimeError):
    """Ball enumeration would exceed the configured element budget."""


class SeriesTooShort(ValueError):
    """Degree estimation needs at least six entries."""


@dataclass
class GrowthSeries:
    label: str
    slate: list[tuple[int, ...]]
    entries: list[tuple[int, int]]  # (radius, ball size)

    @property
    def rmax(self) -> int:
        return self.entries[-1][0]

    def size(self, r: int) -> int:
        for radius, count in self.entries:
            if radius == r:
                return count
        raise KeyError(f"no entry at radius {r}")

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "slate": [list(g) for g in self.slate],
            "entries": [[r, c] for r, c in self.entries],
        }

    def to_csv(self) -> str:
        lines = ["radius,count"]
        lines += [f"{r},{c}" for r, c in self.entries]
        return "\n".join(lines) + "\n"


def default_radius_cap(model: GroupModel) -> int:
    return 60 if model.kind == FREE_ABELIAN else 14


def ball_series(
    model: GroupModel,
    rmax: int,
    slate: list[Elem] | None = None,
    element_cap: int = DEFAULT_ELEMENT_CAP,
    enforce_cap: bool = True,
) -> GrowthSeries:
    """Exact ball sizes |B(r)| for r = 0..rmax in the word metric of the slate."""
    if slate is None:
        slate = model.standard_generators()
    if enforce_cap and rmax > default_radius_cap(model):
        raise ValueError(
            f"radius {rmax} above the configured cap {default_radius_cap(model)} for {model.describe()}"
        )
    factors = [g for g in slate] + [inverse(g) for g in slate]
    ident = model.identity()
    seen = {ident.coords}
    frontier = [ident]
    entries = [(0, 1)]
    for r in range(1, rmax + 1):
        nxt = []
        for g in frontier:
            for f in factors:
                ng = multiply(g, f)
                if ng.coords not in seen:
                    if len(seen) >= element_cap:
                        raise MemoryCapExceeded(f"element budget {element_cap} exhausted at radius {r}")
                    seen.add(ng.coords)
                    nxt.append(ng)
        frontier = nxt
        entries.append((r, len(seen)))
    return GrowthSeries(model.describe(), [g.coords for g in slate], entries)


def ball(model: GroupModel, slate: list[Elem] | None, r: int, **kw) -> int:
    return ball_series(model, r, slate, **kw).entries[-1][1]


class CentralAxis:
    """Kernel-style subgroup: the center {(0, 0, z)} of the Heisenberg model.

    Infinite index; supports exact membership and a coset key, which is all
    the coset-space enumeration needs.
    """

    def __init__(self, model: GroupModel):
        if model.kind != HEISENBERG:
            raise ValueError("central axis is only wired for the heisenberg model")
        self.model = model

    def contains(self, g: Elem) -> bool:
        return g.coords[0] == 0 and g.coords[1] == 0

    def coset_key(self, coords: tuple[int, ...]):
        return (coords[0], coords[1])

    def describe(self) -> str:
        return "central-axis"


def _coset_key_for(s) -> tuple:
    if isinstance(s, CentralAxis):
        return s.coset_key, s.describe()
    return coset_key_fn(s), s.canonical_form()


def schreier_series(
    model: GroupModel,
    s,
    rmax: int,
    slate: list[Elem] | None = None,
    element_cap: int = DEFAULT_ELEMENT_CAP,
) -> GrowthSeries:
    """Ball sizes in the coset space G/s under the quotient word metric.

    BFS over left multiplication with exact coset deduplication; the key
    function realizes the same merge as the pairwise membership test
    rep^-1 * g in s.
    """
    if slate is None:
        slate = model.standard_generators()
    key, label = _coset_key_for(s)
    factors = [g for g in slate] + [inverse(g) for g in slate]
    ident = model.identity()
    seen = {key(ident.coords)}
    frontier = [ident]
    entries = [(0, 1)]
    for r in range(1, rmax + 1):
        nxt = []
        for g in frontier:
            for f in factors:
                ng = multiply(f, g)
                k = key(ng.coords)
                if k not in seen:
                    if len(seen) >= element_cap:
                        raise MemoryCapExceeded(f"element budget {element_cap} exhausted at radius {r}")
                    seen.add(k)
                    nxt.append(ng)
        frontier = nxt
        entries.append((r, len(seen)))
    return GrowthSeries(f"{model.describe()}/{label}", [g.coords for g in slate], entries)


def schreier_ball(model: GroupModel, s, slate: list[Elem] | None, r: int, **kw) -> int:
    return schreier_series(model, s, r, slate, **kw).entries[-1][1]


# -- degree estimation ---------------------------------------------------


@dataclass
class DegreeEstimate:
    slope: float
    doubling: float
    slope_window: tuple[int, int]
    doubling_pair: tuple[int, int]
    tail: list[tuple[int, float]]  # (radius, local slope between consecutive radii)

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "doubling": self.doubling,
            "slope_window": list(self.slope_window),
            "doubling_pair": list(self.doubling_pair),
            "tail": [[r, v] for r, v in self.tail],
        }


def degree_estimate(series: GrowthSeries) -> DegreeEstimate:
    """Doubling and log-log slope estimators with tail diagnostics."""
    entries = [(r, c) for r, c in series.entries if r >= 1]
    if len(series.entries) < 6:
        raise SeriesTooShort("need at least 6 entries to estimate a degree")
    rmax = entries[-1][0]

    r0 = rmax // 2
    f = dict(entries)
    doubling = math.log2(f[2 * r0] / f[r0]) if r0 >= 1 else 0.0
    pair = (r0, 2 * r0)

    lo = max(1, math.ceil(rmax / 2))
    window = [(r, c) for r, c in entries if r >= lo]
    xs = [math.log(r) for r, _ in window]
    ys = [math.log(c) for _, c in window]
    n = len(xs)
    if n >= 2 and max(xs) > min(xs):
        mx, my = sum(xs) / n, sum(ys) / n
        slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    else:
        slope = 0.0

    tail = []
    for (r1, c1), (r2, c2) in zip(window, window[1:]):
        tail.append((r2, math.log(c2 / c1) / math.log(r2 / r1)))
    return DegreeEstimate(slope, doubling, (lo, rmax), pair, tail)


# -- lower central series -------------------------------------------------


@dataclass
class LcsReport:
    model: str
    ranks: list[int]
    length: int | None
    bass_degree: int | None
    nilpotent: bool
    note: str = ""
    free_abelian_cover: list[list[int]] | None = None

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "ranks": list(self.ranks),
            "length": self.length,
            "bass_degree": self.bass_degree,
            "nilpotent": self.nilpotent,
            "note": self.note,
            "free_abelian_cover": self.free_abelian_cover,
        }


def _commutator_step(model: GroupModel, sources: list[Elem], lattice: list[tuple[int, ...]]):
    """Lattice generated by [g, h] for g in sources, h spanning `lattice`."""
    dim = model.arity
    elems = [Elem(model, col) for col in lattice]
    vecs = []
    for g in sources:
        for h in elems:
            vecs.append(commutator(g, h).coords)
            vecs.append(commutator(h, g).coords)
    return la.lattice_basis(vecs, dim)


def lcs_lattices(model: GroupModel, max_length: int = 6, sources: list[Elem] | None = None):
    """Successive commutator lattices: entry l-1 spans the (l)-th term, l >= 1.

    The first term comes from pairwise generator commutators; each later
    term from commutators of the generators against the previous term's
    basis.  For these models every term past the first lies in an abelian
    coordinate sublattice, so integer spans are exact subgroups.
    """
    gens = sources if sources is not None else model.standard_generators()
    dim = model.arity
    first = la.lattice_basis(
        [commutator(a, b).coords for a in gens for b in gens], dim
    )
    out = [first]
    while out[-1] and len(out) < max_length:
        out.append(_commutator_step(model, gens, out[-1]))
    return out


def _snf_rank(basis: list[tuple[int, ...]], dim: int) -> int:
    """Lattice rank = count of nonzero Smith invariant factors."""
    if not basis:
        return 0
    return len(la.smith_diagonal(la.from_columns(basis, dim)))


def lcs_ranks(model: GroupModel, max_length: int = 6) -> LcsReport:
    """Ranks of the lower central series quotients and the growth degree."""
    terms = lcs_lattices(model, max_length=max_length)
    dim = model.arity
    term_ranks = [_snf_rank(t, dim) for t in terms]
    nilpotent = not terms[-1]
    desc = model.describe()
    if not nilpotent:
        return LcsReport(
            desc,
            ranks=[dim - term_ranks[0]] + [a - b for a, b in zip(term_ranks, term_ranks[1:])],
            length=None,
            bass_degree=None,
            nilpotent=False,
            note=(
                "not nilpotent: the lower central series keeps rank "
                f"{term_ranks[-1]} through {max_length} terms; growth-degree formula inapplicable"
            ),
        )
    length = next(i for i, t in enumerate(terms) if not t) + 1
    ranks = [dim - term_ranks[0]]
    for l in range(1, length):
        ranks.append(term_ranks[l - 1] - term_ranks[l])
    bass = sum((l + 1) * r for l, r in enumerate(ranks))
    cover = None
    if bass <= 3:
        # a low-degree nilpotent group contains a finite-index free abelian
        # subgroup of the same rank; for the abelian built-ins it is the
        # whole group with the standard basis
        cover = [list(g.coords) for g in model.standard_generators()]
    return LcsReport(desc, ranks, length, bass, True, free_abelian_cover=cover)


def commutator_sweep(model: GroupModel, radius: int = 4, max_length: int = 6):
    """Brute-force oracle: commutator lattices from all pairs in a word ball.

    Independent of :func:`lcs_lattices`; rank extraction still goes through
    the integer normal form.
    """
    ball_elems = [Elem(model, c) for c in sorted(_ball_coords(model, radius))]
    dim = model.arity
    first = la.lattice_basis(
        [commutator(a, b).coords for a in ball_elems for b in ball_elems], dim
    )
    out = [first]
    while out[-1] and len(out) < max_length:
        out.append(_commutator_step(model, ball_elems, out[-1]))
    return out


def _ball_coords(model: GroupModel, radius: int):
    factors = model.standard_generators()
    factors = factors + [inverse(g) for g in factors]
    ident = model.identity()
    seen = {ident.coords}
    frontier = [ident]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for f in factors:
                ng = multiply(g, f)
                if ng.coords not in seen:
                    seen.add(ng.coords)
                    nxt.append(ng)
        frontier = nxt
    return seen


# -- finite-index comparison ----------------------------------------------


@dataclass
class GrowthComparison:
    group_series: GrowthSeries
    subgroup_series: GrowthSeries
    coset_series: GrowthSeries
    group_estimate: DegreeEstimate
    subgroup_estimate: DegreeEstimate
    degree_gap: float
    coset_dominated: bool

    def to_json_dict(self) -> dict:
        return {
            "group_series": self.group_series.to_json_dict(),
            "subgroup_series": self.subgroup_series.to_json_dict(),
            "coset_series": self.coset_series.to_json_dict(),
            "group_estimate": self.group_estimate.to_json_dict(),
            "subgroup_estimate": self.subgroup_estimate.to_json_dict(),
            "degree_gap": self.degree_gap,
            "coset_dominated": self.coset_dominated,
        }


def finite_index_growth_check(
    model: GroupModel,
    s: FiniteIndexSubgroup,
    rmax_group: int,
    rmax_subgroup: int | None = None,
) -> GrowthComparison:
    """Compare the subgroup's intrinsic growth with the group's, and check
    that coset-space counts never exceed group counts."""
    rs = rmax_group if rmax_subgroup is None else rmax_subgroup
    grp = ball_series(model, rmax_group)
    sub = ball_series(model, rs, slate=generators(s), enforce_cap=False)
    cos = schreier_series(model, s, rmax_group)
    ge = degree_estimate(grp)
    se = degree_estimate(sub)
    dominated = all(cos.size(r) <= grp.size(r) for r, _ in cos.entries)
    return GrowthComparison(grp, sub, cos, ge, se, abs(ge.slope - se.slope), dominated)
