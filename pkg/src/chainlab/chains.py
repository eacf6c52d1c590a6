"""Group chains and regularity probes.

A chain is a rule n -> subgroup producing a properly descending tower of
finite-index subgroups starting at the whole group (or at an ambient
subgroup for intersected chains).  Built-in families:

* ``heis-diag(p, q)``: diag(p^n, q^n).Z^2 x p^n Z in the Heisenberg model.
* ``split-diag(p, q, third)``: {(p^n a, q^n b, third^n c)} in the split
  extension.
* ``intersected(parent, H')``: levelwise intersection with a fixed
  finite-index subgroup, regarded as a chain inside H'.
* ``explicit``: a frozen list of levels.

Finite-depth probes return conservative verdicts: ``regular`` only with an
all-levels-normal certificate, ``irregular`` only with a re-verifiable
conjugation witness, ``weakly_regular`` only with a normalizer-tower
certificate, and ``inconclusive_at_depth`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from . import intlinalg as la
from .groups import (
    Elem,
    GroupModel,
    conjugate,
    heisenberg,
    multiply,
    power,
    split_ext,
)
from .subgroups import (
    FiniteIndexSubgroup,
    UnsupportedShape,
    contains,
    generators,
    intersect,
    members_in_box,
    normalizes,
    subgroup_equal,
    subset_of,
)

HEIS_DIAG = "heis-diag"
SPLIT_DIAG = "split-diag"
INTERSECTED = "intersected"
EXPLICIT = "explicit"

REGULAR = "regular"
WEAKLY_REGULAR = "weakly_regular"
IRREGULAR = "irregular"
INCONCLUSIVE = "inconclusive_at_depth"

_WITNESS_SWEEP_BOUND = 3


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class GroupChain:
    model: GroupModel
    family: str
    params: tuple
    max_depth: int = 12
    ambient: FiniteIndexSubgroup | None = None  # None means the whole group

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        lvl0 = self.level(0)
        anchor = self.ambient if self.ambient is not None else FiniteIndexSubgroup.whole_group(self.model)
        if not subgroup_equal(lvl0, anchor):
            raise ValueError("level 0 must be the whole (ambient) group")
        self.validate_descent(min(self.max_depth, 4))

    # -- level rule ---------------------------------------------------

    def level(self, n: int) -> FiniteIndexSubgroup:
        if n < 0 or n > self.max_depth:
            raise ValueError(f"level {n} out of range 0..{self.max_depth}")
        return _level_cached(self, n)

    def level_index(self, n: int) -> int:
        """Index of level(n) inside the ambient group."""
        idx = self.level(n).index()
        if self.ambient is None:
            return idx
        amb = self.ambient.index()
        if idx % amb:
            raise ValueError("level does not sit inside the ambient subgroup")
        return idx // amb

    def validate_descent(self, depth: int) -> None:
        for n in range(min(depth, self.max_depth)):
            cur, nxt = self.level(n), self.level(n + 1)
            if not subset_of(nxt, cur):
                raise ValueError(f"level {n + 1} is not contained in level {n}")
            if nxt.index() <= cur.index():
                raise ValueError(f"chain does not properly descend at level {n}")

    def ambient_generators(self) -> list[Elem]:
        if self.ambient is None:
            return self.model.standard_generators()
        return generators(self.ambient)

    def describe(self) -> str:
        if self.family == INTERSECTED:
            parent, hp = self.params
            return f"{INTERSECTED}({parent.describe()}, {hp.canonical_form()})"
        return f"{self.family}{self.params}"


@lru_cache(maxsize=4096)
def _level_cached(chain: GroupChain, n: int) -> FiniteIndexSubgroup:
    model = chain.model
    if chain.family == HEIS_DIAG:
        p, q = chain.params
        return FiniteIndexSubgroup.heisenberg_bm(model, la.diag_matrix((p**n, q**n)), p**n)
    if chain.family == SPLIT_DIAG:
        p, q, third = chain.params
        return FiniteIndexSubgroup.diag_scales(model, p**n, q**n, third**n)
    if chain.family == INTERSECTED:
        parent, hp = chain.params
        return intersect(parent.level(n), hp)
    levels = chain.params
    if n >= len(levels):
        raise ValueError(f"explicit chain has no level {n}")
    return levels[n]


def heis_diag(p: int, q: int, max_depth: int = 12) -> GroupChain:
    if p == q or not (_is_prime(p) and _is_prime(q)):
        raise ValueError("p and q must be distinct primes")
    return GroupChain(heisenberg(), HEIS_DIAG, (p, q), max_depth)


def split_diag(p: int, q: int, third_base: int = 3, max_depth: int = 12) -> GroupChain:
    if p == q or not (_is_prime(p) and _is_prime(q)):
        raise ValueError("p and q must be distinct primes")
    if third_base < 1:
        raise ValueError("third_base must be >= 1")
    return GroupChain(split_ext(), SPLIT_DIAG, (p, q, third_base), max_depth)


def intersected(parent: GroupChain, hp: FiniteIndexSubgroup, max_depth: int | None = None) -> GroupChain:
    if parent.family == INTERSECTED:
        raise UnsupportedShape("nested intersections are not supported")
    depth = parent.max_depth if max_depth is None else max_depth
    return GroupChain(parent.model, INTERSECTED, (parent, hp), depth, ambient=hp)


def explicit_chain(model: GroupModel, levels, ambient: FiniteIndexSubgroup | None = None) -> GroupChain:
    levels = tuple(levels)
    return GroupChain(model, EXPLICIT, levels, max_depth=len(levels) - 1, ambient=ambient)


# -- truncated kernel ---------------------------------------------------


def truncated_kernel(chain: GroupChain, depth: int, box: int) -> list[Elem]:
    """Box-bounded members of the intersection of levels 0..depth.

    The chain descends, so the intersection is exactly level(depth); the
    box only bounds the enumeration.
    """
    chain.validate_descent(depth)
    return members_in_box(chain.level(depth), box)


def kernel_membership(chain: GroupChain, depth: int, g: Elem) -> bool:
    """Depth-truncated kernel predicate: membership in level(depth)."""
    return contains(chain.level(depth), g)


# -- reports ------------------------------------------------------------


@dataclass
class WitnessFailure:
    n: int
    gamma: Elem
    conjugate: Elem

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": list(self.gamma.coords),
            "conjugate": list(self.conjugate.coords),
        }


@dataclass
class IrregularityWitness:
    h: Elem
    s: int
    escape_level: int
    failures: list[WitnessFailure]

    def to_json_dict(self) -> dict:
        return {
            "h": list(self.h.coords),
            "s": self.s,
            "escape_level": self.escape_level,
            "failures": [f.to_json_dict() for f in self.failures],
        }


@dataclass
class RegularityReport:
    verdict: str
    depth_checked: int
    witness: IrregularityWitness | None = None
    rationale: str = ""

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "depth_checked": self.depth_checked,
            "witness": self.witness.to_json_dict() if self.witness else None,
            "rationale": self.rationale,
        }


# -- normality ----------------------------------------------------------


def level_is_normal(chain: GroupChain, n: int) -> bool:
    """level(n) normal in the ambient group, decided on generator pairs.

    Conjugation by each ambient generator must keep every subgroup
    generator inside; that forces equality because conjugation preserves
    index, and extends to all ambient elements multiplicatively.
    """
    s = chain.level(n)
    return all(
        contains(s, conjugate(g, x)) for g in chain.ambient_generators() for x in generators(s)
    )


def normal_chain_test(chain: GroupChain, depth: int) -> RegularityReport:
    chain.validate_descent(depth)
    for n in range(1, depth + 1):
        if not level_is_normal(chain, n):
            return RegularityReport(
                INCONCLUSIVE,
                depth,
                rationale=f"level {n} is not normal; a normal equivalent chain is not excluded",
            )
    return RegularityReport(REGULAR, depth, rationale="all levels normal up to depth")


# -- irregularity witness search -----------------------------------------


def _verify_witness(chain, h, s, escape_level, gamma_candidates, depth) -> IrregularityWitness | None:
    """Accept only if every level in (s, depth] yields an escaping conjugate."""
    if not contains(chain.level(s), h):
        return None
    target = chain.level(escape_level)
    failures = []
    for n in range(s + 1, depth + 1):
        lvl = chain.level(n)
        hit = None
        for gamma in gamma_candidates(n):
            if not contains(lvl, gamma):
                continue
            conj = conjugate(h, gamma)
            if not contains(target, conj):
                hit = WitnessFailure(n, gamma, conj)
                break
        if hit is None:
            return None
        failures.append(hit)
    return IrregularityWitness(h, s, escape_level, failures)


def _generic_gamma_candidates(chain: GroupChain, extra_powers: int = 4):
    def candidates(n: int):
        gens = generators(chain.level(n))
        out = list(gens)
        for g in gens:
            for k in range(2, extra_powers + 2):
                out.append(power(g, k))
        for a in gens:
            for b in gens:
                if a is not b:
                    out.append(multiply(a, b))
        return out

    return candidates


def _structured_h_candidates(chain: GroupChain, s: int) -> list[Elem]:
    model = chain.model
    out: list[Elem] = []
    if chain.family == HEIS_DIAG:
        p, q = chain.params
        # first coordinate p^s * q, small second/third choices
        out += [
            Elem(model, (p**s * q, 0, 0)),
            Elem(model, (p**s * q, q**s, 0)),
            Elem(model, (p**s * q, 0, p**s)),
        ]
    elif chain.family == SPLIT_DIAG:
        p, q, _ = chain.params
        out += [Elem(model, (p**s, 0, 0)), Elem(model, (p**s * q, 0, 0)), Elem(model, (0, q**s, 0))]
    # generic: products of up to two level-s generators
    gens = generators(chain.level(s))
    out += gens
    for a in gens:
        for b in gens:
            out.append(multiply(a, b))
    return out


def irregularity_witness(chain: GroupChain, s: int, depth: int) -> IrregularityWitness | None:
    """Search for h in level(s) whose conjugates escape level(s+1) at every
    deeper level; empty result means inconclusive, never a certificate."""
    if not s < depth <= chain.max_depth:
        raise ValueError("need s < depth <= max_depth")
    if chain.model.is_abelian:
        return None
    chain.validate_descent(depth)
    gamma_candidates = _generic_gamma_candidates(chain)
    for h in _structured_h_candidates(chain, s):
        if not contains(chain.level(s), h):
            continue
        wit = _verify_witness(chain, h, s, s + 1, gamma_candidates, depth)
        if wit is not None:
            return wit
    return None


# -- weak regularity -------------------------------------------------------


def _normalizer_tower_start(chain: GroupChain, depth: int) -> int | None:
    """Smallest n >= 1 with level(n) inside the normalizer of every deeper level.

    Candidates stop at depth-1: at n = depth the condition quantifies over
    nothing deeper and would certify vacuously.
    """
    for n in range(1, depth):
        ok = True
        for i in range(n, depth + 1):
            lvl_i = chain.level(i)
            if not all(normalizes(g, lvl_i) for g in generators(chain.level(n))):
                ok = False
                break
        if ok:
            return n
    return None


def weak_regularity_probe(
    chain: GroupChain, depth: int, witness_bound: int = _WITNESS_SWEEP_BOUND
) -> RegularityReport:
    chain.validate_descent(depth)
    normal = normal_chain_test(chain, depth)
    if normal.verdict == REGULAR:
        return normal

    start = _normalizer_tower_start(chain, depth)
    if start is not None:
        return RegularityReport(
            WEAKLY_REGULAR,
            depth,
            rationale=f"level {start} normalizes every level in [{start}, {depth}]",
        )

    bound = min(witness_bound, depth - 1)
    witnesses = []
    for s in range(0, bound + 1):
        wit = irregularity_witness(chain, s, depth)
        if wit is None:
            return RegularityReport(
                INCONCLUSIVE,
                depth,
                rationale=f"no conjugation witness found at start level {s}",
            )
        witnesses.append(wit)
    return RegularityReport(
        IRREGULAR,
        depth,
        witness=witnesses[-1],
        rationale=f"conjugation witness found at every start level s in 0..{bound}",
    )


# -- virtual regularity ------------------------------------------------------


def _vp(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


@dataclass
class EnvelopeAnalysis:
    """Structured escape data for a diagonal chain intersected with a
    diagonal envelope (a, b, c): tail start s, scaled moduli A, B, C and
    the escape threshold t = v_p(A*B)."""

    s: int
    A: int
    B: int
    C: int
    t: int

    def to_json_dict(self) -> dict:
        return {"s": self.s, "A": self.A, "B": self.B, "C": self.C, "t": self.t}


def envelope_analysis(p: int, q: int, a: int, b: int, c: int) -> EnvelopeAnalysis:
    s = 1
    while max(a, b, c) >= min(p**s, q**s):
        s += 1
    A = math.lcm(a, p**s)
    B = math.lcm(b, q**s)
    C = math.lcm(c, p**s)
    return EnvelopeAnalysis(s, A, B, C, _vp(A * B, p))


def _heis_envelope_witness(
    chain: GroupChain, env: EnvelopeAnalysis, q: int, depth: int
) -> IrregularityWitness | None:
    """Witness for an intersected diagonal Heisenberg chain: h = (A*q, 0, 0)
    conjugating gamma_n = (0, B*q^(n-s+1), 0); the conjugate's third entry
    is A*B*q^(n-s+2), whose p-valuation t stays below every level past t."""
    model = chain.model
    if env.t >= depth:
        return None
    h = Elem(model, (env.A * q, 0, 0))

    def candidates(n: int):
        return [Elem(model, (0, env.B * q ** (n - env.s + 1), 0))]

    return _verify_witness(chain, h, env.s, env.t + 1, candidates, depth)


def _split_envelope_witness(chain: GroupChain, depth: int) -> IrregularityWitness | None:
    """Witness inside a non-abelian split-extension ambient: conjugating an
    odd-third-coordinate element by (A, 0, 0) shifts its first coordinate
    by 2A, which no deeper first-coordinate modulus divides (p odd)."""
    model = chain.model
    for s in range(0, depth):
        lvl = chain.level(s)
        a1 = lvl.data[0]
        h = Elem(model, (a1, 0, 0))

        def candidates(n: int, _lvl=lvl):
            third = chain.level(n).data[2]
            return [Elem(model, (0, 0, third))] if third % 2 else []

        wit = _verify_witness(chain, h, s, s + 1, candidates, depth)
        if wit is not None:
            return wit
    return None


def virtual_regularity_probe(
    chain: GroupChain, hp: FiniteIndexSubgroup, depth: int
) -> RegularityReport:
    """Classify the chain intersected with hp, regarded as a chain in hp."""
    if depth > chain.max_depth:
        raise ValueError("depth exceeds the chain's max_depth")
    sub = intersected(chain, hp)
    sub.validate_descent(depth)

    normal = normal_chain_test(sub, depth)
    if normal.verdict == REGULAR:
        return RegularityReport(
            REGULAR, depth, rationale="all intersected levels normal inside the cover"
        )

    wit = None
    if chain.family == HEIS_DIAG and hp.kind == "heisenberg-bm":
        if not hp.is_diagonal():
            raise UnsupportedShape("virtual probe supports diagonal covers only")
        p, q = chain.params
        (bmat, m) = hp.data
        env = envelope_analysis(p, q, bmat[0][0], bmat[1][1], m)
        wit = _heis_envelope_witness(sub, env, q, depth)
    elif chain.family == SPLIT_DIAG and hp.kind == "diag-scales":
        wit = _split_envelope_witness(sub, depth)
    else:
        raise UnsupportedShape("virtual probe supports the diagonal built-in families")

    if wit is None:
        # fall back to a generic search inside the cover: products of up to
        # two level-s generators as conjugator candidates
        gamma_candidates = _generic_gamma_candidates(sub)
        for s in range(0, min(_WITNESS_SWEEP_BOUND, depth - 1) + 1):
            gens = generators(sub.level(s))
            candidates = gens + [multiply(x, y) for x in gens for y in gens]
            for h in candidates:
                wit = _verify_witness(sub, h, s, s + 1, gamma_candidates, depth)
                if wit is not None:
                    break
            if wit is not None:
                break

    if wit is not None:
        return RegularityReport(
            IRREGULAR,
            depth,
            witness=wit,
            rationale="conjugation witness inside the cover",
        )
    return RegularityReport(INCONCLUSIVE, depth, rationale="no certificate inside the cover")
