"""Truncated transitive actions on coset towers.

A chain truncated at a depth acts on the finite quotients at every level;
this module materializes the coset tables, the compatible projections
between consecutive levels, and the left-multiplication permutations.

Permutations at canonical-residue tables are computed through a
vectorized integer path (int64; all values stay far below 2^63), with a
pure-Python fallback that is also the reference implementation in tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import GroupChain
from .groups import Elem, inverse, multiply
from .subgroups import (
    CosetTable,
    contains,
    enumerate_cosets,
    generators,
    residue_moduli,
)

_FAST_COORD_LIMIT = 2**30  # keeps every int64 intermediate far from overflow


@dataclass
class LevelPermutation:
    level: int
    gamma: Elem
    mapping: np.ndarray  # int64 positions; mapping[j] = image of position j

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LevelPermutation)
            and self.level == other.level
            and np.array_equal(self.mapping, other.mapping)
        )

    def compose(self, other: "LevelPermutation") -> "LevelPermutation":
        """self after other (left-action composition)."""
        if self.level != other.level:
            raise ValueError("compose requires permutations at the same level")
        return LevelPermutation(self.level, multiply(self.gamma, other.gamma), self.mapping[other.mapping])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.mapping, np.arange(len(self.mapping))))

    def order(self) -> int:
        import math

        seen = np.zeros(len(self.mapping), dtype=bool)
        out = 1
        for start in range(len(self.mapping)):
            if seen[start]:
                continue
            length = 0
            j = start
            while not seen[j]:
                seen[j] = True
                j = int(self.mapping[j])
                length += 1
            out = math.lcm(out, length)
        return out

    def cycles(self, nontrivial_only: bool = True) -> list[list[int]]:
        seen = [False] * len(self.mapping)
        out = []
        for start in range(len(self.mapping)):
            if seen[start]:
                continue
            cyc = []
            j = start
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = int(self.mapping[j])
            if len(cyc) > 1 or not nontrivial_only:
                out.append(cyc)
        return out


def _residue_fast_path(table: CosetTable):
    """(moduli, coordinate arrays, residue->position index) for modular tables."""
    mods = residue_moduli(table.subgroup)
    if mods is None or getattr(table, "_pos_arr", None) is None:
        return None
    n = table.index
    xs = np.fromiter((r.coords[0] for r in table.reps), dtype=np.int64, count=n)
    ys = np.fromiter((r.coords[1] for r in table.reps), dtype=np.int64, count=n)
    zs = np.fromiter((r.coords[2] for r in table.reps), dtype=np.int64, count=n)
    if max(int(np.abs(a).max(initial=0)) for a in (xs, ys, zs)) >= _FAST_COORD_LIMIT:
        return None
    return mods, (xs, ys, zs), table._pos_arr


def _residue_linear(kind: str, mods, xs, ys, zs):
    m1, m2, m3 = mods
    if kind == "heisenberg-bm":
        yb = ys % m2
        zb = (zs + xs * (yb - ys)) % m3
        return (xs % m1) * (m2 * m3) + yb * m3 + zb
    return (xs % m1) * (m2 * m3) + (ys % m2) * m3 + (zs % m3)


@dataclass
class TruncatedAction:
    chain: GroupChain
    depth: int
    tables: list[CosetTable]
    level_maps: list[np.ndarray]  # level_maps[i][j]: level-(i+1) position j -> level-i position
    _fast: dict = field(default_factory=dict, repr=False)

    def table(self, level: int) -> CosetTable:
        if not 0 <= level <= self.depth:
            raise ValueError(f"level {level} out of range 0..{self.depth}")
        return self.tables[level]

    def _fast_path(self, level: int):
        if level not in self._fast:
            self._fast[level] = _residue_fast_path(self.tables[level])
        return self._fast[level]

    def sizes(self) -> list[int]:
        return [t.index for t in self.tables]

    def to_json_dict(self, cycle_limit: int = 500) -> dict:
        levels = []
        for i in range(self.depth + 1):
            entry: dict = {"level": i, "index": self.tables[i].index}
            entry["transitive"] = check_transitive(self, i)
            gens = []
            for g in self.chain.ambient_generators():
                perm = act(self, g, i)
                gen_entry = {"generator": list(g.coords), "order": perm.order()}
                if self.tables[i].index <= cycle_limit:
                    gen_entry["cycles"] = perm.cycles()
                gens.append(gen_entry)
            entry["generators"] = gens
            levels.append(entry)
        return {"chain": self.chain.describe(), "depth": self.depth, "levels": levels}


def build_action(chain: GroupChain, depth: int, cap: int | None = None) -> TruncatedAction:
    """Coset tables for levels 0..depth plus the connecting projections."""
    chain.validate_descent(depth)
    tables = []
    for i in range(depth + 1):
        level_cap = cap if cap is not None else chain.level_index(i) + 1
        tables.append(
            enumerate_cosets(chain.level(i), cap=level_cap, ambient=chain.ambient)
        )
    action = TruncatedAction(chain, depth, tables, [])
    for i in range(depth):
        coarse, fine = tables[i], tables[i + 1]
        fast_c, fast_f = action._fast_path(i), action._fast_path(i + 1)
        if fast_c is not None and fast_f is not None:
            mods_c, _, pos_c = fast_c
            _, (xs, ys, zs), _ = fast_f
            action.level_maps.append(
                pos_c[_residue_linear(coarse.subgroup.kind, mods_c, xs, ys, zs)]
            )
        else:
            action.level_maps.append(
                np.fromiter(
                    (coarse.lookup(r) for r in fine.reps), dtype=np.int64, count=fine.index
                )
            )
    return action


def act(action: TruncatedAction, gamma: Elem, level: int) -> LevelPermutation:
    """Left multiplication permutation of gamma on the level's cosets."""
    table = action.table(level)
    fast = action._fast_path(level)
    if fast is not None and all(abs(c) < _FAST_COORD_LIMIT for c in gamma.coords):
        mods, (xs, ys, zs), pos = fast
        kind = table.subgroup.kind
        a, b, c = gamma.coords
        if table.model.kind == "heisenberg":
            nx, ny, nz = a + xs, b + ys, c + zs + a * ys
        elif table.model.kind == "split-ext":
            sign = -1 if c % 2 else 1
            nx, ny, nz = a + sign * xs, b + sign * ys, c + zs
        else:
            nx, ny, nz = a + xs, b + ys, c + zs
        mapping = pos[_residue_linear(kind, mods, nx, ny, nz)]
        return LevelPermutation(level, gamma, mapping)
    mapping = np.fromiter(
        (table.lookup(multiply(gamma, r)) for r in table.reps), dtype=np.int64, count=table.index
    )
    return LevelPermutation(level, gamma, mapping)


def act_reference(action: TruncatedAction, gamma: Elem, level: int) -> LevelPermutation:
    """Pure-Python path: position j -> position of the representative of
    gamma * reps[j].  Used as the oracle for the vectorized path."""
    table = action.table(level)
    mapping = np.fromiter(
        (table.lookup(multiply(gamma, r)) for r in table.reps), dtype=np.int64, count=table.index
    )
    return LevelPermutation(level, gamma, mapping)


def project(action: TruncatedAction, perm: LevelPermutation) -> LevelPermutation:
    """Push a level-(i+1) permutation down to level i through the level map."""
    i = perm.level
    if i == 0:
        raise ValueError("level 0 has no coarser level")
    down = action.level_maps[i - 1]
    coarse_index = action.tables[i - 1].index
    mapping = np.empty(coarse_index, dtype=np.int64)
    mapping[down] = down[perm.mapping]
    return LevelPermutation(i - 1, perm.gamma, mapping)


def level_maps_compatible(action: TruncatedAction, gamma: Elem, level: int) -> bool:
    """down o act(level+1) == act(level) o down, checked at every position."""
    if not 0 <= level < action.depth:
        raise ValueError("need a level strictly below the depth")
    down = action.level_maps[level]
    fine = act(action, gamma, level + 1).mapping
    coarse = act(action, gamma, level).mapping
    return bool(np.array_equal(down[fine], coarse[down]))


def check_transitive(action: TruncatedAction, level: int) -> bool:
    """Breadth-first orbit of position 0 under the generator permutations."""
    perms = [act(action, g, level).mapping for g in action.chain.ambient_generators()]
    perms += [act(action, inverse(g), level).mapping for g in action.chain.ambient_generators()]
    n = action.table(level).index
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        nxt = np.unique(np.concatenate([p[frontier] for p in perms]))
        nxt = nxt[~visited[nxt]]
        visited[nxt] = True
        frontier = nxt
    return bool(visited.all())


def holonomy_probe(action: TruncatedAction, g: Elem, level: int) -> bool:
    """Does g act as the identity on the depth-truncated cylinder of the level?

    The cylinder's points are cosets h*level(depth) with h in level(level);
    the condition g*h*level(i) == h*level(i) is tested for every section
    representative h and every i <= depth via exact membership of h^-1 g h.
    """
    chain, depth = action.chain, action.depth
    if not contains(chain.level(depth), g):
        raise ValueError("probe element is not in the truncated isotropy (deepest level)")
    if not 0 <= level <= depth:
        raise ValueError("cylinder level out of range")
    section = enumerate_cosets(
        chain.level(depth),
        group_generators=generators(chain.level(level)),
        cap=chain.level_index(depth) + 1,
    )
    for h in section.reps:
        conj = multiply(multiply(inverse(h), g), h)
        for i in range(depth + 1):
            if not contains(chain.level(i), conj):
                return False
    return True


def normalization_level(action: TruncatedAction, g: Elem) -> int | None:
    """Least i such that every generator h of level(i) keeps h^-1 g h inside
    the depth-truncated kernel (= membership in the deepest level).

    For a genuine truncated-kernel element the deepest level always
    qualifies, so None only flags invalid input handled leniently.
    """
    chain, depth = action.chain, action.depth
    deepest = chain.level(depth)
    if not contains(deepest, g):
        raise ValueError("element is not in the truncated kernel")
    for i in range(depth + 1):
        gens = generators(chain.level(i))
        if all(contains(deepest, multiply(multiply(inverse(h), g), h)) for h in gens):
            return i
    return None
