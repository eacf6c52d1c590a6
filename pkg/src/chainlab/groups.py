"""Exact arithmetic in the three built-in group models.

Every model stores elements as integer coordinate tuples:

* ``free-abelian`` of rank n: Z^n under componentwise addition.
* ``heisenberg``: Z^3 with (x,y,z)*(x',y',z') = (x+x', y+y', z+z'+x*y').
* ``split-ext``: Z^2 extended by Z, the Z factor acting through the
  order-2 automorphism -I, so (a,b,c)*(a',b',c') = ((a,b)+(-1)^c(a',b'), c+c').

All coordinates are kept inside signed 64-bit range; an operation that
would leave it raises :class:`CoordinateOverflow` instead of silently
growing.  The commutator convention is ``[a, b] = a^-1 b^-1 a b``.
"""

from __future__ import annotations

from dataclasses import dataclass

INT64_MAX = 2**63 - 1
INT64_MIN = -(2**63)

FREE_ABELIAN = "free-abelian"
HEISENBERG = "heisenberg"
SPLIT_EXT = "split-ext"


class ModelMismatch(ValueError):
    """Two elements from different group models were combined."""


class CoordinateOverflow(OverflowError):
    """A coordinate left the signed 64-bit range."""


def _checked(v: int) -> int:
    if v > INT64_MAX or v < INT64_MIN:
        raise CoordinateOverflow(f"coordinate {v} outside signed 64-bit range")
    return v


@dataclass(frozen=True, slots=True)
class GroupModel:
    kind: str
    rank: int = 0  # only meaningful for free-abelian

    def __post_init__(self) -> None:
        if self.kind == FREE_ABELIAN:
            if self.rank < 1:
                raise ValueError("free-abelian rank must be >= 1")
        elif self.kind in (HEISENBERG, SPLIT_EXT):
            if self.rank not in (0, 3):
                raise ValueError(f"{self.kind} has arity exactly 3")
            object.__setattr__(self, "rank", 3)
        else:
            raise ValueError(f"unknown group model kind: {self.kind!r}")

    @property
    def arity(self) -> int:
        return self.rank if self.kind == FREE_ABELIAN else 3

    @property
    def is_abelian(self) -> bool:
        return self.kind == FREE_ABELIAN

    def identity(self) -> "Elem":
        return Elem(self, (0,) * self.arity)

    def elem(self, *coords: int) -> "Elem":
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        return Elem(self, tuple(int(c) for c in coords))

    def standard_generators(self) -> list["Elem"]:
        n = self.arity
        return [Elem(self, tuple(1 if i == j else 0 for i in range(n))) for j in range(n)]

    def describe(self) -> str:
        if self.kind == FREE_ABELIAN:
            return f"{FREE_ABELIAN}({self.rank})"
        return self.kind


def free_abelian(rank: int) -> GroupModel:
    return GroupModel(FREE_ABELIAN, rank)


def heisenberg() -> GroupModel:
    return GroupModel(HEISENBERG)


def split_ext() -> GroupModel:
    return GroupModel(SPLIT_EXT)


def model_from_name(name: str, rank: int | None = None) -> GroupModel:
    if name == FREE_ABELIAN:
        if rank is None:
            raise ValueError("free-abelian model needs a rank")
        return free_abelian(rank)
    if name == HEISENBERG:
        return heisenberg()
    if name == SPLIT_EXT:
        return split_ext()
    raise ValueError(f"unknown model name: {name!r}")


@dataclass(frozen=True, slots=True)
class Elem:
    model: GroupModel
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != self.model.arity:
            raise ValueError(
                f"coordinate tuple of length {len(self.coords)} for model of arity {self.model.arity}"
            )
        for c in self.coords:
            _checked(c)

    def __mul__(self, other: "Elem") -> "Elem":
        return multiply(self, other)

    def inv(self) -> "Elem":
        return inverse(self)

    @property
    def is_identity(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __repr__(self) -> str:
        return f"Elem{self.coords}"


def _same_model(a: Elem, b: Elem) -> GroupModel:
    if a.model != b.model:
        raise ModelMismatch(f"elements of {a.model.describe()} and {b.model.describe()}")
    return a.model


def multiply(a: Elem, b: Elem) -> Elem:
    model = _same_model(a, b)
    if model.kind == FREE_ABELIAN:
        coords = tuple(_checked(x + y) for x, y in zip(a.coords, b.coords))
    elif model.kind == HEISENBERG:
        x, y, z = a.coords
        u, v, w = b.coords
        coords = (_checked(x + u), _checked(y + v), _checked(z + w + x * v))
    else:
        x, y, z = a.coords
        u, v, w = b.coords
        s = -1 if z % 2 else 1
        coords = (_checked(x + s * u), _checked(y + s * v), _checked(z + w))
    return Elem(model, coords)


def inverse(a: Elem) -> Elem:
    model = a.model
    if model.kind == FREE_ABELIAN:
        coords = tuple(_checked(-x) for x in a.coords)
    elif model.kind == HEISENBERG:
        x, y, z = a.coords
        coords = (_checked(-x), _checked(-y), _checked(-z + x * y))
    else:
        x, y, z = a.coords
        s = -1 if z % 2 else 1
        coords = (_checked(-s * x), _checked(-s * y), _checked(-z))
    return Elem(model, coords)


def conjugate(h: Elem, g: Elem) -> Elem:
    """h * g * h^-1."""
    return multiply(multiply(h, g), inverse(h))


def commutator(a: Elem, b: Elem) -> Elem:
    """a^-1 * b^-1 * a * b."""
    return multiply(multiply(inverse(a), inverse(b)), multiply(a, b))


def power(a: Elem, n: int) -> Elem:
    if n < 0:
        return power(inverse(a), -n)
    acc = a.model.identity()
    base = a
    # binary powering; coordinates stay checked throughout
    while n:
        if n & 1:
            acc = multiply(acc, base)
        n >>= 1
        if n:
            base = multiply(base, base)
    return acc


def heisenberg_conjugate_third_entry(h: Elem, g: Elem) -> int:
    """Closed form for the third coordinate of h*g*h^-1 in the Heisenberg model.

    Conjugation fixes the first two coordinates and sends the third to
    g3 + h1*g2 - g1*h2.
    """
    if h.model.kind != HEISENBERG:
        raise ModelMismatch("third-entry formula is specific to the heisenberg model")
    _same_model(h, g)
    a, b, _ = h.coords
    g1, g2, g3 = g.coords
    return _checked(g3 + a * g2 - g1 * b)
