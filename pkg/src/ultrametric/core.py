"""Finite ultrametric spaces over exact rational distances.

A :class:`Space` is a fixed, ordered list of point identifiers and a symmetric
distance matrix of :class:`~fractions.Fraction` values. The point order is
canonical: every enumeration downstream (nerve traversal, searches, the
canonical embedding) follows it.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple

import structlog

from src.exceptions import (
    DuplicatePairError,
    EmptyBallError,
    EmptySubsetError,
    MissingPairError,
    NonPositiveDistanceError,
    SpaceFormatError,
    TriangleViolationError,
    UnknownPointError,
)

logger = structlog.get_logger(__name__)

ZERO = Fraction(0)

# Sorted views are produced on demand; the set itself is the value.
Spectrum = FrozenSet[Fraction]


class Openness(str, Enum):
    """How a ball was produced."""

    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class Space:
    """An immutable finite ultrametric space."""

    points: Tuple[str, ...]
    matrix: Tuple[Tuple[Fraction, ...], ...] = field(repr=False)
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.points)})

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[str]:
        return iter(self.points)

    def __contains__(self, point) -> bool:
        return point in self._index

    def index(self, point: str) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise UnknownPointError(point) from None

    def d(self, x: str, y: str) -> Fraction:
        return self.matrix[self.index(x)][self.index(y)]

    def row(self, point: str) -> Tuple[Fraction, ...]:
        return self.matrix[self.index(point)]

    def in_order(self, subset: Iterable[str]) -> List[str]:
        """The members of ``subset`` in canonical point order."""
        return sorted(subset, key=self.index)

    def check_points(self, subset: Iterable[str]) -> None:
        for point in subset:
            self.index(point)

    @classmethod
    def trusted(cls, points: Sequence[str], distance) -> "Space":
        """Build from a distance callable known to be ultrametric (no triangle check)."""
        points = tuple(points)
        matrix = tuple(
            tuple(ZERO if i == j else Fraction(distance(x, y)) for j, y in enumerate(points))
            for i, x in enumerate(points)
        )
        return cls(points, matrix)


class Ball:
    """A ball given by its explicit member set.

    Equality and hashing use the member set only; many (center, radius)
    pairs denote the same ball.
    """

    __slots__ = ("members", "diameter", "attained", "openness")

    def __init__(
        self,
        members: FrozenSet[str],
        diameter: Fraction,
        attained: bool = True,
        openness: Openness = Openness.CLOSED,
    ):
        object.__setattr__(self, "members", frozenset(members))
        object.__setattr__(self, "diameter", Fraction(diameter))
        object.__setattr__(self, "attained", attained)
        object.__setattr__(self, "openness", Openness(openness))

    def __setattr__(self, name, value):
        raise AttributeError("Ball is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ball):
            return NotImplemented
        return self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, point) -> bool:
        return point in self.members

    def __repr__(self) -> str:
        inner = ",".join(sorted(self.members))
        return f"Ball({{{inner}}}, diameter={self.diameter}, {self.openness.value})"

    @property
    def kind(self) -> Tuple[Fraction, bool]:
        return (self.diameter, self.attained)

    @property
    def least_member(self) -> str:
        return min(self.members)

    @property
    def is_trivial(self) -> bool:
        return self.diameter == 0

    def sort_key(self) -> Tuple[Fraction, str]:
        """Diameter descending, then lexicographically least member."""
        return (-self.diameter, self.least_member)


def validate_ultrametric(
    points: Sequence[str], entries: Iterable[Tuple[str, str, Fraction]]
) -> Space:
    """Build a :class:`Space` from one entry per unordered pair, checking every axiom."""
    points = tuple(points)
    if not points:
        raise SpaceFormatError("space must have at least one point")
    if len(set(points)) != len(points):
        seen = set()
        for p in points:
            if p in seen:
                raise SpaceFormatError(f"duplicate point identifier: {p}")
            seen.add(p)

    index = {p: i for i, p in enumerate(points)}
    n = len(points)
    matrix: List[List[Fraction]] = [[ZERO] * n for _ in range(n)]
    filled = set()

    for x, y, value in entries:
        if x not in index:
            raise UnknownPointError(x)
        if y not in index:
            raise UnknownPointError(y)
        if x == y:
            raise SpaceFormatError(f"distance entry for a point with itself: {x}")
        i, j = index[x], index[y]
        key = (min(i, j), max(i, j))
        if key in filled:
            raise DuplicatePairError(x, y)
        value = Fraction(value)
        if value <= 0:
            raise NonPositiveDistanceError(x, y, value)
        filled.add(key)
        matrix[i][j] = matrix[j][i] = value

    for i, j in combinations(range(n), 2):
        if (i, j) not in filled:
            raise MissingPairError(points[i], points[j])

    # d(x, z) <= max(d(x, y), d(y, z)); the long side is named first, the apex last
    for i, k in combinations(range(n), 2):
        long_side = matrix[i][k]
        for j in range(n):
            if j == i or j == k:
                continue
            if long_side > max(matrix[i][j], matrix[j][k]):
                raise TriangleViolationError(points[i], points[k], points[j])

    space = Space(points, tuple(tuple(row) for row in matrix))
    logger.debug("Space validated", points=n)
    return space


def spectrum_at(space: Space, a: str) -> Spectrum:
    """Spec(M, a): the distances from ``a`` to every point, 0 included."""
    return frozenset(space.row(a))


def spectrum(space: Space) -> Spectrum:
    """Spec(M): union of all point spectra."""
    values = {ZERO}
    for row in space.matrix:
        values.update(row)
    return frozenset(values)


def multispectrum(space: Space) -> FrozenSet[Spectrum]:
    """MSpec(M): the set of distinct point spectra."""
    return frozenset(frozenset(row) for row in space.matrix)


def ball(space: Space, a: str, r, openness: Openness = Openness.CLOSED) -> Ball:
    """B(a, r) (open) or B̂(a, r) (closed) as an explicit member set."""
    r = Fraction(r)
    openness = Openness(openness)
    row = space.row(a)
    if r < 0:
        raise EmptyBallError(a, r)
    if openness is Openness.OPEN:
        if r == 0:
            raise EmptyBallError(a, r)
        members = [p for p, value in zip(space.points, row) if value < r]
    else:
        members = [p for p, value in zip(space.points, row) if value <= r]
    # δ(B) = sup{d(a, x) : x ∈ B} for any a ∈ B
    inside = [value for value in row if (value < r if openness is Openness.OPEN else value <= r)]
    return Ball(frozenset(members), max(inside), True, openness)


def diameter(space: Space, subset: Iterable[str]) -> Fraction:
    """δ(A): the largest pairwise distance inside ``subset``."""
    members = space.in_order(set(subset))
    if not members:
        raise EmptySubsetError()
    base = space.row(members[0])
    return max(base[space.index(x)] for x in members)


def restrict(space: Space, subset: Iterable[str]) -> Space:
    """M↾A, keeping the canonical order of the surviving points."""
    members = space.in_order(set(subset))
    if not members:
        raise EmptySubsetError()
    rows = [space.row(x) for x in members]
    columns = [space.index(y) for y in members]
    matrix = tuple(tuple(row[j] for j in columns) for row in rows)
    return Space(tuple(members), matrix)


def multispectrum_of(space: Space, subset: Iterable[str]) -> FrozenSet[Spectrum]:
    """MSpec(M↾A)."""
    return multispectrum(restrict(space, subset))


def open_radii(space: Space) -> List[Fraction]:
    """Radii giving every distinct open ball: Spec(M)∖{0} plus one radius above δ(M)."""
    values = sorted(spectrum(space) - {ZERO})
    top = (values[-1] if values else ZERO) + 1
    return values + [top]


def all_balls(space: Space) -> List[Ball]:
    """Every open and closed ball of the space, deduplicated by member set.

    On a finite space each open ball is also a closed ball, so the result
    coincides with the nerve; the enumeration does not rely on that.
    """
    found: Dict[FrozenSet[str], Ball] = {}
    for a in space.points:
        for r in sorted(spectrum_at(space, a)):
            b = ball(space, a, r, Openness.CLOSED)
            found.setdefault(b.members, b)
        for r in open_radii(space):
            b = ball(space, a, r, Openness.OPEN)
            found.setdefault(b.members, b)
    return sorted(found.values(), key=Ball.sort_key)


def is_ball(space: Space, subset: Iterable[str]) -> bool:
    """Whether ``subset`` is the member set of some ball."""
    members = frozenset(subset)
    if not members:
        return False
    a = min(members, key=space.index)
    r = diameter(space, members)
    return ball(space, a, r, Openness.CLOSED).members == members
