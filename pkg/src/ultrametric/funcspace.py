"""Function spaces with finite support and the canonical embedding into them.

For a finite set V* of positive radii and a degree s(r) ≥ 2 at each radius,
the points are maps f: V* → ℕ with f(r) < s(r), and
d(f, g) = max{r : f(r) ≠ g(r)}. Only finitely many radii exist here, so the
finite-support space is the full product Π s(r).
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

import structlog

from src.config import settings
from src.exceptions import (
    CrossCheckError,
    MismatchedDegreeFunctionError,
    PermutationOutOfRangeError,
    ProductTooLargeError,
    SpaceFormatError,
)
from src.ultrametric.core import ZERO, Space
from src.ultrametric.isometry import PartialIsometry, check_partial_isometry, check_property_h
from src.ultrametric.nerve import build_nerve, degree_sequence, node_of_diameter
from src.utils.rational import format_rational, parse_rational

logger = structlog.get_logger(__name__)

Entries = Tuple[Tuple[Fraction, int], ...]


def _entries(values) -> Entries:
    items = values.items() if isinstance(values, Mapping) else values
    return tuple(sorted((Fraction(r), int(k)) for r, k in items))


@dataclass(frozen=True)
class DegreeFunction:
    """The radii V* with a degree s(r) ≥ 2 at each."""

    entries: Entries

    def __post_init__(self):
        object.__setattr__(self, "entries", _entries(self.entries))
        for r, degree in self.entries:
            if r <= 0:
                raise SpaceFormatError(f"radius {format_rational(r)} must be positive")
            if degree < 2:
                raise SpaceFormatError(f"degree at {format_rational(r)} must be at least 2, got {degree}")

    @classmethod
    def from_mapping(cls, s: Mapping) -> "DegreeFunction":
        return cls(_entries(s))

    @property
    def v_star(self) -> Tuple[Fraction, ...]:
        return tuple(r for r, _ in self.entries)

    @property
    def s(self) -> Dict[Fraction, int]:
        return dict(self.entries)

    def degree(self, r: Fraction) -> int:
        return self.s[Fraction(r)]

    @property
    def size(self) -> int:
        """Number of points of the product, Π s(r)."""
        return prod(degree for _, degree in self.entries)

    def describe(self) -> str:
        return ", ".join(f"{format_rational(r)}:{k}" for r, k in self.entries)


@dataclass(frozen=True)
class FinSupportPoint:
    """A point of the product; only nonzero values are stored."""

    df: DegreeFunction
    assignment: Entries = ()

    def __post_init__(self):
        s = self.df.s
        cleaned = []
        for r, value in _entries(self.assignment):
            if r not in s:
                raise SpaceFormatError(f"radius {format_rational(r)} is not in the degree function")
            if not 0 <= value < s[r]:
                raise SpaceFormatError(
                    f"value {value} at radius {format_rational(r)} must lie in 0..{s[r] - 1}"
                )
            if value:
                cleaned.append((r, value))
        object.__setattr__(self, "assignment", tuple(cleaned))

    def value(self, r: Fraction) -> int:
        return dict(self.assignment).get(Fraction(r), 0)

    @property
    def support(self) -> FrozenSet[Fraction]:
        return frozenset(r for r, _ in self.assignment)

    def as_dict(self) -> Dict[Fraction, int]:
        return dict(self.assignment)

    @property
    def label(self) -> str:
        """Values at every radius, largest radius first, joined by dots."""
        values = dict(self.assignment)
        radii = sorted(self.df.v_star, reverse=True)
        if not radii:
            return "0"
        return ".".join(str(values.get(r, 0)) for r in radii)

    def describe(self) -> str:
        inner = ", ".join(f"{format_rational(r)}: {k}" for r, k in sorted(self.assignment, reverse=True))
        return "{" + inner + "}"


@dataclass(frozen=True)
class SigmaFamily:
    """A permutation of 0..s(r)-1 per radius; identity where omitted."""

    per_radius: Tuple[Tuple[Fraction, Tuple[int, ...]], ...] = ()

    def __post_init__(self):
        items = self.per_radius.items() if isinstance(self.per_radius, Mapping) else self.per_radius
        normalized = tuple(sorted((Fraction(r), tuple(perm)) for r, perm in items))
        object.__setattr__(self, "per_radius", normalized)

    def permutation(self, r: Fraction) -> Optional[Tuple[int, ...]]:
        return dict(self.per_radius).get(Fraction(r))

    @property
    def is_identity(self) -> bool:
        return all(perm == tuple(range(len(perm))) for _, perm in self.per_radius)

    def check(self, df: DegreeFunction) -> None:
        s = df.s
        for r, perm in self.per_radius:
            size = s.get(r)
            if size is None or sorted(perm) != list(range(size)):
                raise PermutationOutOfRangeError(format_rational(r), size or len(perm))


def _same_df(f: FinSupportPoint, g: FinSupportPoint) -> None:
    if f.df != g.df:
        raise MismatchedDegreeFunctionError()


def delta(f: FinSupportPoint, g: FinSupportPoint) -> FrozenSet[Fraction]:
    """Δ(f, g): the radii where f and g disagree."""
    _same_df(f, g)
    left, right = f.as_dict(), g.as_dict()
    return frozenset(r for r in left.keys() | right.keys() if left.get(r, 0) != right.get(r, 0))


def fs_distance(f: FinSupportPoint, g: FinSupportPoint) -> Fraction:
    disagreement = delta(f, g)
    return max(disagreement) if disagreement else ZERO


def sigma_apply(sigma: SigmaFamily, f: FinSupportPoint) -> FinSupportPoint:
    sigma.check(f.df)
    values = {}
    for r in f.df.v_star:
        perm = sigma.permutation(r)
        current = f.value(r)
        values[r] = perm[current] if perm is not None else current
    return FinSupportPoint(f.df, tuple(values.items()))


def transitivity_witness(f: FinSupportPoint, g: FinSupportPoint) -> SigmaFamily:
    """Transpositions exchanging f(r) and g(r) wherever they differ."""
    family = {}
    for r in sorted(delta(f, g)):
        perm = list(range(f.df.degree(r)))
        a, b = f.value(r), g.value(r)
        perm[a], perm[b] = b, a
        family[r] = tuple(perm)
    return SigmaFamily(family)


def product_points(df: DegreeFunction, max_size: Optional[int] = None) -> List[FinSupportPoint]:
    """Every point of the product, values varying fastest at the smallest radius."""
    bound = settings.PRODUCT_MAX_SIZE if max_size is None else max_size
    if df.size > bound:
        raise ProductTooLargeError(df.size, bound)
    radii = sorted(df.v_star, reverse=True)
    ranges = [range(df.degree(r)) for r in radii]
    return [FinSupportPoint(df, tuple(zip(radii, values))) for values in product(*ranges)]


def materialize_product(df: DegreeFunction, max_size: Optional[int] = None) -> Space:
    """The product as a Space; points are named by :attr:`FinSupportPoint.label`."""
    points = product_points(df, max_size)
    by_label = {p.label: p for p in points}
    space = Space.trusted(list(by_label), lambda x, y: fs_distance(by_label[x], by_label[y]))
    logger.debug("Product materialized", degrees=df.describe(), points=len(space))
    return space


@dataclass(frozen=True)
class EmbeddingResult:
    """Both stages of the canonical embedding, with the target degree function."""

    df: DegreeFunction
    phi: Dict[str, FinSupportPoint]
    psi: Dict[str, FinSupportPoint]


def degree_function_of(space: Space) -> DegreeFunction:
    """(Spec(M)∖{0}, s_M)."""
    return DegreeFunction.from_mapping(degree_sequence(space).per_radius)


def embed_space(space: Space) -> EmbeddingResult:
    """The canonical isometric embedding of the space into the product for (Spec(M), s_M)."""
    df = degree_function_of(space)
    radii = df.v_star
    raw: Dict[str, Dict[Fraction, int]] = {}

    for position, a in enumerate(space.points):
        earlier = space.points[:position]
        if not earlier:
            raw[a] = {}
            continue
        # d(a, earlier points) is a minimum over a finite set, so it is attained
        gap = min(space.d(a, b) for b in earlier)
        values: Dict[Fraction, int] = {}
        for r in radii:
            if r < gap:
                continue
            if r > gap:
                witness = next(b for b in earlier if space.d(a, b) < r)
                values[r] = raw[witness].get(r, 0)
            else:
                taken = {raw[b].get(r, 0) for b in earlier if space.d(a, b) <= r}
                values[r] = next(k for k in range(len(taken) + 1) if k not in taken)
        raw[a] = {r: k for r, k in values.items() if k}

    phi = {a: FinSupportPoint(df, tuple(raw[a].items())) for a in space.points}

    nerve = build_nerve(space)
    relabel: Dict[FrozenSet[str], Dict[int, int]] = {}
    for node in nerve.internal_nodes:
        seen = sorted({raw[x].get(node.diameter, 0) for x in node.members})
        relabel[node.members] = {old: new for new, old in enumerate(seen)}

    psi = {}
    for a in space.points:
        values = {}
        for r in radii:
            node = node_of_diameter(nerve, a, r)
            values[r] = 0 if node is None else relabel[node.members][raw[a].get(r, 0)]
        psi[a] = FinSupportPoint(df, tuple(values.items()))

    logger.debug("Space embedded", points=len(space), degrees=df.describe())
    return EmbeddingResult(df=df, phi=phi, psi=psi)


def embedding_is_isometric(space: Space, images: Mapping[str, FinSupportPoint]) -> bool:
    return all(
        fs_distance(images[x], images[y]) == space.d(x, y)
        for i, x in enumerate(space.points)
        for y in space.points[i + 1:]
    )


def _segments_hold(space: Space, images: Mapping[str, FinSupportPoint]) -> bool:
    nerve = build_nerve(space)
    per_ball = degree_sequence(space, nerve).per_ball
    for node in nerve.internal_nodes:
        r = node.diameter
        members = space.in_order(node.members)
        if {images[x].value(r) for x in members} != set(range(per_ball[node])):
            return False
        # the first member carrying each value vanishes below r
        first_seen = {}
        for x in members:
            first_seen.setdefault(images[x].value(r), x)
        for x in first_seen.values():
            if any(images[x].value(lower) for lower in images[x].df.v_star if lower < r):
                return False
    return True


def check_initial_segments(space: Space, result: EmbeddingResult) -> bool:
    """Per nontrivial nerve node B of diameter r, {φ(x)(r) : x ∈ B} = {0, …, s_M(B)−1}."""
    return _segments_hold(space, result.phi)


def check_relabelled_segments(space: Space, result: EmbeddingResult) -> bool:
    """The same property for ψ, whose values fill exactly 0..s_M(B)−1."""
    return _segments_hold(space, result.psi)


def verify_feinberg(space: Space, max_size: Optional[int] = None) -> bool:
    """Property h holds iff the canonical embedding is onto its product."""
    h = check_property_h(space)
    result = embed_space(space)
    size = result.df.size
    onto = False
    if size == len(space):
        targets = {p.label for p in product_points(result.df, max_size)}
        onto = {f.label for f in result.psi.values()} == targets
    verdict = (h.h1 and h.h2) == onto
    logger.info("Feinberg check", property_h=h.h1 and h.h2, onto=onto, product_size=size, holds=verdict)
    return verdict


@dataclass(frozen=True)
class Envelope:
    """A homogeneous space with the same spectrum and the embedding into it."""

    df: DegreeFunction
    space: Space
    embedding: Dict[str, str]


def homogeneous_envelope(space: Space, max_size: Optional[int] = None) -> Envelope:
    result = embed_space(space)
    target = materialize_product(result.df, max_size)
    embedding = {a: result.psi[a].label for a in space.points}
    return Envelope(df=result.df, space=target, embedding=embedding)


def lift_point(f: FinSupportPoint, wider: DegreeFunction) -> FinSupportPoint:
    """The same values read in a degree function with more radii or larger degrees."""
    s = wider.s
    for r, degree in f.df.entries:
        if s.get(r, 0) < degree:
            raise MismatchedDegreeFunctionError()
    return FinSupportPoint(wider, f.assignment)


def delon_embedding(
    df: DegreeFunction, space: Space, max_size: Optional[int] = None
) -> Optional[PartialIsometry]:
    """Embed the product for ``df`` into a space with property h.

    Requires V* ⊆ Spec(M) and s(r) ≤ s_M(r); returns ``None`` otherwise.
    """
    h = check_property_h(space)
    if not (h.h1 and h.h2):
        return None
    result = embed_space(space)
    own = result.df.s
    if any(own.get(r, 0) < degree for r, degree in df.entries):
        return None

    back = {f.label: a for a, f in result.psi.items()}
    source = materialize_product(df, max_size)
    mapping = {}
    for f in product_points(df, max_size):
        lifted = lift_point(f, result.df)
        if lifted.label not in back:
            raise CrossCheckError("space with property h is not onto its product")
        mapping[f.label] = back[lifted.label]

    witness = PartialIsometry(source, space, mapping)
    if not check_partial_isometry(witness):
        logger.error("Product embedding is not isometric", degrees=df.describe())
        return None
    return witness


def parse_degree_spec(text: str) -> DegreeFunction:
    """Read ``"1/2:2,1:3"`` into a degree function."""
    pairs = {}
    for item in text.split(","):
        if not item.strip():
            continue
        radius, _, degree = item.partition(":")
        if not degree.strip().isdigit():
            raise SpaceFormatError(f"expected 'radius:degree', got {item!r}")
        r = parse_rational(radius)
        if r in pairs:
            raise SpaceFormatError(f"radius {format_rational(r)} given twice")
        pairs[r] = int(degree)
    return DegreeFunction.from_mapping(pairs)
