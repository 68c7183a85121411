"""Isometries of finite ultrametric spaces.

Fast deciders work on canonical codes of the nerve. The exhaustive searches
(``enumerate_automorphisms``, ``enumerate_partial_isometries``) are size
gated and serve as oracles for the brute-force modes.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from types import MappingProxyType
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

import structlog

from src.config import settings
from src.exceptions import (
    ConditionAViolatedError,
    CrossCheckError,
    NotAnIsometryError,
    TooLargeError,
)
from src.ultrametric.core import (
    Ball,
    Openness,
    Space,
    ZERO,
    all_balls,
    ball,
    multispectrum,
    multispectrum_of,
    open_radii,
    restrict,
    spectrum_at,
)
from src.ultrametric.nerve import (
    NerveTree,
    build_nerve,
    restricted_spectrum,
    similar,
    sons,
)

logger = structlog.get_logger(__name__)

# (diameter, sorted child codes); every leaf is (0, ())
CanonicalCode = Tuple[Any, ...]
PointedCode = Tuple[Tuple[Any, CanonicalCode], ...]
Members = FrozenSet[str]

LEAF_CODE: CanonicalCode = (ZERO, ())


@dataclass(frozen=True)
class PartialIsometry:
    """An injective partial map between two spaces, as a read-only mapping."""

    source: Space
    target: Space
    mapping: Mapping[str, str] = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "mapping", MappingProxyType(dict(self.mapping)))

    @classmethod
    def within(cls, space: Space, mapping: Mapping[str, str]):
        return cls(space, space, mapping)

    def __len__(self) -> int:
        return len(self.mapping)

    def __getitem__(self, point: str) -> str:
        return self.mapping[point]

    @property
    def domain(self) -> List[str]:
        return self.source.in_order(self.mapping)

    @property
    def image(self) -> List[str]:
        return self.target.in_order(self.mapping.values())

    @property
    def is_total(self) -> bool:
        return len(self.mapping) == len(self.source)

    def restricted(self, keys) -> "PartialIsometry":
        keys = set(keys)
        return type(self)(self.source, self.target, {k: v for k, v in self.mapping.items() if k in keys})

    def inverse(self) -> "PartialIsometry":
        return type(self)(self.target, self.source, {v: k for k, v in self.mapping.items()})


class SpecIsometry(PartialIsometry):
    """A local isometry of one space that also preserves every point spectrum."""


class PropertyH(NamedTuple):
    h1: bool
    h2: bool


MapLike = Union[PartialIsometry, Mapping[str, str]]


def _as_dict(phi: MapLike) -> Dict[str, str]:
    if isinstance(phi, PartialIsometry):
        return dict(phi.mapping)
    return dict(phi)


def _bound(override: Optional[int], configured: int) -> int:
    return configured if override is None else override


# ---------------------------------------------------------------------------
# Partial isometries
# ---------------------------------------------------------------------------


def _first_violation(source: Space, target: Space, mapping: Mapping[str, str]) -> Optional[Tuple[str, str]]:
    """The first domain pair (in source order) whose distance is not preserved."""
    source.check_points(mapping.keys())
    target.check_points(mapping.values())
    domain = source.in_order(mapping)
    for x, y in combinations(domain, 2):
        if target.d(mapping[x], mapping[y]) != source.d(x, y):
            return (x, y)
    return None


def check_partial_isometry(p: PartialIsometry) -> bool:
    """d′(φ(x), φ(y)) = d(x, y) on every domain pair."""
    return _first_violation(p.source, p.target, p.mapping) is None


def _require_isometry(space: Space, mapping: Mapping[str, str]) -> None:
    violation = _first_violation(space, space, mapping)
    if violation is not None:
        raise NotAnIsometryError(*violation)


def _require_spec_isometry(space: Space, mapping: Mapping[str, str]) -> None:
    _require_isometry(space, mapping)
    for x in space.in_order(mapping):
        if spectrum_at(space, x) != spectrum_at(space, mapping[x]):
            raise NotAnIsometryError(x, mapping[x], detail=f"{x} and {mapping[x]} have different spectra")


def _is_full_automorphism(space: Space, mapping: Mapping[str, str]) -> bool:
    return (
        set(mapping) == set(space.points)
        and set(mapping.values()) == set(space.points)
        and _first_violation(space, space, mapping) is None
    )


# ---------------------------------------------------------------------------
# Canonical codes
# ---------------------------------------------------------------------------


class _TreeIndex:
    """Subtree codes, sorted children and pointed codes for one space."""

    def __init__(self, space: Space):
        self.space = space
        self.nerve: NerveTree = build_nerve(space)
        self.codes: Dict[Members, CanonicalCode] = {}
        for node in sorted(self.nerve.nodes, key=lambda n: (n.diameter, len(n))):
            if node.is_trivial:
                self.codes[node.members] = LEAF_CODE
            else:
                child_codes = sorted(self.codes[c.members] for c in self.nerve.children(node))
                self.codes[node.members] = (node.diameter, tuple(child_codes))
        self.root_code = self.codes[self.nerve.root.members]
        self.chains: Dict[str, List[Ball]] = {p: self.nerve.chain(p) for p in space.points}
        self.pointed: Dict[str, PointedCode] = {p: self._pointed(p) for p in space.points}

    def ordered_children(self, node: Ball, skip: Optional[Ball] = None) -> List[Ball]:
        kids = [c for c in self.nerve.children(node) if c != skip]
        return sorted(kids, key=lambda c: (self.codes[c.members], c.least_member))

    def _pointed(self, point: str) -> PointedCode:
        chain = self.chains[point]
        levels = []
        for below, node in zip(chain, chain[1:]):
            siblings = tuple(sorted(self.codes[c.members] for c in self.nerve.children(node) if c != below))
            levels.append((node.diameter, siblings))
        return tuple(levels)


@lru_cache(maxsize=128)
def _index(space: Space) -> _TreeIndex:
    return _TreeIndex(space)


def _match_subtrees(src: _TreeIndex, node: Ball, dst: _TreeIndex, image: Ball, out: Dict[str, str]) -> None:
    """Map ``node`` onto ``image`` (equal codes) child by child."""
    stack = [(node, image)]
    while stack:
        left, right = stack.pop()
        if left.is_trivial:
            out[left.least_member] = right.least_member
            continue
        stack.extend(zip(src.ordered_children(left), dst.ordered_children(right)))


def canonical_code(space: Space) -> CanonicalCode:
    """Relabelling-invariant code of the nerve; equal codes iff isometric."""
    return _index(space).root_code


def subtree_code(space: Space, node: Ball) -> CanonicalCode:
    return _index(space).codes[node.members]


def isometric(first: Space, second: Space) -> Optional[PartialIsometry]:
    """A witness bijection when the spaces are isometric, else ``None``."""
    if len(first) != len(second):
        return None
    left, right = _index(first), _index(second)
    if left.root_code != right.root_code:
        return None
    mapping: Dict[str, str] = {}
    _match_subtrees(left, left.nerve.root, right, right.nerve.root, mapping)
    if _first_violation(first, second, mapping) is not None or len(set(mapping.values())) != len(second):
        raise CrossCheckError("code-guided matching produced a non-isometric map")
    return PartialIsometry(first, second, mapping)


def find_subspace_embedding(first: Space, second: Space) -> Optional[PartialIsometry]:
    """An injective distance-preserving map ``first`` → ``second`` by backtracking."""
    if len(first) > len(second):
        return None
    order = list(first.points)
    mapping: Dict[str, str] = {}
    used = set()

    def place(i: int) -> bool:
        if i == len(order):
            return True
        x = order[i]
        for y in second.points:
            if y in used:
                continue
            if all(second.d(y, mapping[z]) == first.d(x, z) for z in order[:i]):
                mapping[x] = y
                used.add(y)
                if place(i + 1):
                    return True
                del mapping[x]
                used.discard(y)
        return False

    if not place(0):
        return None
    return PartialIsometry(first, second, mapping)


# ---------------------------------------------------------------------------
# Automorphisms and orbits
# ---------------------------------------------------------------------------


def pointed_code(space: Space, point: str) -> PointedCode:
    """The nerve seen from ``point``: per ancestor, its diameter and sibling codes."""
    space.index(point)
    return _index(space).pointed[point]


def _automorphism_mapping(space: Space, x: str, y: str) -> Optional[Dict[str, str]]:
    idx = _index(space)
    if idx.pointed[x] != idx.pointed[y]:
        return None
    mapping = {x: y}
    chain_x, chain_y = idx.chains[x], idx.chains[y]
    for level in range(1, len(chain_x)):
        left = idx.ordered_children(chain_x[level], skip=chain_x[level - 1])
        right = idx.ordered_children(chain_y[level], skip=chain_y[level - 1])
        for node, image in zip(left, right):
            _match_subtrees(idx, node, idx, image, mapping)
    return mapping


def find_automorphism(space: Space, x: str, y: str) -> Optional[PartialIsometry]:
    """A full self-isometry sending ``x`` to ``y``, built from pointed codes."""
    space.check_points((x, y))
    mapping = _automorphism_mapping(space, x, y)
    if mapping is None:
        return None
    if not _is_full_automorphism(space, mapping):
        raise CrossCheckError(f"automorphism built for {x} -> {y} is not an isometry")
    return PartialIsometry.within(space, mapping)


def orbits(space: Space) -> List[Tuple[str, ...]]:
    """Automorphism orbits, each in point order, ordered by first member."""
    idx = _index(space)
    groups: Dict[PointedCode, List[str]] = {}
    for p in space.points:
        groups.setdefault(idx.pointed[p], []).append(p)
    return [tuple(members) for members in groups.values()]


def enumerate_automorphisms(
    space: Space,
    seed: Optional[Mapping[str, str]] = None,
    max_points: Optional[int] = None,
) -> Iterator[Dict[str, str]]:
    """Every full self-isometry extending ``seed``, by plain backtracking.

    Candidates are filtered by spectrum and distances only; no canonical
    codes are consulted.
    """
    bound = _bound(max_points, settings.BRUTE_FORCE_AUTOMORPHISM_MAX_POINTS)
    if len(space) > bound:
        raise TooLargeError(len(space), bound, what="space")
    assigned = dict(seed or {})
    if _first_violation(space, space, assigned) is not None:
        return iter(())
    spectra = {p: spectrum_at(space, p) for p in space.points}
    if any(spectra[x] != spectra[y] for x, y in assigned.items()):
        return iter(())
    free = [p for p in space.points if p not in assigned]
    return _backtrack(space, spectra, free, 0, assigned, set(assigned.values()))


def _backtrack(space, spectra, free, i, assigned, used) -> Iterator[Dict[str, str]]:
    if i == len(free):
        yield dict(assigned)
        return
    x = free[i]
    for y in space.points:
        if y in used or spectra[y] != spectra[x]:
            continue
        if all(space.d(y, image) == space.d(x, z) for z, image in assigned.items()):
            assigned[x] = y
            used.add(y)
            yield from _backtrack(space, spectra, free, i + 1, assigned, used)
            del assigned[x]
            used.discard(y)


def _exhaustive_extension(space: Space, seed: Mapping[str, str]) -> Optional[Dict[str, str]]:
    return next(enumerate_automorphisms(space, seed=seed), None)


def enumerate_partial_isometries(
    space: Space, spectral: bool = False, max_points: Optional[int] = None
) -> Iterator[Dict[str, str]]:
    """Every local isometry (or local spec-isometry) of the space, the empty one included."""
    bound = _bound(max_points, settings.BRUTE_FORCE_PARTIAL_MAX_POINTS)
    if len(space) > bound:
        raise TooLargeError(len(space), bound, what="space")
    spectra = {p: spectrum_at(space, p) for p in space.points}
    return _partial(space, spectra, spectral, 0, {}, set())


def _partial(space, spectra, spectral, i, assigned, used) -> Iterator[Dict[str, str]]:
    if i == len(space.points):
        yield dict(assigned)
        return
    x = space.points[i]
    yield from _partial(space, spectra, spectral, i + 1, assigned, used)
    for y in space.points:
        if y in used or (spectral and spectra[y] != spectra[x]):
            continue
        if all(space.d(y, image) == space.d(x, z) for z, image in assigned.items()):
            assigned[x] = y
            used.add(y)
            yield from _partial(space, spectra, spectral, i + 1, assigned, used)
            del assigned[x]
            used.discard(y)


def can_move(space: Space, x: str, y: str) -> bool:
    """Whether some automorphism sends x to y, decided level by level on sons.

    At every r in the common spectrum, the sons of B̂(x, r) other than
    B(x, r) must match those of B̂(y, r) other than B(y, r) up to isometry.
    """
    if spectrum_at(space, x) != spectrum_at(space, y):
        return False
    for r in sorted(spectrum_at(space, x) - {ZERO}):
        left = _sibling_codes(space, x, r)
        right = _sibling_codes(space, y, r)
        if left != right:
            return False
    return True


def _sibling_codes(space: Space, point: str, r) -> List[CanonicalCode]:
    own = ball(space, point, r, Openness.OPEN)
    parent = ball(space, point, r, Openness.CLOSED)
    return sorted(canonical_code(restrict(space, son.members)) for son in sons(space, parent) if son != own)


def is_transitive(space: Space, brute_force: bool = False) -> bool:
    """Whether the automorphism group acts transitively on the points."""
    verdict = len(orbits(space)) == 1
    if brute_force:
        first = space.points[0]
        brute = all(_exhaustive_extension(space, {first: p}) is not None for p in space.points)
        _agree("transitive", verdict, brute)
    logger.debug("Transitivity decided", points=len(space), transitive=verdict)
    return verdict


def _agree(name: str, verdict: bool, oracle: bool) -> None:
    if verdict != oracle:
        logger.error("Decider disagrees with brute force", decider=name, verdict=verdict, oracle=oracle)
        raise CrossCheckError(f"{name}: decider says {verdict}, brute force says {oracle}")


# ---------------------------------------------------------------------------
# Extension of partial isometries
# ---------------------------------------------------------------------------


def extend_isometry(space: Space, phi: MapLike) -> Optional[PartialIsometry]:
    """Extend φ to a surjective isometry of the space, or return ``None``.

    Raises :class:`NotAnIsometryError` when φ does not preserve distances.
    The returned map is checked to be a bijective isometry extending φ.
    """
    mapping = _as_dict(phi)
    _require_isometry(space, mapping)
    result = _extend(space, mapping)
    if result is None:
        logger.debug("Isometry does not extend", domain=space.in_order(mapping))
        return None
    if not _is_full_automorphism(space, result) or any(result[k] != v for k, v in mapping.items()):
        raise CrossCheckError("extension is not a surjective isometry extending the map")
    return PartialIsometry.within(space, result)


def _extend(space: Space, mapping: Dict[str, str]) -> Optional[Dict[str, str]]:
    if not mapping:
        return {p: p for p in space.points}
    if len(mapping) == 1:
        (x, y), = mapping.items()
        return _automorphism_mapping(space, x, y)

    domain = space.in_order(mapping)

    def isolation(p: str):
        return min(space.d(p, q) for q in domain if q != p)

    a = min(domain, key=lambda p: (isolation(p), space.index(p)))
    r = isolation(a)

    phi_a = _extend(space, {a: mapping[a]})
    if phi_a is None:
        return None
    phi_rest = _extend(space, {k: v for k, v in mapping.items() if k != a})
    if phi_rest is None:
        return None

    inverse_a = {v: k for k, v in phi_a.items()}
    inverse_rest = {v: k for k, v in phi_rest.items()}
    b0 = ball(space, a, r, Openness.OPEN).members
    b0_image = {phi_a[x] for x in b0}
    b0_back = frozenset(inverse_rest[y] for y in b0_image)

    result: Dict[str, str] = {}
    for x in space.points:
        if x in b0:
            result[x] = phi_a[x]
        elif x in b0_back:
            # swap the son B0'' onto φ_rest[B0]
            result[x] = phi_rest[inverse_a[phi_rest[x]]]
        else:
            result[x] = phi_rest[x]
    return result


# ---------------------------------------------------------------------------
# Homogeneity
# ---------------------------------------------------------------------------


def is_homogeneous(space: Space, brute_force: bool = False, max_points: Optional[int] = None) -> bool:
    """Homogeneity, decided as transitivity of the automorphism group.

    In brute-force mode every partial isometry is extended with
    :func:`extend_isometry` and against the exhaustive search; all three
    answers must agree.
    """
    verdict = is_transitive(space)
    if brute_force:
        brute = True
        for phi in enumerate_partial_isometries(space, max_points=max_points):
            witness = extend_isometry(space, phi)
            exhaustive = _exhaustive_extension(space, phi)
            if (witness is None) != (exhaustive is None):
                logger.error("Extension disagrees with exhaustive search", domain=sorted(phi))
                raise CrossCheckError("extend_isometry disagrees with exhaustive search")
            if witness is None:
                brute = False
                break
        _agree("homogeneous", verdict, brute)
    logger.info("Homogeneity decided", points=len(space), homogeneous=verdict)
    return verdict


def check_property_h(space: Space, nerve: Optional[NerveTree] = None) -> PropertyH:
    """h₁: all points share one spectrum. h₂: equal-diameter nerve nodes have equally many sons."""
    if nerve is None:
        nerve = build_nerve(space)
    h1 = len(multispectrum(space)) == 1
    counts: Dict[Any, set] = {}
    for node in nerve.internal_nodes:
        counts.setdefault(node.diameter, set()).add(len(sons(space, node)))
    h2 = all(len(values) == 1 for values in counts.values())
    return PropertyH(h1, h2)


def _restrictions_isometric(space: Space, first: Ball, second: Ball) -> bool:
    if first.members == second.members:
        return True
    return isometric(restrict(space, first.members), restrict(space, second.members)) is not None


def check_condition_A(space: Space) -> bool:
    """Similar nerve nodes have isometric restrictions."""
    nerve = build_nerve(space)
    for first, second in combinations(nerve.nodes, 2):
        if first.diameter != second.diameter:
            continue
        if similar(space, first, second, nerve) and not _restrictions_isometric(space, first, second):
            logger.debug("Condition A fails", first=sorted(first.members), second=sorted(second.members))
            return False
    return True


def check_condition_B(space: Space) -> bool:
    """Similar open balls of equal radius have restrictions with equal multispectra."""
    nerve = build_nerve(space)
    for r in open_radii(space):
        found: Dict[Members, Ball] = {}
        for x in space.points:
            b = ball(space, x, r, Openness.OPEN)
            found.setdefault(b.members, b)
        for first, second in combinations(found.values(), 2):
            if not similar(space, first, second, nerve):
                continue
            if multispectrum_of(space, first.members) != multispectrum_of(space, second.members):
                logger.debug("Condition B fails", radius=str(r), first=sorted(first.members))
                return False
    return True


def check_ball_characterization(space: Space) -> bool:
    """Every pair of similar balls, open or closed, has isometric restrictions."""
    nerve = build_nerve(space)
    for first, second in combinations(all_balls(space), 2):
        if similar(space, first, second, nerve) and not _restrictions_isometric(space, first, second):
            return False
    return True


def check_homogeneity_characterization(space: Space) -> bool:
    """h₁ holds and every pair of same-kind balls has isometric restrictions."""
    if len(multispectrum(space)) != 1:
        return False
    for first, second in combinations(all_balls(space), 2):
        if first.kind == second.kind and not _restrictions_isometric(space, first, second):
            return False
    return True


def check_nerve_isometric_levels(space: Space) -> bool:
    """Nerve nodes of equal diameter have pairwise isometric restrictions.

    This asks more than condition (A), which only compares similar nodes,
    so it is a sufficient test for spec-homogeneity.
    """
    nerve = build_nerve(space)
    levels: Dict[Any, List[Ball]] = {}
    for node in nerve.nodes:
        levels.setdefault(node.diameter, []).append(node)
    for diameter_value, nodes in levels.items():
        for first, second in combinations(nodes, 2):
            if not _restrictions_isometric(space, first, second):
                logger.debug(
                    "Nerve level not isometric",
                    diameter=str(diameter_value),
                    first=sorted(first.members),
                    second=sorted(second.members),
                )
                return False
    return True


# ---------------------------------------------------------------------------
# Spec-homogeneity
# ---------------------------------------------------------------------------


def spec_extension_step(space: Space, phi: MapLike, a: str) -> Optional[SpecIsometry]:
    """Extend a local spec-isometry to one more point.

    Raises :class:`ConditionAViolatedError` when the nerve ball around the
    new point is not isometric to its counterpart.
    """
    mapping = _as_dict(phi)
    space.index(a)
    _require_spec_isometry(space, mapping)
    if a in mapping:
        return SpecIsometry.within(space, mapping)
    if not mapping:
        return SpecIsometry.within(space, {a: a})

    spec_a = spectrum_at(space, a)
    r = min(space.d(a, f) for f in mapping)
    around = ball(space, a, r, Openness.CLOSED)
    anchored = [f for f in space.in_order(mapping) if f in around.members]
    counterpart = ball(space, mapping[anchored[0]], r, Openness.CLOSED)

    psi = isometric(restrict(space, around.members), restrict(space, counterpart.members))
    if psi is None:
        raise ConditionAViolatedError(
            f"balls {{{','.join(sorted(around.members))}}} and "
            f"{{{','.join(sorted(counterpart.members))}}} are similar but not isometric"
        )

    son_of = {x: son for son in sons(space, around) for x in son.members}
    image_son_of = {x: son for son in sons(space, counterpart) for x in son.members}
    own = son_of[a]
    met = list(dict.fromkeys(son_of[f] for f in anchored))
    wanted = restricted_spectrum(space, own, a)
    met_plus = [son for son in met if wanted in multispectrum_of(space, son.members)]

    taken = {image_son_of[mapping[f]] for f in anchored}
    candidates = {image_son_of[psi[son.least_member]] for son in met_plus + [own]} - taken
    if not candidates:
        logger.warning("No free son for extension", point=a)
        return None
    chosen = min(candidates, key=lambda son: son.least_member)
    target = next((y for y in space.in_order(chosen.members) if spectrum_at(space, y) == spec_a), None)
    if target is None:
        return None

    extended = {**mapping, a: target}
    if _first_violation(space, space, extended) is not None:
        raise CrossCheckError(f"extension step for {a} broke distances")
    return SpecIsometry.within(space, extended)


def spec_back_and_forth(space: Space, phi: MapLike) -> Optional[PartialIsometry]:
    """Extend a local spec-isometry to a surjective isometry, one point at a time."""
    mapping = _as_dict(phi)
    _require_spec_isometry(space, mapping)
    original = dict(mapping)
    for a in space.points:
        if a in mapping:
            continue
        step = spec_extension_step(space, mapping, a)
        if step is None:
            return None
        mapping = dict(step.mapping)
    if not _is_full_automorphism(space, mapping) or any(mapping[k] != v for k, v in original.items()):
        raise CrossCheckError("back-and-forth result is not a surjective isometry")
    return PartialIsometry.within(space, mapping)


def is_spec_homogeneous(space: Space, brute_force: bool = False, max_points: Optional[int] = None) -> bool:
    """Spec-homogeneity, decided as condition (A).

    In brute-force mode every local spec-isometry is tested against the
    exhaustive search, and, when condition (A) holds, extended by
    back-and-forth as well.
    """
    verdict = check_condition_A(space)
    if brute_force:
        brute = True
        for phi in enumerate_partial_isometries(space, spectral=True, max_points=max_points):
            if _exhaustive_extension(space, phi) is None:
                brute = False
                break
            if verdict and spec_back_and_forth(space, phi) is None:
                raise CrossCheckError("back-and-forth failed under condition (A)")
        _agree("spec-homogeneous", verdict, brute)
    logger.info("Spec-homogeneity decided", points=len(space), spec_homogeneous=verdict)
    return verdict
