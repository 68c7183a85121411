"""Symmetric labelled 2-structures and their modular decomposition.

A finite ultrametric space is a symmetric 2-structure labelled by its
distance. For such structures the strong modules are the balls and the
robust modules are the closed balls attaining their diameter, so the
decomposition tree coincides with the nerve.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import networkx as nx
import structlog
from networkx.algorithms.isomorphism import categorical_node_match

from src.config import settings
from src.exceptions import (
    CrossCheckError,
    EmptySubsetError,
    NotDecomposableError,
    SpaceFormatError,
    TooLargeError,
    UnknownElementError,
)
from src.ultrametric.core import ZERO, Openness, Space, all_balls, ball, diameter
from src.ultrametric.nerve import build_nerve, tree_digraph

logger = structlog.get_logger(__name__)

Module = FrozenSet[str]
Family = Set[Module]


@dataclass(frozen=True)
class TwoStructure:
    """Elements with a symmetric label on every pair of distinct elements."""

    elements: Tuple[str, ...]
    labels: Mapping[FrozenSet[str], Fraction] = field(hash=False, repr=False)
    source: Optional[Space] = field(default=None, compare=False, hash=False, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def label(self, x: str, y: str) -> Fraction:
        return self.labels[frozenset((x, y))]

    def check_elements(self, subset: Iterable[str]) -> Module:
        members = frozenset(subset)
        unknown = members - set(self.elements)
        if unknown:
            raise UnknownElementError(unknown)
        return members

    def induced(self, subset: Iterable[str]) -> "TwoStructure":
        members = self.check_elements(subset)
        elements = tuple(e for e in self.elements if e in members)
        labels = {pair: value for pair, value in self.labels.items() if pair <= members}
        return TwoStructure(elements, labels)

    @classmethod
    def from_pairs(cls, elements: Iterable[str], pairs: Mapping[Tuple[str, str], Fraction]) -> "TwoStructure":
        """Build from ordered pairs; both orders may be given but must agree."""
        elements = tuple(elements)
        labels: Dict[FrozenSet[str], Fraction] = {}
        for (x, y), value in pairs.items():
            if x == y:
                raise SpaceFormatError(f"label for an element with itself: {x}")
            key = frozenset((x, y))
            if key in labels and labels[key] != Fraction(value):
                raise SpaceFormatError(f"labels of ({x}, {y}) and ({y}, {x}) differ")
            labels[key] = Fraction(value)
        structure = cls(elements, labels)
        structure.check_elements(e for pair in labels for e in pair)
        for x, y in combinations(elements, 2):
            if frozenset((x, y)) not in labels:
                raise SpaceFormatError(f"missing label for pair ({x}, {y})")
        return structure


@dataclass(frozen=True)
class DecompositionTree:
    """Robust modules plus singleton leaves, ordered like the nerve."""

    nodes: Tuple[Module, ...]
    parent: Dict[Module, Optional[Module]] = field(repr=False)
    node_label: Dict[Module, Fraction] = field(repr=False)

    @property
    def root(self) -> Module:
        return self.nodes[0]

    def children(self, node: Module) -> List[Module]:
        return sorted((n for n, up in self.parent.items() if up == node), key=min)

    def to_digraph(self) -> nx.DiGraph:
        return tree_digraph(self.node_label, self.parent)


def family_key(module: Module) -> Tuple[int, List[str]]:
    return (len(module), sorted(module))


def from_space(space: Space) -> TwoStructure:
    labels = {
        frozenset((x, y)): space.d(x, y)
        for i, x in enumerate(space.points)
        for y in space.points[i + 1:]
    }
    return TwoStructure(space.points, labels, source=space)


def is_module(ts: TwoStructure, subset: Iterable[str]) -> bool:
    """Every outside element sees all members of the set with one label."""
    members = ts.check_elements(subset)
    if len(members) <= 1 or len(members) == len(ts):
        return True
    for x in ts.elements:
        if x in members:
            continue
        if len({ts.label(x, y) for y in members}) > 1:
            return False
    return True


def enumerate_modules(ts: TwoStructure, max_elements: Optional[int] = None) -> List[Module]:
    """All modules, ∅ included, by checking every subset."""
    bound = settings.MODULE_ENUMERATION_MAX_ELEMENTS if max_elements is None else max_elements
    if len(ts) > bound:
        raise TooLargeError(len(ts), bound, what="2-structure")
    elements = ts.elements
    found = []
    for mask in range(1 << len(elements)):
        subset = frozenset(e for i, e in enumerate(elements) if mask >> i & 1)
        if is_module(ts, subset):
            found.append(subset)
    return sorted(found, key=family_key)


def brute_least_module(ts: TwoStructure, subset: Iterable[str], max_elements: Optional[int] = None) -> Module:
    """Intersection of all modules containing the set (∩∅ = E)."""
    members = ts.check_elements(subset)
    result = frozenset(ts.elements)
    for module in enumerate_modules(ts, max_elements):
        if members <= module:
            result &= module
    return result


def least_module(ts: TwoStructure, subset: Iterable[str], cross_check: bool = False) -> Module:
    """The least module containing a nonempty set.

    For a structure read off a space this is the union of the open balls
    of radius δ(A) centred in A.
    """
    members = ts.check_elements(subset)
    if not members:
        raise EmptySubsetError()
    if ts.source is None:
        return brute_least_module(ts, members)
    if len(members) == 1:
        result = members
    else:
        r = diameter(ts.source, members)
        result = frozenset().union(*(ball(ts.source, a, r, Openness.OPEN).members for a in members))
    if cross_check:
        brute = brute_least_module(ts, members)
        if brute != result:
            raise CrossCheckError(f"least module of {sorted(members)} disagrees with brute force")
    return result


def brute_strong_modules(ts: TwoStructure, max_elements: Optional[int] = None) -> Family:
    """Nonempty modules comparable to every module they meet."""
    modules = [m for m in enumerate_modules(ts, max_elements) if m]
    return {
        m for m in modules
        if all(m <= other or other <= m for other in modules if m & other)
    }


def strong_modules(ts: TwoStructure, cross_check: bool = False) -> Family:
    """Strong modules; the balls plus E when the structure comes from a space."""
    if ts.source is None:
        return brute_strong_modules(ts)
    result = {b.members for b in all_balls(ts.source)} | {frozenset(ts.elements)}
    if cross_check:
        _compare("strong modules", result, brute_strong_modules(ts))
    return result


def _least_strong(strong: Iterable[Module], pair: Module) -> Module:
    # strong modules containing a set form a chain
    return min((m for m in strong if pair <= m), key=len)


def brute_robust_modules(ts: TwoStructure, max_elements: Optional[int] = None) -> Family:
    strong = brute_strong_modules(ts, max_elements)
    return {_least_strong(strong, frozenset(pair)) for pair in combinations(ts.elements, 2)}


def robust_modules(ts: TwoStructure, cross_check: bool = False) -> Family:
    """Least strong modules of pairs; closed balls B̂(a, d(a, b)) for a space."""
    if ts.source is None:
        return brute_robust_modules(ts)
    space = ts.source
    result = {
        ball(space, a, space.d(a, b), Openness.CLOSED).members
        for a, b in combinations(space.points, 2)
    }
    if cross_check:
        _compare("robust modules", result, brute_robust_modules(ts))
    return result


def _compare(name: str, formula: Family, brute: Family) -> None:
    if formula != brute:
        logger.error(
            "Module family disagrees with brute force",
            family=name,
            formula_only=[sorted(m) for m in formula - brute],
            brute_only=[sorted(m) for m in brute - formula],
        )
        raise CrossCheckError(f"{name} disagree with brute force")


def is_hereditary_decomposable(ts: TwoStructure, max_elements: Optional[int] = None) -> bool:
    """Every induced substructure on at least three elements has a nontrivial module."""
    bound = settings.HEREDITARY_MAX_ELEMENTS if max_elements is None else max_elements
    if len(ts) > bound:
        raise TooLargeError(len(ts), bound, what="2-structure")
    for size in range(3, len(ts) + 1):
        for chosen in combinations(ts.elements, size):
            sub = ts.induced(chosen)
            nontrivial = any(
                is_module(sub, candidate)
                for k in range(2, size)
                for candidate in combinations(chosen, k)
            )
            if not nontrivial:
                logger.debug("Prime substructure found", elements=list(chosen))
                return False
    return True


def decomposition_tree(ts: TwoStructure) -> DecompositionTree:
    """The tree of robust modules, with singleton leaves, labelled by v(R)."""
    if ts.source is None and not is_hereditary_decomposable(ts):
        raise NotDecomposableError()

    strong = strong_modules(ts)
    labels: Dict[Module, Fraction] = {frozenset((e,)): ZERO for e in ts.elements}
    for x, y in combinations(ts.elements, 2):
        node = _least_strong(strong, frozenset((x, y)))
        value = ts.label(x, y)
        if labels.setdefault(node, value) != value:
            raise NotDecomposableError(
                f"pairs with least strong module {{{','.join(sorted(node))}}} carry different labels"
            )

    nodes = tuple(sorted(labels, key=lambda m: (-labels[m], min(m))))
    parent: Dict[Module, Optional[Module]] = {}
    for node in nodes:
        above = [other for other in nodes if node < other]
        parent[node] = min(above, key=len) if above else None
    return DecompositionTree(nodes=nodes, parent=parent, node_label=labels)


def nerve_matches_decomposition(space: Space) -> bool:
    """Whether the decomposition tree equals the nerve as a labelled tree."""
    tree = decomposition_tree(from_space(space))
    nerve = build_nerve(space)
    ours, theirs = tree.to_digraph(), nerve.to_digraph()
    same_nodes = set(ours.nodes) == set(theirs.nodes)
    same_edges = set(ours.edges) == set(theirs.edges)
    same_labels = same_nodes and all(ours.nodes[n]["label"] == theirs.nodes[n]["label"] for n in ours.nodes)
    shape = nx.is_isomorphic(ours, theirs, node_match=categorical_node_match("label", None))
    logger.debug(
        "Decomposition compared with nerve",
        nodes=same_nodes,
        edges=same_edges,
        labels=same_labels,
        isomorphic=shape,
    )
    return same_nodes and same_edges and same_labels and shape
