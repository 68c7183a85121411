"""The nerve of a finite ultrametric space: its tree of closed balls.

Nodes are the balls B̂(a, r) with r ∈ Spec(M, a), ordered by reverse
inclusion and labelled with their diameters. Singletons B̂(a, 0) are the
leaves; the whole space is the root.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx
import structlog

from src.exceptions import CrossCheckError, EmptySubsetError, TrivialBallError
from src.ultrametric.core import (
    Ball,
    Openness,
    Space,
    Spectrum,
    ball,
    multispectrum_of,
    spectrum_at,
)

logger = structlog.get_logger(__name__)

Members = FrozenSet[str]


@dataclass(frozen=True)
class NerveTree:
    """Nodes sorted by (diameter desc, least member); parent links by inclusion."""

    nodes: Tuple[Ball, ...]
    parent: Dict[Members, Optional[Members]] = field(compare=False, repr=False)
    root: Ball
    _by_members: Dict[Members, Ball] = field(init=False, compare=False, repr=False)
    _children: Dict[Members, Tuple[Ball, ...]] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        by_members = {node.members: node for node in self.nodes}
        children: Dict[Members, List[Ball]] = {node.members: [] for node in self.nodes}
        for node in self.nodes:
            up = self.parent[node.members]
            if up is not None:
                children[up].append(node)
        object.__setattr__(self, "_by_members", by_members)
        object.__setattr__(
            self,
            "_children",
            {key: tuple(sorted(value, key=Ball.least_member.fget)) for key, value in children.items()},
        )

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, item) -> bool:
        members = item.members if isinstance(item, Ball) else frozenset(item)
        return members in self._by_members

    def node(self, members: Iterable[str]) -> Ball:
        return self._by_members[frozenset(members)]

    def label(self, node: Ball) -> Fraction:
        return self._by_members[node.members].diameter

    def parent_of(self, node: Ball) -> Optional[Ball]:
        up = self.parent[node.members]
        return None if up is None else self._by_members[up]

    def children(self, node: Ball) -> Tuple[Ball, ...]:
        """Immediate subnodes, sorted by least member."""
        return self._children[node.members]

    @property
    def leaves(self) -> List[Ball]:
        return [node for node in self.nodes if len(node) == 1]

    @property
    def internal_nodes(self) -> List[Ball]:
        return [node for node in self.nodes if not node.is_trivial]

    def chain(self, point: str) -> List[Ball]:
        """Nodes containing ``point``, from its leaf up to the root."""
        return sorted(
            (node for node in self.nodes if point in node.members),
            key=lambda node: node.diameter,
        )

    def to_digraph(self) -> nx.DiGraph:
        """Parent → child digraph over member sets, labelled with diameters."""
        return tree_digraph({node.members: node.diameter for node in self.nodes}, self.parent)


@dataclass(frozen=True)
class DegreeSequence:
    """s_M(B) per nontrivial nerve node and s_M(r) = max over nodes of diameter r."""

    per_ball: Dict[Ball, int]
    per_radius: Dict[Fraction, int]


def tree_digraph(
    labels: Dict[Members, Fraction], parent: Dict[Members, Optional[Members]]
) -> nx.DiGraph:
    graph = nx.DiGraph()
    for members, value in labels.items():
        graph.add_node(members, label=value)
    for members, up in parent.items():
        if up is not None:
            graph.add_edge(up, members)
    return graph


def build_nerve(space: Space) -> NerveTree:
    """Collect B̂(a, r) over every a and r ∈ Spec(M, a), deduplicated by member set."""
    found: Dict[Members, Ball] = {}
    parent: Dict[Members, Optional[Members]] = {}

    for a in space.points:
        # Nodes containing a are exactly the B̂(a, r), r ∈ Spec(M, a).
        chain = [ball(space, a, r, Openness.CLOSED) for r in sorted(spectrum_at(space, a))]
        for lower, upper in zip(chain, chain[1:] + [None]):
            found.setdefault(lower.members, lower)
            parent.setdefault(lower.members, None if upper is None else upper.members)

    nodes = tuple(sorted(found.values(), key=Ball.sort_key))
    root = nodes[0]
    logger.debug("Nerve built", nodes=len(nodes), root_diameter=str(root.diameter))
    return NerveTree(nodes=nodes, parent=parent, root=root)


def sons(space: Space, node: Ball) -> List[Ball]:
    """The open balls of radius δ(B) inside B, sorted by least member."""
    r = node.diameter
    if r == 0:
        raise TrivialBallError()
    found: Dict[Members, Ball] = {}
    for a in space.in_order(node.members):
        if any(a in son.members for son in found.values()):
            continue
        son = ball(space, a, r, Openness.OPEN)
        found[son.members] = son
    return sorted(found.values(), key=Ball.least_member.fget)


def degree_sequence(space: Space, nerve: Optional[NerveTree] = None) -> DegreeSequence:
    if nerve is None:
        nerve = build_nerve(space)
    per_ball: Dict[Ball, int] = {}
    per_radius: Dict[Fraction, int] = {}
    for node in nerve.internal_nodes:
        count = len(sons(space, node))
        per_ball[node] = count
        per_radius[node.diameter] = max(per_radius.get(node.diameter, 0), count)
    return DegreeSequence(per_ball=per_ball, per_radius=dict(sorted(per_radius.items())))


def past(space: Space, subset: Iterable[str], nerve: Optional[NerveTree] = None) -> FrozenSet[Fraction]:
    """Past(M, X) = {δ(B) : X ⊆ B ∈ Nerv(M)}."""
    members = frozenset(subset)
    if not members:
        raise EmptySubsetError()
    space.check_points(members)
    if nerve is None:
        nerve = build_nerve(space)
    return frozenset(node.diameter for node in nerve.nodes if members <= node.members)


def similar_by_spectra(space: Space, first: Ball, second: Ball) -> bool:
    """Same kind, and some x ∈ B, x′ ∈ B′ with Spec(M, x) = Spec(M, x′)."""
    if first.kind != second.kind:
        return False
    spectra = {spectrum_at(space, x) for x in first.members}
    return any(spectrum_at(space, y) in spectra for y in second.members)


def similar_by_past(
    space: Space, first: Ball, second: Ball, nerve: Optional[NerveTree] = None
) -> bool:
    """Same past, and the multispectra of M↾B and M↾B′ intersect."""
    if nerve is None:
        nerve = build_nerve(space)
    if past(space, first.members, nerve) != past(space, second.members, nerve):
        return False
    return bool(multispectrum_of(space, first.members) & multispectrum_of(space, second.members))


def similar(space: Space, first: Ball, second: Ball, nerve: Optional[NerveTree] = None) -> bool:
    """Ball similarity; both characterizations are computed and must agree."""
    by_spectra = similar_by_spectra(space, first, second)
    by_past = similar_by_past(space, first, second, nerve)
    if by_spectra != by_past:
        logger.error(
            "Similarity criteria disagree",
            first=sorted(first.members),
            second=sorted(second.members),
            by_spectra=by_spectra,
            by_past=by_past,
        )
        raise CrossCheckError("similarity criteria disagree")
    return by_spectra


def restricted_spectrum(space: Space, node: Ball, y: str) -> Spectrum:
    """Spec(M↾B, y)."""
    row = space.row(y)
    return frozenset(row[space.index(x)] for x in node.members)


def node_of_diameter(nerve: NerveTree, point: str, r: Fraction) -> Optional[Ball]:
    """The nerve node containing ``point`` with diameter ``r``, if any."""
    for node in nerve.chain(point):
        if node.diameter == r:
            return node
    return None

