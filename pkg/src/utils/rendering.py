"""Plain-text renderings used by the command line."""

from typing import Callable, FrozenSet, Iterable, List, Mapping

from src.ultrametric.core import Space
from src.utils.rational import format_rational

INDENT = "  "


def format_members(space: Space, members: Iterable[str]) -> str:
    return "{" + ", ".join(space.in_order(members)) + "}"


def render_tree(
    space: Space,
    root: FrozenSet[str],
    children: Callable[[FrozenSet[str]], List[FrozenSet[str]]],
    label: Callable[[FrozenSet[str]], object],
) -> str:
    """One ``<diameter> {members}`` line per node, children indented below their parent."""
    lines = []
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        lines.append(f"{INDENT * depth}{format_rational(label(node))} {format_members(space, node)}")
        stack.extend((child, depth + 1) for child in reversed(children(node)))
    return "\n".join(lines) + "\n"


def render_verdicts(verdicts: Mapping[str, bool]) -> str:
    return "".join(f"{name}: {'true' if value else 'false'}\n" for name, value in verdicts.items())
