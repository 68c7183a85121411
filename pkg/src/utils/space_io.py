"""Reading and writing the JSON space file and the nerve machine format."""

from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, Optional, Union

import structlog
from pydantic import ValidationError

from src.exceptions import SpaceFormatError
from src.models import NerveFile, NerveNode, SpaceFile
from src.ultrametric.core import Space, validate_ultrametric
from src.utils.rational import format_rational, parse_rational

logger = structlog.get_logger(__name__)


def space_from_model(model: SpaceFile) -> Space:
    entries = []
    for x, y, value in model.distances:
        if not isinstance(x, str) or not isinstance(y, str):
            raise SpaceFormatError(f"point references must be strings, got {x!r} and {y!r}")
        entries.append((x, y, parse_rational(value)))
    return validate_ultrametric(model.points, entries)


def parse_space(text: Union[str, bytes]) -> Space:
    try:
        model = SpaceFile.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        raise SpaceFormatError(f"malformed space file at {location or 'top level'}: {first['msg']}") from None
    return space_from_model(model)


def load_space(path: Union[str, Path]) -> Space:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpaceFormatError(f"cannot read {path}: {e.strerror}") from None
    space = parse_space(text)
    logger.debug("Space loaded", path=str(path), points=len(space))
    return space


def space_to_model(space: Space) -> SpaceFile:
    distances = [
        [x, y, format_rational(space.d(x, y))]
        for i, x in enumerate(space.points)
        for y in space.points[i + 1:]
    ]
    return SpaceFile(points=list(space.points), distances=distances)


def dump_space(space: Space) -> str:
    return space_to_model(space).model_dump_json(indent=2) + "\n"


def write_space(space: Space, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_space(space), encoding="utf-8")


def tree_to_model(
    space: Space,
    nodes: Iterable[FrozenSet[str]],
    label: Callable[[FrozenSet[str]], object],
    parent: Dict[FrozenSet[str], Optional[FrozenSet[str]]],
) -> NerveFile:
    """Space file plus a ``nodes`` array; parents are referenced by index."""
    nodes = list(nodes)
    position = {node: i for i, node in enumerate(nodes)}
    base = space_to_model(space)
    return NerveFile(
        points=base.points,
        distances=base.distances,
        nodes=[
            NerveNode(
                members=space.in_order(node),
                diameter=format_rational(label(node)),
                parent=None if parent[node] is None else position[parent[node]],
            )
            for node in nodes
        ],
    )


def dump_tree(model: NerveFile) -> str:
    return model.model_dump_json(indent=2) + "\n"
