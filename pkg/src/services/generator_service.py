import random
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import structlog

from src.config import settings
from src.exceptions import DepthOutOfRangeError, PoolTooShallowError, SpaceFormatError
from src.models import GeneratorKind, GeneratorSpec
from src.ultrametric.core import Space, validate_ultrametric
from src.ultrametric.funcspace import DegreeFunction, materialize_product, parse_degree_spec
from src.utils.rational import parse_rational_list

logger = structlog.get_logger(__name__)

# A dendrogram is a point name or a list of at least two dendrograms.
Dendrogram = Union[str, list]


class GeneratorService:
    """Builds cantor, product and random spaces."""

    def gen_cantor(self, depth: int, max_depth: Optional[int] = None) -> Space:
        """All ``depth``-bit strings with d(x, y) = 1/(μ(x, y) + 1), μ the first differing index."""
        bound = settings.CANTOR_MAX_DEPTH if max_depth is None else max_depth
        if not 1 <= depth <= bound:
            raise DepthOutOfRangeError(depth, bound)

        points = [format(i, f"0{depth}b") for i in range(2 ** depth)]

        def distance(x: str, y: str) -> Fraction:
            mu = next(i for i, (p, q) in enumerate(zip(x, y)) if p != q)
            return Fraction(1, mu + 1)

        space = Space.trusted(points, distance)
        logger.info("Cantor space generated", depth=depth, points=len(space))
        return space

    def gen_product(self, df: Union[DegreeFunction, str], max_size: Optional[int] = None) -> Space:
        if isinstance(df, str):
            df = parse_degree_spec(df)
        space = materialize_product(df, max_size)
        logger.info("Product space generated", degrees=df.describe(), points=len(space))
        return space

    def gen_random(self, points: int, seed: int, pool: Sequence[Fraction]) -> Space:
        """A random dendrogram over ``points`` leaves, read as an ultrametric.

        Tree levels draw strictly decreasing values from ``pool`` top-down;
        the same seed always gives the same space.
        """
        if points < 1:
            raise SpaceFormatError(f"point count must be at least 1, got {points}")
        values = sorted(set(Fraction(v) for v in pool))
        if not values:
            raise SpaceFormatError("distance pool must be nonempty")
        if values[0] <= 0:
            raise SpaceFormatError("distance pool values must be positive")

        rng = random.Random(seed)
        names = [f"p{i}" for i in range(1, points + 1)]
        tree = self._split(names, rng)
        height = self._height(tree)
        if height > len(values):
            raise PoolTooShallowError(height, len(values))

        entries: List[tuple] = []
        if height:
            top = rng.randint(height - 1, len(values) - 1)
            self._read_distances(tree, top, values, rng, entries)
        space = validate_ultrametric(names, entries)
        logger.info("Random space generated", points=points, seed=seed, height=height)
        return space

    def generate(self, spec: GeneratorSpec) -> Space:
        if spec.kind is GeneratorKind.CANTOR:
            if spec.depth is None:
                raise SpaceFormatError("cantor generator needs a depth")
            return self.gen_cantor(spec.depth)
        if spec.kind is GeneratorKind.PRODUCT:
            if not spec.spectrum:
                raise SpaceFormatError("product generator needs a spectrum")
            return self.gen_product(spec.spectrum)
        if spec.points is None or not spec.pool:
            raise SpaceFormatError("random generator needs a point count and a pool")
        return self.gen_random(spec.points, spec.seed, parse_rational_list(spec.pool))

    def _split(self, group: List[str], rng: random.Random) -> Dendrogram:
        if len(group) == 1:
            return group[0]
        parts_count = rng.randint(2, len(group))
        shuffled = list(group)
        rng.shuffle(shuffled)
        parts = [[name] for name in shuffled[:parts_count]]
        for name in shuffled[parts_count:]:
            parts[rng.randrange(parts_count)].append(name)
        order = {name: i for i, name in enumerate(group)}
        return [self._split(sorted(part, key=order.get), rng) for part in parts]

    def _height(self, tree: Dendrogram) -> int:
        if isinstance(tree, str):
            return 0
        return 1 + max(self._height(child) for child in tree)

    def _leaves(self, tree: Dendrogram) -> List[str]:
        if isinstance(tree, str):
            return [tree]
        return [leaf for child in tree for leaf in self._leaves(child)]

    def _read_distances(self, tree, index: int, values, rng, entries) -> None:
        """Pairs split at this node get ``values[index]``; children draw lower indices."""
        groups = [self._leaves(child) for child in tree]
        for i, left in enumerate(groups):
            for right in groups[i + 1:]:
                entries.extend((x, y, values[index]) for x in left for y in right)
        for child in tree:
            child_height = self._height(child)
            if child_height:
                below = rng.randint(child_height - 1, index - 1)
                self._read_distances(child, below, values, rng, entries)


# Global generator service instance
generator_service = GeneratorService()
