"""Error hierarchy shared by the library, the CLI and the HTTP layer."""

from typing import Iterable


class UltrametricError(Exception):
    """Base error; carries the exit code used by the command line driver."""

    exit_code = 2

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class SpaceFormatError(UltrametricError):
    """Malformed space file (bad JSON, floats, unknown point references)."""


class DuplicatePairError(UltrametricError):
    def __init__(self, x: str, y: str):
        super().__init__(f"duplicate distance entry for pair ({x}, {y})")
        self.pair = (x, y)


class MissingPairError(UltrametricError):
    def __init__(self, x: str, y: str):
        super().__init__(f"missing distance entry for pair ({x}, {y})")
        self.pair = (x, y)


class NonPositiveDistanceError(UltrametricError):
    def __init__(self, x: str, y: str, value):
        super().__init__(f"distance between {x} and {y} must be positive, got {value}")
        self.pair = (x, y)


class TriangleViolationError(UltrametricError):
    """d(x, z) > max(d(x, y), d(y, z)) for the named triple."""

    def __init__(self, x: str, y: str, z: str):
        super().__init__(f"strong triangle inequality violated by triple ({x}, {y}, {z})")
        self.triple = (x, y, z)


class UnknownPointError(UltrametricError):
    def __init__(self, point: str):
        super().__init__(f"unknown point: {point}")
        self.point = point


class UnknownElementError(UltrametricError):
    def __init__(self, elements: Iterable[str]):
        names = ", ".join(sorted(elements))
        super().__init__(f"unknown elements: {names}")


class EmptyBallError(UltrametricError):
    def __init__(self, center: str, radius=0):
        super().__init__(f"ball of radius {radius} around {center} is empty")


class EmptySubsetError(UltrametricError):
    def __init__(self, what: str = "subset"):
        super().__init__(f"{what} must be nonempty")


class TrivialBallError(UltrametricError):
    def __init__(self):
        super().__init__("ball has diameter 0 and no sons")


class NotAnIsometryError(UltrametricError):
    def __init__(self, x: str, y: str, detail: str | None = None):
        super().__init__(detail or f"map does not preserve the distance between {x} and {y}")
        self.pair = (x, y)


class ConditionAViolatedError(UltrametricError):
    """Raised when similar nerve balls needed by an extension step are not isometric."""


class MismatchedDegreeFunctionError(UltrametricError):
    def __init__(self):
        super().__init__("points belong to different degree functions")


class PermutationOutOfRangeError(UltrametricError):
    def __init__(self, radius, size: int):
        super().__init__(f"permutation at radius {radius} is not a bijection of 0..{size - 1}")


class ProductTooLargeError(UltrametricError):
    def __init__(self, size: int, bound: int):
        super().__init__(f"product has {size} points, bound is {bound}")
        self.size = size
        self.bound = bound


class TooLargeError(UltrametricError):
    def __init__(self, size: int, bound: int, what: str = "structure"):
        super().__init__(f"{what} has {size} elements, brute-force bound is {bound}")
        self.size = size
        self.bound = bound


class NotDecomposableError(UltrametricError):
    def __init__(self, detail: str = "2-structure is not hereditary decomposable"):
        super().__init__(detail)


class DepthOutOfRangeError(UltrametricError):
    def __init__(self, depth: int, bound: int):
        super().__init__(f"cantor depth must lie in 1..{bound}, got {depth}")


class PoolTooShallowError(UltrametricError):
    def __init__(self, height: int, pool_size: int):
        super().__init__(f"dendrogram needs {height} distance values, pool has {pool_size}")
        self.height = height
        self.pool_size = pool_size


class CrossCheckError(UltrametricError):
    """Two independent deciders disagreed."""
