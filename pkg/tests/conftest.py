from fractions import Fraction as F

import pytest

from src.config import settings
from src.services.generator_service import generator_service
from src.ultrametric.core import validate_ultrametric
from src.ultrametric.funcspace import DegreeFunction, materialize_product
from src.ultrametric.twostruct import TwoStructure
from src.utils.space_io import write_space


@pytest.fixture
def test_settings():
    """Settings instance used by the code under test."""
    return settings


@pytest.fixture
def t3():
    """Isosceles triangle: d(a,b)=1/2, the other two sides 1."""
    return validate_ultrametric(
        ["a", "b", "c"],
        [("a", "b", F(1, 2)), ("a", "c", F(1)), ("b", "c", F(1))],
    )


@pytest.fixture
def t3_relabelled():
    """T3 with points renamed x, y, z."""
    return validate_ultrametric(
        ["x", "y", "z"],
        [("x", "y", F(1, 2)), ("x", "z", F(1)), ("y", "z", F(1))],
    )


@pytest.fixture
def t3_prime():
    """Two pairs at different small distances, every cross distance 1."""
    return validate_ultrametric(
        ["a", "b", "c", "e"],
        [
            ("a", "b", F(1, 2)),
            ("c", "e", F(1, 3)),
            ("a", "c", F(1)),
            ("a", "e", F(1)),
            ("b", "c", F(1)),
            ("b", "e", F(1)),
        ],
    )


@pytest.fixture
def lopsided():
    """Two similar balls of diameter 1/2 that are not isometric."""
    x = ["x1", "x2", "x3"]
    y = ["y1", "y2", "y3"]
    entries = [
        ("x1", "x2", F(1, 4)),
        ("x1", "x3", F(1, 2)),
        ("x2", "x3", F(1, 2)),
        ("y1", "y2", F(1, 2)),
        ("y1", "y3", F(1, 2)),
        ("y2", "y3", F(1, 2)),
    ]
    entries += [(p, q, F(1)) for p in x for q in y]
    return validate_ultrametric(x + y, entries)


@pytest.fixture
def c4():
    """Cantor truncation at depth 2."""
    return generator_service.gen_cantor(2)


@pytest.fixture
def c8():
    """Cantor truncation at depth 3."""
    return generator_service.gen_cantor(3)


@pytest.fixture
def one_point():
    return validate_ultrametric(["a"], [])


@pytest.fixture
def two_point():
    return validate_ultrametric(["p", "q"], [("p", "q", F(1))])


@pytest.fixture
def df_2x2():
    return DegreeFunction.from_mapping({F(1, 2): 2, F(1): 2})


@pytest.fixture
def df_2x3():
    return DegreeFunction.from_mapping({F(1, 2): 2, F(1): 3})


@pytest.fixture
def product_2x3(df_2x3):
    return materialize_product(df_2x3)


@pytest.fixture
def scalene():
    """Three elements with three different labels; not an ultrametric."""
    return TwoStructure.from_pairs(
        ["x", "y", "z"],
        {("x", "y"): F(1), ("x", "z"): F(2), ("y", "z"): F(3)},
    )


@pytest.fixture
def fixture_spaces(t3, t3_relabelled, t3_prime, lopsided, c4, c8, one_point, two_point, product_2x3):
    """Every shared fixture space by name."""
    return {
        "t3": t3,
        "t3_relabelled": t3_relabelled,
        "t3_prime": t3_prime,
        "lopsided": lopsided,
        "c4": c4,
        "c8": c8,
        "one_point": one_point,
        "two_point": two_point,
        "product_2x3": product_2x3,
    }


@pytest.fixture
def space_file(tmp_path):
    """Write a space to a file under tmp_path and return its path as a string."""

    def _write(space, name="space.json"):
        path = tmp_path / name
        write_space(space, path)
        return str(path)

    return _write
