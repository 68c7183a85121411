#!/usr/bin/env python3
"""
Write the reference space files (T3, T3', C4, C8, a product) into a directory.
"""

import os
import sys
from fractions import Fraction as F
from pathlib import Path

sys.path.append(os.path.dirname(os.path.dirname(__file__)))


def fixture_spaces():
    from src.services.generator_service import generator_service
    from src.ultrametric.core import validate_ultrametric

    return {
        "t3": validate_ultrametric(
            ["a", "b", "c"],
            [("a", "b", F(1, 2)), ("a", "c", F(1)), ("b", "c", F(1))],
        ),
        "t3prime": validate_ultrametric(
            ["a", "b", "c", "e"],
            [
                ("a", "b", F(1, 2)),
                ("c", "e", F(1, 3)),
                ("a", "c", F(1)),
                ("a", "e", F(1)),
                ("b", "c", F(1)),
                ("b", "e", F(1)),
            ],
        ),
        "cantor2": generator_service.gen_cantor(2),
        "cantor3": generator_service.gen_cantor(3),
        "product2x3": generator_service.gen_product("1/2:2,1:3"),
    }


def write_fixtures(target: Path):
    """Write one ``<name>.space`` file per reference space."""
    from src.exceptions import UltrametricError
    from src.utils.space_io import write_space

    target.mkdir(parents=True, exist_ok=True)
    print(f"📁 Writing fixtures to {target}")
    try:
        for name, space in fixture_spaces().items():
            path = target / f"{name}.space"
            write_space(space, path)
            print(f"   ✅ {path.name}: {len(space)} points")
    except UltrametricError as e:
        print(f"❌ Could not build fixtures: {e.message}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(write_fixtures(Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")))
