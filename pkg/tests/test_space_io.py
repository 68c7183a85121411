import json
from fractions import Fraction as F

import pytest

from src.exceptions import (
    DuplicatePairError,
    MissingPairError,
    NonPositiveDistanceError,
    SpaceFormatError,
    UnknownPointError,
)
from src.models import SpaceFile
from src.ultrametric.nerve import build_nerve
from src.utils.space_io import (
    dump_space,
    dump_tree,
    load_space,
    parse_space,
    space_from_model,
    space_to_model,
    tree_to_model,
    write_space,
)


def text(points, distances):
    return json.dumps({"points": points, "distances": distances})


class TestParseSpace:
    """Test cases for reading space files."""

    def test_t3(self, t3):
        space = parse_space(text(["a", "b", "c"], [["a", "b", "1/2"], ["c", "a", "1"], ["b", "c", "1"]]))
        assert space == t3

    def test_whole_number_strings(self):
        space = parse_space(text(["p", "q"], [["p", "q", "2"]]))
        assert space.d("p", "q") == F(2)

    def test_bytes(self, two_point):
        assert parse_space(dump_space(two_point).encode()) == two_point

    @pytest.mark.parametrize(
        "points, distances, error",
        [
            (["a", "b"], [["a", "b", "1"], ["b", "a", "1"]], DuplicatePairError),
            (["a", "b", "c"], [["a", "b", "1"], ["a", "c", "1"]], MissingPairError),
            (["a", "b"], [["a", "z", "1"]], UnknownPointError),
            (["a", "b"], [["a", "b", "0"]], NonPositiveDistanceError),
            (["a", "b"], [["a", "b", "-1"]], NonPositiveDistanceError),
            (["a", "a"], [], SpaceFormatError),
            (["a", "b"], [["a", "b", 0.5]], SpaceFormatError),
            (["a", "b"], [["a", "b", "0.5"]], SpaceFormatError),
            (["a", "b"], [["a", "b", 1]], SpaceFormatError),
            (["a", "b"], [["a", 1, "1"]], SpaceFormatError),
            (["a", "b"], [["a", "a", "1"]], SpaceFormatError),
        ],
    )
    def test_rejects(self, points, distances, error):
        with pytest.raises(error):
            parse_space(text(points, distances))

    def test_malformed_json(self):
        with pytest.raises(SpaceFormatError) as exc_info:
            parse_space("{not json")
        assert "malformed space file" in exc_info.value.message

    def test_missing_points_key(self):
        with pytest.raises(SpaceFormatError) as exc_info:
            parse_space('{"distances": []}')
        assert "points" in exc_info.value.message

    def test_duplicate_pair_names_pair(self):
        with pytest.raises(DuplicatePairError) as exc_info:
            parse_space(text(["a", "b"], [["a", "b", "1"], ["b", "a", "1"]]))
        assert exc_info.value.pair == ("b", "a")


class TestWriteSpace:
    """Test cases for writing space files."""

    def test_model_lists_each_pair_once(self, t3):
        model = space_to_model(t3)
        assert model.points == ["a", "b", "c"]
        assert model.distances == [["a", "b", "1/2"], ["a", "c", "1"], ["b", "c", "1"]]

    def test_dump_is_parseable(self, lopsided):
        assert parse_space(dump_space(lopsided)) == lopsided

    def test_file_round_trip(self, tmp_path, c8):
        path = tmp_path / "c8.space"
        write_space(c8, path)
        assert load_space(path) == c8
        assert load_space(str(path)) == c8

    def test_load_missing(self, tmp_path):
        with pytest.raises(SpaceFormatError) as exc_info:
            load_space(tmp_path / "absent.space")
        assert "cannot read" in exc_info.value.message

    def test_space_from_model(self, two_point):
        model = SpaceFile(points=["p", "q"], distances=[["p", "q", "1"]])
        assert space_from_model(model) == two_point


class TestTreeModel:
    """Test cases for the nerve machine format."""

    def test_nerve_of_t3(self, t3):
        nerve = build_nerve(t3)
        model = tree_to_model(t3, [n.members for n in nerve.nodes], lambda m: nerve.node(m).diameter, nerve.parent)
        assert model.points == ["a", "b", "c"]
        assert [(n.members, n.diameter, n.parent) for n in model.nodes] == [
            (["a", "b", "c"], "1", None),
            (["a", "b"], "1/2", 0),
            (["a"], "0", 1),
            (["b"], "0", 1),
            (["c"], "0", 0),
        ]

    def test_dump_tree(self, two_point):
        nerve = build_nerve(two_point)
        model = tree_to_model(
            two_point, [n.members for n in nerve.nodes], lambda m: nerve.node(m).diameter, nerve.parent
        )
        payload = json.loads(dump_tree(model))
        assert payload["nodes"][0] == {"members": ["p", "q"], "diameter": "1", "parent": None}
        assert payload["distances"] == [["p", "q", "1"]]
