from fractions import Fraction as F
from itertools import combinations

import pytest

from src.exceptions import ConditionAViolatedError, NotAnIsometryError, TooLargeError
from src.services.generator_service import generator_service
from src.ultrametric.core import restrict, spectrum_at
from src.ultrametric.funcspace import materialize_product
from src.ultrametric.isometry import (
    PartialIsometry,
    SpecIsometry,
    can_move,
    canonical_code,
    check_ball_characterization,
    check_condition_A,
    check_condition_B,
    check_homogeneity_characterization,
    check_nerve_isometric_levels,
    check_partial_isometry,
    check_property_h,
    enumerate_automorphisms,
    enumerate_partial_isometries,
    extend_isometry,
    find_automorphism,
    find_subspace_embedding,
    is_homogeneous,
    is_spec_homogeneous,
    is_transitive,
    isometric,
    orbits,
    pointed_code,
    spec_back_and_forth,
    spec_extension_step,
)


def assert_automorphism(space, mapping):
    assert set(mapping) == set(space.points)
    assert set(mapping.values()) == set(space.points)
    for x, y in combinations(space.points, 2):
        assert space.d(mapping[x], mapping[y]) == space.d(x, y)


class TestPartialIsometry:
    """Test cases for partial isometry checks."""

    def test_preserving_map(self, c4):
        assert check_partial_isometry(PartialIsometry.within(c4, {"00": "10", "01": "11"}))

    def test_breaking_map(self, t3):
        assert not check_partial_isometry(PartialIsometry.within(t3, {"a": "c", "b": "a"}))

    def test_between_spaces(self, t3, t3_relabelled):
        p = PartialIsometry(t3, t3_relabelled, {"a": "y", "c": "z"})
        assert check_partial_isometry(p)
        assert p.domain == ["a", "c"]
        assert p.image == ["y", "z"]
        assert not p.is_total

    def test_inverse_and_restriction(self, c4):
        p = PartialIsometry.within(c4, {"00": "10", "01": "11"})
        assert dict(p.inverse().mapping) == {"10": "00", "11": "01"}
        assert dict(p.restricted({"00"}).mapping) == {"00": "10"}
        assert len(p) == 2

    def test_mapping_is_read_only(self, c4):
        p = PartialIsometry.within(c4, {"00": "10"})
        with pytest.raises(TypeError):
            p.mapping["01"] = "11"


class TestCanonicalCode:
    """Test cases for canonical codes and isometry witnesses."""

    def test_relabelling_invariant(self, t3, t3_relabelled):
        assert canonical_code(t3) == canonical_code(t3_relabelled)

    def test_different_sizes(self, t3, c4):
        assert canonical_code(t3) != canonical_code(c4)

    def test_c4_matches_product(self, c4, df_2x2):
        assert canonical_code(c4) == canonical_code(materialize_product(df_2x2))

    def test_isometric_witness(self, t3, t3_relabelled):
        witness = isometric(t3, t3_relabelled)
        assert witness is not None
        assert dict(witness.mapping) == {"a": "x", "b": "y", "c": "z"}
        assert check_partial_isometry(witness)

    def test_not_isometric(self, t3, c4, t3_prime, lopsided):
        assert isometric(t3, c4) is None
        assert isometric(t3_prime, c4) is None
        x_half = restrict(lopsided, {"x1", "x2", "x3"})
        y_half = restrict(lopsided, {"y1", "y2", "y3"})
        assert isometric(x_half, y_half) is None

    def test_codes_agree_with_backtracking(self, fixture_spaces):
        spaces = list(fixture_spaces.values())
        for first in spaces:
            for second in spaces:
                if len(first) != len(second):
                    continue
                by_code = isometric(first, second) is not None
                by_search = find_subspace_embedding(first, second) is not None
                assert by_code == by_search


class TestSubspaceEmbedding:
    """Test cases for the backtracking embedding search."""

    def test_pair_into_t3(self, two_point, t3):
        witness = find_subspace_embedding(two_point, t3)
        assert witness is not None
        assert t3.d(witness["p"], witness["q"]) == F(1)

    def test_t3_into_c4(self, t3, c4):
        witness = find_subspace_embedding(t3, c4)
        assert witness is not None
        assert check_partial_isometry(witness)

    def test_too_big(self, c4, t3):
        assert find_subspace_embedding(c4, t3) is None

    def test_wrong_distances(self, t3_prime, c4):
        assert find_subspace_embedding(t3_prime, c4) is None

    def test_into_deeper_cantor(self, t3_prime, c8):
        witness = find_subspace_embedding(t3_prime, c8)
        assert witness is not None
        assert check_partial_isometry(witness)


class TestAutomorphisms:
    """Test cases for pointed codes, orbits and automorphism search."""

    def test_orbits(self, t3, c4, t3_prime):
        assert orbits(t3) == [("a", "b"), ("c",)]
        assert orbits(c4) == [tuple(c4.points)]
        assert orbits(t3_prime) == [("a", "b"), ("c", "e")]

    def test_pointed_codes(self, t3):
        assert pointed_code(t3, "a") == pointed_code(t3, "b")
        assert pointed_code(t3, "a") != pointed_code(t3, "c")

    def test_find_automorphism(self, c4):
        witness = find_automorphism(c4, "00", "11")
        assert witness["00"] == "11"
        assert_automorphism(c4, dict(witness.mapping))

    def test_no_automorphism(self, t3):
        assert find_automorphism(t3, "a", "c") is None

    def test_enumerate_counts(self, t3, c4, two_point):
        assert len(list(enumerate_automorphisms(t3))) == 2
        assert len(list(enumerate_automorphisms(c4))) == 8
        assert len(list(enumerate_automorphisms(two_point))) == 2

    def test_enumerate_with_seed(self, c4):
        found = list(enumerate_automorphisms(c4, seed={"00": "10", "01": "11"}))
        assert len(found) == 2
        for mapping in found:
            assert mapping["00"] == "10"
            assert_automorphism(c4, mapping)

    def test_enumerate_bound(self, c8):
        with pytest.raises(TooLargeError):
            enumerate_automorphisms(c8, max_points=4)

    def test_can_move_matches_orbits(self, fixture_spaces):
        for space in fixture_spaces.values():
            orbit_of = {p: i for i, orbit in enumerate(orbits(space)) for p in orbit}
            for x in space.points:
                for y in space.points:
                    assert can_move(space, x, y) == (orbit_of[x] == orbit_of[y])


class TestPartialEnumeration:
    """Test cases for the exhaustive partial isometry enumeration."""

    def test_two_point(self, two_point):
        maps = list(enumerate_partial_isometries(two_point))
        assert len(maps) == 7
        assert {} in maps
        assert {"p": "q", "q": "p"} in maps

    def test_spectral_only(self, t3):
        for mapping in enumerate_partial_isometries(t3, spectral=True):
            for x, y in mapping.items():
                assert spectrum_at(t3, x) == spectrum_at(t3, y)

    def test_bound(self, c8):
        with pytest.raises(TooLargeError):
            enumerate_partial_isometries(c8)

    def test_configured_bound(self, t3, monkeypatch, test_settings):
        monkeypatch.setattr(test_settings, "BRUTE_FORCE_PARTIAL_MAX_POINTS", 2)
        with pytest.raises(TooLargeError):
            enumerate_partial_isometries(t3)


class TestExtendIsometry:
    """Test cases for extending partial isometries."""

    def test_c4_pair(self, c4):
        result = extend_isometry(c4, {"00": "10", "01": "11"})
        assert result is not None
        assert result["00"] == "10"
        assert result["01"] == "11"
        assert_automorphism(c4, dict(result.mapping))

    def test_t3_cannot_move_apex(self, t3):
        assert extend_isometry(t3, {"a": "c"}) is None

    def test_empty_map_gives_identity(self, t3):
        result = extend_isometry(t3, {})
        assert dict(result.mapping) == {"a": "a", "b": "b", "c": "c"}

    def test_swap(self, t3):
        result = extend_isometry(t3, {"a": "b"})
        assert dict(result.mapping) == {"a": "b", "b": "a", "c": "c"}

    def test_rejects_non_isometry(self, t3):
        with pytest.raises(NotAnIsometryError):
            extend_isometry(t3, {"a": "c", "b": "a"})

    def test_accepts_partial_isometry_object(self, c8):
        phi = PartialIsometry.within(c8, {"000": "111", "010": "101", "100": "001"})
        result = extend_isometry(c8, phi)
        assert_automorphism(c8, dict(result.mapping))
        assert all(result[k] == v for k, v in phi.mapping.items())

    def test_every_partial_map_on_c4_extends(self, c4):
        for phi in enumerate_partial_isometries(c4):
            result = extend_isometry(c4, phi)
            assert result is not None
            assert all(result[k] == v for k, v in phi.items())

    def test_agrees_with_exhaustive_search(self, t3_prime):
        for phi in enumerate_partial_isometries(t3_prime):
            ours = extend_isometry(t3_prime, phi) is not None
            brute = next(enumerate_automorphisms(t3_prime, seed=phi), None) is not None
            assert ours == brute

    @pytest.mark.parametrize("name", ["t3", "t3_relabelled", "t3_prime", "c4", "one_point", "two_point"])
    def test_arity_two(self, fixture_spaces, name):
        """A map extends iff each two-point restriction does."""
        space = fixture_spaces[name]
        for phi in enumerate_partial_isometries(space):
            if len(phi) < 2:
                continue
            whole = extend_isometry(space, phi) is not None
            pairs = all(
                extend_isometry(space, {x: phi[x], y: phi[y]}) is not None
                for x, y in combinations(sorted(phi), 2)
            )
            assert whole == pairs

    @pytest.mark.parametrize(
        "name, phi",
        [
            ("t3", {"a": "c", "b": "a"}),
            ("t3_prime", {"a": "c", "b": "e", "c": "a"}),
            ("c4", {"00": "00", "01": "10"}),
        ],
    )
    def test_arity_two_rejects_non_isometry(self, fixture_spaces, name, phi):
        """A map that is not isometric fails whole and on some pair."""
        space = fixture_spaces[name]
        with pytest.raises(NotAnIsometryError):
            extend_isometry(space, phi)
        rejected = 0
        for x, y in combinations(sorted(phi), 2):
            try:
                extend_isometry(space, {x: phi[x], y: phi[y]})
            except NotAnIsometryError:
                rejected += 1
        assert rejected > 0


class TestHomogeneity:
    """Test cases for transitivity and homogeneity."""

    def test_c4(self, c4):
        assert is_transitive(c4)
        assert is_homogeneous(c4)
        assert is_homogeneous(c4, brute_force=True)

    def test_t3(self, t3):
        assert not is_transitive(t3)
        assert not is_homogeneous(t3)
        assert not is_homogeneous(t3, brute_force=True)

    def test_c8_transitive_brute_force(self, c8):
        assert is_transitive(c8, brute_force=True)

    def test_brute_force_bound(self, c8):
        with pytest.raises(TooLargeError):
            is_homogeneous(c8, brute_force=True)

    def test_product_is_homogeneous(self, product_2x3):
        assert is_homogeneous(product_2x3, brute_force=True)

    def test_property_h(self, t3, c4, one_point):
        assert check_property_h(t3) == (False, True)
        assert check_property_h(c4) == (True, True)
        assert check_property_h(one_point) == (True, True)

    def test_homogeneous_implies_h(self, fixture_spaces):
        for space in fixture_spaces.values():
            if is_homogeneous(space):
                assert check_property_h(space) == (True, True)

    def test_homogeneity_characterization(self, fixture_spaces):
        for space in fixture_spaces.values():
            assert check_homogeneity_characterization(space) == is_homogeneous(space)


class TestConditions:
    """Test cases for conditions (A) and (B)."""

    def test_c4(self, c4):
        assert check_condition_A(c4)
        assert check_condition_B(c4)

    def test_t3(self, t3):
        assert check_condition_A(t3)
        assert check_condition_B(t3)

    def test_t3_prime(self, t3_prime):
        assert check_condition_A(t3_prime)

    def test_lopsided(self, lopsided):
        assert not check_condition_A(lopsided)
        assert not check_condition_B(lopsided)

    def test_a_implies_b(self, fixture_spaces):
        for space in fixture_spaces.values():
            assert not check_condition_A(space) or check_condition_B(space)

    def test_ball_characterization(self, fixture_spaces):
        for space in fixture_spaces.values():
            assert check_ball_characterization(space) == check_condition_A(space)


class TestNerveLevels:
    """Test cases for isometric nerve levels."""

    def test_t3(self, t3):
        assert check_nerve_isometric_levels(t3)

    def test_c4(self, c4):
        assert check_nerve_isometric_levels(c4)

    def test_t3_prime(self, t3_prime):
        """Each diameter has one non-trivial node."""
        assert check_nerve_isometric_levels(t3_prime)

    def test_lopsided(self, lopsided):
        """The two nodes of diameter 1/2 differ."""
        assert not check_nerve_isometric_levels(lopsided)

    def test_levels_imply_condition_a(self, fixture_spaces):
        for space in fixture_spaces.values():
            if check_nerve_isometric_levels(space):
                assert check_condition_A(space)
                assert is_spec_homogeneous(space)

    @pytest.mark.parametrize("seed", range(12))
    def test_random_spaces(self, seed):
        pool = [F(1, k) for k in range(1, 7)]
        space = generator_service.gen_random(6, seed, pool)
        if check_nerve_isometric_levels(space):
            assert is_spec_homogeneous(space, brute_force=True)


class TestSpecHomogeneity:
    """Test cases for spec-homogeneity and the extension step."""

    def test_verdicts(self, c4, t3, t3_prime, lopsided):
        assert is_spec_homogeneous(c4)
        assert is_spec_homogeneous(t3, brute_force=True)
        assert is_spec_homogeneous(t3_prime, brute_force=True)
        assert not is_spec_homogeneous(lopsided, brute_force=True)

    def test_step_single_candidate(self, c4):
        step = spec_extension_step(c4, {"00": "11"}, "01")
        assert isinstance(step, SpecIsometry)
        assert dict(step.mapping) == {"00": "11", "01": "10"}

    def test_step_across_the_root(self, c4):
        step = spec_extension_step(c4, {"00": "10", "01": "11"}, "10")
        assert step["10"] == "00"

    def test_step_from_empty_map(self, t3):
        step = spec_extension_step(t3, {}, "c")
        assert spectrum_at(t3, step["c"]) == spectrum_at(t3, "c")

    def test_step_rejects_spectrum_change(self, t3):
        with pytest.raises(NotAnIsometryError):
            spec_extension_step(t3, {"a": "c"}, "b")

    def test_step_condition_a_violated(self, lopsided):
        with pytest.raises(ConditionAViolatedError):
            spec_extension_step(lopsided, {"x3": "y1"}, "x1")

    def test_back_and_forth(self, t3_prime):
        for phi in enumerate_partial_isometries(t3_prime, spectral=True):
            result = spec_back_and_forth(t3_prime, phi)
            assert result is not None
            assert result.is_total
            assert all(result[k] == v for k, v in phi.items())
