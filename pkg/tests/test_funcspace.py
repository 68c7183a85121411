from fractions import Fraction as F

import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.exceptions import (
    MismatchedDegreeFunctionError,
    PermutationOutOfRangeError,
    ProductTooLargeError,
    SpaceFormatError,
)
from src.ultrametric.core import spectrum
from src.ultrametric.funcspace import (
    DegreeFunction,
    FinSupportPoint,
    SigmaFamily,
    check_initial_segments,
    check_relabelled_segments,
    delon_embedding,
    delta,
    embed_space,
    embedding_is_isometric,
    fs_distance,
    homogeneous_envelope,
    lift_point,
    materialize_product,
    parse_degree_spec,
    product_points,
    sigma_apply,
    transitivity_witness,
    verify_feinberg,
)
from src.ultrametric.isometry import canonical_code, find_subspace_embedding, is_homogeneous
from src.ultrametric.nerve import degree_sequence

RADII = [F(1, 5), F(1, 4), F(1, 3), F(1, 2), F(1), F(2)]


@st.composite
def degree_functions(draw):
    radii = draw(st.lists(st.sampled_from(RADII), min_size=1, max_size=4, unique=True))
    return DegreeFunction.from_mapping({r: draw(st.integers(min_value=2, max_value=4)) for r in radii})


def points_of(df):
    return st.tuples(*[st.integers(min_value=0, max_value=k - 1) for _, k in df.entries]).map(
        lambda values: FinSupportPoint(df, tuple(zip(df.v_star, values)))
    )


def permutations_of(df):
    return st.tuples(*[st.permutations(range(k)) for _, k in df.entries]).map(
        lambda perms: SigmaFamily(tuple(zip(df.v_star, (tuple(p) for p in perms))))
    )


@st.composite
def triples(draw):
    df = draw(degree_functions())
    return draw(points_of(df)), draw(points_of(df)), draw(points_of(df))


@st.composite
def sigma_pairs(draw):
    df = draw(degree_functions())
    return draw(permutations_of(df)), draw(points_of(df)), draw(points_of(df))


class TestDegreeFunction:
    """Test cases for degree functions."""

    def test_entries_sorted(self):
        df = DegreeFunction.from_mapping({F(1): 3, F(1, 2): 2})
        assert df.v_star == (F(1, 2), F(1))
        assert df.s == {F(1, 2): 2, F(1): 3}
        assert df.size == 6
        assert df.describe() == "1/2:2, 1:3"

    def test_degree_at_least_two(self):
        with pytest.raises(SpaceFormatError):
            DegreeFunction.from_mapping({F(1): 1})

    def test_positive_radius(self):
        with pytest.raises(SpaceFormatError):
            DegreeFunction.from_mapping({F(0): 2})

    def test_parse(self):
        assert parse_degree_spec("1/2:2,1:3") == DegreeFunction.from_mapping({F(1, 2): 2, F(1): 3})

    @pytest.mark.parametrize("text", ["1/2", "1/2:x", "1:2,1:3", "0.5:2"])
    def test_parse_rejects(self, text):
        with pytest.raises(SpaceFormatError):
            parse_degree_spec(text)


class TestFinSupportPoint:
    """Test cases for finitely supported points."""

    def test_zero_values_dropped(self, df_2x3):
        f = FinSupportPoint(df_2x3, ((F(1), 2), (F(1, 2), 0)))
        assert f.assignment == ((F(1), 2),)
        assert f.support == {F(1)}
        assert f.value(F(1, 2)) == 0

    def test_value_out_of_range(self, df_2x3):
        with pytest.raises(SpaceFormatError):
            FinSupportPoint(df_2x3, ((F(1, 2), 2),))

    def test_unknown_radius(self, df_2x3):
        with pytest.raises(SpaceFormatError):
            FinSupportPoint(df_2x3, ((F(1, 3), 1),))

    def test_label_and_describe(self, df_2x3):
        f = FinSupportPoint(df_2x3, ((F(1), 2), (F(1, 2), 1)))
        assert f.label == "2.1"
        assert f.describe() == "{1: 2, 1/2: 1}"
        assert FinSupportPoint(df_2x3).describe() == "{}"

    def test_distance(self, df_2x3):
        zero = FinSupportPoint(df_2x3)
        f = FinSupportPoint(df_2x3, ((F(1, 2), 1),))
        g = FinSupportPoint(df_2x3, ((F(1), 1), (F(1, 2), 1)))
        assert delta(zero, f) == {F(1, 2)}
        assert delta(f, zero) == f.support
        assert fs_distance(zero, f) == F(1, 2)
        assert fs_distance(f, g) == F(1)
        assert fs_distance(g, g) == 0

    def test_mismatched_degree_functions(self, df_2x2, df_2x3):
        with pytest.raises(MismatchedDegreeFunctionError):
            delta(FinSupportPoint(df_2x2), FinSupportPoint(df_2x3))


class TestSigma:
    """Test cases for radius-wise permutations."""

    def test_apply(self, df_2x3):
        sigma = SigmaFamily({F(1): (1, 2, 0)})
        f = FinSupportPoint(df_2x3, ((F(1), 2),))
        assert sigma_apply(sigma, f).value(F(1)) == 0
        assert not sigma.is_identity
        assert SigmaFamily().is_identity

    def test_not_a_bijection(self, df_2x3):
        with pytest.raises(PermutationOutOfRangeError):
            sigma_apply(SigmaFamily({F(1): (0, 0, 1)}), FinSupportPoint(df_2x3))

    def test_wrong_size(self, df_2x3):
        with pytest.raises(PermutationOutOfRangeError):
            SigmaFamily({F(1, 2): (0, 1, 2)}).check(df_2x3)

    def test_transitivity_witness(self, df_2x3):
        f = FinSupportPoint(df_2x3, ((F(1), 1),))
        g = FinSupportPoint(df_2x3, ((F(1), 2), (F(1, 2), 1)))
        assert sigma_apply(transitivity_witness(f, g), f) == g

    @hyp_settings(max_examples=200, deadline=None)
    @given(sigma_pairs())
    def test_sigma_preserves_distance(self, data):
        sigma, f, g = data
        assert fs_distance(sigma_apply(sigma, f), sigma_apply(sigma, g)) == fs_distance(f, g)

    @hyp_settings(max_examples=100, deadline=None)
    @given(triples())
    def test_witness_moves_f_to_g(self, data):
        f, g, _ = data
        assert sigma_apply(transitivity_witness(f, g), f) == g


class TestDeltaFacts:
    """Test cases for the disagreement-set identities."""

    @pytest.mark.slow
    @hyp_settings(max_examples=10_000, deadline=None)
    @given(triples())
    def test_symmetric_difference_bounds(self, data):
        f, g, h = data
        assert delta(f, g) ^ delta(f, h) <= delta(h, g)
        assert delta(h, g) <= delta(f, h) | delta(f, g)

    @pytest.mark.slow
    @hyp_settings(max_examples=10_000, deadline=None)
    @given(triples())
    def test_strong_triangle(self, data):
        f, g, h = data
        assert fs_distance(f, h) <= max(fs_distance(f, g), fs_distance(g, h))


class TestProduct:
    """Test cases for materialized products."""

    def test_single_radius(self):
        space = materialize_product(DegreeFunction.from_mapping({F(1): 2}))
        assert len(space) == 2
        assert space.d(space.points[0], space.points[1]) == F(1)

    def test_labels(self, df_2x2):
        assert materialize_product(df_2x2).points == ("0.0", "0.1", "1.0", "1.1")

    def test_isometric_to_c4(self, df_2x2, c4):
        assert canonical_code(materialize_product(df_2x2)) == canonical_code(c4)

    def test_degree_sequence(self, product_2x3):
        assert len(product_2x3) == 6
        assert degree_sequence(product_2x3).per_radius == {F(1, 2): 2, F(1): 3}
        assert spectrum(product_2x3) == {F(0), F(1, 2), F(1)}

    def test_homogeneous(self, product_2x3):
        assert is_homogeneous(product_2x3)

    def test_too_large(self, df_2x3):
        with pytest.raises(ProductTooLargeError):
            product_points(df_2x3, max_size=5)

    def test_configured_bound(self, df_2x3, monkeypatch, test_settings):
        monkeypatch.setattr(test_settings, "PRODUCT_MAX_SIZE", 4)
        with pytest.raises(ProductTooLargeError):
            materialize_product(df_2x3)


class TestEmbedding:
    """Test cases for the canonical embedding."""

    def test_t3(self, t3):
        result = embed_space(t3)
        assert result.df == DegreeFunction.from_mapping({F(1, 2): 2, F(1): 2})
        assert result.phi["a"].as_dict() == {}
        assert result.phi["b"].as_dict() == {F(1, 2): 1}
        assert result.phi["c"].as_dict() == {F(1): 1}
        assert result.psi == result.phi

    def test_one_point(self, one_point):
        result = embed_space(one_point)
        assert result.psi["a"].as_dict() == {}
        assert result.df.entries == ()

    def test_c4_is_onto(self, c4):
        result = embed_space(c4)
        labels = {f.label for f in result.psi.values()}
        assert labels == {p.label for p in product_points(result.df)}

    def test_isometric_on_fixtures(self, fixture_spaces):
        for space in fixture_spaces.values():
            result = embed_space(space)
            assert embedding_is_isometric(space, result.phi)
            assert embedding_is_isometric(space, result.psi)
            assert check_initial_segments(space, result)
            assert check_relabelled_segments(space, result)

    def test_relabelling_fills_range(self, lopsided):
        """ψ takes exactly the values 0..s_M(B)-1 at every node."""
        result = embed_space(lopsided)
        assert check_relabelled_segments(lopsided, result)


class TestFeinberg:
    """Test cases for property h against surjectivity of the embedding."""

    def test_fixtures(self, fixture_spaces):
        for space in fixture_spaces.values():
            assert verify_feinberg(space)


class TestEnvelopeAndDelon:
    """Test cases for the homogeneous envelope and product embeddings."""

    def test_envelope(self, t3):
        envelope = homogeneous_envelope(t3)
        assert len(envelope.space) == 4
        assert is_homogeneous(envelope.space)
        for x in t3.points:
            for y in t3.points:
                assert envelope.space.d(envelope.embedding[x], envelope.embedding[y]) == t3.d(x, y)

    def test_lift(self, df_2x2):
        narrow = DegreeFunction.from_mapping({F(1): 2})
        f = FinSupportPoint(narrow, ((F(1), 1),))
        lifted = lift_point(f, df_2x2)
        assert lifted.df == df_2x2
        assert lifted.value(F(1)) == 1
        with pytest.raises(MismatchedDegreeFunctionError):
            lift_point(FinSupportPoint(df_2x2), narrow)

    def test_delon_into_c8(self, df_2x2, c8):
        witness = delon_embedding(df_2x2, c8)
        assert witness is not None
        assert len(witness) == 4
        assert find_subspace_embedding(materialize_product(df_2x2), c8) is not None

    def test_delon_needs_property_h(self, df_2x2, t3):
        assert delon_embedding(df_2x2, t3) is None

    def test_delon_needs_radii(self, c4):
        assert delon_embedding(DegreeFunction.from_mapping({F(1, 5): 2}), c4) is None

    def test_delon_needs_degrees(self, c4):
        assert delon_embedding(DegreeFunction.from_mapping({F(1): 3}), c4) is None
