import numpy as np
import pytest

from girgex.geometry import (
    Combine,
    DistanceSpecError,
    Leaf,
    Topology,
    ball_volume,
    boolean_distance,
    coordinate_distance,
    is_pure,
    leaf_indices,
    max_norm_spec,
    mcd_spec,
    min_blocks,
    parse_distance_spec,
    sample_position,
    spec_dimension,
    spec_to_string,
)


class TestParser:
    def test_single_leaf(self):
        assert parse_distance_spec("x0", 1) == Leaf(0)

    def test_nested(self):
        spec = parse_distance_spec("min(x0, max(x1, x2))", 3)
        assert spec == Combine("min", Leaf(0), Combine("max", Leaf(1), Leaf(2)))

    def test_whitespace_insensitive(self):
        a = parse_distance_spec("min( x0 ,max(x1,  x2) )", 3)
        b = parse_distance_spec("min(x0,max(x1,x2))", 3)
        assert a == b

    def test_repeated_and_missing(self):
        with pytest.raises(DistanceSpecError) as exc:
            parse_distance_spec("min(x0, x0)", 2)
        msg = str(exc.value)
        assert "coordinate 1 missing" in msg
        assert "coordinate 0 repeated" in msg

    def test_out_of_range(self):
        with pytest.raises(DistanceSpecError, match="out of range"):
            parse_distance_spec("max(x0, x5)", 2)

    def test_syntax_error_reports_position(self):
        with pytest.raises(DistanceSpecError, match="position"):
            parse_distance_spec("min(x0 x1)", 2)

    def test_trailing_garbage(self):
        with pytest.raises(DistanceSpecError, match="trailing"):
            parse_distance_spec("x0 junk", 1)

    def test_multi_digit_index(self):
        spec = parse_distance_spec(
            "max(" * 10 + "x10" + "".join(f", x{i})" for i in range(10)), 11
        )
        assert sorted(leaf_indices(spec)) == list(range(11))

    def test_roundtrip_via_string(self):
        spec = parse_distance_spec("min(max(x0, x3), max(x1, x2))", 4)
        assert parse_distance_spec(spec_to_string(spec), 4) == spec


class TestHelpers:
    def test_pure_trees(self):
        assert is_pure(max_norm_spec(4), "max")
        assert is_pure(mcd_spec(3), "min")
        assert not is_pure(parse_distance_spec("min(x0, max(x1, x2))", 3), "min")
        assert spec_dimension(max_norm_spec(5)) == 5

    def test_min_blocks(self):
        spec = parse_distance_spec("min(x0, max(x1, x2))", 3)
        blocks = min_blocks(spec)
        assert len(blocks) == 2
        assert blocks[0] == Leaf(0)
        assert min_blocks(max_norm_spec(3)) == [max_norm_spec(3)]
        assert len(min_blocks(mcd_spec(4))) == 4


class TestCoordinateDistance:
    def test_torus_wraparound(self):
        assert coordinate_distance(0.4, -0.4, Topology.TORUS) == pytest.approx(0.2)

    def test_cube_plain(self):
        assert coordinate_distance(0.4, -0.4, Topology.CUBE) == pytest.approx(0.8)

    def test_identity(self):
        for topo in Topology:
            assert coordinate_distance(0.3, 0.3, topo) == 0.0

    def test_dominance(self):
        rng = np.random.default_rng(7)
        a = rng.uniform(-0.5, 0.5, 1000)
        b = rng.uniform(-0.5, 0.5, 1000)
        cube = coordinate_distance(a, b, Topology.CUBE)
        torus = coordinate_distance(a, b, Topology.TORUS)
        assert np.all(cube >= torus)


class TestBooleanDistance:
    def test_max_norm(self):
        spec = max_norm_spec(2)
        d = boolean_distance(spec, Topology.TORUS, [0.0, 0.0], [0.1, 0.3])
        assert d == pytest.approx(0.3)

    def test_mcd(self):
        d = boolean_distance(mcd_spec(2), Topology.TORUS, [0.0, 0.0], [0.1, 0.3])
        assert d == pytest.approx(0.1)

    def test_mixed(self):
        spec = parse_distance_spec("min(x0, max(x1, x2))", 3)
        d = boolean_distance(spec, Topology.TORUS, [0.0, 0.0, 0.0], [0.4, 0.1, 0.2])
        assert d == pytest.approx(0.2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            boolean_distance(max_norm_spec(2), Topology.TORUS, [0.0], [0.1])

    def test_symmetry_and_zero(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            d = int(rng.integers(1, 6))
            spec = _random_spec(rng, d)
            x = sample_position(d, rng)
            y = sample_position(d, rng)
            for topo in Topology:
                assert boolean_distance(spec, topo, x, y) == pytest.approx(
                    boolean_distance(spec, topo, y, x)
                )
            assert boolean_distance(spec, Topology.TORUS, x, x) == 0.0

    def test_cube_dominates_torus(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            d = int(rng.integers(1, 6))
            spec = _random_spec(rng, d)
            x = sample_position(d, rng)
            y = sample_position(d, rng)
            dc = boolean_distance(spec, Topology.CUBE, x, y)
            dt = boolean_distance(spec, Topology.TORUS, x, y)
            assert dc >= dt - 1e-15


def _random_spec(rng, d):
    """Random binary min/max tree over a random permutation of 0..d-1."""
    perm = list(rng.permutation(d))

    def build(ids):
        if len(ids) == 1:
            return Leaf(int(ids[0]))
        cut = int(rng.integers(1, len(ids)))
        op = "min" if rng.random() < 0.5 else "max"
        return Combine(op, build(ids[:cut]), build(ids[cut:]))

    return build(perm)


class TestPartitionInvariant:
    def test_random_trees_validate(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            d = int(rng.integers(1, 7))
            spec = _random_spec(rng, d)
            parse_distance_spec(spec_to_string(spec), d)  # should not raise

    def test_corrupted_trees_rejected(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            d = int(rng.integers(2, 7))
            spec = _random_spec(rng, d)
            # duplicate one coordinate over another: now one repeated, one missing
            text = spec_to_string(spec)
            corrupted = text.replace("x1", "x0")
            with pytest.raises(DistanceSpecError):
                parse_distance_spec(corrupted, d)


class TestBallVolume:
    def test_max_norm_square(self):
        assert ball_volume(max_norm_spec(2), 0.25) == pytest.approx(0.25)

    def test_mcd_inclusion_exclusion(self):
        assert ball_volume(mcd_spec(2), 0.25) == pytest.approx(0.75)

    def test_full_torus(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            d = int(rng.integers(1, 6))
            assert ball_volume(_random_spec(rng, d), 0.5) == 1.0

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            ball_volume(max_norm_spec(2), -0.1)

    def test_clamp_above_half(self):
        assert ball_volume(max_norm_spec(3), 0.8) == 1.0

    def test_array_input(self):
        r = np.array([0.0, 0.25, 0.5])
        np.testing.assert_allclose(ball_volume(max_norm_spec(2), r), [0.0, 0.25, 1.0])

    def test_monotone(self):
        rng = np.random.default_rng(19)
        r = np.linspace(0, 0.6, 200)
        for _ in range(20):
            d = int(rng.integers(1, 6))
            vols = ball_volume(_random_spec(rng, d), r)
            assert np.all(np.diff(vols) >= -1e-15)

    def test_monte_carlo_agreement(self):
        # smaller sample here; the acceptance suite runs the 1e6 version
        rng = np.random.default_rng(23)
        n_mc = 100_000
        for _ in range(10):
            d = int(rng.integers(1, 6))
            spec = _random_spec(rng, d)
            r = float(rng.uniform(0.02, 0.5))
            vol = ball_volume(spec, r)
            pts = rng.uniform(-0.5, 0.5, size=(n_mc, d))
            dist = _spec_dist_to_origin(spec, pts)
            est = float(np.mean(dist <= r))
            se = max(np.sqrt(vol * (1 - vol) / n_mc), 1e-4)
            assert abs(vol - est) <= 4 * se

    def test_mcd_small_r_linear(self):
        r = 1e-4
        for d in range(1, 8):
            ratio = ball_volume(mcd_spec(d), r) / (2 * d * r)
            assert abs(ratio - 1.0) < 0.01


def _spec_dist_to_origin(spec, pts):
    from girgex.geometry import distance_from_coordinate_distances

    return distance_from_coordinate_distances(spec, np.abs(pts))


class TestSamplePosition:
    def test_range_and_shape(self):
        rng = np.random.default_rng(29)
        p = sample_position(3, rng)
        assert p.shape == (3,)
        assert np.all((p >= -0.5) & (p <= 0.5))

    def test_d_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_position(0, np.random.default_rng(0))

    def test_mean_near_zero(self):
        rng = np.random.default_rng(31)
        pts = np.array([sample_position(2, rng) for _ in range(10_000)])
        assert np.all(np.abs(pts.mean(axis=0)) < 0.01)

    def test_deterministic(self):
        a = sample_position(4, np.random.default_rng(42))
        b = sample_position(4, np.random.default_rng(42))
        np.testing.assert_array_equal(a, b)
