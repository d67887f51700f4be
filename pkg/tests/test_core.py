import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazetok.core import (
    DistributionKind,
    GazeSequence,
    derive_velocity,
    integrate_positions,
    min_max_normalize,
)
from gazetok.errors import NonFiniteDataError, SequenceTooShortError


def seq(points, kind=DistributionKind.POSITION):
    return GazeSequence(np.asarray(points, dtype=np.float64), 100.0, kind)


finite_coords = st.floats(
    min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False
)
sample_lists = st.lists(st.tuples(finite_coords, finite_coords), min_size=2, max_size=200)


class TestDeriveVelocity:
    def test_finite_difference(self):
        v = derive_velocity(seq([(0, 0), (1, 0), (3, 0)]))
        assert v.samples.tolist() == [[1.0, 0.0], [2.0, 0.0]]
        assert v.distribution_kind is DistributionKind.VELOCITY
        assert v.sample_rate_hz == 100.0

    def test_constant_positions_zero_velocity(self):
        v = derive_velocity(seq([(2, 3)] * 5))
        assert np.all(v.samples == 0.0)
        assert len(v) == 4

    def test_single_sample_rejected(self):
        with pytest.raises(SequenceTooShortError):
            derive_velocity(seq([(0, 0)]))


class TestIntegratePositions:
    def test_prefix_sum(self):
        vel = seq([(1, 0), (0, 1)], DistributionKind.VELOCITY)
        p = integrate_positions((0.0, 0.0), vel)
        assert p.samples.tolist() == [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]

    def test_empty_velocity_gives_start_only(self):
        p = integrate_positions((2.0, 5.0), None, sample_rate_hz=100.0)
        assert p.samples.tolist() == [[2.0, 5.0]]

    @given(sample_lists)
    @settings(max_examples=50, deadline=None)
    def test_inverse_pair(self, points):
        positions = seq(points)
        rebuilt = integrate_positions(tuple(positions.samples[0]), derive_velocity(positions))
        assert np.max(np.abs(rebuilt.samples - positions.samples)) < 1e-5


class TestMinMaxNormalize:
    def test_affine_endpoints(self):
        normed, bounds = min_max_normalize(seq([(0, 0), (5, 5), (10, 10)]))
        assert normed.samples[:, 0].tolist() == [-1.0, 0.0, 1.0]
        assert bounds.lo.tolist() == [0.0, 0.0]
        assert bounds.hi.tolist() == [10.0, 10.0]

    def test_identity_on_unit_range(self):
        s = seq([(-1, -1), (0.25, -0.5), (1, 1)])
        normed, _ = min_max_normalize(s)
        assert np.allclose(normed.samples, s.samples)

    def test_constant_axis_maps_to_zero(self):
        normed, bounds = min_max_normalize(seq([(3, 0), (3, 1), (3, 2)]))
        assert np.all(normed.samples[:, 0] == 0.0)
        assert bounds.lo[0] == bounds.hi[0] == 3.0

    @given(sample_lists)
    @settings(max_examples=50, deadline=None)
    def test_range_and_round_trip(self, points):
        s = seq(points)
        normed, bounds = min_max_normalize(s)
        assert np.all(normed.samples >= -1.0) and np.all(normed.samples <= 1.0)
        back = bounds.denormalize(normed.samples)
        scale = np.maximum(np.abs(s.samples), 1.0)
        assert np.max(np.abs(back - s.samples) / scale) < 1e-6


class TestValidation:
    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(NonFiniteDataError):
            seq([(0, 0), (bad, 1)])

    def test_empty_rejected(self):
        with pytest.raises(SequenceTooShortError):
            seq(np.empty((0, 2)))

    def test_bad_rate_rejected(self):
        with pytest.raises(ValueError):
            GazeSequence(np.zeros((3, 2)), 0.0)

    def test_samples_frozen(self):
        s = seq([(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            s.samples[0, 0] = 5.0
