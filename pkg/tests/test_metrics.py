import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazetok.core import DistributionKind, GazeSequence
from gazetok.errors import (
    BoundsMismatchError,
    EmptyHistogramError,
    EmptySequenceError,
    LengthMismatchError,
)
from gazetok.metrics import (
    accumulative_error,
    dtw,
    histogram2d,
    jensen_shannon,
    jsd,
    mae,
    mse,
)


def seq(points, kind=DistributionKind.POSITION):
    return GazeSequence(np.asarray(points, dtype=np.float64), 100.0, kind)


class TestPointwiseErrors:
    def test_identical_sequences(self):
        s = seq([(1, 2), (3, 4)])
        assert mse(s, s) == 0.0
        assert mae(s, s) == 0.0

    def test_hand_arithmetic_on_scalars(self):
        assert mse(np.array([1.0, 2.0]), np.array([2.0, 4.0])) == 2.5
        assert mae(np.array([1.0, 2.0]), np.array([2.0, 4.0])) == 1.5

    def test_euclidean_per_sample(self):
        a = seq([(0, 0)])
        b = seq([(3, 4)])
        assert mae(a, b) == 5.0
        assert mse(a, b) == 25.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            mse(seq([(0, 0)]), seq([(0, 0), (1, 1)]))

    @given(
        st.lists(
            st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=50
        ),
        st.lists(
            st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=1, max_size=50
        ),
    )
    @settings(max_examples=60, deadline=None)
    def test_mae_bounded_by_rms(self, pa, pb):
        n = min(len(pa), len(pb))
        a, b = seq(pa[:n]), seq(pb[:n])
        assert mae(a, b) <= math.sqrt(mse(a, b)) + 1e-12


class TestAccumulativeError:
    def drift_oracle(self, step, length):
        """Closed-form MAE of zero-velocity reconstruction on constant drift."""
        return step * (length - 1) / 2.0

    def test_lossless_velocities_give_zero(self):
        # positions on a dyadic grid: differencing and prefix-summing are
        # exact in float64, so lossless velocities reconstruct bit-exactly
        rng = np.random.default_rng(0)
        walk = np.cumsum(rng.normal(size=(50, 2)), axis=0)
        gt = seq(np.round(walk * 64.0) / 64.0)
        vel = seq(np.diff(gt.samples, axis=0), DistributionKind.VELOCITY)
        assert accumulative_error(gt, vel, "mse") == 0.0
        assert accumulative_error(gt, vel, "mae") == 0.0

    def test_zero_velocity_drift_matches_prefix_sum_oracle(self):
        step, T = 0.5, 40
        gt = seq([(i * step, 0.0) for i in range(T + 1)])
        zeros = seq(np.zeros((T, 2)), DistributionKind.VELOCITY)
        want = self.drift_oracle(step, T + 1)
        assert accumulative_error(gt, zeros, "mae") == pytest.approx(want, rel=1e-12)

    def test_length_mismatch(self):
        gt = seq([(0, 0), (1, 1)])
        with pytest.raises(LengthMismatchError):
            accumulative_error(gt, seq(np.zeros((5, 2)), DistributionKind.VELOCITY))


class TestDtw:
    def test_self_distance_zero(self, position_seq):
        assert dtw(position_seq, position_seq) == 0.0

    def test_one_sample_shift_absorbed(self):
        a = np.array([0.0, 0.0, 1.0])
        b = np.array([0.0, 1.0, 1.0])
        assert dtw(a, b) == 0.0
        # while the pointwise error stays visible
        assert mae(a, b) == pytest.approx(1.0 / 3.0)

    def test_symmetry(self, rng):
        a = rng.normal(size=(30, 2))
        b = rng.normal(size=(44, 2))
        assert dtw(a, b) == pytest.approx(dtw(b, a), rel=1e-12)

    def test_bounded_by_diagonal_alignment(self, rng):
        for _ in range(10):
            a = rng.normal(size=(25, 2))
            b = rng.normal(size=(25, 2))
            diagonal = float(np.sum(np.linalg.norm(a - b, axis=1)))
            assert dtw(a, b) <= diagonal + 1e-12

    def test_against_full_dp_table(self, rng):
        # quadratic-memory reference oracle
        a = rng.normal(size=(12, 2))
        b = rng.normal(size=(9, 2))
        cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
        table = np.full((12, 9), np.inf)
        for i in range(12):
            for j in range(9):
                prev = (
                    0.0
                    if i == j == 0
                    else min(
                        table[i - 1, j] if i > 0 else np.inf,
                        table[i, j - 1] if j > 0 else np.inf,
                        table[i - 1, j - 1] if i > 0 and j > 0 else np.inf,
                    )
                )
                table[i, j] = cost[i, j] + prev
        assert dtw(a, b) == pytest.approx(table[-1, -1], rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(EmptySequenceError):
            dtw(np.empty((0, 2)), np.zeros((3, 2)))


class TestHistogram:
    def test_data_equals_bounds_source(self, rng):
        data = rng.uniform(-5, 5, size=(1000, 2))
        h = histogram2d(data, data)
        assert h.discarded == 0
        assert h.total == 1000
        assert h.bins.shape == (128, 128)

    def test_all_outside_discarded(self, rng):
        bounds_src = rng.uniform(0, 1, size=(100, 2))
        data = rng.uniform(10, 11, size=(50, 2))
        h = histogram2d(data, bounds_src)
        assert h.discarded == 50
        assert h.total == 0

    def test_max_edge_lands_in_top_bin(self):
        bounds_src = np.array([[0.0, 0.0], [1.0, 1.0]])
        h = histogram2d(np.array([[1.0, 1.0]]), bounds_src)
        assert h.bins[127, 127] == 1

    def test_degenerate_axis_single_column(self):
        bounds_src = np.array([[3.0, 0.0], [3.0, 1.0]])
        h = histogram2d(np.array([[3.0, 0.5], [3.0, 0.9]]), bounds_src)
        assert h.discarded == 0
        assert h.bins[0].sum() == 2  # everything lands on the collapsed x row


class TestJsd:
    def test_identical_zero(self, rng):
        data = rng.normal(size=(500, 2))
        h = histogram2d(data, data)
        assert jsd(h, h) == 0.0

    def test_disjoint_support_is_one(self):
        bounds_src = np.array([[0.0, 0.0], [1.0, 1.0]])
        left = histogram2d(np.full((40, 2), 0.1), bounds_src)
        right = histogram2d(np.full((40, 2), 0.9), bounds_src)
        assert jsd(left, right) == pytest.approx(1.0, abs=1e-12)

    def test_symmetric(self, rng):
        src = rng.normal(size=(400, 2))
        p = histogram2d(rng.normal(size=(300, 2)), src)
        q = histogram2d(rng.normal(size=(300, 2)), src)
        assert jsd(p, q) == pytest.approx(jsd(q, p), abs=1e-15)
        assert 0.0 <= jsd(p, q) <= 1.0

    def test_two_bin_value_against_direct_formula(self):
        # p = (1/2, 1/2), q = (3/4, 1/4), m = (5/8, 3/8)
        want = 0.5 * (
            0.5 * math.log2(0.5 / 0.625) + 0.5 * math.log2(0.5 / 0.375)
        ) + 0.5 * (
            0.75 * math.log2(0.75 / 0.625) + 0.25 * math.log2(0.25 / 0.375)
        )
        got = jensen_shannon(np.array([2.0, 2.0]), np.array([3.0, 1.0]))
        assert got == pytest.approx(want, rel=1e-12)

    def test_bounds_mismatch(self, rng):
        a = rng.normal(size=(100, 2))
        b = a + 5.0
        with pytest.raises(BoundsMismatchError):
            jsd(histogram2d(a, a), histogram2d(b, b))

    def test_empty_histogram(self, rng):
        src = rng.uniform(0, 1, size=(50, 2))
        empty = histogram2d(np.full((5, 2), 9.0), src)
        full = histogram2d(src, src)
        with pytest.raises(EmptyHistogramError):
            jsd(empty, full)
