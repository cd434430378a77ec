"""Simplex arithmetic: construction, projection, divergences, diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adasamp.errors import (
    DimensionMismatchError,
    InvalidAlphaError,
    NonFiniteInputError,
    NonPositiveInputError,
    SupportMismatchError,
    ZeroSumError,
)
from adasamp.simplex import (
    FloorConstraint,
    as_distribution,
    floor_kl_projection,
    kl_divergence,
    make_distribution,
    optimal_distribution,
    projection_gap,
    total_variation,
    uniform_distribution,
)


def brute_force_projection(y, constraint):
    """Independent oracle: enumerate floor-pattern candidates, minimize KL.

    For every subset F of entries pinned to the floor, distribute the
    remaining mass proportionally to y off F; the true projection is the
    feasible candidate with the smallest divergence.
    """
    y = np.asarray(y, dtype=np.float64)
    m = constraint.M
    floor = constraint.floor
    best = None
    best_val = np.inf
    for mask in range(2**m):
        pinned = [(mask >> j) & 1 for j in range(m)]
        free = [j for j in range(m) if not pinned[j]]
        cand = np.full(m, floor)
        if free:
            rest = 1.0 - floor * (m - len(free))
            total = y[free].sum()
            cand[free] = rest * y[free] / total
        elif abs(floor * m - 1.0) > 1e-12:
            continue
        if np.any(cand < floor - 1e-12):
            continue
        val = kl_divergence(cand, y)
        if val < best_val:
            best_val = val
            best = cand
    return best


def grid_projection_m2(y, constraint, step=1e-5):
    """Spec-style oracle for M=2: scan the feasible segment at a fine step."""
    floor = constraint.floor
    grid = np.arange(floor, 1.0 - floor + step / 2, step)
    best, best_val = None, np.inf
    for p0 in grid:
        cand = np.array([p0, 1.0 - p0])
        val = kl_divergence(cand, np.asarray(y, dtype=np.float64))
        if val < best_val:
            best_val, best = val, cand
    return best


class TestMakeDistribution:
    def test_uniform_weights(self):
        np.testing.assert_allclose(make_distribution([1, 1, 1, 1]), [0.25] * 4)

    def test_degenerate_mass(self):
        np.testing.assert_allclose(make_distribution([2, 0]), [1.0, 0.0])

    def test_direct_normalization(self):
        np.testing.assert_allclose(make_distribution([1, 3]), [0.25, 0.75])

    def test_zero_sum_rejected(self):
        with pytest.raises(ZeroSumError):
            make_distribution([0.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteInputError):
            make_distribution([1.0, np.nan])
        with pytest.raises(NonFiniteInputError):
            make_distribution([1.0, np.inf])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            make_distribution([1.0, -0.5])


class TestAsDistribution:
    def test_renormalizes_small_drift(self):
        p = as_distribution([0.5 + 3e-7, 0.5])
        assert abs(p.sum() - 1.0) <= 1e-9

    def test_rejects_large_drift(self):
        with pytest.raises(ValueError):
            as_distribution([0.6, 0.6])


class TestOptimalDistribution:
    def test_sqrt_proportionality(self):
        np.testing.assert_allclose(optimal_distribution([1, 4, 4]), [0.2, 0.4, 0.4])

    def test_constant_weights_give_uniform(self):
        for c in (0.5, 3.0, 42.0):
            np.testing.assert_allclose(optimal_distribution([c] * 5, ), [0.2] * 5)

    def test_minimizes_variance_loss_vs_random_search(self):
        # random-search oracle over the simplex
        from adasamp.feedback import variance_loss

        rng = np.random.default_rng(42)
        for m in (2, 3, 5):
            a = rng.gamma(1.0, 1.0, size=m) + 1e-3
            best = optimal_distribution(a)
            loss_best = variance_loss(best, a, 1)
            for _ in range(500):
                q = rng.dirichlet(np.ones(m))
                if np.all(q > 0):
                    assert loss_best <= variance_loss(q, a, 1) + 1e-12

    def test_all_zero_rejected(self):
        with pytest.raises(ZeroSumError):
            optimal_distribution([0.0, 0.0])


class TestKlDivergence:
    def test_identical_is_zero(self):
        assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_uniform_uniform_zero(self):
        u = uniform_distribution(7)
        assert abs(kl_divergence(u, u)) < 1e-15

    def test_against_independent_scalar_implementation(self):
        x, y = [0.2, 0.8], [0.5, 0.5]
        expected = 0.0
        for xi, yi in zip(x, y):
            expected += xi * math.log(xi / yi)
        assert kl_divergence(x, y) == pytest.approx(expected, abs=1e-15)

    def test_support_mismatch(self):
        with pytest.raises(SupportMismatchError):
            kl_divergence([0.5, 0.5], [1.0, 0.0])

    def test_nonnegative_on_random_pairs(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            m = rng.integers(2, 6)
            x = rng.dirichlet(np.ones(m))
            y = rng.dirichlet(np.ones(m)) + 1e-9
            y = y / y.sum()
            assert kl_divergence(x, y) >= -1e-12


class TestFloorConstraint:
    def test_alpha_range(self):
        with pytest.raises(InvalidAlphaError):
            FloorConstraint(0.0, 3)
        with pytest.raises(InvalidAlphaError):
            FloorConstraint(1.5, 3)

    def test_alpha_one_contains_only_uniform(self):
        c = FloorConstraint(1.0, 4)
        assert c.contains(uniform_distribution(4))
        assert not c.contains([0.3, 0.3, 0.2, 0.2])


class TestFloorKlProjection:
    def test_worked_example_against_grid_oracle(self):
        c = FloorConstraint(0.4, 2)
        y = np.array([0.1, 0.9])
        got = floor_kl_projection(y, c)
        np.testing.assert_allclose(got, [0.2, 0.8], atol=1e-12)
        oracle = grid_projection_m2(y, c)
        np.testing.assert_allclose(got, oracle, atol=2e-5)

    def test_alpha_one_gives_exact_uniform(self):
        c = FloorConstraint(1.0, 5)
        got = floor_kl_projection(np.array([5.0, 1.0, 0.1, 2.0, 9.0]), c)
        assert np.array_equal(got, np.full(5, 1.0 / 5))

    def test_feasible_point_unchanged(self):
        c = FloorConstraint(0.4, 2)
        got = floor_kl_projection(np.array([0.3, 0.7]), c)
        np.testing.assert_allclose(got, [0.3, 0.7], atol=1e-12)

    def test_matches_brute_force_oracle_small_m(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            m = int(rng.integers(2, 4))
            c = FloorConstraint(float(rng.uniform(0.05, 1.0)), m)
            y = rng.gamma(1.0, 1.0, size=m) + 1e-6
            got = floor_kl_projection(y, c)
            oracle = brute_force_projection(y, c)
            np.testing.assert_allclose(got, oracle, atol=1e-6)

    def test_output_in_constraint_set_fuzz(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            m = int(rng.integers(2, 9))
            c = FloorConstraint(float(rng.uniform(0.01, 1.0)), m)
            y = np.exp(rng.normal(0, 3, size=m))
            p = floor_kl_projection(y, c)
            assert np.all(p >= c.floor - 1e-12)
            assert abs(p.sum() - 1.0) <= 1e-9

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            m = int(rng.integers(2, 7))
            c = FloorConstraint(float(rng.uniform(0.05, 0.95)), m)
            y = rng.gamma(2.0, 1.0, size=m) + 1e-6
            perm = rng.permutation(m)
            direct = floor_kl_projection(y[perm], c)
            permuted = floor_kl_projection(y, c)[perm]
            np.testing.assert_allclose(direct, permuted, atol=1e-12)

    def test_scaling_invariance(self):
        c = FloorConstraint(0.3, 4)
        y = np.array([0.2, 1.0, 3.0, 0.01])
        base = floor_kl_projection(y, c)
        for scale in (1e-8, 1e6):
            np.testing.assert_allclose(floor_kl_projection(y * scale, c), base, atol=1e-12)

    def test_rejects_nonpositive(self):
        c = FloorConstraint(0.4, 2)
        with pytest.raises(NonPositiveInputError):
            floor_kl_projection(np.array([0.0, 1.0]), c)

    def test_rejects_nonfinite(self):
        c = FloorConstraint(0.4, 2)
        with pytest.raises(NonFiniteInputError):
            floor_kl_projection(np.array([np.inf, 1.0]), c)


class TestTotalVariation:
    def test_constant_sequence(self):
        u = uniform_distribution(3)
        assert total_variation([u] * 5) == 0.0
        assert total_variation([u]) == 0.0

    def test_maximal_single_step(self):
        assert total_variation([[1.0, 0.0], [0.0, 1.0]]) == pytest.approx(2.0)

    def test_hand_summed_example(self):
        seq = [[0.5, 0.5], [0.2, 0.8], [0.5, 0.5]]
        expected = sum(
            abs(b0 - a0) + abs(b1 - a1)
            for (a0, a1), (b0, b1) in zip(seq[:-1], seq[1:])
        )
        assert total_variation(seq) == pytest.approx(expected)
        assert total_variation(seq) == pytest.approx(1.2)

    def test_subsampling_never_increases(self):
        rng = np.random.default_rng(5)
        seq = [rng.dirichlet(np.ones(4)) for _ in range(20)]
        full = total_variation(seq)
        for k in (2, 3, 5):
            assert total_variation(seq[::k]) <= full + 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            total_variation([[0.5, 0.5], [0.2, 0.3, 0.5]])


class TestProjectionGap:
    def test_inside_constraint_all_zero(self):
        c = FloorConstraint(0.4, 2)
        assert projection_gap([0.3, 0.7], c) == (0.0, 0.0, 0.0)
        assert projection_gap(uniform_distribution(2), c) == (0.0, 0.0, 0.0)

    def test_worked_example(self):
        psi, omega, phi = projection_gap([0.1, 0.9], FloorConstraint(0.4, 2))
        assert psi == pytest.approx(0.1, abs=1e-15)
        assert omega == pytest.approx(1.0 / 7.0, abs=1e-15)
        assert phi == pytest.approx(1.0 / 6.2, abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_bounds_on_random_distributions(self, data):
        m = data.draw(st.integers(2, 8))
        alpha = data.draw(st.floats(0.01, 1.0))
        raw = data.draw(
            st.lists(st.floats(1e-6, 1.0), min_size=m, max_size=m)
        )
        q = np.asarray(raw) / np.sum(raw)
        psi, omega, phi = projection_gap(q, FloorConstraint(alpha, m))
        assert 0.0 <= omega <= 1.0 + 1e-12
        assert psi >= 0.0
        assert phi <= m / alpha + 1e-9
