"""Mirror-descent sampler: multiplicative update, projection step, schedules."""

import math

import numpy as np
import pytest

from adasamp.feedback import BanditFeedback
from adasamp.osmd import EXPONENT_CAP, OsmdSampler, RateSchedule, eta_star, multiplicative_update
from adasamp.simplex import FloorConstraint, floor_kl_projection, uniform_distribution
from tests.test_simplex import brute_force_projection


def fb_single(client, a_value, k=1):
    return BanditFeedback(K=k, multiplicities={client: k}, observed={client: a_value})


class TestRateSchedule:
    def test_constant(self):
        r = RateSchedule.constant(0.5)
        assert r(1) == r(100) == 0.5

    def test_list_holds_last(self):
        r = RateSchedule.from_list([3.0, 2.0, 1.0])
        assert r(1) == 3.0 and r(3) == 1.0 and r(10) == 1.0

    def test_increasing_rejected(self):
        with pytest.raises(ValueError):
            RateSchedule.from_list([1.0, 2.0])

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            RateSchedule.constant(0.0)


class TestMultiplicativeUpdate:
    def test_zero_observation_identity(self):
        p = np.array([0.4, 0.6])
        out = multiplicative_update(p, fb_single(0, 0.0), 0.5)
        np.testing.assert_array_equal(out, p)

    def test_unobserved_entry_unchanged(self):
        p = np.array([0.4, 0.6])
        out = multiplicative_update(p, fb_single(0, 1.0), 0.01)
        assert out[1] == p[1]
        assert out[0] > p[0]

    def test_exponent_arithmetic(self):
        p = np.array([0.5, 0.5])
        out = multiplicative_update(p, fb_single(0, 1.0, k=1), 0.01)
        expected = 0.5 * math.exp(0.01 * 1.0 / (1 * 0.5**3))
        assert out[0] == pytest.approx(expected, rel=1e-15)
        assert math.isclose(out[0], 0.5 * math.exp(0.08))

    def test_cap_prevents_overflow(self, caplog):
        p = np.array([0.5, 0.5])
        with caplog.at_level("WARNING"):
            out = multiplicative_update(p, fb_single(0, 1e12), 1e6)
        assert np.isfinite(out).all()
        assert out[0] == pytest.approx(0.5 * math.exp(EXPONENT_CAP))
        assert any("clamped" in r.message for r in caplog.records)

    def test_separate_sampling_distribution(self):
        q = np.array([0.3, 0.7])
        s = np.array([0.6, 0.4])
        out = multiplicative_update(q, fb_single(0, 2.0), 0.05, sampling=s)
        expected = 0.3 * math.exp(0.05 * 2.0 / (1 * 0.3**2 * 0.6))
        assert out[0] == pytest.approx(expected, rel=1e-15)


class TestOsmdStep:
    def test_alpha_one_always_uniform(self):
        sampler = OsmdSampler(FloorConstraint(1.0, 3), RateSchedule.constant(5.0))
        for a_val in (0.0, 1.0, 100.0):
            sampler.step(fb_single(0, a_val))
            assert np.array_equal(sampler.current, np.full(3, 1.0 / 3))

    def test_zero_feedback_keeps_current(self):
        sampler = OsmdSampler(FloorConstraint(0.4, 2), RateSchedule.constant(1.0))
        before = sampler.current.copy()
        sampler.step(fb_single(1, 0.0))
        np.testing.assert_allclose(sampler.current, before, atol=1e-12)

    def test_worked_projection_example(self):
        # one large observation pushes the observed client to the ceiling
        sampler = OsmdSampler(FloorConstraint(0.4, 2), RateSchedule.constant(1.0))
        sampler.step(fb_single(0, 0.5))
        np.testing.assert_allclose(sampler.current, [0.8, 0.2], atol=1e-12)
        oracle = brute_force_projection(
            np.array([0.5 * math.exp(4.0), 0.5]), FloorConstraint(0.4, 2)
        )
        np.testing.assert_allclose(sampler.current, oracle, atol=1e-9)

    def test_state_remains_feasible_fuzz(self):
        rng = np.random.default_rng(41)
        c = FloorConstraint(0.3, 6)
        sampler = OsmdSampler(c, RateSchedule.constant(0.05))
        for _ in range(10_000):
            m = int(rng.integers(0, 6))
            k = int(rng.integers(1, 4))
            fb = BanditFeedback(
                K=k, multiplicities={m: k}, observed={m: float(rng.gamma(1, 1))}
            )
            sampler.step(fb)
            assert np.all(sampler.current >= c.floor - 1e-12)
            assert abs(sampler.current.sum() - 1.0) <= 1e-9

    def test_monotone_influence_of_observation(self):
        c = FloorConstraint(0.2, 4)
        base = np.array([0.3, 0.3, 0.2, 0.2])
        outs = []
        for a_val in (0.1, 0.5, 1.0, 5.0):
            s = OsmdSampler(c, RateSchedule.constant(0.2), init=base)
            s.step(fb_single(1, a_val))
            outs.append(s.current[1])
        assert all(x <= y + 1e-15 for x, y in zip(outs[:-1], outs[1:]))

    def test_order_preservation(self):
        rng = np.random.default_rng(43)
        c = FloorConstraint(0.35, 5)
        for _ in range(100):
            s = OsmdSampler(c, RateSchedule.constant(0.3))
            for _ in range(3):
                m = int(rng.integers(0, 5))
                s.step(fb_single(m, float(rng.gamma(1, 1))))
            tilted = multiplicative_update(s.current, fb_single(2, 1.0), 0.3)
            projected = floor_kl_projection(tilted, c)
            order = np.argsort(tilted, kind="stable")
            assert np.all(np.diff(projected[order]) >= -1e-15)

    def test_init_must_be_feasible(self):
        with pytest.raises(ValueError):
            OsmdSampler(
                FloorConstraint(0.5, 2),
                RateSchedule.constant(1.0),
                init=np.array([0.05, 0.95]),
            )

    def test_warm_start_accepted(self):
        s = OsmdSampler(
            FloorConstraint(0.4, 2), RateSchedule.constant(1.0), init=np.array([0.3, 0.7])
        )
        np.testing.assert_allclose(s.current, [0.3, 0.7])


class TestEtaStar:
    def test_decreases_with_scale_and_horizon(self):
        base = eta_star(100, 5, 0.4, 1.0, 3.0, 2000)
        assert eta_star(100, 5, 0.4, 2.0, 3.0, 2000) < base
        assert eta_star(100, 5, 0.4, 1.0, 3.0, 8000) < base

    def test_closed_form_value(self):
        got = eta_star(10, 2, 0.5, 2.0, 1.5, 100)
        expected = (
            4 * 0.125 / (1000 * 2.0) * math.sqrt((math.log(10) + 2 * math.log(20) * 1.5) / 200)
        )
        assert got == pytest.approx(expected, rel=1e-12)
