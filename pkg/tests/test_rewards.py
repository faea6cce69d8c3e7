import math

import numpy as np
import pytest

from vtb.rewards import (
    ExponentialRewardSpec,
    LinearRewardSpec,
    MissingOccupancy,
    RewardInput,
    ScheduleRewardSpec,
    comfort_violation,
    evaluate,
    exponential_reward,
    linear_reward,
    schedule_reward,
    spec_from_dict,
    spec_to_dict,
)


def inp(temps=(20.0, 22.0), power=0.0, date=(1, 15, 12), occupancy=None):
    return RewardInput(
        zone_temps=temps, electric_power=power, sim_date=date, occupancy=occupancy
    )


class TestComfortViolation:
    def test_in_range(self):
        assert comfort_violation([20.0, 22.0], (18.0, 27.0)) == 0.0

    def test_closed_form(self):
        assert comfort_violation([17.0, 29.0], (18.0, 27.0)) == pytest.approx(3.0)

    def test_boundaries_inclusive(self):
        assert comfort_violation([18.0, 27.0], (18.0, 27.0)) == 0.0


class TestLinearReward:
    def test_reference_point_exact(self):
        # omega=0.5, lambda_P=0.00005, P=10000 W, temps in range -> -0.25.
        out = linear_reward(inp(power=10000.0), LinearRewardSpec())
        assert out.total == -0.25
        assert out.energy_term == -0.25
        assert out.comfort_term == 0.0

    def test_energy_weight_one_ignores_comfort(self):
        spec = LinearRewardSpec(energy_weight=1.0)
        out = linear_reward(inp(temps=(5.0, 40.0), power=1000.0), spec)
        assert out.comfort_term == 0.0
        assert out.total == out.energy_term

    def test_hand_evaluated_violation(self):
        spec = LinearRewardSpec()
        out = linear_reward(inp(temps=(17.0, 29.0), power=0.0), spec)
        assert out.violation_degrees == pytest.approx(3.0)
        assert out.total == pytest.approx(-1.5)

    def test_decomposition_identity(self):
        rng = np.random.default_rng(0)
        spec = LinearRewardSpec()
        for _ in range(200):
            temps = tuple(rng.uniform(10, 35, size=2))
            power = float(rng.uniform(0, 50000))
            out = linear_reward(inp(temps=temps, power=power), spec)
            assert out.total == pytest.approx(
                out.energy_term + out.comfort_term, abs=1e-12
            )
            assert out.energy_term <= 0 and out.comfort_term <= 0
            assert (out.comfort_term == 0) == (out.violation_degrees == 0)

    def test_power_gradient(self):
        # dr/dP = -omega * lambda_P, checked by finite differences.
        spec = LinearRewardSpec(energy_weight=0.7, lambda_energy=3e-5)
        for p in (100.0, 5000.0, 40000.0):
            r1 = linear_reward(inp(power=p), spec).total
            r2 = linear_reward(inp(power=p + 1.0), spec).total
            grad = r2 - r1
            expected = -spec.energy_weight * spec.lambda_energy
            assert grad == pytest.approx(expected, rel=1e-9)

    def test_season_switch(self):
        spec = LinearRewardSpec(
            range_comfort_winter=(18.0, 27.0), range_comfort_summer=(23.0, 26.0)
        )
        hot = inp(temps=(22.0,), power=0.0, date=(7, 10, 12))
        cold = inp(temps=(22.0,), power=0.0, date=(1, 10, 12))
        assert linear_reward(hot, spec).violation_degrees == pytest.approx(1.0)
        assert linear_reward(cold, spec).violation_degrees == 0.0
        # Window boundaries are inclusive on both ends.
        assert linear_reward(
            inp(temps=(22.0,), date=(6, 1, 0)), spec
        ).violation_degrees == pytest.approx(1.0)
        assert linear_reward(
            inp(temps=(22.0,), date=(9, 30, 23)), spec
        ).violation_degrees == pytest.approx(1.0)

    def test_equal_ranges_make_date_irrelevant(self):
        spec = LinearRewardSpec()
        a = linear_reward(inp(temps=(17.5,), power=123.0, date=(2, 1, 3)), spec)
        b = linear_reward(inp(temps=(17.5,), power=123.0, date=(8, 1, 3)), spec)
        assert a == b


class TestExponentialReward:
    def test_zero_violation_equals_linear(self):
        spec = ExponentialRewardSpec(exponent_scale=1.0)
        out = exponential_reward(inp(power=2000.0), spec)
        lin = linear_reward(inp(power=2000.0), LinearRewardSpec())
        assert out.comfort_term == 0.0
        assert out.total == lin.total

    def test_unit_violation_value(self):
        spec = ExponentialRewardSpec(exponent_scale=1.0)
        out = exponential_reward(inp(temps=(17.0,), power=0.0), spec)
        assert out.violation_degrees == pytest.approx(1.0)
        assert out.comfort_term == pytest.approx(-0.5 * (math.e - 1.0))

    def test_dominates_linear_on_grid(self):
        # exp(x) - 1 >= x for x >= 0, so the exponential penalty magnitude
        # is never below the linear one at equal weights.
        lin_spec = LinearRewardSpec()
        exp_spec = ExponentialRewardSpec(exponent_scale=1.0)
        for v in np.linspace(0.0, 8.0, 33):
            i = inp(temps=(18.0 - v,), power=0.0)
            le = linear_reward(i, lin_spec).comfort_term
            ee = exponential_reward(i, exp_spec).comfort_term
            assert -ee >= -le - 1e-12


class TestScheduleReward:
    def test_unoccupied_zero_weight_silences_penalty(self):
        spec = ScheduleRewardSpec(unoccupied_weight=0.0)
        out = schedule_reward(inp(temps=(10.0,), power=0.0, occupancy=0.0), spec)
        assert out.comfort_term == 0.0
        assert out.violation_degrees > 0

    def test_occupied_identity_weight(self):
        spec = ScheduleRewardSpec(occupied_weight=1.0)
        i = inp(temps=(17.0,), power=500.0, occupancy=3.0)
        out = schedule_reward(i, spec)
        lin = linear_reward(i, LinearRewardSpec())
        assert out.total == pytest.approx(lin.total)

    def test_missing_occupancy(self):
        spec = ScheduleRewardSpec()
        with pytest.raises(MissingOccupancy):
            schedule_reward(inp(temps=(17.0,)), spec)


class TestDispatchAndSerde:
    def test_families_agree_without_violation(self):
        i = inp(power=4000.0)
        r_lin = evaluate(i, LinearRewardSpec())
        r_exp = evaluate(i, ExponentialRewardSpec())
        assert r_lin.total == r_exp.total

    def test_custom_callable(self):
        def flat(inp_):
            from vtb.rewards import RewardOutput

            return RewardOutput(-1.0, -1.0, 0.0, 0.0, inp_.electric_power)

        assert evaluate(inp(), flat).total == -1.0

    def test_roundtrip(self):
        for spec in (
            LinearRewardSpec(energy_weight=0.3),
            ExponentialRewardSpec(exponent_scale=2.0),
            ScheduleRewardSpec(unoccupied_weight=0.2),
        ):
            doc = spec_to_dict(spec)
            assert spec_from_dict(doc) == spec

    def test_dict_keys_match_config_surface(self):
        doc = spec_to_dict(LinearRewardSpec())
        for key in (
            "energy_weight",
            "lambda_energy",
            "lambda_temperature",
            "range_comfort_winter",
            "range_comfort_summer",
            "summer_start",
            "summer_final",
        ):
            assert key in doc

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            RewardInput((20.0,), -1.0, (1, 1, 0))
