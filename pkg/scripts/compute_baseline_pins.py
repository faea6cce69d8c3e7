"""Recompute the frozen baseline oracle values used by the acceptance suite.

Runs the static and incremental rule-based controllers for 10 episodes on
the stochastic mixed-climate machine-hall preset with seed 42, and the
static schedule on the deterministic variant for the in-range fraction.
Paste the printed literals into tests/test_acceptance.py when the shipped
configs change.
"""

import tempfile
from pathlib import Path

from vtb.bench import ExperimentConfig, run_experiment

STOCHASTIC = "vtb-datacenter-mixed-continuous-stochastic-v1"
DETERMINISTIC = "vtb-datacenter-mixed-continuous-v1"


def main() -> None:
    with tempfile.TemporaryDirectory() as td:
        td = Path(td)
        for kind in ("static", "rbc"):
            res = run_experiment(
                ExperimentConfig(
                    env=STOCHASTIC,
                    controller={"kind": kind},
                    episodes=10,
                    seed=42,
                    out_dir=td / kind,
                )
            )
            m = res.aggregate
            print(f"{kind}:")
            print(f"  mean_reward = {m.mean_reward!r}")
            print(f"  mean_power_W = {m.mean_power_W!r}")
            print(f"  comfort_time_violation_pct = {m.comfort_time_violation_pct!r}")
            print(f"  mean_temp_violation_C = {m.mean_temp_violation_C!r}")

        res = run_experiment(
            ExperimentConfig(
                env=DETERMINISTIC,
                controller={"kind": "static"},
                episodes=1,
                seed=7,
                out_dir=td / "deterministic",
            )
        )
        m = res.aggregate
        in_range_fraction = 1.0 - m.comfort_time_violation_pct / 100.0
        print("deterministic static:")
        print(f"  in_range_fraction = {in_range_fraction!r}")
        print(f"  mean_reward = {m.mean_reward!r}")


if __name__ == "__main__":
    main()
