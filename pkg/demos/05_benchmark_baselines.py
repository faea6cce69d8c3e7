"""Benchmarking: seeded experiments, metrics tables, and savings comparison.

Runs the static schedule, the incremental rule-based controller, and the
random controller over coarse full-year episodes (hourly control keeps the
demo fast), then prints the savings of each candidate against the static
reference. Monthly savings need every month simulated, hence full years.
"""

import tempfile
from pathlib import Path

from vtb.bench import ExperimentConfig, compare, run_experiment
from vtb.presets import preset_config

PRESET = "vtb-datacenter-mixed-continuous-stochastic-v1"


def coarse_year():
    cfg = preset_config(PRESET)
    cfg.timesteps_per_hour = 1
    cfg.substep_s = 3600.0
    return cfg


with tempfile.TemporaryDirectory() as td:
    results = {}
    for kind in ("static", "rbc", "random"):
        res = run_experiment(
            ExperimentConfig(
                env=coarse_year(),
                controller={"kind": kind},
                episodes=2,
                seed=42,
                out_dir=Path(td) / kind,
            )
        )
        results[kind] = res.aggregate
        m = res.aggregate
        print(
            f"{kind:7s} mean reward {m.mean_reward:8.4f}  "
            f"power {m.mean_power_W / 1000.0:5.2f} kW  "
            f"time in violation {m.comfort_time_violation_pct:5.2f} %  "
            f"mean violation {m.mean_temp_violation_C:.4f} C"
        )

    print("\nsavings vs the static schedule:")
    rows = compare(
        results["static"],
        [results["rbc"], results["random"]],
        labels=["rbc", "random"],
    )
    for row in rows:
        monthly = row["monthly_power_savings_pct"]
        print(
            f"  {row['label']:7s} total {row['total_power_savings_pct']:6.2f} %  "
            f"Jan {monthly[0]:6.2f} %  Jul {monthly[6]:6.2f} %  "
            f"violation delta {row['mean_temp_violation_delta_C']:+.4f} C"
        )
