"""Training the cross-entropy controller on a shortened environment.

A desk-scale run: six simulated weeks per episode at hourly control, a
small population. Prints the learning curve and evaluates the trained
policy against the static schedule on held-out episodes of the same
environment.
"""

import tempfile
from pathlib import Path

from vtb.bench import ExperimentConfig, run_experiment
from vtb.controllers import CemConfig, cem_train, save_policy
from vtb.envcore import make_env
from vtb.presets import preset_config

PRESET = "vtb-datacenter-mixed-continuous-stochastic-v1"


def six_weeks():
    cfg = preset_config(PRESET)
    cfg.run_period = (1, 1, 2, 11)
    cfg.timesteps_per_hour = 1
    cfg.substep_s = 3600.0
    return cfg


with tempfile.TemporaryDirectory() as td:
    env = make_env(six_weeks(), output_root=td)
    policy, curve = cem_train(
        env,
        CemConfig(population=24, elite_frac=0.25, iterations=25,
                  init_std=0.5, eval_every=5, seed=1),
    )
    env.close()
    print("iteration | population mean | best candidate")
    for i in range(0, len(curve.iteration), 4):
        print(f"{curve.iteration[i]:9d} | {curve.mean_reward[i]:15.4f} | "
              f"{curve.max_reward[i]:14.4f}")

    ppath = Path(td) / "policy.json"
    save_policy(policy, ppath)

    trained = run_experiment(ExperimentConfig(
        env=six_weeks(), controller={"kind": "policy", "path": str(ppath)},
        episodes=4, seed=99, out_dir=Path(td) / "eval-policy"))
    static = run_experiment(ExperimentConfig(
        env=six_weeks(), controller={"kind": "static"},
        episodes=4, seed=99, out_dir=Path(td) / "eval-static"))

    print(f"\ntrained policy:  reward {trained.aggregate.mean_reward:.4f}, "
          f"power {trained.aggregate.mean_power_W / 1000:.2f} kW, "
          f"violation {trained.aggregate.mean_temp_violation_C:.4f} C")
    print(f"static schedule: reward {static.aggregate.mean_reward:.4f}, "
          f"power {static.aggregate.mean_power_W / 1000:.2f} kW")
    better = trained.aggregate.mean_reward > static.aggregate.mean_reward
    print("trained policy beats the static schedule" if better
          else "static schedule still ahead; raise iterations or population")
