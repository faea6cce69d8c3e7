"""The agent loop: reset, step, observations, rewards, episode end.

Runs one simulated day of the stochastic machine-hall preset under the
static schedule and prints a few steps of the exchange.
"""

import tempfile

from vtb.envcore import make_env
from vtb.presets import preset_config

cfg = preset_config("vtb-datacenter-mixed-continuous-stochastic-v1")
cfg.run_period = (7, 1, 7, 1)  # one July day

with tempfile.TemporaryDirectory() as workdir:
    env = make_env(cfg, output_root=workdir)
    obs_spec, act_spec = env.describe_spaces()
    print("observation dims:", ", ".join(obs_spec.names))
    print("action dims:     ", ", ".join(
        f"{d.name} in [{d.low:g}, {d.high:g}]" for d in act_spec.dims))
    print(f"episode length:   {env.episode_steps} steps\n")

    obs, info = env.reset(seed=1)
    print(f"reset: outdoor {obs[0]:.1f} C, zones "
          f"{info['zone_temperatures'][0]:.1f} / {info['zone_temperatures'][1]:.1f} C")

    total = 0.0
    while True:
        res = env.step((20.0, 23.0))
        total += res.reward
        if res.info["timestep"] % 24 == 0 or res.truncated:
            print(
                f"step {res.info['timestep']:3d}  {res.info['hour']:02d}:00  "
                f"outdoor {res.observation[0]:6.2f} C  "
                f"zones {res.info['zone_temperatures'][0]:5.2f}/"
                f"{res.info['zone_temperatures'][1]:5.2f} C  "
                f"power {res.info['power_W'] / 1000.0:5.2f} kW  "
                f"reward {res.reward:7.4f}"
            )
        if res.truncated:
            break
    print(f"\nepisode total reward {total:.3f} "
          f"(mean {total / env.episode_steps:.4f} per step)")
    env.close()
