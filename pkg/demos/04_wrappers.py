"""Wrapper layers: normalization, discretization, incremental control,
stacking, and CSV logging, composed around one environment.
"""

import tempfile
from pathlib import Path

import numpy as np

from vtb.envcore import make_env
from vtb.presets import preset_config
from vtb.wrappers import (
    CsvLogger,
    DiscretizeAction,
    IncrementalAction,
    NormalizeAction,
    NormalizeObservation,
    StackObservations,
)

cfg = preset_config("vtb-datacenter-mixed-continuous-v1")
cfg.run_period = (1, 1, 1, 1)

with tempfile.TemporaryDirectory() as workdir:
    print("= observation normalization + stacking =")
    env = make_env(cfg, output_root=workdir)
    chain = StackObservations(NormalizeObservation(env), k=3)
    obs, _ = chain.reset(seed=0)
    print(f"stacked normalized observation length: {len(obs)} "
          f"(3 x {len(env.describe_spaces()[0].dims)})")
    for _ in range(5):
        res = chain.step((20.0, 23.0))
    print(f"values clipped to [-10, 10]: max |z| = {np.abs(res.observation).max():.2f}")
    chain.close()

    print("\n= action normalization =")
    env = make_env(cfg, output_root=workdir)
    norm = NormalizeAction(env)
    for a in ([-1.0, -1.0], [0.0, 0.0], [1.0, 1.0]):
        print(f"outer {a} -> setpoints {norm.map_action(a).tolist()}")
    norm.close()

    print("\n= discretized actions =")
    env = make_env(cfg, output_root=workdir)
    disc = DiscretizeAction(env)
    table = disc.describe_spaces()[1]
    print(f"{table.count} discrete actions; index 0 -> {table.table[0]}, "
          f"index 71 -> {table.table[71]}")
    disc.close()

    print("\n= incremental control =")
    env = make_env(cfg, output_root=workdir)
    inc = IncrementalAction(env)
    inc.reset(seed=0)
    for delta in ((1.0, 0.0), (1.0, 1.0), (1.0, -1.0)):
        inc.step(delta)
        print(f"delta {delta} -> setpoints {inc.setpoints}")
    inc.close()

    print("\n= csv logging =")
    env = make_env(cfg, output_root=workdir)
    monitor = Path(workdir) / "monitor.csv"
    logger = CsvLogger(env, path=monitor)
    logger.reset(seed=0)
    for _ in range(10):
        logger.step((20.0, 23.0))
    logger.close()
    lines = monitor.read_text().splitlines()
    print(f"wrote {len(lines) - 1} rows; columns: {lines[0][:72]}...")
