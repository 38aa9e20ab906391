"""The full MAX/OR pipeline: discovery, identity, confirmation, tree ascent.

Stage 1 finds a witness for each cell (a least-id holder of a 1) and confirms
its bit at the cell center; stage 2 carries the running OR up the spanning
tree in staged linear arrays.  The sink's value is compared against the
oracle, and the result is pushed back out to every node.
"""

import numpy as np

from noisyplanar import ExperimentConfig, LinkSimConfig, distribute_result, oracle
from noisyplanar.harness import run_trial

cfg = ExperimentConfig(
    protocol="max",
    n=(2000,),
    trials=1,
    eps0=0.1,
    mode="abstract",
    bit_source="single-one-at-random",
    base_seed=12,
)
run = run_trial(cfg, 2000, 0)

print(f"n = {run.n}, eps0 = {cfg.eps0}, mode = {cfg.mode}")
print(f"true MAX (oracle): {run.oracle_value}")
print(f"stage-1 cell values hold the max: {run.stage1_value == run.oracle_value}")
print(f"computed at the sink: {run.computed} (correct: {run.correct})")

m = run.metrics
print(f"\ncosts: {m.tx_count} transmissions "
      f"({m.tx_stage1} intra-cell + {m.tx_stage2} inter-cell)")
print(f"       {m.slots_total} physical slots "
      f"({m.slots_stage1} stage 1 + {m.slots_stage2} stage 2)")
print(f"energy: EM1 = {m.em1:.1f} (rx counted), EM2 = {m.em2:.1f} (tx only)")

# Push the sink's bit back down the tree and into every cell.
node_values = distribute_result(
    run.tree,
    run.plan,
    run.computed,
    LinkSimConfig(mode="repetition", r3=run.link_config.r3),
    r2=run.stage1_config.r2,
    channel=run.channel,
    grid=run.grid,
    params=run.params,
    coloring=run.coloring,
)
agree = int((node_values == run.computed).sum())
print(f"\nresult distribution: {agree}/{run.n} nodes hold the sink's value")
print(f"distribution cost: {m.tx_distribute} transmissions, {m.slots_distribute} slots")
