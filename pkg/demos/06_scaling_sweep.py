"""Scaling sweep: transmissions stay linear while time grows as sqrt(n/ln n).

Normalized columns should sit in a flat band across an 8x range of n:
tx_total/n (linear transmissions), slots_total/sqrt(n/ln n) (optimal time),
repetition-mode stage-2 slots/sqrt(n ln n) (the fallback's time penalty),
and stage-1 EM1/(n ln n) (listening energy).
"""

from noisyplanar import ExperimentConfig, sweep

cfg = ExperimentConfig(
    protocol="max",
    n=(1000, 2000, 4000, 8000),
    trials=5,
    eps0=0.1,
    mode="abstract",
    bit_p=0.3,
    base_seed=33,
)
table = sweep(cfg)

print(f"{'n':>6} {'tx/n':>8} {'slots/√(n/ln n)':>16} {'rep2/√(n ln n)':>15} "
      f"{'EM1₁/(n ln n)':>14} {'hist2 tx/n':>11}")
for row in table.rows:
    print(f"{row['n']:>6} {row['tx_per_n']:>8.2f} {row['slots_norm']:>16.1f} "
          f"{row['slots_stage2_repetition_norm']:>15.1f} "
          f"{row['em1_stage1_norm']:>14.2f} {row['hist_stage2_tx_per_n']:>11.2f}")

print("\nband ratios (max/min of each normalized column):")
for col, ratio in table.band_ratios.items():
    print(f"  {col}: {ratio:.3f}")

print("\nrepetition-mode stage-2 slots vs the abstract mode (the log-n penalty):")
for row in table.rows:
    print(f"  n={row['n']}: x{row['slots_stage2_repetition'] / row['slots_stage2']:.2f}")

print("\nCSV table:")
print(table.to_csv(), end="")
