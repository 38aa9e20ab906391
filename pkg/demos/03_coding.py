"""Bit protection: repetition/majority, block codes, tree codes, line modes.

Three interchangeable mechanisms secure a noiseless line protocol over
noisy links; at eps0 = 0 all of them reproduce its outputs exactly, and
their costs differ exactly as the scaling experiments measure.
"""

import numpy as np

from noisyplanar import (
    BlockCode,
    Channel,
    LinkSimConfig,
    NoiseModel,
    RepetitionScheme,
    TreeCode,
    majority_decode,
    or_chain,
    place_nodes,
    derive_params,
    simulate_line,
)

rng = np.random.default_rng(1)

# Repetition + majority; collisions enter as erasures (None) and are skipped.
scheme = RepetitionScheme(9)
print(f"repeat-9 majority error at flip rate 0.1: {scheme.error_bound(0.1):.2e}")
print("majority over [1, None, 0, 1]:", majority_decode([1, None, 0, 1]))

# Seeded random linear block code, nearest-codeword decoding.
code = BlockCode(msg_bits=4, block_len=16, seed=2)
print(f"\nblock code (16,4) seed 2: minimum distance {code.min_distance}")
word = code.encode(11)
word[3] ^= 1
word[9] ^= 1
print("message 11 with two flipped bits decodes to:", code.decode(word))

# Tree code: one symbol per path prefix, siblings always labeled apart.
tc = TreeCode(depth=10, alphabet=16, seed=1)
path = tuple(rng.integers(0, 2, 10))
symbols = tc.encode(path).copy()
symbols[4] = (symbols[4] + 1) % 16
print(f"\ntree code depth 10: corrupted symbol stream decodes back to the path: "
      f"{tc.decode(symbols) == path}")

# One 6-cell array carrying a running OR, all three simulation modes.
params = derive_params(1000, 0.5)
inst = place_nodes(8, seed=0)
values = [0, 1, 0, 0, 0, 0]
print(f"\n6-cell array, values {values}, eps0 = 0.05:")
for mode in ("repetition", "treecode", "abstract"):
    ch = Channel(inst, params, NoiseModel(0.05), np.random.default_rng(42))
    res = simulate_line(or_chain(values), LinkSimConfig(mode=mode, r3=21), ch)
    print(f"  {mode:10s} root value {res.values[-1]}, "
          f"{res.slots:4d} logical slots, {res.tx:4d} transmissions")
