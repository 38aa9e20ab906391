"""The slotted channel: interference rules, cell coloring, noise.

A listener receives a bit only when exactly one transmitter is inside the
radius and every other transmitter is beyond the guard ring; otherwise it
hears a collision or silence.  Delivered bits flip with probability at most
eps0 < 0.5, independently per receiver.
"""

import numpy as np

from noisyplanar import (
    NoiseModel,
    TxEvent,
    assign_cells,
    color_cells,
    derive_params,
    place_nodes,
    resolve_slot,
)

params = derive_params(5000, delta=0.5)
r = params.radius
rng = np.random.default_rng(0)
noiseless = NoiseModel(0.0)

positions = np.array([
    [0.5, 0.5],            # listener
    [0.5 + 0.5 * r, 0.5],  # close transmitter
    [0.5 - 1.2 * r, 0.5],  # guard-ring interferer
    [0.5, 0.5 - 1.7 * r],  # harmless far transmitter
])

print("one close transmitter alone:")
out = resolve_slot([TxEvent(0, 1, 1)], [0], positions, params, noiseless, rng)
print("  ", out[0])

print("close transmitter plus an interferer inside the guard ring (1.2 r):")
out = resolve_slot([TxEvent(0, 1, 1), TxEvent(0, 2, 0)], [0], positions, params, noiseless, rng)
print("  ", out[0])

print("close transmitter plus a transmitter beyond the guard ring (1.7 r):")
out = resolve_slot([TxEvent(0, 1, 1), TxEvent(0, 3, 0)], [0], positions, params, noiseless, rng)
print("  ", out[0])

# Cells that agree modulo the reuse distance may transmit simultaneously.
grid = assign_cells(place_nodes(5000, 7), params)
classes = color_cells(grid, params)
sizes = [len(c.cells) for c in classes]
print(f"\ncoloring: {len(classes)} classes "
      f"(= interference bound + 1 = {params.interference_bound + 1}), "
      f"{min(sizes)}-{max(sizes)} cells per class")

# A clairvoyant adversary may pick each reception's flip probability, capped
# at eps0; the cap makes it no worse than iid noise in distribution.
def adversary(slot, tx, rx, history):
    return 0.3 if slot % 2 == 0 else 0.0

hostile = NoiseModel(0.3, mode="adversarial", adversary=adversary)
print(f"\nadversarial flip probabilities (cap {hostile.eps0}):",
      [hostile.flip_prob(s, 1, 0, None) for s in range(4)])
