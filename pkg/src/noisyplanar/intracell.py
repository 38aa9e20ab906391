"""Intra-cell computation (stage 1).

Every cell behaves as a single-hop cluster scheduled by the reuse coloring:
all cells of one color class run their scripts in lockstep while other
classes stay silent.  For the MAX protocol the script is

  discovery     -- members broadcast their bit a fixed odd number of times in
                   ascending id order; the center majority-decodes each member
                   and names the least id seen holding a 1 as the witness;
  identity      -- the center broadcasts the witness's in-cell index through
                   the block code, one codeword bit per slot, and every member
                   decodes it independently;
  confirmation  -- slots reserved for "the witness": every member believing
                   itself the witness transmits its bit; the center majority-
                   decodes, treating collisions as erasures (all-erased
                   defaults to 0).

The histogram variant replaces the script with per-member repetition: the
center majority-decodes each member's bit and counts the ones.

Discovery and identity schedules are pure functions of the geometry and the
configuration; only the confirmation transmitter is data-dependent, which the
run audit treats as a documented exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import Channel, ScheduleClass, TraceEntry
from .coding import BlockCode, RepetitionScheme, smallest_odd_at_least
from .geometry import Cell, CellGrid

__all__ = [
    "Stage1Config",
    "Stage1Result",
    "witness_discovery",
    "distribute_identity",
    "confirm_value",
    "run_stage1_max",
    "run_stage1_hist",
]


@dataclass(frozen=True)
class Stage1Config:
    """Intra-cell constants: repeat counts, miss budget, and the identity code."""

    eps1: float
    c_rep: int
    r2: int
    id_code: BlockCode

    def __post_init__(self):
        if not (0.0 < self.eps1 < 1.0):
            raise ValueError(f"eps1 must lie in (0, 1), got {self.eps1}")
        for name in ("c_rep", "r2"):
            v = getattr(self, name)
            if v < 1 or v % 2 == 0:
                raise ValueError(f"{name} must be odd and positive, got {v}")

    @classmethod
    def for_network(
        cls,
        n: int,
        eps0: float,
        eps1: float = 0.05,
        c_rep: int = 9,
        r2: int | None = None,
        block_len: int | None = None,
        code_seed: int = 404,
    ) -> "Stage1Config":
        """Derive defaults for an n-node network and check the discovery budget.

        r2 defaults to the smallest odd integer >= 3 ln n; the identity code
        carries ceil(log2 n) message bits at rate 1/4.  Construction fails if
        c_rep repetitions cannot keep the per-member majority-flip probability
        within the witness-miss budget at the given eps0.
        """
        if r2 is None:
            r2 = smallest_odd_at_least(3.0 * math.log(n))
        msg_bits = max(1, math.ceil(math.log2(n)))
        code = BlockCode(msg_bits, block_len, seed=code_seed)
        cfg = cls(eps1=eps1, c_rep=c_rep, r2=r2, id_code=code)
        miss = RepetitionScheme(c_rep).error_bound(eps0)
        if miss > eps1:
            raise ValueError(
                f"c_rep={c_rep} gives majority-flip probability {miss:.4g} > eps1={eps1} "
                f"at eps0={eps0}; increase c_rep or relax eps1"
            )
        return cfg

    @property
    def block_len(self) -> int:
        return self.id_code.block_len

    def script_len(self, cell_size: int) -> int:
        """Slots one cell's full MAX script occupies: discovery + identity + confirm."""
        return self.c_rep * cell_size + self.block_len + self.r2


@dataclass
class Stage1Result:
    """Per-cell outcomes of stage 1 plus the metrics consumed producing them."""

    witnesses: dict[int, int] = field(default_factory=dict)
    values: dict[int, int] = field(default_factory=dict)
    counts: dict[int, int] = field(default_factory=dict)
    metrics_delta: dict = field(default_factory=dict)


def _majority_of_copies(bits: np.ndarray, flips: np.ndarray) -> np.ndarray:
    """Decode per-row majorities when every copy repeats the same bit."""
    k = flips.shape[1]
    return (bits ^ (flips.sum(axis=1) > k // 2)).astype(np.int8)


def witness_discovery(cell: Cell, config: Stage1Config, channel: Channel, slot0: int = 0) -> int:
    """Run the discovery schedule in one cell and return the chosen witness.

    Members transmit in ascending id order, c_rep consecutive slots each, for
    exactly c_rep * N transmissions.  The center majority-decodes every member
    (its own broadcasts are noiseless to itself) and picks the least id whose
    decoded bit is 1, falling back to the least id when none is seen.
    """
    members = np.array(cell.members)
    n_members = len(members)
    bits = channel.instance.bits[members]
    slots = slot0 + np.arange(n_members * config.c_rep).reshape(n_members, config.c_rep)
    flips = channel.flip_mask(
        (n_members, config.c_rep), slots=slots, txs=members[:, None], rxs=cell.center
    )
    decoded = _majority_of_copies(bits, flips)
    decoded[members == cell.center] = bits[members == cell.center]

    if channel.trace is not None:
        for p, member in enumerate(members):
            for k in range(config.c_rep):
                channel.trace.stage1.append(
                    TraceEntry("discovery", slot0 + p * config.c_rep + k, cell.index, int(member))
                )
    channel.metrics.add(
        "stage1", tx=config.c_rep * n_members, rx=config.c_rep * n_members * (n_members - 1)
    )

    ones = np.flatnonzero(decoded == 1)
    return int(members[ones[0]]) if len(ones) else int(members[0])


def distribute_identity(
    cell: Cell, witness: int, config: Stage1Config, channel: Channel, slot0: int = 0
) -> list[int]:
    """Broadcast the witness's in-cell index and return who believes it is them.

    The center transmits the codeword once, one bit per slot (block_len
    transmissions exactly); every member nearest-codeword-decodes its own
    noisy copy.  Returns the members whose decode equals their own index --
    the set that will answer in the confirmation slots.
    """
    members = np.array(cell.members)
    n_members = len(members)
    local_witness = int(np.searchsorted(members, witness))
    length = config.block_len

    slots = slot0 + np.arange(length)
    flips = channel.flip_mask(
        (n_members, length), slots=slots[None, :], txs=cell.center, rxs=members[:, None]
    )
    believes = config.id_code.decode_equals(
        local_witness, flips.astype(np.uint8), np.arange(n_members)
    )
    believes[members == cell.center] = witness == cell.center

    if channel.trace is not None:
        for k in range(length):
            channel.trace.stage1.append(
                TraceEntry("identity", slot0 + k, cell.index, int(cell.center))
            )
    channel.metrics.add("stage1", tx=length, rx=length * (n_members - 1))
    return [int(m) for m in members[believes]]


def confirm_value(
    cell: Cell, believers: list[int], config: Stage1Config, channel: Channel, slot0: int = 0
) -> int:
    """Resolve the r2 confirmation slots into the cell's aggregated bit.

    One believer delivers its bit r2 times for a majority decode; several
    believers collide in every slot and no believer leaves silence -- both
    decode to the documented default 0.  A believing center knows its own bit
    noiselessly.
    """
    n_members = cell.size
    n_believers = len(believers)
    if n_believers == 1:
        b = believers[0]
        bit = int(channel.instance.bits[b])
        if b == cell.center:
            value = bit
        else:
            copies = channel.noisy_copies(bit, config.r2, b, cell.center, slot0)
            value = int(copies.sum() * 2 > config.r2)
    else:
        value = 0  # silence or wall-to-wall collisions: every slot is an erasure

    if channel.trace is not None:
        for b in believers:
            for k in range(config.r2):
                channel.trace.stage1.append(
                    TraceEntry("confirmation", slot0 + k, cell.index, int(b), data_dependent=True)
                )
    channel.metrics.add(
        "stage1",
        tx=config.r2 * n_believers,
        rx=config.r2 * (n_members - n_believers) if n_believers else 0,
    )
    return value


def run_stage1_max(
    grid: CellGrid,
    coloring: list[ScheduleClass],
    config: Stage1Config,
    channel: Channel,
) -> Stage1Result:
    """Run discovery, identity, and confirmation in every cell.

    Color classes execute sequentially; cells inside a class run in lockstep,
    so a class occupies c_rep * max_members + block_len + r2 slots.  Noise is
    consumed class by class, cell by cell, phase by phase.
    """
    before = channel.metrics.snapshot()
    result = Stage1Result()
    base = 0
    for cls in coloring:
        max_members = max(grid.cell(j).size for j in cls.cells)
        id_base = base + config.c_rep * max_members
        confirm_base = id_base + config.block_len
        for j in cls.cells:
            cell = grid.cell(j)
            witness = witness_discovery(cell, config, channel, slot0=base)
            believers = distribute_identity(cell, witness, config, channel, slot0=id_base)
            value = confirm_value(cell, believers, config, channel, slot0=confirm_base)
            result.witnesses[j] = witness
            result.values[j] = value
        span = config.script_len(max_members)
        channel.metrics.add("stage1", slots=span)
        base += span
    after = channel.metrics.snapshot()
    result.metrics_delta = {k: after[k] - before[k] for k in before}
    return result


def run_stage1_hist(
    grid: CellGrid,
    coloring: list[ScheduleClass],
    config: Stage1Config,
    channel: Channel,
) -> Stage1Result:
    """Count each cell's ones at its center by per-member repetition.

    Members broadcast their bit r2 times in ascending id order (r2 * N
    transmissions per cell); the center majority-decodes each member and
    reports how many decoded to 1.
    """
    before = channel.metrics.snapshot()
    result = Stage1Result()
    base = 0
    for cls in coloring:
        max_members = max(grid.cell(j).size for j in cls.cells)
        for j in cls.cells:
            cell = grid.cell(j)
            members = np.array(cell.members)
            n_members = len(members)
            bits = channel.instance.bits[members]
            slots = base + np.arange(n_members * config.r2).reshape(n_members, config.r2)
            flips = channel.flip_mask(
                (n_members, config.r2), slots=slots, txs=members[:, None], rxs=cell.center
            )
            decoded = _majority_of_copies(bits, flips)
            decoded[members == cell.center] = bits[members == cell.center]
            result.counts[j] = int(decoded.sum())

            if channel.trace is not None:
                for p, member in enumerate(members):
                    for k in range(config.r2):
                        channel.trace.stage1.append(
                            TraceEntry(
                                "hist_count", base + p * config.r2 + k, cell.index, int(member)
                            )
                        )
            channel.metrics.add(
                "stage1", tx=config.r2 * n_members, rx=config.r2 * n_members * (n_members - 1)
            )
        span = config.r2 * max_members
        channel.metrics.add("stage1", slots=span)
        base += span
    after = channel.metrics.snapshot()
    result.metrics_delta = {k: after[k] - before[k] for k in before}
    return result
