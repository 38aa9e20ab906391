"""Inter-cell computation (stage 2) over the spanning tree of cells.

The tree is processed in sub-stages: each row is split into consecutive
linear arrays of at most ``levels_per_stage`` hops, run outer-to-inner toward
the sink's column, and the sink's column is then processed the same way
toward the sink.  Arrays inside one sub-stage are disjoint except that two
arrays may share their root (the two sides of a row meeting on the axis).

Each array runs a noiseless line protocol -- running OR for MAX, a pipelined
bit-serial adder for the histogram -- protected by one of the three link
simulation modes.  One logical slot (a window in which every active tree link
fires once without protocol-model collisions) costs ``link_slot_span``
physical slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import Channel
from .coding import LineProtocol, LinkSimConfig, majority_decode, or_chain, simulate_line
from .geometry import CellGrid, DerivedParams, SpanningTree

__all__ = [
    "CellArray",
    "Substage",
    "SubstagePlan",
    "build_substages",
    "count_bits_for",
    "serial_add_step",
    "adder_chain",
    "run_substage_max",
    "run_substage_hist",
    "run_stage2_max",
    "run_stage2_hist",
    "distribute_result",
]


@dataclass(frozen=True)
class CellArray:
    """A linear array of cell indices, deepest cell first, root last."""

    cells: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.cells)

    @property
    def root(self) -> int:
        return self.cells[-1]


@dataclass(frozen=True)
class Substage:
    phase: str  # "rows-to-axis" | "axis-to-sink"
    arrays: tuple[CellArray, ...]


@dataclass(frozen=True)
class SubstagePlan:
    levels_per_stage: int
    stages: tuple[Substage, ...]

    @property
    def arrays(self) -> list[CellArray]:
        return [a for s in self.stages for a in s.arrays]


def count_bits_for(n: int) -> int:
    """Bits needed to stream any count of ones among n nodes (0..n inclusive)."""
    return math.ceil(math.log2(n + 1))


def _segment(chain: list[int], max_hops: int) -> list[tuple[int, ...]]:
    """Split a chain (outer cell first) into consecutive arrays of <= max_hops."""
    hops = len(chain) - 1
    cuts = list(range(0, hops, max_hops)) + [hops]
    return [tuple(chain[a : b + 1]) for a, b in zip(cuts, cuts[1:])]


def build_substages(
    tree: SpanningTree, params: DerivedParams, levels_per_stage: int | None = None
) -> SubstagePlan:
    """Partition the tree into staged linear arrays of ~ln(n) hops each.

    Row chains flow toward the sink's column and are processed outer-to-inner;
    the sink's column then flows toward the sink.  Concatenating the arrays
    that contain a given cell traces that cell's tree path to the sink.
    """
    if levels_per_stage is None:
        levels_per_stage = max(1, math.ceil(math.log(params.n)))
    m = tree.grid_dim
    sink_row, sink_col = (tree.sink_cell - 1) // m, (tree.sink_cell - 1) % m
    idx = lambda r, c: r * m + c + 1

    row_chains: list[list[int]] = []
    for r in range(m):
        if sink_col > 0:
            row_chains.append([idx(r, c) for c in range(0, sink_col + 1)])
        if sink_col < m - 1:
            row_chains.append([idx(r, c) for c in range(m - 1, sink_col - 1, -1)])
    col_chains: list[list[int]] = []
    if sink_row > 0:
        col_chains.append([idx(r, sink_col) for r in range(0, sink_row + 1)])
    if sink_row < m - 1:
        col_chains.append([idx(r, sink_col) for r in range(m - 1, sink_row - 1, -1)])

    stages: list[Substage] = []
    for phase, chains in (("rows-to-axis", row_chains), ("axis-to-sink", col_chains)):
        segmented = [_segment(chain, levels_per_stage) for chain in chains]
        depth = max((len(s) for s in segmented), default=0)
        for level in range(depth):
            arrays = tuple(CellArray(s[level]) for s in segmented if len(s) > level)
            stages.append(Substage(phase=phase, arrays=arrays))
    return SubstagePlan(levels_per_stage=levels_per_stage, stages=tuple(stages))


def serial_add_step(carry: int, child_bit: int, own_bit: int) -> tuple[int, int]:
    """One full-adder step of the least-significant-first bit stream."""
    s = carry + child_bit + own_bit
    return s & 1, s >> 1


def adder_chain(counts: Sequence[int], width: int) -> LineProtocol:
    """Pipelined bit-serial addition along an array, streaming LSB first.

    The deepest node streams its count's bits; each interior node lags one
    round, full-adding its own count into the passing stream, so the schedule
    closes after q + width - 1 rounds.  All arithmetic is modulo 2^width --
    the stream simply never carries a higher bit.
    """
    vals = [int(c) for c in counts]
    q = len(vals)
    if q < 2:
        raise ValueError("a line protocol needs at least two nodes")
    mod = 1 << width
    for c in vals:
        if not (0 <= c < mod):
            raise ValueError(f"count {c} does not fit in {width} bits")

    def incoming(i: int, child: Sequence[int], upto: int) -> int:
        """Value of the child stream's bits 0..upto-1 (known dummies are zero)."""
        if i == 0:
            return 0
        total = 0
        for k in range(upto):
            pos = i + k - 1  # child (node i-1) sends its bit k in round i+k
            if pos < len(child):
                total += int(child[pos]) << k
        return total

    def sent_bit(i: int, t: int, child: Sequence[int]) -> int:
        k = t - (i + 1)
        if not (0 <= k < width):
            return 0
        low = (1 << (k + 1)) - 1
        return ((incoming(i, child, k + 1) & low) + (vals[i] & low)) >> k & 1

    def node_value(i: int, child: Sequence[int]) -> int:
        return (incoming(i, child, width) + vals[i]) % mod

    return LineProtocol(
        q=q,
        rounds=q + width - 1,
        sent_bit=sent_bit,
        node_value=node_value,
        payload_rounds=lambda i: range(i + 1, i + 1 + width),
        corrupt=lambda rng: int(rng.integers(0, mod)),
    )


def _array_endpoints(array: CellArray, grid: CellGrid) -> list[tuple[int, int]]:
    centers = [grid.cell(j).center for j in array.cells]
    return [(centers[i], centers[i + 1]) for i in range(len(centers) - 1)]


def run_substage_max(
    array: CellArray,
    values: dict[int, int],
    config: LinkSimConfig,
    channel: Channel,
    grid: CellGrid,
):
    """Carry the running OR up one array; returns the line-simulation result."""
    proto = or_chain([values[j] for j in array.cells])
    return simulate_line(proto, config, channel, _array_endpoints(array, grid))


def run_substage_hist(
    array: CellArray,
    counts: dict[int, int],
    width: int,
    config: LinkSimConfig,
    channel: Channel,
    grid: CellGrid,
):
    """Stream subtree counts up one array through the pipelined adder."""
    proto = adder_chain([counts[j] for j in array.cells], width)
    return simulate_line(proto, config, channel, _array_endpoints(array, grid))


def _run_stage2(plan, state, config, channel, grid, params, run_array):
    for stage in plan.stages:
        stage_logical = 0
        for array in stage.arrays:
            res = run_array(array, state)
            state[array.root] = res.values[-1]
            # Every inter-cell transmission targets a single center.
            channel.metrics.add("stage2", tx=res.tx, rx=res.tx)
            stage_logical = max(stage_logical, res.slots)
        channel.metrics.add("stage2", slots=stage_logical * params.link_slot_span)
        if channel.trace is not None:
            channel.trace.stage2_stages.append([a.cells for a in stage.arrays])
    return state


def run_stage2_max(
    plan: SubstagePlan,
    stage1_values: dict[int, int],
    config: LinkSimConfig,
    channel: Channel,
    grid: CellGrid,
    params: DerivedParams,
    tree: SpanningTree,
) -> int:
    """Aggregate the per-cell bits up the tree; returns the value at the sink.

    Arrays of one sub-stage run in parallel, so a sub-stage costs its longest
    array's logical slots times the link slot span; transmissions accumulate
    per array (r3 per link in abstract mode, per-bit repetition otherwise).
    """
    state = dict(stage1_values)
    state = _run_stage2(
        plan,
        state,
        config,
        channel,
        grid,
        params,
        lambda a, s: run_substage_max(a, s, config, channel, grid),
    )
    return state[tree.sink_cell]


def run_stage2_hist(
    plan: SubstagePlan,
    stage1_counts: dict[int, int],
    config: LinkSimConfig,
    channel: Channel,
    grid: CellGrid,
    params: DerivedParams,
    tree: SpanningTree,
    width: int | None = None,
) -> int:
    """Sum the per-cell counts up the tree; returns the total at the sink."""
    if width is None:
        width = count_bits_for(params.n)
    state = dict(stage1_counts)
    state = _run_stage2(
        plan,
        state,
        config,
        channel,
        grid,
        params,
        lambda a, s: run_substage_hist(a, s, width, config, channel, grid),
    )
    return state[tree.sink_cell]


def distribute_result(
    tree: SpanningTree,
    plan: SubstagePlan,
    value: int,
    config: LinkSimConfig,
    r2: int,
    channel: Channel,
    grid: CellGrid,
    params: DerivedParams,
    coloring=None,
) -> np.ndarray:
    """Push the sink's one-bit result back to every node.

    The sub-stage plan runs in reverse: each array relays the bit from its
    root toward its deepest cell, r3 repetitions per link with majority
    decoding.  Every center then broadcasts the bit r2 times inside its cell
    and members majority-decode, for (cell_count - 1) * r3 + cell_count * r2
    transmissions in total.
    """
    down: dict[int, int] = {tree.sink_cell: int(value)}
    for stage in reversed(plan.stages):
        stage_slots = 0
        for array in stage.arrays:
            cells = array.cells
            centers = [grid.cell(j).center for j in cells]
            v = down[array.root]
            for i in range(len(cells) - 2, -1, -1):
                copies = channel.noisy_copies(
                    v, config.r3, centers[i + 1], centers[i], channel.slot_cursor
                )
                channel.slot_cursor += config.r3
                v = majority_decode(copies)
                down[cells[i]] = v
            link_count = len(cells) - 1
            channel.metrics.add("distribute", tx=link_count * config.r3, rx=link_count * config.r3)
            stage_slots = max(stage_slots, link_count * config.r3)
        channel.metrics.add("distribute", slots=stage_slots * params.link_slot_span)

    node_values = np.zeros(grid.n, dtype=np.int8)
    if coloring is None:
        from .channel import color_cells

        coloring = color_cells(grid, params)
    for cls in coloring:
        for j in cls.cells:
            cell = grid.cell(j)
            v = down[j]
            node_values[cell.center] = v
            for member in cell.members:
                if member == cell.center:
                    continue
                copies = channel.noisy_copies(v, r2, cell.center, member, channel.slot_cursor)
                node_values[member] = majority_decode(copies)
            channel.slot_cursor += r2
            channel.metrics.add("distribute", tx=r2, rx=r2 * (cell.size - 1))
        channel.metrics.add("distribute", slots=r2)
    return node_values
