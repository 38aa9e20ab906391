"""Random planar network geometry: node placement, tessellation, spanning tree.

The unit square is tessellated into a grid of square cells sized so that,
for uniformly placed nodes, every cell holds Theta(log n) nodes and all
nodes of a cell are within one hop of each other.  A spanning tree over
the cells (rows toward the sink column, then the sink column toward the
sink row) gives the inter-cell routing structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NetworkInstance",
    "DerivedParams",
    "Cell",
    "CellGrid",
    "SpanningTree",
    "GeometryReport",
    "ProtocolInfeasibleError",
    "place_nodes",
    "derive_params",
    "assign_cells",
    "build_tree",
    "validate_geometry",
]

# Tessellation constants: cell area ~ 2.75 ln(n)/n and radius^2 = 13.75 ln(n)/n,
# which force cell_side <= radius/sqrt(5) so adjacent cell centers are one hop apart.
CELL_DENSITY = 2.75
RADIUS_DENSITY = 13.75

OCCUPANCY_LOWER = 0.091  # times ln n, asymptotic per-cell occupancy band
OCCUPANCY_UPPER = 5.41


class ProtocolInfeasibleError(Exception):
    """Raised when a sampled network cannot support the protocol (empty cell)."""


@dataclass(frozen=True)
class NetworkInstance:
    """A sampled world: node positions in the unit square plus their data bits.

    Node ids are 0..n-1.  ``positions[i]`` is node i's (x, y); ``bits[i]``
    is its one-bit datum.  Identical (n, seed) always reproduces identical
    positions; bits are filled separately by the harness (all-zero default).
    """

    n: int
    seed: int
    positions: np.ndarray
    bits: np.ndarray

    def with_bits(self, bits: np.ndarray) -> "NetworkInstance":
        bits = np.asarray(bits, dtype=np.int8)
        if bits.shape != (self.n,):
            raise ValueError(f"bits must have shape ({self.n},), got {bits.shape}")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must be 0/1 valued")
        return NetworkInstance(self.n, self.seed, self.positions, bits)


@dataclass(frozen=True)
class DerivedParams:
    """All tessellation and interference constants derived from (n, delta).

    grid_dim      cells per side, ceil(sqrt(n / (2.75 ln n)))
    cell_side     1 / grid_dim
    cell_count    grid_dim ** 2
    radius        transmission radius, sqrt(13.75 ln n / n)
    interference_bound   max number of cells whose transmissions can reach
                         into a given cell's neighborhood (guard factor delta)
    link_slot_span       physical slots per logical inter-cell slot,
                         4 * (interference_bound + 1)
    """

    n: int
    delta: float
    grid_dim: int
    cell_side: float
    cell_count: int
    radius: float
    interference_bound: int
    link_slot_span: int

    @property
    def reuse_distance(self) -> int:
        """Grid spacing between cells that may transmit simultaneously."""
        return 2 * math.ceil((1.0 + self.delta) * self.radius / self.cell_side) + 1


@dataclass(frozen=True)
class Cell:
    """One tessellation cell: 1-based row-major index, members, designated center.

    Row 0 is the top strip (largest y).  ``members`` is sorted ascending;
    ``center`` is None only for hand-built degenerate fixtures.
    """

    index: int
    row: int
    col: int
    members: tuple[int, ...]
    center: int | None

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CellGrid:
    """Sequence of cells (row-major, index 1..cell_count) plus the sink choice."""

    cells: tuple[Cell, ...]
    grid_dim: int
    n: int
    sink_cell: int
    sink_node: int

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __getitem__(self, i: int) -> Cell:
        return self.cells[i]

    def cell(self, index: int) -> Cell:
        """Look up a cell by its 1-based row-major index."""
        return self.cells[index - 1]

    def cell_at(self, row: int, col: int) -> Cell:
        return self.cells[row * self.grid_dim + col]

    def occupancies(self) -> np.ndarray:
        return np.array([c.size for c in self.cells], dtype=np.int64)


@dataclass(frozen=True)
class SpanningTree:
    """Spanning tree of cells: parent map, sink, and hop depths.

    Edges run within rows toward the sink's column, then within the sink's
    column toward the sink's row; every edge joins grid-adjacent cells.
    """

    sink_cell: int
    sink_node: int
    grid_dim: int
    parent: dict[int, int]
    depth: dict[int, int]
    children: dict[int, tuple[int, ...]] = field(repr=False, default_factory=dict)

    def degree(self, index: int) -> int:
        d = len(self.children.get(index, ()))
        if index != self.sink_cell:
            d += 1
        return d

    @property
    def max_depth(self) -> int:
        return max(self.depth.values())

    @property
    def max_degree(self) -> int:
        return max(self.degree(j) for j in self.depth)

    def path_to_sink(self, index: int) -> list[int]:
        """Cell indices from ``index`` to the sink, inclusive."""
        path = [index]
        while path[-1] != self.sink_cell:
            path.append(self.parent[path[-1]])
        return path


@dataclass(frozen=True)
class GeometryReport:
    """Audit summary produced by validate_geometry (report-only, never raises)."""

    feasible: bool
    empty_cells: tuple[int, ...]
    occupancy_min: int
    occupancy_max: int
    occupancy_lower_bound: float
    occupancy_upper_bound: float
    occupancy_within_bounds: bool
    max_edge_center_distance: float
    edges_within_radius: bool
    max_degree: int
    max_depth: int


def place_nodes(n: int, seed: int) -> NetworkInstance:
    """Sample n node positions i.i.d. uniform on the unit square.

    Deterministic in (n, seed).  Bits default to all-zero; the experiment
    harness fills them from its configured source.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    rng = np.random.default_rng(seed)
    positions = rng.random((n, 2))
    bits = np.zeros(n, dtype=np.int8)
    return NetworkInstance(n=n, seed=seed, positions=positions, bits=bits)


def derive_params(n: int, delta: float) -> DerivedParams:
    """Derive tessellation and interference constants for an n-node network."""
    if n < 3:
        raise ValueError(f"constants need ln(n) > 1, got n={n}")
    if delta < 0:
        raise ValueError(f"interference guard factor must be >= 0, got {delta}")
    log_n = math.log(n)
    grid_dim = math.ceil(math.sqrt(n / (CELL_DENSITY * log_n)))
    cell_side = 1.0 / grid_dim
    radius = math.sqrt(RADIUS_DENSITY * log_n / n)
    # interference_bound counts the cells inside a (2k+1) x (2k+1) block around
    # a receiver, minus its own; k cells of side cell_side cover (1+delta)*radius.
    k = math.ceil((1.0 + delta) * radius / cell_side)
    interference_bound = (2 * k + 1) ** 2 - 1
    return DerivedParams(
        n=n,
        delta=delta,
        grid_dim=grid_dim,
        cell_side=cell_side,
        cell_count=grid_dim**2,
        radius=radius,
        interference_bound=interference_bound,
        link_slot_span=4 * (interference_bound + 1),
    )


def _grid_coords(positions: np.ndarray, grid_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-open cell membership; the last row/column is closed.

    Columns grow with x; rows count from the top (row 0 holds the largest y).
    A point exactly on an interior boundary belongs to the higher-coordinate
    band, so membership is a partition of the square.
    """
    cols = np.minimum(np.floor(positions[:, 0] * grid_dim).astype(np.int64), grid_dim - 1)
    bands = np.minimum(np.floor(positions[:, 1] * grid_dim).astype(np.int64), grid_dim - 1)
    rows = grid_dim - 1 - bands
    return rows, cols


def assign_cells(instance: NetworkInstance, params: DerivedParams) -> CellGrid:
    """Partition nodes into cells and pick each cell's center.

    Centers are the minimum node id per cell, except the sink cell whose
    center is the sink node (the node nearest (0.5, 0.5), ties to the lower
    id).  Raises ProtocolInfeasibleError if any cell is empty, since the
    protocols require every cell occupied.
    """
    if params.n != instance.n:
        raise ValueError("params were derived for a different n")
    m = params.grid_dim
    rows, cols = _grid_coords(instance.positions, m)
    flat = rows * m + cols

    offsets = instance.positions - 0.5
    sink_node = int(np.argmin(np.einsum("ij,ij->i", offsets, offsets)))
    sink_flat = int(flat[sink_node])

    order = np.argsort(flat, kind="stable")
    sorted_flat = flat[order]
    boundaries = np.searchsorted(sorted_flat, np.arange(m * m + 1))

    cells = []
    empty = []
    for f in range(m * m):
        members = tuple(int(i) for i in np.sort(order[boundaries[f] : boundaries[f + 1]]))
        if not members:
            empty.append(f + 1)
            center = None
        elif f == sink_flat:
            center = sink_node
        else:
            center = members[0]
        cells.append(Cell(index=f + 1, row=f // m, col=f % m, members=members, center=center))

    if empty:
        raise ProtocolInfeasibleError(
            f"cell {empty[0]} of {m * m} is empty (n={instance.n}, seed={instance.seed}); "
            f"the protocol requires every cell occupied"
        )
    return CellGrid(
        cells=tuple(cells), grid_dim=m, n=instance.n, sink_cell=sink_flat + 1, sink_node=sink_node
    )


def build_tree(grid: CellGrid, params: DerivedParams | None = None) -> SpanningTree:
    """Build the spanning tree of cells rooted at the sink cell.

    Within each row the parent is the horizontal neighbor one step toward
    the sink's column; within the sink's column it is the vertical neighbor
    one step toward the sink's row.  Depth is the resulting hop count
    (Manhattan distance to the sink cell).
    """
    if params is not None and params.grid_dim != grid.grid_dim:
        raise ValueError("params grid size does not match the cell grid")
    m = grid.grid_dim
    sink = grid.cell(grid.sink_cell)
    parent: dict[int, int] = {}
    depth: dict[int, int] = {}
    for c in grid:
        depth[c.index] = abs(c.row - sink.row) + abs(c.col - sink.col)
        if c.index == sink.index:
            continue
        if c.col != sink.col:
            step = 1 if c.col < sink.col else -1
            parent[c.index] = grid.cell_at(c.row, c.col + step).index
        else:
            step = 1 if c.row < sink.row else -1
            parent[c.index] = grid.cell_at(c.row + step, c.col).index

    children: dict[int, list[int]] = {}
    for j, p in parent.items():
        children.setdefault(p, []).append(j)
    return SpanningTree(
        sink_cell=sink.index,
        sink_node=grid.sink_node,
        grid_dim=m,
        parent=parent,
        depth=depth,
        children={p: tuple(sorted(ch)) for p, ch in children.items()},
    )


def validate_geometry(
    grid: CellGrid,
    tree: SpanningTree,
    instance: NetworkInstance,
    params: DerivedParams,
) -> GeometryReport:
    """Audit occupancy bounds, edge lengths, tree degree and depth (report-only)."""
    occ = grid.occupancies()
    empty = tuple(c.index for c in grid if c.size == 0)
    log_n = math.log(instance.n)
    lower = OCCUPANCY_LOWER * log_n
    upper = OCCUPANCY_UPPER * log_n

    max_edge = 0.0
    for j, p in tree.parent.items():
        cj, cp = grid.cell(j).center, grid.cell(p).center
        if cj is None or cp is None:
            continue
        d = float(np.linalg.norm(instance.positions[cj] - instance.positions[cp]))
        max_edge = max(max_edge, d)

    return GeometryReport(
        feasible=not empty,
        empty_cells=empty,
        occupancy_min=int(occ.min()),
        occupancy_max=int(occ.max()),
        occupancy_lower_bound=lower,
        occupancy_upper_bound=upper,
        occupancy_within_bounds=bool(occ.min() >= lower and occ.max() <= upper),
        max_edge_center_distance=max_edge,
        edges_within_radius=bool(max_edge <= params.radius),
        max_degree=tree.max_degree,
        max_depth=tree.max_depth,
    )
