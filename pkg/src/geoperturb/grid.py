"""Discretized 3D spatial model.

A region is carved into a lattice of cells (powers of two per axis).
Distances are Euclidean between cell centers; traversal orders for the
protection-set search come from a 3D Hilbert curve rendered under each of
the 24 proper rotations of the cube.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product

import numpy as np

__all__ = [
    "LocationGrid",
    "HilbertOrder",
    "build_grid",
    "distance3",
    "distance2",
    "hilbert_orders",
    "proper_rotations",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


class LocationGrid:
    """Immutable cell lattice with real-space centers.

    Cells are ordered x-major (x slowest, then y, then z), so index
    ``i = (x * ny + y) * nz + z``. Centers sit at half-pitch offsets and
    therefore lie strictly inside the extent box.
    """

    def __init__(self, dims: tuple[int, int, int], extent: tuple[float, float, float]):
        self.dims = tuple(int(d) for d in dims)
        self.extent = tuple(float(e) for e in extent)
        self.n_cells = self.dims[0] * self.dims[1] * self.dims[2]
        self.pitch = np.array([e / d for e, d in zip(self.extent, self.dims)])
        idx = np.arange(self.n_cells)
        nx, ny, nz = self.dims
        lattice = np.column_stack([idx // (ny * nz), (idx // nz) % ny, idx % nz])
        self.lattice = lattice
        self.lattice.setflags(write=False)
        self.centers = (lattice + 0.5) * self.pitch
        self.centers.setflags(write=False)

    def index_of(self, coord) -> int:
        """Cell index of an integer lattice coordinate triple."""
        x, y, z = coord
        return (x * self.dims[1] + y) * self.dims[2] + z

    @cached_property
    def distances3(self) -> np.ndarray:
        """Full pairwise 3D center-distance matrix (meters)."""
        diff = self.centers[:, None, :] - self.centers[None, :, :]
        d = np.sqrt((diff**2).sum(axis=2))
        d.setflags(write=False)
        return d

    @cached_property
    def distances2(self) -> np.ndarray:
        """Pairwise distances with the vertical component ignored."""
        diff = self.centers[:, None, :2] - self.centers[None, :, :2]
        d = np.sqrt((diff**2).sum(axis=2))
        d.setflags(write=False)
        return d

    def distance_matrix(self, metric: str = "3d") -> np.ndarray:
        if metric == "3d":
            return self.distances3
        if metric == "2d":
            return self.distances2
        raise ValueError(f"unknown metric {metric!r}")

    def __repr__(self):
        return f"LocationGrid(dims={self.dims}, extent={self.extent})"


def build_grid(dims, extent) -> LocationGrid:
    """Construct a grid; each dim must be a power of two >= 2, extents > 0."""
    dims = tuple(int(d) for d in dims)
    extent = tuple(float(e) for e in extent)
    if len(dims) != 3 or len(extent) != 3:
        raise ValueError("dims and extent must have three components")
    for d in dims:
        if d < 2 or not _is_power_of_two(d):
            raise ValueError(f"grid dims must be powers of two >= 2, got {dims}")
    for e in extent:
        if e <= 0:
            raise ValueError(f"extents must be positive, got {extent}")
    return LocationGrid(dims, extent)


def _check_index(grid: LocationGrid, i: int) -> None:
    if not 0 <= i < grid.n_cells:
        raise IndexError(f"cell index {i} out of range [0, {grid.n_cells})")


def distance3(grid: LocationGrid, i: int, j: int) -> float:
    """Euclidean distance in meters between the centers of cells i and j."""
    _check_index(grid, i)
    _check_index(grid, j)
    return float(np.linalg.norm(grid.centers[i] - grid.centers[j]))


def distance2(grid: LocationGrid, i: int, j: int) -> float:
    """Horizontal (z-blind) distance in meters between cells i and j."""
    _check_index(grid, i)
    _check_index(grid, j)
    return float(np.linalg.norm(grid.centers[i, :2] - grid.centers[j, :2]))


# --- Hilbert traversal ----------------------------------------------------


@dataclass(frozen=True)
class HilbertOrder:
    """One rotated Hilbert traversal: permutation[k] is the k-th visited cell."""

    rotation_id: int
    permutation: np.ndarray
    inverse: np.ndarray

    def __post_init__(self):
        self.permutation.setflags(write=False)
        self.inverse.setflags(write=False)


def proper_rotations() -> list[tuple[tuple[int, int, int], tuple[int, int, int]]]:
    """The 24 orientation-preserving cube rotations as (axis perm, flips).

    Enumerated deterministically: permutations in lexicographic order,
    flip patterns in binary order; entry 0 is the identity.
    """
    rots = []
    for perm in permutations(range(3)):
        # permutation parity
        inversions = sum(
            1 for a in range(3) for b in range(a + 1, 3) if perm[a] > perm[b]
        )
        perm_sign = -1 if inversions % 2 else 1
        for flips in product((0, 1), repeat=3):
            det = perm_sign * (-1) ** sum(flips)
            if det == 1:
                rots.append((perm, flips))
    return rots


def _hilbert_index(coord, bits: int) -> int:
    """Hilbert index of a lattice point in a 2^bits-sided cube (Skilling transpose)."""
    x = list(coord)
    m = 1 << (bits - 1)
    q = m
    while q > 1:
        p = q - 1
        for i in range(3):
            if x[i] & q:
                x[0] ^= p
            else:
                t = (x[0] ^ x[i]) & p
                x[0] ^= t
                x[i] ^= t
        q >>= 1
    x[1] ^= x[0]
    x[2] ^= x[1]
    t = 0
    q = m
    while q > 1:
        if x[2] & q:
            t ^= q - 1
        q >>= 1
    for i in range(3):
        x[i] ^= t
    h = 0
    for bit in range(bits - 1, -1, -1):
        for i in range(3):
            h = (h << 1) | ((x[i] >> bit) & 1)
    return h


def hilbert_orders(grid: LocationGrid, n_rotations: int | None = None) -> list[HilbertOrder]:
    """Traversal orders of the grid under rotated 3D Hilbert curves.

    Non-cubic grids are embedded in the smallest enclosing cube; cells
    outside the grid are skipped, preserving the relative curve order.
    ``n_rotations`` (default all 24) truncates the deterministic rotation
    list, mainly useful to trade search breadth for speed.
    """
    side = max(grid.dims)
    bits = side.bit_length() - 1
    rots = proper_rotations()
    if n_rotations is not None:
        if not 1 <= n_rotations <= len(rots):
            raise ValueError(f"n_rotations must be in [1, {len(rots)}]")
        rots = rots[:n_rotations]

    orders = []
    lattice = grid.lattice
    for rot_id, (perm, flips) in enumerate(rots):
        rotated = lattice[:, perm].copy()
        for axis in range(3):
            if flips[axis]:
                rotated[:, axis] = side - 1 - rotated[:, axis]
        ranks = np.fromiter(
            (_hilbert_index(c, bits) for c in rotated), dtype=np.int64, count=grid.n_cells
        )
        permutation = np.argsort(ranks, kind="stable")
        inverse = np.empty(grid.n_cells, dtype=np.int64)
        inverse[permutation] = np.arange(grid.n_cells)
        orders.append(HilbertOrder(rot_id, permutation, inverse))
    return orders
