"""Random node placement for finite ad hoc networks.

Nodes live in a disk of radius ``r_net``. The source sits at the origin, the
destination on the +x axis at a configured distance, and the remaining M
mobiles are dropped uniformly at random subject to a minimum pairwise
separation ``r_ex`` (rejection sampling against the exclusion zones of every
previously placed node).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_REDRAW_BUDGET = 10**6


class InfeasiblePlacementError(RuntimeError):
    """A mobile could not be placed outside all exclusion zones."""


@dataclass(frozen=True, eq=False)
class Topology:
    """Fixed positions of the source (index 0), M mobiles, and the
    destination (index M+1)."""

    positions: np.ndarray
    r_net: float
    r_ex: float

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 2:
            raise ValueError("positions must be an (M+2, 2) array")
        object.__setattr__(self, "positions", pos)

    @property
    def num_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def num_mobiles(self) -> int:
        return self.num_nodes - 2

    @property
    def source_index(self) -> int:
        return 0

    @property
    def dest_index(self) -> int:
        return self.num_nodes - 1


def generate_topology(
    M: int,
    r_net: float,
    r_ex: float,
    dest_distance: float,
    rng: np.random.Generator,
    redraw_budget: int = DEFAULT_REDRAW_BUDGET,
) -> Topology:
    """Place source, destination and M mobiles with exclusion zones.

    Each mobile is redrawn uniformly over the disk until it falls outside the
    exclusion zones of all previously placed nodes (source and destination
    included). Raises :class:`InfeasiblePlacementError` once a single mobile
    exhausts ``redraw_budget`` attempts, which signals an infeasible density
    rather than hanging forever.
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    if r_net <= 0:
        raise ValueError("r_net must be > 0")
    if r_ex < 0:
        raise ValueError("r_ex must be >= 0")
    if not 0 < dest_distance <= r_net:
        raise ValueError("dest_distance must lie in (0, r_net]")
    if redraw_budget < 1:
        raise ValueError("redraw_budget must be >= 1")

    n = M + 2
    positions = np.empty((n, 2))
    positions[0] = (0.0, 0.0)
    positions[n - 1] = (dest_distance, 0.0)

    # Buffer of already placed nodes, in placement order (source, dest, mobiles).
    placed = np.empty((n, 2))
    placed[0] = positions[0]
    placed[1] = positions[n - 1]
    count = 2
    r_ex_sq = r_ex * r_ex

    for idx in range(1, M + 1):
        for _ in range(redraw_budget):
            radius = r_net * math.sqrt(rng.random())
            theta = 2.0 * math.pi * rng.random()
            x = radius * math.cos(theta)
            y = radius * math.sin(theta)
            d = placed[:count]
            dx = d[:, 0] - x
            dy = d[:, 1] - y
            if (dx * dx + dy * dy).min() >= r_ex_sq:
                positions[idx] = (x, y)
                placed[count] = (x, y)
                count += 1
                break
        else:
            raise InfeasiblePlacementError(
                f"mobile {idx} found no admissible position in "
                f"{redraw_budget} redraws (M={M}, r_ex={r_ex}, r_net={r_net})"
            )
    return Topology(positions, r_net=float(r_net), r_ex=float(r_ex))


def distance(topology: Topology, i: int, j: int) -> float:
    """Euclidean distance between nodes i and j."""
    n = topology.num_nodes
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node index out of range: ({i}, {j}) with {n} nodes")
    diff = topology.positions[i] - topology.positions[j]
    return float(math.hypot(diff[0], diff[1]))


def distance_matrix(topology: Topology) -> np.ndarray:
    """Full pairwise distance matrix (zero diagonal)."""
    pos = topology.positions
    diff = pos[:, None, :] - pos[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def save_topology(topology: Topology, path) -> None:
    """Write a topology as a plain-text table, one node per line."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# r_net={topology.r_net!r} r_ex={topology.r_ex!r}\n")
        for i, (x, y) in enumerate(topology.positions):
            fh.write(f"{i} {float(x)!r} {float(y)!r}\n")


def load_topology(path, r_net: float | None = None, r_ex: float | None = None) -> Topology:
    """Read a topology written by :func:`save_topology`.

    Radii default to the values recorded in the header comment; pass them
    explicitly to override or when the header is absent.
    """
    rows: list[tuple[int, float, float]] = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if token.startswith("r_net=") and r_net is None:
                        r_net = float(token.split("=", 1)[1])
                    elif token.startswith("r_ex=") and r_ex is None:
                        r_ex = float(token.split("=", 1)[1])
                continue
            idx, x, y = line.split()
            rows.append((int(idx), float(x), float(y)))
    if r_net is None or r_ex is None:
        raise ValueError("r_net and r_ex not found in header; pass them explicitly")
    rows.sort()
    if [i for i, _, _ in rows] != list(range(len(rows))):
        raise ValueError("node indices must be 0..N-1 without gaps")
    positions = np.array([(x, y) for _, x, y in rows])
    return Topology(positions, r_net=r_net, r_ex=r_ex)
