"""Grid graph over non-blocked cells with inverse-signal edge costs.

Nodes are the non-blocked cells of a coverage map, 4-connected. An edge
u -> v costs 1 / (s_lin(v) + epsilon) where s_lin is the head node's
signal converted to linear milliwatts; keying on linear power keeps every
weight strictly positive (raw negative-dBm values would not).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EmptyGraph, NotAdjacent

DEFAULT_EPSILON_MW = 1e-12

_NEIGHBOR_OFFSETS = ((-1, 0), (1, 0), (0, -1), (0, 1))  # (drow, dcol)


class CellId(NamedTuple):
    col: int
    row: int


def dbm_to_linear(dbm):
    """dBm -> milliwatts: 10^(dbm/10)."""
    return 10.0 ** (np.asarray(dbm, dtype=np.float64) / 10.0) if isinstance(
        dbm, np.ndarray) else 10.0 ** (float(dbm) / 10.0)


@dataclass
class GridGraph:
    cols: int
    rows: int
    s_lin: np.ndarray    # float64 (rows, cols), linear mW; 0 where blocked
    blocked: np.ndarray  # bool (rows, cols)
    epsilon: float
    cost_in: np.ndarray  # float64 (rows, cols), 1/(s_lin + eps); inf where blocked

    @property
    def node_count(self):
        return int((~self.blocked).sum())

    def in_grid(self, cell):
        col, row = cell
        return 0 <= col < self.cols and 0 <= row < self.rows

    def is_node(self, cell):
        return self.in_grid(cell) and not self.blocked[cell[1], cell[0]]

    def neighbors(self, cell):
        col, row = cell
        out = []
        for dr, dc in _NEIGHBOR_OFFSETS:
            r, c = row + dr, col + dc
            if 0 <= r < self.rows and 0 <= c < self.cols and not self.blocked[r, c]:
                out.append(CellId(c, r))
        return out

    def edge_count(self):
        free = ~self.blocked
        horizontal = int((free[:, :-1] & free[:, 1:]).sum())
        vertical = int((free[:-1, :] & free[1:, :]).sum())
        return horizontal + vertical


def build_graph(cov, epsilon=DEFAULT_EPSILON_MW):
    """Derive the routing graph from a coverage map."""
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    blocked = np.asarray(cov.blocked, dtype=bool)
    if blocked.all():
        raise EmptyGraph("all cells are blocked")
    s_lin = np.power(10.0, cov.rss_dbm.astype(np.float64) / 10.0)
    s_lin[blocked] = 0.0
    cost_in = 1.0 / (s_lin + epsilon)
    cost_in[blocked] = np.inf
    return GridGraph(cols=cov.cols, rows=cov.rows, s_lin=s_lin,
                     blocked=blocked, epsilon=float(epsilon), cost_in=cost_in)


def edge_cost(graph, u, v):
    """Cost of traversing adjacent edge u -> v (keyed on the head node v)."""
    ucol, urow = u
    vcol, vrow = v
    if abs(ucol - vcol) + abs(urow - vrow) != 1:
        raise NotAdjacent(f"cells {tuple(u)} and {tuple(v)} are not 4-adjacent")
    if not graph.is_node(u) or not graph.is_node(v):
        raise NotAdjacent(f"cells {tuple(u)} and {tuple(v)} are not both graph nodes")
    return float(graph.cost_in[vrow, vcol])
