"""Route planners over the grid graph.

plan_signal_aware is the oracle: a binary-heap Dijkstra minimizing the sum
of inverse-signal head-node costs. plan_shortest is the minimum-hop
baseline (same search, unit weights). plan_greedy_alg1 is a literal
maximum-signal best-first search kept for comparison; it does not
accumulate path costs and is not cost-optimal. brute_force_optimal is an
independent exact enumerator for small graphs, used as a test oracle.

Tie-breaking everywhere: among equal priorities pop the cell with the
smaller (row, col) id, so results are deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .backend import resolve_backend
from .errors import InvalidEndpoint, TooLarge, Unreachable
from .gridgraph import CellId, build_graph

BRUTE_FORCE_NODE_CAP = 400


@dataclass
class Route:
    cells: list            # ordered CellId p_1..p_n
    rss_trace_dbm: list    # per-cell dBm, same length
    cumulative_cost: float  # sum of head-node inverse-signal edge costs
    cumulative_rss_lin: float  # sum of s_lin over every cell incl. source
    hop_count: int


def make_route(graph, cov, cells):
    """Assemble a Route (traces and totals) from a cell sequence."""
    cells = [CellId(int(c), int(r)) for c, r in cells]
    trace = [float(cov.rss_dbm[r, c]) for c, r in cells]
    cost = 0.0
    for _, (c, r) in zip(cells, cells[1:]):
        cost += float(graph.cost_in[r, c])
    lin = float(sum(graph.s_lin[r, c] for c, r in cells))
    return Route(cells=cells, rss_trace_dbm=trace, cumulative_cost=cost,
                 cumulative_rss_lin=lin, hop_count=len(cells) - 1)


def _check_endpoint(graph, cell, label):
    if not graph.in_grid(cell):
        raise InvalidEndpoint(f"{label} cell {tuple(cell)} out of bounds")
    if graph.blocked[cell[1], cell[0]]:
        raise InvalidEndpoint(f"{label} cell {tuple(cell)} is blocked")


def _dijkstra_python(cost_in, blocked, s_id, d_id, unit_cost):
    """Pure-python mirror of the numba kernel; identical pop order."""
    rows, cols = blocked.shape
    dist = {s_id: 0.0}
    pred = {}
    done = set()
    heap = [(0.0, s_id)]
    found = False
    while heap:
        cost, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == d_id:
            found = True
            break
        ur, uc = divmod(u, cols)
        for vr, vc in ((ur - 1, uc), (ur + 1, uc), (ur, uc - 1), (ur, uc + 1)):
            if not (0 <= vr < rows and 0 <= vc < cols) or blocked[vr, vc]:
                continue
            w = 1.0 if unit_cost else cost_in[vr, vc]
            nd = cost + w
            v = vr * cols + vc
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, pred, found


def _backtrack(pred, s_id, d_id, cols, get):
    ids = [d_id]
    guard = 0
    while ids[-1] != s_id:
        ids.append(get(ids[-1]))
        guard += 1
        if guard > len(ids) + 10_000_000 or ids[-1] < 0:
            raise Unreachable("predecessor chain broken")
    ids.reverse()
    return [CellId(i % cols, i // cols) for i in ids]


def _plan(graph, cov, s, d, unit_cost, backend=None):
    s = CellId(*s)
    d = CellId(*d)
    _check_endpoint(graph, s, "source")
    _check_endpoint(graph, d, "destination")
    if s == d:
        return make_route(graph, cov, [s])
    cols = graph.cols
    s_id = s.row * cols + s.col
    d_id = d.row * cols + d.col
    backend = resolve_backend(backend)
    if backend == "numba":
        from . import _njit
        dist, pred, found = _njit.dijkstra_kernel(
            graph.cost_in, graph.blocked, s_id, d_id, unit_cost)
        if not found:
            raise Unreachable(f"no path from {tuple(s)} to {tuple(d)}")
        cells = _backtrack(pred, s_id, d_id, cols, lambda i: int(pred[i]))
    else:
        dist, pred, found = _dijkstra_python(
            graph.cost_in, graph.blocked, s_id, d_id, unit_cost)
        if not found:
            raise Unreachable(f"no path from {tuple(s)} to {tuple(d)}")
        cells = _backtrack(pred, s_id, d_id, cols, lambda i: pred.get(i, -1))
    return make_route(graph, cov, cells)


def plan_signal_aware(graph, cov, s, d, backend=None):
    """Oracle: globally minimum inverse-signal cost path from s to d."""
    return _plan(graph, cov, s, d, unit_cost=False, backend=backend)


def plan_shortest(graph, cov, s, d, backend=None):
    """Minimum-hop baseline (unit edge weights), RSS trace still recorded."""
    return _plan(graph, cov, s, d, unit_cost=True, backend=backend)


def plan_greedy_alg1(graph, cov, s, d):
    """Literal greedy max-signal best-first search.

    Expands the node with the largest linear signal first and relaxes a
    neighbor only when its own signal beats the best value recorded for
    it. Kept verbatim for comparison; it does not minimize path cost.
    """
    s = CellId(*s)
    d = CellId(*d)
    _check_endpoint(graph, s, "source")
    _check_endpoint(graph, d, "destination")
    if s == d:
        return make_route(graph, cov, [s])
    cols = graph.cols
    s_id = s.row * cols + s.col
    d_id = d.row * cols + d.col
    sig = graph.s_lin
    best_seen = {s_id: float(sig[s.row, s.col])}
    pred = {}
    heap = [(-best_seen[s_id], s_id)]
    reached = False
    while heap:
        _, u = heapq.heappop(heap)
        if u == d_id:
            reached = True
            break
        ur, uc = divmod(u, cols)
        for vr, vc in ((ur - 1, uc), (ur + 1, uc), (ur, uc - 1), (ur, uc + 1)):
            if not (0 <= vr < graph.rows and 0 <= vc < cols) or graph.blocked[vr, vc]:
                continue
            v = vr * cols + vc
            sv = float(sig[vr, vc])
            if v not in best_seen or sv > best_seen[v]:
                best_seen[v] = sv
                pred[v] = u
                heapq.heappush(heap, (-sv, v))
    if not reached:
        raise Unreachable(f"no path from {tuple(s)} to {tuple(d)}")
    cells = _backtrack(pred, s_id, d_id, cols, lambda i: pred.get(i, -1))
    return make_route(graph, cov, cells)


def _reverse_lower_bounds(graph, d):
    """Exact cost-to-destination per cell via Bellman-Ford label correction.

    Uses whole-grid relaxation sweeps (no priority queue), so it shares no
    machinery with the heap-based planners it helps to check.
    """
    rows, cols = graph.rows, graph.cols
    cost_in = graph.cost_in
    h = np.full((rows, cols), np.inf)
    h[d.row, d.col] = 0.0
    for _ in range(rows * cols):
        best = h.copy()
        # candidate through the neighbor in each direction: cost_in[u] + h[u]
        through = cost_in + h
        best[1:, :] = np.minimum(best[1:, :], through[:-1, :])
        best[:-1, :] = np.minimum(best[:-1, :], through[1:, :])
        best[:, 1:] = np.minimum(best[:, 1:], through[:, :-1])
        best[:, :-1] = np.minimum(best[:, :-1], through[:, 1:])
        best[graph.blocked] = np.inf
        best[d.row, d.col] = 0.0
        if np.array_equal(best, h, equal_nan=True):
            break
        h = best
    return h


def brute_force_optimal(graph, cov, s, d, max_cells=BRUTE_FORCE_NODE_CAP):
    """Exact minimum-cost route by exhaustive simple-path search.

    Independent of the heap Dijkstra: depth-first enumeration over simple
    paths, pruned with a provably valid lower bound (partial cost plus the
    Bellman-Ford cost-to-destination can never beat the incumbent).
    Positive edge costs make the optimum simple, so enumeration is sound.
    """
    if graph.node_count > max_cells:
        raise TooLarge(f"{graph.node_count} nodes exceeds cap {max_cells}")
    s = CellId(*s)
    d = CellId(*d)
    _check_endpoint(graph, s, "source")
    _check_endpoint(graph, d, "destination")
    if s == d:
        return make_route(graph, cov, [s])

    rows, cols = graph.rows, graph.cols
    cost_in = graph.cost_in
    blocked = graph.blocked
    bound = _reverse_lower_bounds(graph, d)
    on_path = np.zeros((rows, cols), dtype=bool)
    best = {"cost": math.inf, "path": None}

    def neighbors_sorted(r, c):
        out = []
        for vr, vc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= vr < rows and 0 <= vc < cols and not blocked[vr, vc]:
                w = float(cost_in[vr, vc])
                out.append((w + bound[vr, vc], w, vr, vc))
        out.sort()
        return out

    path = [(s.row, s.col)]
    on_path[s.row, s.col] = True

    def dfs(r, c, cost):
        if (r, c) == (d.row, d.col):
            if cost < best["cost"]:
                best["cost"] = cost
                best["path"] = list(path)
            return
        for est, w, vr, vc in neighbors_sorted(r, c):
            if on_path[vr, vc]:
                continue
            if cost + est >= best["cost"]:
                continue
            on_path[vr, vc] = True
            path.append((vr, vc))
            dfs(vr, vc, cost + w)
            path.pop()
            on_path[vr, vc] = False

    import sys
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, max_cells * 8 + 1000))
    try:
        dfs(s.row, s.col, 0.0)
    finally:
        sys.setrecursionlimit(old)

    if best["path"] is None:
        raise Unreachable(f"no path from {tuple(s)} to {tuple(d)}")
    return make_route(graph, cov, [CellId(c, r) for r, c in best["path"]])


def replan_on_update(env, stations, params, s, d, epsilon=None, backend=None):
    """Recompute coverage and graph from scratch, then replan (stateless)."""
    from .gridgraph import DEFAULT_EPSILON_MW
    from .propagation import compute_coverage
    cov = compute_coverage(env, stations, params, backend=backend)
    graph = build_graph(cov, epsilon or DEFAULT_EPSILON_MW)
    return plan_signal_aware(graph, cov, s, d, backend=backend), cov, graph
