"""Route validity checking, the four quality metrics, and the planner
evaluation harness.

Conventions (fixed here, reported as such):
- signal coverage is the ratio of cumulative *linear* milliwatt sums
  (ratios of negative dBm sums would invert the ordering);
- optimality is aggregated over valid predictions only; invalid ones are
  punished through the success rate;
- edit distance is Levenshtein over exact cell tokens, normalized by the
  longer sequence, averaged over parseable predictions (valid or not);
- route statistics use the population standard deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (EmptyPath, EndpointMismatch, InvalidRoute, OracleFailure,
                     ParseFailure, Unreachable)
from .gridgraph import dbm_to_linear
from .llm_bridge import parse_route_text
from .routing import make_route, plan_signal_aware

REASON_OK = "OK"
REASON_OUT_OF_BOUNDS = "OutOfBounds"
REASON_NON_ADJACENT = "NonAdjacentStep"
REASON_BLOCKED = "BlockedCell"
REASON_REPEATED = "RepeatedCell"
REASON_WRONG_ENDPOINTS = "WrongEndpoints"
REASON_EMPTY = "EmptyPath"

OPTIMALITY_REL_TOL = 1e-9


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    reason: str

    def __post_init__(self):
        assert self.valid == (self.reason == REASON_OK)


@dataclass(frozen=True)
class RouteStats:
    mean_dbm: float
    std_dbm: float


@dataclass
class QueryResult:
    query_id: int
    source: tuple
    dest: tuple
    verdict: ValidityVerdict
    parseable: bool
    coverage_pct: float | None = None
    optimality_pct: float | None = None
    edit_distance: float | None = None


@dataclass
class EvalReport:
    coverage_pct: float
    optimality_pct: float
    success_pct: float
    mean_edit_distance: float
    n_queries: int
    per_query: list = field(default_factory=list)
    n_skipped: int = 0
    no_valid_predictions: bool = False

    def table_row(self, model_name):
        return (f"{model_name},{self.coverage_pct:.1f},{self.optimality_pct:.1f},"
                f"{self.success_pct:.1f},{self.mean_edit_distance:.2f}")

    def to_csv(self, model_name):
        return ("Model,Coverage %,Optimality %,Success %,Edit Dist.\n"
                + self.table_row(model_name) + "\n")


def _as_cells(route_or_cells):
    cells = getattr(route_or_cells, "cells", route_or_cells)
    return [(int(c), int(r)) for c, r in cells]


def validate_route(cov, route, s, d, env=None):
    """Check a predicted cell sequence; first failing rule wins."""
    cells = _as_cells(route) if route is not None else []
    if not cells:
        return ValidityVerdict(False, REASON_EMPTY)
    s = (int(s[0]), int(s[1]))
    d = (int(d[0]), int(d[1]))
    if cells[0] != s or cells[-1] != d:
        return ValidityVerdict(False, REASON_WRONG_ENDPOINTS)
    for c, r in cells:
        if not cov.in_grid(c, r):
            return ValidityVerdict(False, REASON_OUT_OF_BOUNDS)
    for c, r in cells:
        if cov.blocked[r, c]:
            return ValidityVerdict(False, REASON_BLOCKED)
    for (ac, ar), (bc, br) in zip(cells, cells[1:]):
        if abs(ac - bc) + abs(ar - br) != 1:
            return ValidityVerdict(False, REASON_NON_ADJACENT)
    if len(set(cells)) != len(cells):
        return ValidityVerdict(False, REASON_REPEATED)
    return ValidityVerdict(True, REASON_OK)


def cumulative_rss(route, domain="linear"):
    """Sum over all route cells, in linear mW or raw dBm."""
    trace = getattr(route, "rss_trace_dbm", None)
    if trace is None or not len(trace):
        raise InvalidRoute("route carries no RSS trace")
    if domain == "linear":
        return float(sum(dbm_to_linear(v) for v in trace))
    if domain == "dbm_sum":
        return float(sum(trace))
    raise ValueError(f"unknown domain {domain!r}")


def signal_coverage(pred, oracle):
    """100 * linear cumulative RSS ratio, prediction vs oracle."""
    if pred.cells[0] != oracle.cells[0] or pred.cells[-1] != oracle.cells[-1]:
        raise EndpointMismatch("routes do not share endpoints")
    return 100.0 * cumulative_rss(pred, "linear") / cumulative_rss(oracle, "linear")


def path_optimality(pred, oracle):
    """Per-query indicator: 100 when the prediction attains the oracle
    minimum cost, else the coverage ratio capped at 100."""
    oc = oracle.cumulative_cost
    if abs(pred.cumulative_cost - oc) <= OPTIMALITY_REL_TOL * max(oc, 1e-300):
        return 100.0
    return min(100.0, signal_coverage(pred, oracle))


def edit_distance(pred_cells, oracle_cells):
    """Levenshtein over cell tokens, normalized by the longer sequence."""
    a = _as_cells(pred_cells)
    b = _as_cells(oracle_cells)
    if not a or not b:
        raise EmptyPath("edit distance needs non-empty sequences")
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, token in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, other in enumerate(b, start=1):
            cost = 0 if token == other else 1
            current[j] = min(previous[j] + 1, current[j - 1] + 1,
                             previous[j - 1] + cost)
        previous = current
    return previous[-1] / max(len(a), len(b))


def route_stats(route):
    """Mean and population std of the route's dBm trace."""
    trace = getattr(route, "rss_trace_dbm", None)
    if not trace:
        raise InvalidRoute("route carries no RSS trace")
    n = len(trace)
    mean = sum(trace) / n
    var = sum((v - mean) ** 2 for v in trace) / n
    return RouteStats(mean_dbm=mean, std_dbm=math.sqrt(var))


def evaluate_planner(planner, test_pairs, cov, graph, env=None, lenient=False):
    """Score a planner against the oracle over a test set.

    planner is a callable (source, dest) -> prediction text in the route
    grammar. Unreachable oracle pairs are skipped and counted. Parse
    failures become invalid predictions, never crashes.
    """
    per_query = []
    n_skipped = 0
    for qid, (s, d) in enumerate(test_pairs):
        try:
            oracle = plan_signal_aware(graph, cov, s, d)
        except Unreachable:
            n_skipped += 1
            per_query.append(QueryResult(
                query_id=qid, source=tuple(s), dest=tuple(d),
                verdict=ValidityVerdict(False, REASON_EMPTY), parseable=False))
            continue

        text = planner(s, d)
        try:
            cells, _ = parse_route_text(text, lenient=lenient)
            parseable = True
        except ParseFailure:
            cells = None
            parseable = False

        verdict = validate_route(cov, cells, s, d, env=env)
        result = QueryResult(query_id=qid, source=tuple(s), dest=tuple(d),
                             verdict=verdict, parseable=parseable)
        if parseable:
            result.edit_distance = edit_distance(cells, oracle.cells)
        if verdict.valid:
            pred = make_route(graph, cov, cells)
            result.coverage_pct = signal_coverage(pred, oracle)
            result.optimality_pct = path_optimality(pred, oracle)
        per_query.append(result)

    n = len(test_pairs) - n_skipped
    valid = [q for q in per_query if q.verdict.valid]
    parseable = [q for q in per_query if q.parseable]
    if n <= 0:
        raise OracleFailure("no evaluable pairs (oracle unreachable for all)")
    report = EvalReport(
        coverage_pct=(sum(q.coverage_pct for q in valid) / len(valid)) if valid else 0.0,
        optimality_pct=(sum(q.optimality_pct for q in valid) / len(valid)) if valid else 0.0,
        success_pct=100.0 * len(valid) / n,
        mean_edit_distance=(sum(q.edit_distance for q in parseable) / len(parseable))
        if parseable else 0.0,
        n_queries=n,
        per_query=per_query,
        n_skipped=n_skipped,
        no_valid_predictions=not valid,
    )
    return report
