"""Instruction-tuning dataset generation: pair sampling, record building,
deterministic 80/20 splitting, JSONL serialization.

File layout: a header line `{"format": "ctmap-dataset", "version": 1,
"resolution_m": ..., "count": ...}` followed by one chat record per line,
`{"messages": [system, user, assistant]}`. Coordinates are integer cell
indices; the header-declared resolution recovers metric units.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .errors import EmptyDataset, ExhaustedError, ParseError
from .gridgraph import CellId, dbm_to_linear
from .llm_bridge import (SYSTEM_PROMPT, parse_prompt_coords, parse_route_text,
                         render_user_text)

PAIR_RETRY_FACTOR = 1000
DEFAULT_MIN_SEPARATION_M = 50.0


@dataclass
class PlanRecord:
    query_text: str
    source: CellId
    dest: CellId
    response_cells: list
    response_rss_dbm: list
    path_length: int
    total_rss_lin: float
    total_rss_dbm_sum: float


@dataclass
class DatasetSplit:
    train: list
    test: list
    seed: int
    ratio: float = 0.8


def sample_pairs(cov, n, seed, min_separation_m=DEFAULT_MIN_SEPARATION_M):
    """Sample n distinct source/destination cell pairs on free ground.

    Endpoints are non-blocked, separated by at least min_separation_m
    (cell-center Euclidean distance), and full pairs never repeat.
    Deterministic under seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    free = [(int(c), int(r))
            for r in range(cov.rows) for c in range(cov.cols)
            if not cov.blocked[r, c]]
    if len(free) < 2:
        raise ExhaustedError("not enough free cells to sample pairs")
    rng = random.Random(seed)
    res = cov.resolution_m
    min_sep_sq = (min_separation_m / res) ** 2
    pairs = []
    seen = set()
    budget = PAIR_RETRY_FACTOR * n
    while len(pairs) < n and budget > 0:
        budget -= 1
        s = rng.choice(free)
        d = rng.choice(free)
        if s == d or (s, d) in seen:
            continue
        if (s[0] - d[0]) ** 2 + (s[1] - d[1]) ** 2 < min_sep_sq:
            continue
        seen.add((s, d))
        pairs.append((CellId(*s), CellId(*d)))
    if len(pairs) < n:
        raise ExhaustedError(
            f"placed only {len(pairs)}/{n} pairs within the retry budget")
    return pairs


def build_record(route, template_id="default"):
    """Turn an oracle route into a query/response record; totals recomputed."""
    source = route.cells[0]
    dest = route.cells[-1]
    rss = [float(v) for v in route.rss_trace_dbm]
    return PlanRecord(
        query_text=render_user_text(source, dest, template_id),
        source=source,
        dest=dest,
        response_cells=list(route.cells),
        response_rss_dbm=rss,
        path_length=len(route.cells) - 1,
        total_rss_lin=float(sum(dbm_to_linear(v) for v in rss)),
        total_rss_dbm_sum=float(sum(rss)),
    )


def record_messages(record):
    """The three-message chat form of a record."""
    items = "; ".join(f"({c}, {r}): {repr(v)} dBm"
                      for (c, r), v in zip(record.response_cells,
                                           record.response_rss_dbm))
    assistant = (f"PATH: {items}; TOTAL_HOPS: {record.path_length}; "
                 f"TOTAL_RSS_DBM_SUM: {repr(record.total_rss_dbm_sum)}")
    return [
        {"role": "system", "content": SYSTEM_PROMPT},
        {"role": "user", "content": record.query_text},
        {"role": "assistant", "content": assistant},
    ]


def split_dataset(records, ratio=0.8, seed=0):
    """Deterministic shuffle then prefix split; |train| = round(ratio*N)."""
    if not records:
        raise EmptyDataset("cannot split an empty record list")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be in (0, 1)")
    shuffled = list(records)
    random.Random(seed).shuffle(shuffled)
    n_train = round(ratio * len(shuffled))
    return DatasetSplit(train=shuffled[:n_train], test=shuffled[n_train:],
                        seed=seed, ratio=ratio)


def write_jsonl(records, path, resolution_m):
    with open(path, "w", encoding="utf-8") as fh:
        header = {"format": "ctmap-dataset", "version": 1,
                  "resolution_m": resolution_m, "count": len(records)}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for record in records:
            fh.write(json.dumps({"messages": record_messages(record)}) + "\n")


def read_jsonl(path):
    """Read a dataset file back into PlanRecords (plus the header dict)."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise ParseError("empty dataset file", line_no=1)
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line 1: bad header: {exc}", line_no=1) from exc
        if not isinstance(header, dict) or header.get("format") != "ctmap-dataset":
            raise ParseError("line 1: not a ctmap-dataset header", line_no=1)
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                messages = obj["messages"]
                roles = [m["role"] for m in messages]
                if roles != ["system", "user", "assistant"]:
                    raise KeyError(f"unexpected roles {roles}")
                user_text = messages[1]["content"]
                assistant_text = messages[2]["content"]
            except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                raise ParseError(f"line {line_no}: malformed record: {exc}",
                                 line_no=line_no) from exc
            source, dest = parse_prompt_coords(user_text)
            cells, rss = parse_route_text(assistant_text)
            records.append(PlanRecord(
                query_text=user_text, source=source, dest=dest,
                response_cells=cells, response_rss_dbm=rss,
                path_length=len(cells) - 1,
                total_rss_lin=float(sum(dbm_to_linear(v) for v in rss)),
                total_rss_dbm_sum=float(sum(rss)),
            ))
    return header, records


def generate_records(cov, graph, pairs, template_id="default"):
    """Oracle routes -> records, preserving pair order."""
    from .routing import plan_signal_aware
    records = []
    for s, d in pairs:
        route = plan_signal_aware(graph, cov, s, d)
        records.append(build_record(route, template_id))
    return records
