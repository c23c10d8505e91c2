"""Planner abstraction: prompt formatting, route-text grammar, mock and
remote planners.

The route grammar (shared with the dataset emitter) is:

    PATH: (c1, r1): v1 dBm; (c2, r2): v2 dBm; ...; TOTAL_HOPS: n; TOTAL_RSS_DBM_SUM: x

Coordinates are integer cell indices (col, row); RSS values are printed
with repr so the round trip is lossless. The parser is strict by default:
any deviation beyond surrounding whitespace is a ParseFailure, which the
evaluation harness counts as an invalid prediction rather than a crash.
"""

from __future__ import annotations

import os
import random
import re
import time
from dataclasses import dataclass

from .errors import (AuthError, MalformedResponse, ParseFailure, RateLimited,
                     TransportError)
from .gridgraph import CellId
from .routing import make_route

SYSTEM_PROMPT = ("You are a navigation assistant specialized in wireless "
                 "connectivity optimization.")

_USER_TEMPLATES = {
    "default": ("Find the strongest-signal path from ({sc}, {sr}) to "
                "({dc}, {dr}) using mmWave coverage data."),
}

DEFAULT_TOKEN_ENV_VAR = "CTMAP_API_TOKEN"


@dataclass(frozen=True)
class ChatExchange:
    system_text: str
    user_text: str
    assistant_text: str = ""


@dataclass(frozen=True)
class RemoteConfig:
    endpoint_url: str
    model_name: str
    timeout_ms: int = 30000
    max_retries: int = 2
    auth_token_env_var: str = DEFAULT_TOKEN_ENV_VAR
    backoff_base_s: float = 0.25


def render_user_text(source, dest, template_id="default"):
    from .errors import UnknownTemplate
    try:
        template = _USER_TEMPLATES[template_id]
    except KeyError:
        raise UnknownTemplate(f"unknown template id {template_id!r}") from None
    return template.format(sc=int(source[0]), sr=int(source[1]),
                           dc=int(dest[0]), dr=int(dest[1]))


def format_prompt(source, dest, template_id="default"):
    """Chat prompt for a route query; byte-identical to dataset emission."""
    return ChatExchange(system_text=SYSTEM_PROMPT,
                        user_text=render_user_text(source, dest, template_id))


_PROMPT_COORDS_RE = re.compile(
    r"from \((\d+), (\d+)\) to \((\d+), (\d+)\)")


def parse_prompt_coords(user_text):
    """Recover (source, dest) cells from a rendered user query."""
    m = _PROMPT_COORDS_RE.search(user_text)
    if m is None:
        raise ParseFailure("user text carries no coordinate pair", position=0)
    sc, sr, dc, dr = (int(g) for g in m.groups())
    return CellId(sc, sr), CellId(dc, dr)


# --- route-text grammar ---

def emit_route_text(route):
    """Render a route in the assistant grammar."""
    items = "; ".join(f"({c}, {r}): {repr(float(v))} dBm"
                      for (c, r), v in zip(route.cells, route.rss_trace_dbm))
    total = repr(float(sum(route.rss_trace_dbm)))
    return (f"PATH: {items}; TOTAL_HOPS: {route.hop_count}; "
            f"TOTAL_RSS_DBM_SUM: {total}")


_NUM = r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"
_CELL_ITEM_RE = re.compile(rf"^\((\d+), (\d+)\): ({_NUM}) dBm$")
_HOPS_RE = re.compile(r"^TOTAL_HOPS: (\d+)$")
_SUM_RE = re.compile(rf"^TOTAL_RSS_DBM_SUM: ({_NUM})$")
_LENIENT_PAIR_RE = re.compile(r"\((\d+)\s*,\s*(\d+)\)")


def parse_route_text(text, lenient=False):
    """Parse the assistant grammar into (cells, rss_dbm list).

    Strict mode tolerates surrounding whitespace only. Lenient mode
    extracts the first run of bracketed coordinate pairs and returns no
    RSS values.
    """
    if lenient:
        pairs = _LENIENT_PAIR_RE.findall(text)
        if not pairs:
            raise ParseFailure("no coordinate pairs found", position=0)
        return [CellId(int(c), int(r)) for c, r in pairs], None

    stripped = text.strip()
    offset = text.find(stripped) if stripped else 0
    if not stripped.startswith("PATH: "):
        raise ParseFailure("expected 'PATH: ' prefix", position=offset)
    body = stripped[len("PATH: "):]
    parts = body.split("; ")
    if len(parts) < 3:
        raise ParseFailure("missing TOTAL_HOPS / TOTAL_RSS_DBM_SUM trailer",
                           position=offset + len(stripped))
    cell_parts, hops_part, sum_part = parts[:-2], parts[-2], parts[-1]

    cells = []
    rss = []
    pos = offset + len("PATH: ")
    for part in cell_parts:
        m = _CELL_ITEM_RE.match(part)
        if m is None:
            raise ParseFailure(f"bad path item {part!r}", position=pos)
        cells.append(CellId(int(m.group(1)), int(m.group(2))))
        rss.append(float(m.group(3)))
        pos += len(part) + 2
    m = _HOPS_RE.match(hops_part)
    if m is None:
        raise ParseFailure("missing or malformed TOTAL_HOPS field", position=pos)
    hops = int(m.group(1))
    pos += len(hops_part) + 2
    m = _SUM_RE.match(sum_part)
    if m is None:
        raise ParseFailure("missing or malformed TOTAL_RSS_DBM_SUM field",
                           position=pos)
    total = float(m.group(1))

    if not cells:
        raise ParseFailure("empty path", position=offset)
    if hops != len(cells) - 1:
        raise ParseFailure(
            f"TOTAL_HOPS {hops} inconsistent with {len(cells)} cells", position=pos)
    declared = sum(rss)
    if abs(total - declared) > 1e-6 * max(1.0, abs(declared)):
        raise ParseFailure("TOTAL_RSS_DBM_SUM inconsistent with trace", position=pos)
    return cells, rss


# --- mock planner ---

def _bump_detour(cells, blocked, rng, want_extra):
    """Insert valid 2-cell bumps into a route until >= want_extra cells added."""
    rows, cols = blocked.shape
    cells = list(cells)
    added = 0
    attempts = 0
    while added < want_extra and attempts < 500:
        attempts += 1
        if len(cells) < 2:
            break
        i = rng.randrange(len(cells) - 1)
        (uc, ur), (vc, vr) = cells[i], cells[i + 1]
        if ur == vr:  # horizontal step: bump up or down
            offsets = [(-1, 0), (1, 0)]
        else:         # vertical step: bump left or right
            offsets = [(0, -1), (0, 1)]
        rng.shuffle(offsets)
        for dr, dc in offsets:
            a = (uc + dc, ur + dr)
            b = (vc + dc, vr + dr)
            ok = True
            for cc, rr in (a, b):
                if not (0 <= cc < cols and 0 <= rr < rows) or blocked[rr, cc]:
                    ok = False
                    break
            if ok and a not in cells and b not in cells:
                cells[i + 1:i + 1] = [CellId(*a), CellId(*b)]
                added += 2
                break
    return cells


class MockPlanner:
    """Deterministic harness-test planner built on the oracle route.

    perturbation:
      "none"            emit the oracle route verbatim
      ("detour", k)     insert a valid >=k-cell loop (valid but suboptimal)
      ("corrupt", p)    with probability p replace one interior cell with a
                        non-adjacent cell (invalid prediction)
    """

    def __init__(self, graph, cov, perturbation="none", seed=0):
        from .routing import plan_signal_aware
        self._plan = lambda s, d: plan_signal_aware(graph, cov, s, d)
        self._graph = graph
        self._cov = cov
        self._perturbation = perturbation
        self._rng = random.Random(seed)

    def __call__(self, s, d):
        route = self._plan(s, d)
        return mock_plan(route, self._perturbation, self._rng,
                         self._graph, self._cov)


def mock_plan(oracle_route, perturbation, rng, graph=None, cov=None):
    """Render a (possibly perturbed) prediction text from an oracle route."""
    if perturbation == "none":
        return emit_route_text(oracle_route)
    kind = perturbation[0]
    if kind == "detour":
        k = int(perturbation[1])
        if graph is None or cov is None:
            raise ValueError("detour perturbation needs graph and cov")
        cells = _bump_detour(oracle_route.cells, graph.blocked, rng, k)
        return emit_route_text(make_route(graph, cov, cells))
    if kind == "corrupt":
        p = float(perturbation[1])
        text_route = oracle_route
        if rng.random() < p and len(oracle_route.cells) >= 3:
            cells = list(oracle_route.cells)
            i = rng.randrange(1, len(cells) - 1)
            c, r = cells[i]
            cols = graph.cols if graph else c + 16
            rows = graph.rows if graph else r + 16
            prev_cell, next_cell = cells[i - 1], cells[i + 1]
            for shift in range(5, 5 + cols * rows):
                cand = CellId((c + shift) % cols, (r + shift) % rows)
                if (abs(cand.col - prev_cell.col) + abs(cand.row - prev_cell.row) > 1
                        and abs(cand.col - next_cell.col)
                        + abs(cand.row - next_cell.row) > 1):
                    cells[i] = cand
                    break
            items = "; ".join(f"({cc}, {rr}): {repr(float(v))} dBm"
                              for (cc, rr), v in zip(cells, oracle_route.rss_trace_dbm))
            total = repr(float(sum(oracle_route.rss_trace_dbm)))
            return (f"PATH: {items}; TOTAL_HOPS: {len(cells) - 1}; "
                    f"TOTAL_RSS_DBM_SUM: {total}")
        return emit_route_text(text_route)
    raise ValueError(f"unknown perturbation {perturbation!r}")


# --- remote chat-completion client ---

def remote_plan(config, exchange, _session=None):
    """POST one chat-completion request and return the raw content string.

    Retries transport failures, HTTP 5xx and 429 up to max_retries with
    exponential backoff; 401/403 raise AuthError immediately and other
    4xx are never retried.
    """
    import requests

    headers = {"Content-Type": "application/json"}
    token = os.environ.get(config.auth_token_env_var, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    body = {
        "model": config.model_name,
        "messages": [
            {"role": "system", "content": exchange.system_text},
            {"role": "user", "content": exchange.user_text},
        ],
    }
    post = (_session or requests).post
    timeout_s = config.timeout_ms / 1000.0
    attempts = 1 + config.max_retries
    last_exc = None
    for attempt in range(attempts):
        if attempt:
            time.sleep(config.backoff_base_s * (2 ** (attempt - 1)))
        try:
            resp = post(config.endpoint_url, json=body, headers=headers,
                        timeout=timeout_s)
        except requests.RequestException as exc:
            last_exc = TransportError(f"transport failure: {exc}")
            continue
        if resp.status_code in (401, 403):
            raise AuthError(f"authentication rejected (HTTP {resp.status_code})")
        if resp.status_code == 429:
            last_exc = RateLimited("rate limited (HTTP 429)")
            continue
        if 400 <= resp.status_code < 500:
            raise TransportError(f"client error (HTTP {resp.status_code})")
        if resp.status_code >= 500:
            last_exc = TransportError(f"server error (HTTP {resp.status_code})")
            continue
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse(f"missing content field: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponse("content field is not a string")
        return content
    raise last_exc


class RemotePlanner:
    """Planner adapter: prompt -> remote call -> raw prediction text."""

    def __init__(self, config, template_id="default"):
        self._config = config
        self._template_id = template_id

    def __call__(self, s, d):
        exchange = format_prompt(s, d, self._template_id)
        return remote_plan(self._config, exchange)
