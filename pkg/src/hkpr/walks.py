"""Hop-conditioned random walks and batched endpoint accumulation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParameterError
from .graph import Graph
from .sampling import AliasTable, RandomSource, alias_draw
from .weights import PoissonWeights


@dataclass(frozen=True)
class WalkRequest:
    """``count`` walks starting at node ``start`` as if already ``start_hop`` hops in."""

    start: int
    start_hop: int
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ParameterError("walk count must be non-negative")
        if self.start_hop < 0:
            raise ParameterError("start hop must be non-negative")


@nb.njit(cache=True, nogil=True)
def _walk(offsets, adj, u, k, stop, k_cap, gen):
    v = u
    h = k
    steps = 0
    while h < k_cap:
        if gen.random() <= stop[h]:
            break
        lo = offsets[v]
        d = offsets[v + 1] - lo
        j = int(gen.random() * d)
        if j >= d:
            j = d - 1
        v = adj[lo + j]
        h += 1
        steps += 1
    return v, steps


@nb.njit(cache=True, nogil=True)
def _walk_requests(offsets, adj, starts, hops, counts, stop, k_cap, gen, n):
    hits = np.zeros(n, np.int64)
    steps = 0
    for i in range(len(starts)):
        for _ in range(counts[i]):
            v, st = _walk(offsets, adj, starts[i], hops[i], stop, k_cap, gen)
            hits[v] += 1
            steps += st
    return hits, steps


@nb.njit(cache=True, nogil=True)
def _walk_from_alias(offsets, adj, prob, alias, starts, hops, count, stop, k_cap, gen, n):
    hits = np.zeros(n, np.int64)
    steps = 0
    for _ in range(count):
        slot = alias_draw(prob, alias, gen)
        v, st = _walk(offsets, adj, starts[slot], hops[slot], stop, k_cap, gen)
        hits[v] += 1
        steps += st
    return hits, steps


@nb.njit(cache=True, nogil=True)
def _plain_walks(offsets, adj, s, prob, alias, count, gen, n):
    hits = np.zeros(n, np.int64)
    steps = 0
    for _ in range(count):
        length = alias_draw(prob, alias, gen)
        v = s
        for _ in range(length):
            lo = offsets[v]
            d = offsets[v + 1] - lo
            j = int(gen.random() * d)
            if j >= d:
                j = d - 1
            v = adj[lo + j]
        hits[v] += 1
        steps += length
    return hits, steps


def k_random_walk(g: Graph, u: int, k: int, w: PoissonWeights, rng: RandomSource) -> int:
    """Endpoint of one walk from ``u`` conditioned on having reached hop ``k``."""
    return walk_with_length(g, u, k, w, rng)[0]


def walk_with_length(g: Graph, u: int, k: int, w: PoissonWeights, rng: RandomSource) -> tuple[int, int]:
    """Like :func:`k_random_walk` but also returns the number of steps taken."""
    g.check_seed(u)
    if k < 0:
        raise ParameterError("hop index must be non-negative")
    v, steps = _walk(g.offsets, g.adjacency, u, k, w.stop, w.k_cap, rng.gen)
    return int(v), int(steps)


@nb.njit(cache=True)
def _sample_walks(offsets, adj, u, k, stop, k_cap, gen, count):
    ends = np.empty(count, np.int64)
    lengths = np.empty(count, np.int64)
    for i in range(count):
        ends[i], lengths[i] = _walk(offsets, adj, u, k, stop, k_cap, gen)
    return ends, lengths


def sample_walks(
    g: Graph, u: int, k: int, w: PoissonWeights, rng: RandomSource, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints and step counts of ``count`` independent walks from ``(u, k)``."""
    g.check_seed(u)
    if k < 0:
        raise ParameterError("hop index must be non-negative")
    return _sample_walks(g.offsets, g.adjacency, u, k, w.stop, w.k_cap, rng.gen, int(count))


def _check_starts(g: Graph, starts: np.ndarray) -> None:
    if len(starts) and (starts.min() < 0 or starts.max() >= g.n):
        raise ParameterError("walk start out of range")
    if len(starts) and np.any(g.degrees[starts] == 0):
        raise ParameterError("walk start has degree 0")


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def _run_parallel(jobs, threads):
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda job: job(), jobs))
    hits = sum(r[0] for r in results)
    return hits, sum(int(r[1]) for r in results)


def walk_endpoint_counts(
    g: Graph,
    requests: list[WalkRequest],
    w: PoissonWeights,
    rng: RandomSource,
    threads: int = 1,
) -> tuple[np.ndarray, int]:
    """Dense per-node endpoint counts and total steps for a list of requests."""
    starts = np.array([r.start for r in requests], dtype=np.int64)
    hops = np.array([r.start_hop for r in requests], dtype=np.int64)
    counts = np.array([r.count for r in requests], dtype=np.int64)
    _check_starts(g, starts)
    args = (g.offsets, g.adjacency, starts, hops)
    if threads <= 1 or len(requests) == 0:
        hits, steps = _walk_requests(*args, counts, w.stop, w.k_cap, rng.gen, g.n)
        return hits, int(steps)
    streams = rng.spawn(threads)
    # Thread i runs share i of every request.
    shares = np.array([_split(int(c), threads) for c in counts], dtype=np.int64).reshape(-1, threads)
    jobs = [
        (lambda i=i: _walk_requests(*args, shares[:, i].copy(), w.stop, w.k_cap, streams[i].gen, g.n))
        for i in range(threads)
    ]
    return _run_parallel(jobs, threads)


def alias_walk_counts(
    g: Graph,
    table: AliasTable,
    starts: np.ndarray,
    hops: np.ndarray,
    count: int,
    w: PoissonWeights,
    rng: RandomSource,
    threads: int = 1,
) -> tuple[np.ndarray, int]:
    """Run ``count`` walks whose ``(start, hop)`` slot is drawn from ``table``."""
    starts = np.ascontiguousarray(starts, dtype=np.int64)
    hops = np.ascontiguousarray(hops, dtype=np.int64)
    _check_starts(g, starts)
    args = (g.offsets, g.adjacency, table.probabilities, table.aliases, starts, hops)
    if threads <= 1:
        hits, steps = _walk_from_alias(*args, int(count), w.stop, w.k_cap, rng.gen, g.n)
        return hits, int(steps)
    streams = rng.spawn(threads)
    jobs = [
        (lambda i=i, c=c: _walk_from_alias(*args, c, w.stop, w.k_cap, streams[i].gen, g.n))
        for i, c in enumerate(_split(int(count), threads))
    ]
    return _run_parallel(jobs, threads)


def plain_walk_counts(
    g: Graph,
    s: int,
    lengths: AliasTable,
    count: int,
    rng: RandomSource,
    threads: int = 1,
) -> tuple[np.ndarray, int]:
    """Run ``count`` uniform walks from ``s`` with lengths drawn from ``lengths``."""
    g.check_seed(s)
    args = (g.offsets, g.adjacency, s, lengths.probabilities, lengths.aliases)
    if threads <= 1:
        hits, steps = _plain_walks(*args, int(count), rng.gen, g.n)
        return hits, int(steps)
    streams = rng.spawn(threads)
    jobs = [
        (lambda i=i, c=c: _plain_walks(*args, c, streams[i].gen, g.n))
        for i, c in enumerate(_split(int(count), threads))
    ]
    return _run_parallel(jobs, threads)


def run_walk_batch(
    g: Graph,
    requests: list[WalkRequest],
    w: PoissonWeights,
    rng: RandomSource,
    accumulate_into: dict[int, float],
    weight_per_walk: float,
    threads: int = 1,
) -> dict[int, float]:
    """Credit ``weight_per_walk`` to the endpoint of every requested walk.

    Endpoints are tallied first and merged into ``accumulate_into`` in node
    order, so the result does not depend on thread scheduling.
    """
    if not weight_per_walk > 0:
        raise ParameterError("weight_per_walk must be positive")
    if not requests:
        return accumulate_into
    hits, _ = walk_endpoint_counts(g, requests, w, rng, threads)
    for v in np.flatnonzero(hits):
        accumulate_into[int(v)] = accumulate_into.get(int(v), 0.0) + int(hits[v]) * weight_per_walk
    return accumulate_into
