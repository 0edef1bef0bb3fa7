"""Immutable undirected graphs in CSR form and edge-list ingestion."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import GraphFormatError, ParameterError

log = logging.getLogger(__name__)

COMMENT_PREFIXES = ("#", "%")


@dataclass(frozen=True)
class IngestReport:
    """Counters for input anomalies dropped during ingestion."""

    edge_lines: int = 0
    self_loops: int = 0
    duplicates: int = 0


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph stored as CSR arrays.

    ``offsets[v]:offsets[v+1]`` slices ``adjacency`` to give the sorted
    neighbours of ``v``. ``labels[v]`` is the raw id the node had in the
    input, so output can be reported in the caller's id space.
    """

    offsets: np.ndarray
    adjacency: np.ndarray
    labels: tuple[str, ...]
    report: IngestReport = field(default_factory=IngestReport)

    def __post_init__(self):
        for arr in (self.offsets, self.adjacency):
            arr.setflags(write=False)
        degrees = np.diff(self.offsets)
        degrees.setflags(write=False)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(self.labels)})

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def m(self) -> int:
        return len(self.adjacency) // 2

    @property
    def volume(self) -> int:
        return len(self.adjacency)

    def neighbors(self, v: int) -> np.ndarray:
        return self.adjacency[self.offsets[v]:self.offsets[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def node(self, label: str | int) -> int:
        """Compact id of a raw label; ``KeyError`` if absent."""
        key = str(label)
        if key not in self._index:
            raise KeyError(key)
        return self._index[key]

    def label(self, v: int) -> str:
        return self.labels[v]

    def edges(self) -> Iterable[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    def check_seed(self, s: int) -> None:
        if not 0 <= s < self.n:
            raise ParameterError(f"seed node {s} out of range [0, {self.n})")
        if self.degree(s) == 0:
            raise ParameterError(f"seed node {self.labels[s]!r} has degree 0")

    def same_as(self, other: Graph) -> bool:
        return (
            self.labels == other.labels
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.adjacency, other.adjacency)
        )


def from_edges(
    n: int,
    edges: Iterable[tuple[int, int]] | np.ndarray,
    labels: Iterable[str] | None = None,
    dedup: bool = True,
) -> Graph:
    """Build a graph on nodes ``0..n-1`` from compact-id edge pairs.

    Self-loops are dropped; duplicates (in either orientation) are dropped
    when ``dedup`` is set and rejected otherwise.
    """
    pairs = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    pairs = pairs.reshape(-1, 2)
    if n <= 0:
        raise GraphFormatError("graph has no nodes")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise GraphFormatError("edge endpoint outside node range")
    n_lines = len(pairs)
    loops = pairs[:, 0] == pairs[:, 1]
    pairs = pairs[~loops]
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * n + hi)
    n_dups = len(pairs) - len(keys)
    if n_dups and not dedup:
        raise GraphFormatError(f"{n_dups} duplicate edge(s) with dedup disabled")
    lo, hi = keys // n, keys % n
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    labels = tuple(str(x) for x in labels) if labels is not None else tuple(str(i) for i in range(n))
    if len(labels) != n:
        raise GraphFormatError("label count does not match node count")
    report = IngestReport(edge_lines=n_lines, self_loops=int(loops.sum()), duplicates=int(n_dups))
    return Graph(offsets, dst.astype(np.int32), labels, report)


def from_raw_edges(pairs: np.ndarray) -> Graph:
    """Graph over integer raw ids, compacted in order of first appearance.

    This is the numbering :func:`load_edge_list` would assign to the same
    edges, so such graphs survive :func:`write_edge_list` round trips.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        raise GraphFormatError("empty graph")
    raw, first, inverse = np.unique(pairs.ravel(), return_index=True, return_inverse=True)
    rank = np.empty(len(raw), dtype=np.int64)
    order = np.argsort(first, kind="stable")
    rank[order] = np.arange(len(raw))
    compact = rank[inverse].reshape(-1, 2)
    return from_edges(len(raw), compact, [str(x) for x in raw[order]])


def _tokens(source: TextIO):
    for lineno, line in enumerate(source, 1):
        stripped = line.strip()
        if not stripped or stripped.startswith(COMMENT_PREFIXES):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected two node ids, got {stripped!r}")
        yield lineno, parts


def load_edge_list(
    source: TextIO | str | Path,
    index_base: int = 0,
    dedup: bool = True,
    header: bool = False,
) -> Graph:
    """Parse a whitespace-separated edge list into a :class:`Graph`.

    Raw ids are compacted to ``0..n-1`` in order of first appearance. With
    ``header=True`` the first data line is read as ``n m``: ``n`` may exceed
    the number of ids seen, in which case the missing integer ids from
    ``index_base .. index_base+n-1`` are added as isolated nodes, and ``m``
    must equal the number of edge lines.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return load_edge_list(fh, index_base=index_base, dedup=dedup, header=header)
    if index_base not in (0, 1):
        raise ParameterError("index_base must be 0 or 1")

    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    declared = None
    loops = 0
    for lineno, (a, b) in _tokens(source):
        if header and declared is None:
            try:
                declared = (int(a), int(b))
            except ValueError:
                raise GraphFormatError(f"line {lineno}: malformed header {a} {b}") from None
            continue
        if a == b:
            # Counted but never registered, so loop-only ids do not become isolated nodes.
            loops += 1
            continue
        for tok in (a, b):
            if header:
                try:
                    int(tok)
                except ValueError:
                    raise GraphFormatError(f"line {lineno}: non-integer id {tok!r}") from None
            if tok not in index:
                index[tok] = len(index)
        pairs.append((index[a], index[b]))

    labels = list(index)
    if declared is not None:
        n_decl, m_decl = declared
        if m_decl != len(pairs) + loops:
            raise GraphFormatError(f"header declares {m_decl} edges, found {len(pairs) + loops}")
        if n_decl < len(labels):
            raise GraphFormatError(f"header declares {n_decl} nodes, found {len(labels)}")
        seen = {int(x) for x in labels}
        for raw in range(index_base, index_base + n_decl):
            if len(labels) == n_decl:
                break
            if raw not in seen:
                labels.append(str(raw))
        if len(labels) != n_decl:
            raise GraphFormatError("declared node count inconsistent with ids present")
    if not pairs:
        raise GraphFormatError("empty graph")

    g = from_edges(len(labels), pairs, labels, dedup=dedup)
    report = IngestReport(len(pairs) + loops, loops, g.report.duplicates)
    g = replace(g, report=report)
    if g.report.self_loops or g.report.duplicates:
        log.warning(
            "dropped %d self-loop(s) and %d duplicate edge(s)",
            g.report.self_loops,
            g.report.duplicates,
        )
    return g


def loads_edge_list(text: str, **opts) -> Graph:
    return load_edge_list(io.StringIO(text), **opts)


def write_edge_list(g: Graph, dest: TextIO) -> None:
    """Write ``g`` so that :func:`load_edge_list` rebuilds it exactly.

    Edges are ordered so that nodes first appear in compact-id order, which
    the loader relies on. Graphs with isolated nodes get an ``n m`` header,
    so their labels must be integers placed after all non-isolated nodes.
    """
    introduced = np.zeros(g.n, dtype=bool)
    written: set[tuple[int, int]] = set()
    lines: list[tuple[int, int]] = []
    isolated = [v for v in range(g.n) if g.degree(v) == 0]
    for v in range(g.n):
        if introduced[v] or g.degree(v) == 0:
            continue
        nbrs = g.neighbors(v)
        prior = nbrs[introduced[nbrs]]
        if len(prior):
            u = int(prior[0])
            lines.append((u, v))
        elif v + 1 < g.n and v + 1 in nbrs:
            u = v + 1
            lines.append((v, u))
            introduced[u] = True
        else:
            raise ValueError(f"node {v} cannot be introduced in first-appearance order")
        introduced[v] = True
        written.add((min(u, v), max(u, v)))
    lines.extend(e for e in g.edges() if e not in written)
    if isolated:
        if isolated != list(range(g.n - len(isolated), g.n)):
            raise ValueError("isolated nodes must carry the highest compact ids")
        dest.write(f"{g.n} {len(lines)}\n")
    for u, v in lines:
        dest.write(f"{g.labels[u]} {g.labels[v]}\n")


def graph_stats(g: Graph) -> dict[str, float | int]:
    return {
        "n": g.n,
        "m": g.m,
        "avg_degree": 2 * g.m / g.n,
        "max_degree": int(g.degrees.max()) if g.n else 0,
    }
