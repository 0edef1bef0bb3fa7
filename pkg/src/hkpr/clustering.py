"""Conductance and the sweep-cut over an HKPR estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParameterError
from .estimators import ApproxHkpr
from .graph import Graph


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Prefix conductances along the sweep order.

    ``conductances[i]`` belongs to the prefix ``order[:i+1]``. Prefixes whose
    volume reaches ``2m`` are not evaluated, so ``conductances`` may be
    shorter than ``order``.
    """

    order: np.ndarray
    conductances: np.ndarray
    best_index: int

    @property
    def best_cluster(self) -> np.ndarray:
        return np.sort(self.order[: self.best_index + 1])

    @property
    def best_conductance(self) -> float:
        return float(self.conductances[self.best_index])


def conductance(g: Graph, nodes) -> float:
    """``|cut(S)| / min(vol(S), 2m - vol(S))`` computed from scratch."""
    members = np.unique(np.asarray(list(nodes), dtype=np.int64))
    if len(members) == 0 or len(members) >= g.n:
        raise ParameterError("conductance needs a non-empty proper subset")
    if members[0] < 0 or members[-1] >= g.n:
        raise ParameterError("node id out of range")
    inside = np.zeros(g.n, dtype=bool)
    inside[members] = True
    vol = int(g.degrees[members].sum())
    denom = min(vol, g.volume - vol)
    if denom <= 0:
        raise ParameterError("conductance undefined for zero-volume side")
    internal = 0
    for v in members:
        internal += int(inside[g.neighbors(v)].sum())
    return (vol - internal) / denom


@nb.njit(cache=True)
def _sweep_kernel(offsets, adj, order, total_vol):
    n = len(offsets) - 1
    inside = np.zeros(n, np.uint8)
    out = np.empty(len(order))
    vol = 0
    cut = 0
    cnt = 0
    for i in range(len(order)):
        v = order[i]
        d = offsets[v + 1] - offsets[v]
        into = 0
        for j in range(offsets[v], offsets[v + 1]):
            if inside[adj[j]]:
                into += 1
        inside[v] = 1
        vol += d
        cut += d - 2 * into
        if vol >= total_vol:
            break
        denom = min(vol, total_vol - vol)
        out[i] = cut / denom if denom > 0 else np.inf
        cnt += 1
    return out[:cnt]


def sweep_order(g: Graph, est: ApproxHkpr) -> np.ndarray:
    """Support nodes by descending ``value/d``, ties by ascending node id."""
    keep = est.values > 0
    nodes = est.nodes[keep]
    key = est.values[keep] / g.degrees[nodes]
    return nodes[np.lexsort((nodes, -key))]


def sweep(g: Graph, est: ApproxHkpr) -> SweepResult:
    """Best-conductance prefix of the estimate's support.

    The lazy offset of ``est`` is a uniform shift of ``value/d`` and is
    ignored.
    """
    order = sweep_order(g, est)
    if len(order) == 0:
        raise ParameterError("estimate has empty support")
    if np.any(g.degrees[order] == 0):
        raise ParameterError("estimate assigns mass to an isolated node")
    phis = _sweep_kernel(g.offsets, g.adjacency, order.astype(np.int64), g.volume)
    if len(phis) == 0:
        raise ParameterError("no proper prefix to evaluate")
    return SweepResult(order, phis, int(np.argmin(phis)))
