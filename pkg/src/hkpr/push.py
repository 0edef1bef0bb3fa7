"""Deterministic push engines producing reserve and per-hop residue vectors.

Both engines process a FIFO queue of ``(node, hop)`` entries whose residue
exceeds the engine's threshold. One iteration on ``(v, k)`` moves the
``stop(k)`` share of ``r_k[v]`` into the reserve of ``v`` and spreads the
rest evenly over the hop ``k+1`` residues of its neighbours.

Residues live in a dense ``(hops, n)`` scratch array. ``np.zeros`` maps
untouched pages lazily, so the cost stays proportional to the entries a
query actually touches; results are returned as sparse triplets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParameterError
from .graph import Graph
from .weights import PoissonWeights


@dataclass(frozen=True, eq=False)
class PushState:
    """Output of a push engine.

    ``reserve_*`` is sorted by node. Residues are nonzero ``(hop, node,
    value)`` triplets in hop-major, node-ascending order; ``hops`` is the
    number of residue layers the engine worked with.
    """

    reserve_nodes: np.ndarray
    reserve_values: np.ndarray
    residue_hops: np.ndarray
    residue_nodes: np.ndarray
    residue_values: np.ndarray
    hops: int
    pushes: float
    iterations: int

    @property
    def k_max_nonzero(self) -> int:
        return int(self.residue_hops.max()) if len(self.residue_hops) else -1

    def residue_total(self) -> float:
        return math.fsum(self.residue_values)

    def residue_sums(self) -> np.ndarray:
        return np.bincount(self.residue_hops, weights=self.residue_values, minlength=self.hops)

    def max_ratio_sum(self, g: Graph) -> float:
        """``sum_k max_u r_k[u]/d(u)`` over all residue layers."""
        if not len(self.residue_values):
            return 0.0
        ratios = self.residue_values / g.degrees[self.residue_nodes]
        per_hop = np.zeros(self.hops)
        np.maximum.at(per_hop, self.residue_hops, ratios)
        return float(per_hop.sum())

    def reserve_dict(self) -> dict[int, float]:
        return dict(zip(self.reserve_nodes.tolist(), self.reserve_values.tolist()))

    def residue_dict(self, k: int) -> dict[int, float]:
        sel = self.residue_hops == k
        return dict(zip(self.residue_nodes[sel].tolist(), self.residue_values[sel].tolist()))

    def dense_reserve(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.reserve_nodes] = self.reserve_values
        return out

    def dense_residues(self, n: int) -> np.ndarray:
        out = np.zeros((self.hops, n))
        out[self.residue_hops, self.residue_nodes] = self.residue_values
        return out

    def total_mass(self) -> float:
        return math.fsum(self.reserve_values) + self.residue_total()


@nb.njit(cache=True)
def _grow(arr):
    out = np.empty(2 * len(arr), arr.dtype)
    out[: len(arr)] = arr
    return out


@nb.njit(cache=True)
def _collect(reserve, r_list, nr, res, t_hop, t_node, nt):
    nodes = np.sort(r_list[:nr])
    values = np.empty(nr)
    for i in range(nr):
        values[i] = reserve[nodes[i]]
    keys = np.empty(nt, np.int64)
    n = res.shape[1]
    cnt = 0
    for i in range(nt):
        if res[t_hop[i], t_node[i]] != 0.0:
            keys[cnt] = t_hop[i] * n + t_node[i]
            cnt += 1
    keys = np.sort(keys[:cnt])
    hops = keys // n
    rnodes = keys % n
    rvals = np.empty(cnt)
    for i in range(cnt):
        rvals[i] = res[hops[i], rnodes[i]]
    return nodes, values, hops, rnodes, rvals


@nb.njit(cache=True)
def _hk_push_kernel(offsets, adj, deg, s, r_max, stop, hops, max_iter):
    n = len(deg)
    reserve = np.zeros(n)
    res = np.zeros((hops, n))
    inq = np.zeros((hops, n), np.uint8)
    seen = np.zeros((hops, n), np.uint8)
    rseen = np.zeros(n, np.uint8)
    r_list = np.empty(16, np.int64)
    nr = 0
    t_hop = np.empty(16, np.int64)
    t_node = np.empty(16, np.int64)
    nt = 0
    q_hop = np.empty(16, np.int64)
    q_node = np.empty(16, np.int64)
    head = 0
    tail = 0

    res[0, s] = 1.0
    seen[0, s] = 1
    t_hop[0] = 0
    t_node[0] = s
    nt = 1
    if 1.0 > r_max * deg[s]:
        q_hop[0] = 0
        q_node[0] = s
        inq[0, s] = 1
        tail = 1

    pushes = 0.0
    iters = 0
    while head < tail:
        if max_iter >= 0 and iters >= max_iter:
            break
        k = q_hop[head]
        v = q_node[head]
        head += 1
        inq[k, v] = 0
        r = res[k, v]
        res[k, v] = 0.0
        reserve[v] += stop[k] * r
        if not rseen[v]:
            rseen[v] = 1
            if nr == len(r_list):
                r_list = _grow(r_list)
            r_list[nr] = v
            nr += 1
        pushes += deg[v]
        iters += 1
        keep = 1.0 - stop[k]
        if keep <= 0.0:
            continue
        inc = keep * r / deg[v]
        k1 = k + 1
        for j in range(offsets[v], offsets[v + 1]):
            u = adj[j]
            res[k1, u] += inc
            if not seen[k1, u]:
                seen[k1, u] = 1
                if nt == len(t_hop):
                    t_hop = _grow(t_hop)
                    t_node = _grow(t_node)
                t_hop[nt] = k1
                t_node[nt] = u
                nt += 1
            if not inq[k1, u] and res[k1, u] > r_max * deg[u]:
                if tail == len(q_hop):
                    q_hop = _grow(q_hop)
                    q_node = _grow(q_node)
                q_hop[tail] = k1
                q_node[tail] = u
                inq[k1, u] = 1
                tail += 1

    out = _collect(reserve, r_list, nr, res, t_hop, t_node, nt)
    return out, pushes, iters


@nb.njit(cache=True)
def _tree_set(tree, h, leaf0, v, val):
    i = leaf0 + v
    tree[h, i] = val
    i >>= 1
    while i >= 1:
        a = tree[h, 2 * i]
        b = tree[h, 2 * i + 1]
        best = a if a > b else b
        if tree[h, i] == best:
            break
        tree[h, i] = best
        i >>= 1


@nb.njit(cache=True)
def _hk_push_plus_kernel(offsets, adj, deg, s, eps_a, K, n_p, stop, max_iter):
    n = len(deg)
    reserve = np.zeros(n)
    res = np.zeros((K + 1, n))
    inq = np.zeros((K, n), np.uint8)
    seen = np.zeros((K + 1, n), np.uint8)
    rseen = np.zeros(n, np.uint8)
    r_list = np.empty(16, np.int64)
    nr = 0
    t_hop = np.empty(16, np.int64)
    t_node = np.empty(16, np.int64)
    nt = 0
    q_hop = np.empty(16, np.int64)
    q_node = np.empty(16, np.int64)
    head = 0
    tail = 0
    # Per-hop max of r/d for hops < K in a max segment tree; hop K only grows.
    leaf0 = 1
    while leaf0 < n:
        leaf0 <<= 1
    tree = np.zeros((K, 2 * leaf0))
    max_last = 0.0
    th = eps_a / K

    res[0, s] = 1.0
    seen[0, s] = 1
    t_hop[0] = 0
    t_node[0] = s
    nt = 1
    _tree_set(tree, 0, leaf0, s, 1.0 / deg[s])
    if 1.0 > th * deg[s]:
        q_hop[0] = 0
        q_node[0] = s
        inq[0, s] = 1
        tail = 1

    spent = 0.0
    iters = 0
    while head < tail:
        if max_iter >= 0 and iters >= max_iter:
            break
        k = q_hop[head]
        v = q_node[head]
        head += 1
        inq[k, v] = 0
        spent += deg[v]
        ratio_sum = max_last
        for h in range(K):
            ratio_sum += tree[h, 1]
        if spent >= n_p or ratio_sum <= eps_a:
            break
        r = res[k, v]
        res[k, v] = 0.0
        _tree_set(tree, k, leaf0, v, 0.0)
        reserve[v] += stop[k] * r
        if not rseen[v]:
            rseen[v] = 1
            if nr == len(r_list):
                r_list = _grow(r_list)
            r_list[nr] = v
            nr += 1
        iters += 1
        keep = 1.0 - stop[k]
        if keep <= 0.0:
            continue
        inc = keep * r / deg[v]
        k1 = k + 1
        for j in range(offsets[v], offsets[v + 1]):
            u = adj[j]
            res[k1, u] += inc
            if not seen[k1, u]:
                seen[k1, u] = 1
                if nt == len(t_hop):
                    t_hop = _grow(t_hop)
                    t_node = _grow(t_node)
                t_hop[nt] = k1
                t_node[nt] = u
                nt += 1
            ratio = res[k1, u] / deg[u]
            if k1 < K:
                _tree_set(tree, k1, leaf0, u, ratio)
                if not inq[k1, u] and res[k1, u] > th * deg[u]:
                    if tail == len(q_hop):
                        q_hop = _grow(q_hop)
                        q_node = _grow(q_node)
                    q_hop[tail] = k1
                    q_node[tail] = u
                    inq[k1, u] = 1
                    tail += 1
            elif ratio > max_last:
                max_last = ratio

    ratio_sum = max_last
    for h in range(K):
        ratio_sum += tree[h, 1]
    out = _collect(reserve, r_list, nr, res, t_hop, t_node, nt)
    return out, spent, iters, ratio_sum <= eps_a


def _state(out, hops, pushes, iters) -> PushState:
    nodes, values, rh, rn, rv = out
    return PushState(nodes, values, rh, rn, rv, hops, float(pushes), int(iters))


def hk_push(g: Graph, s: int, r_max: float, w: PoissonWeights, max_iterations: int = -1) -> PushState:
    """Push until no residue exceeds ``r_max * d(v)`` at any hop.

    ``max_iterations`` stops the schedule early, yielding the exact state
    at that iteration boundary.
    """
    g.check_seed(s)
    if not r_max > 0:
        raise ParameterError(f"r_max must be positive, got {r_max}")
    hops = w.k_cap + 1
    out, pushes, iters = _hk_push_kernel(
        g.offsets, g.adjacency, g.degrees, s, float(r_max), w.stop, hops, int(max_iterations)
    )
    return _state(out, hops, pushes, iters)


def hk_push_plus(
    g: Graph,
    s: int,
    eps_r: float,
    delta: float,
    K: int,
    n_p: float,
    w: PoissonWeights,
    max_iterations: int = -1,
) -> tuple[PushState, bool]:
    """Budgeted push over hops ``0..K-1``; hop ``K`` residues are never pushed.

    Returns the state and whether ``sum_k max_u r_k[u]/d(u) <= eps_r*delta``
    held on exit.
    """
    g.check_seed(s)
    if K < 1:
        raise ParameterError("K must be at least 1")
    if not n_p >= 1:
        raise ParameterError("push budget must be at least 1")
    stop = w.stop_table(K + 1)
    out, spent, iters, converged = _hk_push_plus_kernel(
        g.offsets, g.adjacency, g.degrees, s, float(eps_r * delta), int(K), float(n_p), stop,
        int(max_iterations),
    )
    return _state(out, K + 1, spent, iters), bool(converged)


def select_K(eps_r: float, delta: float, avg_degree: float, c: float) -> int:
    """Hop cap solving ``(1/avg_degree)^(K/c) = eps_r*delta``, rounded up, at least 1."""
    if not avg_degree > 1:
        raise ParameterError(f"average degree must exceed 1, got {avg_degree}")
    if not c > 0:
        raise ParameterError("c must be positive")
    x = c * math.log(1.0 / (eps_r * delta)) / math.log(avg_degree)
    # Absorb rounding so exact integers are not bumped up by one ulp.
    return max(1, math.ceil(x - 1e-9))
