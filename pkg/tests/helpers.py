"""Shared fixtures-as-functions for the test suite."""

from __future__ import annotations

import math

import numpy as np

from hkpr.graph import Graph, from_edges, loads_edge_list
from hkpr.oracle import h_matrices

TOY_TEXT = "s v1\ns v2\nv1 v2\nv1 v3\nv2 v4\nv2 v5\nv2 v6\nv2 v7\n"
TAU = 1 - 4 / math.e**3
TOY_DELTA = 2 * TAU / 9
S, V1, V2, V3 = 0, 1, 2, 3


def toy_graph() -> Graph:
    return loads_edge_list(TOY_TEXT)


def connected_graph(rng: np.random.Generator, n: int, extra: float = 0.3) -> Graph:
    """Random spanning tree plus each remaining pair with probability ``extra``."""
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra:
                edges.append((u, v))
    return from_edges(n, edges)


def cyclic_graph(rng: np.random.Generator, n: int, extra: float = 0.3) -> Graph:
    """Connected and with average degree above 1 (needs a cycle)."""
    while True:
        g = connected_graph(rng, n, extra)
        if g.m > g.n - 1:
            return g


def barbell() -> Graph:
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    edges += [(u + 4, v + 4) for u, v in edges]
    edges.append((3, 4))
    return from_edges(8, edges)


def reconstruct(state, H: np.ndarray, n: int) -> np.ndarray:
    """``q + sum_{u,k} r_k[u] h_u^(k)`` from a push state and oracle h tables."""
    out = state.dense_reserve(n)
    if len(state.residue_values):
        hops = np.minimum(state.residue_hops, len(H) - 1)
        out += state.residue_values @ H[hops, state.residue_nodes]
    return out


def h_table(g: Graph, w, hops: int) -> np.ndarray:
    return h_matrices(g, w, hops)


def approx_violations(est_eff: np.ndarray, rho: np.ndarray, deg: np.ndarray, eps: float, delta: float):
    """Per-class (above, below delta) violation flags of the approximation guarantee."""
    mask = deg > 0
    est_n = est_eff[mask] / deg[mask]
    rho_n = rho[mask] / deg[mask]
    err = np.abs(est_n - rho_n)
    above = rho_n > delta
    bad_above = bool(np.any(err[above] > eps * rho_n[above] + 1e-12))
    bad_below = bool(np.any(err[~above] > eps * delta + 1e-12))
    return bad_above, bad_below
