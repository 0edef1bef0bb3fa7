"""Exact reference vectors and ranking/cluster quality metrics.

Hop weights here come straight from ``scipy.stats.poisson`` so the oracle
shares no arithmetic with :mod:`hkpr.weights`.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.stats import poisson

from .clustering import sweep_order
from .errors import ParameterError
from .graph import Graph
from .weights import PoissonWeights

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExactHkpr:
    """Power-method HKPR truncated after ``iterations`` hops.

    ``tail_mass`` is the Poisson mass of all longer walks, so
    ``1 - tail_mass <= values.sum() <= 1``.
    """

    values: np.ndarray
    iterations: int
    tail_mass: float


def _adjacency(g: Graph) -> sp.csr_matrix:
    data = np.ones(len(g.adjacency))
    return sp.csr_matrix((data, g.adjacency, g.offsets), shape=(g.n, g.n))


def _inv_degrees(g: Graph) -> np.ndarray:
    deg = g.degrees.astype(np.float64)
    return np.divide(1.0, deg, out=np.zeros_like(deg), where=deg > 0)


def _step(a: sp.csr_matrix, inv_d: np.ndarray, x: np.ndarray) -> np.ndarray:
    # x P with P = D^-1 A and A symmetric.
    return a @ (x * inv_d)


def exact_hkpr(g: Graph, s: int, w: PoissonWeights, iterations: int = 40) -> ExactHkpr:
    """``sum_{k<=iterations} eta(k) e_s P^k``."""
    g.check_seed(s)
    if iterations < 0:
        raise ParameterError("iterations must be non-negative")
    eta = poisson.pmf(np.arange(iterations + 1), w.t)
    a, inv_d = _adjacency(g), _inv_degrees(g)
    x = np.zeros(g.n)
    x[s] = 1.0
    out = eta[0] * x
    for k in range(1, iterations + 1):
        x = _step(a, inv_d, x)
        out += eta[k] * x
    return ExactHkpr(out, iterations, float(poisson.sf(iterations, w.t)))


def transition_rows(g: Graph, u: int, length: int) -> np.ndarray:
    """Rows ``P^l[u, :]`` for ``l = 0..length`` stacked as a matrix."""
    a, inv_d = _adjacency(g), _inv_degrees(g)
    rows = np.zeros((length + 1, g.n))
    rows[0, u] = 1.0
    for ell in range(1, length + 1):
        rows[ell] = _step(a, inv_d, rows[ell - 1])
    return rows


def transition_power(g: Graph, k: int) -> np.ndarray:
    """Dense ``P^k``; for small graphs."""
    p = _inv_degrees(g)[:, None] * _adjacency(g).toarray()
    return np.linalg.matrix_power(p, k)


def h_oracle(
    g: Graph, u: int, k: int, w: PoissonWeights, iterations: int | None = None
) -> np.ndarray:
    """Endpoint distribution of a walk that is at ``u`` after ``k`` hops.

    ``sum_l eta(k+l)/psi(k) P^l[u, :]``. Without ``iterations`` the sum runs
    until the conditional tail drops below 1e-17.
    """
    g.check_seed(u)
    if k < 0:
        raise ParameterError("hop index must be non-negative")
    psi_k = float(poisson.sf(k - 1, w.t))
    if psi_k < w.tail_tol:
        raise ParameterError(f"hop {k} has tail mass {psi_k:.3g}, below tolerance")
    if iterations is None:
        iterations = 0
        while poisson.sf(k + iterations, w.t) / psi_k > 1e-17 and iterations < 2000:
            iterations += 1
    coeff = poisson.pmf(np.arange(k, k + iterations + 1), w.t) / psi_k
    return coeff @ transition_rows(g, u, iterations)


def h_matrices(g: Graph, w: PoissonWeights, hops: int, iterations: int = 80) -> np.ndarray:
    """``out[k, u, :] = h_oracle(g, u, k)`` for every node and ``k < hops``; dense, small graphs.

    Rows of degree-0 nodes and hops whose tail mass is below ``w.tail_tol``
    are left as indicators, matching forced termination.
    """
    powers = np.empty((iterations + 1, g.n, g.n))
    powers[0] = np.eye(g.n)
    p = _inv_degrees(g)[:, None] * _adjacency(g).toarray()
    for ell in range(1, iterations + 1):
        powers[ell] = powers[ell - 1] @ p
    out = np.empty((hops, g.n, g.n))
    for k in range(hops):
        psi_k = float(poisson.sf(k - 1, w.t))
        if psi_k < w.tail_tol:
            out[k] = np.eye(g.n)
            continue
        coeff = poisson.pmf(np.arange(k, k + iterations + 1), w.t) / psi_k
        out[k] = np.tensordot(coeff, powers, axes=1)
    out[:, g.degrees == 0, :] = np.eye(g.n)[g.degrees == 0]
    return out


def brute_force_hkpr(g: Graph, s: int, t: float, max_len: int) -> np.ndarray:
    """Sum ``eta(l) * prob(path)`` over every walk of length at most ``max_len``."""
    if g.n > 6:
        raise ParameterError("path enumeration is limited to graphs with n <= 6")
    out = np.zeros(g.n)
    frontier = {(s,): 1.0}
    for ell in range(max_len + 1):
        eta = math.exp(-t) * t**ell / math.factorial(ell)
        nxt: dict[tuple, float] = {}
        for path, prob in frontier.items():
            out[path[-1]] += eta * prob
            nbrs = g.neighbors(path[-1])
            for v in nbrs:
                nxt[path + (int(v),)] = prob / len(nbrs)
        frontier = nxt
    return out


def ndcg_at(est, exact: ExactHkpr, g: Graph, top_k: int = 100) -> float:
    """NDCG of the estimate's ranking with exact ``rho/d`` as graded relevance.

    Ranks the estimate's nonzero support by ``value/d`` (the lazy offset
    does not change this order), ties broken by node id.
    """
    if top_k < 1:
        raise ParameterError("top_k must be at least 1")
    order = sweep_order(g, est)
    if top_k > len(order):
        log.warning("top_k=%d exceeds estimate support %d; clamping", top_k, len(order))
        top_k = len(order)
    if top_k == 0:
        return 0.0
    rel = exact.values * _inv_degrees(g)
    discount = 1.0 / np.log2(np.arange(2, top_k + 2))
    dcg = float(rel[order[:top_k]] @ discount)
    ideal = float(np.sort(rel)[::-1][:top_k] @ discount)
    return dcg / ideal if ideal > 0 else 0.0


def f1_score(cluster, ground_truth) -> float:
    """Harmonic mean of precision and recall of ``cluster`` against ``ground_truth``."""
    found, truth = set(cluster), set(ground_truth)
    if not truth:
        raise ParameterError("ground truth community is empty")
    if not found:
        log.warning("empty cluster scores F1 = 0")
        return 0.0
    hit = len(found & truth)
    if hit == 0:
        return 0.0
    precision, recall = hit / len(found), hit / len(truth)
    return 2 * precision * recall / (precision + recall)


def load_communities(path: str | Path) -> list[list[str]]:
    """One community per line, whitespace-separated raw node ids."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            ids = line.split()
            if ids and not ids[0].startswith(("#", "%")):
                out.append(ids)
    return out


def best_f1(cluster, communities) -> float:
    """Highest F1 of ``cluster`` against any of ``communities``."""
    return max((f1_score(cluster, c) for c in communities), default=0.0)


def subsets(n: int):
    """Every non-empty proper subset of ``range(n)``; for brute-force checks."""
    for r in range(1, n):
        yield from itertools.combinations(range(n), r)
