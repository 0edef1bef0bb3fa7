"""End-to-end HKPR estimators: Monte Carlo, TEA and TEA+."""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError
from .graph import Graph
from .push import PushState, hk_push, hk_push_plus, select_K
from .sampling import RandomSource, build_alias
from .walks import alias_walk_counts, plain_walk_counts
from .weights import PoissonWeights, poisson_weights

METHODS = ("mc", "tea", "tea+")


@dataclass(frozen=True)
class HkprParams:
    """Estimator parameters.

    ``delta=None`` resolves to ``1/n`` for the graph at hand. ``r_max``
    (TEA), ``K`` and ``push_budget`` (TEA+) override the derived defaults.
    """

    t: float = 5.0
    eps_r: float = 0.5
    delta: float | None = None
    p_f: float = 1e-6
    c: float = 2.5
    r_max: float | None = None
    K: int | None = None
    push_budget: float | None = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not self.t > 0:
            raise ParameterError(f"t must be positive, got {self.t}")
        if not 0 < self.eps_r < 1:
            raise ParameterError(f"eps_r must lie in (0, 1), got {self.eps_r}")
        if not 0 < self.p_f < 1:
            raise ParameterError(f"p_f must lie in (0, 1), got {self.p_f}")
        if self.delta is not None:
            if not self.delta > 0:
                raise ParameterError(f"delta must be positive, got {self.delta}")
            if not self.delta * self.eps_r < 1:
                raise ParameterError("delta * eps_r must be below 1")
        if not self.c > 0:
            raise ParameterError("c must be positive")
        if self.r_max is not None and not self.r_max > 0:
            raise ParameterError("r_max must be positive")
        if self.K is not None and self.K < 1:
            raise ParameterError("K must be at least 1")
        if self.push_budget is not None and not self.push_budget >= 1:
            raise ParameterError("push budget must be at least 1")
        if self.threads < 1:
            raise ParameterError("threads must be at least 1")

    def resolve_delta(self, g: Graph) -> float:
        return 1.0 / g.n if self.delta is None else self.delta

    def with_(self, **changes) -> HkprParams:
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class ApproxHkpr:
    """Sparse HKPR estimate sorted by node.

    The effective estimate of ``v`` is ``values[v] + offset_coeff * d(v)``;
    the offset is never written per node.
    """

    nodes: np.ndarray
    values: np.ndarray
    offset_coeff: float = 0.0
    meta: dict = field(default_factory=dict)

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.nodes.tolist(), self.values.tolist()))

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.nodes] = self.values
        return out

    def effective(self, g: Graph) -> np.ndarray:
        """Dense effective estimate including the degree-scaled offset."""
        return self.dense(g.n) + self.offset_coeff * g.degrees

    @property
    def walks(self) -> int:
        return int(self.meta.get("walks", 0))

    @property
    def pushes(self) -> float:
        return float(self.meta.get("pushes", 0))


@dataclass(frozen=True, eq=False)
class ResidueReduction:
    """Per-hop shares ``beta`` and the amounts ``rb`` removed from each residue.

    ``rb`` is aligned with the residue triplets of the state before reduction.
    """

    beta: np.ndarray
    rb: np.ndarray
    alpha_before: float
    alpha_after: float


_pf_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def adjusted_failure_prob(g: Graph, p_f: float) -> float:
    """``p_f`` shrunk by ``S = sum_v p_f^(d(v)-1)`` when ``S > 1``.

    Degree-0 nodes are skipped: they can never carry an estimate.
    """
    if not 0 < p_f < 1:
        raise ParameterError(f"p_f must lie in (0, 1), got {p_f}")
    per_graph = _pf_cache.setdefault(g, {})
    if p_f not in per_graph:
        deg = g.degrees[g.degrees > 0].astype(np.float64)
        s = math.fsum(np.power(p_f, deg - 1.0))
        per_graph[p_f] = p_f if s <= 1 else p_f / s
    return per_graph[p_f]


def tea_omega(g: Graph, params: HkprParams) -> float:
    delta = params.resolve_delta(g)
    pf = adjusted_failure_prob(g, params.p_f)
    return 2 * (1 + params.eps_r / 3) * math.log(1 / pf) / (params.eps_r**2 * delta)


def tea_plus_omega(g: Graph, params: HkprParams) -> float:
    delta = params.resolve_delta(g)
    pf = adjusted_failure_prob(g, params.p_f)
    return 8 * (1 + params.eps_r / 6) * math.log(1 / pf) / (params.eps_r**2 * delta)


def monte_carlo_walks(g: Graph, params: HkprParams) -> int:
    delta = params.resolve_delta(g)
    eps = params.eps_r
    return math.ceil(2 * (1 + eps / 3) * math.log(g.n / params.p_f) / (eps**2 * delta))


def _weights(params: HkprParams, w: PoissonWeights | None) -> PoissonWeights:
    if w is None:
        return poisson_weights(params.t)
    if w.t != params.t:
        raise ParameterError(f"weights built for t={w.t}, params ask for t={params.t}")
    return w


def _rng(params: HkprParams, rng: RandomSource | None) -> RandomSource:
    return RandomSource(params.seed) if rng is None else rng


def _sparse(dense: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.flatnonzero(dense)
    return nodes, dense[nodes]


def monte_carlo(
    g: Graph,
    s: int,
    params: HkprParams,
    w: PoissonWeights | None = None,
    rng: RandomSource | None = None,
) -> ApproxHkpr:
    """Endpoint frequencies of Poisson-length uniform walks from ``s``."""
    g.check_seed(s)
    w, rng = _weights(params, w), _rng(params, rng)
    n_r = monte_carlo_walks(g, params)
    lengths = build_alias(w.length_weights)
    hits, steps = plain_walk_counts(g, s, lengths, n_r, rng, params.threads)
    nodes = np.flatnonzero(hits)
    meta = {"estimator": "mc", "walks": n_r, "pushes": 0.0, "alpha": 1.0, "steps": steps}
    return ApproxHkpr(nodes, hits[nodes] / n_r, 0.0, meta)


def _walk_phase(g, state: PushState, omega, w, rng, threads):
    """Reserves plus ``alpha/n_r`` per walk endpoint, walks drawn from the residues."""
    alpha = state.residue_total()
    est = state.dense_reserve(g.n)
    n_r = math.ceil(alpha * omega) if alpha > 0 else 0
    steps = 0
    if n_r > 0:
        table = build_alias(state.residue_values)
        hits, steps = alias_walk_counts(
            g, table, state.residue_nodes, state.residue_hops, n_r, w, rng, threads
        )
        est += hits * (alpha / n_r)
    return est, alpha, n_r, steps


def tea(
    g: Graph,
    s: int,
    params: HkprParams,
    w: PoissonWeights | None = None,
    rng: RandomSource | None = None,
) -> ApproxHkpr:
    """HK-Push down to ``r_max`` then random walks from the leftover residues."""
    g.check_seed(s)
    w, rng = _weights(params, w), _rng(params, rng)
    omega = tea_omega(g, params)
    r_max = params.r_max if params.r_max is not None else 1.0 / (omega * params.t)
    state = hk_push(g, s, r_max, w)
    est, alpha, n_r, steps = _walk_phase(g, state, omega, w, rng, params.threads)
    nodes, values = _sparse(est)
    meta = {
        "estimator": "tea",
        "walks": n_r,
        "pushes": state.pushes,
        "alpha": alpha,
        "steps": steps,
        "omega": omega,
        "r_max": r_max,
    }
    return ApproxHkpr(nodes, values, 0.0, meta)


def reduce_residues(
    state: PushState, eps_r: float, delta: float, g: Graph
) -> tuple[PushState, ResidueReduction]:
    """Shave every hop-``k`` residue by ``beta_k * eps_r * delta * d(u)``.

    ``beta_k`` is hop ``k``'s share of the total residue. Entries that reach
    zero are dropped.
    """
    alpha = state.residue_total()
    if not alpha > 0:
        raise ParameterError("residue reduction needs a positive total residue")
    beta = state.residue_sums() / alpha
    cap = beta[state.residue_hops] * (eps_r * delta) * g.degrees[state.residue_nodes]
    rb = np.minimum(state.residue_values, cap)
    left = np.maximum(0.0, state.residue_values - cap)
    keep = left > 0
    reduced = replace(
        state,
        residue_hops=state.residue_hops[keep],
        residue_nodes=state.residue_nodes[keep],
        residue_values=left[keep],
    )
    return reduced, ResidueReduction(beta, rb, alpha, reduced.residue_total())


def tea_plus_plan(g: Graph, params: HkprParams) -> tuple[float, float, int]:
    """``(omega, push budget, K)`` used by :func:`tea_plus`."""
    omega = tea_plus_omega(g, params)
    n_p = params.push_budget if params.push_budget is not None else omega * params.t / 2
    if params.K is not None:
        K = params.K
    else:
        K = select_K(params.eps_r, params.resolve_delta(g), 2 * g.m / g.n, params.c)
    return omega, n_p, K


def tea_plus(
    g: Graph,
    s: int,
    params: HkprParams,
    w: PoissonWeights | None = None,
    rng: RandomSource | None = None,
) -> ApproxHkpr:
    """Budgeted HK-Push+, residue reduction, then walks with a lazy offset."""
    g.check_seed(s)
    w, rng = _weights(params, w), _rng(params, rng)
    delta = params.resolve_delta(g)
    omega, n_p, K = tea_plus_plan(g, params)
    state, converged = hk_push_plus(g, s, params.eps_r, delta, K, max(n_p, 1.0), w)
    meta = {
        "estimator": "tea+",
        "walks": 0,
        "pushes": state.pushes,
        "alpha": state.residue_total(),
        "steps": 0,
        "omega": omega,
        "K": K,
        "converged": converged,
    }
    if converged:
        nodes, values = _sparse(state.dense_reserve(g.n))
        return ApproxHkpr(nodes, values, 0.0, meta)
    if state.residue_total() > 0:
        state, _ = reduce_residues(state, params.eps_r, delta, g)
    est, alpha, n_r, steps = _walk_phase(g, state, omega, w, rng, params.threads)
    meta.update(walks=n_r, alpha=alpha, steps=steps)
    nodes, values = _sparse(est)
    return ApproxHkpr(nodes, values, params.eps_r * delta / 2, meta)


ESTIMATORS = {"mc": monte_carlo, "tea": tea, "tea+": tea_plus}


def estimate(
    method: str,
    g: Graph,
    s: int,
    params: HkprParams,
    w: PoissonWeights | None = None,
    rng: RandomSource | None = None,
) -> ApproxHkpr:
    if method not in ESTIMATORS:
        raise ParameterError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return ESTIMATORS[method](g, s, params, w, rng)
