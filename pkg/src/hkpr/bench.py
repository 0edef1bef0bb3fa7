"""Parameter-sweep experiment driver, synthetic graphs and CSV records."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import TextIO

import networkx as nx
import numpy as np

from .clustering import sweep
from .errors import ParameterError
from .estimators import METHODS, HkprParams, estimate
from .graph import Graph, from_raw_edges, load_edge_list
from .oracle import best_f1, exact_hkpr, load_communities, ndcg_at
from .sampling import RandomSource
from .weights import poisson_weights

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "method", "eps_r", "delta", "t", "c", "seed_node", "wall_ms", "pushes",
    "walks", "cluster_size", "conductance", "ndcg", "f1", "error",
)


def generate_synthetic(kind: str, size: int, seed: int = 0, m: int = 5, p: float = 0.5) -> Graph:
    """Holme-Kim power-law cluster graph on ``size`` nodes, or a 3-D torus of side ``size``.

    Labels are the generator's node ids; compact ids follow first appearance
    in the edge list, as if the graph had been loaded from a file.
    """
    if kind == "powerlaw_cluster":
        if size < 8:
            raise ParameterError("powerlaw_cluster needs at least 8 nodes")
        if not 1 <= m < size or not 0 <= p <= 1:
            raise ParameterError("need 1 <= m < size and 0 <= p <= 1")
        nxg = nx.powerlaw_cluster_graph(size, m, p, seed=seed)
        return from_raw_edges(np.array(list(nxg.edges()), dtype=np.int64))
    if kind == "grid3d":
        if size < 3:
            raise ParameterError("grid3d side must be at least 3 for degree 6")
        idx = np.arange(size**3).reshape(size, size, size)
        pairs = [
            np.stack([idx.ravel(), np.roll(idx, -1, axis=a).ravel()], axis=1) for a in range(3)
        ]
        return from_raw_edges(np.concatenate(pairs))
    raise ParameterError(f"unknown synthetic graph kind {kind!r}")


@dataclass
class ExperimentSpec:
    """One sweep over ``methods x deltas x eps_rs x ts x cs``.

    Exactly one of ``graph`` (edge-list path) and ``generator`` (keyword
    arguments of :func:`generate_synthetic`) is set. ``seeds`` lists raw
    seed ids or, as an int, asks for that many random non-isolated nodes.
    ``deltas`` entries may be the string ``"1/n"``.
    """

    graph: str | None = None
    generator: dict | None = None
    seeds: list | int = 10
    methods: list[str] = field(default_factory=lambda: ["tea+"])
    deltas: list = field(default_factory=lambda: ["1/n"])
    eps_rs: list[float] = field(default_factory=lambda: [0.5])
    ts: list[float] = field(default_factory=lambda: [5.0])
    cs: list[float] = field(default_factory=lambda: [2.5])
    p_f: float = 1e-6
    repetitions: int = 1
    master_seed: int = 0
    ndcg: bool = False
    top_k: int = 100
    ground_truth: str | None = None
    warmup: bool = True
    index_base: int = 0
    header: bool = False

    def __post_init__(self):
        if (self.graph is None) == (self.generator is None):
            raise ParameterError("set exactly one of 'graph' and 'generator'")
        grid = (self.methods, self.deltas, self.eps_rs, self.ts, self.cs)
        if not all(grid):
            raise ParameterError("every grid axis needs at least one value")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ParameterError(f"unknown method(s): {', '.join(sorted(bad))}")
        if self.repetitions < 1:
            raise ParameterError("repetitions must be at least 1")

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentSpec:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ParameterError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        return cls(**raw)

    def load_graph(self) -> Graph:
        if self.graph is not None:
            return load_edge_list(self.graph, index_base=self.index_base, header=self.header)
        return generate_synthetic(**self.generator)


@dataclass
class RunRecord:
    method: str
    eps_r: float
    delta: float
    t: float
    c: float
    seed_node: str
    wall_ms: float
    pushes: float
    walks: int
    cluster_size: int
    conductance: float
    ndcg: float | None = None
    f1: float | None = None
    error: str | None = None


def resolve_delta(value, g: Graph) -> float:
    if isinstance(value, str):
        if value.strip() == "1/n":
            return 1.0 / g.n
        return float(value)
    return float(value)


def pick_seeds(g: Graph, spec_seeds, master_seed: int) -> list[int]:
    if isinstance(spec_seeds, int):
        candidates = np.flatnonzero(g.degrees > 0)
        count = min(spec_seeds, len(candidates))
        rng = RandomSource(master_seed)
        return [int(v) for v in rng.gen.choice(candidates, size=count, replace=False)]
    return [g.node(s) for s in spec_seeds]


def run_source(master_seed: int, config: int, seed_index: int, rep: int) -> RandomSource:
    """RNG for one run, derived from the master seed and the run's grid position."""
    seq = np.random.SeedSequence([master_seed, config, seed_index, rep])
    return RandomSource(int(seq.generate_state(1, np.uint64)[0]))


def run_experiments(spec: ExperimentSpec, g: Graph | None = None) -> list[RunRecord]:
    """Run every grid point on every seed node, ``repetitions`` times each.

    Each run gets its own RNG stream derived from the master seed and the
    run's position in the sweep, so results do not depend on which runs
    came before. Failures are recorded in ``error`` and do not stop the sweep.
    """
    g = spec.load_graph() if g is None else g
    seeds = pick_seeds(g, spec.seeds, spec.master_seed)
    communities = load_communities(spec.ground_truth) if spec.ground_truth else None
    records: list[RunRecord] = []
    grid = list(itertools.product(spec.methods, spec.deltas, spec.eps_rs, spec.ts, spec.cs))
    weights = {t: poisson_weights(t) for t in spec.ts}
    exact_cache: dict[tuple, object] = {}
    warmed: set[str] = set()

    for gi, (method, delta_raw, eps_r, t, c) in enumerate(grid):
        delta = resolve_delta(delta_raw, g)
        w = weights[t]
        params = HkprParams(t=t, eps_r=eps_r, delta=delta, p_f=spec.p_f, c=c)
        if spec.warmup and method not in warmed and seeds:
            # Compiles kernels and warms caches; not timed or recorded.
            try:
                estimate(method, g, seeds[0], params, w, RandomSource(spec.master_seed))
            except Exception:  # noqa: BLE001 - the timed run will record it
                pass
            warmed.add(method)
        for si, s in enumerate(seeds):
            for rep in range(spec.repetitions):
                rng = run_source(spec.master_seed, gi, si, rep)
                records.append(
                    _one_run(g, method, params, s, w, rng, spec, communities, exact_cache)
                )
    return records


def _one_run(g, method, params, s, w, rng, spec, communities, exact_cache) -> RunRecord:
    base = dict(
        method=method, eps_r=params.eps_r, delta=params.delta, t=params.t, c=params.c,
        seed_node=g.label(s),
    )
    try:
        start = time.perf_counter()
        est = estimate(method, g, s, params, w, rng)
        result = sweep(g, est)
        wall_ms = (time.perf_counter() - start) * 1e3
        cluster = result.best_cluster
        rec = RunRecord(
            **base, wall_ms=wall_ms, pushes=est.pushes, walks=est.walks,
            cluster_size=len(cluster), conductance=result.best_conductance,
        )
        if spec.ndcg:
            key = (s, params.t)
            if key not in exact_cache:
                exact_cache[key] = exact_hkpr(g, s, w)
            rec.ndcg = ndcg_at(est, exact_cache[key], g, spec.top_k)
        if communities is not None:
            rec.f1 = best_f1([g.label(v) for v in cluster], communities)
        return rec
    except Exception as exc:  # noqa: BLE001 - recorded per run
        log.warning("run %s on seed %s failed: %s", method, base["seed_node"], exc)
        return RunRecord(
            **base, wall_ms=math.nan, pushes=math.nan, walks=0, cluster_size=0,
            conductance=math.nan, error=str(exc),
        )


def write_csv(records: list[RunRecord], dest: TextIO) -> None:
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = asdict(rec)
        writer.writerow(["" if row[k] is None else _fmt(row[k]) for k in CSV_COLUMNS])


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


_FLOAT_COLS = {"eps_r", "delta", "t", "c", "wall_ms", "pushes", "conductance", "ndcg", "f1"}
_INT_COLS = {"walks", "cluster_size"}


def read_csv(src: TextIO) -> list[RunRecord]:
    out = []
    for row in csv.DictReader(src):
        kwargs = {}
        for k in CSV_COLUMNS:
            v = row[k]
            if v == "":
                kwargs[k] = None
            elif k in _FLOAT_COLS:
                kwargs[k] = float(v)
            elif k in _INT_COLS:
                kwargs[k] = int(v)
            else:
                kwargs[k] = v
        out.append(RunRecord(**kwargs))
    return out


def summarize(records: list[RunRecord]) -> list[dict]:
    """Per-configuration means (and standard errors) over successful runs."""
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        if rec.error is None:
            groups.setdefault((rec.method, rec.eps_r, rec.delta, rec.t, rec.c), []).append(rec)
    out = []
    for key, recs in groups.items():
        row = dict(zip(("method", "eps_r", "delta", "t", "c"), key), runs=len(recs))
        for col in ("wall_ms", "pushes", "walks", "cluster_size", "conductance"):
            vals = np.array([getattr(r, col) for r in recs], dtype=float)
            row[col] = float(vals.mean())
            row[f"{col}_se"] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        out.append(row)
    return out
