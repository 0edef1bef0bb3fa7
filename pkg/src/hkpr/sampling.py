"""Seeded random sources and Walker alias tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import ParameterError


@dataclass
class RandomSource:
    """A seeded Philox stream; the same seed always replays the same draws.

    Kernels receive ``gen`` directly. Independent streams for parallel
    batches come from :meth:`spawn`, which derives child seeds from the
    master seed by batch index.
    """

    seed: int
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF
        self.gen = np.random.Generator(np.random.Philox(self.seed))

    def uniform(self) -> float:
        return float(self.gen.random())

    def spawn(self, count: int) -> list[RandomSource]:
        children = np.random.SeedSequence(self.seed).spawn(count)
        return [RandomSource(int(c.generate_state(1, np.uint64)[0])) for c in children]


@dataclass(frozen=True, eq=False)
class AliasTable:
    probabilities: np.ndarray
    aliases: np.ndarray
    total: float

    def __len__(self) -> int:
        return len(self.probabilities)


@nb.njit(cache=True)
def _vose(weights):
    n = len(weights)
    total = 0.0
    for w in weights:
        total += w
    scaled = np.empty(n)
    for i in range(n):
        scaled[i] = weights[i] * n / total
    prob = np.ones(n)
    alias = np.arange(n).astype(np.int64)
    small = np.empty(n, np.int64)
    large = np.empty(n, np.int64)
    ns = 0
    nl = 0
    for i in range(n):
        if scaled[i] < 1.0:
            small[ns] = i
            ns += 1
        else:
            large[nl] = i
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        lo = small[ns]
        hi = large[nl - 1]
        prob[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0
        if scaled[hi] < 1.0:
            nl -= 1
            small[ns] = hi
            ns += 1
    # Leftovers are 1 up to rounding.
    return prob, alias, total


@nb.njit(cache=True)
def alias_draw(prob, alias, gen):
    n = len(prob)
    slot = int(gen.random() * n)
    if slot >= n:
        slot = n - 1
    if gen.random() < prob[slot]:
        return slot
    return alias[slot]


def build_alias(weights) -> AliasTable:
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise ParameterError("alias table needs a non-empty weight vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ParameterError("alias weights must be finite and non-negative")
    if not np.any(w > 0):
        raise ParameterError("alias weights are all zero")
    prob, alias, total = _vose(w)
    return AliasTable(prob, alias, float(total))


def sample(table: AliasTable, rng: RandomSource) -> int:
    return int(alias_draw(table.probabilities, table.aliases, rng.gen))


@nb.njit(cache=True)
def _draw_many(prob, alias, gen, count):
    out = np.empty(count, np.int64)
    for i in range(count):
        out[i] = alias_draw(prob, alias, gen)
    return out


def sample_many(table: AliasTable, rng: RandomSource, count: int) -> np.ndarray:
    return _draw_many(table.probabilities, table.aliases, rng.gen, int(count))
