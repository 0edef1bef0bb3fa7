"""Poisson hop-length weights for the heat kernel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

# exp(-t) underflows past this point and the forward recurrence breaks.
MAX_HEAT = 700.0


@dataclass(frozen=True, eq=False)
class PoissonWeights:
    """Hop weights ``eta[k] = e^-t t^k / k!`` and tails ``psi[k] = sum_{l>=k} eta[l]``.

    Arrays stop at ``k_cap``, the first hop whose tail drops below
    ``tail_tol``. ``psi[k_cap]`` holds the whole remaining tail, so a walk
    that reaches ``k_cap`` stops there with certainty.
    """

    t: float
    tail_tol: float
    eta: np.ndarray
    psi: np.ndarray

    @property
    def k_cap(self) -> int:
        return len(self.eta) - 1

    @property
    def stop(self) -> np.ndarray:
        """Per-hop stop probabilities ``eta[k]/psi[k]``, forced to 1 at ``k_cap``."""
        out = self.eta / self.psi
        out[-1] = 1.0
        return out

    def stop_table(self, size: int) -> np.ndarray:
        """``stop`` padded with ones to at least ``size`` entries, for kernels."""
        base = self.stop
        if size <= len(base):
            return base
        return np.concatenate([base, np.ones(size - len(base))])

    @property
    def length_weights(self) -> np.ndarray:
        """Walk-length distribution with the tail lumped onto ``k_cap``; sums to 1."""
        out = self.eta.copy()
        out[-1] = self.psi[-1]
        return out


def poisson_weights(t: float, tail_tol: float = 1e-15) -> PoissonWeights:
    if not t > 0:
        raise ParameterError(f"heat constant must be positive, got {t}")
    if t > MAX_HEAT:
        raise ParameterError(f"heat constant {t} too large (exp(-t) underflows)")
    if not 0 < tail_tol < 1:
        raise ParameterError(f"tail_tol must lie in (0, 1), got {tail_tol}")

    # Run the recurrence well past the cap so psi near k_cap is accurate.
    eta = [math.exp(-t)]
    k = 0
    while not (k > t and eta[-1] < tail_tol * 1e-20) and eta[-1] > 0.0:
        eta.append(eta[-1] * t / (k + 1))
        k += 1
    eta_arr = np.array(eta)
    psi_arr = np.cumsum(eta_arr[::-1])[::-1]

    k_cap = int(np.argmax(psi_arr < tail_tol))
    eta_arr = eta_arr[: k_cap + 1].copy()
    psi_arr = psi_arr[: k_cap + 1].copy()
    psi_arr[0] = 1.0
    for arr in (eta_arr, psi_arr):
        arr.setflags(write=False)
    return PoissonWeights(float(t), float(tail_tol), eta_arr, psi_arr)


def stop_probability(w: PoissonWeights, k: int) -> float:
    if k < 0:
        raise ParameterError("hop index must be non-negative")
    if k >= w.k_cap:
        return 1.0
    return float(w.eta[k] / w.psi[k])
