import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from helpers import TAU
from hkpr.errors import ParameterError
from hkpr.sampling import RandomSource, build_alias, sample, sample_many


def implied_distribution(table):
    """Exact slot probabilities a table encodes."""
    n = len(table)
    out = table.probabilities / n
    np.add.at(out, table.aliases, (1 - table.probabilities) / n)
    return out


def test_single_slot_always_zero():
    table = build_alias([1.0])
    rng = RandomSource(0)
    assert all(sample(table, rng) == 0 for _ in range(100))


def test_reduced_toy_residues_split_one_third_two_thirds():
    table = build_alias([TAU / 36, TAU / 18])
    assert implied_distribution(table) == pytest.approx([1 / 3, 2 / 3], abs=1e-15)
    assert table.total == pytest.approx(TAU / 12, rel=1e-15)


@pytest.mark.parametrize("weights, slot, expected", [([1, 1, 1, 1], 2, 0.25), ([3, 1], 0, 0.75)])
def test_empirical_frequency(weights, slot, expected):
    draws = sample_many(build_alias(weights), RandomSource(1), 100_000)
    assert abs(np.mean(draws == slot) - expected) <= 0.01


def test_fixed_seed_replays():
    table = build_alias([1, 2, 3])
    runs = []
    for _ in range(2):
        rng = RandomSource(42)
        runs.append([sample(table, rng) for _ in range(50)])
    assert runs[0] == runs[1]
    assert len(set(runs[0])) == 3


def test_chi_square_goodness_of_fit():
    rng = np.random.default_rng(9)
    for i in range(20):
        weights = rng.random(int(rng.integers(2, 65))) + 0.05
        draws = sample_many(build_alias(weights), RandomSource(i), 100_000)
        observed = np.bincount(draws, minlength=len(weights))
        expected = weights / weights.sum() * len(draws)
        assert chisquare(observed, expected).pvalue > 0.001


@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=64).filter(lambda w: sum(w) > 0))
@settings(max_examples=300, deadline=None)
def test_table_encodes_normalized_weights(weights):
    table = build_alias(weights)
    assert np.all((table.probabilities >= 0) & (table.probabilities <= 1 + 1e-12))
    w = np.array(weights)
    assert implied_distribution(table) == pytest.approx(w / w.sum(), abs=1e-9)


def test_construction_is_deterministic():
    w = [0.3, 0.1, 0.0, 0.6, 0.25]
    a, b = build_alias(w), build_alias(w)
    assert np.array_equal(a.probabilities, b.probabilities)
    assert np.array_equal(a.aliases, b.aliases)


def test_zero_weight_slots_never_drawn():
    draws = sample_many(build_alias([0.0, 1.0, 0.0, 2.0]), RandomSource(3), 20_000)
    assert set(np.unique(draws)) == {1, 3}


@pytest.mark.parametrize("weights", [[], [0, 0], [1, -1], [1, float("nan")], [float("inf")]])
def test_bad_weights(weights):
    with pytest.raises(ParameterError):
        build_alias(weights)


def test_spawned_streams_are_reproducible_and_distinct():
    a = [r.uniform() for r in RandomSource(5).spawn(3)]
    b = [r.uniform() for r in RandomSource(5).spawn(3)]
    assert a == b and len(set(a)) == 3


def test_seed_masked_to_64_bits():
    assert RandomSource(-1).seed == 2**64 - 1
    assert RandomSource(2**64 + 3).uniform() == RandomSource(3).uniform()
