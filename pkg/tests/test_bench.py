import io
import json
import math

import numpy as np
import pytest

from helpers import TOY_TEXT
from hkpr.bench import (
    CSV_COLUMNS, ExperimentSpec, generate_synthetic, read_csv, run_experiments, run_source,
    summarize, write_csv,
)
from hkpr.errors import ParameterError
from hkpr.estimators import HkprParams, estimate
from hkpr.graph import from_edges, graph_stats, loads_edge_list, write_edge_list
from hkpr.weights import poisson_weights


def test_grid3d_is_a_six_regular_torus():
    g = generate_synthetic("grid3d", 4)
    assert g.n == 64 and g.m == 192
    assert np.all(g.degrees == 6)


@pytest.mark.parametrize("side", [1, 2])
def test_grid3d_rejects_small_sides(side):
    with pytest.raises(ParameterError):
        generate_synthetic("grid3d", side)


def test_unknown_generator():
    with pytest.raises(ParameterError):
        generate_synthetic("ring", 10)


def test_powerlaw_cluster_shape():
    g = generate_synthetic("powerlaw_cluster", 1000, seed=3)
    assert g.n == 1000
    assert abs(g.m - 5 * 1000) <= 50
    assert g.degrees.max() > 5 * np.median(g.degrees)
    assert g.same_as(generate_synthetic("powerlaw_cluster", 1000, seed=3))


def test_synthetic_graph_survives_a_file_round_trip():
    g = generate_synthetic("powerlaw_cluster", 60, seed=1)
    buf = io.StringIO()
    write_edge_list(g, buf)
    assert loads_edge_list(buf.getvalue()).same_as(g)
    assert graph_stats(g)["n"] == 60


def _toy_spec(tmp_path, **kw):
    path = tmp_path / "toy.txt"
    path.write_text(TOY_TEXT)
    return ExperimentSpec(graph=str(path), **kw)


def test_single_point_grid_matches_a_direct_run(tmp_path):
    spec = _toy_spec(tmp_path, seeds=["s"], methods=["tea"], deltas=[0.1], master_seed=9)
    records = run_experiments(spec)
    assert len(records) == 1
    rec = records[0]
    g = spec.load_graph()
    params = HkprParams(t=5.0, eps_r=0.5, delta=0.1, p_f=1e-6, c=2.5)
    est = estimate("tea", g, 0, params, poisson_weights(5.0), run_source(9, 0, 0, 0))
    assert rec.error is None
    assert (rec.walks, rec.pushes) == (est.walks, est.pushes)
    assert rec.seed_node == "s" and rec.wall_ms > 0
    assert 0 <= rec.conductance <= 1


def test_grid_size_and_seed_picking(tmp_path):
    spec = _toy_spec(tmp_path, seeds=3, methods=["mc", "tea"], eps_rs=[0.5, 0.8], repetitions=2,
                     ndcg=True, top_k=3)
    records = run_experiments(spec)
    assert len(records) == 2 * 2 * 3 * 2
    assert len({r.seed_node for r in records}) == 3
    assert all(r.ndcg is not None and 0 <= r.ndcg <= 1 for r in records)


def test_runs_do_not_depend_on_earlier_runs(tmp_path):
    one = run_experiments(_toy_spec(tmp_path, seeds=["v2"], methods=["mc"]))
    two = run_experiments(_toy_spec(tmp_path, seeds=["v2"], methods=["mc"], ts=[5.0, 3.0]))
    assert (one[0].walks, one[0].cluster_size) == (two[0].walks, two[0].cluster_size)
    assert one[0].conductance == two[0].conductance


def test_failed_run_is_recorded_and_sweep_continues():
    g = from_edges(2, [(0, 1)])
    spec = ExperimentSpec(generator={"kind": "grid3d", "size": 3}, seeds=["0"],
                          methods=["tea+", "mc"], warmup=False)
    records = run_experiments(spec, g)
    assert len(records) == 2
    failed = [r for r in records if r.error]
    assert failed and all(math.isnan(r.conductance) for r in failed)


def test_f1_against_ground_truth(tmp_path):
    comm = tmp_path / "comm.txt"
    comm.write_text("s v1 v3\nv2 v4 v5 v6 v7\n")
    spec = _toy_spec(tmp_path, seeds=["s"], ground_truth=str(comm))
    rec = run_experiments(spec)[0]
    assert 0 < rec.f1 <= 1


def test_csv_round_trip(tmp_path):
    records = run_experiments(_toy_spec(tmp_path, seeds=["s", "v2"], methods=["tea"]))
    buf = io.StringIO()
    write_csv(records, buf)
    header = buf.getvalue().splitlines()[0]
    assert header == ",".join(CSV_COLUMNS)
    back = read_csv(io.StringIO(buf.getvalue()))
    assert back == records


def test_config_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"generator": {"kind": "grid3d", "size": 3}, "seeds": 2}))
    spec = ExperimentSpec.from_json(path)
    assert spec.load_graph().n == 27
    path.write_text(json.dumps({"generator": {"kind": "grid3d", "size": 3}, "speed": 2}))
    with pytest.raises(ParameterError, match="speed"):
        ExperimentSpec.from_json(path)


@pytest.mark.parametrize("kw", [
    {},
    {"graph": "a", "generator": {"kind": "grid3d", "size": 3}},
    {"graph": "a", "methods": ["pagerank"]},
    {"graph": "a", "eps_rs": []},
    {"graph": "a", "repetitions": 0},
])
def test_invalid_specs(kw):
    with pytest.raises(ParameterError):
        ExperimentSpec(**kw)


def test_tighter_delta_does_not_worsen_conductance():
    g = generate_synthetic("powerlaw_cluster", 400, seed=5)
    spec = ExperimentSpec(generator={"kind": "powerlaw_cluster", "size": 400, "seed": 5},
                          seeds=8, deltas=[1e-2, 1e-3, 1e-4], methods=["tea+"])
    rows = summarize(run_experiments(spec, g))
    assert [r["delta"] for r in rows] == [1e-2, 1e-3, 1e-4]
    for loose, tight in zip(rows, rows[1:]):
        slack = 2 * math.hypot(loose["conductance_se"], tight["conductance_se"])
        assert tight["conductance"] <= loose["conductance"] + slack
    assert all(r["runs"] == 8 for r in rows)


def test_converged_empty_estimate_is_recorded_as_error():
    # With a loose threshold a high-degree seed meets the bound before any push.
    g = generate_synthetic("powerlaw_cluster", 400, seed=5)
    hub = g.label(int(np.argmax(g.degrees)))
    spec = ExperimentSpec(generator={"kind": "powerlaw_cluster", "size": 400, "seed": 5},
                          seeds=[hub], deltas=[0.5], methods=["tea+"])
    (rec,) = run_experiments(spec, g)
    assert rec.error == "estimate has empty support"
