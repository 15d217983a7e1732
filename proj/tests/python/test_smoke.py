import json
import math

import numpy as np
import pytest

import adcons


def test_graph_basics():
    g = adcons.Graph.path(4)
    assert g.edge_count == 3
    assert adcons.diameter(g) == 3
    assert adcons.diameter(adcons.Graph(3)) is None
    assert adcons.is_connected(adcons.erdos_renyi(32, 0.5, 7))
    assert adcons.erdos_renyi(4, 1.0, 0).edge_count == 6
    assert adcons.Graph(3, [(0, 1), (1, 2)]) == adcons.Graph.path(3)


def test_mixing_hand_values():
    w = adcons.metropolis_hastings(adcons.Graph.path(3))
    expected = np.array([[2, 1, 0], [1, 1, 1], [0, 1, 2]]) / 3
    np.testing.assert_allclose(w, expected, atol=1e-15)
    assert adcons.spectral_gap(w) == pytest.approx(1 / 3, abs=1e-12)
    assert adcons.ergodicity_coefficient(w) == pytest.approx(2 / 3, abs=1e-12)
    assert adcons.row_dissimilarity(w) == pytest.approx(2 / 3, abs=1e-12)
    assert adcons.deviation_norm(w) == pytest.approx(2 / 3, abs=1e-10)
    np.testing.assert_allclose(adcons.symmetric_eigenvalues(w), np.sort(np.linalg.eigvalsh(w))[::-1], atol=1e-12)


def test_prune_two_nodes():
    g = adcons.Graph.path(2)
    pruned, candidates = adcons.prune(g, np.array([[0.0], [1.0]]), kappa=1.0, kappa_lower=0.0)
    assert pruned.edge_count == 0
    assert candidates == [[1], [0]]
    with pytest.raises(ValueError):
        adcons.prune(g, np.zeros((2, 1)), kappa=0.8, kappa_lower=0.5)


def test_ac_reduces_to_dist_avg():
    g = adcons.connected_erdos_renyi(16, 0.4, 1)
    x0 = np.random.default_rng(0).standard_normal((16, 3))
    a = adcons.ac_run(g, x0, kappa=0.0, tau=math.inf, max_iters=200)
    d = adcons.dist_avg_run(g, x0, max_iters=200)
    assert a["consensus_error"] == d["consensus_error"]
    assert a["volume"] == d["volume"]


def test_ac_preserves_mean():
    g = adcons.connected_erdos_renyi(32, 0.5, 3)
    x0 = np.random.default_rng(1).standard_normal((32, 10))
    a = adcons.ac_run(g, x0, kappa=0.75, tau=10, tolerance=1e-10, max_iters=100000)
    d = adcons.dist_avg_run(g, x0, tolerance=1e-10, max_iters=100000)
    assert a["converged"] and d["converged"]
    np.testing.assert_allclose(a["final_state"].mean(axis=0), x0.mean(axis=0), atol=1e-10)
    assert a["consensus_error"][-1] <= 1e-10
    assert len(a["cycle_gaps"]) > 0


def test_gossip_two_nodes():
    out = adcons.random_gossip_run(adcons.Graph.path(2), np.array([[0.0], [4.0]]), max_iters=1)
    np.testing.assert_array_equal(out["final_state"], [[2.0], [2.0]])


def test_acgt_linreg_converges():
    a, b, x_true = adcons.gen_linear_synthetic(800, 5, 0.1, 2)
    g = adcons.connected_erdos_renyi(8, 0.6, 4)
    out = adcons.acgt_linreg(g, a, b, alpha=0.1, kappa=0.5, max_iters=2000, tolerance=1e-10)
    assert out["converged"]
    assert out["max_tracking_gap"] <= 1e-9
    np.testing.assert_allclose(out["final_state"].mean(axis=0), out["x_star"], atol=1e-4)


def test_analysis_arithmetic():
    assert adcons.corollary_eta(0.25, 1, 1, 4) == 178
    r = adcons.suggest_step_size(0.25, 1, 1, 4, 1.0)
    assert r["alpha_max"] == pytest.approx(0.5 / (58 * 178**2))
    w = adcons.metropolis_hastings(adcons.Graph.path(3))
    assert adcons.compute_rho_prime([w] * 6, 6, 6) == pytest.approx(74 * (2 / 3) ** 12, rel=1e-9)


def test_run_sweep_schema():
    cfg = {"n": 12, "p": 0.5, "kappa": [0.0, 0.5], "tau": 5, "trials": 2, "dim": 3, "max_iters": 2000, "tolerance": 1e-8}
    summary, baseline = adcons.run_sweep(json.dumps(cfg))
    lines = summary.strip().splitlines()
    assert lines[0] == adcons.SUMMARY_HEADER
    assert len(lines) == 3
    assert baseline.splitlines()[0] == adcons.SUMMARY_HEADER
    with pytest.raises(ValueError):
        adcons.run_sweep(json.dumps({"kapa": 1}))
    assert adcons.TRACE_HEADER == "k,comm_volume,comm_rounds,consensus_error,optimality_error,spectral_gap,status"
