"""Adaptive edge pruning for decentralized consensus and optimization."""

from ._adcons import (
    SUMMARY_HEADER,
    TRACE_HEADER,
    ConfigError,
    Graph,
    ac_run,
    acgt_linreg,
    compute_rho_prime,
    connected_erdos_renyi,
    corollary_eta,
    deviation_norm,
    diameter,
    dist_avg_run,
    erdos_renyi,
    ergodicity_coefficient,
    gen_linear_synthetic,
    is_connected,
    metropolis_hastings,
    prune,
    random_gossip_run,
    row_dissimilarity,
    run_sweep,
    spectral_gap,
    suggest_step_size,
    symmetric_eigenvalues,
)

__all__ = [
    "SUMMARY_HEADER",
    "TRACE_HEADER",
    "ConfigError",
    "Graph",
    "ac_run",
    "acgt_linreg",
    "compute_rho_prime",
    "connected_erdos_renyi",
    "corollary_eta",
    "deviation_norm",
    "diameter",
    "dist_avg_run",
    "erdos_renyi",
    "ergodicity_coefficient",
    "gen_linear_synthetic",
    "is_connected",
    "metropolis_hastings",
    "prune",
    "random_gossip_run",
    "row_dissimilarity",
    "run_sweep",
    "spectral_gap",
    "suggest_step_size",
    "symmetric_eigenvalues",
]
