"""Frog model simulations (C++ core)."""

from ._core import (  # noqa: F401
    ConfigError,
    block_open_probability,
    certify_transience,
    estimate_pc,
    exact_hit_probability,
    hyperplane_hit_exact,
    k0_threshold,
    left_hit_probability,
    mc_hit_probability,
    mu_exact_1d,
    reference_brw_boundary,
    run_sweep,
    sample_xi,
)

__version__ = "0.1.0"
