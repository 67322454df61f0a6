"""Finite-alphabet laboratory for output-constrained randomized quantization.

Thin convenience layer over the compiled ``_oclab`` module: dict-based
wrappers for the simulation and CLI entry points, everything else re-exported
as is.
"""

import json as _json

__version__ = "0.1.0"

from ._oclab import (  # noqa: F401
    Alphabet,
    DeterministicQuantizer,
    DistortionMatrix,
    FiniteMixtureQuantizer,
    IminResult,
    JointPmf,
    Pmf,
    ProkhorovResult,
    TransportResult,
    closest_ntype_counts,
    d_classic,
    d_curve,
    discretize,
    distortion,
    i_min,
    induced_joint,
    kl_divergence_bits,
    kl_divergence_nats,
    mixture_joint,
    mutual_information_bits,
    normalized_type_kl_bits,
    ot_solve,
    output_marginal,
    prokhorov_distance,
    quantile_coupling_1d,
    sample_uniform_type_class,
    solve_p1,
    solve_p3,
    tv_distance,
    type_class_log_size_bits,
    x_marginal,
)
from . import _oclab as _native


def simulate(config, threads=1):
    """Run a simulation described by a config dict; returns the result dict."""
    return _json.loads(_native.simulate_json(_json.dumps(config), threads))


def run_command(command, config):
    """Run a CLI subcommand with a config dict; returns the process exit code."""
    return _native.run_command_json(command, _json.dumps(config))


__all__ = [name for name in dir() if not name.startswith("_")]
