"""Bilayer LDPC convolutional codes for half-duplex relay channels.

A numpy library covering the full pipeline: randomized ensemble
construction of single-layer and bilayer convolutional Tanner graphs (plus
the regular bilayer block baseline), BEC/BiAWGN link models with
decode-and-forward rate planning, coupled density evolution with threshold
bisection, peeling and sum-product decoding with relay syndromes, and a
deterministic Monte Carlo sweep harness.  The `bilayercc` console script
exposes design, threshold, simulate, compare and graph-dump subcommands.
"""

__version__ = "0.1.0"

from .channels import (BEC, BIAWGN, ERASED, ChannelSpec, RatePlan, RelaySpec,
                       bec, biawgn, bpsk_awgn_capacity, capacity, rate_plan,
                       rate_plan_capacities, transmit)
from .codec import (DecodeResult, Gf2Encoder, compute_syndrome, decode_awgn,
                    decode_bec, encode, encoder_for)
from .density_evolution import (DEProfile, ThresholdResult, bp_threshold,
                                de_coupled, de_step_bilayer_uncoupled,
                                de_step_uncoupled, shannon_limit)
from .ensembles import (L2Design, VariableType, build_block_bilayer,
                        build_graph, build_single_layer, derive_l2,
                        extend_to_bilayer, sample_type)
from .graph import (GENERAL, UNIT_OFFSET, BilayerParams, ConstructionError,
                    TannerGraph, design_rate, design_rate_limit,
                    graph_from_text, single_layer_params, validate)
from .relaysim import (CompareConfig, SimResult, SweepConfig, TrialOutcome,
                       block_length_rule, compare_conv_vs_block, run_sweep,
                       run_trial)
from .rng import Seed, as_seed

__all__ = [
    "BEC", "BIAWGN", "ERASED", "GENERAL", "UNIT_OFFSET",
    "BilayerParams", "ChannelSpec", "CompareConfig", "ConstructionError",
    "DEProfile", "DecodeResult", "Gf2Encoder", "L2Design", "RatePlan",
    "RelaySpec", "Seed", "SimResult", "SweepConfig", "TannerGraph",
    "ThresholdResult", "TrialOutcome", "VariableType",
    "as_seed", "bec", "biawgn", "block_length_rule", "bp_threshold",
    "bpsk_awgn_capacity", "build_block_bilayer", "build_graph",
    "build_single_layer", "capacity", "compare_conv_vs_block",
    "compute_syndrome", "de_coupled", "de_step_bilayer_uncoupled",
    "de_step_uncoupled", "decode_awgn", "decode_bec", "derive_l2",
    "design_rate", "design_rate_limit", "encode", "encoder_for",
    "extend_to_bilayer", "graph_from_text", "rate_plan",
    "rate_plan_capacities", "run_sweep", "run_trial", "sample_type",
    "shannon_limit", "single_layer_params", "transmit", "validate",
]
