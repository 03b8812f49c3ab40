"""Two-phase decode-and-forward orchestration and Monte Carlo sweeps.

A trial follows the protocol: the source broadcasts a codeword of the
layer-1 code; the relay decodes it from the source-relay observation and,
when successful, forms the layer-2 syndrome, which phase 2 delivers to the
destination error-free; the destination then decodes the full bilayer graph
from its own observation plus the syndrome.

Sweeps measure one side of a code (relay = layer-1 subgraph, destination =
full graph) over a channel-parameter grid with the all-zero codeword, which
channel symmetry makes representative.  Trials are evaluated on per-index
derived seeds and aggregated by scanning trial indices in order, so results
are byte-identical no matter how many workers computed them.
"""

from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass, field

import numpy as np

from .channels import BEC, ChannelSpec, RelaySpec, bec, biawgn, capacity, transmit
from .codec import DecodeResult, compute_syndrome, decode_awgn, decode_bec, encoder_for
from .ensembles import build_block_bilayer, build_graph
from .graph import BilayerParams, TannerGraph
from .rng import Seed, as_seed

RELAY = "relay"
DESTINATION = "destination"

FORWARD = "forward"   # relay failure: forward the (possibly wrong) syndrome
ERASE = "erase"       # relay failure: count the destination block as erased

_CHUNK = 64


@dataclass
class TrialOutcome:
    relay: DecodeResult
    destination: DecodeResult
    relay_bit_errors: int
    dest_bit_errors: int
    n1: int
    n2: float
    relay_failed: bool
    failure_policy: str = FORWARD


@dataclass(frozen=True)
class SimResult:
    """One measurement point of a sweep."""

    param: float
    trials: int
    bit_errors: int
    ber: float
    block_errors: int
    bler: float
    ci95: float          # half-width of the binomial normal CI on bler
    seed: int


def _decode(graph, obs, synd, kind, max_iter):
    if kind == BEC:
        return decode_bec(graph, obs, synd)
    return decode_awgn(graph, obs, synd, max_iter=max_iter)


def _bit_errors(res: DecodeResult, x: np.ndarray) -> int:
    wrong = res.bits != x
    if res.erased is not None:
        wrong = wrong | res.erased
    return int(wrong.sum())


def run_trial(spec: RelaySpec, graph: TannerGraph, seed, use_encoder: bool = False,
              failure_policy: str = FORWARD, max_iter: int = 200) -> TrialOutcome:
    """One full two-phase protocol round trip."""
    if graph.params.single_layer:
        raise ValueError("run_trial needs a bilayer graph")
    seed = as_seed(seed)
    n = graph.num_vars
    if use_encoder:
        enc = encoder_for(graph)
        info = seed.child("info").generator().integers(0, 2, enc.info_len)
        x = enc.encode(info.astype(np.uint8))
    else:
        x = np.zeros(n, dtype=np.uint8)

    obs_sr = transmit(x, spec.sr, seed.child("sr").generator())
    obs_sd = transmit(x, spec.sd, seed.child("sd").generator())

    relay_res = _decode(graph.layer1(), obs_sr, None, spec.sr.kind, max_iter)
    relay_failed = not relay_res.success
    if relay_failed and failure_policy == ERASE:
        dest_res = DecodeResult("failure", np.zeros(n, dtype=np.uint8), 0, 0,
                                residual_erasures=n, erased=np.ones(n, dtype=bool))
    else:
        synd = compute_syndrome(graph, relay_res.bits)
        dest_res = _decode(graph, obs_sd, synd, spec.sd.kind, max_iter)

    c_rd = capacity(spec.rd)
    n2 = len(graph.layer2_checks) / c_rd if c_rd > 0 else float("inf")
    return TrialOutcome(relay=relay_res, destination=dest_res,
                        relay_bit_errors=_bit_errors(relay_res, x),
                        dest_bit_errors=_bit_errors(dest_res, x),
                        n1=n, n2=n2, relay_failed=relay_failed,
                        failure_policy=failure_policy)


# -- point-to-point sweeps -------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Grid description for run_sweep.

    channel is "bec" (grid of erasure probabilities) or "biawgn" (grid of
    SNR values in dB).  side selects what decodes: the layer-1 subgraph
    (relay) or the full graph (destination).
    """

    params: BilayerParams
    channel: str
    grid: tuple
    side: str = DESTINATION
    trials: int = 200
    target_block_errors: int = 100
    seed: int = 0
    workers: int = 1
    max_iter: int = 200


def _channel_for(kind: str, param: float) -> ChannelSpec:
    if kind == BEC:
        return bec(param)
    return biawgn(snr_db=param)


def _eval_trial(graph, cspec, trial_seed, max_iter):
    obs = transmit(np.zeros(graph.num_vars, dtype=np.uint8), cspec,
                   trial_seed.generator())
    res = _decode(graph, obs, None, cspec.kind, max_iter)
    errs = _bit_errors(res, np.zeros(graph.num_vars, dtype=np.uint8))
    return errs, 0 if res.success else 1


_worker_state = {}


def _pool_init(graph, kind, max_iter, seed):
    _worker_state["graph"] = graph
    _worker_state["kind"] = kind
    _worker_state["max_iter"] = max_iter
    _worker_state["seed"] = seed


def _pool_eval(task):
    pi, param, indices = task
    graph = _worker_state["graph"]
    cspec = _channel_for(_worker_state["kind"], param)
    seed = _worker_state["seed"]
    return [_eval_trial(graph, cspec, seed.child("pt", pi, "t", ti),
                        _worker_state["max_iter"]) for ti in indices]


def _sweep_graph(graph: TannerGraph, channel: str, grid, trials: int,
                 target_block_errors: int, seed: Seed, workers: int,
                 max_iter: int) -> list:
    """Measure one graph over a channel grid; the engine behind run_sweep
    and compare_conv_vs_block."""
    results = []
    pool = None
    try:
        if workers > 1:
            pool = mp.get_context("fork").Pool(
                workers, initializer=_pool_init,
                initargs=(graph, channel, max_iter, seed))
        for pi, param in enumerate(grid):
            cspec = _channel_for(channel, param)
            bit_errors = 0
            block_errors = 0
            used = 0
            idx = 0
            stop = False
            while idx < trials and not stop:
                hi = min(idx + _CHUNK * max(workers, 1), trials)
                batch = list(range(idx, hi))
                if pool is None:
                    outs = [_eval_trial(graph, cspec, seed.child("pt", pi, "t", ti),
                                        max_iter) for ti in batch]
                else:
                    tasks = [(pi, param, batch[i::workers]) for i in range(workers)]
                    flat = pool.map(_pool_eval, tasks)
                    outs = [None] * len(batch)
                    for i, sub in enumerate(flat):
                        for j, o in enumerate(sub):
                            outs[i + j * workers] = o
                # scan in trial order; stop exactly at the target hit
                for o in outs:
                    errs, blk = o
                    bit_errors += errs
                    block_errors += blk
                    used += 1
                    if block_errors >= target_block_errors:
                        stop = True
                        break
                idx = hi
            total_bits = used * graph.num_vars
            ber = bit_errors / total_bits if total_bits else 0.0
            bler = block_errors / used if used else 0.0
            ci = 1.96 * np.sqrt(bler * (1.0 - bler) / used) if used else 0.0
            results.append(SimResult(param=float(param), trials=used,
                                     bit_errors=bit_errors, ber=ber,
                                     block_errors=block_errors, bler=bler,
                                     ci95=float(ci), seed=seed.master))
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return results


def run_sweep(config: SweepConfig) -> list:
    """Build the configured code and measure it across the grid."""
    seed = as_seed(config.seed)
    graph = build_graph(config.params, seed.child("graph"))
    target = graph.layer1() if config.side == RELAY else graph
    return _sweep_graph(target, config.channel, config.grid, config.trials,
                        config.target_block_errors, seed, config.workers,
                        config.max_iter)


# -- convolutional vs block baseline ---------------------------------------------


@dataclass(frozen=True)
class CompareConfig:
    """AWGN comparison of a bilayer convolutional code against the regular
    bilayer block baseline of hardware-matched length (default M*(w+1))."""

    conv: BilayerParams
    grid: tuple
    channel: str = "biawgn"
    block_n: int | None = None
    trials: int = 300
    target_block_errors: int = 100
    seed: int = 0
    workers: int = 1
    max_iter: int = 200


def block_length_rule(params: BilayerParams) -> int:
    """Processor-window equivalence: N_block = M * (w + 1)."""
    return params.M * (params.w + 1)


def compare_conv_vs_block(config: CompareConfig) -> list:
    """Returns (arm, side, [SimResult]) tuples for arm in {conv, block} and
    side in {relay, destination}.  Trial noise seeds depend only on
    (point, trial), so feeding the identical code to both arms reproduces
    identical curves."""
    if config.conv.r1 != config.conv.r2:
        raise ValueError("block baseline needs a common check degree r1 == r2")
    seed = as_seed(config.seed)
    n_block = config.block_n or block_length_rule(config.conv)
    conv = build_graph(config.conv, seed.child("graph", "conv"))
    block = build_block_bilayer(config.conv.l1, config.conv.l2, config.conv.r1,
                                n_block, seed.child("graph", "block"))
    out = []
    for arm, graph in (("conv", conv), ("block", block)):
        for side in (RELAY, DESTINATION):
            g = graph.layer1() if side == RELAY else graph
            rows = _sweep_graph(g, config.channel, config.grid, config.trials,
                                config.target_block_errors, seed, config.workers,
                                config.max_iter)
            out.append((arm, side, rows))
    return out
