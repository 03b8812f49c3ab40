"""Encoding, syndrome formation, and belief-propagation decoding.

The destination decodes the stacked system [H_S; H_R] x = [0; S]: layer-1
checks always carry syndrome 0, layer-2 checks carry the relay's syndrome
bits.  Over the BEC a peeling decoder is used (repeatedly resolve a check
with exactly one erased neighbour); over BiAWGN a flooding sum-product
decoder whose check update flips the outgoing sign on checks with syndrome
bit 1.

Simulation normally rides the all-zero codeword with an all-zero syndrome,
which channel symmetry justifies; the GF(2)-elimination encoder below
exists to exercise the non-zero-syndrome path on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ERASED
from .graph import TannerGraph

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is expected but optional
    _HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap

LLR_CLAMP = 30.0
_BIG = 1e30  # box-plus identity used for padding

# correction term f(z) = log1p(exp(-z)) tabulated on [0, 38] with linear
# interpolation (max error < 3e-6); beyond 38 the term is below double noise
_CORR_LIMIT = 38.0
_CORR_N = 4096
_CORR_STEP = _CORR_LIMIT / (_CORR_N - 1)
_CORR_TABLE = np.log1p(np.exp(-np.linspace(0.0, _CORR_LIMIT, _CORR_N)))


def _corr_np(z):
    return np.interp(z, np.linspace(0.0, _CORR_LIMIT, _CORR_N), _CORR_TABLE,
                     right=0.0)


@dataclass
class DecodeResult:
    status: str                    # "success" | "failure"
    bits: np.ndarray               # hard decisions, uint8
    iterations: int
    unsatisfied: int               # checks violated by the hard decisions
    residual_erasures: int = 0     # BEC only
    erased: np.ndarray | None = None  # BEC only: positions still unknown

    @property
    def success(self) -> bool:
        return self.status == "success"


def _success(unsatisfied, residual):
    return "success" if unsatisfied == 0 and residual == 0 else "failure"


# -- GF(2) systematic encoder ---------------------------------------------------


class Gf2Encoder:
    """Systematic encoder for the layer-1 code of a graph.

    One-time Gaussian elimination over GF(2) brings H_S to reduced row
    echelon form; pivot columns become parity positions, the remaining
    columns carry information bits.  Rank-deficient H_S simply yields a
    larger information set.
    """

    def __init__(self, graph: TannerGraph):
        g1 = graph.layer1()
        n = g1.num_vars
        H = np.zeros((g1.num_checks, n), dtype=np.uint8)
        edge_check = np.repeat(np.arange(g1.num_checks), g1.check_deg)
        H[edge_check, g1.check_adj] = 1
        pivots = []
        row = 0
        for col in range(n):
            hit = row + np.nonzero(H[row:, col])[0]
            if len(hit) == 0:
                continue
            if hit[0] != row:
                H[[row, hit[0]]] = H[[hit[0], row]]
            others = np.nonzero(H[:, col])[0]
            others = others[others != row]
            H[others] ^= H[row]
            pivots.append(col)
            row += 1
            if row == H.shape[0]:
                break
        self.num_vars = n
        self.rank = row
        self.parity_cols = np.array(pivots, dtype=np.int64)
        free = np.ones(n, dtype=bool)
        free[self.parity_cols] = False
        self.info_cols = np.nonzero(free)[0]
        # parity bit i = R[i] . info  (mod 2)
        self.R = H[:self.rank][:, self.info_cols]

    @property
    def info_len(self) -> int:
        return self.num_vars - self.rank

    def encode(self, info_bits: np.ndarray) -> np.ndarray:
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if len(info_bits) != self.info_len:
            raise ValueError(f"expected {self.info_len} information bits, "
                             f"got {len(info_bits)}")
        x = np.zeros(self.num_vars, dtype=np.uint8)
        x[self.info_cols] = info_bits
        x[self.parity_cols] = (self.R @ info_bits) & 1
        return x


def encoder_for(graph: TannerGraph) -> Gf2Encoder:
    if graph._encoder is None:
        graph._encoder = Gf2Encoder(graph)
    return graph._encoder


def encode(graph: TannerGraph, info_bits) -> np.ndarray:
    """Codeword x with H_S x = 0 carrying the given information bits."""
    return encoder_for(graph).encode(info_bits)


def compute_syndrome(graph: TannerGraph, codeword) -> np.ndarray:
    """S = H_R x: one bit per layer-2 check, in layer-2 check order."""
    if len(graph.layer2_checks) == 0:
        raise ValueError("graph has no layer-2 checks to form a syndrome")
    codeword = np.asarray(codeword, dtype=np.uint8)
    if len(codeword) != graph.num_vars:
        raise ValueError("codeword length does not match the graph")
    sums = _check_sums(graph, codeword)
    return (sums[graph.layer2_checks] & 1).astype(np.uint8)


def _check_sums(graph, bits):
    cs = np.add.reduceat(bits.astype(np.int64)[graph.check_adj], graph.check_ptr[:-1])
    cs[graph.check_deg == 0] = 0
    return cs


def _expand_syndrome(graph, synd):
    full = np.zeros(graph.num_checks, dtype=np.uint8)
    if synd is not None:
        synd = np.asarray(synd, dtype=np.uint8)
        if len(synd) != len(graph.layer2_checks):
            raise ValueError("syndrome length does not match layer-2 check count")
        full[graph.layer2_checks] = synd
    return full


def _ranges(starts, stops):
    """Concatenated arange(starts[i], stops[i]) without a Python loop."""
    lens = stops - starts
    total = int(lens.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    out = np.ones(total, dtype=np.int64)
    heads = np.concatenate([[0], np.cumsum(lens)[:-1]])
    out[heads] = starts
    out[heads[1:]] -= starts[:-1] + lens[:-1] - 1
    return np.cumsum(out)


# -- BEC peeling decoder --------------------------------------------------------


def decode_bec(graph: TannerGraph, obs, synd=None, max_iter=None) -> DecodeResult:
    """Peeling decoder over the erasure channel.

    Each round resolves every check that has exactly one erased neighbour;
    the neighbour gets the XOR of the check's known bits and its syndrome
    bit.  Known observations are never altered.  Terminates at the stopping
    set; max_iter (rounds) is effectively unbounded by default.
    """
    obs = np.asarray(obs)
    if len(obs) != graph.num_vars:
        raise ValueError("observation length does not match the graph")
    synd_full = _expand_syndrome(graph, synd)

    erased = obs == ERASED
    bits = np.where(erased, 0, obs).astype(np.uint8)

    # per-check bookkeeping over erased neighbours
    adj, ptr = graph.check_adj, graph.check_ptr
    e_adj = erased[adj]
    counts = np.add.reduceat(e_adj.astype(np.int64), ptr[:-1])
    counts[graph.check_deg == 0] = 0
    known_bits = np.where(e_adj, 0, bits[adj]).astype(np.int64)
    known_par = np.add.reduceat(known_bits, ptr[:-1]) & 1
    known_par[graph.check_deg == 0] = 0
    parity = (synd_full ^ known_par).astype(np.uint8)
    esum = np.add.reduceat(np.where(e_adj, adj, 0).astype(np.int64), ptr[:-1])
    esum[graph.check_deg == 0] = 0

    front = np.nonzero(counts == 1)[0]
    rounds = 0
    limit = max_iter if max_iter is not None else np.inf
    while len(front) and rounds < limit:
        rounds += 1
        vs = esum[front]
        vals = parity[front]
        uniq, first = np.unique(vs, return_index=True)
        vals = vals[first].astype(np.uint8)
        bits[uniq] = vals
        erased[uniq] = False
        starts, stops = graph.var_ptr[uniq], graph.var_ptr[uniq + 1]
        cks = graph.var_adj[_ranges(starts, stops)]
        lens = stops - starts
        np.add.at(counts, cks, -1)
        np.bitwise_xor.at(parity, cks, np.repeat(vals, lens))
        np.subtract.at(esum, cks, np.repeat(uniq, lens))
        touched = np.unique(cks)
        front = touched[counts[touched] == 1]

    residual = int(erased.sum())
    unsat = int(((counts == 0) & (parity != 0)).sum())
    return DecodeResult(status=_success(unsat, residual), bits=bits,
                        iterations=rounds, unsatisfied=unsat,
                        residual_erasures=residual, erased=erased)


# -- BiAWGN flooding sum-product decoder ---------------------------------------


def _bp_structure(graph):
    """Padded (check x max-degree) edge-id table for vectorized box-plus."""
    if graph._bp is None:
        C = graph.num_checks
        E = len(graph.check_adj)
        dmax = int(graph.check_deg.max())
        rows = np.repeat(np.arange(C), graph.check_deg)
        cols = _ranges(np.zeros(C, dtype=np.int64), graph.check_deg.astype(np.int64))
        eid = np.full((C, dmax), -1, dtype=np.int64)
        eid[rows, cols] = np.arange(E)
        graph._bp = (eid, eid >= 0)
    return graph._bp


def _boxplus(a, b):
    s = np.sign(a) * np.sign(b)
    m = np.minimum(np.abs(a), np.abs(b))
    return s * m + _corr_np(np.abs(a + b)) - _corr_np(np.abs(a - b))


@njit(cache=True)
def _corr(z):
    if z >= _CORR_LIMIT:
        return 0.0
    x = z / _CORR_STEP
    i = int(x)
    frac = x - i
    return _CORR_TABLE[i] * (1.0 - frac) + _CORR_TABLE[i + 1] * frac


@njit(cache=True)
def _bp2(x, y):
    sx = 0.0 if x == 0.0 else (1.0 if x > 0.0 else -1.0)
    sy = 0.0 if y == 0.0 else (1.0 if y > 0.0 else -1.0)
    m = min(abs(x), abs(y))
    return sx * sy * m + _corr(abs(x + y)) - _corr(abs(x - y))


@njit(cache=True)
def _bp_loop(llr, adj, ptr, sgn, synd, max_iter, clamp):
    """Full flooding iteration in one kernel: returns (hard, iters, unsat)."""
    n = len(llr)
    C = len(ptr) - 1
    E = len(adj)
    c2v = np.zeros(E)
    tot = llr.copy()
    dmax = 0
    for c in range(C):
        dmax = max(dmax, ptr[c + 1] - ptr[c])
    fwd = np.empty(dmax + 1)
    bwd = np.empty(dmax + 1)

    hard = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        hard[v] = 1 if tot[v] < 0.0 else 0
    unsat = 0
    for c in range(C):
        par = synd[c]
        for e in range(ptr[c], ptr[c + 1]):
            par ^= hard[adj[e]]
        if par:
            unsat += 1
    if unsat == 0:
        return hard, 0, 0

    it = 0
    for it in range(1, max_iter + 1):
        for c in range(C):
            a, bnd = ptr[c], ptr[c + 1]
            d = bnd - a
            fwd[0] = _BIG
            bwd[d] = _BIG
            for k in range(d):
                x = tot[adj[a + k]] - c2v[a + k]
                x = min(max(x, -clamp), clamp)
                fwd[k + 1] = _bp2(fwd[k], x)
            for k in range(d - 1, -1, -1):
                x = tot[adj[a + k]] - c2v[a + k]
                x = min(max(x, -clamp), clamp)
                bwd[k] = _bp2(bwd[k + 1], x)
            for k in range(d):
                m = sgn[c] * _bp2(fwd[k], bwd[k + 1])
                c2v[a + k] = min(max(m, -clamp), clamp)
        for v in range(n):
            tot[v] = llr[v]
        for e in range(E):
            tot[adj[e]] += c2v[e]
        unsat = 0
        for v in range(n):
            hard[v] = 1 if tot[v] < 0.0 else 0
        for c in range(C):
            par = synd[c]
            for e in range(ptr[c], ptr[c + 1]):
                par ^= hard[adj[e]]
            if par:
                unsat += 1
        if unsat == 0:
            return hard, it, 0
    return hard, it, unsat


def _decode_awgn_numpy(graph, llr, synd_full, max_iter):
    """Vectorized fallback used when numba is unavailable."""
    sgn = (1.0 - 2.0 * synd_full.astype(np.float64))[:, None]
    eid, mask = _bp_structure(graph)
    adj, ptr = graph.check_adj, graph.check_ptr
    E = len(adj)
    C = graph.num_checks
    dmax = eid.shape[1]

    def check_pass(tot):
        hard = tot < 0
        par = np.add.reduceat(hard[adj].astype(np.int64), ptr[:-1]) & 1
        par[graph.check_deg == 0] = 0
        unsat = int((par != synd_full).sum())
        return hard.astype(np.uint8), unsat

    c2v = np.zeros(E)
    tot = llr.copy()
    hard, unsat = check_pass(tot)
    if unsat == 0:
        return hard, 0, 0
    it = 0
    for it in range(1, max_iter + 1):
        v2c = np.clip(tot[adj] - c2v, -LLR_CLAMP, LLR_CLAMP)
        Mv = np.full((C, dmax), _BIG)
        Mv[mask] = v2c[eid[mask]]
        fwd = np.full((C, dmax + 1), _BIG)
        bwd = np.full((C, dmax + 1), _BIG)
        for k in range(dmax):
            fwd[:, k + 1] = _boxplus(fwd[:, k], Mv[:, k])
            bwd[:, dmax - 1 - k] = _boxplus(bwd[:, dmax - k], Mv[:, dmax - 1 - k])
        ext = sgn * _boxplus(fwd[:, :dmax], bwd[:, 1:])
        c2v[eid[mask]] = ext[mask]
        np.clip(c2v, -LLR_CLAMP, LLR_CLAMP, out=c2v)
        tot = llr + np.bincount(adj, weights=c2v, minlength=graph.num_vars)
        hard, unsat = check_pass(tot)
        if unsat == 0:
            return hard, it, 0
    return hard, it, unsat


def decode_awgn(graph: TannerGraph, obs, synd=None, max_iter: int = 200) -> DecodeResult:
    """Flooding sum-product decoding of LLR observations.

    Check updates use the pairwise box-plus recursion in sign/min-magnitude
    form with the log-domain correction (tabulated, error < 3e-6); a
    syndrome bit of 1 flips the outgoing sign of its check.  Messages are
    clamped to +-LLR_CLAMP.  Stops as soon as the hard decisions satisfy
    every check (syndrome included); with max_iter = 0 this is just the
    channel hard decision.
    """
    llr = np.asarray(obs, dtype=np.float64)
    if len(llr) != graph.num_vars:
        raise ValueError("observation length does not match the graph")
    synd_full = _expand_syndrome(graph, synd)
    if _HAVE_NUMBA:
        sgn = 1.0 - 2.0 * synd_full.astype(np.float64)
        hard, it, unsat = _bp_loop(llr, graph.check_adj, graph.check_ptr, sgn,
                                   synd_full, max_iter, LLR_CLAMP)
        it, unsat = int(it), int(unsat)
    else:
        hard, it, unsat = _decode_awgn_numpy(graph, llr, synd_full, max_iter)
    status = "success" if unsat == 0 else "failure"
    return DecodeResult(status, hard, it, unsat)
