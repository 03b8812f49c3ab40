"""Erasure-channel density evolution for coupled (bi)layer ensembles.

The uncoupled single-layer recursion is

    p' = eps * (1 - (1 - p)^(r-1))^(l-1),

and a bilayer code with layers (l1, r1), (l2, r2) evolves the pair

    p1' = eps * q1^(l1-1) * q2^l2,   p2' = eps * q1^l1 * q2^(l2-1),
    qm  = 1 - (1 - pm)^(rm-1),

which for r1 == r2 collapses onto the single-layer map with degree l1+l2.

The coupled (finite-L) recursion tracks one value per chain position.
Variables sit at positions 1..L, layer-m checks at 1..L+w_m, and positions
outside [1, L] are known (erasure probability 0, the termination).  A check
at position u mixes its incoming messages uniformly over the w+1 window
offsets, which is what a uniform socket assignment gives in the large-M
limit (boundary checks then see part of their sockets as already known):

    pbar_m[u] = mean_j p_m[j, u-j]           (0 outside the chain)
    qc_m[u]   = 1 - (1 - pbar_m[u])^(rm-1)

For the unit-offset kind there is exactly one edge per offset and the
variable-side messages are tracked per (offset, position) with the exact
leave-one-out product; for the general kind the i.i.d. offsets average out
and a single per-position message with windowed-mean exponents remains.
The check-side mixing law is isolated in `_check_messages` so an alternate
finite-w model can be swapped in at one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import GENERAL, UNIT_OFFSET, BilayerParams

SUCCESS = "success"
STALL = "stall"
MAX_ITER = "max-iter"


def de_step_uncoupled(p, eps, l, r):
    """One full variable+check update of the uncoupled recursion."""
    q = 1.0 - (1.0 - p) ** (r - 1)
    return eps * q ** (l - 1)


def de_step_bilayer_uncoupled(p1, p2, eps, l1, l2, r1, r2):
    """One update of the bilayer pair; with l2 == 0 the second layer is
    vacuous (its message is pinned to 0) and layer 1 reduces to the
    single-layer map."""
    q1 = 1.0 - (1.0 - p1) ** (r1 - 1)
    if l2 == 0:
        return eps * q1 ** (l1 - 1), 0.0 * np.asarray(p2)
    q2 = 1.0 - (1.0 - p2) ** (r2 - 1)
    # shared factor keeps the r1 == r2 layer symmetry exact in floats
    core = eps * q1 ** (l1 - 1) * q2 ** (l2 - 1)
    return core * q2, core * q1


@dataclass
class DEProfile:
    """State of a coupled run: a-posteriori erasure profile per position,
    check-side profiles per layer, and how the iteration ended."""

    eps: float
    p: np.ndarray            # length L, a-posteriori erasure probability
    q1: np.ndarray           # length L + w1, check-side erasure probability
    q2: np.ndarray | None    # length L + w2 for bilayer graphs
    iterations: int
    outcome: str             # SUCCESS, STALL or MAX_ITER
    residual: float          # max_t p_t at exit
    trace: list | None = None

    @property
    def success(self) -> bool:
        return self.outcome == SUCCESS


class _Layer:
    """Per-layer message state for the coupled recursion."""

    def __init__(self, l, r, w, L, kind, eps):
        self.l, self.r, self.w, self.L, self.kind = l, r, w, L, kind
        if kind == UNIT_OFFSET:
            self.p = np.full((w + 1, L), eps)
        else:
            self.p = np.full(L, eps)
        self.qc = np.zeros(L + w)

    def check_messages(self):
        self.qc = _check_messages(self.p, self.r, self.w, self.L, self.kind)

    def windows(self):
        # W[k, t] = qc[t + k], the check-to-variable values a variable at t sees
        return np.stack([self.qc[k:k + self.L] for k in range(self.w + 1)])


def _check_messages(p, r, w, L, kind):
    """Uniform-mixing check update: average the incoming variable messages
    over the w+1 offsets (zeros outside the chain) and apply the degree."""
    acc = np.zeros(L + w)
    if kind == UNIT_OFFSET:
        for j in range(w + 1):
            acc[j:j + L] += p[j]
    else:
        for j in range(w + 1):
            acc[j:j + L] += p
    pbar = acc / (w + 1)
    return 1.0 - (1.0 - pbar) ** (r - 1)


def _excl_prod(W):
    """Leave-one-out products along axis 0 (no division, zeros are safe)."""
    k, L = W.shape
    pre = np.ones((k + 1, L))
    np.cumprod(W, axis=0, out=pre[1:])
    suf = np.ones((k + 1, L))
    suf[:k] = np.cumprod(W[::-1], axis=0)[::-1]
    return pre[:k] * suf[1:]


def de_coupled(params: BilayerParams, eps: float, max_iter: int = 100_000,
               stop_tol: float = 1e-10, stall_tol: float = 1e-12,
               record_trace: bool = False) -> DEProfile:
    """Run position-dependent density evolution on the terminated chain.

    Stops with SUCCESS when every position's a-posteriori erasure
    probability drops below stop_tol, with STALL when the profile moves by
    less than stall_tol in one iteration, else with MAX_ITER.
    """
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must be in [0, 1]")
    L = params.L
    lay1 = _Layer(params.l1, params.r1, params.layer_memory(1), L, params.kind, eps)
    lay2 = None
    if params.l2 > 0:
        lay2 = _Layer(params.l2, params.r2, params.layer_memory(2), L, params.kind, eps)

    prof = np.full(L, eps)
    trace = [] if record_trace else None
    outcome = MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        lay1.check_messages()
        if lay2 is not None:
            lay2.check_messages()
        W1 = lay1.windows()
        W2 = lay2.windows() if lay2 is not None else None

        if params.kind == UNIT_OFFSET:
            F1 = W1.prod(axis=0)
            E1 = _excl_prod(W1)
            if lay2 is None:
                lay1.p = eps * E1
                new_prof = eps * F1
            else:
                F2 = W2.prod(axis=0)
                lay1.p = eps * E1 * F2
                lay2.p = eps * F1 * _excl_prod(W2)
                new_prof = eps * F1 * F2
        else:
            Q1 = W1.mean(axis=0)
            if lay2 is None:
                lay1.p = eps * Q1 ** (lay1.l - 1)
                new_prof = eps * Q1 ** lay1.l
            else:
                Q2 = W2.mean(axis=0)
                core = eps * Q1 ** (lay1.l - 1) * Q2 ** (lay2.l - 1)
                lay1.p = core * Q2
                lay2.p = core * Q1
                new_prof = core * Q1 * Q2

        delta = np.abs(new_prof - prof).max()
        prof = new_prof
        if record_trace:
            trace.append(prof.copy())
        if prof.max() < stop_tol:
            outcome = SUCCESS
            break
        if delta < stall_tol:
            outcome = STALL
            break

    return DEProfile(eps=eps, p=prof, q1=lay1.qc,
                     q2=lay2.qc if lay2 is not None else None,
                     iterations=it, outcome=outcome,
                     residual=float(prof.max()), trace=trace)


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    lo: float                # largest eps that decoded
    hi: float                # smallest eps that failed
    width: float
    probes: int
    critical_iterations: int  # iteration count of the last probe
    critical_residual: float  # max_t p_t of the last probe


def shannon_limit(params: BilayerParams) -> float:
    """1 - R for the asymptotic rate, i.e. l1/r1 + l2/r2."""
    lim = params.l1 / params.r1
    if params.l2 > 0:
        lim += params.l2 / params.r2
    return lim


def bp_threshold(params: BilayerParams, bracket_tol: float = 1e-4,
                 max_iter: int = 100_000, stop_tol: float = 1e-10) -> ThresholdResult:
    """Bisect the coupled-DE success/failure boundary over eps in [0, 1]."""
    lo_prof = de_coupled(params, 0.0, max_iter=max_iter, stop_tol=stop_tol)
    if not lo_prof.success:
        raise RuntimeError("density evolution failed at eps = 0; "
                           "bisection has no valid bracket")
    hi_prof = de_coupled(params, 1.0, max_iter=max_iter, stop_tol=stop_tol)
    if hi_prof.success:
        raise RuntimeError("density evolution succeeded at eps = 1; "
                           "bisection has no valid bracket")
    lo, hi = 0.0, 1.0
    probes = 2
    last = hi_prof
    while hi - lo > bracket_tol:
        mid = 0.5 * (lo + hi)
        last = de_coupled(params, mid, max_iter=max_iter, stop_tol=stop_tol)
        probes += 1
        if last.success:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(threshold=0.5 * (lo + hi), lo=lo, hi=hi,
                           width=hi - lo, probes=probes,
                           critical_iterations=last.iterations,
                           critical_residual=last.residual)
