"""Randomized construction of LDPC convolutional Tanner graphs.

Two ensemble kinds are supported.  In the general {l, r, L, w} ensemble
every edge of a variable at time t picks a uniform independent offset in
[0, w]; in the unit-offset {l, r, L} ensemble each variable sends exactly
one edge to each of the offsets 0..l-1.  Check sockets within a time
position are filled by a uniform random permutation, with bounded repair
passes that keep check degrees <= r and remove duplicate edges.

The block-code baseline is the same machinery collapsed to a single time
position (L = 1, w = 0), i.e. a configuration-model regular bipartite graph
per layer.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .graph import (GENERAL, UNIT_OFFSET, BilayerParams, ConstructionError,
                    TannerGraph)
from .rng import Seed, as_seed

_MAX_REDRAWS = 30
_MAX_SWAP_TRIES = 200


@dataclass(frozen=True)
class VariableType:
    """Edge counts per offset, (m_0, ..., m_w), summing to the degree l."""

    offsets: tuple

    def __post_init__(self):
        if any(m < 0 for m in self.offsets):
            raise ValueError("offset counts must be non-negative")

    @property
    def degree(self) -> int:
        return sum(self.offsets)


def sample_type(l: int, w: int, rng, kind=GENERAL) -> VariableType:
    """Draw one variable type.

    general: the l edges choose i.i.d. uniform offsets in [0, w] and the
    counts are aggregated.  unit-offset: deterministic all-ones tuple,
    requiring l == w + 1.
    """
    if l < 1 or w < 0:
        raise ValueError("need l >= 1 and w >= 0")
    if kind == UNIT_OFFSET:
        if l != w + 1:
            raise ValueError("unit-offset type requires l == w + 1")
        return VariableType((1,) * l)
    counts = np.bincount(rng.integers(0, w + 1, size=l), minlength=w + 1)
    return VariableType(tuple(int(c) for c in counts))


# -- one layer of checks -------------------------------------------------------


def _sample_offsets(n_vars, l, w, kind, rng):
    if kind == UNIT_OFFSET:
        if l != w + 1:
            raise ConstructionError("unit-offset ensemble requires l == w + 1")
        return np.tile(np.arange(l, dtype=np.int64), (n_vars, 1))
    return rng.integers(0, w + 1, size=(n_vars, l)).astype(np.int64)


def _repair_capacity(edge_pos, edge_var, var_t0, w, cap, n_pos, rng):
    """Defer random excess edges of over-full positions rightward within
    their variable's window (a single left-to-right sweep).

    Only the general ensemble needs this: i.i.d. offsets make per-position
    arrival counts fluctuate around the socket capacity.  The sweep always
    succeeds: edges that can no longer move (position == variable time + w)
    number at most one variable-position's worth, which is exactly the
    capacity."""
    counts = np.bincount(edge_pos, minlength=n_pos)
    if not (counts > cap).any():
        return edge_pos
    edge_pos = edge_pos.copy()
    deadline = var_t0[edge_var] + w
    for p in range(n_pos - 1):
        over = counts[p] - cap
        if over <= 0:
            continue
        here = np.nonzero(edge_pos == p)[0]
        movable = here[deadline[here] > p]
        if len(movable) < over:
            raise ConstructionError("could not rebalance over-full check positions")
        moved = rng.choice(movable, size=over, replace=False)
        edge_pos[moved] = p + 1
        counts[p] -= over
        counts[p + 1] += over
    if counts[n_pos - 1] > cap:
        raise ConstructionError("could not rebalance over-full check positions")
    return edge_pos


def _match_position(vars_p, cpp, r, rng):
    """Assign the edges arriving at one time position to the cpp*r check
    sockets by a uniform random permutation; returns the local check index
    of every edge.  Redraws the permutation a bounded number of times to
    avoid duplicate (check, variable) pairs, then fixes leftovers by
    pairwise socket swaps."""
    n_e = len(vars_p)
    cap = cpp * r
    chk = None
    for _ in range(_MAX_REDRAWS):
        chk = rng.permutation(cap)[:n_e] // r
        key = chk * np.int64(2 ** 32) + vars_p
        if len(np.unique(key)) == n_e:
            return chk
    # pairwise swap repair on the last draw; every legal swap strictly
    # reduces the number of duplicated (check, variable) pairs
    count = [Counter() for _ in range(cpp)]
    for e in range(n_e):
        count[chk[e]][int(vars_p[e])] += 1

    def conflicts():
        return [e for e in range(n_e) if count[chk[e]][int(vars_p[e])] > 1]

    pending = conflicts()
    rounds = 0
    while pending:
        rounds += 1
        if rounds > 4 * n_e:
            raise ConstructionError("could not untangle duplicate edges in a check")
        e = pending[0]
        c, v = int(chk[e]), int(vars_p[e])
        for _ in range(_MAX_SWAP_TRIES):
            f = int(rng.integers(n_e))
            cf, vf = int(chk[f]), int(vars_p[f])
            if cf == c or vf == v:
                continue
            if count[cf][v] > 0 or count[c][vf] > 0:
                continue
            count[c][v] -= 1
            count[cf][v] += 1
            count[cf][vf] -= 1
            count[c][vf] += 1
            chk[e], chk[f] = cf, c
            break
        else:
            raise ConstructionError("could not untangle duplicate edges in a check")
        pending = conflicts()
    return chk


def _match_position_balanced(class_vars, cpp, r, rng):
    """Unit-offset matching: distribute each offset class's edges over the
    cpp checks with as-equal-as-possible per-check quotas, random remainder
    placement, and a uniform permutation within every class.

    The per-check offset balance is what gives the chain its finite-M
    robustness; the fully uniform socket permutation builds the same
    ensemble but its decoding waves stall far below the ensemble threshold
    at moderate M.  Classes hold one edge per variable, so checks can never
    see a duplicate.
    """
    bases = [len(cv) // cpp for cv in class_vars]
    rems = [len(cv) % cpp for cv in class_vars]
    cap = r - sum(bases)
    if cap < 0:
        raise ConstructionError("check sockets over-subscribed at a position")
    quota = np.tile(np.array(bases, dtype=np.int64), (cpp, 1))
    slots = rng.permutation(np.repeat(np.arange(cpp), cap))
    need = sum(rems)
    if need > len(slots):
        raise ConstructionError("check sockets over-subscribed at a position")
    pos = 0
    for j, rem in enumerate(rems):
        for c in slots[pos:pos + rem]:
            quota[c, j] += 1
        pos += rem
    chk_parts, var_parts = [], []
    for j, cv in enumerate(class_vars):
        perm = rng.permutation(cv)
        chk_parts.append(np.repeat(np.arange(cpp, dtype=np.int64), quota[:, j]))
        var_parts.append(perm)
    return np.concatenate(chk_parts), np.concatenate(var_parts)


def _build_layer(params: BilayerParams, layer: int, rng):
    """Construct one layer's checks: (check_time 1-based, adj, ptr)."""
    M, L = params.M, params.L
    l, r = (params.l1, params.r1) if layer == 1 else (params.l2, params.r2)
    w = params.layer_memory(layer)
    cpp = params.checks_per_position(layer)
    n_pos = L + w
    cap = cpp * r  # == M * l

    check_time, adj_parts = [], []

    if params.kind == UNIT_OFFSET:
        for p in range(n_pos):
            # offset class j holds the single offset-j edge of every
            # variable at position p - j
            class_vars = [np.arange((p - j) * M, (p - j + 1) * M, dtype=np.int64)
                          for j in range(w + 1) if 0 <= p - j < L]
            chk, vars_p = _match_position_balanced(class_vars, cpp, r, rng)
            _collect_checks(p, chk, vars_p, check_time, adj_parts)
    else:
        var_t0 = np.repeat(np.arange(L, dtype=np.int64), M)
        offs = _sample_offsets(M * L, l, w, params.kind, rng)
        edge_var = np.repeat(np.arange(M * L, dtype=np.int64), l)
        edge_pos = (var_t0[:, None] + offs).ravel()
        edge_pos = _repair_capacity(edge_pos, edge_var, var_t0, w, cap, n_pos, rng)
        order = np.argsort(edge_pos, kind="stable")
        bounds = np.searchsorted(edge_pos[order], np.arange(n_pos + 1))
        for p in range(n_pos):
            vars_p = edge_var[order[bounds[p]:bounds[p + 1]]]
            if len(vars_p) == 0:
                continue
            chk = _match_position(vars_p, cpp, r, rng)
            _collect_checks(p, chk, vars_p, check_time, adj_parts)

    adj_parts = _expurgate_twin_pairs(check_time, adj_parts, rng)
    adj = np.concatenate(adj_parts) if adj_parts else np.zeros(0, dtype=np.int64)
    lens = np.array([len(a) for a in adj_parts], dtype=np.int64)
    ptr = np.concatenate([[0], np.cumsum(lens)])
    return np.array(check_time, dtype=np.int32), adj, ptr


def _collect_checks(p, chk, vars_p, check_time, adj_parts):
    """Group one position's (check, variable) pairs into sorted per-check
    adjacency lists, dropping degree-0 checks."""
    sortkey = np.argsort(chk * np.int64(2 ** 32) + vars_p, kind="stable")
    chk_s, vars_s = chk[sortkey], vars_p[sortkey]
    present, starts = np.unique(chk_s, return_index=True)
    starts = np.append(starts, len(chk_s))
    for i in range(len(present)):
        check_time.append(p + 1)
        adj_parts.append(vars_s[starts[i]:starts[i + 1]])


def _expurgate_twin_pairs(check_time, adj_parts, rng):
    """Rewire variables whose layer check set coincides with another
    variable's.  Such twins form a two-variable stopping set of the layer
    and dominate the block-error floor; one of their edges is swapped with
    an edge of a different check at the same time position, which keeps all
    degrees and window constraints intact.

    Best effort: on toy-sized graphs twins can be unavoidable (more
    variables per position than distinct check tuples), so the pass stops
    when it can no longer make progress."""
    sets = [set(a.tolist()) for a in adj_parts]
    var_checks = {}
    for c, a in enumerate(adj_parts):
        for v in a.tolist():
            var_checks.setdefault(v, []).append(c)
    by_pos = {}
    for c, t in enumerate(check_time):
        by_pos.setdefault(t, []).append(c)

    for _ in range(40):
        buckets = {}
        for v, cs in var_checks.items():
            buckets.setdefault(tuple(sorted(cs)), []).append(v)
        twins = [vs for vs in buckets.values() if len(vs) > 1]
        if not twins:
            break
        repaired = 0
        for vs in twins:
            for v in vs[1:]:
                cs = var_checks[v]
                c = cs[rng.integers(len(cs))]
                cands = [c2 for c2 in by_pos[check_time[c]]
                         if c2 != c and v not in sets[c2]]
                rng.shuffle(cands)
                for c2 in cands:
                    others = [u for u in sets[c2] if u not in sets[c]]
                    if not others:
                        continue
                    u = others[rng.integers(len(others))]
                    sets[c].discard(v)
                    sets[c].add(u)
                    sets[c2].discard(u)
                    sets[c2].add(v)
                    var_checks[v] = [c2 if x == c else x for x in var_checks[v]]
                    var_checks[u] = [c if x == c2 else x for x in var_checks[u]]
                    repaired += 1
                    break
        if repaired == 0:
            break
    return [np.array(sorted(s), dtype=np.int64) for s in sets]


# -- public construction ops ---------------------------------------------------


def build_single_layer(params: BilayerParams, seed) -> TannerGraph:
    """Sample a single-layer {l, r, L, w} graph (params must have l2 == 0)."""
    if not params.single_layer:
        raise ValueError("params carry a second layer; use build_graph")
    rng = as_seed(seed).child("layer1").generator()
    time, adj, ptr = _build_layer(params, 1, rng)
    return TannerGraph(params, time, np.ones(len(time), dtype=np.int8), adj, ptr)


def extend_to_bilayer(graph: TannerGraph, l2: int, r2: int, seed,
                      w2: int | None = None) -> TannerGraph:
    """Add layer-2 checks drawn from {l2, r2, L, w2}; layer-1 edges are
    reused untouched.  l2 == 0 returns the graph unchanged."""
    if l2 == 0:
        return graph
    if not graph.params.single_layer:
        raise ValueError("graph already has a second layer")
    params = graph.params.with_layer2(l2, r2, w2)
    rng = as_seed(seed).child("layer2").generator()
    time2, adj2, ptr2 = _build_layer(params, 2, rng)
    time = np.concatenate([graph.check_time, time2])
    layer = np.concatenate([np.ones(graph.num_checks, dtype=np.int8),
                            np.full(len(time2), 2, dtype=np.int8)])
    adj = np.concatenate([graph.check_adj, adj2])
    ptr = np.concatenate([graph.check_ptr, graph.check_ptr[-1] + ptr2[1:]])
    return TannerGraph(params, time, layer, adj, ptr)


def build_graph(params: BilayerParams, seed) -> TannerGraph:
    """Build a graph with however many layers params describe."""
    seed = as_seed(seed)
    g = build_single_layer(params.without_layer2(), seed)
    if params.single_layer:
        return g
    return extend_to_bilayer(g, params.l2, params.r2, seed, params.w2)


def build_block_bilayer(l1: int, l2: int, r: int, N: int, seed) -> TannerGraph:
    """Regular bilayer LDPC block code: configuration-model bipartite graph
    per layer, i.e. the convolutional construction with L = 1, w = 0."""
    params = BilayerParams(l1=l1, r1=r, L=1, w=0, l2=l2, r2=r, M=N, kind=GENERAL)
    return build_graph(params, seed)


# -- code design ---------------------------------------------------------------


@dataclass(frozen=True)
class L2Design:
    """Result of sizing the second layer from the two downlink qualities.

    `l2` is set when r*(eps_sd - eps_sr) is an integer; otherwise
    `candidates` lists the neighboring integer degrees with the
    source-destination erasure rate each one is actually matched to.
    """

    exact: float
    l2: int | None
    candidates: tuple

    def __bool__(self):
        return self.l2 is not None


def derive_l2(r: int, eps_sr: float, eps_sd: float) -> L2Design:
    """Second-layer variable degree l2 = r*(eps_sd - eps_sr)."""
    if not (0.0 <= eps_sr < eps_sd <= 1.0):
        raise ValueError("need 0 <= eps_sr < eps_sd <= 1 (a relay that does not "
                         "out-hear the destination adds nothing)")
    exact = r * (eps_sd - eps_sr)
    nearest = round(exact)
    if abs(exact - nearest) < 1e-9:
        if nearest <= 0:
            raise ValueError("derived l2 is non-positive; relay adds nothing")
        return L2Design(exact, int(nearest), ())
    lo, hi = int(np.floor(exact)), int(np.ceil(exact))
    cands = tuple((c, eps_sr + c / r) for c in (lo, hi) if c > 0)
    if not cands:
        raise ValueError("derived l2 is non-positive; relay adds nothing")
    return L2Design(exact, None, cands)
