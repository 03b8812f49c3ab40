"""Tanner graphs for single-layer and bilayer LDPC convolutional codes.

Variable nodes live at time positions 1..L (M per position).  Check nodes
carry a time position in 1..L+w and a layer tag (1 or 2); an edge from a
variable at time t may only attach to a check of its layer at time
u in [t, t+w_m].  Layer-1 checks are the zero-syndrome constraints used by
the relay; layer-2 checks hold the syndrome slots forwarded to the
destination.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

GENERAL = "general"
UNIT_OFFSET = "unit-offset"


class ConstructionError(RuntimeError):
    """Raised when a graph cannot be built from the requested parameters."""


@dataclass(frozen=True)
class BilayerParams:
    """Degrees, chain length, memory and size of a (bi)layer ensemble.

    A single-layer code has l2 == 0.  For the general ensemble both layers
    use the memory `w` (layer 2 may override it with `w2`); for the
    unit-offset ensemble the memory of layer m is l_m - 1 by definition and
    `w` must equal l1 - 1.

    M, the number of variable nodes per position, may be None for purely
    asymptotic (density evolution) use; it is required to build a graph.
    """

    l1: int
    r1: int
    L: int
    w: int
    l2: int = 0
    r2: int = 0
    w2: int | None = None
    M: int | None = None
    kind: str = GENERAL

    def __post_init__(self):
        if self.kind not in (GENERAL, UNIT_OFFSET):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.l1 < 2:
            raise ValueError("l1 must be at least 2")
        if self.l2 < 0:
            raise ValueError("l2 must be non-negative")
        if self.r1 < self.l1:
            raise ValueError("r1 must be at least l1")
        if self.l2 > 0 and self.r2 < self.l2:
            raise ValueError("r2 must be at least l2")
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if self.w < 0:
            raise ValueError("w must be non-negative")
        if self.kind == UNIT_OFFSET:
            if self.w != self.l1 - 1:
                raise ValueError("unit-offset ensemble requires w == l1 - 1")
            if self.l2 > 0 and self.w2 not in (None, self.l2 - 1):
                raise ValueError("unit-offset ensemble requires w2 == l2 - 1")
        if self.M is not None:
            for l, r in self.active_layers():
                if (self.M * l) % r != 0:
                    raise ValueError(f"M*l = {self.M * l} not divisible by r = {r}")

    # -- derived quantities -------------------------------------------------

    def active_layers(self):
        layers = [(self.l1, self.r1)]
        if self.l2 > 0:
            layers.append((self.l2, self.r2))
        return layers

    def layer_memory(self, layer: int) -> int:
        if layer == 1:
            return self.l1 - 1 if self.kind == UNIT_OFFSET else self.w
        if self.l2 == 0:
            raise ValueError("graph has no layer 2")
        if self.kind == UNIT_OFFSET:
            return self.l2 - 1
        return self.w if self.w2 is None else self.w2

    def checks_per_position(self, layer: int) -> int:
        if self.M is None:
            raise ValueError("M is not set")
        l, r = (self.l1, self.r1) if layer == 1 else (self.l2, self.r2)
        return (self.M * l) // r

    @property
    def num_vars(self) -> int:
        if self.M is None:
            raise ValueError("M is not set")
        return self.M * self.L

    @property
    def single_layer(self) -> bool:
        return self.l2 == 0

    def without_layer2(self) -> "BilayerParams":
        return replace(self, l2=0, r2=0, w2=None)

    def with_layer2(self, l2: int, r2: int, w2: int | None = None) -> "BilayerParams":
        return replace(self, l2=l2, r2=r2, w2=w2)


def single_layer_params(l, r, L, w=None, M=None, kind=GENERAL) -> BilayerParams:
    """Convenience constructor for an {l, r, L, w} single-layer ensemble."""
    if w is None:
        w = l - 1
    return BilayerParams(l1=l, r1=r, L=L, w=w, M=M, kind=kind)


class TannerGraph:
    """Immutable bipartite graph of variable and check nodes.

    Checks are stored in CSR form (`check_ptr`, `check_adj`), layer 1 first,
    ordered by time position.  `edge_layer` tags every edge with its check's
    layer; the transpose (`var_ptr`, `var_adj`) maps each variable to its
    incident check indices.  Syndrome bits are index-aligned with
    `layer2_checks`.
    """

    def __init__(self, params: BilayerParams, check_time, check_layer, check_adj,
                 check_ptr, edge_layer=None):
        self.params = params
        self.num_vars = params.num_vars
        self.var_time = np.repeat(np.arange(1, params.L + 1, dtype=np.int32), params.M)
        self.check_time = np.asarray(check_time, dtype=np.int32)
        self.check_layer = np.asarray(check_layer, dtype=np.int8)
        self.check_adj = np.asarray(check_adj, dtype=np.int32)
        self.check_ptr = np.asarray(check_ptr, dtype=np.int64)
        self.num_checks = len(self.check_time)
        self.check_deg = np.diff(self.check_ptr).astype(np.int32)
        if edge_layer is None:
            edge_layer = np.repeat(self.check_layer, self.check_deg)
        self.edge_layer = np.asarray(edge_layer, dtype=np.int8)
        self.layer2_checks = np.nonzero(self.check_layer == 2)[0]
        # transpose adjacency: checks incident to each variable
        edge_check = np.repeat(np.arange(self.num_checks, dtype=np.int32), self.check_deg)
        order = np.argsort(self.check_adj, kind="stable")
        self.var_adj = edge_check[order]
        counts = np.bincount(self.check_adj, minlength=self.num_vars)
        self.var_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._layer1 = None
        self._bp = None
        self._encoder = None

    # -- views ---------------------------------------------------------------

    def layer1(self) -> "TannerGraph":
        """Subgraph containing only the layer-1 checks (cached)."""
        if self.params.single_layer:
            return self
        if self._layer1 is None:
            keep = self.check_layer == 1
            adj, ptr = _filter_csr(self.check_adj, self.check_ptr, keep)
            self._layer1 = TannerGraph(
                self.params.without_layer2(),
                self.check_time[keep], self.check_layer[keep], adj, ptr)
        return self._layer1

    def check_vars(self, c: int) -> np.ndarray:
        return self.check_adj[self.check_ptr[c]:self.check_ptr[c + 1]]

    def var_checks(self, v: int) -> np.ndarray:
        return self.var_adj[self.var_ptr[v]:self.var_ptr[v + 1]]

    def var_degree(self, layer: int) -> np.ndarray:
        """Per-variable edge count within one layer."""
        sel = self.edge_layer == layer
        return np.bincount(self.check_adj[sel], minlength=self.num_vars)

    def layer_edge_count(self, layer: int) -> int:
        return int(self.check_deg[self.check_layer == layer].sum())

    # -- serialization --------------------------------------------------------

    def to_text(self) -> str:
        """Plain-text adjacency dump: `vars checks layers`, then one line
        `time layer v1 ... vk` per check (0-based variable indices)."""
        layers = 2 if len(self.layer2_checks) else 1
        lines = [f"{self.num_vars} {self.num_checks} {layers}"]
        for c in range(self.num_checks):
            vs = " ".join(str(v) for v in self.check_vars(c))
            lines.append(f"{self.check_time[c]} {self.check_layer[c]} {vs}")
        return "\n".join(lines) + "\n"


def graph_from_text(text: str, params: BilayerParams) -> TannerGraph:
    """Rebuild a graph from `to_text` output; params supply M, L, degrees."""
    lines = text.strip().split("\n")
    num_vars, num_checks, _ = (int(x) for x in lines[0].split())
    if num_vars != params.num_vars:
        raise ValueError("params do not match serialized variable count")
    time, layer, adj, ptr = [], [], [], [0]
    for line in lines[1:]:
        parts = [int(x) for x in line.split()]
        time.append(parts[0])
        layer.append(parts[1])
        adj.extend(parts[2:])
        ptr.append(len(adj))
    if len(time) != num_checks:
        raise ValueError("check count does not match header")
    return TannerGraph(params, time, layer, adj, ptr)


def _filter_csr(adj, ptr, keep):
    lens = np.diff(ptr)
    edge_keep = np.repeat(keep, lens)
    new_lens = lens[keep]
    new_ptr = np.concatenate([[0], np.cumsum(new_lens)])
    return adj[edge_keep], new_ptr


# -- operations ---------------------------------------------------------------


def design_rate(graph: TannerGraph) -> float:
    """1 - (#non-degenerate checks)/N.  Degree-0 checks are dropped at
    construction, so every stored check counts; trailing under-full checks
    are what makes this fall short of 1 - l1/r1 - l2/r2 at finite L."""
    return 1.0 - graph.num_checks / graph.num_vars


def design_rate_limit(params: BilayerParams) -> float:
    """The L -> infinity rate 1 - l1/r1 - l2/r2."""
    rate = 1.0 - params.l1 / params.r1
    if params.l2 > 0:
        rate -= params.l2 / params.r2
    return rate


def _first(idx, n=5):
    idx = list(idx[:n])
    return ", ".join(str(int(i)) for i in idx)


def validate(graph: TannerGraph) -> list:
    """Check the structural invariants; returns one message per violation.

    For the general ensemble at finite M the i.i.d. offset draws make the
    interior check fill fluctuate, so exact interior check degree is only
    enforced for the unit-offset kind; every check is bounded by r_m.
    """
    p = graph.params
    out = []
    edge_check = np.repeat(np.arange(graph.num_checks, dtype=np.int64), graph.check_deg)

    # per-edge layer tag must match the owning check
    mism = np.nonzero(graph.edge_layer != graph.check_layer[edge_check])[0]
    if len(mism):
        out.append(f"layer mismatch: {len(mism)} edge(s) tagged with the wrong layer "
                   f"(checks {_first(edge_check[mism])})")

    # duplicate edges within a check
    key = edge_check * graph.num_vars + graph.check_adj
    uniq, counts = np.unique(key, return_counts=True)
    dup = uniq[counts > 1]
    if len(dup):
        out.append(f"multi-edge: {len(dup)} repeated (check, variable) pair(s) "
                   f"(checks {_first(dup // graph.num_vars)})")

    if (graph.check_deg == 0).any():
        out.append(f"degenerate: checks {_first(np.nonzero(graph.check_deg == 0)[0])} "
                   f"have no variables")

    for layer in (1, 2):
        if layer == 2 and p.single_layer:
            continue
        l, r = (p.l1, p.r1) if layer == 1 else (p.l2, p.r2)
        w = p.layer_memory(layer)
        emask = graph.edge_layer == layer
        t = graph.var_time[graph.check_adj[emask]]
        u = graph.check_time[edge_check[emask]]
        bad = np.nonzero((t > u) | (t < u - w))[0]
        if len(bad):
            out.append(f"window: {len(bad)} layer-{layer} edge(s) outside [t, t+{w}] "
                       f"(checks {_first(edge_check[emask][bad])})")

        cidx = np.nonzero(graph.check_layer == layer)[0]
        over = cidx[graph.check_deg[cidx] > r]
        if len(over):
            out.append(f"degree: layer-{layer} checks {_first(over)} exceed r = {r}")
        if p.kind == UNIT_OFFSET:
            interior = cidx[(graph.check_time[cidx] > w) & (graph.check_time[cidx] <= p.L)]
            under = interior[graph.check_deg[interior] != r]
            if len(under):
                out.append(f"degree: interior layer-{layer} checks {_first(under)} "
                           f"have degree != r = {r}")

        vdeg = graph.var_degree(layer)
        badv = np.nonzero(vdeg != l)[0]
        if len(badv):
            out.append(f"degree: {len(badv)} variable(s) with layer-{layer} degree != {l} "
                       f"(variables {_first(badv)})")
    return out
