"""Command-line entry points.

Subcommands: design, threshold, simulate, compare, graph-dump.  Common
flags: --seed, --workers, --out, --config.  Config files are INI-style
(`[section]` headers, `key = value` lines); command-line flags override
file values.  Every output starts with a comment header echoing the tool
version, the effective configuration, the master seed and a timestamp;
stripping the `#` lines, outputs are pure functions of the configuration.

Exit codes: 0 success, 1 usage/configuration error, 2 infeasible design.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from datetime import datetime, timezone

from . import __version__
from .channels import rate_plan_capacities
from .density_evolution import bp_threshold, shannon_limit
from .ensembles import build_graph, derive_l2
from .graph import GENERAL, UNIT_OFFSET, BilayerParams, design_rate_limit
from .relaysim import (DESTINATION, RELAY, CompareConfig, SweepConfig,
                       block_length_rule, compare_conv_vs_block, run_sweep)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2

SIM_HEADER = "ensemble,l1,l2,r,L,M,w,channel,param,trials,bit_errors,ber,block_errors,bler,ci95,seed"
THRESH_HEADER = "l1,l2,r,L,w,kind,threshold,shannon_limit,gap,error"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class _Output:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = open(self.path, "w") if self.path else sys.stdout
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()


def _header_lines(fh, seed, config_items):
    print(f"# bilayercc {__version__}", file=fh)
    print(f"# generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}", file=fh)
    print(f"# seed: {seed}", file=fh)
    cfg = " ".join(f"{k}={v}" for k, v in config_items)
    print(f"# config: {cfg}", file=fh)


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _load_config(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as e:
        raise SystemExit(_usage_error(f"cannot read config {path}: {e}"))
    except configparser.Error as e:
        raise SystemExit(_usage_error(f"config parse error: {e}"))
    return cp


def _usage_error(msg):
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _get(cfg, section, key, fallback=None):
    if cfg is not None and cfg.has_option(section, key):
        return cfg.get(section, key)
    return fallback


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if str(x).strip() != "")


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if str(x).strip() != "")


# -- design ---------------------------------------------------------------------


def cmd_design(args):
    eps_sr, eps_sd, c_rd, r = args.eps_sr, args.eps_sd, args.c_rd, args.r
    if not (0.0 <= eps_sr < eps_sd <= 1.0):
        return _usage_error("need 0 <= eps-sr < eps-sd <= 1")
    out = []
    infeasible = False

    l1_exact = r * eps_sr
    l1 = round(l1_exact)
    if abs(l1_exact - l1) > 1e-9:
        lo, hi = int(l1_exact), int(l1_exact) + 1
        out.append(f"l1 = {l1_exact:g} is not integral for r = {r}; candidates: "
                   + ", ".join(f"l1={c} (eps_sr={c / r:g})" for c in (lo, hi) if c >= 2))
        infeasible = True
        l1 = None
    elif l1 < 2:
        out.append(f"l1 = {l1} is below the minimum degree 2")
        infeasible = True
        l1 = None

    try:
        d = derive_l2(r, eps_sr, eps_sd)
    except ValueError as e:
        out.append(f"l2: {e}")
        infeasible = True
        d = None
    if d is not None and d.l2 is None:
        out.append(f"l2 = {d.exact:g} is not integral for r = {r}; candidates: "
                   + ", ".join(f"l2={c} (achieved eps_sd={a:g})" for c, a in d.candidates))
        infeasible = True

    print(f"bilayer code design for eps_sr={eps_sr:g}, eps_sd={eps_sd:g}, "
          f"c_rd={c_rd:g}, r={r}")
    for line in out:
        print(f"  {line}")
    if infeasible:
        return EXIT_INFEASIBLE

    plan = rate_plan_capacities(1.0 - eps_sr, 1.0 - eps_sd, c_rd)
    params = BilayerParams(l1=l1, r1=r, L=args.L, w=args.w if args.w is not None else l1 - 1,
                           l2=d.l2, r2=r, kind=args.kind)
    rate1_l = 1.0 - (l1 / r) * (args.L + params.layer_memory(1)) / args.L
    rate_l = rate1_l - (d.l2 / r) * (args.L + params.layer_memory(2)) / args.L
    print(f"  l1 = {l1}  (source-relay code rate {1.0 - l1 / r:g})")
    print(f"  l2 = {d.l2}  (overall rate {design_rate_limit(params):g})")
    print(f"  alpha = {plan.alpha:.6f}  r_df = {plan.r_df:.6f}")
    print(f"  syndrome bits per phase-1 channel use: {plan.k2:g}")
    print(f"  finite-L design rates at L={args.L} ({params.kind}): "
          f"layer 1 {rate1_l:.6f}, overall {rate_l:.6f}")
    return EXIT_OK


# -- threshold ------------------------------------------------------------------


def _threshold_rows(args, cfg):
    l1s = _ints(args.l1 if args.l1 is not None else _get(cfg, "threshold", "l1", ""))
    l2s = _ints(args.l2 if args.l2 is not None else _get(cfg, "threshold", "l2", "0"))
    rs = _ints(args.r if args.r is not None else _get(cfg, "threshold", "r", ""))
    Ls = _ints(args.L if args.L is not None else _get(cfg, "threshold", "L", "100"))
    ws = _ints(args.w) if args.w is not None else (
        _ints(_get(cfg, "threshold", "w")) if _get(cfg, "threshold", "w") else (None,))
    kind = args.kind or _get(cfg, "threshold", "kind", UNIT_OFFSET)
    rows = []
    for l1 in l1s:
        for r in rs:
            for L in Ls:
                for w in ws:
                    for l2 in l2s:
                        rows.append(dict(l1=l1, l2=l2, r=r, L=L, w=w, kind=kind))
    return rows


def cmd_threshold(args):
    cfg = _load_config(args.config) if args.config else None
    rows = _threshold_rows(args, cfg)
    failed = False
    with _Output(args.out) as fh:
        _header_lines(fh, args.seed, [("rows", len(rows)),
                                      ("bracket_tol", args.bracket_tol)])
        print(THRESH_HEADER, file=fh)
        for row in rows:
            w = row["w"]
            try:
                if w is None:
                    w = row["l1"] - 1 if row["kind"] == UNIT_OFFSET else 2
                params = BilayerParams(
                    l1=row["l1"], r1=row["r"], L=row["L"], w=w,
                    l2=row["l2"], r2=row["r"] if row["l2"] else 0,
                    kind=row["kind"])
                res = bp_threshold(params, bracket_tol=args.bracket_tol)
                sh = shannon_limit(params)
                cells = [row["l1"], row["l2"], row["r"], row["L"], w, row["kind"],
                         _fmt(res.threshold), _fmt(sh), _fmt(sh - res.threshold), ""]
            except (ValueError, RuntimeError) as e:
                failed = True
                cells = [row["l1"], row["l2"], row["r"], row["L"], w, row["kind"],
                         "", "", "", str(e).replace(",", ";")]
            print(",".join(str(c) for c in cells), file=fh)
    return EXIT_USAGE if failed else EXIT_OK


# -- simulate / compare ----------------------------------------------------------


def _code_params(args, cfg, section="code"):
    def pick(flag, key, default=None, cast=int):
        v = flag if flag is not None else _get(cfg, section, key)
        if v is None:
            if default is None:
                raise SystemExit(_usage_error(f"missing code parameter {key}"))
            return default
        return cast(v)

    kind = args.kind or _get(cfg, section, "kind", UNIT_OFFSET)
    l1 = pick(args.l1, "l1")
    l2s = _ints(args.l2 if args.l2 is not None else _get(cfg, section, "l2", "0"))
    r1 = pick(args.r1, "r1")
    r2 = pick(args.r2, "r2", default=r1)
    L = pick(args.L, "L")
    M = pick(args.M, "M")
    w = args.w if args.w is not None else _get(cfg, section, "w")
    w2 = args.w2 if args.w2 is not None else _get(cfg, section, "w2")
    out = []
    for l2 in l2s:
        wv = int(w) if w is not None else (l1 - 1 if kind == UNIT_OFFSET else 2)
        out.append(BilayerParams(l1=l1, r1=r1, L=L, w=wv, l2=l2,
                                 r2=r2 if l2 else 0,
                                 w2=int(w2) if w2 is not None else None,
                                 M=M, kind=kind))
    return out


def _sim_numbers(args, cfg):
    trials = args.trials if args.trials is not None else int(_get(cfg, "sim", "trials", 200))
    target = args.target_block_errors if args.target_block_errors is not None \
        else int(_get(cfg, "sim", "target_block_errors", 100))
    seed = args.seed if args.seed is not None else int(_get(cfg, "sim", "seed", 0))
    max_iter = args.max_iter if args.max_iter is not None \
        else int(_get(cfg, "sim", "max_iter", 200))
    return trials, target, seed, max_iter


def _sim_row(fh, label, p, channel, res):
    cells = [label, p.l1, p.l2, p.r1, p.L, p.M, p.w, channel,
             _fmt(res.param), res.trials, res.bit_errors, _fmt(res.ber),
             res.block_errors, _fmt(res.bler), _fmt(res.ci95), res.seed]
    print(",".join(str(c) for c in cells), file=fh)
    fh.flush()


def cmd_simulate(args):
    cfg = _load_config(args.config) if args.config else None
    channel = args.channel or _get(cfg, "channel", "kind", "bec")
    grid = _floats(args.grid if args.grid is not None else _get(cfg, "channel", "grid", ""))
    side = args.side or _get(cfg, "channel", "side", DESTINATION)
    params_list = _code_params(args, cfg)
    trials, target, seed, max_iter = _sim_numbers(args, cfg)

    items = [("channel", channel), ("grid", ",".join(_fmt(g) for g in grid)),
             ("side", side), ("trials", trials), ("target_block_errors", target),
             ("workers", args.workers), ("codes", len(params_list))]
    items += [(f"code{i}", f"{p.kind}:{p.l1}/{p.l2}/{p.r1}/{p.r2} L={p.L} M={p.M} w={p.w}")
              for i, p in enumerate(params_list)]
    with _Output(args.out) as fh:
        _header_lines(fh, seed, items)
        print(SIM_HEADER, file=fh)
        if trials <= 0:
            return EXIT_OK
        for p in params_list:
            sc = SweepConfig(params=p, channel=channel, grid=grid, side=side,
                             trials=trials, target_block_errors=target,
                             seed=seed, workers=args.workers, max_iter=max_iter)
            label = f"{p.kind}:{'dest' if side == DESTINATION else 'relay'}"
            for res in run_sweep(sc):
                _sim_row(fh, label, p, channel, res)
    return EXIT_OK


def cmd_compare(args):
    cfg = _load_config(args.config) if args.config else None
    channel = args.channel or _get(cfg, "channel", "kind", "biawgn")
    grid = _floats(args.grid if args.grid is not None else _get(cfg, "channel", "grid", ""))
    params_list = _code_params(args, cfg)
    if len(params_list) != 1:
        return _usage_error("compare needs exactly one convolutional code")
    conv = params_list[0]
    trials, target, seed, max_iter = _sim_numbers(args, cfg)
    block_n = args.block_n if args.block_n is not None else \
        _get(cfg, "block", "n")
    block_n = int(block_n) if block_n is not None else None

    cc = CompareConfig(conv=conv, grid=grid, channel=channel, block_n=block_n,
                       trials=trials, target_block_errors=target, seed=seed,
                       workers=args.workers, max_iter=max_iter)
    eff_block = block_n or block_length_rule(conv)
    items = [("channel", channel), ("grid", ",".join(_fmt(g) for g in grid)),
             ("trials", trials), ("target_block_errors", target),
             ("workers", args.workers), ("block_n", eff_block),
             ("conv", f"{conv.kind}:{conv.l1}/{conv.l2}/{conv.r1}/{conv.r2} "
                      f"L={conv.L} M={conv.M} w={conv.w}")]
    block_p = BilayerParams(l1=conv.l1, r1=conv.r1, L=1, w=0, l2=conv.l2,
                            r2=conv.r2, M=eff_block, kind=GENERAL)
    with _Output(args.out) as fh:
        _header_lines(fh, seed, items)
        print(SIM_HEADER, file=fh)
        if trials <= 0:
            return EXIT_OK
        for arm, side, rows in compare_conv_vs_block(cc):
            p = conv if arm == "conv" else block_p
            label = f"{arm}:{'dest' if side == DESTINATION else 'relay'}"
            for res in rows:
                _sim_row(fh, label, p, channel, res)
    return EXIT_OK


# -- graph-dump -----------------------------------------------------------------


def cmd_graph_dump(args):
    cfg = _load_config(args.config) if args.config else None
    params_list = _code_params(args, cfg)
    if len(params_list) != 1:
        return _usage_error("graph-dump needs exactly one code")
    graph = build_graph(params_list[0], args.seed or 0)
    with _Output(args.out) as fh:
        fh.write(graph.to_text())
    return EXIT_OK


# -- argument plumbing -----------------------------------------------------------


def _add_code_flags(p):
    p.add_argument("--l1", type=int)
    p.add_argument("--l2", type=str, help="layer-2 degree (comma list allowed)")
    p.add_argument("--r1", type=int)
    p.add_argument("--r2", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--w", type=int)
    p.add_argument("--w2", type=int)
    p.add_argument("--kind", choices=[GENERAL, UNIT_OFFSET])


def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--config", type=str, default=None)


def build_parser():
    ap = _Parser(prog="bilayercc",
                 description="bilayer LDPC convolutional codes for relay channels")
    ap.add_argument("--version", action="version", version=f"bilayercc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design", help="derive code degrees from channel parameters")
    d.add_argument("--eps-sr", type=float, required=True)
    d.add_argument("--eps-sd", type=float, required=True)
    d.add_argument("--c-rd", type=float, required=True)
    d.add_argument("--r", type=int, required=True)
    d.add_argument("--L", type=int, default=100)
    d.add_argument("--w", type=int, default=None)
    d.add_argument("--kind", choices=[GENERAL, UNIT_OFFSET], default=UNIT_OFFSET)
    d.set_defaults(func=cmd_design)

    t = sub.add_parser("threshold", help="coupled density-evolution thresholds")
    t.add_argument("--l1", type=str)
    t.add_argument("--l2", type=str)
    t.add_argument("--r", type=str)
    t.add_argument("--L", type=str)
    t.add_argument("--w", type=str)
    t.add_argument("--kind", choices=[GENERAL, UNIT_OFFSET])
    t.add_argument("--bracket-tol", type=float, default=1e-4)
    _add_common(t)
    t.set_defaults(func=cmd_threshold, seed=0)

    s = sub.add_parser("simulate", help="Monte Carlo sweep of one or more codes")
    _add_code_flags(s)
    s.add_argument("--channel", choices=["bec", "biawgn"])
    s.add_argument("--grid", type=str, help="comma list: eps (bec) or SNR dB (biawgn)")
    s.add_argument("--side", choices=[RELAY, DESTINATION])
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--target-block-errors", type=int, default=None)
    s.add_argument("--max-iter", type=int, default=None)
    _add_common(s)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="convolutional vs block baseline")
    _add_code_flags(c)
    c.add_argument("--channel", choices=["bec", "biawgn"])
    c.add_argument("--grid", type=str)
    c.add_argument("--block-n", type=int, default=None)
    c.add_argument("--trials", type=int, default=None)
    c.add_argument("--target-block-errors", type=int, default=None)
    c.add_argument("--max-iter", type=int, default=None)
    _add_common(c)
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("graph-dump", help="serialize a sampled graph")
    _add_code_flags(g)
    _add_common(g)
    g.set_defaults(func=cmd_graph_dump)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except SystemExit as e:
        return e.code if e.code is not None else EXIT_USAGE
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
