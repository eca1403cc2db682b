"""Command-line front end.

Every run writes a manifest (config hash, master seed, package version) into
the output directory; statistical subcommands append rows to report.csv.
Replica generators derive from the master seed and the subcommand name, so
any run replays byte-identically from its manifest and config.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .arrangement import count_marked
from .config import ConfigError, RunConfig, load_config
from .crop import (SubsetCapError, build_crop_graph, crop_graph_sum,
                   crop_subset_sum, em_signed_count, enriched_branches)
from .estimators import (estimate_crop_expectation, estimate_phi,
                         estimate_phi_exact, verify_duality, verify_partition)
from .fields import sample_field
from .io_formats import read_field, read_web, write_field, write_web
from .seeding import derive_rng
from .svg import field_svg, web_svg
from .webs import sample_web, zero_activity_web

REPORT_HEADER = ["subcommand", "k", "lambda", "estimate", "se", "n",
                 "eps_x", "eps_phi", "pass", "seed", "config_hash"]


def _write_manifest(cfg: RunConfig, subcommand: str):
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "manifest.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"polyweb {__version__}\n")
        fh.write(f"subcommand {subcommand}\n")
        fh.write(f"config_hash {cfg.config_hash}\n")
        fh.write(f"seed {cfg.seed}\n")


def _report_row(cfg: RunConfig, subcommand: str, estimate, se, n, passed):
    path = os.path.join(cfg.out, "report.csv")
    new = not os.path.exists(path)
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(REPORT_HEADER)
        w.writerow([subcommand, len(cfg.markers), repr(cfg.lam),
                    repr(float(estimate)), repr(float(se)), n,
                    repr(cfg.eps_x), repr(cfg.eps_phi),
                    int(bool(passed)), cfg.seed, cfg.config_hash])


def _cmd_sample_field(cfg: RunConfig) -> int:
    fam = cfg.family()
    for i in range(cfg.replicas):
        rng = derive_rng(cfg.seed, "sample-field", i)
        sample = sample_field(cfg.activity, fam, rng, seed=cfg.seed)
        path = os.path.join(cfg.out, f"sample_{i:05d}.field.txt")
        with open(path, "w", encoding="utf-8") as fh:
            write_field(sample, fh)
        print(f"wrote {path} ({sample.edge_count()} edges)")
    return 0


def _cmd_sample_web(cfg: RunConfig) -> int:
    fam = cfg.family()
    mc = cfg.marker_config()
    for i in range(cfg.replicas):
        rng = derive_rng(cfg.seed, "sample-web", i)
        web = sample_web(cfg.activity, fam, mc, cfg.stop_rule, rng=rng, seed=cfg.seed)
        path = os.path.join(cfg.out, f"sample_{i:05d}.web.txt")
        with open(path, "w", encoding="utf-8") as fh:
            write_web(web, fh)
        print(f"wrote {path} (m={web.m})")
    return 0


def _cmd_crop(cfg: RunConfig) -> int:
    if not cfg.input:
        print("error: crop needs 'input = <path>.web.txt' in the config",
              file=sys.stderr)
        return 2
    with open(cfg.input, "r", encoding="utf-8") as fh:
        web = read_web(fh)
    graph = crop_graph_sum(web)
    marker = em_signed_count(web)
    try:
        subset = crop_subset_sum(web)
        subset_txt = str(subset)
        agree = subset == graph == marker
    except SubsetCapError as exc:
        subset_txt = f"refused ({exc})"
        agree = graph == marker
    print(f"crop_subset_sum        = {subset_txt}")
    print(f"crop_graph_sum         = {graph}")
    print(f"signed_marker_terminal = {marker}")
    _report_row(cfg, "crop", graph, 0.0, web.m, agree)
    return 0 if agree else 1


def _cmd_count_marked(cfg: RunConfig) -> int:
    mc = cfg.marker_config()
    n = count_marked([m[0] for m in mc.markers], [m[1] for m in mc.markers],
                     cfg.domain)
    print(f"count_marked = {n}")
    _report_row(cfg, "count-marked", n, 0.0, 1, True)
    return 0


def _cmd_estimate_phi(cfg: RunConfig) -> int:
    mc = cfg.marker_config()
    rng = derive_rng(cfg.seed, "estimate-phi")
    if cfg.method == "exact":
        rep = estimate_phi_exact(mc, cfg.activity, cfg.n_field, rng,
                                 pad=cfg.pad, seed=cfg.seed)
    else:
        rep = estimate_phi(mc, cfg.activity, cfg.family(), cfg.eps_x, cfg.eps_phi,
                           cfg.n_field, rng, probes=cfg.probes, seed=cfg.seed)
    print(f"phi = {rep.estimate:.6f} +- {rep.se:.6f} (n={rep.n})")
    _report_row(cfg, "estimate-phi", rep.estimate, rep.se, rep.n, True)
    return 0


def _cmd_estimate_crop(cfg: RunConfig) -> int:
    mc = cfg.marker_config()
    rng = derive_rng(cfg.seed, "estimate-crop")
    rep = estimate_crop_expectation(mc, cfg.activity, cfg.family(),
                                    cfg.stop_rule, cfg.n_web, rng, seed=cfg.seed)
    print(f"E[crop] = {rep.estimate:.6f} +- {rep.se:.6f} (n={rep.n})")
    _report_row(cfg, "estimate-crop", rep.estimate, rep.se, rep.n, True)
    return 0


def _cmd_verify_duality(cfg: RunConfig) -> int:
    mc = cfg.marker_config()
    rep = verify_duality(mc, cfg.activity, cfg.family(), cfg.eps_x, cfg.eps_phi,
                         cfg.n_field, cfg.n_web,
                         derive_rng(cfg.seed, "verify-duality-field"),
                         derive_rng(cfg.seed, "verify-duality-web"),
                         stop_rule=cfg.stop_rule, probes=cfg.probes,
                         method=cfg.method, seed=cfg.seed)
    print(f"phi  = {rep.phi.estimate:.6f} +- {rep.phi.se:.6f}")
    print(f"crop = {rep.crop.estimate:.6f} +- {rep.crop.se:.6f}")
    print(f"difference = {rep.difference:+.6f}, combined se = {rep.combined_se:.6f},"
          f" pass(3se) = {rep.passed}")
    _report_row(cfg, "verify-duality", rep.difference, rep.combined_se,
                cfg.n_field, rep.passed)
    return 0 if rep.passed else 1


def _cmd_verify_partition(cfg: RunConfig) -> int:
    rng = derive_rng(cfg.seed, "verify-partition")
    rep = verify_partition(cfg.activity, cfg.domain, cfg.replicas, rng,
                           line_cap=cfg.line_cap)
    print(f"MC mean = {rep.mc_mean:.6f} +- {rep.se:.6f}, target = {rep.target:.6f}")
    print(f"overflow fraction = {rep.overflow_fraction:.4%}"
          f"{' (UNRELIABLE)' if not rep.reliable else ''}, pass = {rep.passed}")
    _report_row(cfg, "verify-partition", rep.mc_mean, rep.se, rep.n_used, rep.passed)
    return 0 if rep.passed else 1


def _cmd_render(cfg: RunConfig) -> int:
    if not cfg.input:
        print("error: render needs 'input = <path>' in the config", file=sys.stderr)
        return 2
    with open(cfg.input, "r", encoding="utf-8") as fh:
        first = fh.readline()
        fh.seek(0)
        if first.startswith("polyweb-field"):
            svg = field_svg(read_field(fh))
        elif first.startswith("polyweb-web"):
            web = read_web(fh)
            crop = None
            if web.m:
                branches = enriched_branches(web)
                roots = {}
                for br in branches:
                    roots.setdefault(br.root, br.bid)
                crop = build_crop_graph(web, sorted(roots.values()), branches)
            svg = web_svg(web, crop)
        else:
            print("error: unrecognised input format", file=sys.stderr)
            return 2
    out = os.path.join(cfg.out, os.path.basename(cfg.input) + ".svg")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {out}")
    return 0


_COMMANDS = {
    "sample-field": _cmd_sample_field,
    "sample-web": _cmd_sample_web,
    "crop": _cmd_crop,
    "count-marked": _cmd_count_marked,
    "estimate-phi": _cmd_estimate_phi,
    "estimate-crop": _cmd_estimate_crop,
    "verify-duality": _cmd_verify_duality,
    "verify-partition": _cmd_verify_partition,
    "render": _cmd_render,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyweb",
        description="Polygonal Markov fields, their dual webs, and the "
                    "crop-functional duality checks.")
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="run configuration file")
    parser.add_argument("--seed", type=int, help="override master seed")
    parser.add_argument("--replicas", type=int, help="override replica count")
    parser.add_argument("--out", help="override output directory")
    parser.add_argument("--stop-rule", choices=["tangency", "immediate"])
    parser.add_argument("--eps-x", type=float)
    parser.add_argument("--eps-phi", type=float)
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.replicas is not None:
        cfg.replicas = args.replicas
    if args.out is not None:
        cfg.out = args.out
    if args.stop_rule is not None:
        cfg.stop_rule = args.stop_rule
    if args.eps_x is not None:
        cfg.eps_x = args.eps_x
    if args.eps_phi is not None:
        cfg.eps_phi = args.eps_phi

    os.makedirs(cfg.out, exist_ok=True)
    _write_manifest(cfg, args.subcommand)
    try:
        return _COMMANDS[args.subcommand](cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
