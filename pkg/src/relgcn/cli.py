"""Command line entry point: ``relgcn <subcommand> ...``.

Exit codes: 0 success, 2 configuration or usage error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .config import load_config
from .data import write_labels, write_ntriples
from .errors import ConfigError, DataError, DimensionError, IntegrityError, ParseError, UsageError
from .graph import KnowledgeGraph, sample_edges_neighborhood, sample_edges_uniform
from .pipeline import build_model, evaluate_checkpoint, load_dataset, load_nc_dataset, run_seeds
from .stats import format_stats, lp_first_pass, nc_first_pass, tensor_stats
from .training import atomic_write, load_checkpoint, save_checkpoint, split_seeds

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


def _write_text(path, text):
    atomic_write(path, text.encode("utf-8"))


def cmd_train(args):
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    count = args.seeds if args.seeds is not None else (1 if args.seed is not None else cfg.seeds)
    seeds = list(range(seed, seed + count))
    models, reports, summary = run_seeds(cfg, seeds)
    final = reports[0] if count == 1 else summary
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for s, m, r in zip(seeds, models, reports):
            stem = "" if count == 1 else f"-seed{s}"
            save_checkpoint(os.path.join(args.out, f"checkpoint{stem}.bin"), m.params, s)
            if count > 1:
                _write_text(os.path.join(args.out, f"report{stem}.txt"), r.to_text())
        _write_text(os.path.join(args.out, "report.txt"), final.to_text())
        _write_text(os.path.join(args.out, "report.json"), final.to_json())
        timing = {"seconds_per_seed": {str(s): r.seconds for s, r in zip(seeds, reports)}, "seconds_total": summary.seconds}
        _write_text(os.path.join(args.out, "timing.json"), json.dumps(timing, indent=2) + "\n")
    sys.stdout.write(final.to_text())
    return EXIT_OK


def cmd_evaluate(args):
    cfg = load_config(args.config)
    tensors, seed = load_checkpoint(args.checkpoint)
    report = evaluate_checkpoint(cfg, tensors, seed)
    text = report.to_json() if args.json else report.to_text()
    sys.stdout.write(text)
    return EXIT_OK


def cmd_stats(args):
    cfg = load_config(args.config)
    data = load_dataset(cfg)
    seed = cfg.seed if args.seed is None else args.seed
    model = build_model(cfg, data, seed)
    if args.checkpoint:
        tensors, seed = load_checkpoint(args.checkpoint)
        model.params.load(tensors)
    if cfg.task == "nc":
        snap = nc_first_pass(model)
    else:
        rngs = split_seeds(seed)
        rngs.pop("init")
        snap = lp_first_pass(model, data.train, rngs)
    stats = tensor_stats(snap)
    if args.json:
        rows = [{"name": s.name, "shape": list(s.shape), "min": s.min, "max": s.max, "mean": s.mean, "std": s.std} for s in stats]
        sys.stdout.write(json.dumps(rows, indent=2) + "\n")
    else:
        sys.stdout.write(format_stats(stats))
    return EXIT_OK


def cmd_prune(args):
    cfg = load_config(args.config)
    if cfg.task != "nc":
        raise ConfigError("prune works on node-classification datasets")
    full = load_nc_dataset(cfg, prune=False)
    pruned = load_nc_dataset(cfg.with_overrides(prune_hops=args.hops)) if args.hops else full
    os.makedirs(args.out, exist_ok=True)
    write_ntriples(os.path.join(args.out, "graph.nt"), pruned.graph, pruned.entities, pruned.relations)
    write_labels(os.path.join(args.out, "train.tsv"), pruned.train, pruned.entities, pruned.classes,
                 cfg.entity_column, cfg.label_column)
    write_labels(os.path.join(args.out, "test.tsv"), pruned.test, pruned.entities, pruned.classes,
                 cfg.entity_column, cfg.label_column)
    for name, d in (("full", full), (f"pruned ({args.hops} hops)", pruned)):
        g = d.graph
        print(f"{name}: {g.num_entities} entities, {g.num_relations} relations, {g.num_edges} edges")
    return EXIT_OK


def _toy_graph(rng, n=60, r=4, m=300):
    t = np.stack([rng.integers(0, n, m), rng.integers(0, r, m), rng.integers(0, n, m)], axis=1)
    return KnowledgeGraph(n, r, t)


def cmd_sample_demo(args):
    rng = np.random.default_rng(args.seed)
    if args.config:
        cfg = load_config(args.config)
        data = load_dataset(cfg)
        g = data.graph if cfg.task == "nc" else KnowledgeGraph(data.num_entities, data.num_relations, data.train)
    else:
        g = _toy_graph(rng)
    count = min(args.count, g.num_edges)
    print(f"graph: {g.num_entities} entities, {g.num_edges} edges; drawing {count} edges")
    for name, fn in (("uniform", sample_edges_uniform), ("neighborhood", sample_edges_neighborhood)):
        sample = fn(g, count, np.random.default_rng(args.seed))
        nodes = np.unique(sample[:, [0, 2]])
        deg = np.bincount(sample[:, [0, 2]].ravel(), minlength=g.num_entities)
        print(f"{name:>12}: {len(nodes)} distinct nodes touched, max node degree in sample {deg.max()}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="relgcn", description="Relational graph convolutional networks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train and evaluate a configured experiment")
    t.add_argument("--config", required=True)
    t.add_argument("--seed", type=int, help="run exactly this seed (overrides the config)")
    t.add_argument("--seeds", type=int, help="number of consecutive seeds to run")
    t.add_argument("--out", help="directory for checkpoint, report and timing files")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", help="recompute metrics from a checkpoint")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--config", required=True)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("stats", help="print statistics of parameters and intermediate tensors")
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--checkpoint", help="use trained parameters instead of a fresh initialisation")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)

    pr = sub.add_parser("prune", help="write the k-hop neighbourhood of the labelled nodes")
    pr.add_argument("--config", required=True)
    pr.add_argument("--hops", type=int, required=True)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_prune)

    d = sub.add_parser("sample-demo", help="compare uniform and neighbourhood edge sampling")
    d.add_argument("--config", help="dataset to sample from (default: a random toy graph)")
    d.add_argument("--count", type=int, default=100)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=cmd_sample_demo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "hops", 0) < 0:
        print("relgcn: error: --hops must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"relgcn: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ParseError, IntegrityError, DimensionError) as exc:
        print(f"relgcn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
