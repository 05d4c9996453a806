"""Config-driven experiment runs: load data, train, evaluate, report."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .data import load_labels, load_ntriples, load_tsv_split
from .errors import ConfigError
from .evaluation import EvalReport, TruthIndex
from .graph import KnowledgeGraph, LabeledNodeSet, prune_khop
from .linkpred import LinkPredictor, lp_evaluate, lp_train
from .nodeclass import NodeClassifier, nc_evaluate, nc_train
from .training import split_seeds

__all__ = [
    "NCDataset",
    "LPDataset",
    "load_dataset",
    "load_nc_dataset",
    "load_lp_dataset",
    "build_model",
    "run",
    "run_seeds",
    "evaluate_model",
    "evaluate_checkpoint",
]

log = logging.getLogger(__name__)


@dataclass
class NCDataset:
    graph: KnowledgeGraph
    train: LabeledNodeSet
    test: LabeledNodeSet
    entities: list
    relations: list
    classes: list


@dataclass
class LPDataset:
    num_entities: int
    num_relations: int
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    entities: list
    relations: list

    @property
    def truth(self):
        return TruthIndex(self.train, self.valid, self.test)


def _remap_labels(labels: LabeledNodeSet, kept_entities, num_classes):
    new_id = {int(old): new for new, old in enumerate(kept_entities)}
    ents = np.array([new_id[int(e)] for e in labels.entities], dtype=np.int64)
    return LabeledNodeSet(ents, labels.classes.copy(), num_classes)


def load_nc_dataset(cfg: RunConfig, prune=True) -> NCDataset:
    """Graph plus train/test label sets for node classification.

    Relations in ``exclude_relations`` are dropped while reading (they leak
    the labels). With ``prune_hops > 0`` and ``prune=True`` the graph is cut
    down to the neighbourhood of the labelled nodes.
    """
    if cfg.format != "ntriples":
        raise ConfigError("node classification reads an N-Triples graph")
    loaded = load_ntriples(cfg.resolve(cfg.path), exclude_relations=cfg.exclude_relations)
    index = {term: i for i, term in enumerate(loaded.entities)}
    train, classes = load_labels(cfg.resolve(cfg.train_labels), index, cfg.entity_column, cfg.label_column)
    test, _ = load_labels(cfg.resolve(cfg.test_labels), index, cfg.entity_column, cfg.label_column, classes=classes)
    graph, entities, relations = loaded.graph, loaded.entities, loaded.relations
    if prune and cfg.prune_hops:
        targets = LabeledNodeSet(
            np.concatenate([train.entities, test.entities]),
            np.concatenate([train.classes, test.classes]),
            len(classes),
        )
        graph, kept, rels = prune_khop(graph, targets, cfg.prune_hops, return_index=True)
        train = _remap_labels(train, kept, len(classes))
        test = _remap_labels(test, kept, len(classes))
        entities = [entities[i] for i in kept]
        relations = [relations[i] for i in rels]
    return NCDataset(graph, train, test, entities, relations, classes)


def load_lp_dataset(cfg: RunConfig) -> LPDataset:
    if cfg.format != "tsv":
        raise ConfigError("link prediction reads a directory of TSV splits")
    s = load_tsv_split(cfg.resolve(cfg.path))
    return LPDataset(s.num_entities, s.num_relations, s.train, s.valid, s.test, s.entities, s.relations)


def load_dataset(cfg: RunConfig):
    return load_nc_dataset(cfg) if cfg.task == "nc" else load_lp_dataset(cfg)


def build_model(cfg: RunConfig, data, seed: int):
    """An untrained model with the parameter layout of a run with ``seed``."""
    rng = split_seeds(seed)["init"]
    if cfg.task == "nc":
        return NodeClassifier(data.graph, len(data.classes), cfg.model_config(), rng)
    return LinkPredictor(data.num_entities, data.num_relations, cfg.model_config(), rng)


def evaluate_model(cfg: RunConfig, data, model, seed: int) -> EvalReport:
    if cfg.task == "nc":
        metrics = {"accuracy": nc_evaluate(model, data.test), "train_accuracy": nc_evaluate(model, data.train)}
        return EvalReport("nc", metrics, model.param_count(), seed)
    split = data.test if cfg.eval_split == "test" else data.valid
    metrics, _ = lp_evaluate(model, data.train, split, data.truth, method=cfg.rank_method)
    return EvalReport("lp", metrics, model.param_count(), seed)


def run(cfg: RunConfig, seed=None, data=None):
    """Train and evaluate one seed; returns ``(model, report)``.

    ``report.seconds`` holds the training wall-clock time (not serialised).
    """
    seed = cfg.seed if seed is None else int(seed)
    data = load_dataset(cfg) if data is None else data
    mcfg = cfg.model_config()
    start = time.perf_counter()
    if cfg.task == "nc":
        model = nc_train(data.graph, data.train, mcfg, seed=seed)
    else:
        split = data.test if cfg.eval_split == "test" else data.valid
        truth = data.truth
        curve = {}

        def checkpoint(epoch, m):
            done = epoch + 1
            if cfg.eval_every and done % cfg.eval_every == 0 and done < mcfg.epochs:
                metrics, _ = lp_evaluate(m, data.train, split, truth, method=cfg.rank_method)
                curve[done] = metrics["mrr"]
                log.info("epoch %d: loss %.4f, filtered MRR %.4f", done, m.history[-1], metrics["mrr"])

        model = lp_train(data.num_entities, data.num_relations, data.train, mcfg, seed=seed, callback=checkpoint)
    seconds = time.perf_counter() - start
    report = evaluate_model(cfg, data, model, seed)
    report.extra["final_loss"] = model.history[-1] if model.history else float("nan")
    if cfg.task == "lp":
        for epoch, mrr in curve.items():
            report.extra[f"mrr_at_epoch_{epoch:06d}"] = mrr
    report.seconds = seconds
    return model, report


def run_seeds(cfg: RunConfig, seeds, data=None):
    """Run every seed in ``seeds``; returns ``(models, reports, summary)``.

    ``summary`` is an :class:`EvalReport` holding the mean and population
    standard deviation of every metric across seeds.
    """
    data = load_dataset(cfg) if data is None else data
    models, reports = [], []
    for s in seeds:
        m, r = run(cfg, s, data)
        log.info("seed %d: %s", s, {k: round(v, 4) for k, v in r.metrics.items()})
        models.append(m)
        reports.append(r)
    metrics = {}
    for k in reports[0].metrics:
        vals = np.array([r.metrics[k] for r in reports])
        metrics[k] = float(vals.mean())
        metrics[f"{k}_std"] = float(vals.std())
    summary = EvalReport(cfg.task, metrics, reports[0].param_count, int(seeds[0]), {"num_seeds": len(reports)})
    summary.seconds = float(sum(r.seconds for r in reports))
    return models, reports, summary


def evaluate_checkpoint(cfg: RunConfig, tensors, seed, data=None) -> EvalReport:
    """Rebuild the model described by ``cfg``, load ``tensors`` and evaluate."""
    data = load_dataset(cfg) if data is None else data
    model = build_model(cfg, data, seed)
    model.params.load(tensors)
    return evaluate_model(cfg, data, model, seed)
