"""Descriptive statistics of parameters and intermediate tensors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrityError

__all__ = ["TensorStats", "tensor_stats", "format_stats", "lp_first_pass", "nc_first_pass"]


@dataclass(frozen=True)
class TensorStats:
    name: str
    shape: tuple
    min: float
    max: float
    mean: float
    std: float


def _one(name, a):
    a = np.asarray(getattr(a, "value", a), dtype=np.float64)
    if not np.isfinite(a).all():
        raise IntegrityError(f"tensor {name!r} contains NaN or Inf")
    if a.size == 0:
        raise IntegrityError(f"tensor {name!r} is empty")
    return TensorStats(name, tuple(a.shape), float(a.min()), float(a.max()), float(a.mean()), float(a.std()))


def tensor_stats(tensors) -> list:
    """Min/max/mean/population-std for each named tensor, in input order.

    ``tensors`` is a mapping (e.g. a ParamStore or a snapshot dict) or an
    iterable of ``(name, array)`` pairs.
    """
    items = tensors.items() if hasattr(tensors, "items") else tensors
    return [_one(name, a) for name, a in items]


def format_stats(stats) -> str:
    head = f"{'tensor':<36} {'shape':<22} {'min':>11} {'max':>11} {'mean':>11} {'std':>11}"
    rows = [head, "-" * len(head)]
    for s in stats:
        shape = "x".join(str(d) for d in s.shape)
        rows.append(f"{s.name:<36} {shape:<22} {s.min:>11.5f} {s.max:>11.5f} {s.mean:>11.5f} {s.std:>11.5f}")
    return "\n".join(rows) + "\n"


def lp_first_pass(model, train, rngs) -> dict:
    """Intermediate tensors of one training forward pass of a link predictor.

    Checkpoints: initial embeddings, embedding output, first-layer weights,
    first-layer output, initial relation table and the DistMult scores of
    the first batch.
    """
    from .graph import negative_sample
    from .linkpred import _epoch_edges

    cfg = model.cfg
    edges = _epoch_edges(model, train, cfg, rngs["sampling"])
    adj = model.adjacency(edges, cfg.dropout, rngs["dropout"])
    sample = negative_sample(edges, cfg.neg_rate, model.num_entities, rngs["corruption"])
    trace = {}
    encoded = model.encode(adj, trace=trace)
    out = {"node_embeddings.init": model.embeddings.value, "node_embeddings.output": trace["node_input"]}
    p = model.params
    for name in ("layer1.blocks", "layer1.self_loop", "layer1.bases", "layer1.coeffs", "layer1.weight"):
        if name in p:
            out[f"{name}.init"] = p[name].value
    if "layer1" in trace:
        out["layer1.output"] = trace["layer1"]
    out["distmult.relations.init"] = model.relations.value
    out["distmult.output"] = model.scores(encoded, sample.triples).value
    return out


def nc_first_pass(model) -> dict:
    out = {name: var.value for name, var in model.params.items()}
    out["layer1.output"] = model.hidden().value
    out["layer2.probabilities"] = model.probabilities()
    return out
