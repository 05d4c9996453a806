"""Two-layer node classifiers: one-hot RGCN and embedding e-RGCN."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import ConfigError
from .evaluation import accuracy
from .graph import KnowledgeGraph, LabeledNodeSet, augment, build_adjacency
from .layers import BasisWeights, DiagonalWeights, FullWeights, LayerConfig, rgcn_layer
from .training import Adam, ParamStore, glorot_init, kaiming_init, split_seeds

__all__ = ["NodeClassifierConfig", "NodeClassifier", "nc_train", "nc_predict", "nc_evaluate", "nc_param_count"]


@dataclass(frozen=True)
class NodeClassifierConfig:
    """Hyperparameters of the node classifier.

    ``num_bases = 0`` keeps one full weight matrix per relation in the first
    layer. ``weight_decay`` is an L2 penalty on the first-layer weights.
    """

    variant: str = "rgcn"
    hidden: int = 16
    num_bases: int = 0
    embed_dim: int = 128
    epochs: int = 50
    lr: float = 0.01
    weight_decay: float = 0.0
    bias: bool = True
    gain: float = math.sqrt(2.0)
    embed_gain: float = 1.0
    aggregate: str = "sum"

    def __post_init__(self):
        if self.variant not in ("rgcn", "ergcn"):
            raise ConfigError(f"unknown node classifier variant {self.variant!r}")
        for name in ("hidden", "embed_dim", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.num_bases < 0 or self.lr <= 0 or self.weight_decay < 0:
            raise ConfigError("num_bases, lr and weight_decay must be non-negative (lr positive)")


def nc_param_count(cfg: NodeClassifierConfig, num_entities, num_relations, num_classes):
    """Exact parameter count of the classifier without building it.

    ``num_relations`` is the base relation count; the layers see ``2R + 1``.
    """
    rp = 2 * num_relations + 1
    n, h, k = num_entities, cfg.hidden, num_classes
    bias = cfg.bias
    if cfg.variant == "ergcn":
        d = cfg.embed_dim
        first = n * d + rp * d + (d if bias else 0)
        return first + rp * d * k + (k if bias else 0)
    if cfg.num_bases:
        first = cfg.num_bases * n * h + rp * cfg.num_bases
    else:
        first = rp * n * h
    return first + (h if bias else 0) + rp * h * k + (k if bias else 0)


class NodeClassifier:
    """Full-batch relational classifier over a fixed graph.

    The RGCN variant feeds one-hot node inputs to a featureless first layer
    (horizontal stacking); the e-RGCN variant feeds learned embeddings
    through diagonal relation weights. Both finish with a full-weight RGCN
    layer producing class logits.
    """

    def __init__(self, graph: KnowledgeGraph, num_classes: int, cfg: NodeClassifierConfig, rng):
        self.cfg = cfg
        self.num_classes = num_classes
        self.num_entities = n = graph.num_entities
        ag = augment(graph)
        self.relations = rp = ag.total_relations
        self.a_v = build_adjacency(ag, "vertical")
        self.a_h = build_adjacency(ag, "horizontal") if cfg.variant == "rgcn" else None
        self.params = p = ParamStore()
        h, k = cfg.hidden, num_classes
        if cfg.variant == "rgcn":
            self.cfg1 = LayerConfig(n, h, rp, "relu", cfg.bias, featureless=True, stacking="horizontal", aggregate=cfg.aggregate)
            if cfg.num_bases:
                b = cfg.num_bases
                self.w1 = BasisWeights(
                    p.add("layer1.bases", glorot_init((b, n, h), cfg.gain, rng)),
                    p.add("layer1.coeffs", glorot_init((rp, b), cfg.gain, rng)),
                )
                self._decay = [self.w1.bases]
            else:
                self.w1 = FullWeights(p.add("layer1.weight", glorot_init((rp, n, h), cfg.gain, rng)))
                self._decay = [self.w1.weight]
        else:
            d = cfg.embed_dim
            h = d
            self.embeddings = p.add("embeddings", kaiming_init((n, d), fan_in=d, gain=cfg.embed_gain, rng=rng))
            self.cfg1 = LayerConfig(d, d, rp, "relu", cfg.bias, stacking="vertical", compact=True, aggregate=cfg.aggregate)
            self.w1 = DiagonalWeights(p.add("layer1.diag", glorot_init((rp, d), cfg.gain, rng)))
            self._decay = [self.w1.weight]
        self.b1 = p.add("layer1.bias", np.zeros(h)) if cfg.bias else None
        self.cfg2 = LayerConfig(h, k, rp, "softmax", cfg.bias, stacking="vertical", compact=True, aggregate=cfg.aggregate)
        self.w2 = FullWeights(p.add("layer2.weight", glorot_init((rp, h, k), cfg.gain, rng)))
        self.b2 = p.add("layer2.bias", np.zeros(k)) if cfg.bias else None
        self.history = []

    def hidden(self):
        if self.cfg.variant == "rgcn":
            return rgcn_layer(self.cfg1, self.a_h, None, self.w1, self.b1)
        return rgcn_layer(self.cfg1, self.a_v, self.embeddings, self.w1, self.b1)

    def logits(self):
        return rgcn_layer(self.cfg2, self.a_v, self.hidden(), self.w2, self.b2)

    def loss(self, labels: LabeledNodeSet):
        """Summed cross entropy on ``labels`` plus the first-layer L2 penalty."""
        loss, probs = ad.softmax_cross_entropy(self.logits(), labels.entities, labels.classes)
        if self.cfg.weight_decay:
            for w in self._decay:
                loss = ad.add(loss, ad.scale(ad.sum_squares(w), self.cfg.weight_decay))
        return loss, probs

    def probabilities(self):
        z = self.logits().value
        z = z - z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def param_count(self):
        return self.params.param_count()


def nc_train(graph: KnowledgeGraph, train: LabeledNodeSet, cfg: NodeClassifierConfig, seed=0, callback=None):
    """Train a classifier full-batch with Adam; returns the model.

    ``model.history`` records the loss before every update.
    """
    rngs = split_seeds(seed)
    model = NodeClassifier(graph, train.num_classes, cfg, rngs["init"])
    opt = Adam(model.params, lr=cfg.lr)
    for epoch in range(cfg.epochs):
        loss, _ = model.loss(train)
        grads = ad.backward(loss, model.params)
        model.history.append(float(loss.value))
        opt.step(grads)
        if callback is not None:
            callback(epoch, model)
    return model


def nc_predict(model: NodeClassifier):
    """``(predicted class per node, probability matrix)``; ties go to the lowest class id."""
    probs = model.probabilities()
    return np.argmax(probs, axis=1), probs


def nc_evaluate(model: NodeClassifier, labels: LabeledNodeSet) -> float:
    pred, _ = nc_predict(model)
    return accuracy(pred[labels.entities], labels.classes)
