"""Link prediction: RGCN or c-RGCN encoder with a DistMult decoder."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .errors import ConfigError
from .evaluation import TruthIndex, lp_rank_filtered, mrr_hits
from .graph import (
    EdgeDropout,
    KnowledgeGraph,
    augment,
    build_adjacency,
    negative_sample,
    sample_edges_neighborhood,
    sample_edges_uniform,
)
from .layers import Affine, BasisWeights, BlockWeights, FullWeights, LayerConfig, crgcn_encode, message_pass
from .training import Adam, ParamStore, schlichtkrull_init, split_seeds, standard_normal_init

__all__ = ["LinkPredictorConfig", "LinkPredictor", "lp_train", "lp_evaluate"]


@dataclass(frozen=True)
class LinkPredictorConfig:
    """Hyperparameters of the link predictor.

    ``encoder`` is ``"rgcn"``, ``"crgcn"`` or ``"none"`` (plain DistMult).
    ``sample_size = 0`` trains on the full training graph every epoch.
    """

    encoder: str = "rgcn"
    layers: int = 2
    decomposition: str = "block"
    num_bases: int = 100
    embed_dim: int = 500
    compressed_dim: int = 16
    embed_affine: bool = True
    bias: bool = True
    epochs: int = 7000
    lr: float = 0.01
    l2: float = 0.01
    dropout_self: float = 0.2
    dropout_data: float = 0.5
    neg_rate: int = 10
    sample_size: int = 30000
    sampling: str = "neighborhood"
    init_gain: float = 1.0
    eval_every: int = 500

    def __post_init__(self):
        if self.encoder not in ("rgcn", "crgcn", "none"):
            raise ConfigError(f"unknown encoder {self.encoder!r}")
        if self.decomposition not in ("none", "full", "basis", "block"):
            raise ConfigError(f"unknown decomposition {self.decomposition!r}")
        if self.sampling not in ("neighborhood", "uniform"):
            raise ConfigError(f"unknown edge sampling {self.sampling!r}")
        if self.encoder == "rgcn" and self.layers < 1:
            raise ConfigError("an RGCN encoder needs at least one layer")
        if self.encoder == "crgcn" and not 0 < self.compressed_dim < self.embed_dim:
            raise ConfigError("compressed_dim must lie strictly between 0 and embed_dim")
        if self.encoder == "rgcn" and self.decomposition in ("basis", "block") and self.num_bases < 1:
            raise ConfigError(f"{self.decomposition} decomposition needs num_bases >= 1")
        if self.encoder == "rgcn" and self.decomposition == "block" and self.embed_dim % self.num_bases:
            raise ConfigError(f"embed_dim {self.embed_dim} is not divisible into {self.num_bases} blocks")
        if self.neg_rate < 1 or self.epochs < 0 or self.sample_size < 0:
            raise ConfigError("neg_rate must be >= 1; epochs and sample_size non-negative")
        EdgeDropout(self.dropout_self, self.dropout_data)

    @property
    def dropout(self):
        if self.dropout_self == 0 and self.dropout_data == 0:
            return None
        return EdgeDropout(self.dropout_self, self.dropout_data)


class LinkPredictor:
    def __init__(self, num_entities, num_relations, cfg: LinkPredictorConfig, rng):
        self.cfg = cfg
        self.num_entities = n = num_entities
        self.num_relations = num_relations
        self.total_relations = rp = 2 * num_relations + 1
        d = cfg.embed_dim
        gain = cfg.init_gain
        self.params = p = ParamStore()
        self.embeddings = p.add("embeddings", schlichtkrull_init((n, d), n, d, gain, rng=rng))
        self.layers = []
        if cfg.encoder == "rgcn":
            if cfg.embed_affine:
                self.embed_bias = p.add("embeddings.bias", np.zeros(d))
            for i in range(cfg.layers):
                pre = f"layer{i + 1}"
                w = self._relational(pre, d, d, rp, rng)
                b = p.add(f"{pre}.bias", np.zeros(d)) if cfg.bias else None
                lc = LayerConfig(d, d, rp, "identity", cfg.bias, stacking="vertical", compact=True)
                self.layers.append((lc, w, b))
        elif cfg.encoder == "crgcn":
            c = cfg.compressed_dim
            self.f = Affine(p.add("compress.weight", schlichtkrull_init((d, c), d, c, gain, rng=rng)), p.add("compress.bias", np.zeros(c)))
            self.mp1 = FullWeights(p.add("layer1.weight", schlichtkrull_init((rp, c, c), c, c, gain, rng=rng)))
            self.mp2 = FullWeights(p.add("layer2.weight", schlichtkrull_init((rp, c, c), c, c, gain, rng=rng)))
            self.g = Affine(p.add("expand.weight", schlichtkrull_init((c, d), c, d, gain, rng=rng)), p.add("expand.bias", np.zeros(d)))
        self.relations = p.add("distmult.relations", standard_normal_init((num_relations, d), rng))

    def _relational(self, pre, nin, nout, rp, rng):
        cfg, p, gain = self.cfg, self.params, self.cfg.init_gain
        # fans follow the full (N_in, N_out) relation matrix for every parameterisation
        if cfg.decomposition == "block":
            bi, bo = BlockWeights.block_shape(nin, nout, cfg.num_bases)
            blocks = schlichtkrull_init((rp - 1, cfg.num_bases, bi, bo), nin, nout, gain, rng=rng)
            selfw = schlichtkrull_init((nin, nout), nin, nout, gain, rng=rng)
            return BlockWeights(p.add(f"{pre}.blocks", blocks), p.add(f"{pre}.self_loop", selfw))
        if cfg.decomposition == "basis":
            b = cfg.num_bases
            bases = schlichtkrull_init((b, nin, nout), nin, nout, gain, rng=rng)
            coeffs = schlichtkrull_init((rp, b), rp, b, gain, rng=rng)
            return BasisWeights(p.add(f"{pre}.bases", bases), p.add(f"{pre}.coeffs", coeffs))
        return FullWeights(p.add(f"{pre}.weight", schlichtkrull_init((rp, nin, nout), nin, nout, gain, rng=rng)))

    def node_input(self):
        if self.cfg.encoder == "rgcn" and self.cfg.embed_affine:
            return ad.relu(ad.add(self.embeddings, self.embed_bias))
        return self.embeddings

    def encode(self, adjacency, trace=None):
        """Entity representations as a tape node.

        ``adjacency`` is the vertically stacked matrix of the message-passing
        graph. ``trace``, if a dict, collects intermediate values.
        """
        x = self.node_input()
        if trace is not None:
            trace["node_input"] = x.value
        if self.cfg.encoder == "none":
            return x
        if self.cfg.encoder == "crgcn":
            return crgcn_encode(adjacency, x, self.f, self.mp1, self.mp2, self.g)
        last = len(self.layers) - 1
        for i, (lc, w, b) in enumerate(self.layers):
            x = message_pass(lc, adjacency, x, w)
            if b is not None:
                x = ad.add(x, b)
            if trace is not None:
                trace[f"layer{i + 1}"] = x.value
            if i < last:
                x = ad.relu(x)
        return x

    def scores(self, encoded, triples):
        return ad.distmult(encoded, self.relations, triples)

    def loss(self, encoded, sample):
        loss = ad.sigmoid_bce(self.scores(encoded, sample.triples), sample.labels)
        if self.cfg.l2:
            loss = ad.add(loss, ad.scale(ad.sum_squares(self.relations), self.cfg.l2))
        return loss

    def adjacency(self, triples, dropout=None, rng=None):
        g = KnowledgeGraph(self.num_entities, self.num_relations, triples)
        return build_adjacency(augment(g), "vertical", dropout, rng)

    def param_count(self):
        return self.params.param_count()


def _epoch_edges(model, train, cfg, rng):
    if cfg.encoder == "crgcn" or cfg.sample_size == 0 or cfg.sample_size >= len(train):
        return train
    g = KnowledgeGraph(model.num_entities, model.num_relations, train)
    if cfg.sampling == "uniform":
        return sample_edges_uniform(g, cfg.sample_size, rng)
    return sample_edges_neighborhood(g, cfg.sample_size, rng)


def lp_train(num_entities, num_relations, train, cfg: LinkPredictorConfig, seed=0, callback=None):
    """Train a link predictor on the ``train`` triples.

    Every epoch: sample edges, drop edges, build the adjacency of what is
    left, encode, corrupt the sampled edges, then one Adam step on summed
    BCE plus the L2 penalty on the relation table. ``callback(epoch, model)``
    runs after each step. ``model.history`` holds per-epoch losses.
    """
    rngs = split_seeds(seed)
    train = np.asarray(train, dtype=np.int64)
    model = LinkPredictor(num_entities, num_relations, cfg, rngs["init"])
    model.history = []
    opt = Adam(model.params, lr=cfg.lr)
    for epoch in range(cfg.epochs):
        edges = _epoch_edges(model, train, cfg, rngs["sampling"])
        adj = model.adjacency(edges, cfg.dropout, rngs["dropout"])
        sample = negative_sample(edges, cfg.neg_rate, num_entities, rngs["corruption"])
        encoded = model.encode(adj)
        loss = model.loss(encoded, sample)
        grads = ad.backward(loss, model.params)
        model.history.append(float(loss.value))
        opt.step(grads)
        if callback is not None:
            callback(epoch, model)
    return model


def lp_embeddings(model: LinkPredictor, train):
    """Entity and relation matrices used for ranking (full training graph, no dropout)."""
    h = model.encode(model.adjacency(train)).value
    return h, model.relations.value


def lp_evaluate(model: LinkPredictor, train, eval_triples, truth: TruthIndex, method="exact"):
    h, rel = lp_embeddings(model, train)
    ranks = lp_rank_filtered(h, rel, eval_triples, truth, filtered=True, method=method)
    return mrr_hits(ranks), ranks
