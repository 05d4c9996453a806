"""Relational weight parameterisations and the RGCN message-passing layer.

A layer computes ``H = act(sum_r A_r X W_r + b)`` over ``R+`` stacked,
row-normalised adjacency matrices. Three evaluation strategies give the same
result:

* featureless: inputs are one-hot, so ``A_h`` is multiplied by the reshaped
  weight tensor directly;
* horizontal: project ``X`` through every ``W_r`` first, then one spmm with
  ``A_h``;
* vertical: one spmm with ``A_v`` first, then contract with ``W``. The
  ``compact`` flag skips the all-zero rows of ``A_v`` and never builds the
  ``(R+, N, N_in)`` intermediate, which is what makes wide block-diagonal
  layers affordable.

Stacked matrices always place relation ``r`` in block ``r`` (rows
``r*N .. r*N+N`` of ``A_v``, columns of ``A_h``); every reshape below is
row-major with the relation as the outermost axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from . import autodiff as ad
from .autodiff import Var
from .errors import ConfigError, DimensionError
from .sparse import SparseMatrix

__all__ = [
    "FullWeights",
    "BasisWeights",
    "BlockWeights",
    "DiagonalWeights",
    "Affine",
    "LayerConfig",
    "materialize",
    "message_pass",
    "rgcn_layer",
    "rgcn_forward",
    "ergcn_forward",
    "crgcn_forward",
    "crgcn_encode",
]


def _shape(x):
    return np.shape(x.value if isinstance(x, Var) else x)


def _value(x):
    return x.value if isinstance(x, Var) else np.asarray(x, dtype=np.float64)


@dataclass
class FullWeights:
    """One dense ``(N_in, N_out)`` matrix per relation: ``weight`` is ``(R+, N_in, N_out)``."""

    weight: Any
    kind = "full"

    @property
    def num_relations(self):
        return _shape(self.weight)[0]

    @property
    def in_dim(self):
        return _shape(self.weight)[1]

    @property
    def out_dim(self):
        return _shape(self.weight)[2]

    def param_count(self):
        r, i, o = _shape(self.weight)
        return r * i * o

    def tensor(self):
        return self.weight


@dataclass
class BasisWeights:
    """``W_r = sum_b coeffs[r, b] * bases[b]``.

    ``bases`` is ``(B, N_in, N_out)`` and ``coeffs`` is ``(R+, B)``.
    """

    bases: Any
    coeffs: Any
    kind = "basis"

    def __post_init__(self):
        b, _, _ = _shape(self.bases)
        if _shape(self.coeffs)[1] != b:
            raise ConfigError(f"coefficient matrix {_shape(self.coeffs)} does not match {b} bases")

    @property
    def num_relations(self):
        return _shape(self.coeffs)[0]

    @property
    def in_dim(self):
        return _shape(self.bases)[1]

    @property
    def out_dim(self):
        return _shape(self.bases)[2]

    def param_count(self):
        b, i, o = _shape(self.bases)
        return b * i * o + self.num_relations * b

    def tensor(self):
        return ad.basis_combine(self.coeffs, self.bases)


@dataclass
class BlockWeights:
    """Block-diagonal ``W_r`` for every relation except the self-loop.

    ``blocks`` has shape ``(R+ - 1, B, N_in/B, N_out/B)``; the self-loop
    relation (the last one) keeps a dense ``self_weight`` of shape
    ``(N_in, N_out)``.
    """

    blocks: Any
    self_weight: Any
    kind = "block"

    def __post_init__(self):
        _, nb, bi, bo = _shape(self.blocks)
        if _shape(self.self_weight) != (nb * bi, nb * bo):
            raise ConfigError(
                f"self-loop weight {_shape(self.self_weight)} does not match {nb} blocks of {bi}x{bo}"
            )

    @staticmethod
    def block_shape(in_dim, out_dim, num_blocks):
        if num_blocks < 1 or in_dim % num_blocks or out_dim % num_blocks:
            raise ConfigError(f"dimensions {in_dim}x{out_dim} are not divisible by {num_blocks} blocks")
        return in_dim // num_blocks, out_dim // num_blocks

    @property
    def num_blocks(self):
        return _shape(self.blocks)[1]

    @property
    def num_relations(self):
        return _shape(self.blocks)[0] + 1

    @property
    def in_dim(self):
        return _shape(self.self_weight)[0]

    @property
    def out_dim(self):
        return _shape(self.self_weight)[1]

    def param_count(self):
        r, nb, bi, bo = _shape(self.blocks)
        return r * nb * bi * bo + self.in_dim * self.out_dim

    def tensor(self):
        return ad.block_assemble(self.blocks, self.self_weight)


@dataclass
class DiagonalWeights:
    """``W_r = diag(weight[r])``; ``weight`` is ``(R+, D)``."""

    weight: Any
    kind = "diagonal"

    @property
    def num_relations(self):
        return _shape(self.weight)[0]

    @property
    def in_dim(self):
        return _shape(self.weight)[1]

    out_dim = in_dim

    def param_count(self):
        r, d = _shape(self.weight)
        return r * d

    def tensor(self):
        return ad.diag_embed(self.weight)


@dataclass
class Affine:
    """``f(X) = X @ weight + bias``."""

    weight: Any
    bias: Any

    def __call__(self, x):
        return ad.add(ad.matmul(x, self.weight), self.bias)

    def param_count(self):
        return int(np.prod(_shape(self.weight))) + int(np.prod(_shape(self.bias)))


def materialize(rw) -> np.ndarray:
    """Explicit ``(R+, N_in, N_out)`` weight tensor of any parameterisation."""
    t = rw.tensor()
    return np.array(_value(t), dtype=np.float64)


ACTIVATIONS = ("relu", "softmax", "identity")


@dataclass(frozen=True)
class LayerConfig:
    in_dim: int
    out_dim: int
    relations: int
    activation: str = "relu"
    bias: bool = True
    featureless: bool = False
    stacking: str = "vertical"
    compact: bool = False
    aggregate: str = "sum"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.stacking not in ("vertical", "horizontal"):
            raise ConfigError(f"unknown stacking mode {self.stacking!r}")
        if self.aggregate not in ("sum", "mean"):
            raise ConfigError(f"unknown relation aggregate {self.aggregate!r}")
        if self.featureless and self.stacking != "horizontal":
            raise ConfigError("a featureless layer needs horizontally stacked adjacency")


def _relation_weights(rw):
    if rw.kind == "basis":
        return "full", (rw.tensor(),)
    if rw.kind == "block":
        return "block", (rw.blocks, rw.self_weight)
    if rw.kind == "diagonal":
        return "diagonal", (rw.weight,)
    return "full", (rw.weight,)


def message_pass(cfg: LayerConfig, a: SparseMatrix, x, rw):
    """``sum_r A_r X W_r`` (no bias, no activation) as a tape node."""
    rp = cfg.relations
    if rw.num_relations != rp:
        raise DimensionError(f"weights cover {rw.num_relations} relations, layer expects {rp}")
    if cfg.featureless:
        n = a.shape[0]
        if x is not None:
            raise DimensionError("featureless branch takes no input features")
        if a.shape[1] != rp * n or cfg.in_dim != n:
            raise DimensionError(
                f"featureless branch: A_h {a.shape} needs {rp}*{n} columns and in_dim == {n} (got {cfg.in_dim})"
            )
        w = rw.tensor()
        out = ad.spmm(a, ad.reshape(w, (rp * n, cfg.out_dim)))
    elif cfg.stacking == "horizontal":
        n = a.shape[0]
        if x is None or _shape(x) != (n, cfg.in_dim) or a.shape[1] != rp * n:
            raise DimensionError(f"horizontal branch: A_h {a.shape} and X {_shape(x) if x is not None else None} disagree")
        xw = ad.contract("ni,rio->rno", x, rw.tensor())
        out = ad.spmm(a, ad.reshape(xw, (rp * n, cfg.out_dim)))
    else:
        n = a.shape[1]
        if x is None or _shape(x) != (n, cfg.in_dim) or a.shape[0] != rp * n:
            raise DimensionError(f"vertical branch: A_v {a.shape} and X {_shape(x) if x is not None else None} disagree")
        if cfg.compact:
            rows = a.nonempty_rows()
            ax = ad.spmm(a.take_rows(rows), x)
            rel, node = np.divmod(rows, n)
            kind, weights = _relation_weights(rw)
            out = ad.scatter_rows(ad.relation_transform(ax, rel, kind, *weights), node, n)
        else:
            ax = ad.reshape(ad.spmm(a, x), (rp, n, cfg.in_dim))
            out = ad.contract("rio,rni->no", rw.tensor(), ax)
    if cfg.aggregate == "mean":
        out = ad.scale(out, 1.0 / rp)
    return out


def rgcn_layer(cfg: LayerConfig, a, x, rw, bias=None):
    """Full layer as a tape node. ``softmax`` layers return pre-softmax logits."""
    out = message_pass(cfg, a, x, rw)
    if cfg.bias:
        if bias is None:
            raise ConfigError("layer configured with a bias but none given")
        out = ad.add(out, bias)
    if cfg.activation == "relu":
        out = ad.relu(out)
    return out


def _softmax_rows(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def rgcn_forward(cfg: LayerConfig, a: SparseMatrix, x, rw, bias=None) -> np.ndarray:
    """Evaluate one RGCN layer and return a dense ``(N, N_out)`` array."""
    out = _value(rgcn_layer(cfg, a, x, rw, bias))
    if cfg.activation == "softmax":
        out = _softmax_rows(out)
    return out


def _act(h, activation):
    if activation == "relu":
        return ad.relu(h)
    if activation == "identity":
        return h
    raise ConfigError(f"unsupported activation {activation!r}")


def ergcn_forward(a: SparseMatrix, embeddings, weight, activation="relu", tape=False):
    """``act(sum_r A_r E diag(w_r))`` with ``A`` vertically stacked.

    Cost is ``O(nnz * D)``; no ``D x D`` matrix is ever formed.
    """
    n, d = _shape(embeddings)
    rp = _shape(weight)[0]
    if _shape(weight)[1] != d:
        raise DimensionError(f"diagonal weights {_shape(weight)} do not match embedding width {d}")
    cfg = LayerConfig(d, d, rp, activation="identity", bias=False, stacking="vertical", compact=True)
    h = _act(message_pass(cfg, a, embeddings, DiagonalWeights(weight)), activation)
    return h if tape else _value(h)


def crgcn_encode(a: SparseMatrix, embeddings, f: Affine, layer1, layer2, g: Affine, activation="relu"):
    """Bottleneck encoder with a residual connection, as a tape node.

    ``H1 = act(MP(A, f(E)))`` and ``H2 = E + g(act(MP(A, H1)))`` where the
    message passing runs in the compressed width of ``f``'s output.
    """
    n, d = _shape(embeddings)
    c = _shape(f.weight)[1]
    if _shape(f.weight)[0] != d or _shape(g.weight) != (c, d):
        raise DimensionError(f"affine maps {_shape(f.weight)} / {_shape(g.weight)} do not fit width {d}")
    if layer1.in_dim != c or layer1.out_dim != c or layer2.in_dim != c or layer2.out_dim != c:
        raise DimensionError(f"message-passing weights must be {c}x{c}")
    rp = layer1.num_relations
    cfg = LayerConfig(c, c, rp, activation="identity", bias=False, stacking="vertical", compact=True)
    h1 = _act(message_pass(cfg, a, f(embeddings), layer1), activation)
    h2 = _act(message_pass(cfg, a, h1, layer2), activation)
    return ad.add(embeddings, g(h2))


def crgcn_forward(a, embeddings, f, layer1, layer2, g, activation="relu") -> np.ndarray:
    return _value(crgcn_encode(a, embeddings, f, layer1, layer2, g, activation))
