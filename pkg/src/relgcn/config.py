"""Experiment configuration files.

A config is an INI-style text file with ``[data]``, ``[model]``, ``[train]``
and ``[eval]`` sections of ``key = value`` lines. Relative paths are resolved
against the directory of the config file. See ``configs/`` for examples.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .linkpred import LinkPredictorConfig
from .nodeclass import NodeClassifierConfig

__all__ = ["RunConfig", "load_config", "parse_config"]

# field name -> section
SECTIONS = {
    "task": "data",
    "format": "data",
    "path": "data",
    "train_labels": "data",
    "test_labels": "data",
    "entity_column": "data",
    "label_column": "data",
    "exclude_relations": "data",
    "prune_hops": "data",
    "variant": "model",
    "decomposition": "model",
    "num_bases": "model",
    "hidden": "model",
    "embed_dim": "model",
    "compressed_dim": "model",
    "layers": "model",
    "bias": "model",
    "embed_affine": "model",
    "aggregate": "model",
    "init_gain": "model",
    "embed_gain": "model",
    "epochs": "train",
    "lr": "train",
    "weight_decay": "train",
    "l2": "train",
    "dropout_self": "train",
    "dropout_data": "train",
    "neg_rate": "train",
    "sample_size": "train",
    "sampling": "train",
    "seed": "train",
    "seeds": "train",
    "eval_every": "eval",
    "eval_split": "eval",
    "rank_method": "eval",
}


@dataclass(frozen=True)
class RunConfig:
    task: str = "nc"
    format: str = "ntriples"
    path: str = ""
    train_labels: str = ""
    test_labels: str = ""
    entity_column: str = "entity"
    label_column: str = "label"
    exclude_relations: tuple = ()
    prune_hops: int = 0
    variant: str = "rgcn"
    decomposition: str = "none"
    num_bases: int = 0
    hidden: int = 16
    embed_dim: int = 128
    compressed_dim: int = 16
    layers: int = 2
    bias: bool = True
    embed_affine: bool = True
    aggregate: str = "sum"
    init_gain: float = 0.0  # 0 keeps the model default
    embed_gain: float = 1.0
    epochs: int = 50
    lr: float = 0.01
    weight_decay: float = 0.0
    l2: float = 0.01
    dropout_self: float = 0.0
    dropout_data: float = 0.0
    neg_rate: int = 10
    sample_size: int = 0
    sampling: str = "neighborhood"
    seed: int = 0
    seeds: int = 1
    eval_every: int = 0
    eval_split: str = "test"
    rank_method: str = "exact"
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        if self.task not in ("nc", "lp"):
            raise ConfigError(f"task must be 'nc' or 'lp', got {self.task!r}")
        if self.format not in ("ntriples", "tsv"):
            raise ConfigError(f"unknown dataset format {self.format!r}")
        if not self.path:
            raise ConfigError("[data] path is required")
        if self.task == "nc" and not (self.train_labels and self.test_labels):
            raise ConfigError("node classification needs train_labels and test_labels")
        if self.task == "nc" and self.variant not in ("rgcn", "ergcn"):
            raise ConfigError(f"variant {self.variant!r} is not a node classifier")
        if self.task == "lp" and self.variant not in ("rgcn", "crgcn", "distmult"):
            raise ConfigError(f"variant {self.variant!r} is not a link predictor")
        if self.eval_split not in ("test", "valid"):
            raise ConfigError("eval_split must be 'test' or 'valid'")
        if self.rank_method not in ("exact", "blas"):
            raise ConfigError("rank_method must be 'exact' or 'blas'")
        if self.prune_hops < 0 or self.seeds < 1 or self.eval_every < 0:
            raise ConfigError("prune_hops and eval_every must be >= 0, seeds >= 1")
        # surface model-level errors at load time
        try:
            self.model_config()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def resolve(self, p):
        return p if os.path.isabs(p) else os.path.normpath(os.path.join(self.base_dir, p))

    def model_config(self):
        if self.task == "nc":
            if self.decomposition not in ("none", "basis"):
                raise ConfigError("node classification supports decomposition 'none' or 'basis'")
            return NodeClassifierConfig(
                variant=self.variant,
                hidden=self.hidden,
                num_bases=self.num_bases if self.decomposition == "basis" else 0,
                embed_dim=self.embed_dim,
                epochs=self.epochs,
                lr=self.lr,
                weight_decay=self.weight_decay,
                bias=self.bias,
                embed_gain=self.embed_gain,
                aggregate=self.aggregate,
                **({"gain": self.init_gain} if self.init_gain else {}),
            )
        encoder = {"rgcn": "rgcn", "crgcn": "crgcn", "distmult": "none"}[self.variant]
        return LinkPredictorConfig(
            encoder=encoder,
            layers=self.layers,
            decomposition=self.decomposition,
            num_bases=self.num_bases,
            embed_dim=self.embed_dim,
            compressed_dim=self.compressed_dim,
            embed_affine=self.embed_affine,
            bias=self.bias,
            epochs=self.epochs,
            lr=self.lr,
            l2=self.l2,
            dropout_self=self.dropout_self,
            dropout_data=self.dropout_data,
            neg_rate=self.neg_rate,
            sample_size=self.sample_size,
            sampling=self.sampling,
            init_gain=self.init_gain or 1.0,
            eval_every=self.eval_every,
        )

    def with_overrides(self, **kw):
        return dataclasses.replace(self, **kw)

    def to_text(self) -> str:
        """Serialise every field (including defaults) in section order."""
        out = []
        for section in ("data", "model", "train", "eval"):
            out.append(f"[{section}]")
            for f in dataclasses.fields(self):
                if SECTIONS.get(f.name) != section:
                    continue
                v = getattr(self, f.name)
                if isinstance(v, bool):
                    v = "true" if v else "false"
                elif isinstance(v, tuple):
                    v = ", ".join(v)
                elif isinstance(v, float):
                    v = repr(v)
                out.append(f"{f.name} = {v}")
            out.append("")
        return "\n".join(out)


def _convert(name, raw, default):
    try:
        if isinstance(default, bool):
            low = raw.strip().lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(p.strip() for p in raw.replace("\n", ",").split(",") if p.strip())
        return raw.strip()
    except ValueError:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from None


def parse_config(text: str, base_dir=".") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    defaults = {f.name: f.default for f in dataclasses.fields(RunConfig)}
    values = {}
    for section in cp.sections():
        if section not in ("data", "model", "train", "eval"):
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if SECTIONS.get(key) != section:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[key] = _convert(key, raw, defaults[key])
    return RunConfig(**values, base_dir=base_dir)


def load_config(path) -> RunConfig:
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
