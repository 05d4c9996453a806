import glob
import os

import pytest

from relgcn.config import RunConfig, load_config, parse_config
from relgcn.errors import ConfigError
from relgcn.linkpred import LinkPredictorConfig
from relgcn.nodeclass import NodeClassifierConfig

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
SHIPPED = sorted(glob.glob(os.path.join(CONFIG_DIR, "*.cfg")))

NC_TEXT = """
[data]
path = g.nt
train_labels = a.tsv
test_labels = b.tsv
exclude_relations = x, y
[model]
decomposition = basis
num_bases = 3
bias = false
[train]
lr = 0.02   # inline comment
"""


def test_parse_values_and_types():
    cfg = parse_config(NC_TEXT, base_dir="/data")
    assert cfg.exclude_relations == ("x", "y")
    assert cfg.num_bases == 3 and cfg.bias is False and cfg.lr == 0.02
    assert cfg.resolve("g.nt") == "/data/g.nt"
    assert cfg.resolve("/abs/g.nt") == "/abs/g.nt"
    mc = cfg.model_config()
    assert isinstance(mc, NodeClassifierConfig) and mc.num_bases == 3


def test_text_round_trip():
    cfg = parse_config(NC_TEXT)
    assert parse_config(cfg.to_text()) == cfg
    lp = parse_config("[data]\ntask = lp\nformat = tsv\npath = kg\n[model]\nvariant = crgcn\n")
    assert parse_config(lp.to_text()) == lp


@pytest.mark.parametrize("path", SHIPPED, ids=[os.path.basename(p) for p in SHIPPED])
def test_shipped_configs_load(path):
    cfg = load_config(path)
    assert parse_config(cfg.to_text()) == cfg
    expected = NodeClassifierConfig if cfg.task == "nc" else LinkPredictorConfig
    assert isinstance(cfg.model_config(), expected)


def test_distmult_variant_has_no_encoder():
    cfg = parse_config("[data]\ntask = lp\nformat = tsv\npath = kg\n[model]\nvariant = distmult\n")
    assert cfg.model_config().encoder == "none"


@pytest.mark.parametrize(
    "text",
    [
        "[data]\npath = g\n[optim]\nlr = 1\n",  # unknown section
        "[data]\npath = g\nlr = 0.1\n",  # key in the wrong section
        "[data]\npath = g\n[train]\nlearning_rate = 0.1\n",  # unknown key
        "[data]\npath = g\ntrain_labels = a\ntest_labels = b\n[train]\nepochs = many\n",  # bad int
        "[data]\ntask = graph\npath = g\n",  # bad task
        "[data]\ntrain_labels = a\ntest_labels = b\n",  # missing path
        "[data]\npath = g\n",  # nc without labels
        "[data]\npath = g\ntrain_labels = a\ntest_labels = b\n[model]\nvariant = crgcn\n",
        "[data]\npath = g\ntrain_labels = a\ntest_labels = b\n[model]\ndecomposition = block\n",
        "[data]\ntask = lp\nformat = tsv\npath = kg\n[model]\ndecomposition = block\nnum_bases = 3\nembed_dim = 16\n",
        "[data]\ntask = lp\nformat = tsv\npath = kg\n[eval]\nrank_method = fast\n",
        "not an ini file",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_overrides_revalidate():
    cfg = parse_config(NC_TEXT)
    assert cfg.with_overrides(prune_hops=2).prune_hops == 2
    with pytest.raises(ConfigError):
        cfg.with_overrides(seeds=0)
    assert isinstance(cfg, RunConfig)
