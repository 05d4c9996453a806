import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from relgcn.errors import IntegrityError
from relgcn.linkpred import LinkPredictor, LinkPredictorConfig
from relgcn.stats import format_stats, lp_first_pass, tensor_stats
from relgcn.training import split_seeds

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_constant_tensor():
    (s,) = tensor_stats({"c": np.full((3, 4), 2.5)})
    assert (s.min, s.max, s.mean, s.std) == (2.5, 2.5, 2.5, 0.0)
    assert s.shape == (3, 4)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 40), elements=finite))
def test_mean_between_extremes(a):
    (s,) = tensor_stats([("a", a)])
    tol = 1e-9 * max(1.0, abs(s.min), abs(s.max))
    assert s.min - tol <= s.mean <= s.max + tol
    assert s.std >= 0


@settings(max_examples=50, deadline=None)
@given(
    arrays(np.float64, st.integers(1, 30), elements=st.floats(-100, 100)),
    arrays(np.float64, st.integers(1, 30), elements=st.floats(-100, 100)),
)
def test_pooled_moments(a, b):
    """Stats of a concatenation follow from the stats of its parts."""
    sa, sb, sc = tensor_stats([("a", a), ("b", b), ("ab", np.concatenate([a, b]))])
    na, nb = a.size, b.size
    mean = (na * sa.mean + nb * sb.mean) / (na + nb)
    second = (na * (sa.std**2 + sa.mean**2) + nb * (sb.std**2 + sb.mean**2)) / (na + nb)
    assert sc.mean == pytest.approx(mean, abs=1e-9)
    assert sc.std**2 == pytest.approx(second - mean**2, abs=1e-7)
    assert sc.min == min(sa.min, sb.min) and sc.max == max(sa.max, sb.max)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_non_finite_names_tensor(bad):
    a = np.zeros(5)
    a[3] = bad
    with pytest.raises(IntegrityError, match="layer7.weight"):
        tensor_stats({"ok": np.ones(2), "layer7.weight": a})


def test_empty_tensor_rejected():
    with pytest.raises(IntegrityError, match="empty"):
        tensor_stats({"e": np.zeros((0, 3))})


def test_format_has_one_row_per_tensor():
    text = format_stats(tensor_stats({"a": np.arange(6.0).reshape(2, 3), "b": np.ones(1)}))
    lines = text.splitlines()
    assert len(lines) == 4
    assert lines[2].split()[:2] == ["a", "2x3"]


def test_lp_first_pass_checkpoints():
    """A benchmark-sized block model reports every checkpoint with the expected init spread."""
    rng = np.random.default_rng(7)
    n, r = 280, 112
    train = np.stack([rng.integers(0, n, 600), rng.integers(0, r, 600), rng.integers(0, n, 600)], axis=1)
    cfg = LinkPredictorConfig(
        encoder="rgcn", layers=2, decomposition="block", num_bases=100, embed_dim=500,
        dropout_self=0.2, dropout_data=0.5, sample_size=300,
    )
    rngs = split_seeds(0)
    model = LinkPredictor(n, r, cfg, rngs.pop("init"))
    snap = lp_first_pass(model, train, rngs)
    expected = {
        "node_embeddings.init", "node_embeddings.output", "layer1.blocks.init", "layer1.self_loop.init",
        "layer1.output", "distmult.relations.init", "distmult.output",
    }
    assert set(snap) == expected
    stats = {s.name: s for s in tensor_stats(snap)}
    assert stats["node_embeddings.init"].shape == (n, 500)
    assert abs(stats["node_embeddings.init"].std - 0.10697) < 0.003
    assert stats["distmult.output"].shape == (300 * 11,)
