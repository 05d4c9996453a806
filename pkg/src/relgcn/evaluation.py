"""DistMult scoring, filtered ranking and evaluation reports."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, IntegrityError

__all__ = [
    "distmult_score",
    "TruthIndex",
    "lp_rank_filtered",
    "lp_rank_bruteforce",
    "mrr_hits",
    "accuracy",
    "EvalReport",
]


def distmult_score(e_s, r, e_o) -> float:
    """``sum_i e_s[i] * r[i] * e_o[i]``."""
    e_s, r, e_o = (np.asarray(v, dtype=np.float64) for v in (e_s, r, e_o))
    if not (e_s.shape == r.shape == e_o.shape) or e_s.ndim != 1:
        raise DimensionError(f"DistMult vectors must share one dimension, got {e_s.shape}, {r.shape}, {e_o.shape}")
    return float(np.sum(e_s * r * e_o))


class TruthIndex:
    """Known true triples, indexed for subject and object filtering."""

    def __init__(self, *splits):
        self.objects = defaultdict(set)
        self.subjects = defaultdict(set)
        for split in splits:
            for s, r, o in np.asarray(split, dtype=np.int64).reshape(-1, 3).tolist():
                self.objects[(s, r)].add(o)
                self.subjects[(r, o)].add(s)

    def true_objects(self, s, r):
        return self.objects.get((s, r), ())

    def true_subjects(self, r, o):
        return self.subjects.get((r, o), ())


def _average_rank(scores, target, exclude):
    """1-based average-tie rank of ``scores[target]`` after removing ``exclude``."""
    keep = np.ones(scores.shape[0], dtype=bool)
    if len(exclude):
        keep[np.fromiter(exclude, dtype=np.int64)] = False
    keep[target] = True
    ref = scores[target]
    sv = scores[keep]
    higher = np.count_nonzero(sv > ref)
    ties = np.count_nonzero(sv == ref) - 1
    return 1.0 + higher + 0.5 * ties


def lp_rank_filtered(entities, relations, triples, truth=None, filtered=True, method="exact"):
    """Subject and object ranks for each evaluation triple.

    Parameters
    ----------
    entities : ndarray (N, D)
        Encoded entity embeddings.
    relations : ndarray (R, D)
        DistMult relation vectors.
    triples : array_like (M, 3)
    truth : TruthIndex, optional
        Union of all splits. Required when ``filtered`` is true.
    filtered : bool
        Remove candidates that form another known true triple.
    method : {"exact", "blas"}
        ``"exact"`` evaluates each candidate score with the same elementwise
        products and summation as :func:`distmult_score`, so ranks match a
        per-candidate loop bit for bit. ``"blas"`` uses matrix products and
        is meant for large graphs.

    Returns
    -------
    ndarray (M, 2)
        Column 0 ranks the true subject, column 1 the true object. Ties
        share the average of the positions they span.
    """
    h = np.asarray(entities, dtype=np.float64)
    rel = np.asarray(relations, dtype=np.float64)
    t = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    if filtered and truth is None:
        raise IntegrityError("filtered ranking needs the truth set")
    if method not in ("exact", "blas"):
        raise ValueError(f"unknown ranking method {method!r}")
    n = h.shape[0]
    ranks = np.empty((len(t), 2))
    for k, (s, r, o) in enumerate(t.tolist()):
        if not (0 <= s < n and 0 <= o < n):
            raise IntegrityError(f"triple {(s, r, o)} references an entity outside the candidate set")
        if method == "exact":
            subj_scores = np.sum(h * rel[r] * h[o], axis=1)
            obj_scores = np.sum(h[s] * rel[r] * h, axis=1)
        else:
            subj_scores = h @ (rel[r] * h[o])
            obj_scores = h @ (h[s] * rel[r])
        ex_s = truth.true_subjects(r, o) if filtered else ()
        ex_o = truth.true_objects(s, r) if filtered else ()
        ranks[k, 0] = _average_rank(subj_scores, s, ex_s)
        ranks[k, 1] = _average_rank(obj_scores, o, ex_o)
    return ranks


def lp_rank_bruteforce(entities, relations, triples, truth=None, filtered=True):
    """Reference ranking: score every candidate one at a time with :func:`distmult_score`."""
    h = np.asarray(entities, dtype=np.float64)
    rel = np.asarray(relations, dtype=np.float64)
    t = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    out = np.empty((len(t), 2))
    for k, (s, r, o) in enumerate(t.tolist()):
        for col, true_id in ((0, s), (1, o)):
            ref = distmult_score(h[s], rel[r], h[o])
            higher = ties = 0
            for c in range(h.shape[0]):
                if c == true_id:
                    continue
                cand = (c, r, o) if col == 0 else (s, r, c)
                known = truth.true_subjects(r, o) if col == 0 else truth.true_objects(s, r)
                if filtered and cand[0 if col == 0 else 2] in known:
                    continue
                sc = distmult_score(h[cand[0]], rel[r], h[cand[2]])
                higher += sc > ref
                ties += sc == ref
            out[k, col] = 1.0 + higher + 0.5 * ties
    return out


def mrr_hits(ranks, ks=(1, 3, 10)) -> dict:
    """MRR and Hits@k over all ranks (both directions pooled)."""
    r = np.asarray(ranks, dtype=np.float64).ravel()
    if r.size == 0:
        raise ValueError("no ranks to summarise")
    if r.min() < 1:
        raise ValueError("ranks must be >= 1")
    out = {"mrr": float(np.mean(1.0 / r))}
    for k in ks:
        out[f"hits@{k}"] = float(np.mean(r <= k))
    return out


def accuracy(pred, truth) -> float:
    pred, truth = np.asarray(pred), np.asarray(truth)
    return float(np.mean(pred == truth)) if truth.size else 0.0


@dataclass
class EvalReport:
    """Metrics of one run. Wall-clock time is kept out of the serialised forms."""

    task: str
    metrics: dict
    param_count: int
    seed: int
    extra: dict = field(default_factory=dict)
    seconds: float | None = field(default=None, compare=False)

    def items(self):
        yield "task", self.task
        yield "seed", self.seed
        yield "param_count", self.param_count
        for k in sorted(self.metrics):
            yield k, self.metrics[k]
        for k in sorted(self.extra):
            yield k, self.extra[k]

    def to_text(self) -> str:
        lines = []
        for k, v in self.items():
            lines.append(f"{k} = {repr(float(v)) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(dict(self.items()), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_text(cls, text):
        kv = {}
        for line in text.splitlines():
            if line.strip():
                k, _, v = line.partition("=")
                kv[k.strip()] = v.strip()
        task = kv.pop("task")
        seed = int(kv.pop("seed"))
        params = int(kv.pop("param_count"))
        metrics = {k: float(v) for k, v in kv.items()}
        return cls(task, metrics, params, seed)
