"""Knowledge-graph data model, augmentation, pruning, dropout and edge sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, UsageError
from .sparse import SparseMatrix, row_normalize

__all__ = [
    "KnowledgeGraph",
    "AugmentedGraph",
    "LabeledNodeSet",
    "EdgeDropout",
    "EdgeSample",
    "augment",
    "edge_keep_mask",
    "build_adjacency",
    "khop_nodes",
    "prune_khop",
    "sample_edges_uniform",
    "sample_edges_neighborhood",
    "negative_sample",
]

DATA, INVERSE, SELF_LOOP = 0, 1, 2


def _as_triples(triples):
    t = np.asarray(triples, dtype=np.int64)
    if t.size == 0:
        return np.zeros((0, 3), dtype=np.int64)
    if t.ndim != 2 or t.shape[1] != 3:
        raise DimensionError(f"triples must have shape (M, 3), got {t.shape}")
    return t


def _unique_rows(t):
    """Drop repeated rows, keeping the first occurrence and the original order."""
    if len(t) == 0:
        return t
    _, first = np.unique(t, axis=0, return_index=True)
    return t[np.sort(first)]


@dataclass(frozen=True, eq=False)
class KnowledgeGraph:
    """Directed, edge-labelled graph over ``num_entities`` nodes.

    ``triples`` holds ``(subject, relation, object)`` rows. Duplicates are
    removed on construction (first occurrence wins).
    """

    num_entities: int
    num_relations: int
    triples: np.ndarray

    def __post_init__(self):
        t = _unique_rows(_as_triples(self.triples))
        if len(t):
            if t[:, [0, 2]].min() < 0 or t[:, [0, 2]].max() >= self.num_entities:
                raise DimensionError("entity id out of range")
            if t[:, 1].min() < 0 or t[:, 1].max() >= self.num_relations:
                raise DimensionError("relation id out of range")
        t.setflags(write=False)
        object.__setattr__(self, "triples", t)

    @property
    def num_edges(self):
        return len(self.triples)

    def __eq__(self, other):
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self.num_entities == other.num_entities
            and self.num_relations == other.num_relations
            and np.array_equal(self.triples, other.triples)
        )


@dataclass(frozen=True, eq=False)
class AugmentedGraph:
    """A graph with inverse edges and self-loops added (``2R + 1`` relations).

    Relation layout: data relation ``r`` keeps id ``r``, its inverse gets
    ``R + r`` and the self-loop relation is ``2R``. Augmented edges are
    ordered data, inverse, self-loop; ``source_index`` points each one back to
    the base edge (data/inverse) or the node (self-loop) it came from.
    """

    base: KnowledgeGraph
    triples: np.ndarray = field(repr=False)
    kind: np.ndarray = field(repr=False)
    source_index: np.ndarray = field(repr=False)

    @property
    def num_entities(self):
        return self.base.num_entities

    @property
    def total_relations(self):
        return 2 * self.base.num_relations + 1

    @property
    def self_loop_relation(self):
        return 2 * self.base.num_relations

    @property
    def num_edges(self):
        return len(self.triples)


@dataclass(frozen=True)
class LabeledNodeSet:
    entities: np.ndarray
    classes: np.ndarray
    num_classes: int

    def __post_init__(self):
        e = np.asarray(self.entities, dtype=np.int64).ravel()
        c = np.asarray(self.classes, dtype=np.int64).ravel()
        if e.shape != c.shape:
            raise DimensionError("entities and classes differ in length")
        if len(np.unique(e)) != len(e):
            raise UsageError("labelled entity ids must be distinct")
        if len(c) and (c.min() < 0 or c.max() >= self.num_classes):
            raise UsageError(f"class ids must lie in [0, {self.num_classes})")
        object.__setattr__(self, "entities", e)
        object.__setattr__(self, "classes", c)

    def __len__(self):
        return len(self.entities)


@dataclass(frozen=True)
class EdgeDropout:
    """Edge dropout rates; self-loops get their own (usually lower) rate."""

    self_loop_rate: float = 0.0
    data_rate: float = 0.0

    def __post_init__(self):
        for name in ("self_loop_rate", "data_rate"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise UsageError(f"{name} must lie in [0, 1), got {v}")


@dataclass(frozen=True)
class EdgeSample:
    """Positive triples followed by their corruptions, with 0/1 labels."""

    triples: np.ndarray
    labels: np.ndarray
    num_positives: int
    rate: int
    corrupted_subject: np.ndarray

    @property
    def positives(self):
        return self.triples[: self.num_positives]

    @property
    def negatives(self):
        return self.triples[self.num_positives:]


def augment(g: KnowledgeGraph) -> AugmentedGraph:
    """Add an inverse edge per data edge and a self-loop per entity."""
    if isinstance(g, AugmentedGraph):
        raise UsageError("graph is already augmented")
    n, r = g.num_entities, g.num_relations
    t = g.triples
    m = len(t)
    inverse = np.stack([t[:, 2], t[:, 1] + r, t[:, 0]], axis=1) if m else np.zeros((0, 3), np.int64)
    nodes = np.arange(n, dtype=np.int64)
    loops = np.stack([nodes, np.full(n, 2 * r, dtype=np.int64), nodes], axis=1)
    triples = np.concatenate([t, inverse, loops]).astype(np.int64)
    kind = np.concatenate([np.full(m, DATA), np.full(m, INVERSE), np.full(n, SELF_LOOP)]).astype(np.int8)
    source = np.concatenate([np.arange(m), np.arange(m), nodes]).astype(np.int64)
    for a in (triples, kind, source):
        a.setflags(write=False)
    return AugmentedGraph(g, triples, kind, source)


def edge_keep_mask(ag: AugmentedGraph, dropout: EdgeDropout | None, rng=None) -> np.ndarray:
    """Boolean survival mask over augmented edges.

    One draw per base edge decides the fate of the data edge and its inverse
    together, so nothing leaks back through the inverse of a dropped edge.
    Base-edge draws come first, then one draw per self-loop.
    """
    if dropout is None:
        return np.ones(ag.num_edges, dtype=bool)
    if rng is None:
        raise UsageError("edge dropout needs an rng")
    m, n = ag.base.num_edges, ag.num_entities
    keep_base = rng.random(m) >= dropout.data_rate
    keep_self = rng.random(n) >= dropout.self_loop_rate
    return np.concatenate([keep_base, keep_base, keep_self])


def build_adjacency(ag: AugmentedGraph, mode="vertical", dropout=None, rng=None, keep=None) -> SparseMatrix:
    """Row-normalised, relation-stacked adjacency of an augmented graph.

    ``A_r[o, s] = 1`` for every surviving edge ``(s, r, o)``; each ``A_r`` is
    row-normalised after dropout, then the ``R+`` matrices are stacked
    vertically (``(R+ N, N)``) or horizontally (``(N, R+ N)``).

    Parameters
    ----------
    ag : AugmentedGraph
    mode : {"vertical", "horizontal"}
    dropout : EdgeDropout, optional
    rng : numpy.random.Generator, optional
        Required when ``dropout`` is given.
    keep : ndarray of bool, optional
        Precomputed survival mask (overrides ``dropout``).
    """
    if mode not in ("vertical", "horizontal"):
        raise UsageError(f"unknown stacking mode {mode!r}")
    if keep is None:
        keep = edge_keep_mask(ag, dropout, rng)
    n, rp = ag.num_entities, ag.total_relations
    t = ag.triples[keep]
    s, r, o = t[:, 0], t[:, 1], t[:, 2]
    # per-relation row normalisation is plain row normalisation of the vertical stack
    av = row_normalize(SparseMatrix.from_coo(r * n + o, s, 1.0, (rp * n, n)))
    if mode == "vertical":
        return av
    rows, cols, vals = av.coo()
    rel, dst = np.divmod(rows, n)
    return SparseMatrix.from_coo(dst, rel * n + cols, vals, (n, rp * n))


def _undirected(g):
    t = g.triples
    n = g.num_entities
    return SparseMatrix.from_coo(np.concatenate([t[:, 0], t[:, 2]]), np.concatenate([t[:, 2], t[:, 0]]), 1.0, (n, n))


def khop_nodes(g: KnowledgeGraph, seeds, k: int) -> np.ndarray:
    """Sorted ids of entities within ``k`` undirected hops of any seed."""
    if k < 1:
        raise UsageError("hop count must be >= 1")
    adj = _undirected(g)
    reached = np.zeros(g.num_entities, dtype=bool)
    reached[np.asarray(seeds, dtype=np.int64)] = True
    frontier = reached.copy()
    for _ in range(k):
        if not frontier.any():
            break
        hit = adj.take_rows(np.flatnonzero(frontier)).indices
        new = np.zeros_like(reached)
        new[hit] = True
        frontier = new & ~reached
        reached |= new
    return np.flatnonzero(reached)


def prune_khop(g: KnowledgeGraph, targets: LabeledNodeSet, k: int, return_index=False):
    """Keep only entities within ``k`` undirected hops of a labelled target.

    Entities and relations are re-indexed densely in ascending order of their
    old ids; relations left without edges disappear. With
    ``return_index=True`` also return the old ids of the kept entities and
    relations (``kept[new_id] == old_id``).
    """
    kept = khop_nodes(g, targets.entities, k)
    remap = np.full(g.num_entities, -1, dtype=np.int64)
    remap[kept] = np.arange(len(kept))
    t = g.triples
    alive = (remap[t[:, 0]] >= 0) & (remap[t[:, 2]] >= 0)
    t = t[alive]
    rels = np.unique(t[:, 1])
    rel_map = np.full(g.num_relations, -1, dtype=np.int64)
    rel_map[rels] = np.arange(len(rels))
    new_t = np.stack([remap[t[:, 0]], rel_map[t[:, 1]], remap[t[:, 2]]], axis=1) if len(t) else t
    pruned = KnowledgeGraph(len(kept), len(rels), new_t)
    if return_index:
        return pruned, kept, rels
    return pruned


def _check_count(g, count):
    if count < 0 or count > g.num_edges:
        raise UsageError(f"cannot sample {count} edges from a graph with {g.num_edges}")


def sample_edges_uniform(g: KnowledgeGraph, count: int, rng) -> np.ndarray:
    """Draw ``count`` distinct edges with equal probability."""
    _check_count(g, count)
    idx = rng.choice(g.num_edges, size=count, replace=False)
    return g.triples[idx]


class _Fenwick:
    """Prefix-sum tree over non-negative weights."""

    def __init__(self, weights):
        self.n = len(weights)
        self.tree = [0] * (self.n + 1)
        for i, w in enumerate(weights, 1):
            self.tree[i] += w
            j = i + (i & -i)
            if j <= self.n:
                self.tree[j] += self.tree[i]
        self.top = 1 << max(self.n.bit_length() - 1, 0)

    def add(self, i, delta):
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & -i

    def total(self):
        s, i = 0, self.n
        while i > 0:
            s += self.tree[i]
            i -= i & -i
        return s

    def find(self, x):
        """Smallest index whose inclusive prefix sum exceeds ``x``."""
        pos, step = 0, self.top
        while step:
            nxt = pos + step
            if nxt <= self.n and self.tree[nxt] <= x:
                pos = nxt
                x -= self.tree[nxt]
            step >>= 1
        return min(pos, self.n - 1)


def sample_edges_neighborhood(g: KnowledgeGraph, count: int, rng, increment=1) -> np.ndarray:
    """Weighted sampling without replacement that favours neighbouring edges.

    An edge ``(s, r, o)`` starts with weight ``deg(s) + deg(o)``. Each time an
    edge is drawn, every remaining edge sharing an endpoint with it gains
    ``increment`` per shared endpoint, so ``weight(e) = c(s) + c(o)`` with
    ``c(v) = deg(v) + increment * (draws touching v)``.

    Internally a node ``v`` is drawn with probability proportional to
    ``c(v) * (remaining edges at v)`` and then a remaining incident edge
    uniformly, which yields exactly the edge weights above.
    """
    _check_count(g, count)
    if increment <= 0:
        raise UsageError("increment must be positive")
    m, n = g.num_edges, g.num_entities
    if count == 0:
        return g.triples[:0]
    src = g.triples[:, 0].tolist()
    dst = g.triples[:, 2].tolist()
    deg = (np.bincount(g.triples[:, 0], minlength=n) + np.bincount(g.triples[:, 2], minlength=n)).tolist()
    c = list(deg)
    # slot e is the subject end of edge e, slot m + e its object end
    incident = [[] for _ in range(n)]
    pos = [0] * (2 * m)
    for e in range(m):
        for slot, v in ((e, src[e]), (m + e, dst[e])):
            pos[slot] = len(incident[v])
            incident[v].append(slot)
    tree = _Fenwick([c[v] * len(incident[v]) for v in range(n)])

    def weight(v):
        return c[v] * len(incident[v])

    def drop_slot(slot, v):
        lst = incident[v]
        i = pos[slot]
        last = lst.pop()
        if last != slot:
            lst[i] = last
            pos[last] = i

    drawn = []
    while len(drawn) < count:
        v = tree.find(rng.random() * tree.total())
        if not incident[v]:
            # float round-off in the tree; rebuild exactly and redraw
            tree = _Fenwick([weight(u) for u in range(n)])
            continue
        e = incident[v][int(rng.integers(len(incident[v])))] % m
        drawn.append(e)
        s, o = src[e], dst[e]
        before = {u: weight(u) for u in (s, o)}
        drop_slot(e, s)
        drop_slot(m + e, o)
        for u in before:
            c[u] += increment
        for u, w in before.items():
            tree.add(u, weight(u) - w)
    return g.triples[np.asarray(drawn, dtype=np.int64)]


def negative_sample(positives, rate: int, num_entities: int, rng) -> EdgeSample:
    """Corrupt each positive ``rate`` times by replacing its subject or object.

    Subject and object are chosen with equal probability; the replacement
    entity is uniform over all entities and may coincide with the original.
    Corruptions are not checked against known true triples.
    """
    if rate < 1:
        raise UsageError("negative rate must be >= 1")
    if num_entities < 2:
        raise UsageError("negative sampling needs at least two entities")
    pos = _as_triples(positives)
    neg = np.repeat(pos, rate, axis=0)
    subject = rng.random(len(neg)) < 0.5
    ents = rng.integers(num_entities, size=len(neg))
    neg[subject, 0] = ents[subject]
    neg[~subject, 2] = ents[~subject]
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    return EdgeSample(np.concatenate([pos, neg]), labels, len(pos), rate, subject)
