"""Independent reference implementations used by the tests.

Everything here is written with explicit loops or dense numpy algebra and
shares no code with the library beyond the graph containers.
"""

import numpy as np


def augmented_edges(g):
    r, n = g.num_relations, g.num_entities
    edges = [tuple(e) for e in g.triples.tolist()]
    edges += [(o, rel + r, s) for s, rel, o in g.triples.tolist()]
    edges += [(i, 2 * r, i) for i in range(n)]
    return edges


def dense_adjacency(g, keep=None):
    """``(R+, N, N)`` per-relation matrices with ``A_r[o, s]`` set, normalised row by row."""
    n, rp = g.num_entities, 2 * g.num_relations + 1
    a = np.zeros((rp, n, n))
    for idx, (s, rel, o) in enumerate(augmented_edges(g)):
        if keep is None or keep[idx]:
            a[rel, o, s] += 1.0
    for rel in range(rp):
        for i in range(n):
            tot = a[rel, i].sum()
            if tot:
                a[rel, i] /= tot
    return a


def naive_layer(a, x, w, bias=None, activation="identity"):
    """``act(sum_r A_r X W_r + b)`` with dense matrices, relation by relation."""
    h = np.zeros((a.shape[1], w.shape[2]))
    for r in range(a.shape[0]):
        h += a[r] @ x @ w[r]
    if bias is not None:
        h = h + bias
    if activation == "relu":
        h = np.maximum(h, 0)
    elif activation == "softmax":
        z = np.exp(h - h.max(axis=1, keepdims=True))
        h = z / z.sum(axis=1, keepdims=True)
    return h


def central_gradient(f, arrays, h=1e-5):
    """Central differences of scalar ``f()`` with respect to every entry of ``arrays`` (modified in place)."""
    grads = []
    for a in arrays:
        g = np.zeros_like(a)
        it = np.nditer(a, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            old = a[i]
            a[i] = old + h
            up = f()
            a[i] = old - h
            down = f()
            a[i] = old
            g[i] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def relative_error(analytic, numeric, floor=1e-6):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom)) if analytic.size else 0.0


def brute_force_ranks(ent, rel, triples, true_set):
    """Filtered average-tie ranks by scoring every candidate in a Python loop."""
    n = ent.shape[0]
    out = []
    for s, r, o in triples:
        row = []
        for side in ("s", "o"):
            target = float(np.sum(ent[s] * rel[r] * ent[o]))
            higher = ties = 0
            for c in range(n):
                cand = (c, r, o) if side == "s" else (s, r, c)
                if cand != (s, r, o) and cand in true_set:
                    continue
                if cand == (s, r, o):
                    continue
                sc = float(np.sum(ent[cand[0]] * rel[r] * ent[cand[2]]))
                if sc > target:
                    higher += 1
                elif sc == target:
                    ties += 1
            row.append(1 + higher + 0.5 * ties)
        out.append(row)
    return np.array(out)
