"""
Sampling edges for link prediction training
===========================================

Each training step uses a sample of the graph's edges as positives.
Uniform sampling scatters the sample over the graph. Neighbourhood
sampling raises the weight of edges next to ones already drawn, so the
sample forms connected patches and message passing sees real
neighbourhoods. Negatives corrupt the subject or object of each positive.
"""

# %%
import numpy as np

from relgcn import KnowledgeGraph, negative_sample, sample_edges_neighborhood, sample_edges_uniform

rng = np.random.default_rng(4)
n, r, m = 500, 5, 1000
g = KnowledgeGraph(n, r, np.stack([rng.integers(0, n, m), rng.integers(0, r, m), rng.integers(0, n, m)], axis=1))


def components(edges):
    """Number of connected pieces formed by the sampled edges."""
    parent = {}

    def find(v):
        parent.setdefault(v, v)
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for s, _, o in edges:
        parent[find(s)] = find(o)
    return len({find(v) for v in list(parent)})


# %%
for name, sampler in (("uniform", sample_edges_uniform), ("neighbourhood", sample_edges_neighborhood)):
    pieces = [components(sampler(g, 100, np.random.default_rng(k))) for k in range(20)]
    print(f"{name:>13}: 100 sampled edges form {np.mean(pieces):.1f} connected pieces on average")

# %%
# Ten corruptions per positive, half on each side, labelled 0.
positives = sample_edges_neighborhood(g, 5, np.random.default_rng(1))
batch = negative_sample(positives, 10, n, np.random.default_rng(2))
print("batch size:", len(batch.triples), "positives:", int(batch.labels.sum()))
print(batch.triples[:3], batch.triples[5:8], sep="\n")
