"""
Link prediction with a relational encoder and DistMult
======================================================

An encoder refines entity embeddings by message passing; DistMult scores
each triple as a three-way product of subject, relation and object vectors.
Evaluation ranks every test triple against all corruptions of its subject
and of its object, after removing corruptions that are known true triples.
"""

# %%
import numpy as np

from relgcn.evaluation import TruthIndex
from relgcn.linkpred import LinkPredictorConfig, lp_evaluate, lp_train

rng = np.random.default_rng(3)
n, r, groups = 40, 2, 5
group = np.arange(n) % groups
pairs = set()
for i in range(n):
    for j in range(n):
        if i != j and group[i] == group[j]:
            pairs.add((i, 0, j))  # relation 0: same group
        if group[j] == (group[i] + 1) % groups and rng.random() < 0.5:
            pairs.update({(i, 1, j), (j, 1, i)})  # relation 1: some links between neighbouring groups
t = np.array(sorted(pairs))
t = t[rng.permutation(len(t))]
k = len(t) // 10
valid, test, train = t[:k], t[k:2 * k], t[2 * k:]
truth = TruthIndex(train, valid, test)

# %%
common = dict(embed_dim=16, epochs=150, sample_size=150, dropout_self=0.2, dropout_data=0.5)
variants = {
    "DistMult only": LinkPredictorConfig(encoder="none", **common),
    "RGCN encoder (block weights)": LinkPredictorConfig(encoder="rgcn", layers=1, decomposition="block", num_bases=4, **common),
    "bottleneck encoder": LinkPredictorConfig(encoder="crgcn", compressed_dim=4, **common),
}
for name, cfg in variants.items():
    model = lp_train(n, r, train, cfg, seed=0)
    metrics, ranks = lp_evaluate(model, train, test, truth)
    print(f"{name:>30}: MRR {metrics['mrr']:.3f}, Hits@10 {metrics['hits@10']:.3f} "
          f"({model.param_count()} parameters)")
