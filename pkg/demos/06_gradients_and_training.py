"""
Gradients, initialisation and the optimiser
===========================================

Training runs on a small reverse-mode tape. This script checks the tape's
gradients of a full model against central differences, shows the spread
of the default initialiser on a 280 x 500 table, and writes and reloads a
checkpoint.
"""

# %%
import os
import tempfile

import numpy as np

from relgcn import KnowledgeGraph, LabeledNodeSet
from relgcn.nodeclass import NodeClassifier, NodeClassifierConfig
from relgcn.training import gradient_check, load_checkpoint, save_checkpoint, schlichtkrull_init

rng = np.random.default_rng(5)
g = KnowledgeGraph(8, 2, rng.integers(0, [8, 2, 8], size=(14, 3)))
model = NodeClassifier(g, 3, NodeClassifierConfig(hidden=3, num_bases=2), rng)
labels = LabeledNodeSet(np.array([0, 2, 5, 7]), np.array([0, 1, 2, 1]), 3)

worst, per_param = gradient_check(lambda: model.loss(labels)[0], model.params)
print(f"{model.param_count()} parameters, worst relative gradient error {worst:.1e}")

# %%
w = schlichtkrull_init((280, 500), 280, 500, rng=np.random.default_rng(0))
print(f"initial std {w.std():.5f} (formula: 3 / sqrt(280 + 500) = {3 / np.sqrt(780):.5f})")

# %%
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "model.bin")
    save_checkpoint(path, model.params, seed=5)
    tensors, seed = load_checkpoint(path)
    same = all(np.array_equal(tensors[k], model.params[k].value) for k in model.params)
    print(f"checkpoint of {len(tensors)} tensors, seed {seed}, identical after reload: {same}")
