"""
Sharing weights across relations
================================

With many relations the per-relation matrices dominate the parameter budget.
Basis weights mix a few shared matrices; block weights keep only diagonal
blocks; diagonal weights keep a single vector per relation. This script
prints the budgets and checks the reductions between them.
"""

# %%
import numpy as np

from relgcn import BasisWeights, BlockWeights, DiagonalWeights, FullWeights, materialize

rng = np.random.default_rng(1)
rp, d = 2 * 112 + 1, 500  # a benchmark-sized link prediction layer

budgets = {
    "full": FullWeights(np.zeros((rp, d, d))).param_count(),
    "basis (2 bases)": BasisWeights(np.zeros((2, d, d)), np.zeros((rp, 2))).param_count(),
    "block (100 blocks of 5x5)": BlockWeights(np.zeros((rp - 1, 100, 5, 5)), np.zeros((d, d))).param_count(),
    "diagonal": DiagonalWeights(np.zeros((rp, d))).param_count(),
}
for name, count in budgets.items():
    print(f"{name:>26}: {count:>12,d} parameters")

# %%
# Reductions on a small layer: each holds with exact equality.
rp, d = 5, 4
v = rng.normal(size=(rp, d, d))
print("basis with identity coefficients is full:", np.array_equal(materialize(BasisWeights(v, np.eye(rp))), v))

q, self_w = rng.normal(size=(rp - 1, 1, d, d)), rng.normal(size=(d, d))
print("one block is a dense matrix:", np.array_equal(materialize(BlockWeights(q, self_w))[:-1], q[:, 0]))

w = rng.normal(size=(rp, d))
as_blocks = BlockWeights(w[:-1].reshape(rp - 1, d, 1, 1), np.diag(w[-1]))
print("diagonal is 1x1 blocks:", np.array_equal(materialize(DiagonalWeights(w)), materialize(as_blocks)))

# %%
# The block layout: off-diagonal quadrants stay zero.
two_blocks = BlockWeights(np.arange(1, 17, dtype=float).reshape(2, 2, 2, 2), np.ones((4, 4)))
print(materialize(two_blocks)[0])
