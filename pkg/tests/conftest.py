import os

import numpy as np
import pytest

from relgcn.graph import KnowledgeGraph

# criterion id -> (status, detail); filled in by tests/test_acceptance.py
ACCEPTANCE = {}


def random_graph(rng, n=None, r=None, m=None):
    n = int(rng.integers(2, 9)) if n is None else n
    r = int(rng.integers(1, 4)) if r is None else r
    m = int(rng.integers(1, 3 * n)) if m is None else m
    t = np.stack([rng.integers(0, n, m), rng.integers(0, r, m), rng.integers(0, n, m)], axis=1)
    return KnowledgeGraph(n, r, t)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def data_root():
    """Directory holding downloaded benchmark datasets, or None."""
    here = os.path.join(os.path.dirname(__file__), os.pardir, "data")
    root = os.environ.get("RELGCN_DATA", here)
    return os.path.abspath(root) if os.path.isdir(root) else None


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[cid]
        tr.write_line(f"{status:<4}  {cid}: {detail}")
