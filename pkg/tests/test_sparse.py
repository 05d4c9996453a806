import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relgcn.errors import DimensionError, DomainError, NonFiniteError, UnsupportedContractionError
from relgcn.sparse import SparseMatrix, dense_contract, row_normalize, spmm, stack_horizontal, stack_vertical


def random_sparse(rng, rows, cols, density=0.2, nonneg=False):
    mask = rng.random((rows, cols)) < density
    vals = rng.random((rows, cols)) if nonneg else rng.normal(size=(rows, cols))
    return SparseMatrix.from_dense(np.where(mask, vals, 0.0))


# -- construction -------------------------------------------------------------


def test_from_coo_sums_duplicates_and_sorts():
    s = SparseMatrix.from_coo([1, 0, 1, 1], [2, 1, 0, 2], [1.0, 2.0, 3.0, 4.0], (2, 3))
    assert s.nnz == 3
    np.testing.assert_array_equal(s.indptr, [0, 1, 3])
    np.testing.assert_array_equal(s.indices, [1, 0, 2])
    np.testing.assert_array_equal(s.data, [2.0, 3.0, 5.0])


def test_out_of_bounds_index_rejected():
    with pytest.raises(DimensionError):
        SparseMatrix.from_coo([0, 2], [0, 0], [1.0, 1.0], (2, 2))


def test_sparse_matrix_is_immutable():
    s = SparseMatrix.identity(3)
    with pytest.raises(ValueError):
        s.data[0] = 5.0


def test_dense_round_trip(rng):
    d = np.where(rng.random((7, 5)) < 0.3, rng.normal(size=(7, 5)), 0.0)
    np.testing.assert_array_equal(SparseMatrix.from_dense(d).to_dense(), d)


def test_transpose(rng):
    s = random_sparse(rng, 6, 9)
    np.testing.assert_array_equal(s.T.to_dense(), s.to_dense().T)


# -- spmm ---------------------------------------------------------------------


def test_spmm_identity(rng):
    d = rng.normal(size=(3, 2))
    np.testing.assert_array_equal(spmm(SparseMatrix.identity(3), d), d)


def test_spmm_zero(rng):
    np.testing.assert_array_equal(spmm(SparseMatrix.zeros(2, 2), rng.normal(size=(2, 2))), np.zeros((2, 2)))


def test_spmm_matches_dense_product_8x8(rng):
    s = random_sparse(rng, 8, 8, density=0.2)
    d = rng.normal(size=(8, 4))
    np.testing.assert_allclose(spmm(s, d), s.to_dense() @ d, rtol=0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    rows=st.integers(1, 32),
    inner=st.integers(1, 32),
    cols=st.integers(1, 8),
    density=st.floats(0.0, 1.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_spmm_equals_dense_property(rows, inner, cols, density, seed):
    rng = np.random.default_rng(seed)
    s = random_sparse(rng, rows, inner, density)
    d = rng.normal(size=(inner, cols))
    np.testing.assert_allclose(spmm(s, d), s.to_dense() @ d, rtol=0, atol=1e-12)


def test_spmm_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(4, 1\)"):
        spmm(SparseMatrix.zeros(2, 3), np.zeros((4, 1)))


def test_spmm_rejects_non_finite():
    d = np.ones((2, 1))
    d[0, 0] = np.nan
    with pytest.raises(NonFiniteError):
        spmm(SparseMatrix.identity(2), d)


def test_spmm_is_deterministic(rng):
    s = random_sparse(rng, 20, 20, 0.4)
    d = rng.normal(size=(20, 3))
    assert spmm(s, d).tobytes() == spmm(s, d).tobytes()


# -- dense_contract -----------------------------------------------------------


def test_contract_identity():
    w = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(dense_contract("ni,io->no", np.eye(3), w), w)


def test_contract_single_relation_is_matmul(rng):
    x, w = rng.normal(size=(2, 2)), rng.normal(size=(1, 2, 2))
    np.testing.assert_allclose(dense_contract("ni,rio->rno", x, w), (x @ w[0])[None], atol=1e-15)


def test_contract_rio_rni_matches_triple_loop(rng):
    r, n, i_, o = 3, 4, 5, 2
    w, x = rng.normal(size=(r, i_, o)), rng.normal(size=(r, n, i_))
    expect = np.zeros((n, o))
    for rr in range(r):
        for nn in range(n):
            for ii in range(i_):
                for oo in range(o):
                    expect[nn, oo] += x[rr, nn, ii] * w[rr, ii, oo]
    np.testing.assert_allclose(dense_contract("rio,rni→no", w, x), expect, rtol=0, atol=1e-12)


def test_contract_ni_rio_matches_loop(rng):
    x, w = rng.normal(size=(4, 3)), rng.normal(size=(2, 3, 5))
    expect = np.zeros((2, 4, 5))
    for r in range(2):
        for n in range(4):
            for i in range(3):
                expect[r, n] += x[n, i] * w[r, i]
    np.testing.assert_allclose(dense_contract("ni,rio->rno", x, w), expect, rtol=0, atol=1e-12)


def test_contract_unknown_descriptor():
    with pytest.raises(UnsupportedContractionError):
        dense_contract("ij,jk->ik", np.eye(2), np.eye(2))


def test_contract_extent_mismatch():
    with pytest.raises(DimensionError):
        dense_contract("ni,io->no", np.eye(3), np.ones((2, 2)))


# -- row_normalize ------------------------------------------------------------


def test_row_normalize_even_split():
    s = row_normalize(SparseMatrix.from_dense(np.array([[2.0, 2.0]])))
    np.testing.assert_array_equal(s.to_dense(), [[0.5, 0.5]])


def test_row_normalize_empty_row_stays_empty():
    s = row_normalize(SparseMatrix.from_dense(np.array([[0.0, 0.0], [1.0, 3.0]])))
    np.testing.assert_array_equal(s.to_dense()[0], [0.0, 0.0])
    assert s.nnz == 2


def test_row_normalize_rejects_negative():
    with pytest.raises(DomainError):
        row_normalize(SparseMatrix.from_dense(np.array([[1.0, -1.0]])))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), density=st.floats(0.0, 1.0))
def test_row_normalize_sums_pattern_and_idempotence(seed, density):
    rng = np.random.default_rng(seed)
    s = random_sparse(rng, 10, 10, density, nonneg=True)
    s = SparseMatrix.from_coo(*s.coo()[:2], np.abs(s.data) + 0.1, s.shape)  # strictly positive entries
    norm = row_normalize(s)
    sums = norm.to_dense().sum(axis=1)
    nonempty = np.diff(s.indptr) > 0
    np.testing.assert_allclose(sums[nonempty], 1.0, rtol=0, atol=1e-12)
    assert np.all(sums[~nonempty] == 0)
    np.testing.assert_array_equal(norm.indices, s.indices)
    np.testing.assert_array_equal(norm.indptr, s.indptr)
    again = row_normalize(norm)
    np.testing.assert_allclose(again.data, norm.data, rtol=0, atol=1e-15)


# -- stacking -----------------------------------------------------------------


def test_stack_shapes():
    mats = [SparseMatrix.identity(4)] * 3
    assert stack_vertical(mats).shape == (12, 4)
    assert stack_horizontal(mats).shape == (4, 12)


def test_single_matrix_stacks_unchanged(rng):
    m = random_sparse(rng, 5, 5)
    assert stack_vertical([m]) == m
    assert stack_horizontal([m]) == m


def test_stack_index_mapping(rng):
    n = 6
    mats = [random_sparse(rng, n, n, 0.3) for _ in range(4)]
    v, h = stack_vertical(mats).to_dense(), stack_horizontal(mats).to_dense()
    for r, m in enumerate(mats):
        rows, cols, vals = m.coo()
        for i, j, x in zip(rows, cols, vals):
            assert v[r * n + i, j] == x
            assert h[i, r * n + j] == x
    assert np.count_nonzero(v) == sum(m.nnz for m in mats) == np.count_nonzero(h)


def test_horizontal_is_transpose_of_vertical_of_transposes(rng):
    mats = [random_sparse(rng, 5, 5, 0.3) for _ in range(3)]
    assert stack_horizontal(mats).T == stack_vertical([m.T for m in mats])


def test_vertical_slices_recover_blocks(rng):
    n = 5
    mats = [random_sparse(rng, n, n, 0.4) for _ in range(3)]
    v = stack_vertical(mats)
    for r, m in enumerate(mats):
        assert v.take_rows(np.arange(r * n, (r + 1) * n)) == m


def test_stack_shape_mismatch():
    with pytest.raises(DimensionError):
        stack_vertical([SparseMatrix.identity(3), SparseMatrix.identity(4)])
    with pytest.raises(DimensionError):
        stack_horizontal([SparseMatrix.zeros(2, 3)])
