"""A small reverse-mode tape over the operations used by the models.

Every op takes :class:`Var` instances or plain arrays (treated as constants)
and returns a :class:`Var`. Calling :func:`backward` on a scalar result walks
the recorded graph in reverse topological order.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, IntegrityError
from .sparse import SparseMatrix, dense_contract, spmm as _spmm

__all__ = [
    "Var",
    "backward",
    "spmm",
    "contract",
    "reshape",
    "add",
    "mul",
    "matmul",
    "relu",
    "take_rows",
    "scatter_rows",
    "sum_squares",
    "scale",
    "total",
    "basis_combine",
    "block_assemble",
    "diag_embed",
    "relation_transform",
    "softmax_cross_entropy",
    "sigmoid_bce",
    "distmult",
]


class Var:
    """A node in the computation graph.

    Parameters are leaves created by a :class:`~relgcn.training.ParamStore`
    (``param=True``); constants never enter the graph.
    """

    __slots__ = ("value", "parents", "backward_fn", "name", "param", "tracked")

    def __init__(self, value, parents=(), backward_fn=None, name=None, param=False):
        self.value = value
        self.parents = parents
        self.backward_fn = backward_fn
        self.name = name
        self.param = param
        self.tracked = param or any(p.tracked for p in parents)

    @property
    def shape(self):
        return np.shape(self.value)

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"Var({label}shape={self.shape})"


def _val(x):
    return x.value if isinstance(x, Var) else x


def _node(value, inputs, fn):
    """Wrap an op result; ``fn(g)`` returns one gradient per entry of ``inputs``."""
    parents = tuple(x for x in inputs if isinstance(x, Var) and x.tracked)
    if not parents:
        return Var(value)
    mask = [isinstance(x, Var) and x.tracked for x in inputs]

    def bw(g):
        grads = fn(g)
        return [gr for gr, m in zip(grads, mask) if m]

    return Var(value, parents, bw)


def _needs(x):
    return isinstance(x, Var) and x.tracked


def _unbroadcast(g, shape):
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def backward(loss: Var, params=None) -> dict:
    """Gradients of scalar ``loss`` for every parameter leaf reached.

    ``params`` (a mapping name -> Var, e.g. a ParamStore) lists the
    registered parameters. Reaching a parameter leaf that is not registered
    raises :class:`IntegrityError`. Registered parameters the loss does not
    depend on get zero gradients.
    """
    if np.ndim(loss.value) != 0:
        raise DimensionError("backward needs a scalar loss")
    order, seen, stack = [], set(), [(loss, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    grads = {id(loss): np.ones_like(loss.value, dtype=np.float64)}
    leaves = {}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if node.param:
            leaves[node.name] = (node, g)
            continue
        if g is None or node.backward_fn is None:
            continue
        for p, pg in zip(node.parents, node.backward_fn(g)):
            if pg is None:
                continue
            k = id(p)
            grads[k] = pg if k not in grads else grads[k] + pg
    registry = dict(params.items()) if params is not None else {}
    out = {}
    for name, (leaf, g) in leaves.items():
        if params is not None and registry.get(name) is not leaf:
            raise IntegrityError(f"parameter {name!r} is not registered")
        out[name] = np.zeros_like(leaf.value) if g is None else g
    for name, var in registry.items():
        out.setdefault(name, np.zeros_like(var.value))
    return out


def spmm(s: SparseMatrix, x):
    xv = _val(x)
    return _node(_spmm(s, xv), [x], lambda g: [_spmm(s.T, g)])


def contract(subscripts, a, b):
    av, bv = _val(a), _val(b)
    out = dense_contract(subscripts, av, bv)
    key = subscripts.replace(" ", "").replace("→", "->")

    def bw(g):
        if key == "ni,io->no":
            return [g @ bv.T if _needs(a) else None, av.T @ g if _needs(b) else None]
        if key == "ni,rio->rno":
            da = np.einsum("rno,rio->ni", g, bv) if _needs(a) else None
            db = np.matmul(av.T[None], g) if _needs(b) else None
            return [da, db]
        # rio,rni->no ; a = W, b = per-relation messages
        dw = np.matmul(bv.transpose(0, 2, 1), g[None]) if _needs(a) else None
        dx = np.matmul(g[None], av.transpose(0, 2, 1)) if _needs(b) else None
        return [dw, dx]

    return _node(out, [a, b], bw)


def reshape(x, shape):
    xv = _val(x)
    return _node(np.reshape(xv, shape), [x], lambda g: [np.reshape(g, np.shape(xv))])


def add(a, b):
    av, bv = _val(a), _val(b)
    return _node(av + bv, [a, b], lambda g: [_unbroadcast(g, np.shape(av)), _unbroadcast(g, np.shape(bv))])


def mul(a, b):
    av, bv = _val(a), _val(b)

    def bw(g):
        return [
            _unbroadcast(g * bv, np.shape(av)) if _needs(a) else None,
            _unbroadcast(g * av, np.shape(bv)) if _needs(b) else None,
        ]

    return _node(av * bv, [a, b], bw)


def scale(x, c: float):
    return _node(_val(x) * c, [x], lambda g: [g * c])


def matmul(a, b):
    av, bv = _val(a), _val(b)
    if av.shape[-1] != bv.shape[0]:
        raise DimensionError(f"matmul: {av.shape} @ {bv.shape}")
    return _node(
        av @ bv,
        [a, b],
        lambda g: [g @ bv.T if _needs(a) else None, av.T @ g if _needs(b) else None],
    )


def relu(x):
    xv = _val(x)
    mask = xv > 0
    return _node(np.where(mask, xv, 0.0), [x], lambda g: [g * mask])


def _scatter_matrix(idx, n):
    idx = np.asarray(idx, dtype=np.int64)
    return SparseMatrix.from_coo(idx, np.arange(idx.size), 1.0, (n, idx.size))


def take_rows(x, idx):
    """``x[idx]`` for a 2-D ``x``; the backward pass sums repeated rows."""
    xv = _val(x)
    idx = np.asarray(idx, dtype=np.int64)
    return _node(xv[idx], [x], lambda g: [_spmm(_scatter_matrix(idx, xv.shape[0]), g)])


def scatter_rows(x, idx, n):
    """Sum rows of ``x`` into ``n`` output rows: ``out[idx[k]] += x[k]``."""
    idx = np.asarray(idx, dtype=np.int64)
    out = _spmm(_scatter_matrix(idx, n), _val(x))
    return _node(out, [x], lambda g: [g[idx]])


def total(x):
    xv = _val(x)
    return _node(np.sum(xv), [x], lambda g: [np.full(np.shape(xv), g)])


def sum_squares(x):
    xv = _val(x)
    return _node(np.sum(xv * xv), [x], lambda g: [2.0 * g * xv])


def basis_combine(coeffs, bases):
    """``W_r = sum_b C[r, b] V_b`` for ``C`` of shape (R, B), ``V`` of shape (B, I, O)."""
    cv, vv = _val(coeffs), _val(bases)
    b, i, o = vv.shape
    w = (cv @ vv.reshape(b, i * o)).reshape(cv.shape[0], i, o)

    def bw(g):
        g2 = g.reshape(g.shape[0], i * o)
        return [
            g2 @ vv.reshape(b, i * o).T if _needs(coeffs) else None,
            (cv.T @ g2).reshape(b, i, o) if _needs(bases) else None,
        ]

    return _node(w, [coeffs, bases], bw)


def block_assemble(blocks, self_weight):
    """Full ``(R+, I, O)`` tensor from diagonal blocks plus a dense self-loop matrix.

    ``blocks`` has shape ``(R+ - 1, B, I/B, O/B)`` and covers every relation
    but the last (the self-loop), whose matrix is ``self_weight``.
    """
    qv, sv = _val(blocks), _val(self_weight)
    r, nb, bi, bo = qv.shape
    w = np.zeros((r + 1, nb * bi, nb * bo))
    for k in range(nb):
        w[:r, k * bi:(k + 1) * bi, k * bo:(k + 1) * bo] = qv[:, k]
    w[r] = sv

    def bw(g):
        dq = None
        if _needs(blocks):
            dq = np.stack([g[:r, k * bi:(k + 1) * bi, k * bo:(k + 1) * bo] for k in range(nb)], axis=1)
        return [dq, g[r] if _needs(self_weight) else None]

    return _node(w, [blocks, self_weight], bw)


def diag_embed(w):
    wv = _val(w)
    r, d = wv.shape
    out = np.zeros((r, d, d))
    idx = np.arange(d)
    out[:, idx, idx] = wv
    return _node(out, [w], lambda g: [g[:, idx, idx]])


def _groups(rel, num_relations):
    """Contiguous ``(relation, start, stop)`` runs of a sorted relation index array."""
    bounds = np.searchsorted(rel, np.arange(num_relations + 1))
    return [(r, bounds[r], bounds[r + 1]) for r in range(num_relations) if bounds[r + 1] > bounds[r]]


def relation_transform(x, rel, kind, *weights):
    """Apply the weight of relation ``rel[k]`` to row ``k`` of ``x``.

    ``rel`` must be sorted. ``kind`` selects how ``weights`` are read:

    ``"full"``
        ``weights = (W,)`` with ``W`` of shape ``(R+, I, O)``;
    ``"block"``
        ``weights = (Q, S)``, blocks ``(R+ - 1, B, I/B, O/B)`` and a dense
        self-loop matrix ``S`` used for relation ``R+ - 1``;
    ``"diagonal"``
        ``weights = (w,)`` of shape ``(R+, D)``.
    """
    xv = _val(x)
    rel = np.asarray(rel, dtype=np.int64)
    k = xv.shape[0]
    if kind == "diagonal":
        (w,) = weights
        wv = _val(w)
        gathered = wv[rel]
        out = xv * gathered

        def bw_diag(g):
            dx = g * gathered if _needs(x) else None
            dw = _spmm(_scatter_matrix(rel, wv.shape[0]), g * xv) if _needs(w) else None
            return [dx, dw]

        return _node(out, [x, w], bw_diag)

    if kind == "full":
        (w,) = weights
        wv = _val(w)
        nrel = wv.shape[0]
        out = np.zeros((k, wv.shape[2]))
        groups = _groups(rel, nrel)
        for r, a, b in groups:
            out[a:b] = xv[a:b] @ wv[r]

        def bw_full(g):
            dx = np.zeros_like(xv) if _needs(x) else None
            dw = np.zeros_like(wv) if _needs(w) else None
            for r, a, b in groups:
                if dx is not None:
                    dx[a:b] = g[a:b] @ wv[r].T
                if dw is not None:
                    dw[r] = xv[a:b].T @ g[a:b]
            return [dx, dw]

        return _node(out, [x, w], bw_full)

    if kind == "block":
        q, s = weights
        qv, sv = _val(q), _val(s)
        nrel, nb, bi, bo = qv.shape
        out = np.zeros((k, nb * bo))
        groups = _groups(rel, nrel + 1)
        for r, a, b in groups:
            if r == nrel:
                out[a:b] = xv[a:b] @ sv
            else:
                out[a:b] = np.einsum("kbi,bio->kbo", xv[a:b].reshape(-1, nb, bi), qv[r]).reshape(-1, nb * bo)

        def bw_block(g):
            dx = np.zeros_like(xv) if _needs(x) else None
            dq = np.zeros_like(qv) if _needs(q) else None
            ds = np.zeros_like(sv) if _needs(s) else None
            for r, a, b in groups:
                if r == nrel:
                    if dx is not None:
                        dx[a:b] = g[a:b] @ sv.T
                    if ds is not None:
                        ds += xv[a:b].T @ g[a:b]
                    continue
                gb = g[a:b].reshape(-1, nb, bo)
                xb = xv[a:b].reshape(-1, nb, bi)
                if dx is not None:
                    dx[a:b] = np.einsum("kbo,bio->kbi", gb, qv[r]).reshape(-1, nb * bi)
                if dq is not None:
                    dq[r] = np.einsum("kbi,kbo->bio", xb, gb)
            return [dx, dq, ds]

        return _node(out, [x, q, s], bw_block)

    raise ValueError(f"unknown relation weight kind {kind!r}")


def softmax_cross_entropy(logits, rows, targets):
    """Summed cross entropy of softmax(``logits[rows]``) against class ``targets``.

    Returns ``(loss_var, probabilities)``; probabilities cover all rows.
    """
    zv = _val(logits)
    rows = np.asarray(rows, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.int64)
    shifted = zv - zv.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logsum
    probs = np.exp(logp)
    loss = -np.sum(logp[rows, targets])

    def bw(g):
        d = np.zeros_like(zv)
        d[rows] = probs[rows]
        d[rows, targets] -= 1.0
        return [g * d]

    return _node(np.float64(loss), [logits], bw), probs


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def sigmoid_bce(scores, labels):
    """Summed binary cross entropy with logits, evaluated in log-space."""
    xv = _val(scores)
    y = np.asarray(labels, dtype=np.float64)
    loss = -np.sum(y * _log_sigmoid(xv) + (1.0 - y) * _log_sigmoid(-xv))
    sig = np.exp(_log_sigmoid(xv))
    return _node(np.float64(loss), [scores], lambda g: [g * (sig - y)])


def distmult(entities, relations, triples):
    """``sum_i e_s[i] * r[i] * e_o[i]`` for each row of ``triples``."""
    ev, rv = _val(entities), _val(relations)
    t = np.asarray(triples, dtype=np.int64)
    s, r, o = t[:, 0], t[:, 1], t[:, 2]
    es, rr, eo = ev[s], rv[r], ev[o]
    out = np.sum(es * rr * eo, axis=1)

    def bw(g):
        g = g[:, None]
        de = dr = None
        if _needs(entities):
            n = ev.shape[0]
            de = _spmm(_scatter_matrix(s, n), g * rr * eo) + _spmm(_scatter_matrix(o, n), g * es * rr)
        if _needs(relations):
            dr = _spmm(_scatter_matrix(r, rv.shape[0]), g * es * eo)
        return [de, dr]

    return _node(out, [entities, relations], bw)
