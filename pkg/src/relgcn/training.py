"""Parameters, initialisers, losses, Adam and gradient verification."""

from __future__ import annotations

import os
import struct
import tempfile
from collections.abc import Mapping

import numpy as np

from . import autodiff as ad
from .autodiff import Var
from .errors import DataError, DimensionError, IntegrityError, UsageError

__all__ = [
    "ParamStore",
    "schlichtkrull_init",
    "glorot_init",
    "kaiming_init",
    "standard_normal_init",
    "nc_loss",
    "lp_loss",
    "Adam",
    "gradient_check",
    "split_seeds",
    "save_checkpoint",
    "load_checkpoint",
]


class ParamStore(Mapping):
    """Ordered collection of named parameter leaves."""

    def __init__(self):
        self._vars = {}

    def add(self, name: str, value) -> Var:
        if name in self._vars:
            raise UsageError(f"parameter {name!r} already registered")
        v = Var(np.array(value, dtype=np.float64), name=name, param=True)
        self._vars[name] = v
        return v

    def __getitem__(self, name):
        return self._vars[name]

    def __iter__(self):
        return iter(self._vars)

    def __len__(self):
        return len(self._vars)

    def values_dict(self):
        return {k: v.value.copy() for k, v in self._vars.items()}

    def load(self, arrays: Mapping):
        for name, v in self._vars.items():
            if name not in arrays:
                raise IntegrityError(f"missing tensor {name!r}")
            a = np.asarray(arrays[name], dtype=np.float64)
            if a.shape != v.value.shape:
                raise DimensionError(f"tensor {name!r}: expected {v.value.shape}, got {a.shape}")
            v.value = a.copy()

    def param_count(self):
        return int(sum(v.value.size for v in self._vars.values()))


# -- initialisation -----------------------------------------------------------


def _fans_ok(*fans):
    if any(f <= 0 for f in fans):
        raise UsageError(f"fans must be positive, got {fans}")


def schlichtkrull_init(shape, fan_in, fan_out, gain=1.0, kind="normal", rng=None):
    """Draw with standard deviation ``gain * 3 / sqrt(fan_in + fan_out)``.

    ``kind="uniform"`` samples ``U(-a, a)`` with ``a = std * sqrt(3)`` so that
    both kinds share the same standard deviation.
    """
    _fans_ok(fan_in, fan_out)
    if gain <= 0:
        raise UsageError("gain must be positive")
    std = gain * 3.0 / np.sqrt(fan_in + fan_out)
    if kind == "normal":
        return rng.normal(0.0, std, size=shape)
    if kind == "uniform":
        a = std * np.sqrt(3.0)
        return rng.uniform(-a, a, size=shape)
    raise UsageError(f"unknown distribution {kind!r}")


def glorot_init(shape, gain=1.0, rng=None, fan_in=None, fan_out=None):
    """Glorot/Xavier uniform, bound ``gain * sqrt(6 / (fan_in + fan_out))``.

    Fans default to the last two axes of ``shape``.
    """
    fan_in = shape[-2] if fan_in is None else fan_in
    fan_out = shape[-1] if fan_out is None else fan_out
    _fans_ok(fan_in, fan_out)
    bound = gain * np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def kaiming_init(shape, fan_in=None, gain=1.0, rng=None):
    """Normal with std ``gain / sqrt(fan_in)``; ``gain=sqrt(2)`` is He init."""
    fan_in = shape[-1] if fan_in is None else fan_in
    _fans_ok(fan_in)
    return rng.normal(0.0, gain / np.sqrt(fan_in), size=shape)


def standard_normal_init(shape, rng=None):
    return rng.standard_normal(size=shape)


# -- losses ------------------------------------------------------------------


def nc_loss(probs, entities, classes):
    """Summed categorical cross entropy over labelled rows.

    Parameters
    ----------
    probs : ndarray, shape (N, K)
        Softmax output; rows must sum to one.
    entities, classes : array_like of int
        Labelled rows and their classes.

    Returns
    -------
    loss : float
    grad : ndarray, shape (N, K)
        Gradient with respect to the pre-softmax logits: ``probs - onehot``
        on labelled rows, zero elsewhere.
    """
    probs = np.asarray(probs, dtype=np.float64)
    entities = np.asarray(entities, dtype=np.int64)
    classes = np.asarray(classes, dtype=np.int64)
    n, k = probs.shape
    if not np.allclose(probs.sum(axis=1), 1.0, rtol=0, atol=1e-9):
        raise DimensionError("probability rows must sum to 1")
    if entities.size and (entities.min() < 0 or entities.max() >= n):
        raise IndexError("labelled row out of range")
    if classes.size and (classes.min() < 0 or classes.max() >= k):
        raise IndexError("class id out of range")
    with np.errstate(divide="ignore"):
        loss = -np.sum(np.log(probs[entities, classes]))
    grad = np.zeros_like(probs)
    grad[entities] = probs[entities]
    grad[entities, classes] -= 1.0
    return float(loss), grad


def lp_loss(scores, labels):
    """Summed binary cross entropy of logistic scores; returns ``(loss, dL/dscores)``."""
    x = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if not np.isfinite(x).all():
        raise UsageError("scores must be finite")
    node = ad.sigmoid_bce(Var(x, name="scores", param=True), y)
    grads = ad.backward(node)
    return float(node.value), grads["scores"]


# -- optimisation ------------------------------------------------------------


class Adam:
    """Adam with bias correction. Updates the store's values in place."""

    def __init__(self, params: ParamStore, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v.value) for k, v in params.items()}
        self.v = {k: np.zeros_like(v.value) for k, v in params.items()}

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for name, var in self.params.items():
            g = grads.get(name)
            if g is None:
                continue
            m, v = self.m[name], self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            var.value = var.value - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def gradient_check(loss_fn, params: ParamStore, h=1e-5, floor=1e-6):
    """Compare tape gradients with central differences for every entry.

    ``loss_fn()`` must rebuild the forward pass from ``params`` and return a
    scalar :class:`Var`. Returns ``(max_relative_error, report)`` where
    ``report`` maps parameter names to their own maximum error.
    """
    analytic = ad.backward(loss_fn(), params)
    report = {}
    for name, var in params.items():
        base = var.value
        flat = base.ravel()
        worst = 0.0
        for i in range(flat.size):
            plus = flat.copy()
            plus[i] += h
            var.value = plus.reshape(base.shape)
            lp = float(loss_fn().value)
            minus = flat.copy()
            minus[i] -= h
            var.value = minus.reshape(base.shape)
            lm = float(loss_fn().value)
            numeric = (lp - lm) / (2 * h)
            a = analytic[name].ravel()[i]
            err = abs(a - numeric) / max(abs(a), abs(numeric), floor)
            worst = max(worst, err)
        var.value = base
        report[name] = worst
    return max(report.values(), default=0.0), report


def split_seeds(master: int) -> dict:
    """Independent generators for init, dropout, sampling and corruption."""
    names = ("init", "dropout", "sampling", "corruption")
    children = np.random.SeedSequence(int(master)).spawn(len(names))
    return {n: np.random.default_rng(s) for n, s in zip(names, children)}


# -- checkpoints -------------------------------------------------------------

MAGIC = b"RGCNCKPT"
VERSION = 1


def atomic_write(path, payload: bytes):
    """Write ``payload`` to a temp file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_checkpoint(path, tensors: Mapping, seed: int):
    """Write named float64 tensors and the master seed (see docs/formats.md)."""
    chunks = [MAGIC, struct.pack("<IqI", VERSION, int(seed), len(tensors))]
    for name, value in tensors.items():
        a = np.asarray(value.value if isinstance(value, Var) else value, dtype="<f8")
        key = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(key)) + key)
        chunks.append(struct.pack("<I", a.ndim) + struct.pack(f"<{a.ndim}Q", *a.shape))
        chunks.append(np.ascontiguousarray(a).tobytes())
    atomic_write(path, b"".join(chunks))


def load_checkpoint(path):
    """Inverse of :func:`save_checkpoint`; returns ``(tensors, seed)``."""
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    if buf[:8] != MAGIC:
        raise DataError(f"{path}: not a checkpoint file")
    version, seed, count = struct.unpack_from("<IqI", buf, 8)
    if version != VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    off = 8 + struct.calcsize("<IqI")
    tensors = {}
    try:
        for _ in range(count):
            (klen,) = struct.unpack_from("<I", buf, off)
            off += 4
            name = buf[off:off + klen].decode("utf-8")
            off += klen
            (ndim,) = struct.unpack_from("<I", buf, off)
            off += 4
            shape = struct.unpack_from(f"<{ndim}Q", buf, off)
            off += 8 * ndim
            size = int(np.prod(shape, dtype=np.int64))
            tensors[name] = np.frombuffer(buf, dtype="<f8", count=size, offset=off).reshape(shape).astype(np.float64)
            off += 8 * size
    except (struct.error, ValueError) as exc:
        raise DataError(f"{path}: truncated checkpoint") from exc
    return tensors, seed
