"""Dense float64 tensors with reverse-mode automatic differentiation.

A Tensor wraps a numpy array and remembers the operation that produced it;
``backward`` replays the tape in reverse topological order. Only the
operations the models need are implemented, and each op carries a
closed-form vector-Jacobian product so the tape stays short.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Array = np.ndarray


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        parents: tuple["Tensor", ...] = (),
        vjp: Callable[[Array], Sequence[Array | None]] | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._vjp = vjp

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other) -> "Tensor":
        if isinstance(other, (int, float)):
            return _op(self.data + other, (self,), lambda g: (g,))
        return _op(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)),
        )

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return _op(-self.data, (self,), lambda g: (-g,))

    def __sub__(self, other) -> "Tensor":
        if isinstance(other, (int, float)):
            return _op(self.data - other, (self,), lambda g: (g,))
        return _op(
            self.data - other.data,
            (self, other),
            lambda g: (_unbroadcast(g, self.shape), _unbroadcast(-g, other.shape)),
        )

    def __mul__(self, other) -> "Tensor":
        if isinstance(other, (int, float)):
            return _op(self.data * other, (self,), lambda g: (g * other,))
        return _op(
            self.data * other.data,
            (self, other),
            lambda g: (
                _unbroadcast(g * other.data, self.shape),
                _unbroadcast(g * self.data, other.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        if isinstance(other, (int, float)):
            return self * (1.0 / other)
        raise TypeError("tensor/tensor division is not supported")

    def __matmul__(self, other: "Tensor") -> "Tensor":
        a, b = self.data, other.data

        def vjp(g: Array):
            if a.ndim == 1 and b.ndim == 1:  # dot product
                return g * b, g * a
            if a.ndim == 1:  # (k,) @ (..,k,n) -> (..,n)
                ga = _unbroadcast((np.expand_dims(g, -2) @ b.swapaxes(-1, -2)).squeeze(-2), a.shape)
                gb = _unbroadcast(np.expand_dims(a, -1) @ np.expand_dims(g, -2), b.shape)
                return ga, gb
            if b.ndim == 1:  # (..,m,k) @ (k,) -> (..,m)
                ga = _unbroadcast(np.expand_dims(g, -1) @ np.expand_dims(b, -2), a.shape)
                gb = _unbroadcast((a.swapaxes(-1, -2) @ np.expand_dims(g, -1)).squeeze(-1), b.shape)
                return ga, gb
            ga = _unbroadcast(g @ b.swapaxes(-1, -2), a.shape)
            gb = _unbroadcast(a.swapaxes(-1, -2) @ g, b.shape)
            return ga, gb

        return _op(a @ b, (self, other), vjp)

    # -- shape ops ----------------------------------------------------------

    def reshape(self, *shape: int) -> "Tensor":
        old = self.shape
        return _op(self.data.reshape(shape), (self,), lambda g: (g.reshape(old),))

    def swapaxes(self, a: int, b: int) -> "Tensor":
        return _op(self.data.swapaxes(a, b), (self,), lambda g: (g.swapaxes(a, b),))

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        shape = self.shape

        def vjp(g: Array):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return _op(self.data.sum(axis=axis, keepdims=keepdims), (self,), vjp)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            n = self.data.size
        else:
            n = self.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)


def _op(data: Array, parents: tuple[Tensor, ...], vjp) -> Tensor:
    req = any(p.requires_grad for p in parents)
    return Tensor(data, requires_grad=req, parents=parents if req else (), vjp=vjp if req else None)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data) -> Tensor:
    """Trainable leaf tensor."""
    return Tensor(data, requires_grad=True)


# -- nonlinearities and fused ops ------------------------------------------


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return _op(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stabilized softmax; rejects non-finite input."""
    if not np.isfinite(x.data).all():
        raise ValueError("softmax input must be finite")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    p = ex / ex.sum(axis=axis, keepdims=True)

    def vjp(g: Array):
        inner = (g * p).sum(axis=axis, keepdims=True)
        return (p * (g - inner),)

    return _op(p, (x,), vjp)


def masked_softmax(x: Tensor, mask: Array, axis: int = -1) -> Tensor:
    """Softmax along `axis` where positions with mask False get weight exactly 0.

    `mask` broadcasts against x. Raises if any softmax row is fully masked.
    """
    m = np.broadcast_to(mask, x.data.shape)
    if not m.any(axis=axis).all():
        raise ValueError("softmax row has all positions masked")
    shifted = np.where(m, x.data, -np.inf)
    shifted = shifted - shifted.max(axis=axis, keepdims=True)
    ex = np.where(m, np.exp(shifted), 0.0)
    p = ex / ex.sum(axis=axis, keepdims=True)

    def vjp(g: Array):
        inner = (g * p).sum(axis=axis, keepdims=True)
        return (p * (g - inner),)

    return _op(p, (x,), vjp)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    if not np.isfinite(x.data).all():
        raise ValueError("log_softmax input must be finite")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    p = np.exp(out)

    def vjp(g: Array):
        return (g - p * g.sum(axis=axis, keepdims=True),)

    return _op(out, (x,), vjp)


def cross_entropy(logits: Tensor, target: int) -> Tensor:
    """-log softmax(logits)[target] for a 1-d logit vector."""
    n = logits.data.shape[0]
    if logits.ndim != 1:
        raise ValueError("cross_entropy expects a 1-d logit vector")
    if not 0 <= target < n:
        raise IndexError(f"target {target} out of range for {n} logits")
    lsm = log_softmax(logits)
    return -take_rows(lsm, np.array([target])).sum()


def cross_entropy_rows(logits: Tensor, targets: Array, reduction: str = "mean") -> Tensor:
    """Per-row cross entropy for (N, K) logits and N integer targets."""
    n, k = logits.shape
    targets = np.asarray(targets, dtype=np.intp)
    if targets.shape != (n,):
        raise ValueError("targets must have one entry per logit row")
    if targets.min(initial=0) < 0 or targets.max(initial=0) >= k:
        raise IndexError("target index out of range")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    lsm = shifted - lse
    picked = lsm[np.arange(n), targets]
    scale = 1.0 / n if reduction == "mean" else 1.0
    loss = -picked.sum() * scale
    p = np.exp(lsm)

    def vjp(g: Array):
        d = p.copy()
        d[np.arange(n), targets] -= 1.0
        return (d * (float(g) * scale),)

    return _op(loss, (logits,), vjp)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    mu = x.data.mean(axis=-1, keepdims=True)
    var = ((x.data - mu) ** 2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data
    d = x.data.shape[-1]

    def vjp(g: Array):
        lead = tuple(range(g.ndim - 1))
        ggain = (g * xhat).sum(axis=lead)
        gbias = g.sum(axis=lead)
        dxhat = g * gain.data
        dx = inv * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return dx, ggain, gbias

    return _op(out, (x, gain, bias), vjp)


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-rate) so eval is identity."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    keep = rng.random(x.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    factor = keep * scale
    return _op(x.data * factor, (x,), lambda g: (g * factor,))


def take_rows(x: Tensor, indices: Array) -> Tensor:
    """Gather rows along the first axis; repeated indices accumulate gradient."""
    idx = np.asarray(indices, dtype=np.intp)
    shape = x.shape

    def vjp(g: Array):
        gx = np.zeros(shape, dtype=np.float64)
        np.add.at(gx, idx, g)
        return (gx,)

    return _op(x.data[idx], (x,), vjp)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g: Array):
        return tuple(np.split(g, splits, axis=axis))

    return _op(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), vjp)


# -- reverse pass -----------------------------------------------------------


def backward(loss: Tensor, params: Sequence[Tensor] | None = None) -> None:
    """Accumulate d(loss)/d(t) into `t.grad` for every tensor reachable from `loss`.

    `loss` must be scalar. If `params` is given, every listed tensor ends up
    with a gradient buffer even when it does not feed into `loss` (zeros).
    """
    if loss.data.size != 1:
        raise ValueError("backward expects a scalar loss")
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            stack.append((p, False))

    if loss.grad is None:
        loss.grad = np.ones_like(loss.data)
    else:
        loss.grad = loss.grad + np.ones_like(loss.data)
    for node in reversed(topo):
        if node._vjp is None or node.grad is None:
            continue
        for p, g in zip(node._parents, node._vjp(node.grad)):
            if g is None or not p.requires_grad:
                continue
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
            p.grad += g

    if params is not None:
        for p in params:
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
