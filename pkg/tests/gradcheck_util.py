"""Central finite-difference gradient checking used across the test suite."""
from __future__ import annotations

import numpy as np

from cmreader.nn import Tensor, backward


def numeric_grad(f, t: Tensor, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of scalar-valued f with respect to t."""
    g = np.zeros_like(t.data)
    flat = t.data.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = f().item()
        flat[i] = orig - h
        lo = f().item()
        flat[i] = orig
        gflat[i] = (hi - lo) / (2 * h)
    return g


def max_rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Worst-entry relative error with an absolute floor for near-zero grads."""
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float((diff / scale).max()) if diff.size else 0.0


def assert_grads_match(loss_fn, params: dict[str, Tensor], tol: float = 1e-3,
                       h: float = 1e-5) -> None:
    """Analytic vs central-difference gradients for every parameter tensor."""
    for p in params.values():
        p.grad = None
    loss = loss_fn()
    backward(loss, params=list(params.values()))
    analytic = {name: p.grad.copy() for name, p in params.items()}
    for name, p in params.items():
        numeric = numeric_grad(loss_fn, p, h=h)
        err = max_rel_error(analytic[name], numeric)
        assert err < tol, f"gradient mismatch for {name}: rel error {err:.2e}"
