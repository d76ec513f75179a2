"""Adam with bias correction and a linear warmup/decay learning-rate schedule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Array, Tensor


@dataclass
class OptimizerState:
    peak_lr: float
    total_steps: int
    warmup_fraction: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: dict[str, Array] = field(default_factory=dict)
    v: dict[str, Array] = field(default_factory=dict)


def lr_schedule(step: int, state: OptimizerState) -> float:
    """Linear warmup from 0 to peak over the first warmup fraction of steps,
    then linear decay back to 0 at `total_steps`."""
    if not 0 <= step <= state.total_steps:
        raise ValueError(f"step {step} outside [0, {state.total_steps}]")
    warm = state.warmup_fraction * state.total_steps
    if warm > 0 and step <= warm:
        return state.peak_lr * step / warm
    if state.total_steps == warm:
        return 0.0
    return state.peak_lr * (state.total_steps - step) / (state.total_steps - warm)


class Adam:
    def __init__(self, params: dict[str, Tensor], peak_lr: float, total_steps: int,
                 warmup_fraction: float = 0.1):
        self.params = params
        self.state = OptimizerState(peak_lr=peak_lr, total_steps=total_steps,
                                    warmup_fraction=warmup_fraction)
        for name, p in params.items():
            self.state.m[name] = np.zeros_like(p.data)
            self.state.v[name] = np.zeros_like(p.data)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = np.zeros_like(p.data)

    def step(self, lr: float | None = None) -> float:
        """One Adam update over all parameters; returns the learning rate used."""
        st = self.state
        for name, p in self.params.items():
            if p.grad is not None and not np.isfinite(p.grad).all():
                raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
        st.step_count += 1
        t = st.step_count
        if lr is None:
            lr = lr_schedule(min(t, st.total_steps), st)
        c1 = 1.0 - st.beta1**t
        c2 = 1.0 - st.beta2**t
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            m = st.m[name]
            v = st.v[name]
            m *= st.beta1
            m += (1.0 - st.beta1) * g
            v *= st.beta2
            v += (1.0 - st.beta2) * (g * g)
            p.data -= lr * (m / c1) / (np.sqrt(v / c2) + st.eps)
        return lr
