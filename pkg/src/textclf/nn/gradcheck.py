"""Verification oracle: compare analytic gradients with central finite
differences computed in the input's own precision (use float64 tensors
for tight tolerances).
"""

from __future__ import annotations

import numpy as np

__all__ = ["finite_difference_check"]


def finite_difference_check(fn, tensors, eps: float = 1e-5) -> float:
    """Max relative error between analytic and numeric gradients.

    ``fn`` maps the given tensors to a scalar Tensor and must be pure:
    stochastic layers have to be called with a fixed seed so repeated
    evaluations see the same draw.  The relative error denominator is
    floored at 1.0, so tiny gradients are compared absolutely.
    """
    tensors = list(tensors)
    for t in tensors:
        t.zero_grad()
    out = fn(*tensors)
    if out.data.size != 1:
        raise ValueError("finite_difference_check needs a scalar-valued fn")
    out.backward()
    analytic = [
        np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in tensors
    ]

    worst = 0.0
    for tensor, grad in zip(tensors, analytic):
        if not tensor.requires_grad:
            continue
        flat = tensor.data.reshape(-1)
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + eps
            f_plus = float(fn(*tensors).data)
            flat[idx] = original - eps
            f_minus = float(fn(*tensors).data)
            flat[idx] = original
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = float(grad.reshape(-1)[idx])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1.0)
            worst = max(worst, rel)
    for t in tensors:
        t.zero_grad()
    return worst
