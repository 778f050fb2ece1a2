"""Cross-entropy losses over predicted probability distributions."""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError, Tensor

__all__ = ["cross_entropy_loss", "one_hot"]

_CLAMP = 1e-12


def one_hot(labels, n_classes: int, dtype=np.float32) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.size, n_classes), dtype=dtype)
    out[np.arange(labels.size), labels] = 1.0
    return out


def cross_entropy_loss(pred: Tensor, target: np.ndarray, kind: str = "categorical") -> Tensor:
    """Mean cross-entropy between predicted probabilities and targets.

    categorical: pred is (B, C) (or (C,)) of class probabilities, target
    one-hot of the same shape.  binary: pred is (B,) probabilities of the
    positive class, target in {0, 1}.  Probabilities are clamped to
    [1e-12, 1 - 1e-12] before the logarithm.
    """
    target = np.asarray(target, dtype=pred.data.dtype)
    if kind == "categorical":
        if pred.data.shape != target.shape:
            raise ShapeError(
                f"prediction shape {pred.data.shape} != target shape {target.shape}"
            )
        batch = pred.data.shape[0] if pred.data.ndim == 2 else 1
        p = np.clip(pred.data, _CLAMP, 1.0 - _CLAMP)
        value = -(target * np.log(p)).sum() / batch

        def backward(g):
            inside = (pred.data > _CLAMP) & (pred.data < 1.0 - _CLAMP)
            dp = np.where(inside, -target / p, 0.0) * (g / batch)
            pred._accumulate(dp)

        return Tensor._op(np.asarray(value, dtype=pred.data.dtype), (pred,), backward)

    if kind == "binary":
        if pred.data.shape != target.shape:
            raise ShapeError(
                f"prediction shape {pred.data.shape} != target shape {target.shape}"
            )
        batch = pred.data.size if pred.data.ndim else 1
        p = np.clip(pred.data, _CLAMP, 1.0 - _CLAMP)
        value = -(target * np.log(p) + (1.0 - target) * np.log(1.0 - p)).sum() / batch

        def backward(g):
            inside = (pred.data > _CLAMP) & (pred.data < 1.0 - _CLAMP)
            dp = np.where(inside, -(target / p) + (1.0 - target) / (1.0 - p), 0.0)
            pred._accumulate(dp * (g / batch))

        return Tensor._op(np.asarray(value, dtype=pred.data.dtype), (pred,), backward)

    raise ValueError(f"kind must be 'categorical' or 'binary', got {kind!r}")
