"""Differentiable layers: 1-D convolution, pooling, dense, softmax,
dropout, Gaussian noise, embedding lookup, and the gated recurrent cell
with optional convolutional state transitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..base import check_random_state
from .tensor import ShapeError, Tensor

__all__ = [
    "conv1d",
    "maxpool1d",
    "global_maxpool",
    "dense",
    "relu",
    "softmax",
    "dropout",
    "gaussian_noise",
    "embedding_lookup",
    "LstmParams",
    "LstmState",
    "init_lstm_params",
    "lstm_step",
    "lstm_forward",
]


def _batched(x: Tensor) -> tuple[np.ndarray, bool]:
    if x.data.ndim == 2:
        return x.data[None, ...], True
    if x.data.ndim == 3:
        return x.data, False
    raise ShapeError(f"expected (L,C) or (B,L,C), got {x.data.shape}")


def conv1d(x: Tensor, kernels: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Same-padded 1-D convolution along the length axis.

    x: (L, C) or (B, L, C); kernels: (K, C, F); bias: (F,).  Output length
    equals input length; zero padding is split (K-1)//2 left, remainder
    right, so even widths pad one extra column on the right.
    """
    xd, single = _batched(x)
    B, L, C = xd.shape
    if kernels.data.ndim != 3:
        raise ShapeError(f"kernels must be (K, C, F), got {kernels.data.shape}")
    K, Ck, F = kernels.data.shape
    if Ck != C:
        raise ShapeError(f"kernel channels {Ck} do not match input channels {C}")
    if bias is not None and bias.data.shape != (F,):
        raise ShapeError(f"bias must be ({F},), got {bias.data.shape}")
    left = (K - 1) // 2
    right = K - 1 - left
    xp = np.pad(xd, ((0, 0), (left, right), (0, 0)))
    s0, s1, s2 = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp, shape=(B, L, K, C), strides=(s0, s1, s1, s2)
    )
    cols = windows.reshape(B, L, K * C).copy()
    wf = kernels.data.reshape(K * C, F)
    out = cols @ wf
    if bias is not None:
        out = out + bias.data
    if single:
        out = out[0]

    def backward(g):
        gb = g[None, ...] if single else g
        if kernels.requires_grad:
            kernels._accumulate(
                np.einsum("blk,blf->kf", cols, gb).reshape(K, C, F)
            )
        if bias is not None and bias.requires_grad:
            bias._accumulate(gb.sum(axis=(0, 1)))
        if x.requires_grad:
            dcols = (gb @ wf.T).reshape(B, L, K, C)
            dxp = np.zeros_like(xp)
            for k in range(K):
                dxp[:, k : k + L, :] += dcols[:, :, k, :]
            dx = dxp[:, left : left + L, :]
            x._accumulate(dx[0] if single else dx)

    parents = (x, kernels) if bias is None else (x, kernels, bias)
    return Tensor._op(out, parents, backward)


def maxpool1d(x: Tensor, pool: int) -> Tensor:
    """Max over non-overlapping windows of ``pool`` along the length axis.

    Output length is ceil(L / pool); a partial final window is allowed.
    The gradient routes to the first maximum position in each window.
    """
    if pool < 1:
        raise ValueError(f"pool must be >= 1, got {pool}")
    xd, single = _batched(x)
    B, L, F = xd.shape
    n = -(-L // pool)
    pad = n * pool - L
    xp = np.pad(xd, ((0, 0), (0, pad), (0, 0)), constant_values=-np.inf)
    windows = xp.reshape(B, n, pool, F)
    argmax = windows.argmax(axis=2)
    out = np.take_along_axis(windows, argmax[:, :, None, :], axis=2)[:, :, 0, :]

    def backward(g):
        gb = g[None, ...] if single else g
        dwin = np.zeros_like(windows)
        np.put_along_axis(dwin, argmax[:, :, None, :], gb[:, :, None, :], axis=2)
        dx = dwin.reshape(B, n * pool, F)[:, :L, :]
        x._accumulate(dx[0] if single else dx)

    return Tensor._op(out[0] if single else out, (x,), backward)


def global_maxpool(x: Tensor) -> Tensor:
    """Column-wise maximum over the whole length axis: (B, L, F) -> (B, F)."""
    xd, single = _batched(x)
    argmax = xd.argmax(axis=1)
    out = np.take_along_axis(xd, argmax[:, None, :], axis=1)[:, 0, :]

    def backward(g):
        gb = g[None, ...] if single else g
        dx = np.zeros_like(xd)
        np.put_along_axis(dx, argmax[:, None, :], gb[:, None, :], axis=1)
        x._accumulate(dx[0] if single else dx)

    return Tensor._op(out[0] if single else out, (x,), backward)


def dense(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Affine map x @ weight + bias."""
    if x.data.ndim == 1:
        out = x.reshape(1, -1) @ weight
        out = (out + bias) if bias is not None else out
        return out.reshape(weight.data.shape[1])
    out = x @ weight
    return (out + bias) if bias is not None else out


def relu(x: Tensor) -> Tensor:
    return x.relu()


def softmax(x: Tensor) -> Tensor:
    """Row-stabilized softmax over the last axis."""
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=-1, keepdims=True)
        x._accumulate((g - dot) * out)

    return Tensor._op(out, (x,), backward)


def dropout(x: Tensor, rate: float, train_mode: bool, rng=None) -> Tensor:
    """Inverted dropout: identity in eval mode, survivors scaled by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not train_mode or rate == 0.0:
        return x
    rng = check_random_state(rng)
    mask = (rng.random(x.data.shape) >= rate).astype(x.data.dtype) / (1.0 - rate)

    def backward(g):
        x._accumulate(g * mask)

    return Tensor._op(x.data * mask, (x,), backward)


def gaussian_noise(x: Tensor, sigma: float, train_mode: bool, rng=None) -> Tensor:
    """Additive zero-mean Gaussian noise in train mode; identity in eval."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if not train_mode or sigma == 0.0:
        return x
    rng = check_random_state(rng)
    noise = rng.normal(0.0, sigma, size=x.data.shape).astype(x.data.dtype)

    def backward(g):
        x._accumulate(g)

    return Tensor._op(x.data + noise, (x,), backward)


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of (V, D) ``table`` by integer ids of any shape."""
    ids = np.asarray(ids)
    if ids.min(initial=0) < 0 or (ids.size and ids.max() >= table.data.shape[0]):
        raise ShapeError("embedding ids out of range")

    def backward(g):
        if table.requires_grad:
            full = np.zeros_like(table.data)
            np.add.at(full, ids.reshape(-1), g.reshape(-1, table.data.shape[1]))
            table._accumulate(full)

    return Tensor._op(table.data[ids], (table,), backward)


_GATES = ("i", "f", "c", "o")


@dataclass
class LstmParams:
    """Per-gate input/state transforms, biases, and optional peephole weights.

    ``mode`` selects how the transforms apply: 'dense' uses full matrix
    products (the width-1 convolution special case); 'conv' uses
    same-padded 1-D convolutions of one shared odd width, so the state
    keeps a length axis.
    """

    w_x: dict
    w_h: dict
    b: dict
    w_c: Optional[dict] = None
    mode: str = "dense"

    @property
    def peephole(self) -> bool:
        return self.w_c is not None

    def tensors(self) -> dict:
        out = {}
        for gate in _GATES:
            out[f"w_x{gate}"] = self.w_x[gate]
            out[f"w_h{gate}"] = self.w_h[gate]
            out[f"b_{gate}"] = self.b[gate]
        if self.w_c is not None:
            for gate in ("i", "f", "o"):
                out[f"w_c{gate}"] = self.w_c[gate]
        return out


@dataclass
class LstmState:
    hidden: Tensor
    cell: Tensor


def init_lstm_params(
    input_dim: int,
    units: int,
    mode: str = "dense",
    kernel_width: int = 3,
    seq_len: Optional[int] = None,
    peephole: bool = False,
    rng=None,
    dtype=np.float32,
) -> LstmParams:
    rng = check_random_state(rng)
    if mode not in ("dense", "conv"):
        raise ValueError(f"mode must be 'dense' or 'conv', got {mode!r}")
    if mode == "conv":
        if kernel_width % 2 != 1:
            raise ValueError(f"conv mode needs an odd kernel width, got {kernel_width}")
        if peephole and seq_len is None:
            raise ValueError("conv mode with peepholes needs seq_len")

    def glorot(shape, fan_in, fan_out):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return Tensor(rng.uniform(-bound, bound, size=shape).astype(dtype), requires_grad=True)

    w_x, w_h, b = {}, {}, {}
    for gate in _GATES:
        if mode == "dense":
            w_x[gate] = glorot((input_dim, units), input_dim, units)
            w_h[gate] = glorot((units, units), units, units)
        else:
            w_x[gate] = glorot((kernel_width, input_dim, units), kernel_width * input_dim, units)
            w_h[gate] = glorot((kernel_width, units, units), kernel_width * units, units)
        b[gate] = Tensor(np.zeros(units, dtype=dtype), requires_grad=True)
    w_c = None
    if peephole:
        shape = (units,) if mode == "dense" else (seq_len, units)
        w_c = {g: Tensor(np.zeros(shape, dtype=dtype), requires_grad=True) for g in ("i", "f", "o")}
    return LstmParams(w_x=w_x, w_h=w_h, b=b, w_c=w_c, mode=mode)


def _transform(x: Tensor, w: Tensor, mode: str) -> Tensor:
    if mode == "dense":
        return dense(x, w)
    return conv1d(x, w)


def lstm_step(x: Tensor, state: LstmState, params: LstmParams):
    """One recurrent update.

    Gates are sigmoids of input/state transforms (plus peephole products
    with the cell when enabled); the new cell blends the previous cell and
    the tanh candidate, and the hidden output is the output gate times the
    tanh of the new cell.  Returns (new_state, gate_dict).
    """
    h, c = state.hidden, state.cell
    mode = params.mode
    pre_i = _transform(x, params.w_x["i"], mode) + _transform(h, params.w_h["i"], mode) + params.b["i"]
    pre_f = _transform(x, params.w_x["f"], mode) + _transform(h, params.w_h["f"], mode) + params.b["f"]
    if params.peephole:
        pre_i = pre_i + params.w_c["i"] * c
        pre_f = pre_f + params.w_c["f"] * c
    i = pre_i.sigmoid()
    f = pre_f.sigmoid()
    candidate = (
        _transform(x, params.w_x["c"], mode) + _transform(h, params.w_h["c"], mode) + params.b["c"]
    ).tanh()
    c_new = f * c + i * candidate
    pre_o = _transform(x, params.w_x["o"], mode) + _transform(h, params.w_h["o"], mode) + params.b["o"]
    if params.peephole:
        pre_o = pre_o + params.w_c["o"] * c_new
    o = pre_o.sigmoid()
    h_new = o * c_new.tanh()
    return LstmState(hidden=h_new, cell=c_new), {"i": i, "f": f, "o": o}


def lstm_forward(xs, params: LstmParams, state: Optional[LstmState] = None):
    """Run lstm_step over a sequence of inputs; returns (states, final_state).

    ``xs`` is an iterable of step inputs, each shaped as one lstm_step
    input.  The initial state defaults to zeros matching the first step.
    """
    xs = list(xs)
    if not xs:
        raise ValueError("lstm_forward needs at least one step input")
    if state is None:
        state = _zero_state(xs[0], params)
    hidden_states = []
    for x in xs:
        state, _ = lstm_step(x, state, params)
        hidden_states.append(state.hidden)
    return hidden_states, state


def _zero_state(x: Tensor, params: LstmParams) -> LstmState:
    units = params.b["i"].data.shape[0]
    dtype = x.data.dtype
    if params.mode == "dense":
        shape = (units,) if x.data.ndim == 1 else (x.data.shape[0], units)
    else:
        if x.data.ndim == 2:
            shape = (x.data.shape[0], units)
        else:
            shape = (x.data.shape[0], x.data.shape[1], units)
    zeros = np.zeros(shape, dtype=dtype)
    return LstmState(hidden=Tensor(zeros), cell=Tensor(zeros.copy()))
