"""Dense-tensor layers for the attention denoiser and the parameter estimator.

Feature maps are channel-last float arrays of shape (H, W, C).  Every layer
comes as a forward returning (output, cache) and a matching *_input_grad that
maps an upstream gradient back to the layer input; the finite-difference
harness checks the pair.  Weight gradients are never needed (nothing here is
trained), which keeps the backward passes small.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

__all__ = [
    "conv2d", "conv2d_input_grad",
    "conv_transpose2", "conv_transpose2_input_grad",
    "depthwise3x3", "depthwise3x3_input_grad",
    "layer_norm", "layer_norm_input_grad",
    "gelu", "gelu_input_grad",
    "softmax", "softmax_vjp",
    "linear", "linear_input_grad",
]

LAYER_NORM_EPS = 1e-5


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    hp, wp, c = xp.shape
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    patches = np.empty((ho, wo, kh, kw, c), dtype=xp.dtype)
    for a in range(kh):
        for b in range(kw):
            patches[:, :, a, b, :] = xp[a:a + ho * stride:stride, b:b + wo * stride:stride, :]
    return patches


def conv2d(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None = None,
           stride: int = 1, pad: int = 0, circular: bool = False):
    """2-D convolution (cross-correlation), kernel w of shape (kh, kw, Cin, Cout)."""
    kh, kw, cin, cout = w.shape
    if x.shape[-1] != cin:
        raise ValueError(f"conv2d channel mismatch: input {x.shape[-1]}, kernel {cin}")
    mode = "wrap" if circular else "constant"
    xp = np.pad(x, ((pad, pad), (pad, pad), (0, 0)), mode=mode) if pad else x
    patches = _im2col(xp, kh, kw, stride)
    y = np.tensordot(patches, w, axes=([2, 3, 4], [0, 1, 2]))
    if bias is not None:
        y = y + bias
    cache = (x.shape, xp.shape, w, stride, pad, circular)
    return y, cache


def conv2d_input_grad(dy: np.ndarray, cache) -> np.ndarray:
    x_shape, xp_shape, w, stride, pad, circular = cache
    if circular:
        raise NotImplementedError("input grad for circular padding is not needed")
    kh, kw, cin, _ = w.shape
    ho, wo = dy.shape[:2]
    dpatches = np.einsum("ijo,abco->ijabc", dy, w)
    dxp = np.zeros(xp_shape, dtype=dy.dtype)
    for a in range(kh):
        for b in range(kw):
            dxp[a:a + ho * stride:stride, b:b + wo * stride:stride, :] += dpatches[:, :, a, b, :]
    if pad:
        return dxp[pad:-pad, pad:-pad, :]
    return dxp


def conv_transpose2(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None = None):
    """Stride-2 transposed convolution with a 2x2 kernel (Cin, doubles H and W).

    Kernel shape (2, 2, Cin, Cout); each input pixel paints a disjoint 2x2
    output block, so there is no overlap to resolve.
    """
    h, w_in, cin = x.shape
    if w.shape[:3] != (2, 2, cin):
        raise ValueError(f"conv_transpose2 kernel mismatch: {w.shape} for input C={cin}")
    cout = w.shape[3]
    y = np.einsum("ijc,abco->iajbo", x, w).reshape(2 * h, 2 * w_in, cout)
    if bias is not None:
        y = y + bias
    return y, (x.shape, w)


def conv_transpose2_input_grad(dy: np.ndarray, cache) -> np.ndarray:
    x_shape, w = cache
    h, w_in, _ = x_shape
    cout = w.shape[3]
    dyr = dy.reshape(h, 2, w_in, 2, cout)
    return np.einsum("iajbo,abco->ijc", dyr, w)


def depthwise3x3(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None = None):
    """Per-channel 3x3 convolution, zero padding 1; kernel shape (3, 3, C)."""
    h, w_in, c = x.shape
    if w.shape != (3, 3, c):
        raise ValueError(f"depthwise kernel must be (3,3,{c}), got {w.shape}")
    xp = np.pad(x, ((1, 1), (1, 1), (0, 0)))
    y = np.zeros_like(x)
    for a in range(3):
        for b in range(3):
            y += xp[a:a + h, b:b + w_in, :] * w[a, b]
    if bias is not None:
        y = y + bias
    return y, (x.shape, w)


def depthwise3x3_input_grad(dy: np.ndarray, cache) -> np.ndarray:
    x_shape, w = cache
    h, w_in, _ = x_shape
    dxp = np.zeros((h + 2, w_in + 2, x_shape[2]), dtype=dy.dtype)
    for a in range(3):
        for b in range(3):
            dxp[a:a + h, b:b + w_in, :] += dy * w[a, b]
    return dxp[1:-1, 1:-1, :]


def layer_norm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray):
    """Normalization over the channel (last) axis, per token."""
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = (x - mu) * inv_std
    y = xhat * gamma + beta
    return y, (xhat, inv_std, gamma)


def layer_norm_input_grad(dy: np.ndarray, cache) -> np.ndarray:
    xhat, inv_std, gamma = cache
    dxhat = dy * gamma
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    return inv_std * (dxhat - m1 - xhat * m2)


_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def gelu(x: np.ndarray):
    """Exact (erf-based) GELU."""
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    return x * cdf, (x, cdf)


def gelu_input_grad(dy: np.ndarray, cache) -> np.ndarray:
    x, cdf = cache
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT2PI
    return dy * (cdf + x * pdf)


def softmax(x: np.ndarray, axis: int) -> np.ndarray:
    """Max-subtracted softmax (the reference oracles use the same shift)."""
    shifted = x - np.max(x, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_vjp(dy: np.ndarray, y: np.ndarray, axis: int) -> np.ndarray:
    return y * (dy - np.sum(dy * y, axis=axis, keepdims=True))


def linear(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None = None) -> np.ndarray:
    """Per-token channel map: x[..., Cin] @ w[Cin, Cout] (+ bias)."""
    y = x @ w
    if bias is not None:
        y = y + bias
    return y


def linear_input_grad(dy: np.ndarray, w: np.ndarray) -> np.ndarray:
    return dy @ w.T
