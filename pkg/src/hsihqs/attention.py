"""Window, shuffle, and channel attention primitives.

A feature map is a channel-last (H, W, C) array.  Window partitioning turns
it into token groups of shape (windows, tokens_per_window, C) with tokens in
row-major order inside each window; shuffling transposes the group and token
axes so that attention inside one "window" spans tokens from all windows.
"""

from __future__ import annotations

import numpy as np

from .nn import linear, linear_input_grad, softmax, softmax_vjp

__all__ = [
    "project_qkv",
    "split_half_channels",
    "concat_half_channels",
    "window_partition",
    "window_unpartition",
    "shuffle_tokens",
    "windowed_attention",
    "windowed_attention_input_grad",
    "spectral_attention",
    "spectral_attention_input_grad",
]


def project_qkv(x: np.ndarray, w_q: np.ndarray, w_k: np.ndarray,
                w_v: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-token linear query/key/value maps; all three weights are CxC, no bias."""
    c = x.shape[-1]
    for name, w in (("w_q", w_q), ("w_k", w_k), ("w_v", w_v)):
        if w.shape != (c, c):
            raise ValueError(f"{name} must be ({c},{c}), got {w.shape}")
    return linear(x, w_q), linear(x, w_k), linear(x, w_v)


def split_half_channels(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First half of the channels and the rest; concat_half_channels inverts."""
    c = t.shape[-1]
    if c % 2 != 0:
        raise ValueError(f"channel count must be even to split, got {c}")
    half = c // 2
    return t[..., :half], t[..., half:]


def concat_half_channels(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    return np.concatenate([t1, t2], axis=-1)


def window_partition(t: np.ndarray, p: int) -> np.ndarray:
    """(H, W, C) -> (H*W/p^2, p^2, C) over non-overlapping p x p windows."""
    h, w, c = t.shape
    if h % p != 0 or w % p != 0:
        raise ValueError(f"spatial dims {h}x{w} not divisible by window size {p}")
    grid = t.reshape(h // p, p, w // p, p, c)
    return grid.transpose(0, 2, 1, 3, 4).reshape(-1, p * p, c)


def window_unpartition(groups: np.ndarray, p: int, h: int, w: int) -> np.ndarray:
    """Exact inverse of window_partition for the same (p, h, w)."""
    n_windows, tokens, c = groups.shape
    if tokens != p * p or n_windows != (h // p) * (w // p):
        raise ValueError(
            f"group shape {groups.shape} inconsistent with p={p}, H={h}, W={w}"
        )
    grid = groups.reshape(h // p, w // p, p, p, c)
    return grid.transpose(0, 2, 1, 3, 4).reshape(h, w, c)


def shuffle_tokens(groups: np.ndarray) -> np.ndarray:
    """Transpose the window and token axes; applying it twice is the identity."""
    return np.swapaxes(groups, 0, 1)


def _heads(t: np.ndarray, d_h: int) -> np.ndarray:
    g, tokens, d = t.shape
    return t.reshape(g, tokens, d // d_h, d_h).transpose(0, 2, 1, 3)  # (G, h, T, d_h)


def _unheads(t: np.ndarray) -> np.ndarray:
    g, h, tokens, d_h = t.shape
    return t.transpose(0, 2, 1, 3).reshape(g, tokens, h * d_h)


def windowed_attention(q: np.ndarray, k: np.ndarray, v: np.ndarray,
                       pos: np.ndarray, d_h: int):
    """Scaled dot-product attention with additive positional bias, per group
    and head: softmax(Q K^T / sqrt(d_h) + P) V.

    q/k/v: (groups, tokens, D) with D divisible by d_h; pos: (heads, T, T).
    Returns (out, cache) with out of the same shape as v.
    """
    g, tokens, d = q.shape
    if k.shape != q.shape or v.shape != q.shape:
        raise ValueError(f"q/k/v shapes differ: {q.shape}, {k.shape}, {v.shape}")
    if d % d_h != 0:
        raise ValueError(f"head dim {d_h} does not divide channel count {d}")
    heads = d // d_h
    if pos.shape != (heads, tokens, tokens):
        raise ValueError(
            f"positional table must be ({heads},{tokens},{tokens}), got {pos.shape}"
        )
    qh, kh, vh = _heads(q, d_h), _heads(k, d_h), _heads(v, d_h)
    scale = 1.0 / np.sqrt(float(d_h))
    logits = np.einsum("ghtd,ghsd->ghts", qh, kh) * scale + pos[np.newaxis]
    att = softmax(logits, axis=-1)
    out_h = np.einsum("ghts,ghsd->ghtd", att, vh)
    cache = (qh, kh, vh, att, scale)
    return _unheads(out_h), cache


def windowed_attention_input_grad(dout: np.ndarray, cache):
    """Gradients of windowed_attention with respect to q, k, v."""
    qh, kh, vh, att, scale = cache
    d_h = qh.shape[-1]
    dout_h = _heads(dout, d_h)
    dv_h = np.einsum("ghts,ghtd->ghsd", att, dout_h)
    datt = np.einsum("ghtd,ghsd->ghts", dout_h, vh)
    dlogits = softmax_vjp(datt, att, axis=-1)
    dq_h = np.einsum("ghts,ghsd->ghtd", dlogits, kh) * scale
    dk_h = np.einsum("ghts,ghtd->ghsd", dlogits, qh) * scale
    return _unheads(dq_h), _unheads(dk_h), _unheads(dv_h)


def spectral_attention(x: np.ndarray, w_q: np.ndarray, w_k: np.ndarray,
                       w_v: np.ndarray, w_o: np.ndarray, heads: int):
    """Channel-wise attention: tokens are whole-band spatial vectors.

    Per head of width d = C/heads the similarity matrix K^T Q / sqrt(d) is
    d x d; its softmax normalizes each column, so with zero keys every output
    channel is the mean of the value channels.  Head outputs are concatenated
    along channels and passed through the output projection w_o.
    """
    h, w, c = x.shape
    if c % heads != 0:
        raise ValueError(f"heads {heads} must divide channel count {c}")
    tokens = x.reshape(-1, c)
    q, k, v = project_qkv(tokens, w_q, w_k, w_v)
    d = c // heads
    scale = 1.0 / np.sqrt(float(d))
    outs = []
    head_caches = []
    for j in range(heads):
        sl = slice(j * d, (j + 1) * d)
        qj, kj, vj = q[:, sl], k[:, sl], v[:, sl]
        sim = kj.T @ qj * scale
        att = softmax(sim, axis=0)
        outs.append(vj @ att)
        head_caches.append((qj, kj, vj, att))
    merged = np.concatenate(outs, axis=1)
    y = linear(merged, w_o)
    cache = (x.shape, w_q, w_k, w_v, w_o, heads, scale, head_caches)
    return y.reshape(h, w, c), cache


def spectral_attention_input_grad(dout: np.ndarray, cache) -> np.ndarray:
    x_shape, w_q, w_k, w_v, w_o, heads, scale, head_caches = cache
    c = x_shape[-1]
    d = c // heads
    dmerged = linear_input_grad(dout.reshape(-1, c), w_o)
    dq = np.empty_like(dmerged)
    dk = np.empty_like(dmerged)
    dv = np.empty_like(dmerged)
    for j in range(heads):
        sl = slice(j * d, (j + 1) * d)
        qj, kj, vj, att = head_caches[j]
        doj = dmerged[:, sl]
        datt = vj.T @ doj
        dv[:, sl] = doj @ att.T
        dsim = softmax_vjp(datt, att, axis=0)
        dk[:, sl] = qj @ dsim.T * scale
        dq[:, sl] = kj @ dsim * scale
    dtokens = (linear_input_grad(dq, w_q)
               + linear_input_grad(dk, w_k)
               + linear_input_grad(dv, w_v))
    return dtokens.reshape(x_shape)
