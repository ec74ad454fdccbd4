"""Finite-difference verification of the attention stack's forward passes.

For each supported op the harness builds a small seeded instance, takes the
scalar probe f = sum(outputs), and compares the hand-derived input gradient
against central finite differences with step 1e-3, entirely in float64.  The
reported number is the largest |analytic - numeric| over the sampled input
coordinates, relative to the largest analytic gradient magnitude (plain
per-coordinate ratios are undefined wherever the true gradient is zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .attention import (
    shuffle_tokens,
    spectral_attention,
    spectral_attention_input_grad,
    windowed_attention,
    windowed_attention_input_grad,
)
from .ulnsa import (
    LnsaConfig,
    build_ulnsa_weights,
    lnsa_block,
    lnsa_block_input_grad,
    ulnsa_apply,
    ulnsa_input_grad,
)
from .weights import WeightInit, WeightStore

__all__ = ["GRADCHECK_OPS", "GRADCHECK_THRESHOLDS", "gradient_check", "GradCheckResult"]

FD_STEP = 1e-3
MAX_SAMPLED_COORDS = 160

GRADCHECK_THRESHOLDS = {
    "proj": 1e-8,
    "local-attn": 1e-4,
    "nonlocal-attn": 1e-4,
    "spectral-attn": 1e-4,
    "lnsa": 1e-3,
    "ulnsa": 1e-3,
}


@dataclass(frozen=True)
class GradCheckResult:
    op: str
    max_rel_error: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.threshold


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _probe_proj(seed: int):
    rng = _rng(seed)
    x = rng.standard_normal((2, 2, 4))
    w_q, w_k, w_v = (rng.standard_normal((4, 4)) for _ in range(3))

    def fn(xv: np.ndarray) -> float:
        return float((xv @ w_q).sum() + (xv @ w_k).sum() + (xv @ w_v).sum())

    def grad(xv: np.ndarray) -> np.ndarray:
        ones = np.ones(xv.shape)
        return ones @ w_q.T + ones @ w_k.T + ones @ w_v.T

    return x, fn, grad


def _probe_windowed(seed: int, non_local: bool):
    rng = _rng(seed)
    groups, tokens, channels, d_h = 2, 4, 4, 2
    heads = channels // d_h
    qkv = rng.standard_normal((3, groups, tokens, channels))
    side = groups if non_local else tokens
    pos = rng.standard_normal((heads, side, side))

    def run(stacked: np.ndarray):
        q, k, v = stacked
        if non_local:
            q, k, v = shuffle_tokens(q), shuffle_tokens(k), shuffle_tokens(v)
        out, cache = windowed_attention(q, k, v, pos, d_h)
        if non_local:
            out = shuffle_tokens(out)
        return out, cache

    def fn(stacked: np.ndarray) -> float:
        out, _ = run(stacked)
        return float(out.sum())

    def grad(stacked: np.ndarray) -> np.ndarray:
        out, cache = run(stacked)
        dout = np.ones_like(out)
        if non_local:
            dout = shuffle_tokens(dout)
        dq, dk, dv = windowed_attention_input_grad(dout, cache)
        if non_local:
            dq, dk, dv = shuffle_tokens(dq), shuffle_tokens(dk), shuffle_tokens(dv)
        return np.stack([dq, dk, dv])

    return qkv, fn, grad


def _probe_spectral(seed: int):
    rng = _rng(seed)
    x = rng.standard_normal((2, 2, 4))
    weights = [rng.standard_normal((4, 4)) * 0.5 for _ in range(4)]

    def fn(xv: np.ndarray) -> float:
        out, _ = spectral_attention(xv, *weights, heads=2)
        return float(out.sum())

    def grad(xv: np.ndarray) -> np.ndarray:
        out, cache = spectral_attention(xv, *weights, heads=2)
        return spectral_attention_input_grad(np.ones_like(out), cache)

    return x, fn, grad


def _block_params(cfg: LnsaConfig, height: int, width: int, seed: int) -> dict:
    store = WeightStore()
    init = WeightInit(store, seed)
    from .ulnsa import _init_block  # single block without the surrounding net

    _init_block(init, "blk", cfg.base_channels, height, width, cfg)
    return store.as_float64()


def _probe_lnsa(seed: int):
    cfg = LnsaConfig(window=4, heads=2, base_channels=16, levels=1)
    height = width = 8
    pr = _block_params(cfg, height, width, seed)
    rng = _rng(seed + 1)
    x = rng.standard_normal((height, width, cfg.base_channels))

    def fn(xv: np.ndarray) -> float:
        out, _ = lnsa_block(xv, pr, "blk", cfg)
        return float(out.sum())

    def grad(xv: np.ndarray) -> np.ndarray:
        out, cache = lnsa_block(xv, pr, "blk", cfg)
        return lnsa_block_input_grad(np.ones_like(out), cache)

    return x, fn, grad


def _probe_ulnsa(seed: int):
    cfg = LnsaConfig(window=4, heads=2, base_channels=16, levels=2)
    height = width = 16
    bands = 4
    store = build_ulnsa_weights(bands, height, width, cfg, seed)
    pr = store.as_float64()
    rng = _rng(seed + 1)
    x = rng.standard_normal((height, width, bands))
    beta = 2.0

    def fn(xv: np.ndarray) -> float:
        out, _ = ulnsa_apply(xv, beta, pr, cfg)
        return float(out.sum())

    def grad(xv: np.ndarray) -> np.ndarray:
        out, cache = ulnsa_apply(xv, beta, pr, cfg)
        return ulnsa_input_grad(np.ones_like(out), cache)

    return x, fn, grad


GRADCHECK_OPS: dict[str, Callable] = {
    "proj": _probe_proj,
    "local-attn": lambda seed: _probe_windowed(seed, non_local=False),
    "nonlocal-attn": lambda seed: _probe_windowed(seed, non_local=True),
    "spectral-attn": _probe_spectral,
    "lnsa": _probe_lnsa,
    "ulnsa": _probe_ulnsa,
}


def gradient_check(op: str, seed: int = 0) -> GradCheckResult:
    """Max relative analytic-vs-central-difference error for one op."""
    if op not in GRADCHECK_OPS:
        raise ValueError(f"unsupported op {op!r}, expected one of {sorted(GRADCHECK_OPS)}")
    x, fn, grad = GRADCHECK_OPS[op](seed)
    analytic = grad(x)
    flat = x.reshape(-1)
    n = flat.size
    if n <= MAX_SAMPLED_COORDS:
        coords = np.arange(n)
    else:
        coords = _rng(seed + 1000).choice(n, size=MAX_SAMPLED_COORDS, replace=False)

    scale = float(np.max(np.abs(analytic)))
    if scale == 0.0:
        scale = 1.0
    worst = 0.0
    analytic_flat = analytic.reshape(-1)
    for idx in coords:
        saved = flat[idx]
        flat[idx] = saved + FD_STEP
        f_plus = fn(x)
        flat[idx] = saved - FD_STEP
        f_minus = fn(x)
        flat[idx] = saved
        numeric = (f_plus - f_minus) / (2.0 * FD_STEP)
        worst = max(worst, abs(analytic_flat[idx] - numeric) / scale)
    return GradCheckResult(op=op, max_rel_error=worst,
                           threshold=GRADCHECK_THRESHOLDS[op])
