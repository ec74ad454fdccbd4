"""U-shaped denoiser built from local/non-local/spectral attention blocks.

The network maps a cube plus a constant noise-weight plane through a 3x3
conv, a strided-conv encoder, a bottleneck, a deconv decoder with skip
connections, and a final 3x3 conv producing a residual that is added back to
the input.  Everything runs in float64 on channel-last arrays and each stage
has a hand-derived input gradient so the finite-difference harness can check
the whole pipeline.

One block does, with two residual connections:

    x1  = x + fuse(local & non-local window attention, spectral attention)(LN(x))
    out = x1 + FFN(LN(x1))

The spatial attention input is linearly projected, split into two channel
halves (local / non-local), windowed, and in the non-local branch the window
and token axes are transposed so attention spans tokens from every window.
Per-head outputs are merged by stacked (d_h x C) maps, the two spatial
branches fused by a 1x1 conv, then fused again with the spectral branch.

Positional tables have shape (heads, tokens, tokens); the non-local table's
side equals the window count, so weights are built for a fixed input size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attention import (
    concat_half_channels,
    project_qkv,
    shuffle_tokens,
    spectral_attention,
    spectral_attention_input_grad,
    split_half_channels,
    window_partition,
    window_unpartition,
    windowed_attention,
    windowed_attention_input_grad,
)
from .core import HsiCube
from .nn import (
    conv2d,
    conv2d_input_grad,
    conv_transpose2,
    conv_transpose2_input_grad,
    depthwise3x3,
    depthwise3x3_input_grad,
    gelu,
    gelu_input_grad,
    layer_norm,
    layer_norm_input_grad,
    linear,
    linear_input_grad,
)
from .weights import WeightInit, WeightStore

__all__ = [
    "LnsaConfig",
    "build_ulnsa_weights",
    "lnsa_block",
    "lnsa_block_input_grad",
    "ulnsa_apply",
    "ulnsa_input_grad",
    "ulnsa_forward",
    "zero_residual_projections",
    "block_prefixes",
]


@dataclass(frozen=True)
class LnsaConfig:
    """Shape parameters of the denoiser at one fixed input size."""

    window: int = 4
    heads: int = 2
    base_channels: int = 16
    levels: int = 2
    ffn_expand: int = 2

    def __post_init__(self):
        if self.window < 1 or self.heads < 1 or self.levels < 1 or self.ffn_expand < 1:
            raise ValueError("window, heads, levels, ffn_expand must be >= 1")
        if self.base_channels % 2 != 0:
            raise ValueError(f"base_channels must be even, got {self.base_channels}")
        if (self.base_channels // 2) % self.heads != 0:
            raise ValueError(
                f"half the channels ({self.base_channels // 2}) must split into "
                f"{self.heads} heads"
            )

    def validate_spatial(self, height: int, width: int) -> None:
        quantum = self.window * (1 << (self.levels - 1))
        if height % quantum != 0 or width % quantum != 0:
            raise ValueError(
                f"spatial dims {height}x{width} must be divisible by "
                f"window*2^(levels-1) = {quantum}"
            )

    def level_channels(self, level: int) -> int:
        return self.base_channels << level


# -- weight construction ---------------------------------------------------


def _init_block(init: WeightInit, prefix: str, c: int, height: int, width: int,
                cfg: LnsaConfig) -> None:
    p = cfg.window
    tokens = p * p
    n_windows = (height // p) * (width // p)
    half = c // 2
    hidden = cfg.ffn_expand * c
    init.constant(f"{prefix}.ln1.gamma", (c,), 1.0)
    init.constant(f"{prefix}.ln1.beta", (c,), 0.0)
    init.uniform(f"{prefix}.pre.weight", (c, c), c)
    init.uniform(f"{prefix}.pre.bias", (c,), c)
    for name in ("wq", "wk", "wv"):
        init.uniform(f"{prefix}.attn.{name}", (c, c), c)
    init.uniform(f"{prefix}.attn.pos_local", (cfg.heads, tokens, tokens), tokens)
    init.uniform(f"{prefix}.attn.pos_nonlocal", (cfg.heads, n_windows, n_windows), n_windows)
    init.uniform(f"{prefix}.attn.merge_local", (half, c), half)
    init.uniform(f"{prefix}.attn.merge_nonlocal", (half, c), half)
    init.uniform(f"{prefix}.attn.fuse_spatial.weight", (2 * c, c), 2 * c)
    init.uniform(f"{prefix}.attn.fuse_spatial.bias", (c,), 2 * c)
    for name in ("wq", "wk", "wv", "wo"):
        init.uniform(f"{prefix}.spectral.{name}", (c, c), c)
    init.uniform(f"{prefix}.fuse_all.weight", (2 * c, c), 2 * c)
    init.uniform(f"{prefix}.fuse_all.bias", (c,), 2 * c)
    init.constant(f"{prefix}.ln2.gamma", (c,), 1.0)
    init.constant(f"{prefix}.ln2.beta", (c,), 0.0)
    init.uniform(f"{prefix}.ffn.w1", (c, hidden), c)
    init.uniform(f"{prefix}.ffn.b1", (hidden,), c)
    init.uniform(f"{prefix}.ffn.dw", (3, 3, hidden), 9)
    init.uniform(f"{prefix}.ffn.db", (hidden,), 9)
    init.uniform(f"{prefix}.ffn.w2", (hidden, c), hidden)
    init.uniform(f"{prefix}.ffn.b2", (c,), hidden)


def build_ulnsa_weights(bands: int, height: int, width: int, cfg: LnsaConfig,
                        seed: int, store: WeightStore | None = None,
                        prefix: str = "ulnsa") -> WeightStore:
    """Seeded random weights for a fixed (bands, height, width) input."""
    cfg.validate_spatial(height, width)
    store = store if store is not None else WeightStore()
    init = WeightInit(store, seed)
    c0 = cfg.base_channels
    init.uniform(f"{prefix}.input.weight", (3, 3, bands + 1, c0), 9 * (bands + 1))
    init.uniform(f"{prefix}.input.bias", (c0,), 9 * (bands + 1))
    for level in range(cfg.levels - 1):
        c = cfg.level_channels(level)
        _init_block(init, f"{prefix}.enc{level}", c, height >> level, width >> level, cfg)
        init.uniform(f"{prefix}.down{level}.weight", (4, 4, c, 2 * c), 16 * c)
        init.uniform(f"{prefix}.down{level}.bias", (2 * c,), 16 * c)
    c_mid = cfg.level_channels(cfg.levels - 1)
    _init_block(init, f"{prefix}.mid", c_mid,
                height >> (cfg.levels - 1), width >> (cfg.levels - 1), cfg)
    for level in reversed(range(cfg.levels - 1)):
        c = cfg.level_channels(level)
        init.uniform(f"{prefix}.up{level}.weight", (2, 2, 2 * c, c), 4 * 2 * c)
        init.uniform(f"{prefix}.up{level}.bias", (c,), 4 * 2 * c)
        init.uniform(f"{prefix}.skip{level}.weight", (2 * c, c), 2 * c)
        init.uniform(f"{prefix}.skip{level}.bias", (c,), 2 * c)
        _init_block(init, f"{prefix}.dec{level}", c, height >> level, width >> level, cfg)
    init.uniform(f"{prefix}.output.weight", (3, 3, c0, bands), 9 * c0)
    init.uniform(f"{prefix}.output.bias", (bands,), 9 * c0)
    return store


def block_prefixes(names, prefix: str = "ulnsa") -> list[str]:
    """Block name prefixes present in a weight set, in declaration order."""
    marker = ".ln1.gamma"
    return [n[: -len(marker)] for n in names
            if n.startswith(prefix) and n.endswith(marker)]


def zero_residual_projections(store: WeightStore, prefix: str = "ulnsa") -> WeightStore:
    """Copy of the weights with every sub-block's last projection and the
    final residual head zeroed, which turns the whole network into the
    identity map."""
    out = store.copy()
    for block in block_prefixes(store.names(), prefix):
        for name in (f"{block}.fuse_all.weight", f"{block}.fuse_all.bias",
                     f"{block}.ffn.w2", f"{block}.ffn.b2"):
            out[name] = np.zeros_like(out[name])
    out[f"{prefix}.output.weight"] = np.zeros_like(out[f"{prefix}.output.weight"])
    out[f"{prefix}.output.bias"] = np.zeros_like(out[f"{prefix}.output.bias"])
    return out


# -- block forward / backward ----------------------------------------------


def lnsa_block(x: np.ndarray, pr: dict, prefix: str, cfg: LnsaConfig):
    """One attention block on an (H, W, C) map; returns (out, cache)."""
    height, width, c = x.shape
    p = cfg.window
    d_h = (c // 2) // cfg.heads

    def w(name: str) -> np.ndarray:
        return pr[f"{prefix}.{name}"]

    y1, ln1_cache = layer_norm(x, w("ln1.gamma"), w("ln1.beta"))
    y2 = linear(y1, w("pre.weight"), w("pre.bias"))

    q, k, v = project_qkv(y2, w("attn.wq"), w("attn.wk"), w("attn.wv"))
    q1, q2 = split_half_channels(q)
    k1, k2 = split_half_channels(k)
    v1, v2 = split_half_channels(v)

    a1, att1_cache = windowed_attention(
        window_partition(q1, p), window_partition(k1, p), window_partition(v1, p),
        w("attn.pos_local"), d_h)
    local = window_unpartition(linear(a1, w("attn.merge_local")), p, height, width)

    a2, att2_cache = windowed_attention(
        shuffle_tokens(window_partition(q2, p)),
        shuffle_tokens(window_partition(k2, p)),
        shuffle_tokens(window_partition(v2, p)),
        w("attn.pos_nonlocal"), d_h)
    non_local = window_unpartition(
        shuffle_tokens(linear(a2, w("attn.merge_nonlocal"))), p, height, width)

    spatial = linear(concat_half_channels(local, non_local),
                     w("attn.fuse_spatial.weight"), w("attn.fuse_spatial.bias"))
    spectral, sp_cache = spectral_attention(
        y2, w("spectral.wq"), w("spectral.wk"), w("spectral.wv"), w("spectral.wo"),
        cfg.heads)
    merged = linear(concat_half_channels(spatial, spectral),
                    w("fuse_all.weight"), w("fuse_all.bias"))
    x1 = x + merged

    z1, ln2_cache = layer_norm(x1, w("ln2.gamma"), w("ln2.beta"))
    f1 = linear(z1, w("ffn.w1"), w("ffn.b1"))
    g1, gelu1_cache = gelu(f1)
    dw_out, dw_cache = depthwise3x3(g1, w("ffn.dw"), w("ffn.db"))
    g2, gelu2_cache = gelu(dw_out)
    f2 = linear(g2, w("ffn.w2"), w("ffn.b2"))
    out = x1 + f2

    cache = {
        "prefix": prefix, "cfg": cfg, "shape": (height, width, c), "pr": pr,
        "ln1": ln1_cache, "ln2": ln2_cache,
        "att1": att1_cache, "att2": att2_cache, "spectral": sp_cache,
        "gelu1": gelu1_cache, "gelu2": gelu2_cache, "dw": dw_cache,
    }
    return out, cache


def lnsa_block_input_grad(dout: np.ndarray, cache) -> np.ndarray:
    pr = cache["pr"]
    prefix = cache["prefix"]
    cfg: LnsaConfig = cache["cfg"]
    height, width, c = cache["shape"]
    p = cfg.window

    def w(name: str) -> np.ndarray:
        return pr[f"{prefix}.{name}"]

    # FFN half, against out = x1 + FFN(LN2(x1)).
    df2 = dout
    dg2 = linear_input_grad(df2, w("ffn.w2"))
    ddw = gelu_input_grad(dg2, cache["gelu2"])
    dg1 = depthwise3x3_input_grad(ddw, cache["dw"])
    df1 = gelu_input_grad(dg1, cache["gelu1"])
    dz1 = linear_input_grad(df1, w("ffn.w1"))
    dx1 = dout + layer_norm_input_grad(dz1, cache["ln2"])

    # Attention half, against x1 = x + merged.
    dmerged = dx1
    dcat2 = linear_input_grad(dmerged, w("fuse_all.weight"))
    dspatial, dspectral = split_half_channels(dcat2)
    dy2 = spectral_attention_input_grad(dspectral, cache["spectral"])

    dcat1 = linear_input_grad(dspatial, w("attn.fuse_spatial.weight"))
    dlocal, dnon_local = split_half_channels(dcat1)

    da1 = linear_input_grad(window_partition(dlocal, p), w("attn.merge_local"))
    dqg1, dkg1, dvg1 = windowed_attention_input_grad(da1, cache["att1"])
    dq1 = window_unpartition(dqg1, p, height, width)
    dk1 = window_unpartition(dkg1, p, height, width)
    dv1 = window_unpartition(dvg1, p, height, width)

    da2 = linear_input_grad(shuffle_tokens(window_partition(dnon_local, p)),
                            w("attn.merge_nonlocal"))
    dqg2, dkg2, dvg2 = windowed_attention_input_grad(da2, cache["att2"])
    dq2 = window_unpartition(shuffle_tokens(dqg2), p, height, width)
    dk2 = window_unpartition(shuffle_tokens(dkg2), p, height, width)
    dv2 = window_unpartition(shuffle_tokens(dvg2), p, height, width)

    dq = concat_half_channels(dq1, dq2)
    dk = concat_half_channels(dk1, dk2)
    dv = concat_half_channels(dv1, dv2)
    dy2 = dy2 + (linear_input_grad(dq, w("attn.wq"))
                 + linear_input_grad(dk, w("attn.wk"))
                 + linear_input_grad(dv, w("attn.wv")))

    dy1 = linear_input_grad(dy2, w("pre.weight"))
    return dx1 + layer_norm_input_grad(dy1, cache["ln1"])


# -- full network ------------------------------------------------------------


def ulnsa_apply(x: np.ndarray, beta: float, pr: dict, cfg: LnsaConfig,
                prefix: str = "ulnsa"):
    """Denoiser forward on an (H, W, bands) float array; returns (out, cache).

    beta is stretched into a constant extra input plane, so the first conv
    sees bands+1 channels.  The output is input + residual.
    """
    height, width, bands = x.shape
    cfg.validate_spatial(height, width)
    if not np.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")

    beta_plane = np.full((height, width, 1), float(beta), dtype=x.dtype)
    stacked = np.concatenate([x, beta_plane], axis=-1)
    h, in_cache = conv2d(stacked, pr[f"{prefix}.input.weight"],
                         pr[f"{prefix}.input.bias"], stride=1, pad=1)

    skips = []
    enc_caches = []
    down_caches = []
    for level in range(cfg.levels - 1):
        h, bc = lnsa_block(h, pr, f"{prefix}.enc{level}", cfg)
        enc_caches.append(bc)
        skips.append(h)
        h, dc = conv2d(h, pr[f"{prefix}.down{level}.weight"],
                       pr[f"{prefix}.down{level}.bias"], stride=2, pad=1)
        down_caches.append(dc)

    h, mid_cache = lnsa_block(h, pr, f"{prefix}.mid", cfg)

    up_caches = []
    dec_caches = []
    for level in reversed(range(cfg.levels - 1)):
        h, uc = conv_transpose2(h, pr[f"{prefix}.up{level}.weight"],
                                pr[f"{prefix}.up{level}.bias"])
        cat = np.concatenate([h, skips[level]], axis=-1)
        h = linear(cat, pr[f"{prefix}.skip{level}.weight"],
                   pr[f"{prefix}.skip{level}.bias"])
        h, bc = lnsa_block(h, pr, f"{prefix}.dec{level}", cfg)
        up_caches.append(uc)
        dec_caches.append(bc)

    residual, out_cache = conv2d(h, pr[f"{prefix}.output.weight"],
                                 pr[f"{prefix}.output.bias"], stride=1, pad=1)
    out = x + residual
    cache = {
        "prefix": prefix, "cfg": cfg, "pr": pr, "bands": bands,
        "in": in_cache, "enc": enc_caches, "down": down_caches,
        "mid": mid_cache, "up": up_caches, "dec": dec_caches, "out": out_cache,
    }
    return out, cache


def ulnsa_input_grad(dout: np.ndarray, cache) -> np.ndarray:
    cfg: LnsaConfig = cache["cfg"]
    pr = cache["pr"]
    prefix = cache["prefix"]
    bands = cache["bands"]

    dh = conv2d_input_grad(dout, cache["out"])
    dskips: dict[int, np.ndarray] = {}
    # Decoder ran levels-2 .. 0; unwind it 0 .. levels-2.
    for level in range(cfg.levels - 1):
        rev = cfg.levels - 2 - level  # index into dec/up cache lists
        dh = lnsa_block_input_grad(dh, cache["dec"][rev])
        dcat = linear_input_grad(dh, pr[f"{prefix}.skip{level}.weight"])
        c_up = pr[f"{prefix}.up{level}.weight"].shape[3]
        dup = dcat[..., :c_up]
        dskips[level] = dcat[..., c_up:]
        dh = conv_transpose2_input_grad(dup, cache["up"][rev])

    dh = lnsa_block_input_grad(dh, cache["mid"])

    for level in reversed(range(cfg.levels - 1)):
        dh = conv2d_input_grad(dh, cache["down"][level])
        dh = dh + dskips[level]
        dh = lnsa_block_input_grad(dh, cache["enc"][level])

    dstacked = conv2d_input_grad(dh, cache["in"])
    return dout + dstacked[..., :bands]


def ulnsa_forward(cube: HsiCube, beta: float, store: WeightStore,
                  cfg: LnsaConfig, prefix: str = "ulnsa") -> HsiCube:
    """Cube-level forward: band-major cube in, band-major cube out."""
    x = cube.as_float64().transpose(1, 2, 0)  # (H, W, bands)
    pr = store.as_float64()
    out, _ = ulnsa_apply(x, beta, pr, cfg, prefix=prefix)
    return HsiCube(out.transpose(2, 0, 1).astype(np.float32))
