"""Head that maps a noisy cube to the per-iteration solver parameters.

Forward pass: 1x1 channel conv -> ReLU -> strided (2) 3x3 conv with circular
padding -> ReLU -> global average pool -> three fully connected layers with
ReLU between them -> softplus plus a 1e-4 floor, so all 4K outputs are
strictly positive.  The output vector splits, in order, into alpha, beta,
gamma, lambda of length K each.

The degradation operator of the imaging model is the identity here, so it
carries no information and has no runtime representation; the architecture
slot for it is documented only.  Circular padding makes the pooled features
exactly invariant to spatial translations by the conv stride.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import HsiCube
from .nn import conv2d, linear
from .solver import HyperParams
from .weights import WeightInit, WeightStore

__all__ = ["EstimatorConfig", "build_estimator_weights", "estimate",
           "PARAM_FLOOR", "ESTIMATOR_PREFIX"]

PARAM_FLOOR = 1e-4
ESTIMATOR_PREFIX = "est"


@dataclass(frozen=True)
class EstimatorConfig:
    """Channel widths of the estimator head (desk-scale defaults)."""

    bands: int
    iterations: int
    conv_channels: int = 16
    conv2_channels: int = 32
    fc1_width: int = 64
    fc2_width: int = 64

    def __post_init__(self):
        if self.bands < 1 or self.iterations < 1:
            raise ValueError("bands and iterations must be >= 1")


def build_estimator_weights(cfg: EstimatorConfig, seed: int,
                            store: WeightStore | None = None) -> WeightStore:
    store = store if store is not None else WeightStore()
    init = WeightInit(store, seed)
    pre = ESTIMATOR_PREFIX
    init.uniform(f"{pre}.conv1.weight", (cfg.bands, cfg.conv_channels), cfg.bands)
    init.uniform(f"{pre}.conv2.weight",
                 (3, 3, cfg.conv_channels, cfg.conv2_channels), 9 * cfg.conv_channels)
    init.uniform(f"{pre}.conv2.bias", (cfg.conv2_channels,), 9 * cfg.conv_channels)
    init.uniform(f"{pre}.fc1.weight", (cfg.conv2_channels, cfg.fc1_width),
                 cfg.conv2_channels)
    init.uniform(f"{pre}.fc1.bias", (cfg.fc1_width,), cfg.conv2_channels)
    init.uniform(f"{pre}.fc2.weight", (cfg.fc1_width, cfg.fc2_width), cfg.fc1_width)
    init.uniform(f"{pre}.fc2.bias", (cfg.fc2_width,), cfg.fc1_width)
    init.uniform(f"{pre}.fc3.weight", (cfg.fc2_width, 4 * cfg.iterations), cfg.fc2_width)
    init.uniform(f"{pre}.fc3.bias", (4 * cfg.iterations,), cfg.fc2_width)
    return store


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def estimate(y: HsiCube, iterations: int, store: WeightStore) -> HyperParams:
    """Run the estimator head on the observation and split the outputs."""
    pre = ESTIMATOR_PREFIX
    pr = {k: v.astype(np.float64) for k, v in store.items() if k.startswith(pre)}
    if not pr:
        raise ValueError("weight store has no estimator tensors")
    conv1 = pr[f"{pre}.conv1.weight"]
    if conv1.shape[0] != y.bands:
        raise ValueError(
            f"estimator expects {conv1.shape[0]} bands, cube has {y.bands}"
        )
    head = pr[f"{pre}.fc3.weight"].shape[1]
    if head != 4 * iterations:
        raise ValueError(
            f"estimator output head is {head} wide, need 4*K = {4 * iterations}"
        )

    x = y.as_float64().transpose(1, 2, 0)  # (H, W, bands)
    h = np.maximum(linear(x, conv1), 0.0)
    h, _ = conv2d(h, pr[f"{pre}.conv2.weight"], pr[f"{pre}.conv2.bias"],
                  stride=2, pad=1, circular=True)
    h = np.maximum(h, 0.0)
    pooled = h.mean(axis=(0, 1))
    h = np.maximum(linear(pooled, pr[f"{pre}.fc1.weight"], pr[f"{pre}.fc1.bias"]), 0.0)
    h = np.maximum(linear(h, pr[f"{pre}.fc2.weight"], pr[f"{pre}.fc2.bias"]), 0.0)
    raw = linear(h, pr[f"{pre}.fc3.weight"], pr[f"{pre}.fc3.bias"])
    params = _softplus(raw) + PARAM_FLOOR
    k = iterations
    return HyperParams(alpha=params[0:k], beta=params[k:2 * k],
                       gamma=params[2 * k:3 * k], lam=params[3 * k:4 * k])
