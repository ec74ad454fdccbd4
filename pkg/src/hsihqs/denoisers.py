"""Denoiser implementations plugged into the solver's Z update.

All of them honor the interface contract of returning the input unchanged at
noise level zero.  The quadratic-prox denoiser exists to make descent tests
exact; the per-band Gaussian blur is the practical classical baseline; the
attention network adapter converts the solver's noise level into the weight
plane value beta = 1/noise_level^2.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import HsiCube
from .solver import Denoiser
from .ulnsa import LnsaConfig, ulnsa_forward
from .weights import WeightStore

__all__ = [
    "IdentityDenoiser",
    "QuadraticProxDenoiser",
    "GaussianSmoothDenoiser",
    "UlnsaDenoiser",
]


class IdentityDenoiser(Denoiser):
    """Returns its input; useful as a fixed-point and negative control."""

    def denoise(self, cube: HsiCube, noise_level: float) -> HsiCube:
        return cube.copy()


class QuadraticProxDenoiser(Denoiser):
    """Exact prox of the quadratic prior Phi(Z) = 0.5*||Z||^2.

    At penalty beta = 1/noise_level^2 the minimizer of
    (beta/2)*||Z - X||^2 + Phi(Z) is X * beta/(beta+1) = X / (1 + sigma^2).
    """

    def denoise(self, cube: HsiCube, noise_level: float) -> HsiCube:
        if noise_level == 0:
            return cube.copy()
        shrink = 1.0 / (1.0 + float(noise_level) ** 2)
        return HsiCube((cube.as_float64() * shrink).astype(np.float32))


class GaussianSmoothDenoiser(Denoiser):
    """Per-band spatial Gaussian blur with kernel sigma tied to the noise level."""

    def __init__(self, sigma_scale: float = 5.0):
        if sigma_scale <= 0:
            raise ValueError(f"sigma_scale must be positive, got {sigma_scale}")
        self.sigma_scale = sigma_scale

    def denoise(self, cube: HsiCube, noise_level: float) -> HsiCube:
        blur = self.sigma_scale * float(noise_level)
        if blur == 0:
            return cube.copy()
        out = np.empty_like(cube.data)
        data64 = cube.as_float64()
        for b in range(cube.bands):
            out[b] = gaussian_filter(data64[b], sigma=blur, mode="reflect").astype(np.float32)
        return HsiCube(out)


class UlnsaDenoiser(Denoiser):
    """Attention-network denoiser; maps noise_level to the beta input plane."""

    def __init__(self, store: WeightStore, cfg: LnsaConfig, prefix: str = "ulnsa"):
        self.store = store
        self.cfg = cfg
        self.prefix = prefix

    def denoise(self, cube: HsiCube, noise_level: float) -> HsiCube:
        if noise_level == 0:
            return cube.copy()
        beta = 1.0 / float(noise_level) ** 2
        return ulnsa_forward(cube, beta, self.store, self.cfg, prefix=self.prefix)
