"""Full-reference quality metrics over hyperspectral cubes.

PSNR, per-band Gaussian-windowed SSIM, and the band-normalized relative RMSE
aggregate (ERGAS).  All reductions accumulate in float64 regardless of the
cube storage type.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .core import HsiCube

__all__ = ["MetricReport", "DegenerateInputError", "psnr", "ssim", "ergas", "evaluate"]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

ERGAS_MEAN_TOL = 1e-8


class DegenerateInputError(ValueError):
    """Input too small or too flat for the metric to be defined."""


@dataclass(frozen=True)
class MetricReport:
    """psnr in dB (math.inf when the inputs are identical), ssim in [-1, 1],
    ergas dimensionless >= 0."""

    psnr: float
    ssim: float
    ergas: float

    def lines(self) -> list[str]:
        return [
            f"psnr={self.psnr:.6f}" if math.isfinite(self.psnr) else "psnr=inf",
            f"ssim={self.ssim:.6f}",
            f"ergas={self.ergas:.6f}",
        ]


def psnr(reference: HsiCube, test: HsiCube, peak: float = 1.0) -> float:
    """10*log10(peak^2 / MSE) over all elements; +inf when MSE == 0."""
    reference.require_conformable(test, "psnr")
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    diff = reference.as_float64() - test.as_float64()
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_band(x: np.ndarray, y: np.ndarray, window: np.ndarray, c1: float, c2: float) -> float:
    # Classic Gaussian-weighted local statistics on the 'valid' interior.
    mu_x = convolve2d(x, window, mode="valid")
    mu_y = convolve2d(y, window, mode="valid")
    xx = convolve2d(x * x, window, mode="valid")
    yy = convolve2d(y * y, window, mode="valid")
    xy = convolve2d(x * y, window, mode="valid")
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim(reference: HsiCube, test: HsiCube, peak: float = 1.0) -> float:
    """Mean per-band SSIM with an 11x11 Gaussian window (sigma 1.5).

    Stabilizers are C1=(0.01*peak)^2 and C2=(0.03*peak)^2; the per-band maps
    use the window's valid interior and are averaged over bands.
    """
    reference.require_conformable(test, "ssim")
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    if reference.height < SSIM_WINDOW or reference.width < SSIM_WINDOW:
        raise DegenerateInputError(
            f"ssim needs spatial dims >= {SSIM_WINDOW}, got "
            f"{reference.height}x{reference.width}"
        )
    window = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2
    ref64 = reference.as_float64()
    test64 = test.as_float64()
    per_band = [
        _ssim_band(ref64[b], test64[b], window, c1, c2) for b in range(reference.bands)
    ]
    return float(np.mean(per_band))


def ergas(reference: HsiCube, test: HsiCube, scale_ratio: float = 1.0) -> float:
    """100 * scale_ratio * sqrt(mean over bands of RMSE_b^2 / mean_b^2).

    mean_b is the reference band mean; a band with |mean_b| below tolerance
    makes the metric undefined and raises.  scale_ratio stays at 1 for pure
    denoising (no resolution change).
    """
    reference.require_conformable(test, "ergas")
    ref64 = reference.as_float64()
    test64 = test.as_float64()
    acc = 0.0
    for b in range(reference.bands):
        mean_b = float(np.mean(ref64[b]))
        if abs(mean_b) < ERGAS_MEAN_TOL:
            raise DegenerateInputError(
                f"ergas undefined: band {b} reference mean {mean_b:.3e} below tolerance"
            )
        mse_b = float(np.mean((ref64[b] - test64[b]) ** 2))
        acc += mse_b / (mean_b * mean_b)
    return 100.0 * scale_ratio * math.sqrt(acc / reference.bands)


def evaluate(reference: HsiCube, test: HsiCube, peak: float = 1.0,
             scale_ratio: float = 1.0) -> MetricReport:
    """All three metrics in one report."""
    return MetricReport(
        psnr=psnr(reference, test, peak),
        ssim=ssim(reference, test, peak),
        ergas=ergas(reference, test, scale_ratio),
    )
