"""Synthetic test scene: piecewise-constant blocks with per-band spectral ramps.

Block edges keep the sparse term busy while the linear spectral ramps give
the bands the strong correlation that spectral attention exploits.  Values
stay inside [0.1, 0.95].
"""

from __future__ import annotations

import numpy as np

from .core import HsiCube

__all__ = ["block_ramp_phantom"]


def block_ramp_phantom(height: int = 64, width: int = 64, bands: int = 4,
                       tile: int = 16, seed: int = 0) -> HsiCube:
    if height % tile != 0 or width % tile != 0:
        raise ValueError(f"tile {tile} must divide {height}x{width}")
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    rows, cols = height // tile, width // tile
    low = rng.uniform(0.1, 0.5, size=(rows, cols))
    high = low + rng.uniform(0.1, 0.45, size=(rows, cols))
    data = np.empty((bands, height, width), dtype=np.float32)
    ramp = np.linspace(0.0, 1.0, bands) if bands > 1 else np.array([0.5])
    for b in range(bands):
        plane = low + (high - low) * ramp[b]
        data[b] = np.kron(plane, np.ones((tile, tile))).astype(np.float32)
    return HsiCube(data)
