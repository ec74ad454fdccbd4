"""Hyperspectral cube container and element-wise arithmetic.

A cube holds ``bands`` spectral planes of ``height x width`` pixels.  Storage
is band-sequential: the underlying array has shape ``(bands, height, width)``
in C order, so each band's spatial plane is contiguous.  Values are 32-bit
floats; reductions elsewhere in the library accumulate in 64-bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["HsiCube", "ConformabilityError", "NonFiniteError", "axpy_combine"]


class ConformabilityError(ValueError):
    """Raised when two cubes with different (height, width, bands) meet."""


class NonFiniteError(ValueError):
    """Raised when cube data contains NaN or Inf."""


class HsiCube:
    """Dense (bands, height, width) float32 tensor of radiance values.

    Values are nominally in [0, 1] but the container does not clip; it only
    rejects NaN/Inf, which no library operation is allowed to produce.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.ascontiguousarray(data, dtype=np.float32)
        if arr.ndim != 3:
            raise ValueError(f"cube data must be 3-D (bands, height, width), got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ValueError(f"cube dimensions must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("cube data contains NaN or Inf")
        self.data = arr

    @classmethod
    def zeros(cls, bands: int, height: int, width: int) -> "HsiCube":
        return cls(np.zeros((bands, height, width), dtype=np.float32))

    @classmethod
    def full(cls, bands: int, height: int, width: int, value: float) -> "HsiCube":
        return cls(np.full((bands, height, width), value, dtype=np.float32))

    @property
    def bands(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def conformable(self, other: "HsiCube") -> bool:
        return self.shape == other.shape

    def require_conformable(self, other: "HsiCube", what: str = "operation") -> None:
        if not self.conformable(other):
            raise ConformabilityError(
                f"{what}: cubes not conformable, {self.shape} vs {other.shape}"
            )

    def copy(self) -> "HsiCube":
        return HsiCube(self.data.copy())

    def as_float64(self) -> np.ndarray:
        """View of the data widened to float64 (for 64-bit reductions)."""
        return self.data.astype(np.float64)

    def __repr__(self) -> str:
        return f"HsiCube(bands={self.bands}, height={self.height}, width={self.width})"


def axpy_combine(a: float, u: HsiCube, b: float, v: HsiCube) -> HsiCube:
    """Element-wise ``a*u + b*v`` of two conformable cubes."""
    u.require_conformable(v, "axpy_combine")
    out = np.float32(a) * u.data + np.float32(b) * v.data
    return HsiCube(out)
