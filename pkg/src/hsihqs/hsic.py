"""Bit-exact cube file format, version 1.

    magic    4 bytes   b"HSIC"
    version  1 byte    0x01
    M, N, P  uint32 LE height, width, bands
    payload  M*N*P float32 LE, band-sequential (band-major, row-major inside
             a band)

Writers refuse NaN/Inf; readers reject bad magic, truncation, trailing bytes,
and non-finite payloads.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import HsiCube

__all__ = ["read_cube", "write_cube", "HsicFormatError", "HSIC_MAGIC", "HSIC_VERSION"]

HSIC_MAGIC = b"HSIC"
HSIC_VERSION = 1
_HEADER = struct.Struct("<4sBIII")


class HsicFormatError(ValueError):
    """Malformed HSIC payload."""


def write_cube(cube: HsiCube, path) -> None:
    if not np.all(np.isfinite(cube.data)):
        raise HsicFormatError("refusing to write non-finite cube data")
    header = _HEADER.pack(HSIC_MAGIC, HSIC_VERSION,
                          cube.height, cube.width, cube.bands)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(cube.data.astype("<f4").tobytes())


def read_cube(path) -> HsiCube:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise HsicFormatError(
            f"truncated header: need {_HEADER.size} bytes, have {len(blob)}"
        )
    magic, version, height, width, bands = _HEADER.unpack_from(blob)
    if magic != HSIC_MAGIC:
        raise HsicFormatError(f"bad magic {magic!r}, not an HSIC file")
    if version != HSIC_VERSION:
        raise HsicFormatError(f"unsupported HSIC version {version}")
    if min(height, width, bands) < 1:
        raise HsicFormatError(f"invalid dimensions {height}x{width}x{bands}")
    expected = _HEADER.size + 4 * height * width * bands
    if len(blob) != expected:
        raise HsicFormatError(
            f"payload size mismatch for {height}x{width}x{bands}: "
            f"expected {expected} bytes, have {len(blob)}"
        )
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    if not np.all(np.isfinite(values)):
        raise HsicFormatError("payload contains NaN or Inf")
    return HsiCube(values.reshape(bands, height, width).copy())
