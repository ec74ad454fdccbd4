"""Named parameter store with seeded initialization and UWT1 serialization.

UWT1 byte layout (all integers little-endian):

    magic   4 bytes  b"UWT1"
    count   uint32   number of tensors R
    manifest, R records:
        name_len  uint16
        name      name_len bytes, UTF-8
        ndim      uint8
        dims      ndim x uint32
    payload: for each record in manifest order, prod(dims) float32 values

Initialization is uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn from a
single Philox 4x64 stream keyed on the seed and consumed in declaration
order, so a seed pins every tensor bit-exactly.
"""

from __future__ import annotations

import struct

import numpy as np

__all__ = ["WeightStore", "WeightFormatError", "WeightInit"]

_MAGIC = b"UWT1"


class WeightFormatError(ValueError):
    """Malformed or truncated UWT1 payload."""


class WeightStore:
    """Ordered mapping of tensor name -> float32 ndarray."""

    def __init__(self):
        self._tensors: dict[str, np.ndarray] = {}

    def add(self, name: str, array: np.ndarray) -> np.ndarray:
        if name in self._tensors:
            raise ValueError(f"duplicate tensor name {name!r}")
        arr = np.ascontiguousarray(array, dtype=np.float32)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"tensor {name!r} contains non-finite values")
        self._tensors[name] = arr
        return arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __setitem__(self, name: str, array: np.ndarray) -> None:
        if name not in self._tensors:
            raise KeyError(name)
        arr = np.ascontiguousarray(array, dtype=np.float32)
        if arr.shape != self._tensors[name].shape:
            raise ValueError(
                f"shape mismatch for {name!r}: {arr.shape} vs {self._tensors[name].shape}"
            )
        self._tensors[name] = arr

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self):
        return self._tensors.items()

    def has_prefix(self, prefix: str) -> bool:
        return any(n.startswith(prefix) for n in self._tensors)

    def as_float64(self) -> dict[str, np.ndarray]:
        """Widened copies for 64-bit forward passes."""
        return {k: v.astype(np.float64) for k, v in self._tensors.items()}

    def merge(self, other: "WeightStore") -> "WeightStore":
        for name, arr in other.items():
            self.add(name, arr)
        return self

    def copy(self) -> "WeightStore":
        fresh = WeightStore()
        for name, arr in self._tensors.items():
            fresh.add(name, arr.copy())
        return fresh

    # -- UWT1 serialization ------------------------------------------------

    def save(self, path) -> None:
        chunks = [_MAGIC, struct.pack("<I", len(self._tensors))]
        for name, arr in self._tensors.items():
            encoded = name.encode("utf-8")
            chunks.append(struct.pack("<H", len(encoded)))
            chunks.append(encoded)
            chunks.append(struct.pack("<B", arr.ndim))
            chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        for arr in self._tensors.values():
            chunks.append(arr.astype("<f4").tobytes())
        with open(path, "wb") as fh:
            fh.write(b"".join(chunks))

    @classmethod
    def load(cls, path) -> "WeightStore":
        with open(path, "rb") as fh:
            blob = fh.read()
        offset = 0

        def take(n: int, what: str) -> bytes:
            nonlocal offset
            if offset + n > len(blob):
                raise WeightFormatError(
                    f"truncated weight file while reading {what}: "
                    f"need {offset + n} bytes, have {len(blob)}"
                )
            piece = blob[offset:offset + n]
            offset += n
            return piece

        if take(4, "magic") != _MAGIC:
            raise WeightFormatError("bad magic, not a UWT1 weight file")
        (count,) = struct.unpack("<I", take(4, "tensor count"))
        manifest: list[tuple[str, tuple[int, ...]]] = []
        for _ in range(count):
            (name_len,) = struct.unpack("<H", take(2, "name length"))
            name = take(name_len, "name").decode("utf-8")
            (ndim,) = struct.unpack("<B", take(1, "ndim"))
            dims = struct.unpack(f"<{ndim}I", take(4 * ndim, "dims"))
            manifest.append((name, dims))

        store = cls()
        for name, dims in manifest:
            n_values = int(np.prod(dims, dtype=np.int64)) if dims else 1
            raw = take(4 * n_values, f"payload of {name!r}")
            arr = np.frombuffer(raw, dtype="<f4").reshape(dims)
            if not np.all(np.isfinite(arr)):
                raise WeightFormatError(f"tensor {name!r} contains non-finite values")
            store.add(name, arr.copy())
        if offset != len(blob):
            raise WeightFormatError(
                f"trailing bytes in weight file: expected {offset}, have {len(blob)}"
            )
        return store


class WeightInit:
    """Sequential fan-in-uniform initializer over one seeded Philox stream."""

    def __init__(self, store: WeightStore, seed: int):
        self.store = store
        key = np.array([np.uint64(seed), np.uint64(0x57545531)], dtype=np.uint64)
        self.rng = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, name: str, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
        bound = 1.0 / np.sqrt(float(fan_in))
        values = self.rng.uniform(-bound, bound, size=shape)
        return self.store.add(name, values.astype(np.float32))

    def constant(self, name: str, shape: tuple[int, ...], value: float) -> np.ndarray:
        return self.store.add(name, np.full(shape, value, dtype=np.float32))
