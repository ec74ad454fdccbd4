"""Synthesis of the additive observation model: clean + Gaussian + sparse noise.

Determinism contract: every noise field is drawn from numpy's Philox 4x64
counter-based generator (ziggurat algorithm for normals), with one stream per
(seed, component, band).  The same seed therefore reproduces bit-identically
on any platform, and generating bands in parallel gives the same cube as
generating them sequentially.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import HsiCube

__all__ = [
    "SparseKind",
    "NoiseSpec",
    "add_gaussian",
    "add_impulse",
    "add_stripes",
    "synthesize_case",
    "apply_noise",
    "CASE_TABLE",
]

# Per-component stream tags; see _band_rng.
_TAG_GAUSSIAN = 0
_TAG_IMPULSE = 1
_TAG_STRIPES = 2

# Experimental noise cases: (gaussian sigma, impulse probability).
CASE_TABLE = {
    1: (0.2, 0.0),
    2: (0.2, 0.05),
    3: (0.2, 0.1),
    4: (0.2, 0.15),
}


class SparseKind(enum.Enum):
    IMPULSE = "impulse"
    STRIPES = "stripes"
    BOTH = "both"


@dataclass(frozen=True)
class NoiseSpec:
    """Declarative description of one synthesis run.

    (clean cube, spec) fully determines the noisy output.  stripe_amplitude
    is recorded so stripe runs stay reproducible from the spec alone.
    """

    gaussian_sigma: float
    sparse_fraction: float
    sparse_kind: SparseKind = SparseKind.IMPULSE
    stripe_fraction: float = 0.0
    stripe_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.gaussian_sigma < 0:
            raise ValueError(f"gaussian_sigma must be >= 0, got {self.gaussian_sigma}")
        if not 0.0 <= self.sparse_fraction <= 1.0:
            raise ValueError(f"sparse_fraction must be in [0,1], got {self.sparse_fraction}")
        if not 0.0 <= self.stripe_fraction <= 1.0:
            raise ValueError(f"stripe_fraction must be in [0,1], got {self.stripe_fraction}")
        if self.stripe_amplitude < 0:
            raise ValueError(f"stripe_amplitude must be >= 0, got {self.stripe_amplitude}")

    def to_keyvalue(self) -> str:
        return "".join(
            f"{k}={v}\n"
            for k, v in [
                ("gaussian_sigma", self.gaussian_sigma),
                ("sparse_fraction", self.sparse_fraction),
                ("sparse_kind", self.sparse_kind.value),
                ("stripe_fraction", self.stripe_fraction),
                ("stripe_amplitude", self.stripe_amplitude),
                ("seed", self.seed),
            ]
        )

    @classmethod
    def from_keyvalue(cls, text: str) -> "NoiseSpec":
        fields: dict[str, str] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        return cls(
            gaussian_sigma=float(fields["gaussian_sigma"]),
            sparse_fraction=float(fields["sparse_fraction"]),
            sparse_kind=SparseKind(fields["sparse_kind"]),
            stripe_fraction=float(fields["stripe_fraction"]),
            stripe_amplitude=float(fields["stripe_amplitude"]),
            seed=int(fields["seed"]),
        )


def _band_rng(seed: int, tag: int, band: int) -> np.random.Generator:
    # Philox key = (seed, tag << 32 | band): independent stream per component
    # and band, so band-parallel generation matches sequential generation.
    key = np.array([np.uint64(seed), np.uint64((tag << 32) + band)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def add_gaussian(clean: HsiCube, sigma: float, seed: int) -> HsiCube:
    """clean + i.i.d. zero-mean Gaussian field, not clipped."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return clean.copy()
    out = np.empty_like(clean.data)
    for b in range(clean.bands):
        rng = _band_rng(seed, _TAG_GAUSSIAN, b)
        field = rng.standard_normal((clean.height, clean.width)) * sigma
        out[b] = (clean.data[b].astype(np.float64) + field).astype(np.float32)
    return HsiCube(out)


def add_impulse(clean: HsiCube, p: float, seed: int) -> HsiCube:
    """Salt-and-pepper: each element independently becomes 0 or 1 (equal odds)
    with probability p, else keeps its value."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0,1], got {p}")
    if p == 0:
        return clean.copy()
    out = np.empty_like(clean.data)
    for b in range(clean.bands):
        rng = _band_rng(seed, _TAG_IMPULSE, b)
        hit = rng.random((clean.height, clean.width)) < p
        salt = rng.random((clean.height, clean.width)) < 0.5
        out[b] = np.where(hit, salt.astype(np.float32), clean.data[b])
    return HsiCube(out)


def add_stripes(clean: HsiCube, stripe_fraction: float, amplitude: float,
                seed: int) -> HsiCube:
    """Per band, a random column subset gains an additive constant drawn
    uniformly from [-amplitude, +amplitude], constant down the column."""
    if not 0.0 <= stripe_fraction <= 1.0:
        raise ValueError(f"stripe_fraction must be in [0,1], got {stripe_fraction}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    n_striped = int(round(stripe_fraction * clean.width))
    if n_striped == 0:
        return clean.copy()
    out = clean.data.copy()
    for b in range(clean.bands):
        rng = _band_rng(seed, _TAG_STRIPES, b)
        cols = rng.permutation(clean.width)[:n_striped]
        offsets = rng.uniform(-amplitude, amplitude, size=n_striped)
        band = out[b].astype(np.float64)
        band[:, cols] += offsets[np.newaxis, :]
        out[b] = band.astype(np.float32)
    return HsiCube(out)


def synthesize_case(clean: HsiCube, case: int, seed: int) -> tuple[HsiCube, NoiseSpec]:
    """One of the four experimental cases: Gaussian sigma 0.2, then impulse
    noise at p = 0, 0.05, 0.1, 0.15 for cases 1..4.  Returns the realized
    spec for reproducibility."""
    if case not in CASE_TABLE:
        raise ValueError(f"unknown noise case {case}, expected one of {sorted(CASE_TABLE)}")
    sigma, p = CASE_TABLE[case]
    noisy = add_impulse(add_gaussian(clean, sigma, seed), p, seed)
    spec = NoiseSpec(gaussian_sigma=sigma, sparse_fraction=p, seed=seed)
    return noisy, spec


def apply_noise(clean: HsiCube, spec: NoiseSpec) -> HsiCube:
    """Replay a NoiseSpec: Gaussian first, then the sparse component(s)."""
    out = add_gaussian(clean, spec.gaussian_sigma, spec.seed)
    if spec.sparse_kind in (SparseKind.IMPULSE, SparseKind.BOTH):
        out = add_impulse(out, spec.sparse_fraction, spec.seed)
    if spec.sparse_kind in (SparseKind.STRIPES, SparseKind.BOTH):
        out = add_stripes(out, spec.stripe_fraction, spec.stripe_amplitude, spec.seed)
    return out
