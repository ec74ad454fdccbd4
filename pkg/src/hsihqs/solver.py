"""Alternating half-quadratic-splitting loop for the additive degradation model.

Each iteration minimizes the penalized objective

    0.5*||Y - X - N - S||_F^2 + tau*Phi(Z) + lambda*||S||_1
    + gamma*||N||_F^2 + (mu/2)*||Z - X||^2

one block at a time, in the order X, Z, S, N:

    X <- (Y - N - S + mu*Z) / (1 + mu)
    Z <- denoise(X, noise_level = 1/sqrt(beta))      with beta = mu/tau
    S <- soft_threshold(Y - X - N, lambda)
    N <- (Y - X - S) / (1 + 2*gamma)

The per-iteration scalars (alpha = mu, beta, gamma, lambda) either come from
the hyperweight estimator or are supplied manually.
"""

from __future__ import annotations

import abc
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import HsiCube, NonFiniteError

__all__ = [
    "HyperParams",
    "SolverState",
    "Denoiser",
    "DivergenceError",
    "InitPolicy",
    "update_x",
    "soft_threshold",
    "update_s",
    "update_n",
    "update_z",
    "energy",
    "quadratic_prior",
    "EnergyRecord",
    "run",
]


class DivergenceError(RuntimeError):
    """A solver update produced non-finite values."""


def _as_float_array(values: Sequence[float], name: str, k: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size != k:
        raise ValueError(f"{name} must be a length-{k} sequence, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError(f"{name} entries must be strictly positive and finite")
    return arr


@dataclass(frozen=True)
class HyperParams:
    """Per-iteration parameter vectors.

    alpha[k] is the splitting penalty mu of iteration k, beta[k] = mu/tau
    fixes the denoiser's noise level 1/sqrt(beta[k]), and gamma/lam weight
    the Gaussian and sparse noise terms.  All four vectors have length K.
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        k = len(self.alpha)
        if k < 1:
            raise ValueError("K must be >= 1")
        object.__setattr__(self, "alpha", _as_float_array(self.alpha, "alpha", k))
        object.__setattr__(self, "beta", _as_float_array(self.beta, "beta", k))
        object.__setattr__(self, "gamma", _as_float_array(self.gamma, "gamma", k))
        object.__setattr__(self, "lam", _as_float_array(self.lam, "lambda", k))

    @property
    def iterations(self) -> int:
        return len(self.alpha)

    def tau(self, k: int) -> float:
        """tau of iteration k, recovered from beta = mu/tau."""
        return float(self.alpha[k] / self.beta[k])

    @classmethod
    def constant(cls, iterations: int, alpha: float, beta: float, gamma: float,
                 lam: float) -> "HyperParams":
        ones = np.ones(iterations, dtype=np.float64)
        return cls(alpha * ones, beta * ones, gamma * ones, lam * ones)


@dataclass
class SolverState:
    """The (X, Z, S, N) block variables plus the iteration counter."""

    x: HsiCube
    z: HsiCube
    s: HsiCube
    n: HsiCube
    k: int = 0


class Denoiser(abc.ABC):
    """Gaussian denoiser plugged into the Z update.

    Implementations must return a conformable, finite cube, and must return
    the input unchanged (within 1e-5 relative) at noise_level == 0.
    """

    @abc.abstractmethod
    def denoise(self, cube: HsiCube, noise_level: float) -> HsiCube:
        ...


class InitPolicy:
    FROM_OBSERVATION = "from_observation"  # Z = Y, S = N = 0
    ZEROS = "zeros"                        # Z = S = N = 0


def update_x(y: HsiCube, n: HsiCube, s: HsiCube, z: HsiCube, mu: float) -> HsiCube:
    """Closed-form X block: (Y - N - S + mu*Z) / (1 + mu)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    for other in (n, s, z):
        y.require_conformable(other, "update_x")
    num = y.as_float64() - n.as_float64() - s.as_float64() + mu * z.as_float64()
    return HsiCube((num / (1.0 + mu)).astype(np.float32))


def soft_threshold(x: HsiCube, delta: float) -> HsiCube:
    """x-delta above delta, x+delta below -delta, zero in between."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    arr = x.as_float64()
    out = np.sign(arr) * np.maximum(np.abs(arr) - delta, 0.0)
    return HsiCube(out.astype(np.float32))


def update_s(y: HsiCube, x: HsiCube, n: HsiCube, lam: float) -> HsiCube:
    """Sparse-noise block: soft threshold of the residual Y - X - N at lambda."""
    for other in (x, n):
        y.require_conformable(other, "update_s")
    residual = HsiCube(
        (y.as_float64() - x.as_float64() - n.as_float64()).astype(np.float32)
    )
    return soft_threshold(residual, lam)


def update_n(y: HsiCube, x: HsiCube, s: HsiCube, gamma: float) -> HsiCube:
    """Gaussian-noise block: (Y - X - S) / (1 + 2*gamma)."""
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    for other in (x, s):
        y.require_conformable(other, "update_n")
    num = y.as_float64() - x.as_float64() - s.as_float64()
    return HsiCube((num / (1.0 + 2.0 * gamma)).astype(np.float32))


def update_z(x: HsiCube, beta: float, denoiser: Denoiser) -> HsiCube:
    """Prior block: denoise X at noise level 1/sqrt(beta)."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    out = denoiser.denoise(x, 1.0 / np.sqrt(beta))
    x.require_conformable(out, "update_z (denoiser output)")
    return out


PriorFn = Callable[[HsiCube], float]


def quadratic_prior(z: HsiCube) -> float:
    """Phi(Z) = 0.5*||Z||^2, the prior whose prox the reference denoiser applies."""
    z64 = z.as_float64()
    return 0.5 * float(np.sum(z64 * z64))


def zero_prior(z: HsiCube) -> float:
    return 0.0


def energy(y: HsiCube, x: HsiCube, z: HsiCube, s: HsiCube, n: HsiCube,
           mu: float, tau: float, lam: float, gamma: float,
           phi: PriorFn = zero_prior) -> float:
    """The full penalized objective, accumulated in float64.

    phi is pluggable so tests can evaluate the exact quadratic prior; the
    default contributes nothing (useful when the denoiser's prior has no
    closed form).
    """
    for other in (x, z, s, n):
        y.require_conformable(other, "energy")
    y64, x64, z64, s64, n64 = (c.as_float64() for c in (y, x, z, s, n))
    fidelity = y64 - x64 - n64 - s64
    value = 0.5 * float(np.sum(fidelity * fidelity))
    value += tau * phi(z)
    value += lam * float(np.sum(np.abs(s64)))
    value += gamma * float(np.sum(n64 * n64))
    split = z64 - x64
    value += 0.5 * mu * float(np.sum(split * split))
    return value


@dataclass(frozen=True)
class EnergyRecord:
    """Objective value and wall time right after one block update."""

    iteration: int
    update: str  # one of "x", "z", "s", "n"
    energy: float
    seconds: float


def _guard(update: str, k: int, compute) -> HsiCube:
    # HsiCube construction rejects NaN/Inf, so any NonFiniteError inside a
    # block update means the iteration diverged; name the offending stage.
    try:
        return compute()
    except NonFiniteError as exc:
        raise DivergenceError(
            f"non-finite values in {update}-update at iteration {k}: {exc}"
        ) from exc


def run(y: HsiCube, params: HyperParams, denoiser: Denoiser,
        init: str = InitPolicy.FROM_OBSERVATION,
        phi: PriorFn = zero_prior,
        record_energy: bool = True) -> tuple[HsiCube, list[EnergyRecord]]:
    """Execute K iterations of the X -> Z -> S -> N scheme.

    Returns the final signal estimate and a per-update energy/timing trace.
    Energy uses the supplied prior callback; pass quadratic_prior when the
    denoiser is the exact quadratic prox so the trace is the true objective.
    """
    zero = HsiCube.zeros(*y.shape)
    if init == InitPolicy.FROM_OBSERVATION:
        state = SolverState(x=y.copy(), z=y.copy(), s=zero.copy(), n=zero.copy())
    elif init == InitPolicy.ZEROS:
        state = SolverState(x=zero.copy(), z=zero.copy(), s=zero.copy(), n=zero.copy())
    else:
        raise ValueError(f"unknown init policy {init!r}")

    trace: list[EnergyRecord] = []

    def record(update: str, k: int, started: float) -> None:
        elapsed = time.perf_counter() - started
        if record_energy:
            e = energy(y, state.x, state.z, state.s, state.n,
                       mu=params.alpha[k], tau=params.tau(k),
                       lam=params.lam[k], gamma=params.gamma[k], phi=phi)
        else:
            e = float("nan")
        trace.append(EnergyRecord(iteration=k, update=update, energy=e, seconds=elapsed))

    for k in range(params.iterations):
        t0 = time.perf_counter()
        state.x = _guard("x", k, lambda: update_x(y, state.n, state.s, state.z,
                                                  mu=params.alpha[k]))
        record("x", k, t0)

        t0 = time.perf_counter()
        state.z = _guard("z", k, lambda: update_z(state.x, beta=params.beta[k],
                                                  denoiser=denoiser))
        record("z", k, t0)

        t0 = time.perf_counter()
        state.s = _guard("s", k, lambda: update_s(y, state.x, state.n,
                                                  lam=params.lam[k]))
        record("s", k, t0)

        t0 = time.perf_counter()
        state.n = _guard("n", k, lambda: update_n(y, state.x, state.s,
                                                  gamma=params.gamma[k]))
        record("n", k, t0)

        state.k = k + 1

    return state.x, trace
