"""Hyperspectral image denoising toolkit.

Building blocks: the cube container and quality metrics, deterministic noise
synthesis, the alternating half-quadratic-splitting solver with pluggable
denoisers, the hyperweight estimator head, and a U-shaped
local/non-local/spectral attention denoiser with finite-difference gradient
verification.
"""

from .core import ConformabilityError, HsiCube, axpy_combine
from .demo import DemoResult, run_demo
from .denoisers import (
    GaussianSmoothDenoiser,
    IdentityDenoiser,
    QuadraticProxDenoiser,
    UlnsaDenoiser,
)
from .estimator import EstimatorConfig, build_estimator_weights, estimate
from .gradcheck import GradCheckResult, gradient_check
from .hsic import HsicFormatError, read_cube, write_cube
from .metrics import DegenerateInputError, MetricReport, ergas, evaluate, psnr, ssim
from .noise import (
    NoiseSpec,
    SparseKind,
    add_gaussian,
    add_impulse,
    add_stripes,
    apply_noise,
    synthesize_case,
)
from .phantom import block_ramp_phantom
from .solver import (
    Denoiser,
    DivergenceError,
    EnergyRecord,
    HyperParams,
    InitPolicy,
    SolverState,
    energy,
    quadratic_prior,
    run,
    soft_threshold,
    update_n,
    update_s,
    update_x,
    update_z,
)
from .ulnsa import (
    LnsaConfig,
    build_ulnsa_weights,
    ulnsa_forward,
    zero_residual_projections,
)
from .weights import WeightFormatError, WeightStore

__version__ = "0.1.0"

__all__ = [
    "ConformabilityError", "HsiCube", "axpy_combine",
    "MetricReport", "DegenerateInputError", "psnr", "ssim", "ergas", "evaluate",
    "NoiseSpec", "SparseKind", "add_gaussian", "add_impulse", "add_stripes",
    "apply_noise", "synthesize_case",
    "HyperParams", "SolverState", "Denoiser", "DivergenceError", "InitPolicy",
    "EnergyRecord", "update_x", "update_s", "update_n", "update_z",
    "soft_threshold", "energy", "quadratic_prior", "run",
    "IdentityDenoiser", "QuadraticProxDenoiser", "GaussianSmoothDenoiser",
    "UlnsaDenoiser",
    "EstimatorConfig", "build_estimator_weights", "estimate",
    "LnsaConfig", "build_ulnsa_weights", "ulnsa_forward",
    "zero_residual_projections",
    "GradCheckResult", "gradient_check",
    "WeightStore", "WeightFormatError",
    "read_cube", "write_cube", "HsicFormatError",
    "block_ramp_phantom",
    "DemoResult", "run_demo",
]
