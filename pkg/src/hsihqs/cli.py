"""Command-line surface.

Exit codes: 0 success, 1 assertion or divergence failure, 2 usage or file
format error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .core import ConformabilityError, HsiCube
from .demo import run_demo
from .denoisers import GaussianSmoothDenoiser, QuadraticProxDenoiser, UlnsaDenoiser
from .estimator import EstimatorConfig, build_estimator_weights, estimate
from .gradcheck import GRADCHECK_OPS, gradient_check
from .hsic import HsicFormatError, read_cube, write_cube
from .metrics import DegenerateInputError, ergas, psnr, ssim
from .noise import NoiseSpec, SparseKind, add_stripes, synthesize_case
from .solver import DivergenceError, HyperParams, quadratic_prior, run, zero_prior
from .ulnsa import LnsaConfig, build_ulnsa_weights
from .weights import WeightFormatError, WeightStore

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class CliError(Exception):
    """Usage-level problem detected after argument parsing."""


def _cmd_synth(args) -> int:
    clean = read_cube(args.input)
    noisy, spec = synthesize_case(clean, case=args.case, seed=args.seed)
    if args.stripes > 0:
        noisy = add_stripes(noisy, args.stripes, args.stripe_amp, args.seed)
        kind = SparseKind.STRIPES if spec.sparse_fraction == 0 else SparseKind.BOTH
        spec = NoiseSpec(gaussian_sigma=spec.gaussian_sigma,
                         sparse_fraction=spec.sparse_fraction, sparse_kind=kind,
                         stripe_fraction=args.stripes, stripe_amplitude=args.stripe_amp,
                         seed=args.seed)
    write_cube(noisy, args.output)
    sidecar = args.output + ".spec"
    with open(sidecar, "w") as fh:
        fh.write(spec.to_keyvalue())
    print(f"wrote {args.output} and {sidecar}")
    return EXIT_OK


def _parse_param_list(text: str, name: str, k: int) -> np.ndarray:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"--{name}: {exc}") from exc
    if len(values) == 1:
        values = values * k
    if len(values) != k:
        raise CliError(f"--{name} needs 1 or {k} comma-separated values, got {len(values)}")
    return np.asarray(values)


def _load_weights(args) -> WeightStore:
    if args.weights is not None:
        return WeightStore.load(args.weights)
    raise CliError("this configuration needs --weights FILE or --weights-seed S")


def _cmd_denoise(args) -> int:
    noisy = read_cube(args.input)
    k = args.iters
    if k < 1:
        raise CliError("--iters must be >= 1")

    cfg = LnsaConfig()
    store: WeightStore | None = None
    if args.weights is not None:
        store = WeightStore.load(args.weights)
    elif args.weights_seed is not None:
        store = WeightStore()
        if args.params == "estimated":
            build_estimator_weights(
                EstimatorConfig(bands=noisy.bands, iterations=k),
                args.weights_seed, store)
        if args.denoiser == "ulnsa":
            build_ulnsa_weights(noisy.bands, noisy.height, noisy.width, cfg,
                                args.weights_seed, store)

    if args.params == "manual":
        if any(v is None for v in (args.alpha, args.beta, args.gamma, args.lam)):
            raise CliError("--params manual needs --alpha --beta --gamma --lambda")
        params = HyperParams(
            alpha=_parse_param_list(args.alpha, "alpha", k),
            beta=_parse_param_list(args.beta, "beta", k),
            gamma=_parse_param_list(args.gamma, "gamma", k),
            lam=_parse_param_list(args.lam, "lambda", k),
        )
    else:
        if store is None or not store.has_prefix("est."):
            raise CliError("--params estimated needs estimator weights "
                           "(--weights FILE or --weights-seed S)")
        params = estimate(noisy, k, store)

    if args.denoiser == "gaussian":
        denoiser = GaussianSmoothDenoiser()
        phi = zero_prior
    elif args.denoiser == "prox-quadratic":
        denoiser = QuadraticProxDenoiser()
        phi = quadratic_prior
    else:
        if store is None or not store.has_prefix("ulnsa."):
            raise CliError("--denoiser ulnsa needs network weights "
                           "(--weights FILE or --weights-seed S)")
        denoiser = UlnsaDenoiser(store, cfg)
        phi = zero_prior

    denoised, trace = run(noisy, params, denoiser, phi=phi,
                          record_energy=args.trace is not None)
    write_cube(denoised, args.output)
    if args.trace is not None:
        with open(args.trace, "w") as fh:
            fh.write("iteration,update,energy,seconds\n")
            for rec in trace:
                fh.write(f"{rec.iteration},{rec.update},{rec.energy:.10g},"
                         f"{rec.seconds:.6f}\n")
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    reference = read_cube(args.ref)
    test = read_cube(args.test)
    report_psnr = psnr(reference, test, args.peak)
    report_ssim = ssim(reference, test, args.peak)
    report_ergas = ergas(reference, test, args.ergas_ratio)
    psnr_text = "inf" if math.isinf(report_psnr) else f"{report_psnr:.6f}"
    print(f"psnr={psnr_text}")
    print(f"ssim={report_ssim:.6f}")
    print(f"ergas={report_ergas:.6f}")
    if args.csv is not None:
        with open(args.csv, "w") as fh:
            fh.write("psnr,ssim,ergas\n")
            fh.write(f"{psnr_text},{report_ssim:.6f},{report_ergas:.6f}\n")
    return EXIT_OK


def _cmd_gradcheck(args) -> int:
    result = gradient_check(args.op, seed=args.seed)
    verdict = "PASS" if result.passed else "FAIL"
    print(f"op={result.op} max_rel_error={result.max_rel_error:.3e} "
          f"threshold={result.threshold:.0e} {verdict}")
    return EXIT_OK if result.passed else EXIT_FAILURE


def _cmd_demo(args) -> int:
    result = run_demo(seed=args.seed, outdir=args.outdir)
    sys.stdout.write(result.table())
    if not result.passed:
        print("demo FAILED: improvement below requirement", file=sys.stderr)
        return EXIT_FAILURE
    print("demo PASS")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsihqs",
        description="Hyperspectral denoising: noise synthesis, HQS solver, "
                    "metrics, attention-denoiser gradient checks, demo.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize one of the four noise cases")
    p.add_argument("--case", type=int, required=True, choices=(1, 2, 3, 4))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--stripes", type=float, default=0.0,
                   help="fraction of columns striped per band")
    p.add_argument("--stripe-amp", type=float, default=0.2)
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("denoise", help="run the unfolding solver")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--denoiser", required=True,
                   choices=("gaussian", "prox-quadratic", "ulnsa"))
    p.add_argument("--params", required=True, choices=("manual", "estimated"))
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--gamma")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--weights", help="UWT1 weight file")
    p.add_argument("--weights-seed", type=int,
                   help="build seeded weights instead of loading a file")
    p.add_argument("--trace", help="CSV file for per-update energy and timing")
    p.set_defaults(handler=_cmd_denoise)

    p = sub.add_parser("eval", help="full-reference quality metrics")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--peak", type=float, default=1.0)
    p.add_argument("--ergas-ratio", type=float, default=1.0)
    p.add_argument("--csv")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--op", required=True, choices=sorted(GRADCHECK_OPS))
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_gradcheck)

    p = sub.add_parser("demo", help="end-to-end pipeline on the phantom")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--outdir", default="demo_out")
    p.set_defaults(handler=_cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (CliError, HsicFormatError, WeightFormatError, ConformabilityError,
            DegenerateInputError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
