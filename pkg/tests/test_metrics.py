import math

import numpy as np
import pytest

from hsihqs import (
    ConformabilityError,
    DegenerateInputError,
    HsiCube,
    add_gaussian,
    ergas,
    psnr,
    ssim,
)

from _reference import ref_ergas
from conftest import random_cube


class TestPsnr:
    def test_identical_is_infinite(self, small_cube):
        assert psnr(small_cube, small_cube) == math.inf

    def test_constant_offset_is_20db(self):
        ref = HsiCube(np.full((2, 8, 8), 0.25, dtype=np.float32))
        test = HsiCube(ref.data + np.float32(0.1))
        assert psnr(ref, test, peak=1.0) == pytest.approx(20.0, rel=1e-4)

    def test_monte_carlo_sigma_02(self):
        # E[MSE] = sigma^2 = 0.04 -> 10*log10(1/0.04) = 13.979 dB
        clean = HsiCube.zeros(32, 64, 64)  # 131072 elements
        noisy = add_gaussian(clean, sigma=0.2, seed=99)
        assert psnr(clean, noisy, peak=1.0) == pytest.approx(13.979, abs=0.3)

    def test_monotone_in_noise_level(self):
        clean = HsiCube.zeros(4, 64, 64)
        for seed in range(5):
            values = [psnr(clean, add_gaussian(clean, s, seed))
                      for s in (0.05, 0.1, 0.2, 0.4)]
            assert values == sorted(values, reverse=True)

    def test_validation(self, small_cube, rng):
        with pytest.raises(ValueError, match="peak"):
            psnr(small_cube, small_cube, peak=0.0)
        with pytest.raises(ConformabilityError):
            psnr(small_cube, random_cube(rng, bands=2))


class TestSsim:
    def test_identical_is_one(self, rng):
        cube = random_cube(rng, bands=3, height=32, width=32)
        assert ssim(cube, cube) == pytest.approx(1.0, abs=1e-9)

    def test_constant_offset_equals_luminance_term(self):
        # constants have zero variance, so contrast/structure terms are 1
        mu_x, mu_y, peak = 0.3, 0.8, 1.0
        ref = HsiCube(np.full((1, 16, 16), mu_x, dtype=np.float32))
        test = HsiCube(np.full((1, 16, 16), mu_y, dtype=np.float32))
        c1 = (0.01 * peak) ** 2
        expected = (2 * mu_x * mu_y + c1) / (mu_x**2 + mu_y**2 + c1)
        value = ssim(ref, test, peak)
        assert value == pytest.approx(expected, rel=1e-6)
        assert value < 1.0

    def test_independent_random_cubes_near_zero(self):
        for seed in (0, 1, 2):
            gen_a = np.random.default_rng(seed)
            gen_b = np.random.default_rng(seed + 1000)
            a = random_cube(gen_a, bands=4, height=64, width=64)
            b = random_cube(gen_b, bands=4, height=64, width=64)
            assert abs(ssim(a, b)) < 0.2

    def test_symmetry(self, rng):
        a = random_cube(rng, bands=2, height=24, width=24)
        b = random_cube(rng, bands=2, height=24, width=24)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-9)

    def test_window_too_large(self, rng):
        tiny = random_cube(rng, bands=1, height=8, width=8)
        with pytest.raises(DegenerateInputError):
            ssim(tiny, tiny)


class TestErgas:
    def test_identical_is_zero(self, small_cube):
        assert ergas(small_cube, small_cube) == 0.0

    def test_single_band_hand_value(self):
        # constant mean 1, RMSE 0.5 -> 100*sqrt(0.25/1) = 50
        ref = HsiCube(np.ones((1, 4, 4), dtype=np.float32))
        test = HsiCube(ref.data + np.float32(0.5))
        assert ergas(ref, test) == pytest.approx(50.0, rel=1e-6)

    def test_matches_two_loop_oracle(self, rng):
        ref = random_cube(rng, bands=3, height=8, width=8, lo=0.2, hi=1.0)
        test = HsiCube(ref.data + rng.normal(0, 0.05, ref.shape).astype(np.float32))
        expected = ref_ergas(ref.as_float64(), test.as_float64())
        assert ergas(ref, test) == pytest.approx(expected, rel=1e-6)

    def test_scale_ratio(self, rng):
        ref = random_cube(rng, lo=0.2, hi=1.0)
        test = random_cube(rng, lo=0.2, hi=1.0)
        assert ergas(ref, test, scale_ratio=0.25) == pytest.approx(
            0.25 * ergas(ref, test), rel=1e-12)

    def test_zero_mean_band_rejected(self):
        ref = HsiCube.zeros(1, 4, 4)
        test = HsiCube(np.ones((1, 4, 4), dtype=np.float32))
        with pytest.raises(DegenerateInputError, match="band 0"):
            ergas(ref, test)


def test_band_permutation_invariance(rng):
    ref = random_cube(rng, bands=5, lo=0.2, hi=1.0)
    test = random_cube(rng, bands=5, lo=0.2, hi=1.0)
    perm = rng.permutation(5)
    ref_p = HsiCube(ref.data[perm])
    test_p = HsiCube(test.data[perm])
    assert psnr(ref, test) == pytest.approx(psnr(ref_p, test_p), rel=1e-12)
    assert ssim(ref, test) == pytest.approx(ssim(ref_p, test_p), rel=1e-12)
    assert ergas(ref, test) == pytest.approx(ergas(ref_p, test_p), rel=1e-12)
