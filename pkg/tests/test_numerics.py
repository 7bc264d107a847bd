from __future__ import annotations

import math
import subprocess
import sys
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from copula_asym import copulas as cop
from copula_asym.numerics import (QuadratureError, SupResult, Tolerance, complete_beta,
                                  incomplete_beta, integrate2d, integrate2d_with_error,
                                  rng_stream, sup_on_square)

TIGHT = Tolerance(1e-11, 0.0, 80)


class TestTolerance:
    def test_needs_some_tolerance(self):
        with pytest.raises(ValueError):
            Tolerance(0.0, 0.0, 10)

    def test_refinements_positive(self):
        with pytest.raises(ValueError):
            Tolerance(1e-9, 0.0, 0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            Tolerance(-1.0, 1e-3, 5)


class TestIntegrate2d:
    def test_constant(self):
        assert integrate2d(lambda x, y: np.ones_like(x)) == pytest.approx(1.0, abs=1e-14)

    def test_abs_difference(self):
        assert integrate2d(lambda x, y: np.abs(x - y)) == pytest.approx(1 / 3, abs=1e-9)

    def test_regions_have_area_half(self):
        one = lambda x, y: np.ones_like(x)
        assert integrate2d(one, "triangle") == pytest.approx(0.5, abs=1e-14)
        assert integrate2d(one, "simplex") == pytest.approx(0.5, abs=1e-14)

    def test_triangle_is_upper_half(self):
        # {x <= y}: the mean of y there is 2/3
        assert integrate2d(lambda x, y: y, "triangle") == pytest.approx(1 / 3, abs=1e-13)
        assert integrate2d(lambda x, y: x, "triangle") == pytest.approx(1 / 6, abs=1e-13)

    def test_simplex_is_lower_left(self):
        # {x + z <= 1}: integral of x is 1/6
        assert integrate2d(lambda x, z: x, "simplex") == pytest.approx(1 / 6, abs=1e-13)

    def test_power(self):
        # int |x - y|^2 = 1/6
        assert integrate2d(lambda x, y: x - y, "square", 2.0) == pytest.approx(1 / 6, abs=1e-12)

    def test_polynomial_exactness_of_one_cell(self):
        # degree-5 tensor polynomial: exact from the first rule application
        f = lambda x, y: x ** 5 * y ** 4 + 3 * x ** 2 * y
        exact = 1 / 30 + 3 / 6
        assert integrate2d(f, tol=Tolerance(1e-13, 0, 1)) == pytest.approx(exact, abs=1e-15)

    def test_asymmetry_of_c23(self):
        c = cop.Cmu(2 / 3)
        res = integrate2d(lambda x, y: np.abs(c(x, y) - c(y, x)), tol=TIGHT)
        assert res == pytest.approx(10 / 243, abs=1e-9)

    def test_error_estimate_is_honest_on_kinks(self):
        # over {x <= y}: int_0^1 y^4/4 dy = 1/20
        val, err = integrate2d_with_error(lambda x, y: np.abs(x - y) ** 3, "triangle")
        assert abs(val - 1 / 20) <= err + 1e-15

    def test_nonconvergence_raises_with_estimate(self):
        f = lambda x, y: np.where(x * x + y * y < 0.5, 1.0, 0.0)
        with pytest.raises(QuadratureError) as info:
            integrate2d(f, tol=Tolerance(1e-14, 0.0, 2))
        assert info.value.estimate == pytest.approx(math.pi / 8, abs=0.05)
        assert info.value.residual > 0

    def test_bad_region(self):
        with pytest.raises(ValueError):
            integrate2d(lambda x, y: x, "disk")

    def test_bad_p(self):
        with pytest.raises(ValueError):
            integrate2d(lambda x, y: x, "square", 0.5)

    def test_deterministic(self):
        f = lambda x, y: np.abs(np.sin(7 * x) - y)
        assert integrate2d(f) == integrate2d(f)

    @given(st.floats(0.05, 0.95), st.floats(0.0, 2.0))
    def test_monotone(self, k, shift):
        tol = Tolerance(1e-9, 0, 60)
        f = lambda x, y: np.minimum(x, k * y)
        g = lambda x, y: np.minimum(x, k * y) + shift * x * y
        assert integrate2d(f, tol=tol) <= integrate2d(g, tol=tol) + 2 * tol.abs_tol


class TestSup:
    def test_separable(self):
        r = sup_on_square(lambda x, y: x * (1 - x) * y * (1 - y))
        assert r.value == pytest.approx(1 / 16, abs=1e-12)
        assert r.argmax == pytest.approx((0.5, 0.5), abs=1e-3)

    def test_c23(self):
        c = cop.Cmu(2 / 3)
        r = sup_on_square(lambda x, y: np.abs(c(x, y) - c(y, x)))
        assert r.value == pytest.approx(4 / 27, abs=1e-6)
        pt = sorted(r.argmax)
        assert pt == pytest.approx([4 / 9, 2 / 3], abs=1e-3)

    def test_off_grid_peak(self):
        x0, y0 = 0.123456789, 0.876543211
        f = lambda x, y: 1 - np.abs(x - x0) - np.abs(y - y0)
        r = sup_on_square(f, Tolerance(1e-9, 0, 64))
        assert r.value == pytest.approx(1.0, abs=1e-8)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_never_below_coarse_grid(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = rng.uniform(-3, 3, 3)
        f = lambda x, y: np.sin(a * x + b * y) + c * x * y
        r = sup_on_square(f, Tolerance(1e-4, 0, 64), grid=33)
        t = np.linspace(0, 1, 33)
        gx, gy = np.meshgrid(t, t, indexing="ij")
        assert r.value >= np.max(f(gx, gy))
        assert 0 <= r.argmax[0] <= 1 and 0 <= r.argmax[1] <= 1
        assert 0 < r.cell_size <= 1

    def test_result_validation(self):
        with pytest.raises(ValueError):
            SupResult(1.0, (1.5, 0.0), 0.1)
        with pytest.raises(ValueError):
            SupResult(1.0, (0.5, 0.5), 2.0)


class TestBeta:
    def test_zero(self):
        assert incomplete_beta(0.0, 2.0, 3.0) == 0.0

    def test_complete_beta_22(self):
        assert incomplete_beta(1.0, 2.0, 2.0) == pytest.approx(1 / 6, rel=1e-14)

    def test_one_third_3_2(self):
        # int_0^{1/3} x^2 (1 - x) dx = 1/81 - 1/324
        exact = float(Fraction(1, 81) - Fraction(1, 324))
        assert exact == pytest.approx(1 / 108, rel=1e-15)
        assert incomplete_beta(1 / 3, 3.0, 2.0) == pytest.approx(exact, rel=1e-13)

    @pytest.mark.parametrize("z,a,b", [(0.2, 0.5, 0.5), (1 / 3, 4.5, 3.5), (math.sqrt(2) - 1, 3.0, 2.0),
                                       (0.9, 7.0, 13.0), (0.5, 1.0, 1.0)])
    def test_against_mpmath_quadrature(self, z, a, b):
        mpmath.mp.dps = 30
        ref = mpmath.quad(lambda t: t ** (a - 1) * (1 - t) ** (b - 1), [0, z])
        assert incomplete_beta(z, a, b) == pytest.approx(float(ref), rel=1e-12)

    @given(st.floats(1.0, 20.0), st.floats(1.0, 20.0))
    def test_complete_matches_log_gamma(self, a, b):
        ref = math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
        assert incomplete_beta(1.0, a, b) == pytest.approx(ref, rel=1e-10)
        assert complete_beta(a, b) == pytest.approx(ref, rel=1e-10)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 10), st.floats(0.1, 10))
    def test_nondecreasing_in_z(self, z1, z2, a, b):
        lo, hi = sorted((z1, z2))
        assert incomplete_beta(lo, a, b) <= incomplete_beta(hi, a, b) * (1 + 1e-14)

    @pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            incomplete_beta(*args)


class TestRng:
    def test_same_seed_same_stream(self):
        assert np.array_equal(rng_stream(7).random(1000), rng_stream(7).random(1000))

    def test_different_seeds(self):
        assert not np.array_equal(rng_stream(7).random(10), rng_stream(8).random(10))

    def test_reproducible_across_processes(self):
        code = ("from copula_asym.numerics import rng_stream;"
                "print(repr(float(rng_stream(12345).random(1000).sum())))")
        runs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                               check=True).stdout for _ in range(2)}
        assert len(runs) == 1
        assert float(runs.pop()) == rng_stream(12345).random(1000).sum()
