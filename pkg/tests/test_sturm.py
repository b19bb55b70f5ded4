import math
import warnings

import numpy as np
import pytest

from detproc.errors import DomainError
from detproc.kernels import (
    RATIO_LIMIT,
    SH_LIMIT,
    SH_SH,
    SIN_SH,
    SineKernel,
    StationaryKernel,
    TailConstants,
    WhittakerKernel,
    classify_series,
)
from detproc.sturm import (
    commutation_residual,
    default_grid,
    sl_params_sine,
    sl_params_stationary,
    sl_params_whittaker,
)

STATIONARY_CASES = [
    TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH),
    TailConstants(A=math.pi, B=2 * math.pi, variant=SH_SH),
    TailConstants(A=math.pi, B=0.0, variant=SH_LIMIT),
    TailConstants(A=0.0, B=math.pi ** 2 / 2, variant=RATIO_LIMIT),
]


class TestCoefficients:
    def test_sine_values(self):
        sl = sl_params_sine(1.0)
        assert sl.p(1.0) == pytest.approx(0.0, abs=1e-14)
        assert sl.p(-1.0) == pytest.approx(0.0, abs=1e-14)
        assert sl.q(0.0) == 0.0
        assert sl.p(0.5) == pytest.approx(-0.75)
        assert sl.q(0.5) == pytest.approx(math.pi ** 2 / 4)

    @pytest.mark.parametrize("c", STATIONARY_CASES)
    def test_stationary_endpoint_zeros(self, c):
        for tau in (0.3, 1.0, 2.5):
            sl = sl_params_stationary(c, tau)
            assert abs(sl.p(tau)) <= 1e-12 * max(1.0, abs(sl.p(0.0)))
            assert abs(sl.p(-tau)) <= 1e-12 * max(1.0, abs(sl.p(0.0)))

    def test_stationary_b_to_zero_recovers_sine(self):
        sine = sl_params_sine(1.0)
        small_b = sl_params_stationary(
            TailConstants(A=math.pi, B=1e-5, variant=SIN_SH), 1.0)
        limit = sl_params_stationary(
            TailConstants(A=math.pi, B=0.0, variant=SH_LIMIT), 1.0)
        for x in (-0.7, 0.2, 0.9):
            assert small_b.p(x) == pytest.approx(sine.p(x), abs=1e-8)
            assert small_b.q(x) == pytest.approx(sine.q(x), abs=1e-6)
            assert limit.p(x) == pytest.approx(sine.p(x), rel=1e-14)
            assert limit.q(x) == pytest.approx(sine.q(x), rel=1e-14)

    def test_stationary_substitution_point(self):
        c = TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH)
        sl = sl_params_stationary(c, 0.5)
        B = 2 * math.pi
        want_p = (math.sinh(B * 0.25) ** 2 - math.sinh(B * 0.5) ** 2) / B ** 2
        want_q = (B ** 2 + math.pi ** 2) * math.sinh(B * 0.25) ** 2 / B ** 2
        assert sl.p(0.25) == pytest.approx(want_p, rel=1e-14)
        assert sl.q(0.25) == pytest.approx(want_q, rel=1e-14)

    def test_whittaker_values(self):
        p = classify_series(0.25, 0.75)
        sl = sl_params_whittaker(p, 1.0)
        assert sl.p(1.0) == 0.0
        assert sl.p(0.0) == 0.0
        assert sl.q(1.0) == pytest.approx(0.0, abs=1e-14)
        assert sl.p(2.0) == pytest.approx(2.0)
        assert sl.q(2.0) == pytest.approx(-0.03125)

    def test_tau_validation(self):
        with pytest.raises(DomainError):
            sl_params_sine(0.0)


class TestCommutation:
    def test_sine_matched(self):
        sl = sl_params_sine(1.0)
        r = commutation_residual(SineKernel(), sl, default_grid(sl, 20))
        assert r <= 1e-6

    @pytest.mark.parametrize("c", STATIONARY_CASES)
    def test_stationary_matched(self, c):
        sl = sl_params_stationary(c, 0.5)
        r = commutation_residual(StationaryKernel(c), sl, default_grid(sl, 20))
        assert r <= 1e-6

    @pytest.mark.parametrize("c", STATIONARY_CASES)
    def test_stationary_perturbed_fails(self, c):
        sl = sl_params_stationary(c, 0.5).with_q_perturbation(lambda x: x)
        r = commutation_residual(StationaryKernel(c), sl, default_grid(sl, 20))
        assert r >= 1e-2

    def test_whittaker_matched(self):
        p = classify_series(0.25, 0.75)
        sl = sl_params_whittaker(p, 1.0)
        grid = default_grid(sl, 20, upper=5.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = commutation_residual(WhittakerKernel(p), sl, grid)
        assert r <= 1e-5

    def test_mismatched_pair_fails(self):
        sl = sl_params_stationary(
            TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH), 1.0)
        r = commutation_residual(SineKernel(), sl, default_grid(sl, 20))
        assert r >= 1e-2

    def test_h4_convergence(self):
        sl = sl_params_sine(1.0)
        grid = default_grid(sl, 12)
        r1 = commutation_residual(SineKernel(), sl, grid, fd_step=8e-3, richardson=False)
        r2 = commutation_residual(SineKernel(), sl, grid, fd_step=4e-3, richardson=False)
        assert r1 / r2 > 6  # ~16 for a clean h^4 error until roundoff

    def test_grid_validation(self):
        sl = sl_params_sine(1.0)
        with pytest.raises(DomainError):
            commutation_residual(SineKernel(), sl, (np.array([0.5]), np.array([0.505])))
        with pytest.raises(DomainError):
            commutation_residual(SineKernel(), sl, (np.array([1.5]), np.array([0.2])))
