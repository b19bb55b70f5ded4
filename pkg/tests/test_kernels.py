import math

import numpy as np
import pytest

from detproc.errors import DomainError, SeriesClassificationError
from detproc.kernels import (
    COMPLEMENTARY,
    INTERSECTION,
    PRINCIPAL,
    RATIO_LIMIT,
    SH_LIMIT,
    SH_SH,
    SIN_SH,
    LaguerreCDKernel,
    SineKernel,
    StationaryKernel,
    TailConstants,
    WhittakerKernel,
    admissible,
    classify_series,
    fourier_khat,
    fourier_khat_numeric,
    laguerre_cd_kernel,
    laguerre_cd_kernel_ratio,
    stationary_kernel,
    tail_constants,
    whittaker_kernel,
)
from detproc.specfun import make_quadrature


def random_spectral_params(rng, series=None):
    kind = series or rng.choice([PRINCIPAL, COMPLEMENTARY, INTERSECTION])
    if kind == PRINCIPAL:
        a = rng.uniform(-2, 2)
        b = rng.uniform(0.05, 2) * rng.choice([-1, 1])
        if abs(a - round(a)) < 0.05:
            a += 0.1
        return classify_series(complex(a, b), complex(a, -b))
    m = int(rng.integers(-2, 3))
    z = m + rng.uniform(0.05, 0.95)
    if kind == INTERSECTION:
        return classify_series(z, z)
    zp = m + rng.uniform(0.05, 0.95)
    while abs(zp - z) < 1e-3:
        zp = m + rng.uniform(0.05, 0.95)
    return classify_series(z, zp)


class TestClassifySeries:
    def test_principal(self):
        p = classify_series(0.5 + 0.5j, 0.5 - 0.5j)
        assert p.series == PRINCIPAL
        assert p.t == pytest.approx(0.5)
        assert p.kappa == pytest.approx(1.0)
        assert p.mu == pytest.approx(0.5j)

    def test_complementary(self):
        p = classify_series(0.25, 0.75)
        assert p.series == COMPLEMENTARY
        assert p.t == pytest.approx(0.1875)

    def test_intersection(self):
        p = classify_series(0.5, 0.5)
        assert p.series == INTERSECTION
        assert p.t == pytest.approx(0.25)

    @pytest.mark.parametrize("z,zp", [
        (1.0, 1.0),              # integer
        (0.5 + 0.5j, 0.5 + 0.5j),  # not conjugate
        (0.25, 1.75),            # different unit intervals
        (0.5 + 0.5j, 0.25),      # mixed real/complex
        (-0.5, 0.5),             # straddles an integer
    ])
    def test_rejections(self, z, zp):
        with pytest.raises(SeriesClassificationError):
            classify_series(z, zp)

    def test_t_real_positive_across_series(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            p = random_spectral_params(rng)
            assert abs(p.t.imag) <= 1e-12 * max(1, abs(p.t))
            assert p.t.real > 0


class TestWhittakerKernel:
    def test_symmetry_point(self):
        p = classify_series(0.3, 0.6)
        a = whittaker_kernel(p, 0.7, 1.3)
        b = whittaker_kernel(p, 1.3, 0.7)
        assert a == pytest.approx(b, rel=1e-12)
        # frozen arbitrary-precision evaluation of the two-term ratio form
        assert a == pytest.approx(0.06494505957611251, rel=1e-10)

    def test_diagonal_continuity(self):
        p = classify_series(0.5, 0.5)
        k = WhittakerKernel(p)
        diag = k.evaluate(1.0, 1.0)
        devs = [abs(k.evaluate(1.0, 1.0 + h) - diag) for h in (1e-2, 1e-3, 1e-5, 1e-7)]
        assert all(d2 < d1 for d1, d2 in zip(devs, devs[1:]))
        assert devs[-1] <= 1e-7

    def test_degenerates_to_laguerre_cd(self):
        p = classify_series(0.6, 1 - 1e-4)
        kw = WhittakerKernel(p)
        kl = LaguerreCDKernel(1, -0.2)
        for (x, y) in [(0.5, 1.5), (2.0, 3.0), (0.1, 4.9)]:
            assert kw.evaluate(x, y) == pytest.approx(kl.evaluate(x, y), abs=1e-3)

    def test_symmetry_random_grid(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            p = random_spectral_params(rng)
            k = WhittakerKernel(p)
            xs = rng.uniform(0.05, 10, size=8)
            M = k.matrix(xs)
            assert np.max(np.abs(M - M.T)) <= 1e-10 * max(1.0, np.max(np.abs(M)))

    def test_principal_series_real(self):
        p = classify_series(0.5 + 0.5j, 0.5 - 0.5j)
        vals = WhittakerKernel(p).matrix(np.linspace(0.1, 5, 9))
        assert np.isrealobj(vals)

    def test_domain_error(self):
        p = classify_series(0.5, 0.5)
        with pytest.raises(DomainError):
            whittaker_kernel(p, -1.0, 1.0)


class TestLaguerreCDKernel:
    def test_rank_one_formula(self):
        mu = -0.2
        k = laguerre_cd_kernel(1, mu, 1.3, 0.4)
        want = (1.3 * 0.4) ** mu * math.exp(-(1.3 + 0.4) / 2) / math.gamma(2 * mu + 1)
        assert k == pytest.approx(want, rel=1e-12)

    def test_rank_one_origin_mu_zero(self):
        assert laguerre_cd_kernel(1, 0.0, 0.0, 0.0) == pytest.approx(1.0)

    def test_ratio_equals_sum(self):
        a = laguerre_cd_kernel_ratio(3, -0.2, 1.0, 2.0)
        b = laguerre_cd_kernel(3, -0.2, 1.0, 2.0)
        assert a == pytest.approx(b, rel=1e-10)

    def test_trace_is_rank(self):
        mu = -0.2
        q = make_quadrature("gauss-laguerre", 32, alpha=2 * mu)
        k = LaguerreCDKernel(2, mu)
        trace = np.sum(q.weights * k.diagonal(q.nodes) * np.exp(q.nodes) * q.nodes ** (-2 * mu))
        assert trace == pytest.approx(2.0, rel=1e-10)

    def test_bad_args(self):
        with pytest.raises(DomainError):
            LaguerreCDKernel(0, -0.2)
        with pytest.raises(DomainError):
            LaguerreCDKernel(1, -0.6)


class TestTailConstants:
    def test_intersection_half(self):
        c = tail_constants(classify_series(0.5, 0.5))
        assert c.variant == RATIO_LIMIT
        assert c.A == 0.0
        assert c.B == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
        assert c.C == pytest.approx(1 / math.pi ** 2, rel=1e-12)

    def test_principal_unit_imaginary(self):
        c = tail_constants(classify_series(1j, -1j))
        assert c.variant == SIN_SH
        assert c.C == pytest.approx(math.tanh(math.pi) / math.pi, rel=1e-12)

    def test_complementary_quarter(self):
        c = tail_constants(classify_series(0.25, 0.75))
        assert c.variant == SH_SH
        assert c.B == pytest.approx(2 * math.pi, rel=1e-12)
        assert c.A == pytest.approx(math.pi, rel=1e-12)
        assert c.C == pytest.approx(1 / (4 * math.pi), rel=1e-12)
        assert c.A / c.B == pytest.approx(0.5, rel=1e-12)  # equals |z - z'| < 1

    def test_c_is_half_inverse_b(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            c = tail_constants(random_spectral_params(rng))
            assert c.C == pytest.approx(1 / (2 * c.B), rel=1e-10)

    def test_shift_and_negation_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            p = random_spectral_params(rng)
            c = tail_constants(p)
            shifted = tail_constants(classify_series(p.z + 1, p.z_prime + 1))
            negated = tail_constants(classify_series(-p.z, -p.z_prime))
            for other in (shifted, negated):
                assert other.variant == c.variant
                assert other.A == pytest.approx(c.A, rel=1e-9, abs=1e-12)
                assert other.B == pytest.approx(c.B, rel=1e-9)
                assert other.C == pytest.approx(c.C, rel=1e-9)


class TestStationaryKernel:
    @pytest.mark.parametrize("c", [
        TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH),
        TailConstants(A=math.pi, B=2 * math.pi, variant=SH_SH),
        TailConstants(A=math.pi, B=0.0, variant=SH_LIMIT),
        TailConstants(A=0.0, B=math.pi ** 2 / 2, variant=RATIO_LIMIT),
    ])
    def test_diagonal_is_one(self, c):
        for xi in (-3.0, 0.0, 7.5):
            assert stationary_kernel(c, xi, xi) == pytest.approx(1.0)

    def test_sinsh_value(self):
        c = TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH)
        want = 2 / math.sinh(math.pi)
        assert stationary_kernel(c, 0.5, 0.0) == pytest.approx(want, rel=1e-12)
        assert want == pytest.approx(0.17317907506009392, rel=1e-12)

    def test_b_to_zero_recovers_sine(self):
        c = TailConstants(A=math.pi, B=1e-4, variant=SIN_SH)
        sine = SineKernel()
        for d in np.linspace(-3, 3, 13):
            assert stationary_kernel(c, d, 0.0) == pytest.approx(sine.evaluate(d, 0.0), abs=1e-8)

    def test_sign_of_a_immaterial(self):
        cp = TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH)
        cm = TailConstants(A=-math.pi, B=2 * math.pi, variant=SIN_SH)
        d = np.linspace(-2, 2, 9)
        assert np.allclose(stationary_kernel(cp, d, 0.0), stationary_kernel(cm, d, 0.0))

    def test_symmetry_and_bound(self):
        c = TailConstants(A=1.0, B=2.0, variant=SH_SH)
        xi = np.linspace(-4, 4, 21)
        vals = stationary_kernel(c, xi[:, None], xi[None, :])
        assert np.allclose(vals, vals.T)
        assert np.max(np.abs(vals)) <= 1.0 + 1e-12

    def test_near_diagonal_series_continuity(self):
        c = TailConstants(A=2.0, B=3.0, variant=SIN_SH)
        # straddle the series/ratio switch; the jump must be no larger than
        # the true variation of K over the step, d(K)/dd * delta ~ 9e-10
        left = stationary_kernel(c, 0.99e-4, 0.0)
        right = stationary_kernel(c, 1.01e-4, 0.0)
        assert left == pytest.approx(right, abs=2e-9)
        # and the series branch agrees with the exact ratio where both apply
        exact = c.B * math.sin(c.A * 0.99e-4) / (c.A * math.sinh(c.B * 0.99e-4))
        assert left == pytest.approx(exact, abs=1e-12)


class TestFourier:
    def test_ratio_limit_boundary(self):
        c = TailConstants(A=0.0, B=math.pi ** 2 / 2, variant=RATIO_LIMIT)
        assert fourier_khat(c, 0.0) == pytest.approx(1.0, rel=1e-12)

    def test_normalization_integral(self):
        # (1/2pi) int k^ = k(0) = 1
        from scipy.integrate import quad
        c = TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH)
        val, _ = quad(lambda y: fourier_khat(c, y), -80, 80, limit=200)
        assert val / (2 * math.pi) == pytest.approx(1.0, rel=1e-8)

    def test_closed_matches_numeric_shsh(self):
        c = TailConstants(A=math.pi, B=2 * math.pi, variant=SH_SH)
        closed = fourier_khat(c, 1.5)
        assert closed == pytest.approx(0.7723896738572645, rel=1e-12)
        assert fourier_khat_numeric(c, 1.5) == pytest.approx(closed, abs=1e-6)

    def test_closed_matches_numeric_grid(self):
        specs = [
            TailConstants(A=math.pi, B=2 * math.pi, variant=SIN_SH),
            TailConstants(A=math.pi, B=2 * math.pi, variant=SH_SH),
            TailConstants(A=0.0, B=5.0, variant=RATIO_LIMIT),
        ]
        for c in specs:
            for y in (0.0, 0.7, 3.0, 10.0):
                assert fourier_khat_numeric(c, y) == pytest.approx(
                    fourier_khat(c, y), abs=1e-6)

    def test_shsh_requires_a_below_b(self):
        c = TailConstants(A=2.0, B=1.0, variant=SH_SH)
        with pytest.raises(DomainError):
            fourier_khat(c, 1.0)


class TestAdmissible:
    def test_sinsh_a_pi_any_b(self):
        for B in (0.3, 1.0, 2 * math.pi, 50.0):
            assert admissible(TailConstants(A=math.pi, B=B, variant=SIN_SH))

    def test_sh_limit_boundary(self):
        res = admissible(TailConstants(A=3.0, B=0.0, variant=SH_LIMIT))
        assert not res
        assert "A >= pi" in res.reason
        assert admissible(TailConstants(A=math.pi, B=0.0, variant=SH_LIMIT))

    def test_ratio_limit_boundary(self):
        assert not admissible(TailConstants(A=0.0, B=4.0, variant=RATIO_LIMIT))
        assert admissible(TailConstants(A=0.0, B=math.pi ** 2 / 2, variant=RATIO_LIMIT))

    def test_all_spectral_pairs_admissible(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            c = tail_constants(random_spectral_params(rng))
            assert admissible(c), c
