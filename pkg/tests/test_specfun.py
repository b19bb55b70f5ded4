import math

import numpy as np
import pytest

from detproc.errors import AccuracyWarning, DomainError, PoleError
from detproc.specfun import (
    digamma,
    laguerre,
    log_gamma,
    make_quadrature,
    whittaker_w,
    whittaker_w_prime,
)

# reference values computed with an arbitrary-precision oracle (mpmath, 30
# digits) before the implementation was written
W_REFERENCE = [
    ((2.4656044370036696-0.24448624099179073j), 3.227381279202442j, 0.30790852420780745, (0.06438827321291052-0.020094561295188135j)),
    ((-3.652403869011154+0j), (4.390300582365402+0j), 0.8802256928571974, (1.788102682552538+0j)),
    ((2.574578747492584+0j), -3.3469773059200874j, 0.0052687346535369075, (-0.00268383404397528+0j)),
    ((-1.162817781906769+1.7070599553944072j), (2.8973930403629904+0j), 2.4287827398010666, (-0.5352182706745596-0.015784261255542914j)),
    ((-0.5092722105540197+0j), -2.4548515039370082j, 0.029313173493217153, (-0.0013973430712421397+0j)),
    ((-3.925644695062422+0j), (3.7243402739666194+0j), 0.10433491926092398, (340.28218739864815+0j)),
    ((2.3227896607683647-0.5818961274805265j), 4.236282219554129j, 7.739005964245667, (0.05923990024771402+0.017796235197239777j)),
    ((2.5054514736638565+0j), (0.8758741853338541+0j), 0.006895321563237051, (0.8149262531297653+0j)),
    ((-4.105766107914941+0j), -3.1113945713920694j, 0.24321721984441907, (-5.576045730829381e-06+0j)),
    ((2.202859403170354+1.87003892973684j), (1.4662141116216838+0j), 0.0014124627558327742, (-5096.411961622451-11836.384513419196j)),
    ((-0.2739976985177286+0j), -2.794757768241429j, 2.6875474320271827e-05, (3.097451310035894e-05+0j)),
    ((-0.21865566396659641+0j), (1.0210920707289786+0j), 0.1955788322154438, (2.4739506847133996+0j)),
]


class TestLogGamma:
    def test_gamma_one(self):
        assert log_gamma(1.0) == pytest.approx(0.0, abs=1e-14)

    def test_gamma_half(self):
        assert log_gamma(0.5).real == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-13)

    def test_complex_point(self):
        # high-precision Lanczos/Stirling oracle value
        ref = -2.0928517530927335 + 2.302396543466868j
        got = log_gamma(2 + 3j)
        assert abs(got - ref) <= 1e-12 * abs(ref)

    @pytest.mark.parametrize("bad", [0, -1, -7])
    def test_pole(self, bad):
        with pytest.raises(PoleError):
            log_gamma(bad)


class TestDigamma:
    def test_recurrence(self):
        a = 2.5
        assert digamma(a + 1) - digamma(a) == pytest.approx(1 / a, rel=1e-12)
        assert (digamma(a + 1) - digamma(a)).real == pytest.approx(0.4, rel=1e-12)

    def test_reflection(self):
        a = 0.3
        lhs = digamma(a) - digamma(-a)
        rhs = -math.pi / math.tan(math.pi * a) - 1 / a
        assert lhs.real == pytest.approx(rhs, rel=1e-12)
        assert lhs.imag == pytest.approx(0.0, abs=1e-14)

    def test_euler_constant(self):
        assert digamma(1.0).real == pytest.approx(-0.5772156649015329, rel=1e-12)

    def test_pole(self):
        with pytest.raises(PoleError):
            digamma(-3)


class TestWhittakerW:
    def test_terminating_simple(self):
        assert whittaker_w(0.5, 0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-13)

    def test_terminating_shifted(self):
        assert whittaker_w(1.5, 1, 2.0) == pytest.approx(2 ** 1.5 * math.exp(-1), rel=1e-13)

    def test_imaginary_mu_point(self):
        # adaptive arbitrary-precision quadrature of the defining integral
        ref = 0.4934896919125531
        assert whittaker_w(0, 0.3j, 1.0) == pytest.approx(ref, rel=1e-11)

    @pytest.mark.parametrize("kappa,mu,x,ref", W_REFERENCE)
    def test_reference_box(self, kappa, mu, x, ref):
        got = whittaker_w(kappa, mu, x)
        assert abs(got - ref) <= 1e-9 * abs(ref)

    def test_mu_symmetry_grid(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            kappa = complex(rng.uniform(-4, 4), rng.uniform(-1, 1))
            mu = complex(rng.uniform(0, 3), rng.uniform(-3, 3))
            x = float(10 ** rng.uniform(-4, 1.5))
            a = whittaker_w(kappa, mu, x)
            b = whittaker_w(kappa, -mu, x)
            assert abs(a - b) <= 1e-10 * max(1e-300, abs(a))

    def test_vectorized_matches_scalar(self):
        xs = np.geomspace(1e-4, 30, 17)
        vec = whittaker_w(0.9, 0.4j, xs)
        for xi, vi in zip(xs, vec):
            assert vi == pytest.approx(whittaker_w(0.9, 0.4j, float(xi)), rel=1e-12)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            whittaker_w(0.5, 0, -1.0)
        with pytest.raises(DomainError):
            whittaker_w(0.5, 0, 0.0)

    def test_accuracy_warning_outside_box(self):
        with pytest.warns(AccuracyWarning):
            whittaker_w(6.0, 0, 1.0)


class TestWhittakerWPrime:
    def test_terminating_derivative_zero(self):
        # W_{1/2,0}(x) = sqrt(x) e^{-x/2} has a critical point at x = 1
        assert abs(whittaker_w_prime(0.5, 0, 1.0)) <= 1e-13

    def test_against_central_difference(self):
        h = 1e-6
        fd = (whittaker_w(0.7, 0.2, 2 + h) - whittaker_w(0.7, 0.2, 2 - h)) / (2 * h)
        got = whittaker_w_prime(0.7, 0.2, 2.0)
        assert abs(got - fd) <= 1e-6 * abs(got)
        assert got.real == pytest.approx(-0.08964328729850904, rel=1e-10)

    def test_complex_mu_point(self):
        # frozen from the same recurrence evaluated in arbitrary precision,
        # cross-checked against a central difference
        assert whittaker_w_prime(1.0, 0.5j, 1.0) == pytest.approx(0.3986482211304612, rel=1e-10)

    def test_fd_consistency_grid(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            kappa = rng.uniform(-3, 3)
            mu = complex(rng.uniform(0, 2), rng.uniform(-2, 2))
            x = float(10 ** rng.uniform(-1, 1.2))
            h = 1e-5 * max(1.0, x)
            fd = (whittaker_w(kappa, mu, x + h) - whittaker_w(kappa, mu, x - h)) / (2 * h)
            got = whittaker_w_prime(kappa, mu, x)
            assert abs(got - fd) <= 1e-6 * max(abs(got), 1e-12)


class TestLaguerre:
    def test_degree_zero(self):
        for alpha, x in [(0.0, 0.3), (2.5, 7.0), (-0.4, 1.0)]:
            assert laguerre(0, alpha, x) == pytest.approx(1.0)

    def test_degree_one(self):
        assert laguerre(1, 0.5, 1.0) == pytest.approx(0.5, rel=1e-14)

    def test_whittaker_identity(self):
        # x^{-1/2} W_{mu+N+1/2, mu}(x) = (-1)^N N! x^mu e^{-x/2} L_N^{2mu}(x)
        N, mu, x = 2, -0.2, 1.5
        lhs = x ** -0.5 * whittaker_w(mu + N + 0.5, mu, x)
        rhs = math.factorial(N) * x ** mu * math.exp(-x / 2) * laguerre(N, 2 * mu, x)
        assert lhs.real == pytest.approx(rhs, rel=1e-12)
        assert rhs == pytest.approx(-0.6925609672889264, rel=1e-12)

    def test_bad_args(self):
        with pytest.raises(DomainError):
            laguerre(-1, 0.0, 1.0)
        with pytest.raises(DomainError):
            laguerre(2, -1.5, 1.0)


class TestQuadrature:
    def test_legendre_order_two(self):
        q = make_quadrature("gauss-legendre", 2)
        assert q.nodes == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)])
        assert q.weights == pytest.approx([1.0, 1.0])

    def test_legendre_polynomial_exactness(self):
        q = make_quadrature("gauss-legendre", 8)
        for k in range(2 * 8):
            exact = 2 / (k + 1) if k % 2 == 0 else 0.0
            assert q.integrate(lambda t: t ** k) == pytest.approx(exact, abs=1e-12)

    def test_laguerre_unit_mass(self):
        for order in (4, 32, 128):
            q = make_quadrature("gauss-laguerre", order)
            assert q.integrate(lambda t: np.ones_like(t)) == pytest.approx(1.0, rel=1e-12)

    def test_laguerre_third_moment(self):
        q = make_quadrature("gauss-laguerre", 2)
        assert q.integrate(lambda t: t ** 3) == pytest.approx(6.0, rel=1e-12)

    def test_bad_kind_and_order(self):
        with pytest.raises(DomainError):
            make_quadrature("gauss-hermite", 4)
        with pytest.raises(DomainError):
            make_quadrature("gauss-legendre", 0)
