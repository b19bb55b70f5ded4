"""Tail-process transforms and convergence checks, law-of-large-numbers
estimators, and the closed-form expectations of the Thoma parameter sums.

The expectation of the alpha-coordinate sum is

    E(sum alpha_i) = sin(pi z) sin(pi z') / (pi sin(pi (z - z')))
                     * [ (z - z')(z + z' - 1)/(2 z z') + psi(-z') - psi(-z) ],

and the beta-coordinate sum is the same expression at (-z, -z').  At
z = z' both factors degenerate (0 * oo); the value is recovered by
Richardson extrapolation in z' - z.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, InsufficientPointsError
from .kernels import (
    INTERSECTION,
    SpectralParams,
    StationaryKernel,
    WhittakerKernel,
    _as_real,
    tail_constants,
)
from .operators import Region
from .sampler import PointConfiguration
from .specfun import digamma, make_quadrature


# ---------------------------------------------------------------------------
# closed-form expectations

def _alpha_sum_formula(z: complex, zp: complex) -> complex:
    pref = np.sin(np.pi * z) * np.sin(np.pi * zp) / (np.pi * np.sin(np.pi * (z - zp)))
    brack = (z - zp) * (z + zp - 1) / (2 * z * zp) + digamma(-zp) - digamma(-z)
    return complex(pref * brack)


_RICHARDSON_DELTA = 1e-4


def _alpha_sum(z: complex, zp: complex, intersection: bool) -> float:
    if not intersection:
        val = _alpha_sum_formula(z, zp)
        return float(_as_real(val, "expected alpha sum", abs(val)))
    # z = z': extrapolate the complementary formula in delta = z' - z;
    # two Richardson stages leave an O(delta^3) error
    d = _RICHARDSON_DELTA
    f1 = _alpha_sum_formula(z, z + d)
    f2 = _alpha_sum_formula(z, z + d / 2)
    f3 = _alpha_sum_formula(z, z + d / 4)
    r1 = 2 * f2 - f1
    r2 = 2 * f3 - f2
    val = (4 * r2 - r1) / 3
    return float(_as_real(val, "expected alpha sum", abs(val)))


def expected_alpha_sum(params: SpectralParams) -> float:
    """E(sum of alpha coordinates) under the spectral measure of (z, z')."""
    return _alpha_sum(params.z, params.z_prime, params.series == INTERSECTION)


def expected_beta_sum(params: SpectralParams) -> float:
    """E(sum of beta coordinates); the alpha expression at (-z, -z')."""
    return _alpha_sum(-params.z, -params.z_prime, params.series == INTERSECTION)


# ---------------------------------------------------------------------------
# tail transform

@dataclass(frozen=True)
class TailTransform:
    """Decreasing map from (0, 1] to [0, oo) that flattens the intensity.

    logarithmic mode: xi = -C ln x.  exact mode: xi = int_x^1 rho1(y) dy
    with the supplied intensity.  A positive shift tau then maps xi to
    xi - tau on [-tau, oo).
    """

    mode: str
    C: float = 1.0
    shift: float = 0.0
    intensity: Callable | None = None

    def __post_init__(self):
        if self.mode not in ("exact", "logarithmic"):
            raise DomainError("TailTransform mode must be 'exact' or 'logarithmic'")
        if self.mode == "logarithmic" and self.C <= 0:
            raise DomainError("logarithmic mode needs C > 0")
        if self.mode == "exact" and self.intensity is None:
            raise DomainError("exact mode needs an intensity function")
        if self.shift < 0:
            raise DomainError("shift must be >= 0")

    def map_points(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0) or np.any(x > 1):
            raise DomainError("tail transform applies to points in (0, 1]")
        if self.mode == "logarithmic":
            xi = -self.C * np.log(x)
        else:
            xi = self._exact_xi(x)
        return xi - self.shift

    def _exact_xi(self, x: np.ndarray) -> np.ndarray:
        # cumulative intensity on a logarithmic grid, trapezoid in log y
        lo = min(float(np.min(x)), 1e-4) / 2
        s = np.linspace(math.log(lo), 0.0, 6000)
        y = np.exp(s)
        g = np.asarray(self.intensity(y)) * y
        cum = np.concatenate([[0.0], np.cumsum((g[1:] + g[:-1]) / 2 * np.diff(s))])
        total = cum[-1]
        return total - np.interp(np.log(x), s, cum)


def tail_transform_apply(tt: TailTransform, config: PointConfiguration) -> PointConfiguration:
    """Apply the transform; the image is sorted ascending in xi."""
    xi = tt.map_points(config.points)
    hi = float(np.max(xi, initial=0.0)) + 1.0
    region = Region(((-tt.shift, max(hi, -tt.shift + 1.0)),))
    return PointConfiguration(xi, region, dict(config.provenance), ascending=True)


# ---------------------------------------------------------------------------
# tail-kernel convergence

@dataclass(frozen=True)
class TailCheckRow:
    scale: float
    sup_deviation: float


def tail_convergence_check(params: SpectralParams, scales=(1e-1, 1e-2, 1e-3),
                           grid_n: int = 5, span: float = 1.2) -> list[TailCheckRow]:
    """Compare rescaled two-point Whittaker correlations near zero with the
    stationary-kernel determinant.

    At scale r the test points are x_i = r e^{-s_i} for s_i on a fixed
    grid in [0, span]; the rescaled correlation (x1 x2 / C^2) rho_2 must
    approach det of the stationary kernel at xi_i = C s_i as r -> 0.
    """
    c = tail_constants(params)
    C = c.C
    wk = WhittakerKernel(params)
    stat = StationaryKernel(c)
    s = np.linspace(0.0, span, grid_n)
    u = C * s
    Ks = stat.matrix(u)
    D_target = 1.0 - Ks ** 2  # det of the 2x2 stationary minors (diagonal is 1)
    rows = []
    for r in scales:
        x = r * np.exp(-s)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            Kw = wk.matrix(x)
        diag = np.diag(Kw)
        rho2 = diag[:, None] * diag[None, :] - Kw ** 2
        scaled = np.outer(x, x) / C ** 2 * rho2
        dev = np.abs(scaled - D_target)
        rows.append(TailCheckRow(scale=float(r), sup_deviation=float(np.max(dev))))
    return rows


# ---------------------------------------------------------------------------
# law of large numbers and decay rates

@dataclass(frozen=True)
class LlnRow:
    tau: float
    mean: float
    stderr: float
    variance: float


def counting_lln(configs: list[PointConfiguration], tau_grid) -> list[LlnRow]:
    """Mean and spread of N_tau / tau across configurations."""
    if not configs:
        raise DomainError("counting_lln needs configurations")
    taus = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    if np.any(taus <= 0):
        raise DomainError("tau grid must be positive")
    rows = []
    for tau in taus:
        ratios = np.array([np.sum(c.points <= tau) / tau for c in configs])
        n = len(ratios)
        rows.append(LlnRow(tau=float(tau), mean=float(ratios.mean()),
                           stderr=float(ratios.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                           variance=float(ratios.var(ddof=1)) if n > 1 else 0.0))
    return rows


def lln_square_integral(params: SpectralParams, tau: float, order: int = 256) -> float:
    """int_0^tau int_0^tau k^2(xi - eta) dxi deta for the translation
    invariant profile k(z) = sh((z-z') z/2) / ((z-z') sh(z/2)) (its
    z' -> z limit at the intersection), reduced to
    2 int_0^tau (tau - z) k^2(z) dz."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    d = params.z - params.z_prime
    rule = make_quadrature("gauss-legendre", order)
    zeta = tau / 2 * (rule.nodes + 1.0)
    w = tau / 2 * rule.weights
    if abs(d) < 1e-12:
        k = (zeta / 2) / np.sinh(zeta / 2)
    else:
        k = np.sinh(d * zeta / 2) / (d * np.sinh(zeta / 2))
        k = _as_real(k, "lln profile", float(np.max(np.abs(k))))
    small = zeta < 1e-8
    k = np.where(small, 1.0, k)
    return float(2.0 * np.sum(w * (tau - zeta) * k ** 2))


@dataclass(frozen=True)
class DecayRow:
    j: int
    mean: float
    stderr: float


def decay_rate_estimate(configs: list[PointConfiguration], j_max: int) -> list[DecayRow]:
    """Monte Carlo means of (x_j)^{1/j} for j = 1..j_max over descending
    configurations on (0, 1]."""
    if j_max < 1:
        raise DomainError("j_max must be >= 1")
    short = [i for i, c in enumerate(configs) if len(c) < j_max]
    if short:
        raise InsufficientPointsError(
            f"{len(short)} of {len(configs)} configurations have fewer than "
            f"{j_max} points")
    rates = np.array([[c.points[j - 1] ** (1.0 / j) for j in range(1, j_max + 1)]
                      for c in configs])
    n = len(configs)
    rows = []
    for j in range(1, j_max + 1):
        col = rates[:, j - 1]
        rows.append(DecayRow(j=j, mean=float(col.mean()),
                             stderr=float(col.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0))
    return rows
