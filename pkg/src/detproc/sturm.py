"""Sturm-Liouville operators commuting with the restricted kernel operators.

For each kernel family there is a differential operator
D f = (p f')' + q f on the restriction interval such that
D_x K(x, y) = D_y K(x, y); the residual of this identity, evaluated by
high-order finite differences on an off-diagonal grid, is the numerical
commutation check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import DomainError
from .kernels import (
    SH_SH,
    KernelSpec,
    SpectralParams,
    TailConstants,
    _as_real,
)

# grid points closer to the diagonal than this are excluded; the removable
# kernel singularity there would contaminate the FD stencils
DIAG_BAND = 1e-2

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class SLCoefficients:
    """Coefficients of D f = (p f')' + q f on an interval.

    p vanishes at the named endpoints; p_prime is the closed-form
    derivative of p.
    """

    p: Callable
    p_prime: Callable
    q: Callable
    domain: tuple[float, float]
    tag: str
    zeros_of_p: tuple[float, ...]

    def with_q_perturbation(self, dq: Callable) -> "SLCoefficients":
        """Perturbed copy (negative control for the commutation test)."""
        base = self.q
        return replace(self, q=lambda x: base(x) + dq(x), tag=self.tag + "+perturbed")


def sl_params_sine(tau: float) -> SLCoefficients:
    """p(x) = x^2 - tau^2, q(x) = pi^2 x^2 on [-tau, tau]."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    return SLCoefficients(
        p=lambda x: x * x - tau * tau,
        p_prime=lambda x: 2.0 * x,
        q=lambda x: math.pi ** 2 * x * x,
        domain=(-tau, tau),
        tag="sine",
        zeros_of_p=(-tau, tau),
    )


def sl_params_stationary(c: TailConstants, tau: float) -> SLCoefficients:
    """p(x) = (sh^2(Bx) - sh^2(B tau))/B^2 and
    q(x) = (B^2 +- A^2) sh^2(Bx)/B^2 on [-tau, tau]; plus sign for the
    sin/sh family, minus for sh/sh, with the B -> 0 and A -> 0 limits
    taken in closed form."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    A, B = c.A, c.B
    sign = -1.0 if c.variant == SH_SH else 1.0
    if B == 0:
        p = lambda x: x * x - tau * tau
        pp = lambda x: 2.0 * x
        q = lambda x: A * A * x * x
    else:
        p = lambda x: (np.sinh(B * x) ** 2 - np.sinh(B * tau) ** 2) / B ** 2
        pp = lambda x: np.sinh(2.0 * B * x) / B
        coef = (B * B + sign * A * A) / B ** 2
        q = lambda x: coef * np.sinh(B * x) ** 2
    return SLCoefficients(p=p, p_prime=pp, q=q, domain=(-tau, tau),
                          tag=f"stationary-{c.variant}", zeros_of_p=(-tau, tau))


def sl_params_whittaker(params: SpectralParams, tau: float) -> SLCoefficients:
    """p(x) = x(x - tau), q(x) = -((a - x/2)^2 - t)(x - tau)/x on (tau, oo),
    with a = (z + z')/2 and t = z z'."""
    if tau <= 0:
        raise DomainError("tau must be positive")
    a = float(_as_real(params.a, "a = (z+z')/2", abs(params.a)))
    t = float(_as_real(params.t, "t = z z'", abs(params.t)))
    return SLCoefficients(
        p=lambda x: x * (x - tau),
        p_prime=lambda x: 2.0 * x - tau,
        q=lambda x: -(((a - x / 2) ** 2 - t) * (x - tau)) / x,
        domain=(tau, math.inf),
        tag="whittaker",
        zeros_of_p=(0.0, tau),
    )


# ---------------------------------------------------------------------------
# commutation residual

_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_W = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_D2_W = np.array([-1.0, 16.0, 16.0, -1.0]) / 12.0


def _fd_derivatives(f0, fh, h):
    """4th-order first and second derivatives from values at x + j h,
    j in {-2, -1, 1, 2} (rows of fh) and at x (f0)."""
    d1 = (fh * _D1_W[:, None]).sum(axis=0) / h
    d2 = ((fh * _D2_W[:, None]).sum(axis=0) - 2.5 * f0) / h ** 2
    return d1, d2


def _apply_d(spec: KernelSpec, sl: SLCoefficients, xs, ys, h, richardson=True):
    """D_x K(x, y) on paired point arrays."""
    f0 = np.asarray(spec.evaluate(xs, ys), dtype=float)

    def derivs(step):
        X = xs[None, :] + _OFFSETS[:, None] * step[None, :]
        fh = np.asarray(spec.evaluate(X, ys[None, :]), dtype=float)
        return _fd_derivatives(f0, fh, step)

    d1, d2 = derivs(h)
    if richardson:
        d1b, d2b = derivs(h / 2)
        d1 = (16.0 * d1b - d1) / 15.0
        d2 = (16.0 * d2b - d2) / 15.0
    return sl.p_prime(xs) * d1 + sl.p(xs) * d2 + sl.q(xs) * f0


def default_grid(sl: SLCoefficients, n: int = 20, margin: float = 0.05,
                 upper: float | None = None):
    """Off-diagonal interior grid for the commutation check."""
    lo, hi = sl.domain
    if not math.isfinite(hi):
        hi = upper if upper is not None else lo + 4.0
    pad = margin * (hi - lo)
    pts = np.linspace(lo + pad, hi - pad, n)
    X, Y = np.meshgrid(pts, pts)
    keep = np.abs(X - Y) > DIAG_BAND
    return X[keep], Y[keep]


def commutation_residual(spec: KernelSpec, sl: SLCoefficients, grid,
                         fd_step: float = DEFAULT_FD_STEP,
                         richardson: bool = True) -> float:
    """max over the grid of |D_x K - D_y K| / (1 + |D_x K|).

    grid is a pair of equal-length coordinate arrays (off-diagonal, inside
    the domain; see default_grid).
    """
    xs, ys = (np.asarray(g, dtype=float).ravel() for g in grid)
    if xs.shape != ys.shape or xs.size == 0:
        raise DomainError("grid must be two equal-length nonempty arrays")
    lo, hi = sl.domain
    if np.any((xs <= lo) | (xs >= hi) | (ys <= lo) | (ys >= hi)):
        raise DomainError("grid must lie strictly inside the operator domain")
    if np.any(np.abs(xs - ys) <= DIAG_BAND):
        raise DomainError(f"grid must stay outside the diagonal band {DIAG_BAND}")
    hx = fd_step * np.maximum(1.0, np.abs(xs))
    hy = fd_step * np.maximum(1.0, np.abs(ys))
    dx = _apply_d(spec, sl, xs, ys, hx, richardson)
    dy = _apply_d(spec, sl, ys, xs, hy, richardson)  # K symmetric
    resid = np.abs(dx - dy) / (1.0 + np.abs(dx))
    return float(np.max(resid))
