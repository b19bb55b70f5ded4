"""Kernel families, parameter maps, Fourier transforms, admissibility tests.

Four kernel families are provided, each a real symmetric kernel on its
natural domain:

* the Whittaker kernel on (0, oo), parametrized by a spectral pair (z, z');
* translation-invariant kernels on R of sin/sh, sh/sh and limit types;
* the sine kernel (the minimal admissible B = 0 limit);
* the Laguerre Christoffel-Darboux kernel of a rank-N projection.

``tail_constants`` maps a spectral pair to the constants (A, B, C) of the
stationary kernel that describes the small-x scaling limit of the
Whittaker kernel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import specfun
from .errors import (
    AccuracyWarning,
    DomainError,
    NumericalError,
    SeriesClassificationError,
)

PRINCIPAL = "principal"
COMPLEMENTARY = "complementary"
INTERSECTION = "intersection"

SIN_SH = "sin_sh"
SH_SH = "sh_sh"
SH_LIMIT = "sh_limit"       # B = 0, kernel sin(A d)/(A d)
RATIO_LIMIT = "ratio_limit"  # A = 0, kernel B d / sh(B d)

_REAL_TOL = 1e-12
_IM_RESIDUE_TOL = 1e-10

# relative half-width |x-y| below which the ratio forms switch to the
# second-order diagonal expansion
_DIAG_SWITCH = 1e-4

# validated box of the Whittaker kernel
_WK_BOX = (1e-5, 40.0)


def _is_real(v: complex, scale: float = 1.0) -> bool:
    return abs(complex(v).imag) <= _REAL_TOL * max(1.0, scale)


def _is_integer(v: complex) -> bool:
    v = complex(v)
    return _is_real(v, abs(v)) and abs(v.real - round(v.real)) <= _REAL_TOL * max(1.0, abs(v))


def _as_real(v, what: str, scale: float = 1.0):
    """Discard an imaginary residue after checking it is below tolerance."""
    v = np.asarray(v)
    if np.iscomplexobj(v):
        mag = np.maximum(np.abs(v), scale)
        if np.any(np.abs(v.imag) > _IM_RESIDUE_TOL * np.maximum(mag, 1e-300)):
            worst = float(np.max(np.abs(v.imag) / np.maximum(mag, 1e-300)))
            raise NumericalError(f"{what}: imaginary residue {worst:.2e} exceeds tolerance")
        v = v.real
    return v


# ---------------------------------------------------------------------------
# spectral parameters

@dataclass(frozen=True)
class SpectralParams:
    """The admissible pair (z, z') with its derived quantities.

    t = z z', a = (z + z')/2, kappa = (z + z' + 1)/2, mu = (z - z')/2.
    """

    z: complex
    z_prime: complex
    series: str
    t: complex = field(init=False)
    a: complex = field(init=False)
    kappa: complex = field(init=False)
    mu: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "t", self.z * self.z_prime)
        object.__setattr__(self, "a", (self.z + self.z_prime) / 2)
        object.__setattr__(self, "kappa", (self.z + self.z_prime + 1) / 2)
        object.__setattr__(self, "mu", (self.z - self.z_prime) / 2)
        if not _is_real(self.t, abs(self.t)) or self.t.real <= 0:
            raise SeriesClassificationError(f"t = z*z' must be real positive, got {self.t}")
        if abs(self.mu.real) >= 0.5:
            raise SeriesClassificationError(f"|Re mu| must be < 1/2, got mu = {self.mu}")


def classify_series(z: complex, z_prime: complex) -> SpectralParams:
    """Decide which series (z, z') belongs to and build SpectralParams.

    Exactly one of the following must hold: z' = conj(z) with z not real
    (principal); z, z' real in the same open unit interval with integer
    ends and z != z' (complementary); z = z' real noninteger
    (intersection).
    """
    z = complex(z)
    z_prime = complex(z_prime)
    for v, name in ((z, "z"), (z_prime, "z'")):
        if _is_integer(v):
            raise SeriesClassificationError(
                f"{name} = {v} must be distinct from the integers")

    scale = max(1.0, abs(z), abs(z_prime))
    both_real = _is_real(z, scale) and _is_real(z_prime, scale)
    if not both_real:
        if abs(z_prime - z.conjugate()) <= _REAL_TOL * scale and not _is_real(z, scale):
            return SpectralParams(z, z_prime, PRINCIPAL)
        raise SeriesClassificationError(
            f"nonreal pair must satisfy z' = conj(z); got z={z}, z'={z_prime}")

    zr, zpr = z.real, z_prime.real
    if zr == zpr:
        return SpectralParams(complex(zr), complex(zpr), INTERSECTION)
    m = math.floor(zr)
    if m == math.floor(zpr) and m < zr < m + 1 and m < zpr < m + 1:
        return SpectralParams(complex(zr), complex(zpr), COMPLEMENTARY)
    raise SeriesClassificationError(
        f"real pair must lie in one open unit interval with integer ends; "
        f"got z={zr}, z'={zpr}")


# ---------------------------------------------------------------------------
# tail constants

@dataclass(frozen=True)
class TailConstants:
    """Constants (A, B, C) of the stationary tail kernel.

    A is stored as a nonnegative magnitude (the kernel is even in A).
    C defaults to 1/(2B), the intensity normalization constant.
    """

    A: float
    B: float
    variant: str
    C: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.variant not in (SIN_SH, SH_SH, SH_LIMIT, RATIO_LIMIT):
            raise DomainError(f"unknown stationary variant {self.variant!r}")
        object.__setattr__(self, "A", abs(self.A))  # the sign of A is immaterial
        if self.variant == SH_LIMIT:
            if self.B != 0:
                raise DomainError("sh_limit variant has B = 0")
            if self.A <= 0:
                raise DomainError("sh_limit variant needs A > 0")
        else:
            if self.B <= 0:
                raise DomainError("B must be positive")
        if self.variant == RATIO_LIMIT and self.A != 0:
            raise DomainError("ratio_limit variant has A = 0")
        if self.variant in (SIN_SH, SH_SH) and self.A == 0:
            raise DomainError(f"{self.variant} variant needs A > 0")
        if self.C is None:
            c = 1.0 / (2.0 * self.B) if self.B > 0 else math.inf
            object.__setattr__(self, "C", c)
        elif self.C <= 0:
            raise DomainError("C must be positive")


def tail_constants(params: SpectralParams) -> TailConstants:
    """Map a spectral pair to the constants of its stationary tail kernel."""
    z, zp = params.z, params.z_prime
    if params.series == INTERSECTION:
        s2 = math.sin(math.pi * z.real) ** 2
        B = math.pi ** 2 / (2 * s2)
        C = s2 / math.pi ** 2
        return TailConstants(A=0.0, B=B, variant=RATIO_LIMIT, C=C)

    sz = np.sin(np.pi * z) * np.sin(np.pi * zp)
    sd = np.sin(np.pi * (z - zp))
    B = complex(np.pi * sd / (2 * (z - zp) * sz))
    C = complex((z - zp) * sz / (np.pi * sd))
    B = float(_as_real(B, "tail constant B", abs(B)))
    C = float(_as_real(C, "tail constant C", abs(C)))
    if params.series == PRINCIPAL:
        A = abs(complex(1j * (z - zp))) * B
        variant = SIN_SH
    else:
        A = abs(complex(z - zp)) * B
        variant = SH_SH
    return TailConstants(A=A, B=B, variant=variant, C=C)


# ---------------------------------------------------------------------------
# kernel specs

class KernelSpec:
    """A real symmetric kernel on a fixed domain.

    Subclasses implement ``evaluate`` (broadcasting, real output) and
    declare ``domain`` as an (inf, sup) pair.
    """

    domain: tuple[float, float] = (-math.inf, math.inf)

    def evaluate(self, x, y):
        raise NotImplementedError

    def diagonal(self, x):
        return self.evaluate(x, x)

    def matrix(self, xs, ys=None) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = xs if ys is None else np.asarray(ys, dtype=float)
        return np.asarray(self.evaluate(xs[:, None], ys[None, :]), dtype=float)

    def check_domain(self, pts):
        pts = np.asarray(pts, dtype=float)
        lo, hi = self.domain
        if np.any(pts <= lo) or np.any(pts >= hi):
            raise DomainError(f"points outside kernel domain ({lo}, {hi})")
        return pts


@dataclass(frozen=True)
class SineKernel(KernelSpec):
    """sin(pi (x-y)) / (pi (x-y)) on the real line."""

    domain = (-math.inf, math.inf)

    def evaluate(self, x, y):
        return np.sinc(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))


@dataclass(frozen=True)
class StationaryKernel(KernelSpec):
    """Translation-invariant kernel of sin/sh, sh/sh or limit type,
    normalized to 1 on the diagonal."""

    constants: TailConstants

    domain = (-math.inf, math.inf)

    def evaluate(self, x, y):
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        c = self.constants
        A, B = c.A, c.B
        small = np.abs(d) < _DIAG_SWITCH
        ds = np.where(small, 1.0, d)  # placeholder argument, masked out below
        with np.errstate(over="ignore", invalid="ignore"):
            if c.variant == SIN_SH:
                far = B * np.sin(A * ds) / (A * np.sinh(B * ds))
                near = 1.0 - (A * A + B * B) * d * d / 6.0
            elif c.variant == SH_SH:
                far = B * np.sinh(A * ds) / (A * np.sinh(B * ds))
                near = 1.0 + (A * A - B * B) * d * d / 6.0
            elif c.variant == SH_LIMIT:
                far = np.sin(A * ds) / (A * ds)
                near = 1.0 - A * A * d * d / 6.0
            else:  # ratio_limit
                far = B * ds / np.sinh(B * ds)
                near = 1.0 - B * B * d * d / 6.0
        out = np.where(small, near, np.where(np.isfinite(far), far, 0.0))
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class LaguerreCDKernel(KernelSpec):
    """Rank-N Laguerre projection kernel via the Christoffel-Darboux sum
    (xy)^mu e^{-(x+y)/2} sum_{i<N} L_i(x) L_i(y) / ||L_i||^2."""

    N: int
    mu: float

    domain = (0.0, math.inf)

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("LaguerreCD kernel needs N >= 1")
        if 2 * self.mu <= -1:
            raise DomainError("LaguerreCD kernel needs 2*mu > -1")

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x < 0) or np.any(y < 0):
            raise DomainError("LaguerreCD kernel is defined for x, y >= 0")
        alpha = 2 * self.mu
        with np.errstate(divide="ignore"):
            pref = np.exp(self.mu * (np.log(np.where(x > 0, x, 1.0))
                                     + np.log(np.where(y > 0, y, 1.0)))
                          - (x + y) / 2)
        pref = pref * np.where((x > 0) | (self.mu == 0), 1.0, np.inf) \
                    * np.where((y > 0) | (self.mu == 0), 1.0, np.inf)
        acc = 0.0
        for i in range(self.N):
            norm = math.exp(specfun.log_gamma(i + alpha + 1).real - specfun.log_gamma(i + 1).real)
            acc = acc + specfun.laguerre(i, alpha, x) * specfun.laguerre(i, alpha, y) / norm
        out = pref * acc
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class WhittakerKernel(KernelSpec):
    """Integrable kernel on (0, oo) built from Whittaker W functions at
    first indices kappa and kappa - 1, with prefactor
    (xy)^{-1/2} / (Gamma(z) Gamma(z'))."""

    params: SpectralParams

    domain = (0.0, math.inf)

    def _gamma_factor(self) -> float:
        g = np.exp(specfun.log_gamma(self.params.z) + specfun.log_gamma(self.params.z_prime))
        return float(_as_real(g, "Gamma(z)Gamma(z')", abs(g)))

    def _w_orders(self, pts: np.ndarray, lowest: int) -> list[np.ndarray]:
        """W at first indices kappa, kappa-1, ..., kappa-lowest on pts."""
        p = self.params
        return [np.atleast_1d(specfun.whittaker_w(p.kappa - j, p.mu, pts))
                for j in range(lowest + 1)]

    def _wronskian_terms(self, m: np.ndarray):
        """W, W' at orders kappa, kappa-1 on midpoints m (via the W_{kappa-2}
        recurrence), plus the ODE coefficients for higher derivatives."""
        p = self.params
        w0, w1, w2 = self._w_orders(m, 2)
        k0, k1 = p.kappa, p.kappa - 1
        d0 = (-0.5 + k0 / m) * w0 + ((0.5 - k0 + p.mu) * (0.5 - k0 - p.mu) / m) * w1
        d1 = (-0.5 + k1 / m) * w1 + ((0.5 - k1 + p.mu) * (0.5 - k1 - p.mu) / m) * w2
        om0 = 0.25 - k0 / m + (p.mu ** 2 - 0.25) / m ** 2
        om1 = 0.25 - k1 / m + (p.mu ** 2 - 0.25) / m ** 2
        om0p = k0 / m ** 2 - 2 * (p.mu ** 2 - 0.25) / m ** 3
        om1p = k1 / m ** 2 - 2 * (p.mu ** 2 - 0.25) / m ** 3
        return w0, w1, d0, d1, om0, om1, om0p, om1p

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x <= 0) or np.any(y <= 0):
            raise DomainError("Whittaker kernel is defined for x, y > 0")
        if (np.any(x < _WK_BOX[0]) or np.any(x > _WK_BOX[1])
                or np.any(y < _WK_BOX[0]) or np.any(y > _WK_BOX[1])):
            warnings.warn("Whittaker kernel evaluated outside validated box",
                          AccuracyWarning, stacklevel=2)
        xb, yb = np.broadcast_arrays(x, y)
        shape = xb.shape
        xf = xb.ravel()
        yf = yb.ravel()
        out = np.empty(xf.shape, dtype=complex)
        near = np.abs(xf - yf) < _DIAG_SWITCH * np.maximum(1.0, np.abs(xf))
        gg = self._gamma_factor()

        if np.any(~near):
            xs, ys = xf[~near], yf[~near]
            pts = np.unique(np.concatenate([xs, ys]))
            w0, w1 = self._w_orders(pts, 1)
            ix = np.searchsorted(pts, xs)
            iy = np.searchsorted(pts, ys)
            num = w0[ix] * w1[iy] - w0[iy] * w1[ix]
            out[~near] = num / ((xs - ys) * np.sqrt(xs * ys) * gg)

        if np.any(near):
            xs, ys = xf[near], yf[near]
            m = (xs + ys) / 2
            um, inv = np.unique(m, return_inverse=True)
            w0, w1, d0, d1, om0, om1, om0p, om1p = self._wronskian_terms(um)
            wr = d0 * w1 - w0 * d1
            # second-order expansion of the antisymmetric ratio around the
            # diagonal; third derivatives reduced through the Whittaker ODE
            t3 = (om0p * w0 + om0 * d0) * w1 - w0 * (om1p * w1 + om1 * d1)
            t21 = om0 * w0 * d1 - om1 * w1 * d0
            dd = ((xs - ys) / 2) ** 2
            ratio = wr[inv] + dd * (t3[inv] - 3 * t21[inv]) / 6.0
            out[near] = ratio / (np.sqrt(xs * ys) * gg)

        vals = _as_real(out, "Whittaker kernel value", float(np.max(np.abs(out), initial=1e-300)))
        vals = vals.reshape(shape)
        return vals if vals.ndim else float(vals)


# functional forms mirroring the kernel specs ------------------------------

def whittaker_kernel(params: SpectralParams, x, y):
    """Whittaker kernel value K(x, y) for x, y > 0."""
    return WhittakerKernel(params).evaluate(x, y)


def laguerre_cd_kernel(N: int, mu: float, x, y):
    """Laguerre Christoffel-Darboux kernel of rank N, weight x^{2mu} e^{-x}."""
    return LaguerreCDKernel(N, mu).evaluate(x, y)


def laguerre_cd_kernel_ratio(N: int, mu: float, x, y):
    """Two-term ratio form of the Laguerre CD kernel (off-diagonal only);
    kept as an independent cross-check of the sum form."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x == y):
        raise DomainError("ratio form is undefined on the diagonal")
    alpha = 2 * mu
    lg = specfun.log_gamma(N + 1).real - specfun.log_gamma(N + alpha).real
    pref = np.exp(lg + mu * (np.log(x) + np.log(y)) - (x + y) / 2)
    num = (specfun.laguerre(N - 1, alpha, x) * specfun.laguerre(N, alpha, y)
           - specfun.laguerre(N - 1, alpha, y) * specfun.laguerre(N, alpha, x))
    return pref * num / (x - y)


def stationary_kernel(c: TailConstants, xi, eta):
    """Stationary kernel value at (xi, eta); equals 1 on the diagonal."""
    return StationaryKernel(c).evaluate(xi, eta)


def sine_kernel(x, y):
    return SineKernel().evaluate(x, y)


# ---------------------------------------------------------------------------
# Fourier transforms and admissibility

def fourier_khat(c: TailConstants, y):
    """Closed-form Fourier transform k^ of the stationary kernel profile,
    normalized so k(x) = (1/2pi) int e^{-ixy} k^(y) dy."""
    y = np.asarray(y, dtype=float)
    A, B = c.A, c.B
    with np.errstate(over="ignore"):
        if c.variant == SIN_SH:
            ch = np.cosh(math.pi * y / B)
            out = math.pi * math.sinh(math.pi * A / B) / (A * (math.cosh(math.pi * A / B) + ch))
        elif c.variant == SH_SH:
            if A / B >= 1:
                raise DomainError("sh/sh transform requires |A| < B")
            ch = np.cosh(math.pi * y / B)
            out = math.pi * math.sin(math.pi * A / B) / (A * (math.cos(math.pi * A / B) + ch))
        elif c.variant == SH_LIMIT:
            out = (math.pi / A) * (np.abs(y) < A)
        else:  # ratio_limit
            ch = np.cosh(math.pi * y / B)
            out = math.pi ** 2 / (B * (1.0 + ch))
    out = np.where(np.isfinite(out), out, 0.0)
    return out if np.ndim(out) else float(out)


def fourier_khat_numeric(c: TailConstants, y: float, cutoff: float | None = None) -> float:
    """k^(y) by direct oscillatory quadrature, 2 int_0^oo k(x) cos(xy) dx."""
    spec = StationaryKernel(c)
    if cutoff is None:
        decay = c.B - (c.A if c.variant == SH_SH else 0.0)
        cutoff = 60.0 if decay <= 0 else max(10.0, 40.0 / decay)
    val, _ = quad(lambda x: spec.evaluate(x, 0.0), 0.0, cutoff,
                  weight="cos", wvar=float(y), limit=400)
    return 2.0 * val


@dataclass(frozen=True)
class AdmissibilityResult:
    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


_ADM_TOL = 1e-12


def admissible(c: TailConstants) -> AdmissibilityResult:
    """Whether the stationary kernel generates a fermion point process,
    equivalently 0 <= k^ <= 1 with k^ < 1 at infinity."""
    A, B = c.A, c.B
    if c.variant == SIN_SH:
        if math.tanh(math.pi * A / (2 * B)) <= A / math.pi + _ADM_TOL:
            return AdmissibilityResult(True, "th(pi*A/(2B)) <= A/pi holds")
        return AdmissibilityResult(False, "th(pi*A/(2B)) <= A/pi violated")
    if c.variant == SH_SH:
        if A / B >= 1:
            return AdmissibilityResult(False, "|A| < B required")
        t = math.tan(math.pi * A / (2 * B))
        if 0 <= t <= A / math.pi + _ADM_TOL:
            return AdmissibilityResult(True, "0 <= tg(pi*A/(2B)) <= A/pi holds")
        return AdmissibilityResult(False, "0 <= tg(pi*A/(2B)) <= A/pi violated")
    if c.variant == SH_LIMIT:
        if A >= math.pi - _ADM_TOL:
            return AdmissibilityResult(True, "A >= pi holds")
        return AdmissibilityResult(False, "A >= pi required")
    if B >= math.pi ** 2 / 2 - _ADM_TOL:
        return AdmissibilityResult(True, "B >= pi^2/2 holds")
    return AdmissibilityResult(False, "B >= pi^2/2 required")
