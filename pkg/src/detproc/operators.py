"""Discretized kernel operators: Fredholm determinants, resolvents,
correlation and finite-dimensional distribution functions.

Operators are discretized by a symmetrized Nystrom rule: per-interval
Gauss-Legendre nodes x_i with weights w_i give the symmetric matrix
M[i, j] = sqrt(w_i) K(x_i, x_j) sqrt(w_j), whose spectrum approximates
the spectrum of the integral operator K restricted to the region.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, NumericalError, TruncationError
from .kernels import KernelSpec, SpectralParams, WhittakerKernel
from .specfun import make_quadrature

DEFAULT_ORDER = 64

_EIG_EPS = 1e-8


@dataclass(frozen=True)
class Region:
    """A finite union of disjoint bounded intervals.

    Semi-infinite regions enter only after truncation; the truncation
    point and the bound on the neglected tail mass are recorded.
    """

    intervals: tuple[tuple[float, float], ...]
    truncated_from: float | None = None
    tail_bound: float | None = None

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        if not ivs:
            return
        for a, b in ivs:
            if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
                raise DomainError(f"invalid interval ({a}, {b})")
        for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
            if b1 > a2:
                raise DomainError("intervals must be disjoint and sorted")

    @classmethod
    def interval(cls, a: float, b: float) -> "Region":
        return cls(((a, b),))

    @property
    def empty(self) -> bool:
        return not self.intervals

    @property
    def total_length(self) -> float:
        return sum(b - a for a, b in self.intervals)

    def split(self, max_len: float) -> "Region":
        """Subdivide long intervals into panels of length <= max_len."""
        out = []
        for a, b in self.intervals:
            n = max(1, math.ceil((b - a) / max_len))
            edges = np.linspace(a, b, n + 1)
            out.extend(zip(edges[:-1], edges[1:]))
        return replace(self, intervals=tuple(out))

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        ok = np.zeros(pts.shape, dtype=bool)
        for a, b in self.intervals:
            ok |= (pts >= a) & (pts <= b)
        return ok


@dataclass
class DiscretizedOperator:
    """Symmetrized Nystrom discretization of K restricted to a region."""

    spec: KernelSpec
    region: Region
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    _eig: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        m = self.matrix
        if m.size:
            asym = np.max(np.abs(m - m.T))
            if asym > 1e-12 * max(1.0, np.max(np.abs(m))):
                raise NumericalError(f"Nystrom matrix asymmetry {asym:.2e}")

    @property
    def size(self) -> int:
        return len(self.nodes)

    def eigh(self):
        if self._eig is None:
            vals, vecs = np.linalg.eigh(self.matrix) if self.size else (np.empty(0), np.empty((0, 0)))
            self._eig = (vals, vecs)
        return self._eig

    def eigenvalues(self) -> np.ndarray:
        return self.eigh()[0]

    def dpp_eigenvalues(self) -> np.ndarray:
        """Spectrum verified against [0, 1] (within 1e-8) and clipped to it."""
        vals = self.eigenvalues()
        if vals.size == 0:
            return vals
        if vals.min() < -_EIG_EPS or vals.max() > 1 + _EIG_EPS:
            raise NumericalError(
                f"operator spectrum [{vals.min():.3e}, {vals.max():.3e}] is not in [0, 1]; "
                "kernel inadmissible or discretization too coarse")
        if vals.max() > 1 - _EIG_EPS:
            warnings.warn("operator has an eigenvalue at the boundary of condition (**)",
                          stacklevel=2)
        return np.clip(vals, 0.0, 1.0)


def nystrom(spec: KernelSpec, region: Region, order: int = DEFAULT_ORDER) -> DiscretizedOperator:
    """Discretize the restriction of the kernel to the region with
    per-interval Gauss-Legendre rules of the given order."""
    if order < 2:
        raise DomainError("nystrom order must be >= 2")
    if region.empty:
        z = np.empty(0)
        return DiscretizedOperator(spec, region, z, z, np.empty((0, 0)))
    rule = make_quadrature("gauss-legendre", order)
    nodes, weights = [], []
    for a, b in region.intervals:
        h = (b - a) / 2
        nodes.append(h * rule.nodes + (a + b) / 2)
        weights.append(h * rule.weights)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    K = spec.matrix(nodes)
    sw = np.sqrt(weights)
    M = sw[:, None] * K * sw[None, :]
    M = (M + M.T) / 2
    return DiscretizedOperator(spec, region, nodes, weights, M)


def fredholm_det(op: DiscretizedOperator, lam: float = 1.0) -> float:
    """det(I - lam * M) through the spectrum of the symmetrized matrix."""
    vals = op.eigenvalues()
    return float(np.prod(1.0 - lam * vals))


def fredholm_det_converged(spec: KernelSpec, region: Region, lam: float = 1.0,
                           tol: float = 1e-8, order: int = DEFAULT_ORDER,
                           max_order: int = 512) -> tuple[float, int]:
    """Fredholm determinant with the per-interval order doubled until two
    consecutive values agree within tol (or the cap is reached).  Returns
    the value and the order that achieved it."""
    prev = fredholm_det(nystrom(spec, region, order), lam)
    while 2 * order <= max_order:
        order *= 2
        cur = fredholm_det(nystrom(spec, region, order), lam)
        if abs(cur - prev) < tol:
            return cur, order
        prev = cur
    return prev, order


def gap_probability(op: DiscretizedOperator) -> float:
    """Probability that the region holds no points, Det(1 - K_A)."""
    return fredholm_det(op, 1.0)


def resolvent_kernel(op: DiscretizedOperator) -> DiscretizedOperator:
    """The operator L_A = K_A (1 - K_A)^{-1} in the same node basis."""
    vals, vecs = op.eigh()
    if vals.size and vals.max() > 1 - _EIG_EPS:
        raise NumericalError(
            f"resolvent undefined: max eigenvalue {vals.max():.12f} is within "
            f"{_EIG_EPS} of 1")
    lvals = vals / (1.0 - vals)
    L = (vecs * lvals[None, :]) @ vecs.T
    L = (L + L.T) / 2
    return DiscretizedOperator(op.spec, op.region, op.nodes, op.weights, L)


def correlation(spec: KernelSpec, points) -> float:
    """n-point correlation function det[K(x_a, x_b)]."""
    pts = spec.check_domain(np.atleast_1d(np.asarray(points, dtype=float)))
    if pts.size == 0:
        return 1.0
    return float(np.linalg.det(spec.matrix(pts)))


def _resolvent_at(op: DiscretizedOperator, lop: DiscretizedOperator, pts: np.ndarray) -> np.ndarray:
    """Nystrom extension of the resolvent kernel L to arbitrary points,
    L = K + K^2 + K L K (all restricted to the region)."""
    w = op.weights
    sw = np.sqrt(w)
    Lnod = lop.matrix / np.outer(sw, sw)  # kernel values L(u_i, u_j)
    Kpu = op.spec.matrix(pts, op.nodes)
    Kpp = op.spec.matrix(pts, pts)
    t2 = Kpu @ (w[:, None] * Kpu.T)
    t3 = Kpu @ (w[:, None] * Lnod * w[None, :]) @ Kpu.T
    L = Kpp + t2 + t3
    return (L + L.T) / 2


def fdd_pi(op: DiscretizedOperator, points) -> float:
    """Finite-dimensional distribution density
    pi_n(x_1..x_n) = Det(1 - K_A) det[L_A(x_a, x_b)]."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if pts.size == 0:
        return gap_probability(op)
    if not np.all(op.region.contains(pts)):
        raise DomainError("fdd_pi points must lie inside the operator region")
    lop = resolvent_kernel(op)
    L = _resolvent_at(op, lop, pts)
    return gap_probability(op) * float(np.linalg.det(L))


# ---------------------------------------------------------------------------
# Whittaker-kernel distribution of the largest point

def whittaker_tail_trace(spec: WhittakerKernel, T: float, order: int = 64) -> float:
    """int_T^oo K(x, x) dx for the Whittaker kernel; the diagonal decays
    like a power times e^{-x}, so a Gauss-Laguerre rule in x - T applies."""
    rule = make_quadrature("gauss-laguerre", order)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        diag = spec.diagonal(T + rule.nodes)
    vals = rule.weights * np.exp(rule.nodes) * diag
    return float(np.sum(vals))


@dataclass(frozen=True)
class Alpha1Cdf:
    """CDF value of the largest lifted point with truncation diagnostics."""

    value: float
    tau: float
    truncation: float
    tail_bound: float
    order: int

    def __float__(self) -> float:
        return self.value


def alpha1_cdf(params: SpectralParams, tau: float, tail_target: float = 1e-10,
               order: int = DEFAULT_ORDER, panel: float = 8.0,
               max_truncation: float = 400.0, tol: float = 1e-8) -> Alpha1Cdf:
    """Prob{alpha~_1 < tau} = Det(1 - K_(tau, oo)) for the Whittaker kernel,
    with the semi-infinite interval truncated at T such that the neglected
    tail trace is below tail_target, and the quadrature order doubled
    until the determinant is self-consistent within tol."""
    if tau <= 0:
        raise DomainError("alpha1_cdf needs tau > 0")
    spec = WhittakerKernel(params)
    T = max(2 * tau + 5, 20.0)
    tail = whittaker_tail_trace(spec, T)
    while tail >= tail_target:
        T *= 1.5
        if T > max_truncation:
            raise TruncationError(
                f"tail trace {tail:.2e} still above {tail_target:.1e} at T = {T:.0f}")
        tail = whittaker_tail_trace(spec, T)
    region = Region(((tau, T),), truncated_from=tau, tail_bound=tail).split(panel)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        det, used = fredholm_det_converged(spec, region, 1.0, tol=tol,
                                           order=order, max_order=4 * order)
    return Alpha1Cdf(value=float(det), tau=tau, truncation=T, tail_bound=tail, order=used)
