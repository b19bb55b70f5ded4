"""Exact sampling of determinantal processes from discretized kernels,
Poisson-Dirichlet stick breaking, the gamma lifting, and empirical
statistics of sampled configurations.

Randomness uses the counter-based Philox generator: one root seed plus a
stream index give an independent, reproducible stream per configuration,
so Monte Carlo runs are deterministic for a fixed seed regardless of
thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .operators import DiscretizedOperator, Region

THREADS_ENV = "DETPROC_THREADS"


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for one sampling task."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(index),))))


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class PointConfiguration:
    """A finite point configuration, sorted descending by default
    (alpha-style ordering); ascending is used for xi-space configurations."""

    points: np.ndarray
    region: Region
    provenance: dict = field(default_factory=dict)
    ascending: bool = False

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).ravel())
        if not self.ascending:
            pts = pts[::-1]
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ThomaPoint:
    """Nonincreasing coordinate pair (alpha, beta) with total mass <= 1."""

    alpha: np.ndarray
    beta: np.ndarray
    truncation: int = 0

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        for arr, name in ((a, "alpha"), (b, "beta")):
            if np.any(arr < 0) or np.any(np.diff(arr) > 1e-15):
                raise DomainError(f"{name} must be nonincreasing and nonnegative")
        if a.sum() + b.sum() > 1 + 1e-12:
            raise DomainError("sum(alpha) + sum(beta) must be <= 1")


# ---------------------------------------------------------------------------
# spectral DPP sampler

def _interval_slices(op: DiscretizedOperator):
    n_iv = len(op.region.intervals)
    per, rem = divmod(len(op.nodes), n_iv)
    if rem:
        raise NumericalError("operator nodes not evenly split across intervals")
    return [(i * per, (i + 1) * per) for i in range(n_iv)]


def _segments(op: DiscretizedOperator):
    """Piecewise-linear support of the sampling density: per interval, the
    node polyline extended flat to the interval edges.  Returns segment
    endpoints and the node indices whose density values they carry."""
    starts, ends, i0, i1 = [], [], [], []
    for (a, b), (lo, hi) in zip(op.region.intervals, _interval_slices(op)):
        idx = np.arange(lo, hi)
        px = np.concatenate([[a], op.nodes[lo:hi], [b]])
        pi = np.concatenate([[idx[0]], idx, [idx[-1]]])
        starts.append(px[:-1]); ends.append(px[1:])
        i0.append(pi[:-1]); i1.append(pi[1:])
    return (np.concatenate(starts), np.concatenate(ends),
            np.concatenate(i0).astype(int), np.concatenate(i1).astype(int))


def _sample_position(op, segs, dens, rng):
    """Draw one point from the piecewise-linear density interpolating
    (node, dens) within each interval; returns (x, iL, iR, theta)."""
    starts, ends, i0, i1 = segs
    f0 = dens[i0]
    f1 = dens[i1]
    lens = ends - starts
    mass = 0.5 * (f0 + f1) * lens
    total = mass.sum()
    if total <= 0:
        raise NumericalError("conditional sampling density vanished")
    u = rng.uniform(0.0, total)
    cum = np.cumsum(mass)
    k = int(np.searchsorted(cum, u, side="right"))
    k = min(k, len(mass) - 1)
    rem = u - (cum[k] - mass[k])
    a, b = f0[k], f1[k] - f0[k]
    # invert int_0^s (a + b r) dr * len = rem for s in [0, 1]
    target = rem / max(lens[k], 1e-300)
    if abs(b) < 1e-14 * max(abs(a), 1e-300):
        s = target / a if a > 0 else rng.uniform()
    else:
        disc = a * a + 2 * b * target
        s = (math.sqrt(max(disc, 0.0)) - a) / b
    s = min(max(s, 0.0), 1.0)
    x = starts[k] + s * lens[k]
    iL, iR = i0[k], i1[k]
    if iL == iR:
        theta = 0.0
    else:
        xl, xr = op.nodes[iL], op.nodes[iR]
        theta = (x - xl) / (xr - xl)
    return x, iL, iR, theta


def sample_dpp(op: DiscretizedOperator, seed: int | None = None,
               rng: np.random.Generator | None = None,
               stream_index: int = 0) -> PointConfiguration:
    """One exact sample of the determinantal process on the operator region.

    Spectral algorithm: eigenfunctions are kept independently with
    probability equal to their eigenvalue; the resulting projection
    process is sampled sequentially through rank-one conditioning of the
    projection kernel on the quadrature grid, with continuous placement
    by inverse CDF on the piecewise-linear interpolated density.
    """
    if rng is None:
        if seed is None:
            raise DomainError("sample_dpp needs a seed or an explicit generator")
        rng = stream(seed, stream_index)
    prov = {"seed": seed, "stream": stream_index}
    _, vecs = op.eigh()
    lam = op.dpp_eigenvalues()
    keep = rng.random(len(lam)) < lam
    k = int(keep.sum())
    if k == 0:
        return PointConfiguration(np.empty(0), op.region, prov)
    sw = np.sqrt(op.weights)
    B = vecs[:, keep] / sw[:, None]  # L2(w)-orthonormal basis of the projection
    segs = _segments(op)
    pts = np.empty(k)
    for step in range(k):
        dens = np.clip(np.einsum("ij,ij->i", B, B), 0.0, None)
        x, iL, iR, th = _sample_position(op, segs, dens, rng)
        v = (1 - th) * B[iL] + th * B[iR]  # basis values at the sampled point
        nv = float(np.linalg.norm(v))
        if nv * nv <= 1e-12 * max(1.0, float(np.max(dens))):
            # degenerate interpolation; fall back to the dominant node
            j = int(np.argmax(dens))
            x, v = op.nodes[j], B[j].copy()
            nv = float(np.linalg.norm(v))
        pts[step] = x
        # Householder rotation sending the evaluation direction to the first
        # column; the remaining columns span the functions vanishing at x
        u = v / nv
        sign = 1.0 if u[0] >= 0 else -1.0
        u[0] += sign
        B = B - np.outer(B @ u, u / (1.0 + abs(v[0]) / nv))
        B = B[:, 1:]
    return PointConfiguration(pts, op.region, prov)


def sample_dpp_many(op: DiscretizedOperator, n: int, seed: int,
                    threads: int | None = None) -> list[PointConfiguration]:
    """n independent samples, merged deterministically by stream index."""
    op.eigh()  # decompose once, before the workers start
    op.dpp_eigenvalues()
    threads = threads or default_threads()
    if threads <= 1:
        return [sample_dpp(op, seed, stream_index=i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futs = [pool.submit(sample_dpp, op, seed, None, i) for i in range(n)]
        return [f.result() for f in futs]


# ---------------------------------------------------------------------------
# Poisson-Dirichlet and lifting

MAX_STICKS = 200
RESIDUAL_TARGET = 1e-12


def sample_poisson_dirichlet(t: float, cutoff: int | None = None,
                             seed: int | None = None,
                             rng: np.random.Generator | None = None,
                             stream_index: int = 0) -> PointConfiguration:
    """Stick-breaking sample of the Poisson-Dirichlet distribution PD(t),
    sorted descending on (0, 1].

    With cutoff=None, sticks are generated until the residual mass drops
    below 1e-12 or 200 sticks are reached, whichever comes first; an
    explicit cutoff generates exactly that many sticks.
    """
    if t <= 0:
        raise DomainError("Poisson-Dirichlet parameter t must be positive")
    if rng is None:
        if seed is None:
            raise DomainError("sample_poisson_dirichlet needs a seed or a generator")
        rng = stream(seed, stream_index)
    prov = {"seed": seed, "stream": stream_index, "t": t}
    sticks = []
    remaining = 1.0
    n = cutoff if cutoff is not None else MAX_STICKS
    for _ in range(n):
        v = rng.beta(1.0, t)
        sticks.append(remaining * v)
        remaining *= 1.0 - v
        if cutoff is None and remaining < RESIDUAL_TARGET:
            break
    prov["residual"] = remaining
    return PointConfiguration(np.asarray(sticks), Region.interval(0.0, 1.0), prov)


def thoma_from_sticks(config: PointConfiguration) -> ThomaPoint:
    """View a one-sided configuration on (0, 1] as a Thoma point with
    empty beta part."""
    return ThomaPoint(alpha=config.points, beta=np.empty(0),
                      truncation=len(config.points))


def lift(config: PointConfiguration, t: float, seed: int | None = None,
         rng: np.random.Generator | None = None,
         stream_index: int = 0) -> PointConfiguration:
    """Multiply the whole configuration by one independent gamma(t) draw
    (unit scale), moving it from (0, 1] to (0, oo)."""
    if t <= 0:
        raise DomainError("lifting parameter t must be positive")
    if rng is None:
        if seed is None:
            raise DomainError("lift needs a seed or a generator")
        rng = stream(seed, stream_index)
    s = rng.gamma(shape=t, scale=1.0)
    hi = max((b for _, b in config.region.intervals), default=1.0)
    prov = dict(config.provenance)
    prov.update({"lift_t": t, "lift_scale": s})
    return PointConfiguration(config.points * s, Region.interval(0.0, max(hi * s, 1.0) * 10),
                              prov)


# ---------------------------------------------------------------------------
# empirical statistics

@dataclass(frozen=True)
class EmpiricalStats:
    """Histogram estimators of the first two correlation functions plus
    counting moments, with standard errors."""

    bins: np.ndarray
    rho1: np.ndarray
    rho1_err: np.ndarray
    rho2: np.ndarray
    count_mean: float
    count_var: float
    n_configs: int

    @property
    def dispersion(self) -> float:
        return self.count_var / self.count_mean if self.count_mean > 0 else math.nan


def empirical_statistics(configs: list[PointConfiguration], bins) -> EmpiricalStats:
    """Unbiased binned estimators over a sample of configurations."""
    if not configs:
        raise DomainError("empirical_statistics needs at least one configuration")
    bins = np.asarray(bins, dtype=float)
    if bins.ndim != 1 or len(bins) < 2 or np.any(np.diff(bins) <= 0):
        raise DomainError("bins must be increasing edges")
    nb = len(bins) - 1
    widths = np.diff(bins)
    n = len(configs)
    counts = np.zeros((n, nb))
    pair_counts = np.zeros((nb, nb))
    totals = np.zeros(n)
    for i, cfg in enumerate(configs):
        pts = cfg.points
        totals[i] = len(pts)
        c, _ = np.histogram(pts, bins)
        counts[i] = c
        idx = np.searchsorted(bins, pts, side="right") - 1
        ok = (idx >= 0) & (idx < nb)
        idx = idx[ok]
        if len(idx):
            point_bins = np.bincount(idx, minlength=nb).astype(float)
            pair_counts += np.outer(point_bins, point_bins) - np.diag(point_bins)
    rho1 = counts.mean(axis=0) / widths
    rho1_err = counts.std(axis=0, ddof=1) / (math.sqrt(n) * widths) if n > 1 else np.zeros(nb)
    rho2 = pair_counts / (n * np.outer(widths, widths))
    return EmpiricalStats(bins=bins, rho1=rho1, rho1_err=rho1_err, rho2=rho2,
                          count_mean=float(totals.mean()),
                          count_var=float(totals.var(ddof=1)) if n > 1 else 0.0,
                          n_configs=n)
