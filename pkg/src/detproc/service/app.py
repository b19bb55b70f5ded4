"""HTTP service exposing the toolkit operations.

Every endpoint answers with {config, results, diagnostics}; errors carry
a machine-readable kind ("usage" | "numerical" | "truncation") that the
CLI maps onto exit codes.
"""

from __future__ import annotations

import warnings

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import asymptotics, kernels, operators, sampler, sturm
from ..errors import (
    DetprocError,
    DomainError,
    InsufficientPointsError,
    NumericalError,
    TruncationError,
)
from . import schemas
from .schemas import Envelope, parse_complex

app = FastAPI(title="detproc", description="determinantal point process toolkit")


def _error_kind(exc: DetprocError) -> tuple[str, int]:
    if isinstance(exc, TruncationError):
        return "truncation", 500
    if isinstance(exc, (DomainError, InsufficientPointsError)):
        return "usage", 422
    if isinstance(exc, NumericalError):
        return "numerical", 500
    return "numerical", 500


@app.exception_handler(DetprocError)
async def _detproc_error(request: Request, exc: DetprocError):
    kind, status = _error_kind(exc)
    return JSONResponse(status_code=status,
                        content={"error": {"kind": kind, "message": str(exc)}})


@app.get("/healthz")
def healthz():
    return {"status": "ok"}


def _config(req) -> dict:
    return req.model_dump(exclude_none=True)


def _params(z: str, zp: str) -> kernels.SpectralParams:
    return kernels.classify_series(parse_complex(z), parse_complex(zp))


def _spectral_config(p: kernels.SpectralParams) -> dict:
    return {
        "series": p.series,
        "t": p.t.real,
        "kappa": schemas.format_complex(p.kappa),
        "mu": schemas.format_complex(p.mu),
    }


@app.post("/v1/expect", response_model=Envelope)
def expect(req: schemas.ExpectRequest):
    p = _params(req.z, req.zp)
    ea = asymptotics.expected_alpha_sum(p)
    eb = asymptotics.expected_beta_sum(p)
    return Envelope(config=_config(req),
                    results={"alpha_sum": ea, "beta_sum": eb, "total": ea + eb},
                    diagnostics=_spectral_config(p))


@app.post("/v1/kernel-eval", response_model=Envelope)
def kernel_eval(req: schemas.KernelEvalRequest):
    spec = req.kernel.build()
    xs = np.asarray(req.x, dtype=float)
    ys = np.asarray(req.y, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if req.pairs:
            if len(xs) != len(ys):
                raise DomainError("pairs mode needs x and y of equal length")
            vals = np.atleast_1d(spec.evaluate(xs, ys))
            rows = [{"x": float(a), "y": float(b), "value": float(v)}
                    for a, b, v in zip(xs, ys, vals)]
        else:
            M = spec.matrix(xs, ys)
            rows = [{"x": float(a), "y": float(b), "value": float(M[i, j])}
                    for i, a in enumerate(xs) for j, b in enumerate(ys)]
    return Envelope(config=_config(req), results={"values": rows})


def _operator(kernel: schemas.KernelModel, region: schemas.RegionModel,
              order: int, panel: float | None) -> operators.DiscretizedOperator:
    spec = kernel.build()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return operators.nystrom(spec, region.build(panel), order)


def _op_diagnostics(op: operators.DiscretizedOperator) -> dict:
    vals = op.eigenvalues()
    return {
        "nodes": int(op.size),
        "trace": float(np.sum(np.diag(op.matrix))),
        "min_eigenvalue": float(vals.min()) if vals.size else 0.0,
        "max_eigenvalue": float(vals.max()) if vals.size else 0.0,
    }


@app.post("/v1/fredholm", response_model=Envelope)
def fredholm(req: schemas.FredholmRequest):
    op = _operator(req.kernel, req.region, req.order, req.panel)
    det = operators.fredholm_det(op, req.lam)
    return Envelope(config=_config(req), results={"det": det},
                    diagnostics=_op_diagnostics(op))


@app.post("/v1/gap", response_model=Envelope)
def gap(req: schemas.GapRequest):
    op = _operator(req.kernel, req.region, req.order, req.panel)
    return Envelope(config=_config(req),
                    results={"gap": operators.gap_probability(op)},
                    diagnostics=_op_diagnostics(op))


@app.post("/v1/correlations", response_model=Envelope)
def correlations(req: schemas.CorrelationsRequest):
    spec = req.kernel.build()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = operators.correlation(spec, req.points)
    return Envelope(config=_config(req),
                    results={"n": len(req.points), "rho": rho})


@app.post("/v1/alpha1-cdf", response_model=Envelope)
def alpha1_cdf(req: schemas.Alpha1CdfRequest):
    p = _params(req.z, req.zp)
    rows, trunc = [], {}
    for tau in req.taus:
        r = operators.alpha1_cdf(p, tau, tail_target=req.tail_target, order=req.order)
        rows.append({"tau": tau, "cdf": r.value})
        trunc[str(tau)] = {"T": r.truncation, "tail_bound": r.tail_bound}
    return Envelope(config=_config(req), results={"rows": rows},
                    diagnostics={"truncation": trunc, **_spectral_config(p)})


def _config_payload(cfgs: list[sampler.PointConfiguration], seed: int) -> list[dict]:
    return [{"stream": i, "seed": seed,
             "region": [list(iv) for iv in c.region.intervals],
             "points": [float(v) for v in c.points]}
            for i, c in enumerate(cfgs)]


@app.post("/v1/sample", response_model=Envelope)
def sample(req: schemas.SampleRequest):
    op = _operator(req.kernel, req.region, req.order, req.panel)
    cfgs = sampler.sample_dpp_many(op, req.n_samples, req.seed, threads=req.threads)
    counts = np.array([len(c) for c in cfgs], dtype=float)
    return Envelope(config=_config(req),
                    results={"configurations": _config_payload(cfgs, req.seed)},
                    diagnostics={"mean_count": float(counts.mean()),
                                 "var_count": float(counts.var(ddof=1)) if len(cfgs) > 1 else 0.0,
                                 **_op_diagnostics(op)})


@app.post("/v1/lift", response_model=Envelope)
def lift(req: schemas.LiftRequest):
    cfg = sampler.PointConfiguration(np.asarray(req.points, dtype=float),
                                     operators.Region.interval(0.0, 1.0))
    lifted = sampler.lift(cfg, req.t, seed=req.seed, stream_index=req.stream)
    return Envelope(config=_config(req),
                    results={"points": [float(v) for v in lifted.points]},
                    diagnostics={"scale": lifted.provenance["lift_scale"]})


@app.post("/v1/pd-sample", response_model=Envelope)
def pd_sample(req: schemas.PdSampleRequest):
    cfgs = [sampler.sample_poisson_dirichlet(req.t, cutoff=req.cutoff,
                                             seed=req.seed, stream_index=i)
            for i in range(req.n_samples)]
    residual = max(c.provenance["residual"] for c in cfgs)
    return Envelope(config=_config(req),
                    results={"configurations": _config_payload(cfgs, req.seed)},
                    diagnostics={"max_residual": residual})


@app.post("/v1/tail", response_model=Envelope)
def tail(req: schemas.TailRequest):
    p = _params(req.z, req.zp)
    rows = asymptotics.tail_convergence_check(p, scales=tuple(req.scales),
                                              grid_n=req.grid_n, span=req.span)
    c = kernels.tail_constants(p)
    return Envelope(config=_config(req),
                    results={"rows": [{"scale": r.scale, "sup_deviation": r.sup_deviation}
                                      for r in rows]},
                    diagnostics={"A": c.A, "B": c.B, "C": c.C, "variant": c.variant})


def _stationary_constants(req) -> kernels.TailConstants:
    if req.z is not None and req.zp is not None:
        return kernels.tail_constants(_params(req.z, req.zp))
    if req.variant is None:
        raise DomainError("need either (z, zp) or stationary constants")
    return kernels.TailConstants(A=req.A or 0.0, B=req.B or 0.0, variant=req.variant)


@app.post("/v1/lln", response_model=Envelope)
def lln(req: schemas.LlnRequest):
    c = _stationary_constants(req)
    spec = kernels.StationaryKernel(c)
    region = operators.Region.interval(0.0, req.T).split(req.panel)
    op = operators.nystrom(spec, region, req.order)
    cfgs = sampler.sample_dpp_many(op, req.n_configs, req.seed, threads=req.threads)
    taus = req.tau_grid or [req.T / 4, req.T / 2, req.T]
    rows = asymptotics.counting_lln(cfgs, taus)
    diag = {"A": c.A, "B": c.B, "variant": c.variant, **_op_diagnostics(op)}
    if req.z is not None and req.zp is not None:
        p = _params(req.z, req.zp)
        diag["sq_integral_ratio_half"] = asymptotics.lln_square_integral(p, req.T / 2) / (req.T / 2)
        diag["sq_integral_ratio_full"] = asymptotics.lln_square_integral(p, req.T) / req.T
    return Envelope(config=_config(req),
                    results={"rows": [{"tau": r.tau, "mean": r.mean, "stderr": r.stderr,
                                       "variance": r.variance} for r in rows]},
                    diagnostics=diag)


@app.post("/v1/decay", response_model=Envelope)
def decay(req: schemas.DecayRequest):
    diag: dict = {}
    if req.source == "pd":
        cfgs = [sampler.sample_poisson_dirichlet(req.t, cutoff=req.cutoff,
                                                 seed=req.seed, stream_index=i)
                for i in range(req.n_configs)]
        diag["target"] = float(np.exp(-req.t))
    else:
        if req.z is None or req.zp is None:
            raise DomainError("tail-source decay needs z and zp")
        p = _params(req.z, req.zp)
        c = kernels.tail_constants(p)
        spec = kernels.StationaryKernel(c)
        region = operators.Region.interval(0.0, req.T).split(req.panel)
        op = operators.nystrom(spec, region, req.order)
        xi_cfgs = sampler.sample_dpp_many(op, req.n_configs, req.seed, threads=req.threads)
        # map back to (0, 1] by x = e^{-xi/C}
        cfgs = [sampler.PointConfiguration(np.exp(-cfg.points / c.C),
                                           operators.Region.interval(0.0, 1.0))
                for cfg in xi_cfgs]
        diag["target"] = float(np.exp(-1.0 / c.C))
        diag.update({"A": c.A, "B": c.B, "C": c.C})
    rows = asymptotics.decay_rate_estimate(cfgs, req.j_max)
    return Envelope(config=_config(req),
                    results={"rows": [{"j": r.j, "mean": r.mean, "stderr": r.stderr}
                                      for r in rows]},
                    diagnostics=diag)


@app.post("/v1/fourier-check", response_model=Envelope)
def fourier_check(req: schemas.FourierCheckRequest):
    c = kernels.TailConstants(A=req.A, B=req.B, variant=req.variant)
    ys = req.ys if req.ys is not None else list(np.linspace(-10, 10, 21))
    rows = []
    for y in ys:
        closed = kernels.fourier_khat(c, y)
        numeric = kernels.fourier_khat_numeric(c, y)
        rows.append({"y": float(y), "closed": closed, "numeric": numeric,
                     "abs_err": abs(closed - numeric)})
    return Envelope(config=_config(req), results={"rows": rows},
                    diagnostics={"max_abs_err": max(r["abs_err"] for r in rows)})


@app.post("/v1/admissible", response_model=Envelope)
def admissible(req: schemas.AdmissibleRequest):
    c = kernels.TailConstants(A=req.A, B=req.B, variant=req.variant)
    res = kernels.admissible(c)
    return Envelope(config=_config(req),
                    results={"admissible": res.ok, "reason": res.reason})


@app.post("/v1/sturm-check", response_model=Envelope)
def sturm_check(req: schemas.SturmCheckRequest):
    if req.family == "sine":
        spec: kernels.KernelSpec = kernels.SineKernel()
        sl = sturm.sl_params_sine(req.tau)
        upper = None
    elif req.family == "stationary":
        if req.variant is None:
            raise DomainError("stationary sturm-check needs a variant")
        c = kernels.TailConstants(A=req.A or 0.0, B=req.B or 0.0, variant=req.variant)
        spec = kernels.StationaryKernel(c)
        sl = sturm.sl_params_stationary(c, req.tau)
        upper = None
    else:
        if req.z is None or req.zp is None:
            raise DomainError("whittaker sturm-check needs z and zp")
        p = _params(req.z, req.zp)
        spec = kernels.WhittakerKernel(p)
        sl = sturm.sl_params_whittaker(p, req.tau)
        upper = req.upper or req.tau + 4.0
    grid = sturm.default_grid(sl, req.grid_n, upper=upper)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        resid = sturm.commutation_residual(spec, sl, grid)
        results = {"residual": resid}
        if req.perturb:
            slp = sl.with_q_perturbation(lambda x: x)
            results["perturbed_residual"] = sturm.commutation_residual(spec, slp, grid)
    return Envelope(config=_config(req), results=results,
                    diagnostics={"grid_points": int(np.asarray(grid[0]).size)})
