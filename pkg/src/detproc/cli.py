"""Command-line front end.

The CLI is a thin client of the HTTP service: each subcommand builds a
request, sends it to an in-process instance of the app (or to a remote
instance given --url), and renders the response envelope as CSV or JSON.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4
truncation-bound failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_TRUNCATION = 4

_KIND_EXIT = {"usage": EXIT_USAGE, "numerical": EXIT_NUMERICAL, "truncation": EXIT_TRUNCATION}

_VARIANTS = {
    "sinsh": "sin_sh", "sin_sh": "sin_sh",
    "shsh": "sh_sh", "sh_sh": "sh_sh",
    "shlimit": "sh_limit", "sh_limit": "sh_limit",
    "ratiolimit": "ratio_limit", "ratio_limit": "ratio_limit",
}


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def call_service(path: str, payload: dict, url: str | None = None,
                 timeout: float = 600.0) -> dict:
    if url:
        resp = httpx.post(url.rstrip("/") + path, json=payload, timeout=timeout)
    else:
        from .service.app import app

        async def _go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://detproc") as client:
                return await client.post(path, json=payload, timeout=timeout)

        resp = asyncio.run(_go())
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except Exception:
        raise CliError("numerical", f"service failure HTTP {resp.status_code}")
    if "error" in body:
        raise CliError(body["error"].get("kind", "numerical"), body["error"]["message"])
    if "detail" in body:  # request-model validation
        raise CliError("usage", json.dumps(body["detail"], sort_keys=True))
    raise CliError("numerical", f"service failure HTTP {resp.status_code}")


# ---------------------------------------------------------------------------
# argument helpers

def parse_region(text: str) -> dict:
    intervals = []
    for part in text.split(";"):
        bits = part.split(",")
        if len(bits) != 2:
            raise CliError("usage", f"region interval {part!r} must be 'a,b'")
        try:
            intervals.append((float(bits[0]), float(bits[1])))
        except ValueError:
            raise CliError("usage", f"region interval {part!r} must be numeric")
    return {"intervals": intervals}


def variant_arg(text: str) -> str:
    v = _VARIANTS.get(text.lower().replace("-", "_"))
    if v is None:
        raise CliError("usage", f"unknown stationary variant {text!r}")
    return v


def kernel_payload(args) -> dict:
    fam = args.kernel.replace("-", "_")
    if fam not in ("sine", "whittaker", "stationary", "laguerre_cd"):
        raise CliError("usage", f"unknown kernel family {args.kernel!r}")
    out: dict = {"family": fam}
    if fam == "whittaker":
        if not (args.z and args.zp):
            raise CliError("usage", "whittaker kernel needs --z and --zp")
        out.update(z=args.z, zp=args.zp)
    elif fam == "stationary":
        if not args.variant:
            raise CliError("usage", "stationary kernel needs --variant")
        out.update(variant=variant_arg(args.variant), A=args.A, B=args.B)
    elif fam == "laguerre_cd":
        if args.N is None or args.mu is None:
            raise CliError("usage", "laguerre-cd kernel needs --N and --mu")
        out.update(N=args.N, mu=args.mu)
    return out


def add_kernel_args(p: argparse.ArgumentParser):
    p.add_argument("--kernel", default="sine",
                   help="sine | whittaker | stationary | laguerre-cd")
    p.add_argument("--z", help="spectral parameter z as 're+imi'")
    p.add_argument("--zp", help="spectral parameter z' as 're+imi'")
    p.add_argument("--variant", help="sinsh | shsh | shlimit | ratiolimit")
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--N", type=int)
    p.add_argument("--mu", type=float)


def add_output_args(p: argparse.ArgumentParser):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--url", help="remote service URL (default: in-process)")


# ---------------------------------------------------------------------------
# rendering

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_csv(name: str, envelope: dict, header: list[str], rows: list[list]) -> str:
    lines = [f"# detproc {name}"]
    lines.append("# config: " + json.dumps(envelope.get("config", {}), sort_keys=True,
                                           separators=(",", ":")))
    diag = envelope.get("diagnostics") or {}
    if diag:
        lines.append("# diagnostics: " + json.dumps(diag, sort_keys=True,
                                                    separators=(",", ":")))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _rows_from_list(entries: list[dict], keys: list[str]) -> list[list]:
    return [[e[k] for k in keys] for e in entries]


def _config_rows(results: dict) -> tuple[list[str], list[list]]:
    rows = []
    for cfg in results["configurations"]:
        for v in cfg["points"]:
            rows.append([v, cfg["stream"]])
    return ["value", "config_id"], rows


_RENDERERS = {
    "expect": lambda r: (["quantity", "value"],
                         [[k, r[k]] for k in ("alpha_sum", "beta_sum", "total")]),
    "kernel-eval": lambda r: (["x", "y", "value"],
                              _rows_from_list(r["values"], ["x", "y", "value"])),
    "fredholm": lambda r: (["det"], [[r["det"]]]),
    "gap": lambda r: (["gap"], [[r["gap"]]]),
    "correlations": lambda r: (["n", "rho"], [[r["n"], r["rho"]]]),
    "alpha1-cdf": lambda r: (["tau", "cdf"], _rows_from_list(r["rows"], ["tau", "cdf"])),
    "sample": _config_rows,
    "pd-sample": _config_rows,
    "lift": lambda r: (["value", "config_id"], [[v, 0] for v in r["points"]]),
    "tail": lambda r: (["scale", "sup_deviation"],
                       _rows_from_list(r["rows"], ["scale", "sup_deviation"])),
    "lln": lambda r: (["tau", "mean", "stderr"],
                      _rows_from_list(r["rows"], ["tau", "mean", "stderr"])),
    "decay": lambda r: (["j", "mean", "stderr"],
                        _rows_from_list(r["rows"], ["j", "mean", "stderr"])),
    "fourier-check": lambda r: (["y", "closed", "numeric", "abs_err"],
                                _rows_from_list(r["rows"], ["y", "closed", "numeric", "abs_err"])),
    "admissible": lambda r: (["admissible", "reason"],
                             [[r["admissible"], r["reason"]]]),
    "sturm-check": lambda r: (["quantity", "value"],
                              [[k, v] for k, v in sorted(r.items())]),
}


def emit(name: str, envelope: dict, args) -> None:
    if args.format == "json":
        text = json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    else:
        header, rows = _RENDERERS[name](envelope["results"])
        text = render_csv(name, envelope, header, rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="detproc",
                                 description="determinantal point process toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def new(name, help_):
        p = sub.add_parser(name, help=help_)
        add_output_args(p)
        return p

    p = new("expect", "closed-form expectations of the coordinate sums")
    p.add_argument("--z", required=True)
    p.add_argument("--zp", required=True)

    p = new("kernel-eval", "evaluate a kernel on a grid or point pairs")
    add_kernel_args(p)
    p.add_argument("--x", required=True, help="comma-separated abscissae")
    p.add_argument("--y", required=True, help="comma-separated ordinates")
    p.add_argument("--pairs", action="store_true")

    p = new("fredholm", "Fredholm determinant det(1 - lambda K) on a region")
    add_kernel_args(p)
    p.add_argument("--region", required=True, help="'a,b' or 'a,b;c,d'")
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--panel", type=float)

    p = new("gap", "gap probability Det(1 - K_A)")
    add_kernel_args(p)
    p.add_argument("--region", required=True)
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--panel", type=float)

    p = new("correlations", "n-point correlation determinant")
    add_kernel_args(p)
    p.add_argument("--points", required=True, help="comma-separated points")

    p = new("alpha1-cdf", "CDF of the largest lifted point")
    p.add_argument("--z", required=True)
    p.add_argument("--zp", required=True)
    p.add_argument("--tau", required=True, help="comma-separated thresholds")
    p.add_argument("--order", type=int, default=64)
    p.add_argument("--tail-target", type=float, default=1e-10)

    p = new("sample", "exact DPP samples on a region")
    add_kernel_args(p)
    p.add_argument("--region", required=True)
    p.add_argument("--order", type=int, default=48)
    p.add_argument("--panel", type=float)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)

    p = new("lift", "multiply a configuration by one gamma(t) draw")
    p.add_argument("--points", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0)

    p = new("pd-sample", "Poisson-Dirichlet stick-breaking samples")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--cutoff", type=int)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = new("tail", "tail-kernel convergence of rescaled correlations")
    p.add_argument("--z", required=True)
    p.add_argument("--zp", required=True)
    p.add_argument("--scales", default="0.1,0.01,0.001")
    p.add_argument("--grid-n", type=int, default=5)
    p.add_argument("--span", type=float, default=1.2)

    p = new("lln", "counting law of large numbers for a stationary kernel")
    p.add_argument("--z")
    p.add_argument("--zp")
    p.add_argument("--variant")
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--T", type=float, default=50.0)
    p.add_argument("--configs", type=int, default=200)
    p.add_argument("--order", type=int, default=32)
    p.add_argument("--panel", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--tau-grid", help="comma-separated taus")

    p = new("decay", "decay rate of sorted coordinates, (x_j)^(1/j)")
    p.add_argument("--source", choices=("pd", "tail"), default="pd")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--z")
    p.add_argument("--zp")
    p.add_argument("--j-max", type=int, default=40)
    p.add_argument("--configs", type=int, default=400)
    p.add_argument("--cutoff", type=int, default=120)
    p.add_argument("--T", type=float, default=60.0)
    p.add_argument("--order", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)

    p = new("fourier-check", "closed-form vs numerical Fourier transform")
    p.add_argument("--variant", required=True)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--B", type=float, default=0.0)
    p.add_argument("--ys", help="comma-separated frequencies")

    p = new("admissible", "admissibility of stationary constants")
    p.add_argument("--variant", required=True)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--B", type=float, default=0.0)

    p = new("sturm-check", "commutation residual of the matched operator")
    p.add_argument("--family", choices=("sine", "stationary", "whittaker"),
                   default="sine")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--z")
    p.add_argument("--zp")
    p.add_argument("--variant")
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--grid-n", type=int, default=20)
    p.add_argument("--upper", type=float)
    p.add_argument("--perturb", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return ap


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise CliError("usage", f"expected comma-separated numbers, got {text!r}")


def _dispatch(args) -> None:
    name = args.command
    if name == "serve":
        import uvicorn

        from .service.app import app
        uvicorn.run(app, host=args.host, port=args.port)
        return

    if name == "expect":
        payload = {"z": args.z, "zp": args.zp}
        env = call_service("/v1/expect", payload, args.url)
    elif name == "kernel-eval":
        payload = {"kernel": kernel_payload(args), "x": _floats(args.x),
                   "y": _floats(args.y), "pairs": args.pairs}
        env = call_service("/v1/kernel-eval", payload, args.url)
    elif name == "fredholm":
        payload = {"kernel": kernel_payload(args), "region": parse_region(args.region),
                   "order": args.order, "lam": args.lam, "panel": args.panel}
        env = call_service("/v1/fredholm", payload, args.url)
    elif name == "gap":
        payload = {"kernel": kernel_payload(args), "region": parse_region(args.region),
                   "order": args.order, "panel": args.panel}
        env = call_service("/v1/gap", payload, args.url)
    elif name == "correlations":
        payload = {"kernel": kernel_payload(args), "points": _floats(args.points)}
        env = call_service("/v1/correlations", payload, args.url)
    elif name == "alpha1-cdf":
        payload = {"z": args.z, "zp": args.zp, "taus": _floats(args.tau),
                   "order": args.order, "tail_target": args.tail_target}
        env = call_service("/v1/alpha1-cdf", payload, args.url)
    elif name == "sample":
        payload = {"kernel": kernel_payload(args), "region": parse_region(args.region),
                   "order": args.order, "panel": args.panel,
                   "n_samples": args.samples, "seed": args.seed,
                   "threads": args.threads}
        env = call_service("/v1/sample", payload, args.url)
    elif name == "lift":
        payload = {"points": _floats(args.points), "t": args.t, "seed": args.seed,
                   "stream": args.stream}
        env = call_service("/v1/lift", payload, args.url)
    elif name == "pd-sample":
        payload = {"t": args.t, "cutoff": args.cutoff, "n_samples": args.samples,
                   "seed": args.seed}
        env = call_service("/v1/pd-sample", payload, args.url)
    elif name == "tail":
        payload = {"z": args.z, "zp": args.zp, "scales": _floats(args.scales),
                   "grid_n": args.grid_n, "span": args.span}
        env = call_service("/v1/tail", payload, args.url)
    elif name == "lln":
        payload = {"z": args.z, "zp": args.zp,
                   "variant": variant_arg(args.variant) if args.variant else None,
                   "A": args.A, "B": args.B, "T": args.T,
                   "n_configs": args.configs, "order": args.order,
                   "panel": args.panel, "seed": args.seed, "threads": args.threads,
                   "tau_grid": _floats(args.tau_grid) if args.tau_grid else None}
        env = call_service("/v1/lln", {k: v for k, v in payload.items() if v is not None},
                           args.url)
    elif name == "decay":
        payload = {"source": args.source, "t": args.t, "z": args.z, "zp": args.zp,
                   "j_max": args.j_max, "n_configs": args.configs,
                   "cutoff": args.cutoff, "T": args.T, "order": args.order,
                   "seed": args.seed, "threads": args.threads}
        env = call_service("/v1/decay", {k: v for k, v in payload.items() if v is not None},
                           args.url)
    elif name == "fourier-check":
        payload = {"variant": variant_arg(args.variant), "A": args.A, "B": args.B,
                   "ys": _floats(args.ys) if args.ys else None}
        env = call_service("/v1/fourier-check",
                           {k: v for k, v in payload.items() if v is not None}, args.url)
    elif name == "admissible":
        payload = {"variant": variant_arg(args.variant), "A": args.A, "B": args.B}
        env = call_service("/v1/admissible", payload, args.url)
    elif name == "sturm-check":
        payload = {"family": args.family, "tau": args.tau, "z": args.z, "zp": args.zp,
                   "variant": variant_arg(args.variant) if args.variant else None,
                   "A": args.A, "B": args.B, "grid_n": args.grid_n,
                   "upper": args.upper, "perturb": args.perturb}
        env = call_service("/v1/sturm-check",
                           {k: v for k, v in payload.items() if v is not None}, args.url)
    else:  # pragma: no cover
        raise CliError("usage", f"unknown command {name!r}")
    emit(name, env, args)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        _dispatch(args)
    except CliError as exc:
        sys.stderr.write(f"error: kind={exc.kind} message={exc}\n")
        return _KIND_EXIT.get(exc.kind, EXIT_NUMERICAL)
    except httpx.HTTPError as exc:
        sys.stderr.write(f"error: kind=transport message={exc}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
