"""Request and response models of the HTTP service.

Complex numbers travel as strings of the form "re+imi" ("0.5-0.5i",
"2i", "0.25"); every response is an envelope {config, results,
diagnostics} where config echoes the fully resolved request for
reproducibility.
"""

from __future__ import annotations

import re
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator

from ..errors import DomainError
from ..kernels import (
    KernelSpec,
    LaguerreCDKernel,
    SineKernel,
    StationaryKernel,
    TailConstants,
    WhittakerKernel,
    classify_series,
)
from ..operators import Region

_COMPLEX_RE = re.compile(r"^[+\-0-9.eEij ()]+$")


def parse_complex(text: str) -> complex:
    """Parse 're+imi' style complex literals ('0.5-0.5i', '2i', '1')."""
    s = str(text).strip().replace(" ", "")
    if not s or not _COMPLEX_RE.match(s):
        raise DomainError(f"cannot parse complex number {text!r}")
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise DomainError(f"cannot parse complex number {text!r}") from exc


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


class KernelModel(BaseModel):
    """Tagged selection of one kernel family with its parameters."""

    family: Literal["whittaker", "sine", "stationary", "laguerre_cd"]
    z: Optional[str] = None
    zp: Optional[str] = None
    variant: Optional[Literal["sin_sh", "sh_sh", "sh_limit", "ratio_limit"]] = None
    A: Optional[float] = None
    B: Optional[float] = None
    N: Optional[int] = None
    mu: Optional[float] = None

    def build(self) -> KernelSpec:
        if self.family == "sine":
            return SineKernel()
        if self.family == "whittaker":
            if self.z is None or self.zp is None:
                raise DomainError("whittaker kernel needs z and zp")
            return WhittakerKernel(classify_series(parse_complex(self.z),
                                                   parse_complex(self.zp)))
        if self.family == "stationary":
            if self.variant is None:
                raise DomainError("stationary kernel needs a variant")
            return StationaryKernel(TailConstants(A=self.A or 0.0, B=self.B or 0.0,
                                                  variant=self.variant))
        if self.N is None or self.mu is None:
            raise DomainError("laguerre_cd kernel needs N and mu")
        return LaguerreCDKernel(self.N, self.mu)


class RegionModel(BaseModel):
    intervals: list[tuple[float, float]]

    @field_validator("intervals")
    @classmethod
    def _nonempty(cls, v):
        if not v:
            raise ValueError("region needs at least one interval")
        return v

    def build(self, panel: float | None = None) -> Region:
        r = Region(tuple(self.intervals))
        return r.split(panel) if panel else r


class ExpectRequest(BaseModel):
    z: str
    zp: str


class KernelEvalRequest(BaseModel):
    kernel: KernelModel
    x: list[float]
    y: list[float]
    pairs: bool = False  # zip x with y instead of forming the grid


class FredholmRequest(BaseModel):
    kernel: KernelModel
    region: RegionModel
    order: int = 64
    lam: float = 1.0
    panel: Optional[float] = None


class GapRequest(BaseModel):
    kernel: KernelModel
    region: RegionModel
    order: int = 64
    panel: Optional[float] = None


class CorrelationsRequest(BaseModel):
    kernel: KernelModel
    points: list[float]


class Alpha1CdfRequest(BaseModel):
    z: str
    zp: str
    taus: list[float]
    tail_target: float = 1e-10
    order: int = 64


class SampleRequest(BaseModel):
    kernel: KernelModel
    region: RegionModel
    order: int = 48
    panel: Optional[float] = None
    n_samples: int = Field(default=1, ge=1, le=200_000)
    seed: int = 0
    threads: Optional[int] = None


class LiftRequest(BaseModel):
    points: list[float]
    t: float
    seed: int = 0
    stream: int = 0


class PdSampleRequest(BaseModel):
    t: float
    cutoff: Optional[int] = None
    n_samples: int = Field(default=1, ge=1, le=200_000)
    seed: int = 0


class TailRequest(BaseModel):
    z: str
    zp: str
    scales: list[float] = [1e-1, 1e-2, 1e-3]
    grid_n: int = 5
    span: float = 1.2


class LlnRequest(BaseModel):
    z: Optional[str] = None
    zp: Optional[str] = None
    variant: Optional[Literal["sin_sh", "sh_sh", "sh_limit", "ratio_limit"]] = None
    A: Optional[float] = None
    B: Optional[float] = None
    T: float = 50.0
    n_configs: int = Field(default=200, ge=2, le=100_000)
    order: int = 32
    panel: float = 4.0
    seed: int = 0
    threads: Optional[int] = None
    tau_grid: Optional[list[float]] = None


class DecayRequest(BaseModel):
    source: Literal["pd", "tail"] = "pd"
    t: float = 1.0
    z: Optional[str] = None
    zp: Optional[str] = None
    j_max: int = 40
    n_configs: int = Field(default=400, ge=2, le=100_000)
    cutoff: int = 120
    T: float = 60.0
    order: int = 32
    panel: float = 4.0
    seed: int = 0
    threads: Optional[int] = None


class FourierCheckRequest(BaseModel):
    variant: Literal["sin_sh", "sh_sh", "sh_limit", "ratio_limit"]
    A: float = 0.0
    B: float = 0.0
    ys: Optional[list[float]] = None


class AdmissibleRequest(BaseModel):
    variant: Literal["sin_sh", "sh_sh", "sh_limit", "ratio_limit"]
    A: float = 0.0
    B: float = 0.0


class SturmCheckRequest(BaseModel):
    family: Literal["sine", "stationary", "whittaker"]
    tau: float = 1.0
    z: Optional[str] = None
    zp: Optional[str] = None
    variant: Optional[Literal["sin_sh", "sh_sh", "sh_limit", "ratio_limit"]] = None
    A: Optional[float] = None
    B: Optional[float] = None
    grid_n: int = 20
    upper: Optional[float] = None
    perturb: bool = False


class Envelope(BaseModel):
    """Uniform response: resolved config, results, numerical diagnostics."""

    config: dict
    results: dict
    diagnostics: dict = {}
