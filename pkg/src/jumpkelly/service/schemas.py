"""Pydantic request/response models for the HTTP service.

Unbounded interval ends are encoded as ``null`` (JSON has no infinity).
"""
from __future__ import annotations

import math

from pydantic import BaseModel, Field

from .. import DEFAULT_SEED
from ..market import MarketDocument
from ..randomization import FairRandomization, PerformanceMeasure


class HealthResponse(BaseModel):
    status: str
    version: str


class IntervalModel(BaseModel):
    lower: float | None  # null = unbounded below
    upper: float | None  # null = unbounded above

    @classmethod
    def from_bounds(cls, lower: float, upper: float) -> "IntervalModel":
        return cls(
            lower=None if math.isinf(lower) else lower,
            upper=None if math.isinf(upper) else upper,
        )


class NoArbitrageModel(BaseModel):
    passed: bool
    weights: list[float] | None
    direction: list[float] | None
    residual: float
    statement: str


class ValidateRequest(BaseModel):
    market: MarketDocument


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[str]
    no_arbitrage: NoArbitrageModel | None  # null when the market has no jumps
    admissible_interval: IntervalModel | None  # single-stock markets with jumps only


class KellyRequest(BaseModel):
    market: MarketDocument
    tol: float = 1e-10
    max_iter: int = Field(default=100, ge=1)
    check_arbitrage: bool = True


class KellyResponse(BaseModel):
    b_star: list[float]
    growth_rate: float
    gradient_norm: float
    iterations: int
    converged: bool


class SaddleRequest(BaseModel):
    market: MarketDocument
    grid_points: int = Field(default=201, ge=3)
    tol: float = 1e-10
    seed: int = DEFAULT_SEED


class SaddleReportModel(BaseModel):
    b_star: list[float]
    max_abs_pi_along_b: float
    min_pi_along_c: float
    argmin_c: list[float]
    grid: str
    passed: bool


class SaddleResponse(BaseModel):
    report: SaddleReportModel
    # single-stock markets also carry the surface 100*pi(b_i, c_j)
    b_grid: list[float] | None
    c_grid: list[float] | None
    surface: list[list[float]] | None


class RuleModel(BaseModel):
    name: str
    fractions: list[float]


class SimulateRequest(BaseModel):
    market: MarketDocument
    horizon: float
    dt: float
    seed: int = DEFAULT_SEED
    rules: list[RuleModel]
    allow_inadmissible: bool = False


class SimulateResponse(BaseModel):
    times: list[float]
    rule_names: list[str]
    wealth: list[list[float]]  # one row per rule
    n_jumps: list[int]
    n_up: list[int]
    jump_times: list[float]
    bankrupt: list[bool]


class SimulateSummaryRequest(BaseModel):
    market: MarketDocument
    horizon: float
    n_paths: int = Field(default=10_000, ge=2)
    seed: int = DEFAULT_SEED
    rules: list[RuleModel]
    allow_inadmissible: bool = False


class RuleSummaryModel(BaseModel):
    name: str
    mean_terminal_wealth: float
    mean_growth_rate: float  # over surviving paths
    stderr_growth_rate: float
    bankrupt_fraction: float


class SimulateSummaryResponse(BaseModel):
    horizon: float
    n_paths: int
    mean_jumps: float
    rules: list[RuleSummaryModel]


class PairModel(BaseModel):
    b: float
    c: float


class CurveModel(BaseModel):
    b: float
    c: float
    values: list[float]


class OutperformRequest(BaseModel):
    market: MarketDocument
    pairs: list[PairModel]
    t_grid: list[float]
    tol: float = 1e-12


class OutperformResponse(BaseModel):
    t_grid: list[float]
    curves: list[CurveModel]


class RandomizationModel(BaseModel):
    kind: str  # degenerate | uniform | lognormal | discrete
    s: float = 0.0
    values: list[float] | None = None
    probs: list[float] | None = None

    def to_core(self) -> FairRandomization:
        if self.kind == "discrete":
            return FairRandomization(
                "discrete", values=self.values or [], probs=self.probs or []
            )
        return FairRandomization(self.kind, s=self.s)


class PhiModel(BaseModel):
    kind: str  # indicator | power | ratio_share
    alpha: float = 1.0
    exponent: float = 1.0

    def to_core(self) -> PerformanceMeasure:
        return PerformanceMeasure(self.kind, alpha=self.alpha, exponent=self.exponent)


class PrimitiveGameRequest(BaseModel):
    w1: RandomizationModel
    w2: RandomizationModel
    phi: PhiModel
    n_samples: int = Field(default=100_000, ge=1)
    seed: int = DEFAULT_SEED


class InvestmentGameRequest(BaseModel):
    market: MarketDocument
    w1: RandomizationModel
    w2: RandomizationModel
    phi: PhiModel
    b: list[float]
    c: list[float]
    t: float = 1.0
    n_paths: int = Field(default=10_000, ge=1)
    seed: int = DEFAULT_SEED


class GameEstimateResponse(BaseModel):
    estimate: float
    stderr: float
    n: int
