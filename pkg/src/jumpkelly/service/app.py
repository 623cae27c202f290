"""FastAPI service exposing the library, one endpoint per operation.

The compute_* functions map request models to response models and raise the
library's own exceptions; the HTTP layer translates those to structured JSON
errors. The CLI calls the same compute functions in process.
"""
from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..admissible import admissible_interval, check_no_arbitrage
from ..game import admissible_grid, saddle_surface, verify_saddle
from ..growth import ArbitrageError, InadmissibleRuleError, solve_kelly
from ..market import (
    EXAMPLE_MARKET_DOC,
    MarketDocument,
    MarketFileError,
    MarketSpec,
    validate,
)
from ..outperform import BinaryJumpMarket, outperformance_curve
from ..randomization import investment_game_payoff, primitive_game_payoff
from ..simulation import PathConfig, RebalancingRule, simulate, simulate_terminal
from . import schemas as s


class InvalidMarketError(ValueError):
    """The market fails validation; carries the full violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("market is invalid: " + "; ".join(self.violations))


def _valid_spec(doc: MarketDocument, check_arbitrage: bool = True) -> MarketSpec:
    spec = doc.to_spec()
    report = validate(spec, check_arbitrage=check_arbitrage)
    if not report.ok:
        raise InvalidMarketError(report.violations)
    return spec


def example_market_document() -> MarketDocument:
    return MarketDocument.model_validate(EXAMPLE_MARKET_DOC)


def validate_market(req: s.ValidateRequest) -> s.ValidateResponse:
    spec = req.market.to_spec()
    report = validate(spec)
    no_arb = None
    interval = None
    if spec.jumps.n_atoms:
        try:
            cert = check_no_arbitrage(spec.jumps)
            no_arb = s.NoArbitrageModel(
                passed=cert.passed,
                weights=None if cert.weights is None else cert.weights.tolist(),
                direction=None if cert.direction is None else cert.direction.tolist(),
                residual=cert.residual,
                statement=cert.statement,
            )
        except RuntimeError:
            no_arb = None
        if spec.n == 1:
            box = admissible_interval(spec.jumps)
            interval = s.IntervalModel.from_bounds(box.lower, box.upper)
    return s.ValidateResponse(
        valid=report.ok,
        violations=list(report.violations),
        no_arbitrage=no_arb,
        admissible_interval=interval,
    )


def compute_kelly(req: s.KellyRequest) -> s.KellyResponse:
    spec = _valid_spec(req.market, check_arbitrage=req.check_arbitrage)
    solution = solve_kelly(
        spec, tol=req.tol, max_iter=req.max_iter, check_arbitrage=req.check_arbitrage
    )
    return s.KellyResponse(
        b_star=solution.b_star.tolist(),
        growth_rate=solution.growth_rate,
        gradient_norm=solution.gradient_norm,
        iterations=solution.iterations,
        converged=solution.converged,
    )


def compute_saddle(req: s.SaddleRequest) -> s.SaddleResponse:
    spec = _valid_spec(req.market)
    report = verify_saddle(spec, grid_points=req.grid_points, tol=req.tol, seed=req.seed)
    b_grid = c_grid = surface = None
    if spec.n == 1:
        grid = admissible_grid(spec, req.grid_points)
        b_grid = c_grid = grid.tolist()
        surface = saddle_surface(spec, grid, grid).tolist()
    return s.SaddleResponse(
        report=s.SaddleReportModel(
            b_star=report.b_star.tolist(),
            max_abs_pi_along_b=report.max_abs_pi_along_b,
            min_pi_along_c=report.min_pi_along_c,
            argmin_c=report.argmin_c.tolist(),
            grid=report.grid,
            passed=report.passed,
        ),
        b_grid=b_grid,
        c_grid=c_grid,
        surface=surface,
    )


def run_simulation(req: s.SimulateRequest) -> s.SimulateResponse:
    spec = _valid_spec(req.market)
    config = PathConfig(
        horizon=req.horizon,
        dt=req.dt,
        seed=req.seed,
        rules=tuple(RebalancingRule(r.name, np.asarray(r.fractions)) for r in req.rules),
        allow_inadmissible=req.allow_inadmissible,
    )
    paths = simulate(spec, config)
    return s.SimulateResponse(
        times=paths.times.tolist(),
        rule_names=list(paths.rule_names),
        wealth=paths.wealth.tolist(),
        n_jumps=paths.n_jumps.tolist(),
        n_up=paths.n_up.tolist(),
        jump_times=paths.jump_times.tolist(),
        bankrupt=list(paths.bankrupt),
    )


def summarize_simulation(req: s.SimulateSummaryRequest) -> s.SimulateSummaryResponse:
    spec = _valid_spec(req.market)
    if req.horizon <= 0:
        raise ValueError("horizon must be positive")
    rules = np.vstack([np.atleast_1d(np.asarray(r.fractions, dtype=float)) for r in req.rules])
    sample = simulate_terminal(
        spec,
        rules,
        req.horizon,
        req.n_paths,
        seed=req.seed,
        allow_inadmissible=req.allow_inadmissible,
    )
    summaries = []
    for j, rule in enumerate(req.rules):
        w = sample.wealth[:, j]
        alive = w > 0
        if np.any(alive):
            growth = np.log(w[alive]) / req.horizon
            mean_g = float(np.mean(growth))
            se_g = float(np.std(growth, ddof=1) / math.sqrt(growth.size)) if growth.size > 1 else 0.0
        else:
            mean_g, se_g = 0.0, 0.0
        summaries.append(
            s.RuleSummaryModel(
                name=rule.name,
                mean_terminal_wealth=float(np.mean(w)),
                mean_growth_rate=mean_g,
                stderr_growth_rate=se_g,
                bankrupt_fraction=float(np.mean(~alive)),
            )
        )
    return s.SimulateSummaryResponse(
        horizon=req.horizon,
        n_paths=req.n_paths,
        mean_jumps=float(np.mean(sample.n_jumps)),
        rules=summaries,
    )


def compute_outperformance(req: s.OutperformRequest) -> s.OutperformResponse:
    spec = _valid_spec(req.market)
    market = BinaryJumpMarket.from_market(spec)
    curves = [
        s.CurveModel(
            b=pair.b,
            c=pair.c,
            values=outperformance_curve(pair.b, pair.c, req.t_grid, market, req.tol).tolist(),
        )
        for pair in req.pairs
    ]
    return s.OutperformResponse(t_grid=list(req.t_grid), curves=curves)


def primitive_game(req: s.PrimitiveGameRequest) -> s.GameEstimateResponse:
    est = primitive_game_payoff(
        req.w1.to_core(), req.w2.to_core(), req.phi.to_core(), req.n_samples, req.seed
    )
    return s.GameEstimateResponse(estimate=est.estimate, stderr=est.stderr, n=est.n)


def investment_game(req: s.InvestmentGameRequest) -> s.GameEstimateResponse:
    spec = _valid_spec(req.market)
    est = investment_game_payoff(
        req.w1.to_core(),
        req.w2.to_core(),
        req.b,
        req.c,
        req.phi.to_core(),
        req.t,
        spec,
        req.n_paths,
        req.seed,
    )
    return s.GameEstimateResponse(estimate=est.estimate, stderr=est.stderr, n=est.n)


app = FastAPI(
    title="jumpkelly",
    version=__version__,
    description=(
        "Growth-optimal rebalancing for jump-diffusion markets: market "
        "validation, Kelly solving, saddle verification, exact Monte Carlo "
        "simulation, outperformance probabilities, and phi-game evaluation."
    ),
)


def _error(status: int, code: str, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message, **extra})


@app.exception_handler(InvalidMarketError)
async def _invalid_market_handler(request: Request, exc: InvalidMarketError):
    return _error(422, "invalid-market", str(exc), violations=exc.violations)


@app.exception_handler(MarketFileError)
async def _market_file_handler(request: Request, exc: MarketFileError):
    return _error(422, "market-schema", str(exc))


@app.exception_handler(ArbitrageError)
async def _arbitrage_handler(request: Request, exc: ArbitrageError):
    return _error(409, "arbitrage", str(exc))


@app.exception_handler(InadmissibleRuleError)
async def _inadmissible_handler(request: Request, exc: InadmissibleRuleError):
    return _error(422, "inadmissible-rule", str(exc))


@app.exception_handler(ValueError)
async def _value_error_handler(request: Request, exc: ValueError):
    return _error(400, "bad-request", str(exc))


@app.get("/health", response_model=s.HealthResponse)
def health() -> s.HealthResponse:
    return s.HealthResponse(status="ok", version=__version__)


@app.get("/markets/example", response_model=MarketDocument)
def get_example_market() -> MarketDocument:
    return example_market_document()


@app.post("/validate", response_model=s.ValidateResponse)
def post_validate(req: s.ValidateRequest) -> s.ValidateResponse:
    return validate_market(req)


@app.post("/kelly", response_model=s.KellyResponse)
def post_kelly(req: s.KellyRequest) -> s.KellyResponse:
    return compute_kelly(req)


@app.post("/saddle", response_model=s.SaddleResponse)
def post_saddle(req: s.SaddleRequest) -> s.SaddleResponse:
    return compute_saddle(req)


@app.post("/simulate", response_model=s.SimulateResponse)
def post_simulate(req: s.SimulateRequest) -> s.SimulateResponse:
    return run_simulation(req)


@app.post("/simulate/summary", response_model=s.SimulateSummaryResponse)
def post_simulate_summary(req: s.SimulateSummaryRequest) -> s.SimulateSummaryResponse:
    return summarize_simulation(req)


@app.post("/outperform", response_model=s.OutperformResponse)
def post_outperform(req: s.OutperformRequest) -> s.OutperformResponse:
    return compute_outperformance(req)


@app.post("/phi-game/primitive", response_model=s.GameEstimateResponse)
def post_primitive_game(req: s.PrimitiveGameRequest) -> s.GameEstimateResponse:
    return primitive_game(req)


@app.post("/phi-game/investment", response_model=s.GameEstimateResponse)
def post_investment_game(req: s.InvestmentGameRequest) -> s.GameEstimateResponse:
    return investment_game(req)
