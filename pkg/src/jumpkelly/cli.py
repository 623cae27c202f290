"""Thin command-line client for the service layer.

Every subcommand builds the same request model the HTTP endpoint accepts,
invokes the service function in process, and writes the response as a JSON
or CSV artifact (CSV carries a '#'-prefixed config line recording the full
parameter set and seed, so identical invocations produce identical bytes).

Exit codes: 0 success, 2 bad invocation or malformed input, 3 the market
failed validation (including arbitrage refusal), 4 solver non-convergence.
Failures also emit a machine-readable JSON error record on stderr.
"""
from __future__ import annotations

import json
import sys
from typing import Sequence

import click
import numpy as np
from pydantic import ValidationError

from . import DEFAULT_SEED, __version__
from .growth import ArbitrageError, InadmissibleRuleError
from .market import EXAMPLE_MARKET_DOC, MarketDocument, MarketFileError, load_market_document
from .service import schemas as s
from .service.app import (
    InvalidMarketError,
    compute_kelly,
    compute_outperformance,
    compute_saddle,
    investment_game,
    primitive_game,
    run_simulation,
    summarize_simulation,
    validate_market,
)

EXIT_USAGE = 2
EXIT_INVALID_MARKET = 3
EXIT_NO_CONVERGENCE = 4


def _fail(code: str, message: str, exit_code: int, **extra) -> None:
    click.echo(json.dumps({"error": code, "message": message, **extra}, sort_keys=True), err=True)
    sys.exit(exit_code)


def _call(fn, req):
    """Run a service function, mapping library errors to exit codes."""
    try:
        return fn(req)
    except InvalidMarketError as e:
        _fail("invalid-market", str(e), EXIT_INVALID_MARKET, violations=e.violations)
    except ArbitrageError as e:
        _fail("arbitrage", str(e), EXIT_INVALID_MARKET)
    except InadmissibleRuleError as e:
        _fail("inadmissible-rule", str(e), EXIT_INVALID_MARKET)
    except (MarketFileError, ValidationError, ValueError) as e:
        _fail("bad-request", str(e), EXIT_USAGE)


def _load_document(market_path: str | None, use_example: bool) -> MarketDocument:
    if use_example == (market_path is not None):
        _fail("usage", "give exactly one of --market FILE and --paper-example", EXIT_USAGE)
    if use_example:
        return MarketDocument.model_validate(EXAMPLE_MARKET_DOC)
    try:
        return load_market_document(market_path)
    except OSError as e:
        _fail("market-file", f"cannot read {market_path}: {e}", EXIT_USAGE)
    except MarketFileError as e:
        _fail("market-schema", str(e), EXIT_USAGE)


def _write(out: str | None, text: str) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def _json_artifact(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _csv_artifact(config: dict, header: Sequence[str], rows) -> str:
    lines = ["# config: " + json.dumps(config, sort_keys=True)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _doc_dump(doc: MarketDocument) -> dict:
    return doc.model_dump(by_alias=True, exclude_none=True)


def market_options(f):
    f = click.option(
        "--market", "market_path", type=str, default=None, help="Market JSON file."
    )(f)
    f = click.option(
        "--paper-example",
        "use_example",
        is_flag=True,
        help="Use the built-in example market instead of --market.",
    )(f)
    f = click.option("--out", type=str, default=None, help="Write the artifact here (default stdout).")(f)
    return f


@click.group()
@click.version_option(__version__)
def main():
    """Growth-optimal rebalancing toolkit for jump-diffusion markets."""


@main.command()
@market_options
def validate(market_path, use_example, out):
    """Check market invariants, no-arbitrage, and the admissible interval."""
    doc = _load_document(market_path, use_example)
    resp = _call(validate_market, s.ValidateRequest(market=doc))
    _write(out, _json_artifact(resp.model_dump()))


@main.command()
@market_options
@click.option("--tol", type=float, default=1e-10, show_default=True, help="Gradient max-norm target.")
@click.option("--max-iter", type=int, default=100, show_default=True)
@click.option(
    "--allow-arbitrage",
    is_flag=True,
    help="Run the solver even if the jump support admits arbitrage (it will not converge).",
)
def kelly(market_path, use_example, out, tol, max_iter, allow_arbitrage):
    """Solve for the growth-optimal rebalancing rule."""
    doc = _load_document(market_path, use_example)
    req = s.KellyRequest(market=doc, tol=tol, max_iter=max_iter, check_arbitrage=not allow_arbitrage)
    resp = _call(compute_kelly, req)
    _write(out, _json_artifact(resp.model_dump()))
    if not resp.converged:
        _fail(
            "not-converged",
            f"solver stopped after {resp.iterations} iterations with gradient norm "
            f"{resp.gradient_norm:.3e} > tol {tol:.3e}",
            EXIT_NO_CONVERGENCE,
        )


@main.command()
@market_options
@click.option("--grid-points", type=int, default=201, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
def saddle(market_path, use_example, out, grid_points, tol, seed):
    """Emit the payoff-kernel surface 100*pi(b, c) over an admissible grid."""
    doc = _load_document(market_path, use_example)
    req = s.SaddleRequest(market=doc, grid_points=grid_points, tol=tol, seed=seed)
    resp = _call(compute_saddle, req)
    config = {
        "market": _doc_dump(doc),
        "grid_points": grid_points,
        "tol": tol,
        "seed": seed,
        "b_star": resp.report.b_star,
        "passed": resp.report.passed,
    }
    if resp.surface is None:
        _write(out, _json_artifact(resp.model_dump()))
        return
    header = ["b\\c"] + [_fmt(c) for c in resp.c_grid]
    rows = ([b] + row for b, row in zip(resp.b_grid, resp.surface))
    _write(out, _csv_artifact(config, header, rows))


def _parse_fractions(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(":")]
    except ValueError:
        raise click.UsageError(f"cannot parse rule fractions {text!r}; use e.g. 0.5 or 0.3:0.2")


def _parse_rules(text: str) -> list[s.RuleModel]:
    rules = []
    for item in text.split(","):
        name, eq, value = item.partition("=")
        if not eq:
            raise click.UsageError(f"cannot parse rule {item!r}; use name=fraction[:fraction...]")
        rules.append(s.RuleModel(name=name.strip(), fractions=_parse_fractions(value)))
    return rules


def _default_rules(doc: MarketDocument) -> list[s.RuleModel]:
    """Solved Kelly rule plus the two benchmark rules, for single-stock markets."""
    if doc.n != 1:
        raise click.UsageError("--rules is required for markets with more than one stock")
    kelly_resp = _call(compute_kelly, s.KellyRequest(market=doc))
    return [
        s.RuleModel(name="kelly", fractions=kelly_resp.b_star),
        s.RuleModel(name="hold", fractions=[1.0]),
        s.RuleModel(name="daring", fractions=[1.1]),
    ]


@main.command()
@market_options
@click.option("--horizon", type=float, default=10.0, show_default=True, help="Years to simulate.")
@click.option("--dt", type=float, default=0.01, show_default=True, help="Output sampling step.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option(
    "--rules",
    "rules_text",
    type=str,
    default=None,
    help="Comma-separated name=fractions rules (vector components ':'-separated). "
    "Default: solved Kelly rule plus hold=1 and daring=1.1.",
)
@click.option("--paths", type=int, default=1, show_default=True, help=">1 switches to statistics mode.")
@click.option("--allow-inadmissible", is_flag=True, help="Let bankruptable rules run (they absorb at 0).")
def simulate(market_path, use_example, out, horizon, dt, seed, rules_text, paths, allow_inadmissible):
    """Simulate shared-randomness wealth paths (or path statistics with --paths)."""
    doc = _load_document(market_path, use_example)
    rules = _parse_rules(rules_text) if rules_text else _default_rules(doc)
    base_config = {
        "market": _doc_dump(doc),
        "horizon": horizon,
        "dt": dt,
        "seed": seed,
        "rules": [r.model_dump() for r in rules],
        "paths": paths,
        "allow_inadmissible": allow_inadmissible,
    }
    if paths <= 1:
        req = s.SimulateRequest(
            market=doc,
            horizon=horizon,
            dt=dt,
            seed=seed,
            rules=rules,
            allow_inadmissible=allow_inadmissible,
        )
        resp = _call(run_simulation, req)
        header = ["time"] + list(resp.rule_names) + ["N", "U"]
        rows = (
            [resp.times[k]] + [w[k] for w in resp.wealth] + [resp.n_jumps[k], resp.n_up[k]]
            for k in range(len(resp.times))
        )
        _write(out, _csv_artifact(base_config, header, rows))
    else:
        req = s.SimulateSummaryRequest(
            market=doc,
            horizon=horizon,
            n_paths=paths,
            seed=seed,
            rules=rules,
            allow_inadmissible=allow_inadmissible,
        )
        resp = _call(summarize_simulation, req)
        base_config["mean_jumps"] = resp.mean_jumps
        header = [
            "rule",
            "mean_terminal_wealth",
            "mean_growth_rate",
            "stderr_growth_rate",
            "bankrupt_fraction",
        ]
        rows = (
            [r.name, r.mean_terminal_wealth, r.mean_growth_rate, r.stderr_growth_rate, r.bankrupt_fraction]
            for r in resp.rules
        )
        _write(out, _csv_artifact(base_config, header, rows))


@main.command()
@market_options
@click.option("--b", "b_value", type=float, default=None, help="Numerator rule (default: solved Kelly).")
@click.option("--c", "c_value", type=float, default=1.0, show_default=True, help="First rival rule.")
@click.option("--d", "d_value", type=float, default=1.1, show_default=True, help="Second rival rule.")
@click.option("--t-max", type=float, default=300.0, show_default=True)
@click.option("--t-points", type=int, default=121, show_default=True)
@click.option("--tol", type=float, default=1e-12, show_default=True, help="Series truncation tolerance.")
def outperform(market_path, use_example, out, b_value, c_value, d_value, t_max, t_points, tol):
    """Analytic outperformance probabilities for (b, c), (b, d), (c, d)."""
    doc = _load_document(market_path, use_example)
    if b_value is None:
        b_value = _call(compute_kelly, s.KellyRequest(market=doc)).b_star[0]
    t_grid = np.linspace(0.0, t_max, t_points).tolist()
    pairs = [
        s.PairModel(b=b_value, c=c_value),
        s.PairModel(b=b_value, c=d_value),
        s.PairModel(b=c_value, c=d_value),
    ]
    req = s.OutperformRequest(market=doc, pairs=pairs, t_grid=t_grid, tol=tol)
    resp = _call(compute_outperformance, req)
    config = {
        "market": _doc_dump(doc),
        "b": b_value,
        "c": c_value,
        "d": d_value,
        "t_max": t_max,
        "t_points": t_points,
        "tol": tol,
    }
    header = ["t", "p_b_beats_c", "p_b_beats_d", "p_c_beats_d"]
    rows = (
        [t] + [curve.values[k] for curve in resp.curves]
        for k, t in enumerate(resp.t_grid)
    )
    _write(out, _csv_artifact(config, header, rows))


def _parse_randomization(text: str) -> s.RandomizationModel:
    kind, _, arg = text.strip().lower().partition(":")
    kind = kind.replace("-", "_")
    if kind in {"degenerate", "uniform"}:
        return s.RandomizationModel(kind=kind)
    if kind == "lognormal":
        if not arg:
            raise click.UsageError("lognormal randomization needs a scale, e.g. lognormal:0.5")
        return s.RandomizationModel(kind="lognormal", s=float(arg))
    if kind == "discrete":
        values, probs = [], []
        for pair in arg.split(","):
            v, at, p = pair.partition("@")
            if not at:
                raise click.UsageError("discrete randomization looks like discrete:0@0.5,2@0.5")
            values.append(float(v))
            probs.append(float(p))
        return s.RandomizationModel(kind="discrete", values=values, probs=probs)
    raise click.UsageError(f"unknown randomization {text!r}")


def _parse_phi(text: str) -> s.PhiModel:
    kind, _, arg = text.strip().lower().partition(":")
    kind = kind.replace("-", "_")
    if kind == "identity":
        return s.PhiModel(kind="power", exponent=1.0)
    if kind == "indicator":
        return s.PhiModel(kind="indicator", alpha=float(arg) if arg else 1.0)
    if kind == "power":
        if not arg:
            raise click.UsageError("power measure needs an exponent, e.g. power:0.5")
        return s.PhiModel(kind="power", exponent=float(arg))
    if kind == "ratio_share":
        return s.PhiModel(kind="ratio_share")
    raise click.UsageError(f"unknown performance measure {text!r}")


@main.command("phi-game")
@market_options
@click.option("--primitive", is_flag=True, help="Evaluate the market-free primitive game instead.")
@click.option("--w1", type=str, default="degenerate", show_default=True, help="Player 1 randomization.")
@click.option("--w2", type=str, default="degenerate", show_default=True, help="Player 2 randomization.")
@click.option("--phi", "phi_text", type=str, default="identity", show_default=True)
@click.option("--b", "b_text", type=str, default=None, help="Player 1 rule (default: solved Kelly).")
@click.option("--c", "c_text", type=str, default=None, help="Player 2 rule (default: solved Kelly).")
@click.option("--t", type=float, default=1.0, show_default=True)
@click.option("--n-paths", type=int, default=10_000, show_default=True)
@click.option("--n-samples", type=int, default=100_000, show_default=True, help="Primitive-game draws.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
def phi_game(
    market_path, use_example, out, primitive, w1, w2, phi_text, b_text, c_text, t,
    n_paths, n_samples, seed,
):
    """Monte Carlo value of the phi-game (investment by default)."""
    w1_model = _parse_randomization(w1)
    w2_model = _parse_randomization(w2)
    phi_model = _parse_phi(phi_text)
    if primitive:
        req = s.PrimitiveGameRequest(
            w1=w1_model, w2=w2_model, phi=phi_model, n_samples=n_samples, seed=seed
        )
        resp = _call(primitive_game, req)
    else:
        doc = _load_document(market_path, use_example)
        if b_text is None or c_text is None:
            b_star = _call(compute_kelly, s.KellyRequest(market=doc)).b_star
        b_vec = _parse_fractions(b_text) if b_text is not None else b_star
        c_vec = _parse_fractions(c_text) if c_text is not None else b_star
        req = s.InvestmentGameRequest(
            market=doc,
            w1=w1_model,
            w2=w2_model,
            phi=phi_model,
            b=b_vec,
            c=c_vec,
            t=t,
            n_paths=n_paths,
            seed=seed,
        )
        resp = _call(investment_game, req)
    _write(out, _json_artifact(resp.model_dump()))


@main.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("jumpkelly.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
