"""CLI behavior: artifacts, determinism, exit codes."""
import json

import numpy as np
import pytest
from click.testing import CliRunner

from jumpkelly.cli import main
from jumpkelly.market import EXAMPLE_MARKET_DOC


@pytest.fixture()
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


def parse_csv(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_kelly_paper_example(runner):
    result = run(runner, "kelly", "--paper-example")
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["b_star"][0] == pytest.approx(0.585, abs=1e-3)
    assert body["growth_rate"] == pytest.approx(0.1134, abs=5e-4)
    assert body["converged"] is True


def test_validate_paper_example(runner):
    result = run(runner, "validate", "--paper-example")
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["valid"] is True
    assert body["no_arbitrage"]["passed"] is True
    assert body["admissible_interval"] == {"lower": -1.0, "upper": 2.0}


def test_market_file_round_trip(runner, tmp_path):
    path = tmp_path / "market.json"
    path.write_text(json.dumps(EXAMPLE_MARKET_DOC))
    result = run(runner, "kelly", "--market", str(path))
    assert result.exit_code == 0
    assert json.loads(result.output)["converged"] is True


def test_requires_exactly_one_market_source(runner, tmp_path):
    result = run(runner, "kelly")
    assert result.exit_code == 2
    path = tmp_path / "market.json"
    path.write_text(json.dumps(EXAMPLE_MARKET_DOC))
    result = run(runner, "kelly", "--market", str(path), "--paper-example")
    assert result.exit_code == 2


def test_missing_market_file(runner, tmp_path):
    result = run(runner, "kelly", "--market", str(tmp_path / "nope.json"))
    assert result.exit_code == 2
    record = json.loads(result.stderr)
    assert record["error"] == "market-file"


def test_schema_violation_exit_code(runner, tmp_path):
    doc = dict(EXAMPLE_MARKET_DOC)
    doc["mu"] = 0.08  # nu is also present
    path = tmp_path / "market.json"
    path.write_text(json.dumps(doc))
    result = run(runner, "kelly", "--market", str(path))
    assert result.exit_code == 2
    record = json.loads(result.stderr)
    assert record["error"] == "market-schema"
    assert "nu" in record["message"]


def test_invalid_market_exit_code(runner, tmp_path):
    doc = dict(EXAMPLE_MARKET_DOC)
    doc["atoms"] = [{"x": [0.01], "p": 0.5}, {"x": [0.2], "p": 0.5}]
    path = tmp_path / "market.json"
    path.write_text(json.dumps(doc))
    result = run(runner, "kelly", "--market", str(path))
    assert result.exit_code == 3
    record = json.loads(result.stderr)
    assert record["error"] == "invalid-market"
    assert any("arbitrage" in v for v in record["violations"])
    # validate still reports rather than failing
    result = run(runner, "validate", "--market", str(path))
    assert result.exit_code == 0
    assert json.loads(result.output)["valid"] is False


def test_non_convergence_exit_code(runner):
    result = run(runner, "kelly", "--paper-example", "--max-iter", "1", "--tol", "1e-14")
    assert result.exit_code == 4
    record = json.loads(result.stderr)
    assert record["error"] == "not-converged"


def test_saddle_csv_structure(runner):
    result = run(runner, "saddle", "--paper-example", "--grid-points", "11")
    assert result.exit_code == 0
    assert result.output.startswith("# config: ")
    header, rows = parse_csv(result.output)
    assert header[0] == "b\\c"
    assert len(header) == 12 and len(rows) == 11
    grid = [float(h) for h in header[1:]]
    for k, row in enumerate(rows):
        assert float(row[0]) == pytest.approx(grid[k])  # square grid
        # diagonal entries vanish
        assert float(row[1 + k]) == pytest.approx(0.0, abs=1e-12)


def test_simulate_csv_structure(runner):
    result = run(runner, "simulate", "--paper-example", "--horizon", "2", "--dt", "0.5")
    assert result.exit_code == 0
    header, rows = parse_csv(result.output)
    assert header == ["time", "kelly", "hold", "daring", "N", "U"]
    assert [float(r[0]) for r in rows] == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert all(float(v) == 1.0 for v in rows[0][1:4])  # wealth starts at 1
    n_col = [int(r[4]) for r in rows]
    u_col = [int(r[5]) for r in rows]
    assert n_col == sorted(n_col)
    assert all(u <= n for u, n in zip(u_col, n_col))


def test_simulate_explicit_rules_and_bond_exactness(runner):
    result = run(
        runner, "simulate", "--paper-example", "--horizon", "1", "--dt", "0.25",
        "--rules", "bond=0",
    )
    header, rows = parse_csv(result.output)
    assert header[:2] == ["time", "bond"]
    for row in rows:
        t, w = float(row[0]), float(row[1])
        assert w == pytest.approx(np.exp(0.03 * t), rel=1e-12)


def test_simulate_statistics_mode(runner):
    result = run(
        runner, "simulate", "--paper-example", "--horizon", "1", "--paths", "2000",
        "--rules", "kelly=0.5854,hold=1",
    )
    assert result.exit_code == 0
    header, rows = parse_csv(result.output)
    assert header[0] == "rule"
    assert [r[0] for r in rows] == ["kelly", "hold"]
    for row in rows:
        assert float(row[4]) == 0.0  # bankrupt_fraction


def test_byte_identical_artifacts(runner, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        result = run(
            runner, "simulate", "--paper-example", "--horizon", "3", "--dt", "0.5",
            "--seed", "11", "--out", str(path),
        )
        assert result.exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    run(
        runner, "simulate", "--paper-example", "--horizon", "3", "--dt", "0.5",
        "--seed", "12", "--out", str(c),
    )
    assert a.read_bytes() != c.read_bytes()


def test_outperform_csv(runner):
    result = run(
        runner, "outperform", "--paper-example", "--t-max", "10", "--t-points", "5"
    )
    assert result.exit_code == 0
    header, rows = parse_csv(result.output)
    assert header == ["t", "p_b_beats_c", "p_b_beats_d", "p_c_beats_d"]
    assert len(rows) == 5
    assert all(float(v) == 0.0 for v in rows[0][1:])  # t = 0 row
    for row in rows:
        for v in row[1:]:
            assert 0.0 <= float(v) <= 1.0


def test_outperform_full_horizon_trends(runner):
    result = run(
        runner, "outperform", "--paper-example", "--t-max", "300", "--t-points", "7"
    )
    assert result.exit_code == 0
    _, rows = parse_csv(result.output)
    curves = np.array([[float(v) for v in row[1:]] for row in rows])
    assert np.all((curves >= 0) & (curves <= 1))
    # the growth-rate ordering pushes every curve monotonically toward 1
    assert np.all(np.diff(curves, axis=0) > 0)
    assert np.all(curves[-1] > 0.9)


def test_phi_game_investment_default_kelly(runner):
    result = run(
        runner, "phi-game", "--paper-example", "--w1", "uniform", "--w2", "uniform",
        "--phi", "indicator:1", "--n-paths", "20000", "--seed", "8",
    )
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["n"] == 20000
    assert body["estimate"] == pytest.approx(0.5, abs=3 * body["stderr"])


def test_phi_game_primitive(runner):
    result = run(
        runner, "phi-game", "--primitive", "--w1", "uniform", "--w2", "degenerate",
        "--phi", "indicator", "--n-samples", "50000",
    )
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["estimate"] == pytest.approx(0.5, abs=3 * body["stderr"])


def test_phi_game_discrete_parse(runner):
    result = run(
        runner, "phi-game", "--primitive", "--w1", "discrete:0@0.5,2@0.5",
        "--w2", "degenerate", "--phi", "ratio-share", "--n-samples", "10000",
    )
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["estimate"] == pytest.approx(1 / 3, abs=3 * body["stderr"])


def test_json_artifact_written_to_file(runner, tmp_path):
    out = tmp_path / "kelly.json"
    result = run(runner, "kelly", "--paper-example", "--out", str(out))
    assert result.exit_code == 0
    assert result.output == ""
    body = json.loads(out.read_text())
    assert body["b_star"][0] == pytest.approx(0.5854, abs=1e-3)


def test_two_stock_market_through_cli(runner, tmp_path):
    doc = {
        "n": 2,
        "mu": [0.07, 0.05],
        "sigma": [0.2, 0.3],
        "rho": [[1.0, 0.4], [0.4, 1.0]],
        "r": 0.01,
        "lambda": 0.5,
        "atoms": [
            {"x": [0.3, -0.1], "p": 0.5},
            {"x": [-0.3, 0.1], "p": 0.5},
        ],
    }
    path = tmp_path / "two.json"
    path.write_text(json.dumps(doc))
    result = run(runner, "validate", "--market", str(path))
    assert result.exit_code == 0
    assert json.loads(result.output)["valid"] is True
    result = run(runner, "kelly", "--market", str(path))
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["converged"] is True
    assert len(body["b_star"]) == 2
    result = run(
        runner, "simulate", "--market", str(path), "--horizon", "1", "--dt", "0.5",
        "--rules", "a=0.2:0.1,b=0.5:-0.2",
    )
    assert result.exit_code == 0
    header, rows = parse_csv(result.output)
    assert header == ["time", "a", "b", "N", "U"]


def test_saddle_multistock_json_artifact(runner, tmp_path):
    doc = {
        "n": 2,
        "mu": [0.06, 0.05],
        "sigma": [0.2, 0.25],
        "rho": [[1.0, 0.3], [0.3, 1.0]],
        "r": 0.01,
        "lambda": 0.5,
        "atoms": [{"x": [0.2, -0.1], "p": 0.5}, {"x": [-0.2, 0.1], "p": 0.5}],
    }
    path = tmp_path / "two.json"
    path.write_text(json.dumps(doc))
    result = run(runner, "saddle", "--market", str(path), "--grid-points", "30")
    assert result.exit_code == 0
    body = json.loads(result.output)  # no grid surface for n >= 2, JSON report instead
    assert body["report"]["passed"] is True
    assert body["surface"] is None


def test_simulate_allow_inadmissible(runner):
    # seed 3 produces a halving jump within 5 years, wiping out the 2.2778 rule
    result = run(
        runner, "simulate", "--paper-example", "--horizon", "5", "--dt", "0.5",
        "--seed", "3", "--rules", "wild=2.2778,safe=0.5", "--allow-inadmissible",
    )
    assert result.exit_code == 0
    header, rows = parse_csv(result.output)
    wild = [float(r[1]) for r in rows]
    assert min(wild) == 0.0
    first = wild.index(0.0)
    assert first > 0  # solvent at the start
    assert all(v == 0.0 for v in wild[first:])  # bankruptcy absorbs
    assert all(float(r[2]) > 0 for r in rows)  # the safe rule survives


def test_phi_game_explicit_rules(runner):
    result = run(
        runner, "phi-game", "--paper-example", "--b", "0.3", "--c", "1.2",
        "--phi", "identity", "--n-paths", "30000", "--seed", "4",
    )
    assert result.exit_code == 0
    body = json.loads(result.output)
    # E[V(0.3)/V(1.2)] = exp(pi(0.3, 1.2)) > 1 for this market
    assert body["estimate"] > 1.0


def test_outperform_explicit_numerator(runner):
    result = run(
        runner, "outperform", "--paper-example", "--b", "0.3", "--c", "0.8",
        "--d", "1.2", "--t-max", "4", "--t-points", "3",
    )
    assert result.exit_code == 0
    header, rows = parse_csv(result.output)
    assert len(rows) == 3
    assert "\"b\": 0.3" in result.output.splitlines()[0]


def test_bad_rule_syntax(runner):
    result = runner.invoke(main, ["simulate", "--paper-example", "--rules", "oops"])
    assert result.exit_code == 2


def test_unknown_phi_kind(runner):
    result = runner.invoke(main, ["phi-game", "--primitive", "--phi", "mystery"])
    assert result.exit_code == 2
