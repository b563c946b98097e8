import math
import os
from pathlib import Path

import pytest

import tca_influence as tca

SPEC = os.environ.get("TCA_SPEC", str(Path(__file__).resolve().parents[2] / "tests" / "data" / "small.spec"))


@pytest.fixture(scope="module")
def generated():
    return tca.generate_synthetic(SPEC)


def test_factor_layout():
    names = tca.factor_names()
    assert len(names) == 28
    assert len(set(names)) == 28
    assert tca.group_count() == 406


def test_binarize_and_fit():
    pe = [5.0, 1.0, 3.0, 2.0, 4.0]
    threshold, y = tca.binarize(pe, 0.4)
    assert threshold == 2.0
    assert y == [0, 1, 0, 0, 0]

    z = [-3.0, -0.5, 0.0, 0.2, 0.4, 3.5, 0.1, -0.2]
    y = [1, 0, 0, 0, 0, 1, 0, 0]
    fit = tca.fit_two_sided(z, y)
    assert fit["power"] == 1.0 and fit["p0"] == 1.0
    assert fit["theta_minus"] > -3.0 and fit["theta_plus"] < 3.5


def test_mir():
    y = [1, 0, 0, 1, 0, 0]
    assert tca.mir(y, y) == pytest.approx(1.0)
    assert tca.mir([0] * 6, y) == pytest.approx(0.0)
    assert 0.0 < tca.mir_from_rates(0.05, 0.9, 0.9) < 1.0
    with pytest.raises(ArithmeticError):
        tca.mir(y, [0] * 6)


def test_config_validation():
    c = tca.EngineConfig()
    c.q = 1.5
    with pytest.raises(ValueError):
        c.validate()
    with pytest.raises(ValueError):
        c.quality = "median"


def test_generate_and_enrich(generated):
    portfolio, truth = generated
    assert len(portfolio) == 45
    assert truth.startswith("seed = 3")
    rich = tca.enrich(portfolio, tca.EngineConfig())
    assert len(rich[0].factor(27)) == len(rich[0].orders)
    assert all(math.isnan(v) for v in rich[0].factor(4))


def test_analysis_end_to_end(generated, tmp_path):
    portfolio, truth = generated
    config = tca.EngineConfig()
    config.q = 0.03
    reports = tca.analyze(portfolio, config)
    assert [r["slice"] for r in reports] == list(range(45))
    assert any("volatility_score" in g for g in reports[40]["dominating"])

    summary = tca.run_analysis(portfolio, config, str(tmp_path / "out"))
    assert summary["slices"] == 45
    (tmp_path / "truth.txt").write_text(truth)
    result = tca.evaluate(tmp_path / "out", tmp_path / "truth.txt")
    assert result["recall"] == 1.0


def test_csv_round_trip(generated, tmp_path):
    portfolio, _ = generated
    path = tmp_path / "p.csv"
    path.write_text(tca.write_portfolio(portfolio))
    again = tca.load_portfolio(str(path))
    assert tca.write_portfolio(again) == path.read_text()
