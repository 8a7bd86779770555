import csv
import io
import math

import numpy as np
import pytest

import crnalloc


def test_config_roundtrip():
    ref = crnalloc.Config.reference()
    assert ref.users == 3 and ref.subcarriers == 64
    again = crnalloc.Config.parse(ref.text())
    assert again == ref
    assert again.fingerprint() == ref.fingerprint()
    assert "power.total_w" in crnalloc.config_keys()


def test_config_errors():
    with pytest.raises(crnalloc.ConfigError):
        crnalloc.Config.parse("no.such.key = 1\n")
    cfg = crnalloc.Config.reference()
    with pytest.raises(crnalloc.ConfigError):
        cfg.set("power.total_w", "lots")
    bad = crnalloc.Config.reference()
    bad.set("ber.target", "0.5")
    with pytest.raises(crnalloc.ConfigError):
        crnalloc.sinr_distribution(bad)
    cfg.set("power.total_w", "20")
    assert cfg.total_power_w == 20.0
    assert issubclass(crnalloc.ConfigError, crnalloc.Error)


def test_distribution_matches_samples():
    cfg = crnalloc.Config.reference()
    dist = crnalloc.sinr_distribution(cfg, user=1, subcarrier=5)
    samples = crnalloc.sample_sinr(cfg, 20000, user=1, subcarrier=5, threads=1)
    assert np.all(np.diff(samples) >= 0)
    grid = np.quantile(samples, [0.1, 0.5, 0.9])
    empirical = np.searchsorted(samples, grid, side="right") / samples.size
    assert np.max(np.abs(dist.cdf(grid) - empirical)) < 0.02
    assert np.all(dist.pdf(grid) > 0)


def test_scalar_helpers():
    assert crnalloc.zeta_for_target(1e-2) == pytest.approx(-1.5 / math.log(1e-2 / 0.3))
    assert crnalloc.discretize_rate(70.0) == 6
    assert crnalloc.discretize_rate(3.9) == 0
    assert crnalloc.ber_exact(4.0, 100.0) < 1e-10
    assert crnalloc.waterfill_power(2.0, 1.0, 1.0 / math.log(2.0), 0.0, 0.0, 1.0, 1.0) == pytest.approx(0.5)
    assert crnalloc.surrogate_budget(10.0, 0.1, 64) == pytest.approx(4.047, rel=1e-3)
    assert crnalloc.central_tail_approx([1.0], [0.0], 2.0 * math.log(10.0)) == pytest.approx(0.1)
    with pytest.raises(crnalloc.DomainError):
        crnalloc.zeta_for_target(0.5)


def test_run_reference():
    report = crnalloc.run(crnalloc.Config.reference(), states=200, threads=1)
    assert report["converged"]
    assert report["ase"] > 0
    assert report["avg_power_used"] <= 30.0 * 1.001
    assert report["max_interference"] <= 10.0 * (1 + 1e-6)
    assert len(report["trace"]) == report["iterations"]
    with pytest.raises(crnalloc.ConvergenceError):
        crnalloc.run(crnalloc.Config.reference(), states=200, threads=1, max_iterations=1)


def test_sweep_csv():
    result = crnalloc.sweep(crnalloc.Config.reference(), "ith", [2.0, 10.0], states=200, threads=1)
    rows = list(csv.DictReader(io.StringIO(result["csv"])))
    assert list(rows[0].keys()) == ["axis_value", "ase", "ase_stderr", "power_used", "max_interf", "collision",
                                    "epsilon"]
    assert [float(r["axis_value"]) for r in rows] == [2.0, 10.0]
    assert float(rows[1]["ase"]) >= float(rows[0]["ase"])
    assert '"fingerprint"' in result["json"]


def test_selftest():
    ok, text = crnalloc.selftest(threads=1)
    assert ok, text
    assert text.strip().endswith("selftest passed")
