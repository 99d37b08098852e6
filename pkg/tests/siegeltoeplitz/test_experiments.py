from __future__ import division

import csv
import json
import logging
import math
import os
import unittest

import numpy as np
import pytest

from siegeltoeplitz import ConfigError
from siegeltoeplitz.experiments import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    ExperimentConfig,
    ExperimentReport,
    Verdict,
    json_safe,
    load_config,
    spread,
)
from siegeltoeplitz.experiments.scenarios import (
    RUNNERS,
    run_scenario,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.measures import AtomicMeasure

TEST_DIR = os.path.dirname(os.path.realpath(__file__))
DATA_DIR = os.path.join(TEST_DIR, "data")


def make_config(**data):
    data.setdefault("scenario", "trace")
    return ExperimentConfig.from_dict(data, base_dir=DATA_DIR)


def test_json_safe():
    got = json_safe({
        1: (np.float64(1.5), np.int64(2), np.bool_(True)),
        "values": np.array([math.inf, -math.inf, math.nan]),
        "z": 1 + 2j,
        "region": Region(1, 0.5, 2.0),
    })
    assert got["1"] == [1.5, 2, True]
    assert got["values"] == ["inf", "-inf", "nan"]
    assert got["z"] == [1.0, 2.0]
    assert got["region"]["rho_max"] == 2.0
    json.dumps(got, allow_nan=False)


@pytest.mark.parametrize("measured,threshold,comparison,status", [
    (0.5, 1.0, "<=", PASS),
    (1.0, 1.0, "<", FAIL),
    (3, 2, ">=", PASS),
    (1.0, 1.0, "==", PASS),
    (1.005, [0.99, 1.01], "in", PASS),
    (1.02, [0.99, 1.01], "in", FAIL),
    (None, 1.0, "<=", INCONCLUSIVE),
    (math.nan, 1.0, "<=", INCONCLUSIVE),
])
def test_verdict_judge(measured, threshold, comparison, status):
    verdict = Verdict.judge("x", measured, threshold, comparison)
    assert verdict.status == status
    assert verdict.threshold == threshold
    assert verdict.to_json()["comparison"] == comparison


def test_verdict_unknown_comparison():
    with pytest.raises(ValueError):
        Verdict.judge("x", 1.0, 1.0, "~")


def test_spread():
    assert spread([2.0, 1.0, 4.0]) == 4.0
    assert spread([1.0, 0.0]) == math.inf
    assert spread([1.0, math.inf]) == math.inf
    assert spread([]) is None


class ConfigTests(unittest.TestCase):
    def test_defaults(self):
        config = make_config()
        self.assertEqual(config.n, 1)
        self.assertEqual(config.r, 0.5)
        self.assertEqual(config.seeds, (0, 1))
        self.assertIsNone(config.region)
        self.assertEqual(config.tolerance("trace", 0.02), 0.02)
        self.assertEqual(config.param("missing", 3), 3)
        self.assertIsNone(config.load_measure())

    def test_region_takes_n(self):
        config = make_config(n=2, region={"rho_min": 0.5, "rho_max": 2.0})
        self.assertEqual(config.region, Region(2, 0.5, 2.0))
        self.assertIs(config.require_region(), config.region)

    def test_quadrature_spec(self):
        config = make_config(quadrature={"rel_tol": 0.05, "nodes": 8},
                             threads=3)
        spec = config.quadrature_spec(Region(1, 0.5, 2.0), tail=False)
        self.assertEqual(spec.rel_tol, 0.05)
        self.assertEqual(spec.nodes, 8)
        self.assertEqual(spec.threads, 3)
        self.assertFalse(spec.tail)

    def test_measure_file_is_relative_to_config(self):
        config = load_config(os.path.join(DATA_DIR, "trace_delta.json"))
        mu = config.load_measure()
        self.assertIsInstance(mu, AtomicMeasure)
        self.assertEqual(len(mu), 1)

    def test_random_family(self):
        config = make_config(measure={"random": {"count": 4}})
        family = config.random_family(count=10, max_atoms=6)
        self.assertEqual(family["count"], 4)
        self.assertEqual(family["max_atoms"], 6)
        self.assertIsNone(config.load_measure())


@pytest.mark.parametrize("data", [
    {"scenario": "nope"},
    {"scenario": "trace", "n": 0},
    {"scenario": "trace", "n": True},
    {"scenario": "trace", "p_grid": [1, -2]},
    {"scenario": "trace", "p_grid": 2},
    {"scenario": "trace", "r": 0},
    {"scenario": "trace", "seeds": []},
    {"scenario": "trace", "params": []},
    {"scenario": "trace", "n": 2, "region": {"n": 1, "rho_min": 0.5,
                                             "rho_max": 2.0}},
    {"scenario": "trace", "region": {"rho_min": 2.0, "rho_max": 0.5}},
    ["scenario", "trace"],
])
def test_bad_config(data):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_unknown_key_warns(caplog):
    with caplog.at_level(logging.WARNING):
        make_config(colour="blue", region={"rho_min": 0.5, "rho_max": 2.0,
                                           "height": 1})
    assert "/colour" in caplog.text
    assert "/region/height" in caplog.text


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_report_output(tmp_path):
    report = ExperimentReport(
        scenario="trace",
        config={"scenario": "trace"},
        records=[{"instance": 0, "gap": 0.001, "values": [1, 2]},
                 {"instance": 1, "gap": math.inf}],
        verdicts=[Verdict.judge("a", 0.001, 0.02),
                  Verdict.inconclusive("b", 0.02, "<=", "no data")],
        runtime_seconds=1.5,
    )
    assert not report.passed
    assert report.counts() == {PASS: 1, FAIL: 0, INCONCLUSIVE: 1}
    assert "runtime_seconds" not in report.to_dict(include_runtime=False)
    assert report.table_columns() == ["instance", "gap"]
    path = str(tmp_path / "report.json")
    report.save(path)
    with open(path, 'r') as stream:
        data = json.load(stream)
    assert data["records"][1]["gap"] == "inf"
    assert data["summary"][INCONCLUSIVE] == 1
    csv_path = str(tmp_path / "report.csv")
    report.save_csv(csv_path)
    with open(csv_path, 'r', newline='') as stream:
        rows = list(csv.reader(stream))
    assert rows == [["instance", "gap"], ["0", "0.001"], ["1", "inf"]]


def test_runners_cover_scenarios():
    assert sorted(RUNNERS) == sorted(("geometry", "keylemma", "equivalence",
                                      "cutoff", "trace", "domination"))


def test_trace_scenario():
    report = run_scenario(load_config(os.path.join(DATA_DIR,
                                                   "trace_delta.json")))
    assert report.scenario == "trace"
    # δ_𝐢 always runs, then the configured measure (δ_𝐢 again)
    assert len(report.records) == 3
    assert report.records[0]["lhs"] == report.records[1]["lhs"]
    assert report.records[2]["trials"] == 10**4
    assert report.records[2]["violations"] == 0
    assert report.passed


def test_keylemma_scenario():
    config = make_config(scenario="keylemma", params={
        "dims": [1], "s_values": [4], "t_values": [0], "dilations": [2],
        "reject": [[1, 4, -1], [1, 2, 0]]})
    report = run_scenario(config)
    assert len(report.verdicts) == 3
    assert report.passed
    assert "rejected" in report.records[1]


def test_geometry_scenario():
    config = make_config(scenario="geometry", seed=2, params={
        "dims": [1], "samples": 100, "mc_samples": 400000,
        "volume_cases": 2, "subharmonic_samples": 3,
        "normalization_points": 2},
        tolerances={"volume": 0.05})
    report = run_scenario(config)
    assert report.passed, report.dumps()
    normalized = [r for r in report.records if r["check"] == "normalization"]
    assert len(normalized) == 2


def test_equivalence_scenario():
    config = load_config(os.path.join(DATA_DIR, "equivalence_small.json"))
    report = run_scenario(config)
    by_name = {v.name: v for v in report.verdicts}
    assert by_name["empty measure quantities"].passed
    assert by_name["lattice 0 size"].passed
    assert by_name["homogeneity under doubling"].status != FAIL
    rows = [r for r in report.records if "Q1" in r]
    assert rows
    for row in rows:
        assert row["Q1"] > 0
        assert row["Q2"] > 0
        # Q4 only exists above the critical exponent n/(n+1)
        assert (row["Q4"] is None) == (row["p"] <= 0.5)
    assert report.records[-1]["lattice_sizes"][0] > 1
    gates = [v for v in report.verdicts
             if v.name.startswith("completed instances")]
    assert len(gates) == 2
    for gate in gates:
        # every member of the three-measure family has to finish
        assert gate.threshold == 3


def test_cutoff_scenario():
    config = make_config(
        scenario="cutoff", p_grid=[0.3, 0.75],
        params={"eps_exponents": list(range(2, 9)), "fit_points": 4},
        quadrature={"rel_tol": 1e-3, "max_refinements": 4})
    report = run_scenario(config)
    assert report.passed, report.dumps()
    low, high = report.records
    assert low["expected"] == pytest.approx(0.4)
    assert high["ratio"] < 1.0
    assert 0.0 < high["raw_gap"] < 1.0
    by_name = {v.name: v for v in report.verdicts}
    assert by_name["convergence slope p=0.75"].passed
    assert by_name["divergence slope p=0.3"].passed


def test_domination_scenario():
    config = make_config(
        scenario="domination", measure={"file": "two_atoms.json"},
        params={"points": 4, "pointwise_samples": 200})
    report = run_scenario(config)
    by_name = {v.name: v for v in report.verdicts}
    assert by_name["pointwise domination violations"].passed
    assert report.records[0]["atoms"] == 2


def test_density_measure_is_rejected():
    config = make_config(scenario="trace",
                         measure={"file": "constant_box.json"})
    with pytest.raises(ConfigError):
        run_scenario(config)
