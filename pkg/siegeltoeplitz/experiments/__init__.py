# -*- coding: utf-8 -*-
"""Config-driven verification scenarios.

A config is JSON such as::

    {
      "scenario": "equivalence",
      "n": 1,
      "region": {"n": 1, "rho_min": 0.25, "rho_max": 4.0,
                 "zprime_radius": 1.0, "re_zn_bound": 4.0},
      "r": 0.5,
      "p_grid": [0.6, 1, 1.5, 2],
      "measure": {"random": {"count": 20, "max_atoms": 8}},
      "seed": 0,
      "seeds": [0, 1],
      "tolerances": {"band": 100.0},
      "quadrature": {"rel_tol": 0.1},
      "params": {}
    }

Keys are read with query_dict, and keys this module does not know about
are logged as warnings.
"""
from __future__ import annotations
from __future__ import division

import csv
import json
import logging
import math
import os

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from siegeltoeplitz import (
    ConfigError,
    emit_cast,
    get_all_queries,
    query_dict,
)
from siegeltoeplitz.lattice import Region
from siegeltoeplitz.measures import (
    load_measure,
    measure_from_config,
)
from siegeltoeplitz.quadrature import QuadratureSpec

logger = logging.getLogger(__name__)

SCENARIOS = (
    "geometry",
    "keylemma",
    "equivalence",
    "cutoff",
    "trace",
    "domination",
)

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

# Top-level keys; anything under these prefixes is accepted as is.
KNOWN_KEYS = (
    "scenario", "n", "region", "r", "p_grid", "measure", "seed", "seeds",
    "tolerances", "quadrature", "params", "threads", "out", "csv",
)
OPEN_PREFIXES = ("/measure/", "/tolerances/", "/params/")
REGION_KEYS = ("n", "rho_min", "rho_max", "zprime_radius", "re_zn_bound")
QUADRATURE_KEYS = ("nodes", "angular_nodes", "core", "core_step",
                   "rel_tol", "max_refinements", "tail")


def json_safe(value):
    """Convert numpy values, tuples and non-finite floats for json.

    Non-finite floats become the strings "inf", "-inf" and "nan".
    """
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else (
            "inf" if value > 0 else "-inf")
    if isinstance(value, complex):
        return [json_safe(value.real), json_safe(value.imag)]
    if hasattr(value, "to_json"):
        return json_safe(value.to_json())
    return value


_COMPARISONS = {
    "<": lambda m, t: m < t,
    "<=": lambda m, t: m <= t,
    ">": lambda m, t: m > t,
    ">=": lambda m, t: m >= t,
    "==": lambda m, t: m == t,
    "in": lambda m, t: t[0] <= m <= t[1],
}


@dataclass(frozen=True)
class Verdict:
    """One judged quantity. The threshold is always carried along.

    Args:
        name (str): What was measured, such as "Q1/Q2 band p=1".
        measured (float): The measured value, or None when it could not
            be computed.
        threshold (Union[float, list]): Bound, or [low, high] for "in".
        comparison (str): One of <, <=, >, >=, ==, in.
        status (str): pass, fail or inconclusive.
        note (str): Why a verdict is inconclusive, if it is.
    """
    name: str
    measured: Optional[float]
    threshold: object
    comparison: str
    status: str
    note: str = ""

    @classmethod
    def judge(cls, name, measured, threshold, comparison="<="):
        if comparison not in _COMPARISONS:
            raise ValueError("Unknown comparison {}".format(comparison))
        if measured is None or (isinstance(measured, float)
                                and math.isnan(measured)):
            return cls(name, measured, threshold, comparison, INCONCLUSIVE,
                       "no measurement")
        ok = _COMPARISONS[comparison](measured, threshold)
        return cls(name, measured, threshold, comparison,
                   PASS if ok else FAIL)

    @classmethod
    def inconclusive(cls, name, threshold, comparison, note):
        return cls(name, None, threshold, comparison, INCONCLUSIVE, note)

    @property
    def passed(self):
        return self.status == PASS

    def to_json(self):
        return {
            "name": self.name,
            "measured": self.measured,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "status": self.status,
            "note": self.note,
        }


def spread(values):
    """max/min of positive finite values; inf if any is 0 or infinite."""
    values = [float(v) for v in values]
    if not values:
        return None
    if any(not math.isfinite(v) or v <= 0 for v in values):
        return math.inf
    return max(values) / min(values)


@dataclass
class ExperimentReport:
    scenario: str
    config: dict
    records: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def passed(self):
        return bool(self.verdicts) and all(v.passed for v in self.verdicts)

    def counts(self):
        result = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
        for verdict in self.verdicts:
            result[verdict.status] += 1
        return result

    def to_dict(self, include_runtime=True):
        data = {
            "scenario": self.scenario,
            "config": self.config,
            "records": self.records,
            "verdicts": [v.to_json() for v in self.verdicts],
            "summary": self.counts(),
            "passed": self.passed,
        }
        if include_runtime:
            data["runtime_seconds"] = self.runtime_seconds
        return json_safe(data)

    def dumps(self, include_runtime=True):
        return json.dumps(self.to_dict(include_runtime), indent=2)

    def save(self, path, include_runtime=True):
        with open(path, 'w') as stream:
            stream.write(self.dumps(include_runtime))
            stream.write("\n")

    def table_columns(self):
        columns = []
        for record in self.records:
            for key, value in record.items():
                if key in columns:
                    continue
                if isinstance(value, (str, int, float, bool, np.floating,
                                      np.integer)) or value is None:
                    columns.append(key)
        return columns

    def save_csv(self, path):
        """Write the scalar fields of every record as one CSV row."""
        columns = self.table_columns()
        with open(path, 'w', newline='') as stream:
            writer = csv.writer(stream)
            writer.writerow(columns)
            for record in self.records:
                writer.writerow([json_safe(record.get(key, ""))
                                 for key in columns])


def _known(query):
    if query.startswith(OPEN_PREFIXES):
        return True
    if query.startswith("/region/"):
        return query[len("/region/"):] in REGION_KEYS
    if query.startswith("/quadrature/"):
        return query[len("/quadrature/"):] in QUADRATURE_KEYS
    if query.startswith("/p_grid/") or query.startswith("/seeds/"):
        return True
    return query.lstrip("/") in KNOWN_KEYS


def _positive_float(data, query, default):
    value = query_dict(data, query, default)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError("{} must be a number but got {}"
                          .format(query, emit_cast(value)))
    if not value > 0:
        raise ConfigError("{} must be positive but got {}"
                          .format(query, value))
    return value


@dataclass
class ExperimentConfig:
    scenario: str
    n: int = 1
    region: Optional[Region] = None
    r: float = 0.5
    p_grid: Tuple[float, ...] = ()
    measure: Optional[dict] = None
    seed: int = 0
    seeds: Tuple[int, ...] = (0, 1)
    tolerances: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    threads: int = 1
    out: Optional[str] = None
    csv: Optional[str] = None
    base_dir: str = "."
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data, base_dir="."):
        if not isinstance(data, dict):
            raise ConfigError("A config must be a JSON object but got {}"
                              .format(emit_cast(data)))
        for query in get_all_queries(data):
            if not _known(query):
                logger.warning("Unknown config key {}".format(query))
        scenario = query_dict(data, "/scenario")
        if scenario not in SCENARIOS:
            raise ConfigError("scenario must be one of {} but got {}"
                              .format(SCENARIOS, emit_cast(scenario)))
        n = query_dict(data, "/n", 1)
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError("n must be a positive int but got {}"
                              .format(emit_cast(n)))
        region = None
        if query_dict(data, "/region") is not None:
            region_data = dict(query_dict(data, "/region"))
            region_data.setdefault("n", n)
            try:
                region = Region.from_json(region_data)
            except ValueError as ex:
                raise ConfigError("Bad region: {}".format(ex))
            if region.n != n:
                raise ConfigError("region n={} does not match n={}"
                                  .format(region.n, n))
        p_grid = query_dict(data, "/p_grid", [])
        if not isinstance(p_grid, list):
            raise ConfigError("p_grid must be a list but got {}"
                              .format(emit_cast(p_grid)))
        for p in p_grid:
            if isinstance(p, bool) or not isinstance(p, (int, float)) \
                    or not p > 0:
                raise ConfigError("p_grid values must be positive but got"
                                  " {}".format(emit_cast(p)))
        seeds = query_dict(data, "/seeds", [0, 1])
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("seeds must be a nonempty list")
        for name in ("tolerances", "quadrature", "params"):
            value = query_dict(data, "/" + name, {})
            if not isinstance(value, dict):
                raise ConfigError("{} must be an object but got {}"
                                  .format(name, emit_cast(value)))
        return cls(
            scenario=scenario,
            n=n,
            region=region,
            r=_positive_float(data, "/r", 0.5),
            p_grid=tuple(float(p) for p in p_grid),
            measure=query_dict(data, "/measure"),
            seed=int(query_dict(data, "/seed", 0)),
            seeds=tuple(int(s) for s in seeds),
            tolerances=dict(query_dict(data, "/tolerances", {})),
            quadrature=dict(query_dict(data, "/quadrature", {})),
            params=dict(query_dict(data, "/params", {})),
            threads=int(query_dict(data, "/threads", 1)),
            out=query_dict(data, "/out"),
            csv=query_dict(data, "/csv"),
            base_dir=base_dir,
            raw=data,
        )

    def tolerance(self, name, default):
        return float(self.tolerances.get(name, default))

    def param(self, name, default=None):
        return query_dict(self.params, "/" + name, default)

    def require_region(self, default=None):
        if self.region is not None:
            return self.region
        if default is None:
            raise ConfigError("Scenario {} needs a region"
                              .format(self.scenario))
        return default

    def quadrature_spec(self, region, **overrides):
        settings = {k: v for k, v in self.quadrature.items()
                    if k in QUADRATURE_KEYS}
        settings.setdefault("threads", self.threads)
        settings.update(overrides)
        try:
            return QuadratureSpec(region=region, **settings)
        except (TypeError, ValueError) as ex:
            raise ConfigError("Bad quadrature settings: {}".format(ex))

    def load_measure(self):
        """The configured measure, or None when it is a random family."""
        source = self.measure
        if source is None or "random" in source:
            return None
        if "file" in source:
            path = source["file"]
            if not os.path.isabs(path):
                path = os.path.join(self.base_dir, path)
            return load_measure(path)
        return measure_from_config(source)

    def random_family(self, count=10, max_atoms=10):
        settings = {"count": count, "max_atoms": max_atoms,
                    "weight_range": [0.5, 2.0]}
        if self.measure is not None:
            settings.update(self.measure.get("random", {}))
        return settings

    def echo(self):
        data = dict(self.raw)
        data.setdefault("scenario", self.scenario)
        data["seed"] = self.seed
        data["threads"] = self.threads
        return data


def load_config(path):
    try:
        with open(path, 'r') as stream:
            data = json.load(stream)
    except json.JSONDecodeError as ex:
        raise ConfigError("{} is not valid JSON: {}".format(path, ex))
    return ExperimentConfig.from_dict(
        data, base_dir=os.path.dirname(os.path.abspath(path)))
