# -*- coding: utf-8 -*-
"""Scenario runners.

Each run_* function takes an ExperimentConfig and returns an
ExperimentReport whose verdicts carry the thresholds they were judged
against. Independent cases run on config.threads worker threads and are
merged in input order.
"""
from __future__ import annotations
from __future__ import division

import logging
import math
import time

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from scipy import stats

from siegeltoeplitz import (
    ConfigError,
    DivergentParametersError,
    ToleranceError,
)
from siegeltoeplitz.experiments import (
    ExperimentReport,
    Verdict,
    spread,
)
from siegeltoeplitz.geometry import (
    SiegelPoint,
    automorphism_array,
    ball_chart_box,
    ball_volume,
    chart_array,
    dilate,
    distortion_bounds,
    invariant_ball_measure,
    invariant_density,
    invariant_density_array,
    inverse_automorphism_array,
    metric_array,
    monte_carlo_ball_volume,
    random_points,
    rho,
    rho_array,
    rho_form_array,
)
from siegeltoeplitz.lattice import (
    Region,
    build_lattice,
)
from siegeltoeplitz.measures import (
    AtomicMeasure,
    point_mass,
    random_atomic_measure,
)
from siegeltoeplitz.quadrature import (
    ball_integral,
    integrate,
)
from siegeltoeplitz.schatten import (
    domination_ratio,
    gram_matrix,
    power_inequality_check,
    schatten_norm,
    spectrum,
    trace_power,
    trace_identity_check,
    trace_region,
)
from siegeltoeplitz.transforms import (
    averaging_field,
    averaging_lp_norm,
    berezin_field,
    domination_constant,
    keylemma_check,
    keylemma_spec,
    lattice_lp_sum,
    lp_lambda_norm,
    subharmonic_ratio,
    volume_berezin,
)

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-10
INEQUALITY_SLACK = 1e-12


def _ordered_map(func, items, threads=1):
    items = list(items)
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(func, items))
    return [func(item) for item in items]


def default_region(n):
    return Region(n, 0.25, 4.0, 1.0, 4.0)


def default_support(n):
    return Region(n, 0.5, 2.0, 0.5, 2.0)


def _region_param(config, name, default):
    data = config.param(name)
    if data is None:
        return default
    data = dict(data)
    data.setdefault("n", config.n)
    try:
        return Region.from_json(data)
    except ValueError as ex:
        raise ConfigError("params/{} is not a region: {}".format(name, ex))


def _report(config, records, verdicts, start):
    return ExperimentReport(
        scenario=config.scenario,
        config=config.echo(),
        records=records,
        verdicts=verdicts,
        runtime_seconds=time.perf_counter() - start,
    )


def _config_measures(config, support, count, max_atoms):
    """The configured atomic measure, or a seeded random family."""
    fixed = config.load_measure()
    if fixed is not None:
        if not isinstance(fixed, AtomicMeasure):
            raise ConfigError("Scenario {} needs an atomic measure"
                              .format(config.scenario))
        return [fixed]
    family = config.random_family(count=count, max_atoms=max_atoms)
    rng = np.random.default_rng(config.seed)
    return [random_atomic_measure(rng, support, int(family["max_atoms"]),
                                  tuple(family["weight_range"]))
            for _ in range(int(family["count"]))]


# geometry


def _ball_offsets(rng, n, r, count):
    """Points w with β(𝐢, w) < r, drawn by rejection from a chart box."""
    center = SiegelPoint.i(n)
    low, high = ball_chart_box(center, r)
    found = []
    total = 0
    while total < count:
        points = chart_array(rng.uniform(low, high,
                                         size=(2 * count, low.size)))
        points = points[metric_array(center, points) < r]
        found.append(points)
        total += points.shape[0]
    return np.concatenate(found)[:count]


def _identity_checks(n, rng, samples, r):
    per_center = max(1, int(math.sqrt(samples)))
    centers = random_points(rng, n, max(1, samples // per_center))
    worst = {
        "hermitian": 0.0,
        "rho_under_automorphism": 0.0,
        "rho_under_inverse": 0.0,
        "center_to_i": 0.0,
        "round_trip": 0.0,
        "metric_invariance": 0.0,
    }
    violations = {"lower_bound": 0, "real_part": 0, "distortion": 0}
    i_point = SiegelPoint.i(n).coords
    low, high = distortion_bounds(r)
    for z in centers:
        u = random_points(rng, n, per_center)
        v = random_points(rng, n, per_center)
        zu = rho_form_array(u, v)
        uz = rho_form_array(v, u)
        worst["hermitian"] = max(worst["hermitian"], float(np.max(
            np.abs(zu - np.conj(uz)) / np.abs(zu))))
        heights_u = rho_array(u)
        heights_v = rho_array(v)
        violations["lower_bound"] += int(np.sum(
            2.0 * np.abs(zu) < np.maximum(heights_u, heights_v)
            * (1.0 - INEQUALITY_SLACK)))
        violations["real_part"] += int(np.sum(
            zu.real < 0.5 * (heights_u + heights_v)
            * (1.0 - INEQUALITY_SLACK)))

        height = rho(z)
        su = automorphism_array(z, u)
        sv = automorphism_array(z, v)
        expected = zu / height
        worst["rho_under_automorphism"] = max(
            worst["rho_under_automorphism"],
            float(np.max(np.abs(rho_form_array(su, sv) - expected)
                         / np.abs(expected))))
        iu = inverse_automorphism_array(z, u)
        iv = inverse_automorphism_array(z, v)
        expected = zu * height
        worst["rho_under_inverse"] = max(
            worst["rho_under_inverse"],
            float(np.max(np.abs(rho_form_array(iu, iv) - expected)
                         / np.abs(expected))))
        worst["center_to_i"] = max(worst["center_to_i"], float(np.max(
            np.abs(automorphism_array(z, z) - i_point))))
        back = inverse_automorphism_array(z, su)
        worst["round_trip"] = max(worst["round_trip"], float(np.max(
            np.abs(back - u) / (1.0 + np.abs(u)))))
        worst["metric_invariance"] = max(
            worst["metric_invariance"],
            float(np.max(np.abs(metric_array(su, sv)
                                - metric_array(u, v)))))

        # distortion: z plays u's role, each w is sent into D(z, r)
        offsets = _ball_offsets(rng, n, r, per_center)
        nearby = inverse_automorphism_array(z, offsets)
        ratio = (np.abs(rho_form_array(u, z))
                 / np.abs(rho_form_array(u, nearby)))
        violations["distortion"] += int(np.sum(
            (ratio < low * (1.0 - INEQUALITY_SLACK))
            | (ratio > high * (1.0 + INEQUALITY_SLACK))))
    triples = centers.shape[0] * per_center
    return worst, violations, triples


def run_geometry_suite(config):
    """Closed-form identities, inequalities and ball measures."""
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    samples = int(config.param("samples", 10**4))
    mc_samples = int(config.param("mc_samples", 10**6))
    volume_cases = int(config.param("volume_cases", 5))
    sub_samples = int(config.param("subharmonic_samples", 20))
    p = float(config.param("p", 1.0))
    normalization_dims = config.param("normalization_dims", [1])
    normalization_points = int(config.param("normalization_points", 20))
    r = config.r
    records = []
    verdicts = []
    for n in config.param("dims", [config.n]):
        worst, violations, triples = _identity_checks(n, rng, samples, r)
        records.append(dict(check="identities", n=n, triples=triples,
                            **worst, **violations))
        verdicts.append(Verdict.judge(
            "rho Hermitian symmetry n={}".format(n), worst["hermitian"],
            1e-12, "<="))
        for name in ("rho_under_automorphism", "rho_under_inverse",
                     "center_to_i", "round_trip", "metric_invariance"):
            verdicts.append(Verdict.judge(
                "{} n={}".format(name, n), worst[name],
                IDENTITY_TOLERANCE, "<"))
        for name, count in violations.items():
            verdicts.append(Verdict.judge(
                "{} violations n={}".format(name, n), count, 0, "<="))

        for k in range(volume_cases):
            z = SiegelPoint(random_points(rng, n, 1, rho_range=(0.5, 2.0),
                                          re_bound=1.0,
                                          zprime_bound=0.5)[0])
            radius = float(rng.uniform(0.3, 1.0))
            closed = ball_volume(z, radius)
            estimate, error = monte_carlo_ball_volume(
                z, radius, samples=mc_samples, seed=config.seed + k)
            records.append({"check": "ball_volume", "n": n,
                            "point": z.to_json(), "r": radius,
                            "closed_form": closed, "monte_carlo": estimate,
                            "standard_error": error})
            verdicts.append(Verdict.judge(
                "ball volume n={} case {}".format(n, k),
                abs(estimate / closed - 1.0),
                config.tolerance("volume", 0.01), "<="))

        centers = random_points(rng, n, volume_cases, rho_range=(0.1, 10.0))
        lambdas = [ball_integral(invariant_density_array, z, r).value
                   for z in centers]
        records.append({"check": "ball_lambda", "n": n, "r": r,
                        "values": lambdas,
                        "closed_form": invariant_ball_measure(r, n)})
        verdicts.append(Verdict.judge(
            "lambda(D(z,r)) constant in z n={}".format(n),
            spread(lambdas) - 1.0, config.tolerance("lambda", 0.02), "<="))

        ratios = []
        for z, w in zip(random_points(rng, n, sub_samples),
                        random_points(rng, n, sub_samples)):
            ratios.append(subharmonic_ratio(w, z, r, p))
        t = math.tanh(r)
        bound = ((1.0 + t) / (1.0 - t)) ** (2 * (n + 1) * p)
        records.append({"check": "subharmonic", "n": n, "r": r, "p": p,
                        "sup": max(ratios), "inf": min(ratios)})
        verdicts.append(Verdict.judge(
            "subharmonic ratio spread n={}".format(n), spread(ratios),
            bound, "<="))

        if n in normalization_dims:
            verdicts.append(_normalization_check(
                n, rng, normalization_points, records,
                config.tolerance("normalization", 0.02)))
    return _report(config, records, verdicts, start)


def _normalization_check(n, rng, count, records, tolerance):
    name = "Berezin transform of dV is 1 n={}".format(n)
    values = []
    for coords in random_points(rng, n, count, rho_range=(0.5, 2.0),
                                re_bound=0.5, zprime_bound=0.5):
        z = SiegelPoint(coords)
        try:
            value, check = volume_berezin(z)
        except ToleranceError as ex:
            return Verdict.inconclusive(name, tolerance, "<=", str(ex))
        values.append(value)
        records.append({"check": "normalization", "n": n,
                        "point": z.to_json(), "value": value,
                        "tail_estimate": check.tail_estimate})
    worst = max(abs(v - 1.0) for v in values) if values else None
    return Verdict.judge(name, worst, tolerance, "<=")


# key integral


def _keylemma_case(case):
    n, s, t, dilation, settings = case
    z = dilate(dilation, SiegelPoint.i(n))
    record = {"n": n, "s": s, "t": t, "dilation": dilation,
              "point": z.to_json()}
    try:
        result = keylemma_check(z, s, t,
                                keylemma_spec(z, s, t, **settings))
    except DivergentParametersError as ex:
        record["rejected"] = str(ex)
        return record
    except ToleranceError as ex:
        record["error"] = str(ex)
        return record
    record.update(result.to_json())
    record["corrected"] = result.corrected
    return record


def run_keylemma(config):
    """The key integral against its closed form over an (n, s, t) grid."""
    start = time.perf_counter()
    settings = {k: v for k, v in config.quadrature.items()
                if k in ("nodes", "angular_nodes", "rel_tol",
                         "max_refinements", "tail")}
    cases = []
    for n in config.param("dims", [config.n]):
        for s in config.param("s_values", [4, 6]):
            for t in config.param("t_values", [0, 1]):
                for dilation in config.param("dilations", [1, 2]):
                    cases.append((n, float(s), float(t), float(dilation),
                                  settings))
    for n, s, t in config.param("reject", [[config.n, 4, -1]]):
        cases.append((int(n), float(s), float(t), 1.0, settings))
    records = _ordered_map(_keylemma_case, cases, config.threads)
    tolerance = config.tolerance("ratio", 0.01)
    verdicts = []
    for record in records:
        n, s, t = record["n"], record["s"], record["t"]
        label = "n={} s={:g} t={:g} dilation={:g}".format(
            n, s, t, record["dilation"])
        divergent = t <= -1 or s - t <= n + 1
        if "rejected" in record or divergent:
            verdicts.append(Verdict.judge(
                "divergent branch rejected " + label,
                1.0 if "rejected" in record else 0.0,
                1.0 if divergent else 0.0, "=="))
        elif "error" in record:
            verdicts.append(Verdict.inconclusive(
                "key integral ratio " + label, [1 - tolerance, 1 + tolerance],
                "in", record["error"]))
        else:
            verdicts.append(Verdict.judge(
                "key integral ratio " + label, record["ratio"],
                [1.0 - tolerance, 1.0 + tolerance], "in"))
    return _report(config, records, verdicts, start)


# equivalence


def equivalence_quantities(mu, lattices, p, spec, r, delta=None,
                           spectrum_=None):
    """Q1 = ‖T_μ‖_p^p, Q2 = Σ_k μ̂_r(a_k)^p per lattice, Q3 = ∫ μ̂_δ^p dλ
    and, for p > n/(n+1), Q4 = ∫ μ̃^p dλ.
    """
    n = mu.n
    if len(mu):
        s = spectrum_ if spectrum_ is not None else spectrum(
            gram_matrix(mu))
        q1 = trace_power(s, p)
    else:
        q1 = 0.0
    q2 = [lattice_lp_sum(mu, lat, p) ** p for lat in lattices]
    q3 = averaging_lp_norm(mu, r, p, spec, delta).integral.value
    q4 = None
    if p > n / (n + 1.0):
        q4 = lp_lambda_norm(berezin_field(mu), p, spec).integral.value
    return {"Q1": q1, "Q2": q2[0], "Q2_alt": q2[1] if len(q2) > 1 else None,
            "Q3": q3, "Q4": q4}


def _ratio(a, b):
    if a is None or b is None:
        return None
    if b == 0:
        return math.inf if a else math.nan
    return a / b


def run_equivalence(config):
    """Compare the four Schatten-class quantities over a random family."""
    start = time.perf_counter()
    n = config.n
    region = config.require_region(default_region(n))
    support = _region_param(config, "support", default_support(n))
    measures = _config_measures(config, support, count=20, max_atoms=8)
    verify = int(config.param("covering_samples", 10**5))
    lattices = [build_lattice(region, config.r, seed=seed,
                              verify_samples=verify)
                for seed in config.seeds[:2]]
    delta = config.param("delta")
    spec = config.quadrature_spec(
        region, threads=1, tail=bool(config.quadrature.get("tail", False)))
    p_grid = config.p_grid or (0.6, 1.0, 1.5, 2.0)

    def instance(case):
        index, mu = case
        rows = []
        try:
            s = spectrum(gram_matrix(mu))
            for p in p_grid:
                q = equivalence_quantities(mu, lattices, p, spec, config.r,
                                           delta, s)
                rows.append(dict(instance=index, atoms=len(mu), p=p, **q))
        except ToleranceError as ex:
            rows = [{"instance": index, "atoms": len(mu), "p": p,
                     "error": str(ex)} for p in p_grid]
        return rows

    records = []
    for rows in _ordered_map(instance, enumerate(measures), config.threads):
        for row in rows:
            if "error" not in row:
                row["Q1/Q2"] = _ratio(row["Q1"], row["Q2"])
                row["Q2/Q3"] = _ratio(row["Q2"], row["Q3"])
                row["Q1/Q4"] = _ratio(row["Q1"], row["Q4"])
                row["Q2/Q2_alt"] = _ratio(row["Q2"], row["Q2_alt"])
            records.append(row)

    band = config.tolerance("band", 100.0)
    min_instances = int(config.tolerance("min_instances", len(measures)))
    lattice_band = config.tolerance("lattice_band", 10.0)
    verdicts = [Verdict.judge(
        "lattice {} size".format(i), len(lat), 1, ">=")
        for i, lat in enumerate(lattices)]
    for p in p_grid:
        rows = [row for row in records
                if row["p"] == p and "error" not in row]
        failed = sum(1 for row in records
                     if row["p"] == p and "error" in row)
        verdicts.append(Verdict.judge(
            "completed instances p={:g} ({} tolerance failures)"
            .format(p, failed), len(rows), min_instances, ">="))
        for key in ("Q1/Q2", "Q2/Q3", "Q1/Q4"):
            values = [row[key] for row in rows if row[key] is not None]
            name = "{} band p={:g}".format(key, p)
            if key == "Q1/Q4" and p <= n / (n + 1.0):
                continue
            if len(values) < 2:
                verdicts.append(Verdict.inconclusive(
                    name, band, "<=", "fewer than two instances"))
            else:
                verdicts.append(Verdict.judge(name, spread(values), band,
                                              "<="))
        cross = [max(v, 1.0 / v) if v and math.isfinite(v) else math.inf
                 for v in (row["Q2/Q2_alt"] for row in rows)
                 if v is not None]
        if cross:
            verdicts.append(Verdict.judge(
                "independent lattices p={:g}".format(p), max(cross),
                lattice_band, "<="))

    # p-homogeneity: doubling every weight multiplies each Q by 2^p
    first = measures[0]
    doubled = first.scaled(2.0)
    worst = 0.0
    try:
        for p in p_grid:
            base = equivalence_quantities(first, lattices, p, spec,
                                          config.r, delta)
            scaled = equivalence_quantities(doubled, lattices, p, spec,
                                            config.r, delta)
            for key, value in base.items():
                if value:
                    worst = max(worst, abs(scaled[key]
                                           / (2.0 ** p * value) - 1.0))
        verdicts.append(Verdict.judge("homogeneity under doubling", worst,
                                      1e-9, "<="))
    except ToleranceError as ex:
        verdicts.append(Verdict.inconclusive(
            "homogeneity under doubling", 1e-9, "<=", str(ex)))

    empty = AtomicMeasure(n=n)
    largest = 0.0
    for p in p_grid:
        q = equivalence_quantities(empty, lattices, p, spec, config.r, delta)
        largest = max(largest, max(abs(v) for v in q.values()
                                   if v is not None))
    verdicts.append(Verdict.judge("empty measure quantities", largest, 0.0,
                                  "<="))
    records.append({"lattice_sizes": [len(lat) for lat in lattices],
                    "r": config.r, "delta": delta})
    return _report(config, records, verdicts, start)


# cutoff


def _slope(x, y):
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr)


def _cutoff_series(case):
    p, n, region, eps, settings = case
    field = berezin_field(point_mass(SiegelPoint.i(n)))

    def integrand(coords):
        return field.evaluate(coords) ** p * invariant_density_array(coords)

    def over(low, high):
        slab = Region(n, low, high, region.zprime_radius, region.re_zn_bound)
        return integrate(integrand, settings(slab)).value

    record = {"p": p, "n": n}
    try:
        base = over(eps[0], region.rho_max)
        increments = [over(eps[k], eps[k - 1]) for k in range(1, len(eps))]
    except ToleranceError as ex:
        record["error"] = str(ex)
        return record
    values = [base]
    for step in increments:
        values.append(values[-1] + step)
    record.update({"eps": list(eps), "I": values,
                   "increments": increments})
    return record


def run_cutoff(config):
    """Sweep rho_min for μ = δ_𝐢 and fit how ∫ μ̃^p dλ grows."""
    start = time.perf_counter()
    n = config.n
    critical = n / (n + 1.0)
    region = config.require_region(Region(n, 0.25, 16.0, 4.0, 256.0))
    exponents = config.param("eps_exponents", list(range(2, 13)))
    eps = [2.0 ** -k for k in exponents]
    fit_points = int(config.param("fit_points", 6))
    if n == 1:
        default_grid = (0.3, 0.4, 0.5, 0.6, 0.75)
    else:
        default_grid = (0.5, critical - 0.1, critical + 0.1)
    p_grid = config.p_grid or default_grid

    def settings(slab):
        return config.quadrature_spec(slab, threads=1, tail=False)

    cases = [(p, n, region, eps, settings) for p in p_grid]
    records = _ordered_map(_cutoff_series, cases, config.threads)
    i_point = SiegelPoint.i(n)
    s = spectrum(gram_matrix(point_mass(i_point)))
    diagonal = invariant_density(i_point)
    slope_rel = config.tolerance("slope", 0.1)
    log_slope = config.tolerance("log_slope", 0.1)
    verdicts = []
    for record in records:
        p = record["p"]
        norm = schatten_norm(s, p)
        record["schatten_norm"] = norm
        verdicts.append(Verdict.judge(
            "rank one norm p={:g}".format(p),
            abs(norm / diagonal - 1.0), 1e-12, "<="))
        name = "p={:g}".format(p)
        if "error" in record:
            verdicts.append(Verdict.inconclusive(
                "cutoff " + name, None, "", record["error"]))
            continue
        increments = np.array(record["increments"])
        lows = np.array(eps[1:])
        usable = np.isfinite(increments) & (increments > 0)
        x = np.log(1.0 / lows[usable])[-fit_points:]
        y = np.log(increments[usable])[-fit_points:]
        if x.size < 2:
            verdicts.append(Verdict.inconclusive(
                "cutoff " + name, None, "", "degenerate fit"))
            continue
        slope, stderr = _slope(x, y)
        raw_x = np.log(1.0 / np.array(eps))[-fit_points:]
        raw_slope, _ = _slope(raw_x, np.log(np.array(record["I"]))
                              [-fit_points:])
        expected = n - p * (n + 1)
        record.update({"slope": slope, "slope_stderr": stderr,
                       "raw_log_slope": raw_slope, "expected": expected})
        if p < critical - 1e-9:
            verdicts.append(Verdict.judge(
                "divergence slope " + name,
                abs(slope - expected) / abs(expected), slope_rel, "<="))
        elif p <= critical + 1e-9:
            verdicts.append(Verdict.judge(
                "log growth slope " + name, abs(slope), log_slope, "<="))
        else:
            values = record["I"]
            record["raw_gap"] = abs(values[-1] - values[-2]) / abs(values[-1])
            verdicts.append(Verdict.judge(
                "convergence slope " + name,
                abs(slope - expected) / abs(expected), slope_rel, "<="))
            q = 2.0 ** slope
            if q < 1.0:
                # geometric remainder implied by the fitted increments
                steps = record["increments"]
                record.update({
                    "ratio": q,
                    "corrected": values[-1] + steps[-1] * q / (1.0 - q)})
    return _report(config, records, verdicts, start)


# trace


def _trace_case(case):
    index, mu, make_spec = case
    record = {"instance": index, "atoms": len(mu)}
    try:
        check = trace_identity_check(mu, make_spec(trace_region(mu)))
    except ToleranceError as ex:
        record["error"] = str(ex)
        return record
    record.update(check.to_json())
    return record


def run_trace(config):
    """Σ λ_k against ∫ μ̃ dλ for δ_𝐢 and a random family."""
    start = time.perf_counter()
    n = config.n
    support = _region_param(config, "support", default_support(n))
    measures = [point_mass(SiegelPoint.i(n))]
    measures += _config_measures(config, support, count=10, max_atoms=50)

    def make_spec(region):
        return config.quadrature_spec(region, threads=1)

    cases = [(i, mu, make_spec) for i, mu in enumerate(measures)]
    records = _ordered_map(_trace_case, cases, config.threads)
    tolerance = config.tolerance("trace", 0.02)
    verdicts = []
    for record in records:
        name = "trace instance {}".format(record["instance"])
        if "error" in record:
            verdicts.append(Verdict.inconclusive(name, tolerance, "<=",
                                                 record["error"]))
        else:
            verdicts.append(Verdict.judge(name, record["relative_gap"],
                                          tolerance, "<="))

    trials = int(config.param("power_trials", 10**4))
    if trials > 0:
        violations = _power_trials(measures, trials,
                                   np.random.default_rng(config.seed + 2))
        records.append({"check": "power_inequality", "trials": trials,
                        "violations": violations})
        verdicts.append(Verdict.judge("power inequality violations",
                                      violations, 0, "<="))
    return _report(config, records, verdicts, start)


def _power_trials(measures, trials, rng):
    """Count failures of ⟨G^p x, x⟩ >= ⟨G x, x⟩^p over random unit x and
    p in [1, 3], cycling through the Gram matrices of measures.
    """
    grams = [gram_matrix(mu) for mu in measures if len(mu)]
    spectra = [spectrum(g) for g in grams]
    violations = 0
    for k in range(trials):
        g = grams[k % len(grams)]
        x = rng.normal(size=g.size) + 1j * rng.normal(size=g.size)
        x /= np.linalg.norm(x)
        p = float(rng.uniform(1.0, 3.0))
        if not power_inequality_check(g, p, x, spectra[k % len(grams)]):
            violations += 1
    return violations


# domination


def run_domination(config):
    """μ̃(a) against the Berezin transform of μ̂_r dV, and μ̂_r against
    C(r, n) μ̃ pointwise.
    """
    start = time.perf_counter()
    n = config.n
    r = config.r
    region = config.require_region(default_region(n))
    support = _region_param(config, "support", default_support(n))
    measures = _config_measures(config, support, count=5, max_atoms=10)
    rng = np.random.default_rng(config.seed + 1)
    count = int(config.param("points", 100))
    points = region.sample(rng, count)

    def ratios(case):
        index, mu = case
        return [domination_ratio(mu, a, r) for a in points]

    per_measure = _ordered_map(ratios, enumerate(measures), config.threads)
    records = []
    values = []
    for index, row in enumerate(per_measure):
        values.extend(row)
        records.append({"instance": index, "atoms": len(measures[index]),
                        "min_ratio": min(row), "max_ratio": max(row)})
    records.append({"fitted_constant": max(values), "r": r})
    verdicts = [Verdict.judge("domination ratio spread", spread(values),
                              config.tolerance("spread", 10.0), "<=")]

    constant = domination_constant(r, n)
    samples = int(config.param("pointwise_samples", 1000))
    picks = rng.integers(0, len(measures), size=samples)
    z = region.sample(rng, samples)
    violations = 0
    worst = 0.0
    for k, mu in enumerate(measures):
        chosen = z[picks == k]
        if not chosen.shape[0]:
            continue
        averaged = averaging_field(mu, r).evaluate(chosen)
        berezin = berezin_field(mu).evaluate(chosen)
        bound = constant * berezin
        violations += int(np.sum(averaged > bound * (1 + INEQUALITY_SLACK)))
        worst = max(worst, float(np.max(averaged / bound)))
    records.append({"pointwise_constant": constant,
                    "pointwise_worst_ratio": worst,
                    "pointwise_samples": samples})
    verdicts.append(Verdict.judge("pointwise domination violations",
                                  violations, 0, "<="))
    return _report(config, records, verdicts, start)


RUNNERS = {
    "geometry": run_geometry_suite,
    "keylemma": run_keylemma,
    "equivalence": run_equivalence,
    "cutoff": run_cutoff,
    "trace": run_trace,
    "domination": run_domination,
}


def run_scenario(config):
    logger.info("Running {} (n={}, seed={})"
                .format(config.scenario, config.n, config.seed))
    return RUNNERS[config.scenario](config)
