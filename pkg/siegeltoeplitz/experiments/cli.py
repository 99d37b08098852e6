# -*- coding: utf-8 -*-
'''
siegel
------

Run verification scenarios and single computations on the Siegel upper
half-space.

Usage:
siegel <scenario> [--config cfg.json] [--out report.json] [--seed S]
       [--threads T] [--csv table.csv] [--no-runtime]
siegel lattice build --region region.json --r 0.5 [--out lattice.json]
siegel lattice verify lattice.json [--samples N]
siegel berezin --measure m.json [--point '[[0, 1]]']
siegel averaging --measure m.json --r 0.5 [--point '[[0, 1]]']
siegel lp-norm --measure m.json --p 2 [--field berezin|averaging]
siegel keylemma --n 1 --s 4 --t 0 [--point '[[0, 2]]']
siegel schatten --measure m.json --p 1 --p 2 [--report out.json]

Scenarios: geometry, keylemma, equivalence, cutoff, trace, domination.
The exit code is 0 only when every verdict passes.
'''
from __future__ import print_function
from __future__ import division

import argparse
import json
import logging
import sys

from hierosoft import (
    echo0,
    echo1,
    set_verbosity,
)

from siegeltoeplitz import (
    ConfigError,
    DivergentParametersError,
    DomainError,
    EigensolveError,
    LatticeConstructionError,
    MetricConsistencyError,
    ToleranceError,
)
from siegeltoeplitz.experiments import (
    SCENARIOS,
    ExperimentConfig,
    json_safe,
    load_config,
)
from siegeltoeplitz.experiments.scenarios import run_scenario
from siegeltoeplitz.geometry import (
    SiegelPoint,
    ball_volume,
    point_from_json,
)
from siegeltoeplitz.lattice import (
    Lattice,
    Region,
    build_lattice,
    lattice_min_separation,
    verify_covering,
)
from siegeltoeplitz.measures import (
    AtomicMeasure,
    load_measure,
)
from siegeltoeplitz.quadrature import (
    QuadratureSpec,
    ball_integral,
)
from siegeltoeplitz.schatten import (
    condition_diagnostics,
    gram_matrix,
    schatten_norm,
    spectrum,
    trace_region,
)
from siegeltoeplitz.transforms import (
    averaging_field,
    averaging_lp_norm,
    berezin_field,
    berezin_result,
    keylemma_check,
    lp_lambda_norm,
)

logger = logging.getLogger(__name__)

ERROR_FAILED = 1
ERROR_USAGE = 2
ERROR_DOMAIN = 3
ERROR_TOLERANCE = 4
ERROR_CONFIG = 5
ERROR_DIVERGENT = 6
ERROR_LATTICE = 7
ERROR_EIGENSOLVE = 8

# Checked in order, so subclasses come before their bases.
ERROR_CODES = (
    (DivergentParametersError, ERROR_DIVERGENT),
    (ConfigError, ERROR_CONFIG),
    (ToleranceError, ERROR_TOLERANCE),
    (LatticeConstructionError, ERROR_LATTICE),
    (EigensolveError, ERROR_EIGENSOLVE),
    (MetricConsistencyError, ERROR_DOMAIN),
    (DomainError, ERROR_DOMAIN),
)


def usage():
    echo0()
    echo0(__doc__)
    echo0()


def _emit(record, path=None):
    text = json.dumps(json_safe(record), indent=2)
    if path:
        with open(path, 'w') as stream:
            stream.write(text)
            stream.write("\n")
        echo0("Saved {}".format(repr(path)))
    else:
        print(text)


def _record(inputs, value, error_estimate=None, tail_estimate=None,
            **extra):
    record = {
        "inputs": inputs,
        "value": value,
        "error_estimate": error_estimate,
        "tail_estimate": tail_estimate,
    }
    record.update(extra)
    return record


def _point(text, n):
    if text is None:
        return SiegelPoint.i(n)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as ex:
        raise ConfigError("--point is not JSON: {}".format(ex))
    return point_from_json(data)


def _region(args, n):
    if args.region:
        with open(args.region, 'r') as stream:
            data = json.load(stream)
        data.setdefault("n", n)
        return Region.from_json(data)
    return None


def _measure(path):
    try:
        return load_measure(path)
    except (OSError, json.JSONDecodeError) as ex:
        raise ConfigError("Cannot read measure {}: {}".format(path, ex))


def run_scenario_command(args):
    if args.config:
        config = load_config(args.config)
        if config.scenario != args.command:
            raise ConfigError("{} holds scenario {} but {} was requested"
                              .format(args.config, config.scenario,
                                      args.command))
    else:
        config = ExperimentConfig.from_dict({"scenario": args.command})
    if args.seed is not None:
        config.seed = args.seed
    if args.threads is not None:
        config.threads = args.threads
    out = args.out or config.out
    csv_path = args.csv or config.csv
    echo1("Running {} with seed {} on {} thread(s)"
          .format(config.scenario, config.seed, config.threads))
    report = run_scenario(config)
    counts = report.counts()
    echo0("{}: {pass} passed, {fail} failed, {inconclusive} inconclusive"
          " in {:.1f} s".format(config.scenario, report.runtime_seconds,
                                **counts))
    for verdict in report.verdicts:
        if not verdict.passed:
            echo0("  {}: {} ({} {} {}) {}".format(
                verdict.status, verdict.name, verdict.measured,
                verdict.comparison, verdict.threshold, verdict.note))
    include_runtime = not args.no_runtime
    if out:
        report.save(out, include_runtime=include_runtime)
        echo0("Saved {}".format(repr(out)))
    else:
        print(report.dumps(include_runtime))
    if csv_path:
        report.save_csv(csv_path)
        echo0("Saved {}".format(repr(csv_path)))
    return 0 if report.passed else ERROR_FAILED


def run_lattice_command(args):
    if args.action == "build":
        region = _region(args, args.n)
        if region is None:
            region = Region(args.n, args.rho_min, args.rho_max,
                            args.zprime_radius, args.re_zn_bound)
        lat = build_lattice(region, args.r, seed=args.seed,
                            verify_samples=args.samples)
        echo0("Built {} points (r={})".format(len(lat), lat.r))
        if args.out:
            lat.save(args.out)
            echo0("Saved {}".format(repr(args.out)))
        else:
            print(json.dumps(lat.to_json(), indent=2))
        return 0
    if not args.lattice:
        usage()
        echo0("Error: lattice verify needs a lattice file.")
        return ERROR_USAGE
    lat = Lattice.load(args.lattice)
    report = verify_covering(lat, samples=args.samples, seed=args.seed,
                             threads=args.threads)
    separation = lattice_min_separation(lat)
    separated = separation >= lat.r / 2.0
    record = {"inputs": {"lattice": args.lattice, "samples": args.samples,
                         "seed": args.seed},
              "points": len(lat), "min_separation": separation,
              "separated": separated, "covering": report.to_json()}
    _emit(record, args.out)
    return 0 if (report.covered and separated) else ERROR_FAILED


def run_berezin_command(args):
    mu = _measure(args.measure)
    z = _point(args.point, mu.n)
    result = berezin_result(mu, z)
    _emit(_record({"measure": args.measure, "point": z.to_json()},
                  result.value, result.error_estimate, result.tail_estimate),
          args.out)
    return 0


def run_averaging_command(args):
    mu = _measure(args.measure)
    z = _point(args.point, mu.n)
    volume = ball_volume(z, args.r)
    inputs = {"measure": args.measure, "point": z.to_json(), "r": args.r}
    if isinstance(mu, AtomicMeasure):
        value = float(averaging_field(mu, args.r).evaluate(
            z.coords[None, :])[0])
        error = 0.0
    else:
        result = ball_integral(mu.evaluate, z, args.r)
        value = result.value / volume
        error = result.error_estimate / volume
    _emit(_record(inputs, value, error, None, ball_volume=volume), args.out)
    return 0


def run_lp_norm_command(args):
    mu = _measure(args.measure)
    region = _region(args, mu.n)
    if region is None:
        if not isinstance(mu, AtomicMeasure):
            region = mu.support
        elif len(mu):
            region = trace_region(mu)
        else:
            raise ConfigError("An empty measure needs --region")
    spec = QuadratureSpec(region=region, rel_tol=args.rel_tol,
                          threads=args.threads)
    if args.field == "berezin":
        estimate = lp_lambda_norm(berezin_field(mu), args.p, spec)
    else:
        estimate = averaging_lp_norm(mu, args.r, args.p, spec)
    inputs = {"measure": args.measure, "p": args.p, "field": args.field,
              "r": args.r if args.field == "averaging" else None,
              "region": region.to_json()}
    _emit(_record(inputs, estimate.value, estimate.error_estimate,
                  estimate.tail_estimate,
                  integral=estimate.integral.to_json()), args.out)
    return 0


def run_keylemma_command(args):
    if args.config:
        return run_scenario_command(args)
    z = _point(args.point, args.n)
    result = keylemma_check(z, args.s, args.t)
    record = _record({"n": z.n, "s": args.s, "t": args.t,
                      "point": z.to_json()},
                     result.numeric, result.error_estimate,
                     result.tail_estimate, closed_form=result.closed_form,
                     ratio=result.ratio,
                     region=result.region.to_json())
    _emit(record, args.out)
    return 0 if result.agrees(args.rel_tol) else ERROR_FAILED


def run_schatten_command(args):
    mu = _measure(args.measure)
    if not isinstance(mu, AtomicMeasure):
        raise ConfigError("schatten needs an atomic measure")
    ps = args.p or [1.0, 2.0]
    g = gram_matrix(mu)
    s = spectrum(g)
    norms = {"{:g}".format(p): schatten_norm(s, p) for p in ps}
    report = {
        "inputs": {"measure": args.measure, "p": ps},
        "eigenvalues": s.eigenvalues,
        "norms": norms,
        "trace": s.trace(),
        "diagnostics": condition_diagnostics(g, s),
    }
    for key, value in norms.items():
        echo1("||T||_{} = {!r}".format(key, value))
    _emit(report, args.report)
    return 0


def _scenario_flags(parser, config_required=False):
    parser.add_argument("--config", required=config_required,
                        help="Experiment config JSON")
    parser.add_argument("--out", help="Report JSON path (default: stdout)")
    parser.add_argument("--seed", type=int, help="Override the seed")
    parser.add_argument("--threads", type=int, help="Worker threads")
    parser.add_argument("--csv", help="Also write the ratio table")
    parser.add_argument("--no-runtime", action="store_true",
                        help="Omit runtime_seconds from the report")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="siegel",
        description="Toeplitz operator experiments on the Siegel upper"
                    " half-space.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="More output (repeat for debug)")
    commands = parser.add_subparsers(dest="command")
    for name in SCENARIOS:
        if name == "keylemma":
            continue
        _scenario_flags(commands.add_parser(
            name, help="Run the {} scenario".format(name)))

    lattice = commands.add_parser("lattice", help="Build or verify a"
                                  " lattice")
    lattice.add_argument("action", choices=("build", "verify"))
    lattice.add_argument("lattice", nargs="?", help="Lattice JSON (verify)")
    lattice.add_argument("--region", help="Region JSON")
    lattice.add_argument("--n", type=int, default=1)
    lattice.add_argument("--rho-min", type=float, default=0.25)
    lattice.add_argument("--rho-max", type=float, default=4.0)
    lattice.add_argument("--zprime-radius", type=float, default=1.0)
    lattice.add_argument("--re-zn-bound", type=float, default=4.0)
    lattice.add_argument("--r", type=float, default=0.5)
    lattice.add_argument("--seed", type=int, default=0)
    lattice.add_argument("--samples", type=int, default=10**5)
    lattice.add_argument("--threads", type=int, default=1)
    lattice.add_argument("--out")

    berezin = commands.add_parser("berezin", help="Berezin transform")
    berezin.add_argument("--measure", required=True)
    berezin.add_argument("--point", help="JSON [[re, im], ...]")
    berezin.add_argument("--out")

    averaging = commands.add_parser("averaging", help="Averaging function")
    averaging.add_argument("--measure", required=True)
    averaging.add_argument("--point", help="JSON [[re, im], ...]")
    averaging.add_argument("--r", type=float, default=0.5)
    averaging.add_argument("--out")

    lp_norm = commands.add_parser("lp-norm", help="L^p(dλ) norm of a"
                                  " transform")
    lp_norm.add_argument("--measure", required=True)
    lp_norm.add_argument("--p", type=float, required=True)
    lp_norm.add_argument("--field", choices=("berezin", "averaging"),
                         default="berezin")
    lp_norm.add_argument("--r", type=float, default=0.5)
    lp_norm.add_argument("--region", help="Region JSON")
    lp_norm.add_argument("--rel-tol", type=float, default=1e-2)
    lp_norm.add_argument("--threads", type=int, default=1)
    lp_norm.add_argument("--out")

    keylemma = commands.add_parser(
        "keylemma", help="Key integral check, or the keylemma scenario"
                         " with --config")
    _scenario_flags(keylemma)
    keylemma.add_argument("--n", type=int, default=1)
    keylemma.add_argument("--s", type=float, default=4.0)
    keylemma.add_argument("--t", type=float, default=0.0)
    keylemma.add_argument("--point", help="JSON [[re, im], ...]")
    keylemma.add_argument("--rel-tol", type=float, default=1e-2)

    schatten = commands.add_parser("schatten", help="Exact Schatten norms")
    schatten.add_argument("--measure", required=True)
    schatten.add_argument("--p", type=float, action="append")
    schatten.add_argument("--report")
    return parser


COMMANDS = {
    "lattice": run_lattice_command,
    "berezin": run_berezin_command,
    "averaging": run_averaging_command,
    "lp-norm": run_lp_norm_command,
    "keylemma": run_keylemma_command,
    "schatten": run_schatten_command,
}


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    if not args.command:
        usage()
        return ERROR_USAGE
    level = logging.WARNING
    if args.verbose > 1:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    logging.basicConfig(level=level)
    set_verbosity(min(args.verbose, 2))
    command = COMMANDS.get(args.command, run_scenario_command)
    try:
        return command(args)
    except tuple(cls for cls, _ in ERROR_CODES) as ex:
        for cls, code in ERROR_CODES:
            if isinstance(ex, cls):
                echo0("Error: {}".format(ex))
                return code
        raise
    except (OSError, json.JSONDecodeError) as ex:
        echo0("Error: {}".format(ex))
        return ERROR_USAGE


if __name__ == "__main__":
    sys.exit(main())
