"""Command-line toolkit: every analysis as a deterministic batch command.

Commands: threshold, mdp, roc, validate, heatmap, optimize, compare, delay.
Outputs are JSON or CSV (header row, '.' decimal), written atomically to
--out or printed to stdout; failures print an error JSON to stderr and
exit 2 (configuration), 3 (numeric failure), or 4 (infeasible).  For fixed
(scenario, seed, samples) the output bytes do not depend on --threads.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .authenticator import make_authenticator, pfa_of_threshold
from .delay_bounds import (ArrivalModel, ServiceModel, UnstableQueueError,
                           delay_violation_bound, service_outage)
from .geometry import Scenario, channel_statistics, eve_statistics, wavelength
from .monte_carlo import best_case_acceptance_event, estimate_probability
from .numerics import NumericsError
from .position_attack import (PositionSearchError, count_small_scale_optima,
                              grid_axes, truncated_search)
from .power_attack import (NO_ATTACK, PowerStrategy, SaddlepointError,
                           mdp_fixed_strategy, mdp_optimal_pma,
                           statistical_power_strategy)
from .scenario_io import ScenarioError, load_scenario

_LOG10_FLOOR = -15.0


def _fmt(x: float) -> str:
    return repr(float(x))


def _log10_clamped(p: float) -> float:
    if not p > 10.0 ** _LOG10_FLOOR:
        return _LOG10_FLOOR
    return max(math.log10(p), _LOG10_FLOOR)


def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario)
    if getattr(args, "pfa", None) is not None:
        from dataclasses import replace
        sc = replace(sc, false_alarm_target=args.pfa)
    return sc


def _cmd_threshold(args):
    sc = _scenario(args)
    auth = make_authenticator(sc)
    payload = json.dumps({
        "dof": auth.total_dof,
        "false_alarm_target": sc.false_alarm_target,
        "threshold": auth.threshold,
        "false_alarm_check": pfa_of_threshold(auth.threshold, auth.total_dof),
        "mahalanobis_energy": auth.mahalanobis_energy,
    }, sort_keys=True, indent=2) + "\n"
    return payload, None


def _parse_strategy(spec: str) -> PowerStrategy:
    body = spec.split(":", 1)[1]
    try:
        eta_s, psi_s = body.split(",")
        return PowerStrategy(float(eta_s), float(psi_s))
    except Exception:
        raise ValueError("fixed method expects fixed:ETA,PSI") from None


def _cmd_mdp(args):
    sc = _scenario(args)
    auth = make_authenticator(sc)
    eve = eve_statistics(sc)
    method = args.method or "saddlepoint"
    out = {"method": method, "false_alarm_target": sc.false_alarm_target,
           "threshold": auth.threshold}
    if method == "saddlepoint":
        out["p_md"] = mdp_optimal_pma(auth, eve, method="saddlepoint")
    elif method == "closedform":
        out["p_md"] = mdp_optimal_pma(auth, eve, method="closedform")
    elif method == "montecarlo":
        est = estimate_probability(best_case_acceptance_event(auth), eve,
                                   args.samples, seed=args.seed, threads=args.threads)
        out.update(p_md=est.value, std_error=est.std_error, samples=est.samples)
    elif method == "statistical":
        strat = statistical_power_strategy(auth, eve)
        out["strategy"] = {"eta": strat.amplitude, "psi": strat.phase}
        out["p_md"] = mdp_fixed_strategy(auth, eve, strat)
    elif method == "none":
        out["strategy"] = {"eta": 1.0, "psi": 0.0}
        out["p_md"] = mdp_fixed_strategy(auth, eve, NO_ATTACK)
    elif method.startswith("fixed:"):
        strat = _parse_strategy(method)
        out["strategy"] = {"eta": strat.amplitude, "psi": strat.phase}
        out["p_md"] = mdp_fixed_strategy(auth, eve, strat)
    else:
        raise ValueError(f"unknown mdp method {method!r}")
    return json.dumps(out, sort_keys=True, indent=2) + "\n", None


def _pfa_sweep(args) -> np.ndarray:
    return np.logspace(math.log10(args.pfa_min), math.log10(args.pfa_max), args.points)


def _cmd_roc(args):
    sc = _scenario(args)
    eve = eve_statistics(sc)
    lines = ["p_fa,p_md_opt,p_md_none"]
    for pfa in _pfa_sweep(args):
        auth = make_authenticator(sc, float(pfa))
        p_opt = mdp_optimal_pma(auth, eve)
        p_none = mdp_fixed_strategy(auth, eve, NO_ATTACK)
        lines.append(f"{_fmt(pfa)},{_fmt(p_opt)},{_fmt(p_none)}")
    return "\n".join(lines) + "\n", None


def _cmd_validate(args):
    sc = _scenario(args)
    eve = eve_statistics(sc)
    lines = ["param,saddlepoint,montecarlo,std_error"]
    for pfa in _pfa_sweep(args):
        auth = make_authenticator(sc, float(pfa))
        p_sp = mdp_optimal_pma(auth, eve, method="saddlepoint")
        est = estimate_probability(best_case_acceptance_event(auth), eve,
                                   args.samples, seed=args.seed, threads=args.threads)
        lines.append(f"{_fmt(pfa)},{_fmt(p_sp)},{_fmt(est.value)},{_fmt(est.std_error)}")
    return "\n".join(lines) + "\n", None


def _pmd_cells(sc: Scenario, resolution: float) -> tuple[np.ndarray, np.ndarray, list[float]]:
    auth = make_authenticator(sc)
    xs, ys = grid_axes(sc, resolution)
    from dataclasses import replace
    vals = []
    for y in ys:
        for x in xs:
            eve = replace(sc.eve, position=(float(x), float(y)))
            vals.append(mdp_optimal_pma(auth, channel_statistics(sc, eve)))
    return xs, ys, vals


def _cmd_heatmap(args):
    sc = _scenario(args)
    res = args.grid or sc.search.grid_resolution or wavelength(sc.carrier_frequency) / 10.0
    xs, ys, vals = _pmd_cells(sc, res)
    lines = ["x_m,y_m,log10_pmd"]
    k = 0
    for y in ys:
        for x in xs:
            lines.append(f"{_fmt(x)},{_fmt(y)},{_fmt(_log10_clamped(vals[k]))}")
            k += 1
    return "\n".join(lines) + "\n", None


def _cmd_optimize(args):
    sc = _scenario(args)
    if args.grid is not None:
        from dataclasses import replace
        sc = replace(sc, search=replace(sc.search, grid_resolution=args.grid))
    result = truncated_search(sc)
    payload = json.dumps({
        "p_md_opt": result.p_md_opt,
        "position": list(result.best.position),
        "n_grid": result.n_grid,
        "n_allowed": result.n_allowed,
        "n_lobe_points": result.n_lobe_points,
        "n_evaluated": result.n_evaluated,
        "candidates": [
            {"position": list(c.position), "f_obj": c.f_obj,
             "f_small_scale": c.f_small_scale, "p_md": c.p_md, "label": c.label}
            for c in result.candidates[:50]],
    }, sort_keys=True, indent=2) + "\n"
    summary = f"p_MD^(Opt. Position) = {_fmt(result.p_md_opt)}"
    return payload, summary


def _cmd_compare(args):
    header = ("scenario,n_rrh,n_rx,total_antennas,pmd_opt_position,"
              "coverage_pct,search_points,total_small_scale_optima")
    lines = [header]
    for path in args.scenario:
        sc = load_scenario(path)
        if args.pfa is not None:
            from dataclasses import replace
            sc = replace(sc, false_alarm_target=args.pfa)
        result = truncated_search(sc)
        total = count_small_scale_optima(sc)
        res = args.grid or 2.0
        _, _, vals = _pmd_cells(sc, res)
        covered = sum(1 for v in vals if v < args.coverage_pmd)
        coverage = 100.0 * covered / len(vals)
        n_rx = "/".join(str(n) for n in sorted({r.num_antennas for r in sc.rrhs}))
        name = Path(path).stem
        lines.append(
            f"{name},{len(sc.rrhs)},{n_rx},{sum(r.num_antennas for r in sc.rrhs)},"
            f"{_fmt(result.p_md_opt)},{_fmt(coverage)},"
            f"{result.n_evaluated},{total}")
    return "\n".join(lines) + "\n", None


def _cmd_delay(args):
    sc = _scenario(args)
    auth = make_authenticator(sc)
    outage = service_outage(auth, args.rate, args.noise, mode=args.outage_mode,
                            samples=args.samples, seed=args.seed, threads=args.threads)
    arrival = ArrivalModel(args.arrival)
    service = ServiceModel(args.rate, args.resources, outage.probability)
    lines = ["w,bound,s_opt"]
    for w in range(1, args.w_max + 1):
        bound = delay_violation_bound(arrival, service, w)
        if not bound.stable:
            raise UnstableQueueError(
                "no transform parameter stabilizes the queue "
                f"(arrival {args.arrival} bits/frame vs service "
                f"{args.rate * args.resources} bits at outage {_fmt(outage.probability)})")
        lines.append(f"{w},{_fmt(bound.probability)},{_fmt(bound.s_opt)}")
    return "\n".join(lines) + "\n", None


def _add_common(p: argparse.ArgumentParser, scenario_multi: bool = False):
    if scenario_multi:
        p.add_argument("--scenario", action="append", required=True,
                       help="scenario JSON (repeatable)")
    else:
        p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", help="output file (atomic write); default stdout")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--samples", type=int, default=200_000,
                   help="Monte-Carlo samples (default 200000)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--pfa", type=float, default=None,
                   help="override the scenario's false-alarm target")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distpla",
        description="Worst-case detection guarantees for distributed "
                    "SIMO physical-layer authentication")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="acceptance threshold for the false-alarm target")
    _add_common(p)
    p.set_defaults(handler=_cmd_threshold)

    p = sub.add_parser("mdp", help="missed-detection probability at the scenario's attacker position")
    _add_common(p)
    p.add_argument("--method", default="saddlepoint",
                   help="saddlepoint | closedform | montecarlo | fixed:ETA,PSI | statistical | none")
    p.set_defaults(handler=_cmd_mdp)

    for name, handler, hlp in (("roc", _cmd_roc, "miss probability versus false-alarm sweep"),
                               ("validate", _cmd_validate, "saddle point versus Monte-Carlo sweep")):
        p = sub.add_parser(name, help=hlp)
        _add_common(p)
        p.add_argument("--pfa-min", type=float, default=1e-4)
        p.add_argument("--pfa-max", type=float, default=1e-1)
        p.add_argument("--points", type=int, default=13)
        p.set_defaults(handler=handler)

    p = sub.add_parser("heatmap", help="log10 miss probability over the region grid")
    _add_common(p)
    p.add_argument("--grid", type=float, default=None, help="cell size in meters")
    p.set_defaults(handler=_cmd_heatmap)

    p = sub.add_parser("optimize", help="worst-case attacker position search")
    _add_common(p)
    p.add_argument("--grid", type=float, default=None, help="search grid cell size in meters")
    p.set_defaults(handler=_cmd_optimize)

    p = sub.add_parser("compare", help="deployment comparison table")
    _add_common(p, scenario_multi=True)
    p.add_argument("--grid", type=float, default=None,
                   help="coverage grid cell size in meters (default 2.0)")
    p.add_argument("--coverage-pmd", type=float, default=1e-4,
                   help="coverage counts cells with p_md below this (default 1e-4)")
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("delay", help="delay violation bounds over the authenticated link")
    _add_common(p)
    p.add_argument("--arrival", type=float, required=True, help="arrival bits per frame")
    p.add_argument("--rate", type=float, required=True, help="bits per resource unit")
    p.add_argument("--resources", type=float, required=True, help="scheduled resources per frame")
    p.add_argument("--noise", type=float, default=1.0, help="noise density N0 (default 1)")
    p.add_argument("--w-max", type=int, default=20, help="largest delay bound to tabulate")
    p.add_argument("--outage-mode", default="centralized_bound",
                   choices=["centralized_bound", "centralized_exact_if_valid", "local_bound"])
    p.set_defaults(handler=_cmd_delay)

    return parser


def _emit_error(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def _write_atomic(path: str, text: str) -> None:
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    try:
        tmp.write_text(text)
        os.replace(tmp, target)
    finally:
        if tmp.exists():
            tmp.unlink(missing_ok=True)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        payload, summary = args.handler(args)
    except (UnstableQueueError, PositionSearchError) as exc:
        return _emit_error(exc, 4)
    except (SaddlepointError, NumericsError, np.linalg.LinAlgError,
            FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        return _emit_error(exc, 3)
    except (ScenarioError, ValueError, KeyError, TypeError, OSError) as exc:
        return _emit_error(exc, 2)
    if args.out:
        try:
            _write_atomic(args.out, payload)
        except OSError as exc:
            return _emit_error(exc, 2)
    else:
        sys.stdout.write(payload)
    if summary is not None:
        print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
