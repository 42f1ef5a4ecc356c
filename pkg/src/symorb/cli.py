"""Command-line front end.

Every subcommand resolves its configuration from defaults, an optional
``key = value`` config file, and command-line flags (flags win), echoes the
resolved configuration, and writes machine-readable output (JSON records,
CSV grids).  Exit codes: 0 success, 1 numerical failure, 2 invalid
configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import acceptance, homology
from . import cover as cover_mod
from .dynamics import Problem, ProblemKind, export_hill_region_csv, hill_region, lagrange_points
from .errors import InvalidConfigError, SymorbError
from .flow import IntegratorConfig
from .indices import mean_indices_from_path, orbit_rs_index_from_path, rfh_index, transition_path
from .orbits import find_symmetric_orbits, orbit_record, solve_orbit_from_start
from .regularize import export_circle_csv, fixed_locus_circles, make_surface

log = logging.getLogger("symorb")


def _problem_from(args) -> Problem:
    from .errors import DomainError

    kind = args.kind
    try:
        if kind == "pcrtbp":
            return Problem.pcrtbp(args.mu)
        if kind == "rotating-kepler":
            return Problem.rotating_kepler()
        if kind == "hill":
            return Problem.hill_lunar()
    except DomainError as exc:
        raise InvalidConfigError(str(exc)) from exc
    raise InvalidConfigError(f"unknown problem kind {kind!r}")


def _surface_from(args):
    from .errors import DomainError

    problem = _problem_from(args)
    primary = getattr(args, "primary", None)
    if problem.kind is ProblemKind.PCRTBP and primary is None:
        raise InvalidConfigError("--primary earth|moon required for the PCRTBP")
    try:
        return make_surface(problem, args.c, primary)
    except DomainError as exc:
        raise InvalidConfigError(str(exc)) from exc


def _emit(payload, args):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        log.info("wrote %s", args.out)
    else:
        print(text)


def _resolved(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


# ----------------------------------------------------------------------
# subcommands


def cmd_lagrange(args):
    from .errors import DomainError

    try:
        lp = lagrange_points(args.mu)
    except DomainError as exc:
        raise InvalidConfigError(str(exc)) from exc
    payload = lp.as_dict()
    payload["resolved_config"] = _resolved(args, ("mu", "format"))
    if args.format == "table":
        for k in ("L1", "L2", "L3", "L4", "L5"):
            q = lp[k]
            print(f"{k}: q = ({q[0]:+.12f}, {q[1]:+.12f})  H = {lp.energy(k):+.12f}")
    else:
        _emit(payload, args)
    return 0


def cmd_hill_region(args):
    problem = _problem_from(args)
    grid = hill_region(problem, args.c, n=args.n, window=args.window)
    base = args.out or "hill_region"
    export_hill_region_csv(grid, base + ".csv", base + ".json")
    print(f"bounded components: {grid.bounded_component_count}")
    print(f"wrote {base}.csv and {base}.json")
    return 0


def cmd_circles(args):
    surface = _surface_from(args)
    plus, minus = fixed_locus_circles(surface, samples=args.samples)
    base = args.out or "circles"
    export_circle_csv(plus, base + "_plus.csv", base + "_plus.json")
    export_circle_csv(minus, base + "_minus.csv", base + "_minus.json")
    print(f"L+ q1 range {plus.q1_range}, L- q1 range {minus.q1_range}")
    print(f"wrote {base}_plus.csv / {base}_minus.csv")
    return 0


def cmd_find_symmetric(args):
    surface = _surface_from(args)
    n_values = tuple(int(x) for x in args.crossings.split(","))
    orbits = find_symmetric_orbits(surface, scan=args.scan, n_cross_values=n_values)
    records = [orbit_record(o) for o in orbits]
    print(f"{'circle':>7} {'theta0':>10} {'T_half':>12} {'type':>4} {'residual':>9}")
    for rec in records:
        print(
            f"{rec['circle_start']+'->'+rec['circle_end']:>7} {rec['theta0']:10.6f} "
            f"{rec['half_period_physical']:12.8f} {rec['type']:>4} {rec['residual']:9.1e}"
        )
    payload = {"resolved_config": _resolved(args, ("kind", "mu", "c", "primary", "scan", "crossings", "seed")),
               "orbits": records}
    if args.out:
        _emit(payload, args)
    return 0


def _orbit_from_args(args):
    surface = _surface_from(args)
    from .orbits import circle_point

    sign = +1 if args.circle == "+" else -1
    w0 = circle_point(surface, sign, args.theta0)
    return surface, solve_orbit_from_start(surface, w0, n_cross=args.n_cross)


def cmd_classify(args):
    _, orbit = _orbit_from_args(args)
    payload = {
        "type": orbit.orbit_type,
        "criteria": {k: v for k, v in orbit.classification.items()},
        "residual": orbit.residual,
        "half_period_physical": orbit.T_phys,
    }
    _emit(payload, args)
    return 0


def cmd_index(args):
    surface, orbit = _orbit_from_args(args)
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=1e5)
    path = transition_path(surface, orbit.w0, 2.0 * orbit.T, cfg)
    iv = orbit_rs_index_from_path(path, orbit.T)
    payload = {
        "mu_rs": iv.value,
        "mu_rfh": rfh_index(iv).value,
        "crossings": [{"t": t, "sign": s, "weight": w} for t, s, w in iv.crossings],
        "orbit": {"type": orbit.orbit_type, "half_period_physical": orbit.T_phys},
    }
    _emit(payload, args)
    return 0


def cmd_mean_index(args):
    surface, orbit = _orbit_from_args(args)
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=1e5)
    path = transition_path(surface, orbit.w0, 2.0 * orbit.T, cfg)
    rep = mean_indices_from_path(path, orbit.T, m_max=args.m_max)
    payload = {
        "mean_rs": rep.mean_rs,
        "mean_cz_double": rep.mean_cz_double,
        "defect": rep.defect,
        "rs_last_ratio": rep.rs_last_ratio,
        "rs_sequence": rep.rs_sequence,
        "cz_sequence": rep.cz_sequence,
        "skipped": rep.skipped,
    }
    _emit(payload, args)
    return 0


def cmd_convexity(args):
    surface = _surface_from(args)
    cover = cover_mod.levi_civita_cover(surface, validate=not args.no_contract, seed=args.seed)
    rep = cover_mod.strict_convexity_check(cover, n_samples=args.samples, seed=args.seed)
    payload = surface.metadata() | rep.as_dict()
    _emit(payload, args)
    return 0


def cmd_ellipsoid(args):
    from .errors import DomainError

    try:
        e = cover_mod.Ellipsoid(args.r1, args.r2)
    except DomainError as exc:
        raise InvalidConfigError(str(exc)) from exc
    census = cover_mod.ellipsoid_oracle(e)
    payload = census.as_dict()
    if args.short_index:
        es = cover_mod.EllipsoidSurface(e.r1, e.r2)
        rec = cover_mod.reeb_orbit_cz_index(es, e.flow_point(math.sqrt(e.r1), 0.0, 0.0), math.pi * e.r1)
        payload["short_orbit_cz"] = rec.cz.value
    if census.rational:
        print(f"all orbits periodic, minimal common period {census.common_period:.12g}")
    else:
        print(f"exactly two closed orbits, periods {census.periods[0]:.12g} and {census.periods[1]:.12g}")
    _emit(payload, args)
    return 0


def cmd_homology(args):
    ps = homology.path_space_ranks()
    if args.table:
        print("degree  rank")
        for d in range(args.max_degree + 1):
            print(f"{d:6d}  {ps[d]}")
        print(f"(stable rank {ps.tail} from degree {ps.stabilization_degree()})")
    rr = homology.rfh_ranks(ps, args.d, args.n, range(args.degree_lo, args.degree_hi + 1))
    payload = {
        "path_space": {str(d): ps[d] for d in range(args.max_degree + 1)},
        "path_space_tail": ps.tail,
        "floer_ranks": {str(k): v for k, v in rr.items()},
    }
    if args.out:
        _emit(payload, args)
    elif not args.table:
        _emit(payload, args)
    return 0


def cmd_verify(args):
    numbers = None
    if args.criteria:
        numbers = {int(x) for x in args.criteria.split(",")}
    ctx = acceptance.AcceptanceContext(seed=args.seed)
    results = acceptance.run_all(ctx, numbers=numbers)
    if args.out:
        slim = [
            {k: v for k, v in r.items() if k != "details"} | {"details": _json_safe(r["details"])}
            for r in results
        ]
        with open(args.out, "w") as fh:
            json.dump(slim, fh, indent=2, default=str)
    return 0 if all(r["passed"] for r in results) else 1


def _json_safe(obj):
    return json.loads(json.dumps(obj, default=str))


# ----------------------------------------------------------------------
# parser plumbing


def _add_problem_flags(sp, with_surface: bool = True):
    sp.add_argument("--kind", default="pcrtbp", choices=["pcrtbp", "rotating-kepler", "hill"])
    sp.add_argument("--mu", type=float, default=0.1)
    if with_surface:
        sp.add_argument("--c", type=float, required=True, help="energy level (below the first critical value)")
        sp.add_argument("--primary", choices=["earth", "moon", "primary"], default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="symorb",
        description="Symmetric periodic orbits in the regularized restricted three-body problem",
    )
    ap.add_argument("--config", help="key = value file; flags override file values")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="output path (JSON records / CSV prefix)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("lagrange", help="the five equilibria with energies")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--format", choices=["json", "table"], default="json")
    sp.set_defaults(fn=cmd_lagrange)

    sp = sub.add_parser("hill-region", help="gridded Hill region at energy c")
    _add_problem_flags(sp, with_surface=False)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--window", type=float, default=None)
    sp.set_defaults(fn=cmd_hill_region)

    sp = sub.add_parser("circles", help="fixed-locus circles L+ and L-")
    _add_problem_flags(sp)
    sp.add_argument("--samples", type=int, default=256)
    sp.set_defaults(fn=cmd_circles)

    sp = sub.add_parser("find-symmetric", help="scan for symmetric periodic orbits")
    _add_problem_flags(sp)
    sp.add_argument("--scan", type=int, default=720)
    sp.add_argument("--crossings", default="1,2,3")
    sp.set_defaults(fn=cmd_find_symmetric)

    for name, fn in (("classify", cmd_classify), ("index", cmd_index), ("mean-index", cmd_mean_index)):
        sp = sub.add_parser(name, help=f"{name} one orbit given its shooting data")
        _add_problem_flags(sp)
        sp.add_argument("--circle", choices=["+", "-"], required=True)
        sp.add_argument("--theta0", type=float, required=True)
        sp.add_argument("--n-cross", type=int, default=1)
        if name == "mean-index":
            sp.add_argument("--m-max", type=int, default=16)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("convexity", help="convexity spot check of the double cover")
    _add_problem_flags(sp)
    sp.add_argument("--samples", type=int, default=150)
    sp.add_argument("--no-contract", action="store_true", help="skip the cover validation contract")
    sp.set_defaults(fn=cmd_convexity)

    sp = sub.add_parser("ellipsoid", help="ellipsoid Reeb orbit census")
    sp.add_argument("--r1", type=float, required=True)
    sp.add_argument("--r2", type=float, required=True)
    sp.add_argument("--short-index", action="store_true")
    sp.set_defaults(fn=cmd_ellipsoid)

    sp = sub.add_parser("homology", help="graded rank tables")
    sp.add_argument("--table", action="store_true")
    sp.add_argument("--max-degree", type=int, default=8)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--degree-lo", type=int, default=-8)
    sp.add_argument("--degree-hi", type=int, default=8)
    sp.set_defaults(fn=cmd_homology)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--criteria", help="comma-separated criterion numbers (default: all)")
    sp.set_defaults(fn=cmd_verify)

    return ap


def _apply_config_file(ap: argparse.ArgumentParser, argv):
    """Pre-parse --config and inject file values as defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = argv[idx + 1]
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"malformed config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = val
    injected = list(argv)
    for key, val in values.items():
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            injected.extend([flag, val])
    return injected


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("TBP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    ap = build_parser()
    try:
        argv = _apply_config_file(ap, argv)
        args = ap.parse_args(argv)
    except InvalidConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    np.random.seed(args.seed % (2**32))
    try:
        return args.fn(args)
    except InvalidConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except SymorbError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
