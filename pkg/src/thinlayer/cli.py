"""Command-line front end.

Verbs: curvature, potential-map, solve, scan, check.  Each run writes
``<stem>.summary.json``, ``<stem>.csv`` and ``<stem>.manifest.json``.

Exit codes: 0 ok, 2 invalid spec, 3 geometry/singularity, 4 not converged,
5 self-check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import checks, problems
from . import expr as ex
from ._accel import HAVE_NUMBA, requested_backend
from .errors import (AxisSingularity, DegenerateChart, ExprError, FitRejected, FoldedLayer,
                     NotConverged, OutsideDomain, SpecError, TailUnderflow)
from .geometry import curvature_report
from .spectral import (BC, SturmLiouvilleProblem, count_below, count_negative, default_ladder,
                       discretize, make_grid, refine_to_convergence, spectrum_below)
from .surfaces import build_surface, sample_points

EXIT_OK, EXIT_SPEC, EXIT_GEOMETRY, EXIT_CONVERGENCE, EXIT_CHECK = 0, 2, 3, 4, 5
GEOMETRY_ERRORS = (DegenerateChart, OutsideDomain, AxisSingularity, FoldedLayer)

CATENARY_WINDOW = (-10.0, 10.0)
WEINGARTEN_NOTE = ("Weingarten residual is relative to |k_a^b e_b| + max|k| |e_a|, not to "
                   "|k_a^b e_b| alone, so directions with zero normal curvature stay finite")
CATENARY_WINDOW_NOTE = ("catenary normalisation reported on |q| <= 10 (the window that reproduces "
                        "the quoted constant) and on the full truncated line")
PARABOLOID_SERIES_NOTE = ("l = 0 paraboloid channel has a long-range attractive tail and an "
                          "infinite series of shallow states; bound_states lists the requested "
                          "lowest states, deeper tail states appear under further_states")
GRAMMAR_NOTE = "expressions: unary minus binds looser than '^' (-x^2 = -(x^2)); '^' is right-associative"


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ------------------------------------------------------------ artifacts


def _versions():
    out = {"python": platform.python_version(), "numpy": np.__version__}
    try:
        out["thinlayer"] = metadata.version("thinlayer")
    except metadata.PackageNotFoundError:
        out["thinlayer"] = "unknown"
    if HAVE_NUMBA:
        import numba

        out["numba"] = numba.__version__
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return "" if v is None else str(v)


def write_artifacts(stem, summary: dict, header, rows, manifest: dict) -> dict:
    stem = Path(stem)
    if stem.parent and not stem.parent.exists():
        stem.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "summary": f"{stem}.summary.json",
        "csv": f"{stem}.csv",
        "manifest": f"{stem}.manifest.json",
    }
    manifest = dict(manifest, artifacts=paths)
    summary = dict(summary, manifest=paths["manifest"])
    with open(paths["summary"], "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, allow_nan=False)
        fh.write("\n")
    with open(paths["csv"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(v) for v in row])
    with open(paths["manifest"], "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, allow_nan=False)
        fh.write("\n")
    return paths


def _manifest(args, command, spec=None, grid=None, solver=None, notes=()):
    return {
        "command": command,
        "argv": list(args._argv),
        "spec": spec,
        "grid": grid,
        "solver": solver,
        "backend": requested_backend(args.backend),
        "versions": _versions(),
        "deviations": list(notes),
    }


# --------------------------------------------------------- surface spec


def _parse_params(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise _Fail(EXIT_SPEC, f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise _Fail(EXIT_SPEC, f"parameter {k!r} is not a number: {v!r}") from None
    return out


def load_surface_spec(args) -> dict:
    if args.spec:
        try:
            with open(args.spec) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _Fail(EXIT_SPEC, f"cannot read spec file: {exc}") from exc
        if not isinstance(raw, dict) or "kind" not in raw:
            raise _Fail(EXIT_SPEC, "spec file needs an object with a 'kind' field")
        extra = set(raw) - {"kind", "params", "expression"}
        if extra:
            raise _Fail(EXIT_SPEC, f"unknown spec field(s): {', '.join(sorted(extra))}")
        params = raw.get("params") or {}
        if not isinstance(params, dict):
            raise _Fail(EXIT_SPEC, "spec 'params' must be an object")
        spec = {"kind": raw["kind"], "params": params, "expression": raw.get("expression")}
    else:
        if not args.surface:
            raise _Fail(EXIT_SPEC, "give --surface KIND or --spec FILE")
        spec = {"kind": args.surface, "params": {}, "expression": args.expr}
    spec["params"] = {**spec["params"], **_parse_params(args.param)}
    if args.expr and args.spec:
        spec["expression"] = args.expr
    return spec


def _chart(spec, fd=False):
    try:
        chart = build_surface(spec["kind"], spec["params"], spec.get("expression"))
    except (SpecError, ExprError, TypeError, ValueError) as exc:
        raise _Fail(EXIT_SPEC, str(exc)) from exc
    return chart.finite_difference() if fd else chart


def _surface_notes(spec):
    notes = [WEINGARTEN_NOTE]
    if spec.get("expression"):
        notes.append(GRAMMAR_NOTE)
    if spec["kind"] == "paraboloid":
        notes.append(problems.PARABOLOID_PROFILE_NOTE)
    return notes


def _parse_point(text):
    try:
        u, v = (float(s) for s in text.split(","))
    except ValueError:
        raise _Fail(EXIT_SPEC, f"--at expects u1,u2, got {text!r}") from None
    return u, v


# ------------------------------------------------------------ curvature

CURVATURE_COLUMNS = ["u1", "u2", "k1", "k2", "K", "KG", "vs_coeff"]


def cmd_curvature(args) -> int:
    spec = load_surface_spec(args)
    chart = _chart(spec, args.fd)
    if args.at:
        points = [_parse_point(t) for t in args.at]
    else:
        points = sample_points(chart, args.grid)
    records = []
    for p in points:
        try:
            rep = curvature_report(chart, p)
        except GEOMETRY_ERRORS as exc:
            raise _Fail(EXIT_GEOMETRY, f"at {p}: {exc}") from exc
        rec = {"u1": p[0], "u2": p[1]}
        rec.update({k: getattr(rep, k) for k in CURVATURE_COLUMNS[2:]})
        records.append(rec)
    summary = {"command": "curvature", "surface": chart.name, "units": "1/length; vs_coeff in hbar^2/m",
               "derivatives": "finite-difference" if args.fd else "exact", "points": records}
    grid = {"points": [list(p) for p in points], "fd_step": list(chart.steps) if args.fd else None}
    write_artifacts(args.out, summary, CURVATURE_COLUMNS,
                    ([r[c] for c in CURVATURE_COLUMNS] for r in records),
                    _manifest(args, "curvature", spec, grid, notes=_surface_notes(spec)))
    _echo(args, summary)
    return EXIT_OK


PLOT_STUB = '''"""Plot stub for {csv} (needs matplotlib, which thinlayer does not install)."""
import csv

import matplotlib.pyplot as plt

with open("{csv}") as fh:
    rows = list(csv.DictReader(fh))
u1 = [float(r["u1"]) for r in rows]
u2 = [float(r["u2"]) for r in rows]
vs = [float(r["vs_coeff"]) for r in rows]
plt.tricontourf(u1, u2, vs, levels=30)
plt.colorbar(label="vs_coeff")
plt.xlabel("u1")
plt.ylabel("u2")
plt.savefig("{png}")
'''


def cmd_potential_map(args) -> int:
    spec = load_surface_spec(args)
    chart = _chart(spec, args.fd)
    rows = []
    for p in sample_points(chart, args.grid):
        try:
            rep = curvature_report(chart, p)
        except GEOMETRY_ERRORS as exc:
            raise _Fail(EXIT_GEOMETRY, f"at {p}: {exc}") from exc
        x, y, z = chart.position(p)
        rows.append([p[0], p[1], float(x), float(y), float(z), rep.vs_coeff])
    vs = np.array([r[-1] for r in rows])
    summary = {"command": "potential-map", "surface": chart.name, "samples": len(rows),
               "grid": args.grid, "vs_min": float(vs.min()), "vs_max": float(vs.max())}
    header = ["u1", "u2", "x", "y", "z", "vs_coeff"]
    paths = write_artifacts(args.out, summary, header, rows,
                            _manifest(args, "potential-map", spec,
                                      {"n": args.grid, "kind": "cell-centred", "domain": chart.domain},
                                      notes=_surface_notes(spec)))
    if args.plot_stub:
        stub = f"{args.out}.plot.py"
        with open(stub, "w") as fh:
            fh.write(PLOT_STUB.format(csv=os.path.basename(paths["csv"]),
                                      png=os.path.basename(f"{args.out}.png")))
    _echo(args, summary)
    return EXIT_OK


# ---------------------------------------------------------------- solve


def load_custom_problem(path) -> SturmLiouvilleProblem:
    """Sturm-Liouville problem from JSON: p, q, w (and optional measure) expressions.

    Schema: {"name", "variable" (default "x"), "p", "q", "w", "measure"?,
    "domain": [lo, hi], "bc": [left, right], "params": {}}.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _Fail(EXIT_SPEC, f"cannot read problem file: {exc}") from exc
    try:
        var = raw.get("variable", "x")
        params = {k: float(v) for k, v in (raw.get("params") or {}).items()}
        fns = {}
        for key in ("p", "q", "w", "measure"):
            text = raw.get(key, "1" if key in ("p", "w") else None)
            if text is None:
                continue
            ast = ex.parse(str(text), variables=(var,), parameters=tuple(params))
            fns[key] = ex.as_function(ast, var, params)
        lo, hi = (float(v) for v in raw["domain"])
        bc = raw.get("bc", ["dirichlet", "dirichlet"])
        kw = {"measure": fns["measure"]} if "measure" in fns else {}
        if "measure" not in fns:
            kw["measure"] = fns["w"]
        return SturmLiouvilleProblem(p=fns["p"], q=fns["q"], w=fns["w"], domain=(lo, hi),
                                     bc_left=BC(bc[0]), bc_right=BC(bc[1]), name=raw.get("name", "custom"),
                                     expansion_point=raw.get("expansion_point"),
                                     metadata={"coordinate": var}, **kw)
    except KeyError as exc:
        raise _Fail(EXIT_SPEC, f"problem file is missing {exc}") from exc
    except (ExprError, ValueError, TypeError) as exc:
        raise _Fail(EXIT_SPEC, f"invalid problem file: {exc}") from exc


def _build_problem(args):
    target = args.problem
    if target == "catenary":
        if not args.a > 0:
            raise _Fail(EXIT_SPEC, "catenary needs a > 0")
        L = args.half_width or problems.CATENARY_HALF_WIDTH
        return problems.build_catenary(args.a, L), args.finest or problems.DEFAULT_FINEST
    if target == "paraboloid":
        if not args.a > 0:
            raise _Fail(EXIT_SPEC, "paraboloid needs a > 0")
        if args.measure not in problems.PARABOLOID_MEASURES:
            raise _Fail(EXIT_SPEC, f"unknown measure {args.measure!r}")
        prob = problems.build_paraboloid(args.a, args.l, args.radius, args.measure)
        return prob, args.finest or problems.DEFAULT_FINEST * args.a
    if target.endswith(".json") or os.path.exists(target):
        return load_custom_problem(target), args.finest or 0.01
    raise _Fail(EXIT_SPEC, f"unknown problem {target!r}: use catenary, paraboloid or a JSON file")


def _normalisations(problem, state):
    meta = problem.metadata
    out = {}
    try:
        if meta.get("surface") == "catenary":
            out["window_q10"] = problems.normalization_constant(state, window=CATENARY_WINDOW)
            out["full_line"] = problems.normalization_constant(state)
            pb = problems.catenary_pullback(state, meta["a"])
            out["pullback_norm_x"] = pb.norm
        elif meta.get("surface") == "paraboloid":
            for name in problems.PARABOLOID_MEASURES:
                out[name] = problems.normalization_constant(state, name)
        elif problem.expansion_point is not None:
            out["measure"] = problems.normalization_constant(state)
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        out["error"] = str(exc)
    return out


def _decay(problem, state):
    meta = problem.metadata
    if meta.get("surface") != "paraboloid" or meta.get("l") != 0 or state.energy >= 0:
        return None
    target = math.sqrt(abs(state.energy))
    try:
        fit = problems.decay_prefactor_check(state, meta["a"])
    except (FitRejected, TailUnderflow) as exc:
        return {"status": type(exc).__name__, "detail": str(exc), "expected": target}
    return {"status": "ok", "fit": fit, "expected": target, "relative_error": abs(fit - target) / target}


def _further_states(problem, known, spacing, threshold, backend):
    """Eigenvalues below ``threshold`` beyond the reported ones, with a domain-stability flag."""
    base = spectrum_below(problem, spacing, threshold, backend=backend)
    lo, hi = problem.domain
    wider = SturmLiouvilleProblem(p=problem.p, q=problem.q, w=problem.w, domain=(lo, lo + 1.5 * (hi - lo)),
                                  bc_left=problem.bc_left, bc_right=problem.bc_right,
                                  measure=problem.measure, name=problem.name + "-wide",
                                  expansion_point=problem.expansion_point, metadata=problem.metadata)
    wide = spectrum_below(wider, spacing, threshold, backend=backend)
    rows = []
    for i, lam in enumerate(base.eigenvalues):
        if i < known:
            continue
        other = wide.eigenvalues[i] if i < len(wide.eigenvalues) else float("nan")
        rel = abs(other - lam) / abs(lam) if math.isfinite(other) else float("inf")
        rows.append({"index": i, "energy_estimate": lam, "energy_wider_domain": other,
                     "domain_stable": bool(rel <= 1e-3), "spacing": base.spacing})
    return rows


def cmd_solve(args) -> int:
    problem, finest = _build_problem(args)
    if args.export_problem:
        with open(args.export_problem, "w") as fh:
            json.dump(_jsonable(problems.problem_to_json(problem, finest)), fh)
    backend = args.backend
    ladder = default_ladder(finest, args.levels)
    pencil = discretize(problem, make_grid(problem, finest))
    n_neg = count_negative(pencil, backend)
    n_below = n_neg if args.threshold == 0.0 else count_below(pencil, args.threshold, backend)
    wanted = min(args.states, n_below)
    states, code = [], EXIT_OK
    for index in range(wanted):
        try:
            st = refine_to_convergence(problem, ladder, index=index, tol=args.tol, backend=backend)
        except NotConverged as exc:
            st, code = exc.state, EXIT_CONVERGENCE
        states.append(st)
    records = []
    for st in states:
        rec = st.summary()
        rec["normalization"] = _normalisations(problem, st)
        if problem.metadata.get("surface") == "catenary":
            rec["energy_x"] = problems.catenary_physical_energy(st.energy, problem.metadata["a"])
        decay = _decay(problem, st)
        if decay is not None:
            rec["decay_prefactor"] = decay
        records.append(rec)
    notes = []
    meta = problem.metadata
    if meta.get("surface") == "paraboloid":
        notes += [problems.PARABOLOID_PROFILE_NOTE, PARABOLOID_SERIES_NOTE]
    if meta.get("surface") == "catenary":
        notes.append(CATENARY_WINDOW_NOTE)
    if not meta.get("surface"):
        notes.append(GRAMMAR_NOTE)
    summary = {
        "command": "solve",
        "problem": problem.name,
        "energy_units": _energy_units(problem),
        "count_negative": n_neg,
        "threshold": args.threshold,
        "count_below_threshold": n_below,
        "converged": all(st.converged for st in states),
        "bound_states": records,
        "further_states": _further_states(problem, len(states), ladder[0], args.threshold, backend)
        if n_below > wanted else [],
    }
    x = np.asarray(states[0].nodes) if states else make_grid(problem, finest).nodes
    pot = np.asarray(problem.q(x), dtype=float) / np.asarray(problem.w(x), dtype=float) * np.ones_like(x)
    header = ["coordinate"] + ["psi" if i == 0 else f"psi_{i}" for i in range(len(states))] + ["potential"]
    if not states:
        header = ["coordinate", "psi", "potential"]
    cols = [x] + [st.samples for st in states] + ([] if states else [np.zeros_like(x)]) + [pot]
    rows = zip(*(np.asarray(c, dtype=float).tolist() for c in cols))
    solver = {"ladder": ladder, "levels": args.levels, "tol": args.tol, "states": args.states,
              "backend": requested_backend(backend)}
    grid = {"domain": list(problem.domain), "bc": [problem.bc_left.value, problem.bc_right.value],
            "kind": make_grid(problem, finest).kind, "spacings": states[0].spacings if states else [finest]}
    spec = {"problem": args.problem, "a": args.a, "l": args.l, "measure": args.measure,
            "half_width": args.half_width, "radius": args.radius}
    write_artifacts(args.out, summary, header, rows, _manifest(args, "solve", spec, grid, solver, notes))
    _echo(args, summary)
    return code


def _energy_units(problem):
    surface = problem.metadata.get("surface")
    if surface == "catenary":
        return "a^2 * 2mE/hbar^2 (energy_x = 2mE/hbar^2)"
    if surface == "paraboloid":
        return "2mE_t/hbar^2"
    return "eigenvalue of -(p y')' + q y = E w y"


# ----------------------------------------------------------------- scan


def _scan_values(args):
    if args.values:
        try:
            vals = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise _Fail(EXIT_SPEC, f"--values must be comma-separated numbers: {args.values!r}") from None
    elif args.range:
        try:
            start, stop, num = args.range.split(":")
            vals = np.linspace(float(start), float(stop), int(num)).tolist()
        except ValueError:
            raise _Fail(EXIT_SPEC, f"--range expects start:stop:count, got {args.range!r}") from None
    else:
        raise _Fail(EXIT_SPEC, "give --values or --range")
    if len(vals) < 2:
        raise _Fail(EXIT_SPEC, "a scan needs at least two parameter values")
    if not all(math.isfinite(v) for v in vals):
        raise _Fail(EXIT_SPEC, "scan values must be finite")
    return sorted(vals)


def _scan_row(task):
    kind, param, value, fixed, finest, levels, tol, backend = task
    kw = dict(fixed, **{param: value})
    try:
        a = float(kw.get("a", 1.0))
        if kind == "catenary":
            prob = problems.build_catenary(a, kw.get("half_width", problems.CATENARY_HALF_WIDTH))
            h = finest or problems.DEFAULT_FINEST
        else:
            prob = problems.build_paraboloid(a, int(kw.get("l", 0)), kw.get("radius"))
            h = (finest or problems.DEFAULT_FINEST) * a
        ladder = default_ladder(h, levels)
        n = count_negative(discretize(prob, make_grid(prob, h)), backend)
        st = refine_to_convergence(prob, ladder, tol=tol, backend=backend, raise_on_failure=False)
        scaled = st.energy if kind == "catenary" else a * a * st.energy
        status = "ok" if st.converged else "not-converged"
        return [value, st.energy, scaled, n, st.residual, status]
    except Exception as exc:  # recorded per row, the scan carries on
        return [value, None, None, None, None, f"error: {type(exc).__name__}: {exc}"]


def cmd_scan(args) -> int:
    if args.problem not in ("catenary", "paraboloid"):
        raise _Fail(EXIT_SPEC, "scan supports catenary and paraboloid")
    allowed = {"catenary": {"a", "half_width"}, "paraboloid": {"a", "l", "radius"}}[args.problem]
    if args.param not in allowed:
        raise _Fail(EXIT_SPEC, f"{args.problem} scans over one of: {', '.join(sorted(allowed))}")
    values = _scan_values(args)
    fixed = _parse_params(args.fixed)
    tasks = [(args.problem, args.param, v, fixed, args.finest, args.levels, args.tol, args.backend)
             for v in values]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_scan_row, tasks))
    else:
        rows = [_scan_row(t) for t in tasks]
    header = [args.param, "energy", "scaled_energy", "count_negative", "residual", "status"]
    summary = {"command": "scan", "problem": args.problem, "param": args.param,
               "energy_units": "scaled_energy = a^2 E (paraboloid), E (catenary, already a-free)",
               "rows": [dict(zip(header, r)) for r in rows],
               "failures": sum(r[-1] != "ok" for r in rows)}
    solver = {"finest": args.finest, "levels": args.levels, "tol": args.tol, "jobs": args.jobs}
    write_artifacts(args.out, summary, header, rows,
                    _manifest(args, "scan", {"problem": args.problem, "param": args.param,
                                             "values": values, "fixed": fixed}, None, solver))
    _echo(args, summary)
    return EXIT_OK


# ---------------------------------------------------------------- check


def cmd_check(args) -> int:
    names = args.suite or None
    unknown = set(names or ()) - set(checks.SUITES)
    if unknown:
        raise _Fail(EXIT_SPEC, f"unknown suite(s): {', '.join(sorted(unknown))}")
    results = checks.run_checks(names, backend=args.backend)
    passed = all(r.passed for r in results)
    summary = {"command": "check", "passed": passed, "total_seconds": sum(r.seconds for r in results),
               "suites": [r.as_dict() for r in results]}
    header = ["name", "samples", "worst", "threshold", "passed", "seconds"]
    rows = [[r.name, r.samples, float(r.worst), json.dumps(r.threshold), bool(r.passed), r.seconds]
            for r in results]
    write_artifacts(args.out, summary, header, rows,
                    _manifest(args, "check", None, None, {"suites": [r.name for r in results]},
                              [WEINGARTEN_NOTE]))
    if not args.quiet:
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: worst={r.worst:.3e} "
                  f"threshold={r.threshold} samples={r.samples}")
    return EXIT_OK if passed else EXIT_CHECK


# --------------------------------------------------------------- parser


def _echo(args, summary):
    if not args.quiet:
        print(json.dumps(_jsonable(summary), indent=2))


def _surface_options(p):
    p.add_argument("--surface", help="plane, sphere, cylinder, torus, catenary, paraboloid, "
                                      "monge-cartesian, monge-polar")
    p.add_argument("--param", action="append", metavar="NAME=VALUE", help="surface parameter (repeatable)")
    p.add_argument("--expr", help="height function for monge kinds, in x,y or rho")
    p.add_argument("--spec", help="JSON file {kind, params, expression}")
    p.add_argument("--fd", action="store_true", help="use finite-difference derivatives")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thinlayer", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output stem (default thinlayer-<verb>)")
    common.add_argument("--backend", choices=["numba", "numpy"], default=None,
                        help="kernel backend (default: numba when available, or THINLAYER_BACKEND)")
    common.add_argument("--quiet", action="store_true", help="do not echo the summary")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("curvature", parents=[common], help="curvatures and potential at points")
    _surface_options(p)
    p.add_argument("--at", action="append", metavar="U1,U2", help="chart point (repeatable)")
    p.add_argument("--grid", type=int, default=10, help="n x n sample grid when --at is absent")
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("potential-map", parents=[common], help="potential sampled over the chart")
    _surface_options(p)
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--plot-stub", action="store_true", help="also write a matplotlib script")
    p.set_defaults(func=cmd_potential_map)

    p = sub.add_parser("solve", parents=[common], help="bound states of a reduced problem")
    p.add_argument("problem", help="catenary, paraboloid or a Sturm-Liouville JSON file")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--l", type=int, default=0, help="angular channel (paraboloid)")
    p.add_argument("--half-width", type=float, default=None, help="catenary domain half-width in q")
    p.add_argument("--radius", type=float, default=None, help="paraboloid domain radius")
    p.add_argument("--measure", default="rho2", help="paraboloid normalisation measure")
    p.add_argument("--finest", type=float, default=None, help="finest grid spacing")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-7, help="self-convergence tolerance")
    p.add_argument("--states", type=int, default=1, help="number of lowest bound states to refine")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="states count as bound below this energy (default 0, the continuum edge)")
    p.add_argument("--export-problem", metavar="FILE", help="write sampled coefficients as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan", parents=[common], help="ground-state energy across a parameter")
    p.add_argument("problem", choices=["catenary", "paraboloid"])
    p.add_argument("--param", default="a", help="parameter to scan")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--range", help="start:stop:count (inclusive)")
    p.add_argument("--fixed", action="append", metavar="NAME=VALUE", help="other parameters")
    p.add_argument("--finest", type=float, default=None)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("check", parents=[common], help="run the property suites")
    p.add_argument("--suite", action="append", help=f"one of {', '.join(checks.SUITES)}")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors (code 2) and --help (code 0)
        return int(exc.code or 0)
    args._argv = argv
    if args.out is None:
        args.out = f"thinlayer-{args.verb}"
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"thinlayer: {exc}", file=sys.stderr)
        return exc.code
    except GEOMETRY_ERRORS as exc:
        print(f"thinlayer: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (SpecError, ExprError) as exc:
        print(f"thinlayer: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
