"""Self-check suites run by ``thinlayer check``.

Each suite returns a :class:`SuiteResult` carrying the sample count, the
worst residual seen and the threshold it was held to.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from . import monge
from .spectral import SturmLiouvilleProblem, discretize, lowest_eigenpairs, make_grid, node_count
from .surfaces import builtin_charts, catenary_field, sample_points

WEINGARTEN_ANALYTIC_TOL = 1e-10
WEINGARTEN_FD_TOL = 1e-6
DETG_TOL = 1e-8
PIPELINE_TOL = 1e-8
METRIC_DET_TOL = 1e-12
CONSISTENCY_TOL = 1e-10
SMALL_SLOPE_RATIO = (3.5, 4.5)
ORTHOGONALITY_TOL = 1e-8


@dataclass
class SuiteResult:
    name: str
    samples: int
    worst: float
    threshold: object
    passed: bool
    seconds: float = 0.0

    def as_dict(self):
        return asdict(self)


def _rel(a, b, floor=1e-14):
    return abs(a - b) / max(abs(a), abs(b), floor)


def _curvature_scale(k1, k2):
    # flat points: compare absolutely
    return max(abs(k1), abs(k2)) or 1.0


# ------------------------------------------------------------- geometry


def weingarten_suite(exact: bool = True, forms_transform: Optional[Callable] = None,
                     grid: int = 10) -> SuiteResult:
    """Weingarten residual on a grid x grid sample of every built-in surface.

    With ``exact=False`` each chart is replaced by its finite-difference
    twin and the normal field is differenced numerically.
    """
    tol = WEINGARTEN_ANALYTIC_TOL if exact else WEINGARTEN_FD_TOL
    worst, count = 0.0, 0
    for chart in builtin_charts():
        c = chart if exact else chart.finite_difference()
        for p in sample_points(c, grid):
            forms = geo.fundamental_forms(c, p)
            if forms_transform is not None:
                forms = forms_transform(forms)
            r = geo.weingarten_residual(c, p, method="analytic" if exact else "fd", forms=forms)
            worst = max(worst, r)
            count += 1
    name = "weingarten-analytic" if exact else "weingarten-fd"
    return SuiteResult(name, count, worst, tol, worst <= tol)


def detg_suite(samples: int = 100, seed: int = 7) -> SuiteResult:
    """Factorised det g against the determinant of the expanded g_ab."""
    rng = np.random.default_rng(seed)
    charts = builtin_charts()
    worst = 0.0
    for _ in range(samples):
        chart = charts[int(rng.integers(len(charts)))]
        pts = sample_points(chart, 10)
        p = pts[int(rng.integers(len(pts)))]
        u3 = float(rng.uniform(-0.1, 0.1))
        rep = geo.curvature_report(chart, p)
        fact = geo.ambient_metric_det(rep, rep.forms.h_det, u3)
        direct = geo.ambient_metric_det_direct(rep.forms, u3)
        worst = max(worst, _rel(fact, direct))
    return SuiteResult("detg-factorization", samples, worst, DETG_TOL, worst <= DETG_TOL)


def consistency_suite(grid: int = 10) -> SuiteResult:
    """k1 + k2 = tr S and k1 k2 = det S, relative to the curvature scale."""
    worst, count = 0.0, 0
    for chart in builtin_charts():
        for p in sample_points(chart, grid):
            rep = geo.curvature_report(chart, p)
            scale = _curvature_scale(rep.k1, rep.k2)
            worst = max(worst, abs(rep.k1 + rep.k2 - rep.K) / scale,
                        abs(rep.k1 * rep.k2 - rep.KG) / scale**2)
            count += 1
    return SuiteResult("curvature-consistency", count, worst, CONSISTENCY_TOL,
                       worst <= CONSISTENCY_TOL)


# ---------------------------------------------------------------- monge


def _monge_fields():
    return [
        catenary_field(1.0),
        monge.HeightField.from_expression("sin(x)*cos(y)", domain=((-2, 2), (-2, 2))),
        monge.HeightField.from_expression("x*y", domain=((-1, 1), (-1, 1))),
        monge.HeightField.from_expression("(x^2 + y^2)/2", domain=((-1, 1), (-1, 1))),
        monge.HeightField.from_expression("0.3*exp(-(x^2 + 2*y^2))", domain=((-2, 2), (-2, 2))),
    ]


def pipeline_suite(grid: int = 10) -> SuiteResult:
    """Closed-form Monge curvatures/potential against the generic pipeline."""
    worst, count = 0.0, 0
    for field in _monge_fields():
        chart = monge.monge_chart(field)
        for x, y in sample_points(chart, grid):
            rep = geo.curvature_report(chart, (x, y))
            K, KG = monge.monge_curvatures(field, x, y)
            vs = monge.monge_potential_exact(field, x, y)
            scale = _curvature_scale(rep.k1, rep.k2)
            worst = max(worst,
                        abs(K - rep.K) / scale,
                        abs(KG - rep.KG) / scale**2,
                        abs(vs - rep.vs_coeff) / scale**2)
            count += 1
    # radially symmetric height along the x axis: polar vs Cartesian
    radial = [
        ("rho^2/2", "(x^2 + y^2)/2"),
        ("rho^4/4 + rho^2", "(x^2 + y^2)^2/4 + x^2 + y^2"),
        ("0.5*cos(rho)", "0.5*cos(sqrt(x^2 + y^2))"),
    ]
    for rtext, ctext in radial:
        prof = monge.RadialProfile.from_expression(rtext, rho_max=2.0)
        field = monge.HeightField.from_expression(ctext, domain=((-2, 2), (-2, 2)))
        chart = monge.monge_chart(field)
        for rho in np.linspace(0.1, 1.9, grid):
            pol = sorted(monge.polar_principal_curvatures(prof, float(rho)))
            rep = geo.curvature_report(chart, (float(rho), 0.0))
            cart = sorted((rep.k1, rep.k2))
            scale = _curvature_scale(*pol)
            worst = max(worst, abs(pol[0] - cart[0]) / scale, abs(pol[1] - cart[1]) / scale)
            count += 1
    return SuiteResult("monge-pipeline", count, worst, PIPELINE_TOL, worst <= PIPELINE_TOL)


def metric_det_suite(grid: int = 10) -> SuiteResult:
    worst, count = 0.0, 0
    for field in _monge_fields():
        chart = monge.monge_chart(field)
        for x, y in sample_points(chart, grid):
            forms = geo.fundamental_forms(chart, (x, y))
            worst = max(worst, _rel(forms.h_det, monge.monge_metric_det(field, x, y)))
            count += 1
    return SuiteResult("monge-metric-det", count, worst, METRIC_DET_TOL, worst <= METRIC_DET_TOL)


SMALL_SLOPE_POINTS = ((0.3, 0.2), (0.7, -0.4), (-1.1, 0.5), (0.45, 1.3))
SMALL_SLOPE_AMPLITUDES = (0.2, 0.1, 0.05, 0.025)


def small_slope_ratios(points=SMALL_SLOPE_POINTS, amplitudes=SMALL_SLOPE_AMPLITUDES):
    """Error ratios |V_small - V_exact| / |V_exact| at successive halvings of eps."""
    ratios = []
    for x, y in points:
        errs = []
        for eps in amplitudes:
            field = monge.HeightField.from_expression("eps*sin(x)*cos(y)", {"eps": eps},
                                                      domain=((-2, 2), (-2, 2)))
            ve = monge.monge_potential_exact(field, x, y)
            vs = monge.monge_potential_small_slope(field, x, y)
            errs.append(abs(vs - ve) / abs(ve))
        ratios.extend(errs[i] / errs[i + 1] for i in range(len(errs) - 1))
    return ratios


def small_slope_suite() -> SuiteResult:
    ratios = small_slope_ratios()
    lo, hi = SMALL_SLOPE_RATIO
    worst = max(ratios, key=lambda r: max(lo - r, r - hi))
    return SuiteResult("small-slope-convergence", len(ratios), worst, list(SMALL_SLOPE_RATIO),
                       all(lo <= r <= hi for r in ratios))


# ------------------------------------------------------------- spectral


def box_problem(length: float = 1.0) -> SturmLiouvilleProblem:
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    return SturmLiouvilleProblem(p=one, q=lambda x: 0.0 * np.asarray(x, dtype=float), w=one,
                                 domain=(0.0, length), name="box")


def harmonic_problem(half_width: float = 10.0) -> SturmLiouvilleProblem:
    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    return SturmLiouvilleProblem(p=one, q=lambda x: np.asarray(x, dtype=float) ** 2, w=one,
                                 domain=(-half_width, half_width), name="harmonic")


def _eigen_cases():
    from .problems import build_catenary, build_paraboloid

    return [
        (box_problem(), 0.002, 5),
        (harmonic_problem(), 0.005, 5),
        (build_catenary(1.0), 0.01, 3),
        (build_paraboloid(1.0, 0), 0.01, 3),
    ]


def orthogonality_suite(backend=None) -> SuiteResult:
    worst, count = 0.0, 0
    for problem, h, k in _eigen_cases():
        pencil = discretize(problem, make_grid(problem, h))
        vecs = [v for _, v in lowest_eigenpairs(pencil, k, backend)]
        for i in range(k):
            for j in range(i + 1, k):
                worst = max(worst, abs(float(np.sum(vecs[i] * pencil.weight * vecs[j]))))
                count += 1
    return SuiteResult("generalized-orthogonality", count, worst, ORTHOGONALITY_TOL,
                       worst <= ORTHOGONALITY_TOL)


def oscillation_suite(backend=None) -> SuiteResult:
    """Node count of the i-th eigenvector equals i (box and oscillator, i < 5)."""
    mismatches, count = 0, 0
    for problem, h, k in _eigen_cases()[:2]:
        pencil = discretize(problem, make_grid(problem, h))
        for i, (_, v) in enumerate(lowest_eigenpairs(pencil, k, backend)):
            mismatches += node_count(v) != i
            count += 1
    return SuiteResult("oscillation-nodes", count, float(mismatches), 0, mismatches == 0)


SUITES = {
    "weingarten-analytic": lambda **kw: weingarten_suite(True, kw.get("forms_transform")),
    "weingarten-fd": lambda **kw: weingarten_suite(False, kw.get("forms_transform")),
    "detg-factorization": lambda **kw: detg_suite(),
    "curvature-consistency": lambda **kw: consistency_suite(),
    "monge-pipeline": lambda **kw: pipeline_suite(),
    "monge-metric-det": lambda **kw: metric_det_suite(),
    "small-slope-convergence": lambda **kw: small_slope_suite(),
    "generalized-orthogonality": lambda **kw: orthogonality_suite(kw.get("backend")),
    "oscillation-nodes": lambda **kw: oscillation_suite(kw.get("backend")),
}


def run_checks(names=None, forms_transform=None, backend=None) -> list[SuiteResult]:
    results = []
    for name in names or SUITES:
        t0 = time.perf_counter()
        res = SUITES[name](forms_transform=forms_transform, backend=backend)
        res.seconds = time.perf_counter() - t0
        if isinstance(res.worst, float) and math.isnan(res.worst):
            res.passed = False
        results.append(res)
    return results
