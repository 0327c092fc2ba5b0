"""Catalogue of built-in surfaces with exact derivatives."""

from __future__ import annotations

import math

import numpy as np

from .errors import SpecError
from .geometry import SurfaceChart
from .monge import HeightField, Profile1D, RadialProfile, monge_chart, polar_chart

TWO_PI = 2.0 * math.pi


def plane(half_width: float = 2.0) -> SurfaceChart:
    z = np.zeros(3)
    w = half_width
    return SurfaceChart(
        name="plane",
        map=lambda u, v: np.array([u, v, 0.0]),
        domain=((-w, w), (-w, w)),
        first=lambda u, v: (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])),
        second=lambda u, v: (z, z, z),
    )


def sphere(R: float = 1.0) -> SurfaceChart:
    """(theta, phi), polar angle first; the normal points outward."""

    def rmap(t, p):
        st = math.sin(t)
        return R * np.array([st * math.cos(p), st * math.sin(p), math.cos(t)])

    def first(t, p):
        st, ct, sp, cp = math.sin(t), math.cos(t), math.sin(p), math.cos(p)
        return R * np.array([ct * cp, ct * sp, -st]), R * np.array([-st * sp, st * cp, 0.0])

    def second(t, p):
        st, ct, sp, cp = math.sin(t), math.cos(t), math.sin(p), math.cos(p)
        return (R * np.array([-st * cp, -st * sp, -ct]),
                R * np.array([-ct * sp, ct * cp, 0.0]),
                R * np.array([-st * cp, -st * sp, 0.0]))

    return SurfaceChart(name=f"sphere(R={R:g})", map=rmap, domain=((0.0, math.pi), (0.0, TWO_PI)),
                        first=first, second=second)


def cylinder(R: float = 1.0, length: float = 2.0) -> SurfaceChart:
    """(theta, z); the normal points outward."""
    z = np.zeros(3)
    return SurfaceChart(
        name=f"cylinder(R={R:g})",
        map=lambda t, s: np.array([R * math.cos(t), R * math.sin(t), s]),
        domain=((0.0, TWO_PI), (-0.5 * length, 0.5 * length)),
        first=lambda t, s: (np.array([-R * math.sin(t), R * math.cos(t), 0.0]),
                            np.array([0.0, 0.0, 1.0])),
        second=lambda t, s: (np.array([-R * math.cos(t), -R * math.sin(t), 0.0]), z, z),
    )


def torus(R: float = 2.0, r: float = 1.0) -> SurfaceChart:
    """(theta, phi) with theta around the tube and phi around the axis."""
    if not r < R:
        raise ValueError("torus needs tube radius r < R")

    def rmap(t, p):
        w = R + r * math.cos(t)
        return np.array([w * math.cos(p), w * math.sin(p), r * math.sin(t)])

    def first(t, p):
        st, ct, sp, cp = math.sin(t), math.cos(t), math.sin(p), math.cos(p)
        w = R + r * ct
        return np.array([-r * st * cp, -r * st * sp, r * ct]), np.array([-w * sp, w * cp, 0.0])

    def second(t, p):
        st, ct, sp, cp = math.sin(t), math.cos(t), math.sin(p), math.cos(p)
        w = R + r * ct
        return (np.array([-r * ct * cp, -r * ct * sp, -r * st]),
                np.array([r * st * sp, -r * st * cp, 0.0]),
                np.array([-w * cp, -w * sp, 0.0]))

    return SurfaceChart(name=f"torus(R={R:g},r={r:g})", map=rmap,
                        domain=((0.0, TWO_PI), (0.0, TWO_PI)), first=first, second=second)


def catenary_field(a: float = 1.0, half_width: float | None = None) -> HeightField:
    """H(x, y) = a cosh(x / a)."""
    xw = 3.0 * a if half_width is None else half_width
    prof = Profile1D(f=lambda x: a * math.cosh(x / a), df=lambda x: math.sinh(x / a),
                     d2f=lambda x: math.cosh(x / a) / a, domain=(-xw, xw),
                     name=f"catenary(a={a:g})")
    return HeightField.from_profile(prof, domain=((-xw, xw), (-1.0, 1.0)))


def catenary(a: float = 1.0) -> SurfaceChart:
    return monge_chart(catenary_field(a))


def paraboloid_profile(a: float = 1.0, rho_max: float | None = None) -> RadialProfile:
    """H(rho) = rho^2 / (2a), the profile whose slope is rho / a."""
    return RadialProfile(H=lambda r: r * r / (2.0 * a), Hr=lambda r: r / a,
                         Hrr=lambda r: 1.0 / a, rho_max=3.0 * a if rho_max is None else rho_max,
                         name=f"paraboloid(a={a:g})")


def paraboloid(a: float = 1.0) -> SurfaceChart:
    return polar_chart(paraboloid_profile(a))


def monge_cartesian(expression: str, params=None, domain=((-1.0, 1.0), (-1.0, 1.0))) -> SurfaceChart:
    return monge_chart(HeightField.from_expression(expression, params, domain=domain))


def monge_polar(expression: str, params=None, rho_max: float = 1.0) -> SurfaceChart:
    return polar_chart(RadialProfile.from_expression(expression, params, rho_max=rho_max))


# name -> (factory, required params, optional params with defaults)
CATALOG = {
    "plane": (plane, (), {"half_width": 2.0}),
    "sphere": (sphere, ("R",), {}),
    "cylinder": (cylinder, ("R",), {"length": 2.0}),
    "torus": (torus, ("R", "r"), {}),
    "catenary": (catenary, ("a",), {}),
    "paraboloid": (paraboloid, ("a",), {}),
}


def build_surface(kind: str, params: dict | None = None, expression: str | None = None) -> SurfaceChart:
    """Chart from a (kind, params, expression) description; raises SpecError."""
    params = {k: float(v) for k, v in (params or {}).items()}
    for name, value in params.items():
        if not math.isfinite(value):
            raise SpecError(f"parameter {name} must be finite")
    if kind in ("monge-cartesian", "monge-polar"):
        if not expression:
            raise SpecError(f"{kind} needs an expression")
        try:
            if kind == "monge-cartesian":
                lim = params.pop("half_width", 1.0)
                return monge_cartesian(expression, params, domain=((-lim, lim), (-lim, lim)))
            rho_max = params.pop("rho_max", 1.0)
            return monge_polar(expression, params, rho_max=rho_max)
        except SpecError:
            raise
        except Exception as exc:  # parse errors, cone points
            raise SpecError(f"invalid {kind} expression: {exc}") from exc
    if kind not in CATALOG:
        raise SpecError(f"unknown surface kind {kind!r}; choose from "
                        f"{', '.join(list(CATALOG) + ['monge-cartesian', 'monge-polar'])}")
    factory, required, optional = CATALOG[kind]
    missing = [r for r in required if r not in params]
    if missing:
        raise SpecError(f"surface {kind} requires parameter(s): {', '.join(missing)}")
    unknown = set(params) - set(required) - set(optional)
    if unknown:
        raise SpecError(f"surface {kind} does not take parameter(s): {', '.join(sorted(unknown))}")
    for r in required:
        if params[r] <= 0.0:
            raise SpecError(f"parameter {r} of {kind} must be > 0")
    kwargs = {**optional, **params}
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def builtin_charts() -> list[SurfaceChart]:
    """One representative chart per built-in kind (used by self-checks)."""
    return [plane(), sphere(1.0), cylinder(2.0), torus(2.0, 0.7), catenary(1.0), paraboloid(1.0)]


def sample_points(chart: SurfaceChart, n: int = 10) -> list[tuple[float, float]]:
    """Cell-centred n x n sample grid; chart edges (and polar axes) are skipped."""
    (a0, a1), (b0, b1) = chart.domain
    us = a0 + (np.arange(n) + 0.5) / n * (a1 - a0)
    vs = b0 + (np.arange(n) + 0.5) / n * (b1 - b0)
    return [(float(u), float(v)) for u in us for v in vs]
