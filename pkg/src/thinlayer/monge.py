"""Monge (height-function) parametrisation, Cartesian and polar.

All potentials are in units of hbar^2/m.  Small-slope formulas are only ever
applied when the caller asks for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import expr as ex
from .errors import AxisSingularity
from .geometry import SurfaceChart, geometric_potential

AXIS_SLOPE_TOL = 1e-8


def _from_text(text, variables, params):
    ast = ex.parse(text, variables=variables, parameters=tuple(params))
    return ast


def _bind(ast, names, params):
    params = dict(params)

    def f(*args):
        return ex.evaluate(ast, ex.EvalContext(dict(zip(names, map(float, args))), params))

    return f


@dataclass(frozen=True)
class HeightField:
    """z = H(x, y) with its first and second partials."""

    H: Callable
    Hx: Callable
    Hy: Callable
    Hxx: Callable
    Hxy: Callable
    Hyy: Callable
    domain: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    name: str = "monge"

    @classmethod
    def from_expression(cls, text: str, params: Mapping[str, float] | None = None,
                        domain=((-1.0, 1.0), (-1.0, 1.0)), name=None) -> "HeightField":
        params = dict(params or {})
        ast = _from_text(text, ("x", "y"), params)
        d = ex.differentiate
        hx, hy = d(ast, "x"), d(ast, "y")
        parts = [ast, hx, hy, d(hx, "x"), d(hx, "y"), d(hy, "y")]
        fns = [_bind(a, ("x", "y"), params) for a in parts]
        return cls(*fns, domain=domain, name=name or text)

    @classmethod
    def from_profile(cls, profile: "Profile1D", domain=None) -> "HeightField":
        """H(x, y) = f(x)."""
        zero = lambda x, y: 0.0  # noqa: E731
        dom = domain or (profile.domain, (-1.0, 1.0))
        return cls(H=lambda x, y: profile.f(x), Hx=lambda x, y: profile.df(x), Hy=zero,
                   Hxx=lambda x, y: profile.d2f(x), Hxy=zero, Hyy=zero,
                   domain=dom, name=profile.name)

    def partials(self, x, y):
        return (self.Hx(x, y), self.Hy(x, y), self.Hxx(x, y), self.Hxy(x, y), self.Hyy(x, y))


@dataclass(frozen=True)
class Profile1D:
    """A height profile of one Cartesian coordinate."""

    f: Callable
    df: Callable
    d2f: Callable
    domain: tuple = (-1.0, 1.0)
    name: str = "profile"

    @classmethod
    def from_expression(cls, text, params=None, domain=(-1.0, 1.0), variable="x"):
        params = dict(params or {})
        ast = _from_text(text, (variable,), params)
        d1 = ex.differentiate(ast, variable)
        d2 = ex.differentiate(d1, variable)
        f, df, d2f = (_bind(a, (variable,), params) for a in (ast, d1, d2))
        return cls(f, df, d2f, domain=domain, name=text)


@dataclass(frozen=True)
class RadialProfile:
    """z = H(rho) on [0, rho_max].

    The axis must be smooth (H_rho(0) = 0) unless ``smooth_axis=False``, which
    admits profiles such as ln(rho) that are only used away from the axis.
    """

    H: Callable
    Hr: Callable
    Hrr: Callable
    rho_max: float = 1.0
    name: str = "radial"
    smooth_axis: bool = True

    def __post_init__(self):
        if not self.smooth_axis:
            return
        slope = float(self.Hr(0.0))
        if abs(slope) > AXIS_SLOPE_TOL:
            raise ValueError(f"H_rho(0) = {slope:.3e}: profile has a cone point on the axis")

    @classmethod
    def from_expression(cls, text, params=None, rho_max=1.0, smooth_axis=True) -> "RadialProfile":
        params = dict(params or {})
        ast = _from_text(text, ("rho",), params)
        d1 = ex.differentiate(ast, "rho")
        d2 = ex.differentiate(d1, "rho")
        H, Hr, Hrr = (_bind(a, ("rho",), params) for a in (ast, d1, d2))
        return cls(H, Hr, Hrr, rho_max=rho_max, name=text, smooth_axis=smooth_axis)


# ---------------------------------------------------------------- charts


def monge_chart(field: HeightField) -> SurfaceChart:
    def rmap(x, y):
        return np.array([x, y, field.H(x, y)])

    def first(x, y):
        return np.array([1.0, 0.0, field.Hx(x, y)]), np.array([0.0, 1.0, field.Hy(x, y)])

    def second(x, y):
        return (np.array([0.0, 0.0, field.Hxx(x, y)]),
                np.array([0.0, 0.0, field.Hxy(x, y)]),
                np.array([0.0, 0.0, field.Hyy(x, y)]))

    return SurfaceChart(name=field.name, map=rmap, domain=field.domain, first=first, second=second)


def polar_chart(profile: RadialProfile) -> SurfaceChart:
    """Chart (rho, theta) -> (rho cos theta, rho sin theta, H(rho))."""

    def rmap(r, t):
        return np.array([r * math.cos(t), r * math.sin(t), profile.H(r)])

    def first(r, t):
        c, s = math.cos(t), math.sin(t)
        return np.array([c, s, profile.Hr(r)]), np.array([-r * s, r * c, 0.0])

    def second(r, t):
        c, s = math.cos(t), math.sin(t)
        return (np.array([0.0, 0.0, profile.Hrr(r)]),
                np.array([-s, c, 0.0]),
                np.array([-r * c, -r * s, 0.0]))

    return SurfaceChart(name=profile.name, map=rmap,
                        domain=((0.0, profile.rho_max), (0.0, 2.0 * math.pi)),
                        first=first, second=second)


# --------------------------------------------------- Cartesian formulas


def monge_metric_det(field: HeightField, x, y) -> float:
    """det h = 1 + |grad H|^2."""
    hx, hy = field.Hx(x, y), field.Hy(x, y)
    return 1.0 + hx * hx + hy * hy


def monge_curvatures(field: HeightField, x, y) -> tuple[float, float]:
    """Total curvature K (trace of the shape operator) and Gaussian curvature."""
    hx, hy, hxx, hxy, hyy = field.partials(x, y)
    g = 1.0 + hx * hx + hy * hy
    K = -(hxx * (1.0 + hy * hy) + hyy * (1.0 + hx * hx) - 2.0 * hx * hy * hxy) / g**1.5
    KG = (hxx * hyy - hxy * hxy) / (g * g)
    return K, KG


def monge_potential_exact(field: HeightField, x, y) -> float:
    K, KG = monge_curvatures(field, x, y)
    return -0.125 * (K * K - 4.0 * KG)


def monge_potential_small_slope(field: HeightField, x, y) -> float:
    _, _, hxx, hxy, hyy = field.partials(x, y)
    return -0.125 * ((hxx - hyy) ** 2 + 4.0 * hxy * hxy)


def monge_1d_potential(profile: Profile1D, x, exact: bool = True) -> float:
    """Potential of a surface that bends along one axis only."""
    d1, d2 = profile.df(x), profile.d2f(x)
    if exact:
        return -0.125 * d2 * d2 / (1.0 + d1 * d1) ** 3
    return -0.125 * d2 * d2


# ------------------------------------------------------- polar formulas


def polar_principal_curvatures(profile: RadialProfile, rho, axis_limit: bool = False):
    """(k_rho, k_theta) of a surface of revolution.

    At rho = 0 the chart is singular; pass ``axis_limit=True`` to get the
    limit H_rho / rho -> H_rho_rho(0), where both curvatures coincide.
    """
    if rho == 0.0:
        if not axis_limit:
            raise AxisSingularity("polar curvatures are singular at rho = 0")
        k = -float(profile.Hrr(0.0))
        return k, k
    if rho < 0.0:
        raise ValueError("rho must be non-negative")
    hr, hrr = profile.Hr(rho), profile.Hrr(rho)
    g = 1.0 + hr * hr
    return -hrr / g**1.5, -hr / (rho * math.sqrt(g))


def polar_potential_exact(profile: RadialProfile, rho, axis_limit: bool = False) -> float:
    return geometric_potential(*polar_principal_curvatures(profile, rho, axis_limit))


def polar_potential_small(profile: RadialProfile, rho) -> float:
    if rho == 0.0:
        raise AxisSingularity("small-slope polar potential is singular at rho = 0")
    hr, hrr = profile.Hr(rho), profile.Hrr(rho)
    return -0.125 * (hrr - hr / rho) ** 2
