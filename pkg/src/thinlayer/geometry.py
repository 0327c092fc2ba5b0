"""Frames, fundamental forms and curvatures of parametrised surfaces.

Conventions: the unit normal is ``n = e1 x e2 / |e1 x e2|`` (chart order
fixes orientation) and the second fundamental form is ``k_ab = -n . r_ab``.
Potentials are returned in units of hbar^2/m, i.e. ``vs_coeff = V_S m/hbar^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import DegenerateChart, FoldedLayer, OutsideDomain

_EPS = np.finfo(np.float64).eps
FD_RELATIVE_STEP = 1e-5


class SurfacePoint(NamedTuple):
    u1: float
    u2: float


def as_point(p) -> SurfacePoint:
    u1, u2 = float(p[0]), float(p[1])
    if not (math.isfinite(u1) and math.isfinite(u2)):
        raise ValueError(f"non-finite chart coordinates {p!r}")
    return SurfacePoint(u1, u2)


@dataclass(frozen=True)
class SurfaceChart:
    """A map (u1, u2) -> R^3 with optional exact derivatives.

    ``first(u1, u2)`` returns ``(r_1, r_2)`` and ``second(u1, u2)`` returns
    ``(r_11, r_12, r_22)``.  Missing providers fall back to central
    differences with per-axis step ``fd_step`` (default 1e-5 of the domain
    extent); second derivatives then use nested central stencils.
    """

    name: str
    map: Callable
    domain: tuple
    first: Optional[Callable] = None
    second: Optional[Callable] = None
    fd_step: Optional[tuple] = None

    @property
    def has_exact(self) -> bool:
        return self.first is not None and self.second is not None

    @property
    def steps(self) -> tuple[float, float]:
        if self.fd_step is not None:
            return float(self.fd_step[0]), float(self.fd_step[1])
        (a0, a1), (b0, b1) = self.domain
        return FD_RELATIVE_STEP * (a1 - a0), FD_RELATIVE_STEP * (b1 - b0)

    def contains(self, p) -> bool:
        (a0, a1), (b0, b1) = self.domain
        return a0 <= p[0] <= a1 and b0 <= p[1] <= b1

    def position(self, p) -> np.ndarray:
        return np.asarray(self.map(p[0], p[1]), dtype=float)

    def tangents(self, p):
        if self.first is not None:
            r1, r2 = self.first(p[0], p[1])
            return np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
        h1, h2 = self.steps
        u, v = p[0], p[1]
        r1 = (self.position((u + h1, v)) - self.position((u - h1, v))) / (2 * h1)
        r2 = (self.position((u, v + h2)) - self.position((u, v - h2))) / (2 * h2)
        return r1, r2

    def second_partials(self, p):
        if self.second is not None:
            r11, r12, r22 = self.second(p[0], p[1])
            return (np.asarray(r11, dtype=float), np.asarray(r12, dtype=float),
                    np.asarray(r22, dtype=float))
        h1, h2 = self.steps
        u, v = p[0], p[1]
        if self.first is not None:
            t = lambda a, b: self.first(a, b)  # noqa: E731
            r11 = (np.asarray(t(u + h1, v)[0]) - np.asarray(t(u - h1, v)[0])) / (2 * h1)
            r22 = (np.asarray(t(u, v + h2)[1]) - np.asarray(t(u, v - h2)[1])) / (2 * h2)
            r12 = (np.asarray(t(u, v + h2)[0]) - np.asarray(t(u, v - h2)[0])) / (2 * h2)
            return r11, r12, r22
        r = self.position
        c = r((u, v))
        r11 = (r((u + 2 * h1, v)) - 2 * c + r((u - 2 * h1, v))) / (4 * h1 * h1)
        r22 = (r((u, v + 2 * h2)) - 2 * c + r((u, v - 2 * h2))) / (4 * h2 * h2)
        r12 = (r((u + h1, v + h2)) - r((u + h1, v - h2))
               - r((u - h1, v + h2)) + r((u - h1, v - h2))) / (4 * h1 * h2)
        return r11, r12, r22

    # -- derived charts -------------------------------------------------

    def finite_difference(self, fd_step=None) -> "SurfaceChart":
        """Same map with all derivatives from finite differences."""
        return replace(self, first=None, second=None, fd_step=fd_step,
                       name=f"{self.name}[fd]")

    def transformed(self, rotation, translation) -> "SurfaceChart":
        """Chart of the rigidly moved surface ``R r + t``."""
        R = np.asarray(rotation, dtype=float)
        t = np.asarray(translation, dtype=float)
        base = self
        first = second = None
        if base.first is not None:
            def first(u, v):
                r1, r2 = base.first(u, v)
                return R @ np.asarray(r1, float), R @ np.asarray(r2, float)
        if base.second is not None:
            def second(u, v):
                return tuple(R @ np.asarray(s, float) for s in base.second(u, v))
        return SurfaceChart(name=f"{self.name}[moved]",
                            map=lambda u, v: R @ np.asarray(base.map(u, v), float) + t,
                            domain=self.domain, first=first, second=second,
                            fd_step=self.fd_step)

    def swapped(self) -> "SurfaceChart":
        """Chart with u1 and u2 exchanged (reverses the normal)."""
        base = self
        first = second = None
        if base.first is not None:
            def first(u, v):
                r1, r2 = base.first(v, u)
                return r2, r1
        if base.second is not None:
            def second(u, v):
                r11, r12, r22 = base.second(v, u)
                return r22, r12, r11
        fd = None if self.fd_step is None else (self.fd_step[1], self.fd_step[0])
        return SurfaceChart(name=f"{self.name}[swapped]", map=lambda u, v: base.map(v, u),
                            domain=(self.domain[1], self.domain[0]), first=first,
                            second=second, fd_step=fd)


@dataclass(frozen=True)
class Frame:
    e1: np.ndarray
    e2: np.ndarray
    n: np.ndarray
    area: float  # |e1 x e2|


@dataclass(frozen=True)
class FundamentalForms:
    """First form ``h``, second form ``k`` and shape operator.

    ``k_mixed = h^{-1} k``; its entry ``[b, a]`` is the mixed component
    k_a^b, so that the Weingarten relation reads d_a n = sum_b k_mixed[b, a] e_b.
    """

    h: np.ndarray
    k: np.ndarray
    k_mixed: np.ndarray
    frame: Frame

    @property
    def h_det(self) -> float:
        h = self.h
        return float(h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0])


@dataclass(frozen=True)
class CurvatureReport:
    k1: float
    k2: float
    K: float
    KG: float
    vs_coeff: float
    forms: Optional[FundamentalForms] = None

    def as_dict(self) -> dict:
        return {"k1": self.k1, "k2": self.k2, "K": self.K, "KG": self.KG,
                "vs_coeff": self.vs_coeff}


def _check_inside(chart, p):
    if not chart.contains(p):
        raise OutsideDomain(f"point {tuple(p)} outside domain {chart.domain} of {chart.name}")


def _frame_from(e1, e2) -> Frame:
    c = np.cross(e1, e2)
    area = float(np.linalg.norm(c))
    if area < 1e-12 * np.linalg.norm(e1) * np.linalg.norm(e2) or area == 0.0:
        raise DegenerateChart(f"tangent vectors are parallel (|e1 x e2| = {area:.3e})")
    return Frame(e1=e1, e2=e2, n=c / area, area=area)


def evaluate_frame(chart: SurfaceChart, p) -> Frame:
    p = as_point(p)
    _check_inside(chart, p)
    e1, e2 = chart.tangents(p)
    return _frame_from(e1, e2)


def fundamental_forms(chart: SurfaceChart, p) -> FundamentalForms:
    frame = evaluate_frame(chart, p)
    e1, e2, n = frame.e1, frame.e2, frame.n
    r11, r12, r22 = chart.second_partials(as_point(p))
    h12 = float(e1 @ e2)
    h = np.array([[float(e1 @ e1), h12], [h12, float(e2 @ e2)]])
    k12 = -float(n @ r12)
    k = np.array([[-float(n @ r11), k12], [k12, -float(n @ r22)]])
    det = h[0, 0] * h[1, 1] - h12 * h12
    hinv = np.array([[h[1, 1], -h12], [-h12, h[0, 0]]]) / det
    return FundamentalForms(h=h, k=k, k_mixed=hinv @ k, frame=frame)


def principal_curvatures(forms: FundamentalForms) -> tuple[float, float]:
    """Eigenvalues of the shape operator, ``k1 >= k2``."""
    S = forms.k_mixed
    half_trace = 0.5 * (S[0, 0] + S[1, 1])
    det = S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    # (tr/2)^2 - det written without the cancellation
    disc = (0.5 * (S[0, 0] - S[1, 1])) ** 2 + S[0, 1] * S[1, 0]
    s = math.sqrt(max(disc, 0.0))
    big = half_trace + math.copysign(s, half_trace)
    small = det / big if big != 0.0 else half_trace - math.copysign(s, half_trace)
    return (big, small) if big >= small else (small, big)


def geometric_potential(k1: float, k2: float) -> float:
    """Geometric potential in units hbar^2/m: ``-(k1 - k2)^2 / 8``."""
    return -0.125 * (k1 - k2) ** 2


def curvature_report(chart: SurfaceChart, p) -> CurvatureReport:
    forms = fundamental_forms(chart, p)
    k1, k2 = principal_curvatures(forms)
    S = forms.k_mixed
    return CurvatureReport(
        k1=k1, k2=k2,
        K=float(S[0, 0] + S[1, 1]),
        KG=float(S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]),
        vs_coeff=geometric_potential(k1, k2),
        forms=forms,
    )


def ambient_metric_det(report: CurvatureReport, h_det: float, u3: float) -> float:
    """det g at normal offset u3 from the factorised form h (1 + u3 K + u3^2 KG)^2."""
    omega = 1.0 + u3 * report.K + u3 * u3 * report.KG
    if omega <= 0.0 or _folds_before(report.K, report.KG, u3):
        raise FoldedLayer(f"1 + t K + t^2 KG vanishes for some t between 0 and u3 = {u3}")
    return h_det * omega * omega


def _folds_before(K, KG, u3):
    # a root of 1 + tK + t^2 KG strictly between 0 and u3 means the normal
    # segment crossed a focal point even if omega(u3) is positive again
    if KG == 0.0:
        roots = [-1.0 / K] if K != 0.0 else []
    else:
        disc = K * K - 4.0 * KG
        if disc < 0.0:
            return False
        sq = math.sqrt(disc)
        roots = [(-K - sq) / (2.0 * KG), (-K + sq) / (2.0 * KG)]
    lo, hi = min(0.0, u3), max(0.0, u3)
    return any(lo < t < hi or t == u3 for t in roots)


def ambient_metric(forms: FundamentalForms, u3: float) -> np.ndarray:
    """g_ab(u3) summed index by index from h, the shape operator and u3."""
    h = forms.h
    mixed = forms.k_mixed.T  # mixed[a, c] = k_a^c
    g = np.empty((2, 2))
    for a in range(2):
        for b in range(2):
            lin = sum(mixed[a, c] * h[c, b] for c in range(2))
            quad = sum(mixed[a, c] * mixed[b, d] * h[c, d] for c in range(2) for d in range(2))
            g[a, b] = h[a, b] + 2.0 * u3 * lin + u3 * u3 * quad
    return g


def ambient_metric_det_direct(forms: FundamentalForms, u3: float) -> float:
    g = ambient_metric(forms, u3)
    return float(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0])


def _normal_derivatives_analytic(chart, p, frame):
    r11, r12, r22 = chart.second_partials(p)
    e1, e2, n = frame.e1, frame.e2, frame.n
    out = []
    for r1a, r2a in ((r11, r12), (r12, r22)):
        dc = np.cross(r1a, e2) + np.cross(e1, r2a)
        out.append((dc - n * (n @ dc)) / frame.area)
    return out


def _normal_derivatives_fd(chart, p):
    h1, h2 = chart.steps
    u, v = p
    n = lambda q: _frame_from(*chart.tangents(q)).n  # noqa: E731
    return [(n((u + h1, v)) - n((u - h1, v))) / (2 * h1),
            (n((u, v + h2)) - n((u, v - h2))) / (2 * h2)]


def weingarten_residual(chart: SurfaceChart, p, method: str | None = None,
                        forms: FundamentalForms | None = None) -> float:
    """Relative mismatch of d_a n against k_a^b e_b, maximised over a.

    ``method="analytic"`` differentiates n through the chart's second
    partials; ``"fd"`` differences the normal field.  Each residual is scaled
    by ``|k_a^b e_b| + kmax |e_a| + eps`` where kmax is the larger principal
    curvature magnitude.  ``forms`` overrides the computed forms (used to
    check that corrupted forms are caught).
    """
    p = as_point(p)
    if forms is None:
        forms = fundamental_forms(chart, p)
    frame = forms.frame
    if method is None:
        method = "analytic" if chart.has_exact else "fd"
    if method == "analytic":
        dn = _normal_derivatives_analytic(chart, p, frame)
    elif method == "fd":
        dn = _normal_derivatives_fd(chart, p)
    else:
        raise ValueError(f"unknown method {method!r}")
    k1, k2 = principal_curvatures(forms)
    kmax = max(abs(k1), abs(k2))
    S = forms.k_mixed
    es = (frame.e1, frame.e2)
    worst = 0.0
    for a in range(2):
        rhs = S[0, a] * frame.e1 + S[1, a] * frame.e2
        denom = np.linalg.norm(rhs) + kmax * np.linalg.norm(es[a]) + _EPS
        worst = max(worst, float(np.linalg.norm(dn[a] - rhs) / denom))
    return worst
