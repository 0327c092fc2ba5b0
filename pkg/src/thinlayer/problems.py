"""Reduced one-dimensional problems for the catenary and the paraboloid.

Energies are the dimensionless values the reductions produce:

* catenary: E_cat = a^2 * 2 m E_x / hbar^2 (the q-space equation has no a),
* paraboloid: E_par = 2 m E_t / hbar^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FitRejected, TailUnderflow
from .spectral import BC, BoundState, SturmLiouvilleProblem, default_ladder, refine_to_convergence

CATENARY_HALF_WIDTH = 80.0
PARABOLOID_RADIUS = 25.0
DEFAULT_FINEST = 0.005

PARABOLOID_PROFILE_NOTE = (
    "paraboloid height profile taken as H = rho^2/(2a) so that H_rho = rho/a, "
    "matching the line element (1 + rho^2/a^2) and V_S = -rho^4/(8(a^2+rho^2)^3)")
NORMAL_MODE_NOTE = "box normal mode amplitude sqrt(2/eps) (unit norm on [0, eps])"


# ---------------------------------------------------------------- catenary


def catenary_potential_q(q):
    """Binding potential of the q-space catenary equation, V(q) = -1/(4(1+q^2)^2)."""
    q = np.asarray(q, dtype=float)
    return -0.25 / (1.0 + q * q) ** 2


def build_catenary(a: float = 1.0, half_width: float = CATENARY_HALF_WIDTH) -> SturmLiouvilleProblem:
    """-X'' + V(q) X = E X on [-L, L] with q = sinh(x/a)."""
    if not a > 0:
        raise ValueError("a must be positive")
    one = lambda q: np.ones_like(np.asarray(q, dtype=float))  # noqa: E731
    return SturmLiouvilleProblem(
        p=one, q=catenary_potential_q, w=one,
        domain=(-half_width, half_width),
        bc_left=BC.DIRICHLET, bc_right=BC.DIRICHLET,
        measure=one, name=f"catenary(a={a:g})", expansion_point=0.0,
        metadata={"surface": "catenary", "a": a, "coordinate": "q", "half_width": half_width},
    )


def catenary_physical_energy(energy: float, a: float) -> float:
    """2 m E_x / hbar^2 from the a-free q-space eigenvalue."""
    return energy / (a * a)


def catenary_q_of_x(x, a):
    return np.sinh(np.asarray(x, dtype=float) / a)


def catenary_x_of_q(q, a):
    return a * np.arcsinh(np.asarray(q, dtype=float))


@dataclass
class PulledBackState:
    x: np.ndarray
    samples: np.ndarray
    norm: float


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def catenary_pullback(state: BoundState, a: float, tol: float = 1e-6) -> PulledBackState:
    """Re-express a q-space state on x = a asinh(q).

    dq = cosh(x/a)/a dx, so the q-space norm is recomputed on the (non-uniform)
    x nodes with that density and compared with the original.
    """
    q = np.asarray(state.nodes, dtype=float)
    y = np.asarray(state.samples, dtype=float)
    x = catenary_x_of_q(q, a)
    density = np.cosh(x / a) / a
    # Dirichlet ends contribute zero; include them so the trapezoid spans the domain
    lo, hi = state.problem.domain if state.problem is not None else (q[0], q[-1])
    xs = np.concatenate(([catenary_x_of_q(lo, a)], x, [catenary_x_of_q(hi, a)]))
    ys = np.concatenate(([0.0], y, [0.0]))
    ds = np.concatenate(([math.cosh(xs[0] / a) / a], density, [math.cosh(xs[-1] / a) / a]))
    norm = _trapezoid(ys * ys * ds, xs)
    if abs(norm - state.norm) > tol * max(1.0, abs(state.norm)):
        raise ValueError(f"pullback changed the norm: {norm!r} vs {state.norm!r}")
    return PulledBackState(x=x, samples=y, norm=norm)


# -------------------------------------------------------------- paraboloid


@dataclass(frozen=True)
class ParaboloidCoefficients:
    """Raw radial coefficients: -R'' + c1 R' + (centrifugal + potential) R = weight E R."""

    a: float
    l: int

    def first_derivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        return -self.a**2 / (rho * (self.a**2 + rho**2))

    def centrifugal(self, rho):
        rho = np.asarray(rho, dtype=float)
        return self.l**2 * (self.a**2 + rho**2) / (self.a**2 * rho**2)

    def potential(self, rho):
        rho = np.asarray(rho, dtype=float)
        return -rho**4 / (4.0 * self.a**2 * (self.a**2 + rho**2) ** 2)

    def weight(self, rho):
        rho = np.asarray(rho, dtype=float)
        return (self.a**2 + rho**2) / self.a**2

    def surface_potential(self, rho):
        """V_S m / hbar^2 recovered from the potential term."""
        rho = np.asarray(rho, dtype=float)
        return 0.5 * self.potential(rho) / self.weight(rho)


def paraboloid_flux(rho, a):
    """Integrating factor rho / sqrt(a^2 + rho^2) of the radial equation."""
    rho = np.asarray(rho, dtype=float)
    return rho / np.sqrt(a * a + rho * rho)


def build_paraboloid(a: float = 1.0, l: int = 0, radius: float | None = None,
                     measure: str = "rho2") -> SturmLiouvilleProblem:
    """Symmetrised radial problem of the paraboloid in channel ``l``.

    Multiplying the raw equation by the integrating factor p gives
    -(p R')' + p (centrifugal + potential) R = E p weight R.  l = 0 uses the
    regular-axis condition, l >= 1 vanishes on the axis.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    l = abs(int(l))
    coeffs = ParaboloidCoefficients(a=a, l=l)
    L = PARABOLOID_RADIUS * a if radius is None else radius
    p = lambda r: paraboloid_flux(r, a)  # noqa: E731

    def q(r):
        r = np.asarray(r, dtype=float)
        out = p(r) * coeffs.potential(r)
        if l:
            out = out + p(r) * coeffs.centrifugal(r)
        return out

    w = lambda r: p(r) * coeffs.weight(r)  # noqa: E731
    return SturmLiouvilleProblem(
        p=p, q=q, w=w, domain=(0.0, L),
        bc_left=BC.REGULAR_AXIS if l == 0 else BC.DIRICHLET, bc_right=BC.DIRICHLET,
        measure=PARABOLOID_MEASURES[measure](a), name=f"paraboloid(a={a:g},l={l})",
        expansion_point=0.0,
        metadata={"surface": "paraboloid", "a": a, "l": l, "coordinate": "rho",
                  "radius": L, "measure": measure, "coefficients": coeffs,
                  "note": PARABOLOID_PROFILE_NOTE},
    )


PARABOLOID_MEASURES = {
    "rho2": lambda a: (lambda r: np.asarray(r, dtype=float) ** 2),
    "surface": lambda a: (lambda r: np.asarray(r, dtype=float)
                          * np.sqrt(1.0 + np.asarray(r, dtype=float) ** 2 / a**2)),
    "flat": lambda a: (lambda r: np.asarray(r, dtype=float)),
}


def solve_catenary(a: float = 1.0, finest: float = DEFAULT_FINEST, levels: int = 3,
                   half_width: float = CATENARY_HALF_WIDTH, backend=None, **kw) -> BoundState:
    problem = build_catenary(a, half_width)
    return refine_to_convergence(problem, default_ladder(finest, levels), backend=backend, **kw)


def solve_paraboloid(a: float = 1.0, l: int = 0, finest: float | None = None, levels: int = 3,
                     radius: float | None = None, measure: str = "rho2", backend=None,
                     **kw) -> BoundState:
    problem = build_paraboloid(a, l, radius, measure)
    finest = DEFAULT_FINEST * a if finest is None else finest
    return refine_to_convergence(problem, default_ladder(finest, levels), backend=backend, **kw)


# ------------------------------------------------------------ diagnostics


def value_at_expansion_point(state: BoundState) -> float:
    """Eigenfunction value at the problem's expansion point.

    On a node that value is read directly; at the axis of a cell-centred grid
    (first node at h/2) it is extrapolated with an even quadratic in rho.
    """
    x = np.asarray(state.nodes)
    y = np.asarray(state.samples)
    x0 = state.problem.expansion_point if state.problem is not None else 0.0
    i = int(np.argmin(np.abs(x - x0)))
    if abs(x[i] - x0) <= 1e-12 * max(1.0, abs(x0)):
        return float(y[i])
    s = (x[:3] - x0) ** 2
    coef = np.polyfit(s, y[:3], 2)
    return float(coef[-1])


def normalization_constant(state: BoundState, measure=None, window=None) -> float:
    """Integral of y^2 * measure for the state rescaled to 1 at its expansion point.

    ``measure`` is a callable or a paraboloid measure name ("rho2", "surface",
    "flat"); default is the problem's own measure.  ``window=(lo, hi)``
    restricts the integral to part of the domain.
    """
    from .spectral import make_grid

    problem = state.problem
    if measure is None:
        density = problem.measure
    elif callable(measure):
        density = measure
    else:
        density = PARABOLOID_MEASURES[measure](problem.metadata.get("a", 1.0))
    y = np.asarray(state.samples) / value_at_expansion_point(state)
    x = np.asarray(state.nodes)
    grid = make_grid(problem, state.spacings[-1])
    weights = grid.quad * np.asarray(density(x), dtype=float) * np.ones_like(x)
    if window is not None:
        lo, hi = window
        tol = 1e-9 * grid.spacing
        weights = np.where((x >= lo - tol) & (x <= hi + tol), weights, 0.0)
        # trapezoid: nodes sitting on a window edge carry half weight
        edge = (np.abs(x - lo) <= tol) | (np.abs(x - hi) <= tol)
        weights = np.where(edge, 0.5 * weights, weights)
    return float(np.sum(weights * y * y))


def decay_prefactor_check(state: BoundState, a: float = 1.0, window=(0.6, 0.9),
                          floor: float = 1e-14, min_r2: float = 0.999) -> float:
    """Fit -ln|R| against rho^2/(2a) on the tail window (fractions of the domain end).

    A Gaussian-type tail exp(-c rho^2 / (2a)) returns c.  Non-decaying or
    non-linear tails raise FitRejected; values under ``floor * max|R|``
    raise TailUnderflow.
    """
    x = np.asarray(state.nodes, dtype=float)
    y = np.abs(np.asarray(state.samples, dtype=float))
    L = state.problem.domain[1] if state.problem is not None else x[-1]
    mask = (x >= window[0] * L) & (x <= window[1] * L)
    if np.count_nonzero(mask) < 3:
        raise FitRejected("too few samples in the tail window")
    tail = y[mask]
    if np.any(tail <= floor * np.max(y)):
        raise TailUnderflow(f"tail samples fall below {floor:g} of the peak")
    s = x[mask] ** 2 / (2.0 * a)
    f = -np.log(tail)
    slope, icpt = np.polyfit(s, f, 1)
    resid = f - (slope * s + icpt)
    total = np.sum((f - f.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / total if total > 0 else 0.0
    if slope <= 0.0 or r2 < min_r2:
        raise FitRejected(f"tail is not Gaussian-like (slope {slope:.3g}, R^2 {r2:.4f})")
    return float(slope)


# ------------------------------------------------------------ normal modes


@dataclass(frozen=True)
class NormalMode:
    """Mode nu of the normal box of thickness eps; energy is 2 m E_n / hbar^2."""

    thickness: float
    nu: int

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError("layer thickness must be positive")
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError("normal quantum number nu must be an integer >= 1")

    @property
    def energy(self) -> float:
        return (self.nu * math.pi / self.thickness) ** 2

    @property
    def amplitude(self) -> float:
        return math.sqrt(2.0 / self.thickness)

    def wavefunction(self, u3):
        u3 = np.asarray(u3, dtype=float)
        inside = (u3 >= 0.0) & (u3 <= self.thickness)
        return np.where(inside, self.amplitude * np.sin(self.nu * math.pi * u3 / self.thickness), 0.0)


def normal_mode(thickness: float, nu: int) -> NormalMode:
    return NormalMode(thickness=thickness, nu=nu)


def total_energy(tangential: float, normal: NormalMode) -> float:
    """E_t + E_n, both as 2 m E / hbar^2."""
    if not isinstance(normal, NormalMode):
        raise TypeError("normal must be a NormalMode")
    return float(tangential) + normal.energy


# ----------------------------------------------------------------- export


def problem_to_json(problem: SturmLiouvilleProblem, spacing: float) -> dict:
    """Coefficients sampled on the grid the solver would use."""
    from .spectral import make_grid

    grid = make_grid(problem, spacing)
    x = grid.nodes
    faces = problem.domain[0] + np.arange(grid.cells + 1) * grid.spacing
    ones = np.ones_like(x)
    meta = {k: v for k, v in problem.metadata.items() if isinstance(v, (int, float, str))}
    return {
        "name": problem.name,
        "domain": list(problem.domain),
        "bc_left": problem.bc_left.value,
        "bc_right": problem.bc_right.value,
        "spacing": grid.spacing,
        "grid_kind": grid.kind,
        "nodes": x.tolist(),
        "faces": faces.tolist(),
        "p_faces": (np.asarray(problem.p(faces)) * np.ones_like(faces)).tolist(),
        "q": (np.asarray(problem.q(x)) * ones).tolist(),
        "w": (np.asarray(problem.w(x)) * ones).tolist(),
        "measure": (np.asarray(problem.measure(x)) * ones).tolist(),
        "metadata": meta,
    }
