"""Finite-difference Sturm–Liouville eigensolver.

Solves ``-(p y')' + q y = E w y`` on a truncated interval.  The operator is
discretised in flux form (p sampled at half nodes), which gives a symmetric
tridiagonal ``A`` and a positive diagonal ``B``.  The pencil is reduced to
``B^{-1/2} A B^{-1/2}``; eigenvalues come from Sturm-sequence bisection and
eigenvectors from inverse iteration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import ConvergenceFailure, NonPositiveWeight, NotConverged
from ._kernels import get_kernels, pivot_floor

MIN_POINTS = 64
_EPS = np.finfo(np.float64).eps


class BC(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    REGULAR_AXIS = "regular-axis"


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class SturmLiouvilleProblem:
    """Coefficients, interval and boundary conditions of a 1D eigenproblem.

    ``p``, ``q``, ``w`` and ``measure`` must accept numpy arrays.  ``measure``
    is the density used when normalising eigenfunctions; it defaults to 1
    and need not equal ``w``.
    """

    p: Callable
    q: Callable
    w: Callable
    domain: tuple[float, float]
    bc_left: BC = BC.DIRICHLET
    bc_right: BC = BC.DIRICHLET
    measure: Callable = _one
    name: str = "sturm-liouville"
    expansion_point: Optional[float] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError(f"invalid domain {self.domain}")
        object.__setattr__(self, "bc_left", BC(self.bc_left))
        object.__setattr__(self, "bc_right", BC(self.bc_right))
        if self.bc_right is BC.REGULAR_AXIS:
            raise ValueError("regular-axis condition is only supported at the left end")


@dataclass(frozen=True)
class Grid:
    """Unknown nodes of a discretisation plus their quadrature weights."""

    nodes: np.ndarray
    spacing: float
    kind: str  # "vertex" or "cell"
    quad: np.ndarray
    cells: int

    @property
    def n(self) -> int:
        return self.nodes.shape[0]


def make_grid(problem: SturmLiouvilleProblem, spacing: float) -> Grid:
    x0, x1 = problem.domain
    cells = int(round((x1 - x0) / spacing))
    if cells < 2:
        raise ValueError(f"spacing {spacing} too coarse for domain {problem.domain}")
    h = (x1 - x0) / cells
    if problem.bc_left is BC.REGULAR_AXIS:
        nodes = x0 + (np.arange(cells) + 0.5) * h
        quad = np.full(cells, h)
        kind = "cell"
    else:
        nodes = x0 + np.arange(cells + 1) * h
        quad = np.full(cells + 1, h)
        quad[0] = quad[-1] = 0.5 * h
        keep = np.ones(cells + 1, dtype=bool)
        if problem.bc_left is BC.DIRICHLET:
            keep[0] = False
        if problem.bc_right is BC.DIRICHLET:
            keep[-1] = False
        nodes, quad = nodes[keep], quad[keep]
        kind = "vertex"
    if nodes.shape[0] < MIN_POINTS:
        raise ValueError(f"grid has {nodes.shape[0]} points; at least {MIN_POINTS} required")
    return Grid(nodes=nodes, spacing=h, kind=kind, quad=quad, cells=cells)


@dataclass(frozen=True)
class Pencil:
    """Generalised tridiagonal pair: A = tridiag(off, diag, off), B = diag(weight)."""

    diag: np.ndarray
    off: np.ndarray
    weight: np.ndarray
    grid: Grid

    def reduced(self):
        s = np.sqrt(self.weight)
        return self.diag / self.weight, self.off / (s[:-1] * s[1:])

    def apply_a(self, y):
        out = self.diag * y
        out[:-1] += self.off * y[1:]
        out[1:] += self.off * y[:-1]
        return out


def _check_positive(name, values):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise NonPositiveWeight(f"{name} must be positive and finite on the grid")


def discretize(problem: SturmLiouvilleProblem, grid: Grid) -> Pencil:
    """Flux-form second-order finite differences of the problem on ``grid``."""
    x0, _ = problem.domain
    h = grid.spacing
    N = grid.cells
    faces = x0 + np.arange(N + 1) * h
    if grid.kind == "cell":
        # flux p(y_i - y_{i-1}) across face i; the axis face carries no flux
        nodes = grid.nodes
        pf = np.asarray(problem.p(faces[1:]), dtype=float)
        _check_positive("p", pf)
        q = np.asarray(problem.q(nodes), dtype=float) * _one(nodes)
        w = np.asarray(problem.w(nodes), dtype=float) * _one(nodes)
        _check_positive("w", w)
        left = np.concatenate(([0.0], pf[:-1]))
        right = pf.copy()
        if problem.bc_right is BC.DIRICHLET:
            right[-1] *= 2.0  # antisymmetric ghost: y vanishes on the face
        elif problem.bc_right is BC.NEUMANN:
            right[-1] = 0.0
        diag = (left + right) / h**2 + q
        off = -pf[:-1] / h**2
        weight = w
    else:
        full = x0 + np.arange(N + 1) * h
        mids = 0.5 * (faces[:-1] + faces[1:])
        pm = np.asarray(problem.p(mids), dtype=float) * _one(mids)
        _check_positive("p", pm)
        lo = 1 if problem.bc_left is BC.DIRICHLET else 0
        hi = N if problem.bc_right is BC.DIRICHLET else N + 1
        # coefficients only at kept nodes: Dirichlet ends may be singular points
        q = np.zeros(N + 1)
        w_full = np.ones(N + 1)
        q[lo:hi] = np.asarray(problem.q(full[lo:hi]), dtype=float) * _one(full[lo:hi])
        w_full[lo:hi] = np.asarray(problem.w(full[lo:hi]), dtype=float) * _one(full[lo:hi])
        left = np.concatenate(([0.0], pm))
        right = np.concatenate((pm, [0.0]))
        diag = (left + right) / h**2 + q
        off = -pm / h**2
        weight = w_full.copy()
        if problem.bc_left is BC.NEUMANN:  # mirrored ghost, half row keeps symmetry
            diag[0] = pm[0] / h**2 + 0.5 * q[0]
            weight[0] *= 0.5
        if problem.bc_right is BC.NEUMANN:
            diag[N] = pm[-1] / h**2 + 0.5 * q[N]
            weight[N] *= 0.5
        diag = diag[lo:hi]
        off = off[lo : hi - 1]
        weight = weight[lo:hi]
        _check_positive("w", weight)
    return Pencil(diag=np.ascontiguousarray(diag), off=np.ascontiguousarray(off),
                  weight=np.ascontiguousarray(weight), grid=grid)


def _gershgorin(d, e):
    ae = np.abs(e)
    r = np.zeros_like(d)
    r[:-1] += ae
    r[1:] += ae
    return float(np.min(d - r)), float(np.max(d + r))


def _tridiag_mul(d, e, y):
    out = d * y
    out[:-1] += e * y[1:]
    out[1:] += e * y[:-1]
    return out


def count_below(pencil: Pencil, threshold: float, backend: str | None = None) -> int:
    """Number of generalised eigenvalues strictly below ``threshold``."""
    K = get_kernels(backend)
    d, e = pencil.reduced()
    e2 = e * e
    return int(K.sturm_count(d, e2, float(threshold), pivot_floor(e2)))


def count_negative(pencil: Pencil, backend: str | None = None) -> int:
    """Number of generalised eigenvalues strictly below zero."""
    return count_below(pencil, 0.0, backend)


def lowest_eigenpairs(pencil: Pencil, count: int, backend: str | None = None,
                      max_iter: int = 30):
    """The ``count`` smallest eigenpairs of the pencil.

    Eigenvectors are returned B-orthonormal (``v.T @ diag(B) @ v = I``) with
    the largest-magnitude entry positive.
    """
    K = get_kernels(backend)
    d, e = pencil.reduced()
    n = d.shape[0]
    count = min(int(count), n)
    e2 = e * e
    pivmin = pivot_floor(e2)
    lo, hi = _gershgorin(d, e)
    pad = 2.0 * _EPS * max(abs(lo), abs(hi)) + pivmin
    evals = K.bisect(d, e2, 0, count, lo - pad, hi + pad, pivmin)
    tnorm = max(abs(lo), abs(hi))
    pivfloor = _EPS * tnorm
    tol = 1000.0 * _EPS * tnorm
    rng = np.random.default_rng(20240531)
    start = rng.standard_normal(n)
    vectors = []
    pairs = []
    for lam in evals:
        z = start / np.linalg.norm(start)
        settled = False
        resid = float("inf")
        for _ in range(max_iter):
            z = K.shifted_solve(d, e, lam, z, pivfloor)
            for v in vectors:
                z -= (v @ z) * v
            z /= np.linalg.norm(z)
            resid = np.linalg.norm(_tridiag_mul(d, e, z) - lam * z)
            if settled:
                break
            if resid <= tol:
                settled = True  # one extra sweep to polish
        else:
            raise ConvergenceFailure(
                f"inverse iteration for eigenvalue {lam:.6g} did not converge "
                f"(residual {resid:.3e}, tolerance {tol:.3e})")
        if z[np.argmax(np.abs(z))] < 0:
            z = -z
        vectors.append(z)
        pairs.append((float(lam), z / np.sqrt(pencil.weight)))
    return pairs


def node_count(samples, rel: float = 1e-10) -> int:
    """Interior sign changes, ignoring entries below ``rel * max|y|``."""
    y = np.asarray(samples, dtype=float)
    if y.size == 0:
        return 0
    big = y[np.abs(y) > rel * np.max(np.abs(y))]
    return int(np.count_nonzero(np.signbit(big[1:]) != np.signbit(big[:-1])))


@dataclass
class BoundState:
    energy: float
    nodes: np.ndarray
    samples: np.ndarray
    node_count: int
    norm: float
    converged: bool
    residual: float
    index: int = 0
    level_energies: list = field(default_factory=list)
    extrapolations: list = field(default_factory=list)
    spacings: list = field(default_factory=list)
    observed_order: float = float("nan")
    problem: Optional[SturmLiouvilleProblem] = None

    def summary(self) -> dict:
        return {
            "index": self.index,
            "energy": self.energy,
            "node_count": self.node_count,
            "norm": self.norm,
            "converged": self.converged,
            "residual": self.residual,
            "level_energies": list(self.level_energies),
            "extrapolations": list(self.extrapolations),
            "spacings": list(self.spacings),
            "observed_order": self.observed_order,
        }


@dataclass
class SpectrumReport:
    eigenvalues: list
    threshold: float
    spacing: float
    n: int

    @property
    def count(self) -> int:
        return len(self.eigenvalues)


def integrate(grid: Grid, values) -> float:
    return float(np.sum(grid.quad * values))


def normalize_samples(problem: SturmLiouvilleProblem, grid: Grid, y):
    norm = integrate(grid, np.asarray(problem.measure(grid.nodes)) * _one(grid.nodes) * y * y)
    return y / math.sqrt(norm)


def spectrum_below(problem: SturmLiouvilleProblem, spacing: float, threshold: float = 0.0,
                   backend: str | None = None) -> SpectrumReport:
    grid = make_grid(problem, spacing)
    pencil = discretize(problem, grid)
    k = count_below(pencil, threshold, backend)
    vals = [lam for lam, _ in lowest_eigenpairs(pencil, k, backend)] if k else []
    return SpectrumReport(eigenvalues=sorted(vals), threshold=threshold,
                          spacing=grid.spacing, n=grid.n)


def default_ladder(finest: float, levels: int = 3) -> list[float]:
    return [finest * 2.0 ** (levels - 1 - i) for i in range(levels)]


def refine_to_convergence(problem: SturmLiouvilleProblem, spacings: Sequence[float],
                          index: int = 0, tol: float = 1e-7, backend: str | None = None,
                          raise_on_failure: bool = True) -> BoundState:
    """Richardson-extrapolated eigenvalue ``index`` over a halving grid ladder.

    Successive second-order extrapolations must agree to ``tol``.  The
    eigenfunction comes from the finest grid, normalised under
    ``problem.measure``.
    """
    spacings = sorted((float(s) for s in spacings), reverse=True)
    if len(spacings) < 3:
        raise ValueError("refinement needs at least three grids")
    energies = []
    last = None
    for h in spacings:
        grid = make_grid(problem, h)
        pencil = discretize(problem, grid)
        pairs = lowest_eigenpairs(pencil, index + 1, backend)
        lam, vec = pairs[index]
        energies.append(lam)
        last = (grid, vec)
    actual = [make_grid(problem, h).spacing for h in spacings]
    extrap = []
    for j in range(len(energies) - 1):
        r2 = (actual[j] / actual[j + 1]) ** 2
        extrap.append((r2 * energies[j + 1] - energies[j]) / (r2 - 1.0))
    residual = abs(extrap[-1] - extrap[-2])
    d1 = energies[-3] - energies[-2]
    d2 = energies[-2] - energies[-1]
    order = math.log2(abs(d1 / d2)) if d2 != 0 and d1 != 0 else float("nan")
    grid, vec = last
    y = normalize_samples(problem, grid, vec)
    norm = integrate(grid, np.asarray(problem.measure(grid.nodes)) * _one(grid.nodes) * y * y)
    state = BoundState(
        energy=float(extrap[-1]),
        nodes=grid.nodes,
        samples=y,
        node_count=node_count(y),
        norm=norm,
        converged=residual <= tol,
        residual=float(residual),
        index=index,
        level_energies=energies,
        extrapolations=extrap,
        spacings=actual,
        observed_order=order,
        problem=problem,
    )
    if not state.converged and raise_on_failure:
        raise NotConverged(
            f"eigenvalue {index} of {problem.name}: extrapolations differ by {residual:.3e} > {tol:.1e}",
            estimate=state.energy, residual=residual, state=state)
    return state
