"""Hot loops of the tridiagonal eigensolver.

Two interchangeable implementations live here:

* ``NUMBA``: scalar loops compiled with ``numba.njit``.
* ``NUMPY``: the same algorithms without compilation; the Sturm count is
  vectorised over many shifts at once (multisection) so the Python loop
  over matrix rows is amortised.

Both operate on a symmetric tridiagonal matrix given by its diagonal ``d``
and off-diagonal ``e`` (``e2 = e**2`` for the Sturm recurrences).
"""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from .._accel import HAVE_NUMBA, njit, requested_backend

_EPS = np.finfo(np.float64).eps
_MAX_BISECT = 256


def pivot_floor(e2):
    return np.finfo(np.float64).tiny * max(1.0, float(np.max(e2)) if len(e2) else 1.0)


# ---------------------------------------------------------------- numba path


@njit
def _sturm_count_nb(d, e2, x, pivmin):
    n = d.shape[0]
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit
def _bisect_nb(d, e2, k0, k1, lo, hi, pivmin):
    out = np.empty(k1 - k0)
    for k in range(k0, k1):
        a = lo
        b = hi
        for _ in range(_MAX_BISECT):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if b - a <= 2.0 * _EPS * max(abs(a), abs(b)):
                break
            if _sturm_count_nb(d, e2, mid, pivmin) > k:
                b = mid
            else:
                a = mid
        out[k - k0] = 0.5 * (a + b)
    return out


@njit
def _shifted_solve_nb(d_in, e_in, shift, rhs, pivfloor):
    # Gaussian elimination with partial pivoting on (T - shift*I) x = rhs
    n = d_in.shape[0]
    d = d_in - shift
    dl = e_in.copy()
    du = e_in.copy()
    du2 = np.zeros(max(n - 2, 0))
    b = rhs.copy()
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = pivfloor
            fact = dl[i] / d[i]
            d[i + 1] -= fact * du[i]
            b[i + 1] -= fact * b[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            temp = d[i + 1]
            d[i + 1] = du[i] - fact * temp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du2[i]
            du[i] = temp
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - fact * b[i + 1]
    if d[n - 1] == 0.0:
        d[n - 1] = pivfloor
    b[n - 1] /= d[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i]
    return b


# ---------------------------------------------------------------- numpy path


def _sturm_counts_np(d, e2, shifts, pivmin):
    shifts = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    q = d[0] - shifts
    q[np.abs(q) < pivmin] = -pivmin
    count = (q < 0.0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = (d[i] - shifts) - e2[i - 1] / q
        q[np.abs(q) < pivmin] = -pivmin
        count += q < 0.0
    return count


def _sturm_count_np(d, e2, x, pivmin):
    return int(_sturm_counts_np(d, e2, [x], pivmin)[0])


def _bisect_np(d, e2, k0, k1, lo, hi, pivmin, sections=511):
    out = np.empty(k1 - k0)
    for k in range(k0, k1):
        a, b = lo, hi
        for _ in range(_MAX_BISECT):
            if b - a <= 2.0 * _EPS * max(abs(a), abs(b)):
                break
            shifts = np.linspace(a, b, sections + 2)[1:-1]
            shifts = shifts[(shifts > a) & (shifts < b)]
            if shifts.size == 0:
                break
            above = np.nonzero(_sturm_counts_np(d, e2, shifts, pivmin) > k)[0]
            new_a = a if (above.size and above[0] == 0) else shifts[(above[0] if above.size else shifts.size) - 1]
            new_b = shifts[above[0]] if above.size else b
            if new_a == a and new_b == b:
                break
            a, b = new_a, new_b
        out[k - k0] = 0.5 * (a + b)
    return out


def _shifted_solve_np(d_in, e_in, shift, rhs, pivfloor):
    n = len(d_in)
    d = (np.asarray(d_in) - shift).tolist()
    dl = list(e_in)
    du = list(e_in)
    du2 = [0.0] * max(n - 2, 0)
    b = list(rhs)
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = pivfloor
            fact = dl[i] / d[i]
            d[i + 1] -= fact * du[i]
            b[i + 1] -= fact * b[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            temp = d[i + 1]
            d[i + 1] = du[i] - fact * temp
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du2[i]
            du[i] = temp
            b[i], b[i + 1] = b[i + 1], b[i] - fact * b[i + 1]
    if d[n - 1] == 0.0:
        d[n - 1] = pivfloor
    b[n - 1] /= d[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i]
    return np.array(b)


NUMPY = SimpleNamespace(
    name="numpy",
    sturm_count=_sturm_count_np,
    bisect=_bisect_np,
    shifted_solve=_shifted_solve_np,
)

if HAVE_NUMBA:
    NUMBA = SimpleNamespace(
        name="numba",
        sturm_count=_sturm_count_nb,
        bisect=_bisect_nb,
        shifted_solve=_shifted_solve_nb,
    )
else:  # pragma: no cover
    NUMBA = None


def get_kernels(backend: str | None = None):
    """Kernel namespace for ``backend`` ("numba"/"numpy"; default from env)."""
    backend = backend or requested_backend()
    if backend == "numba" and NUMBA is not None:
        return NUMBA
    return NUMPY
