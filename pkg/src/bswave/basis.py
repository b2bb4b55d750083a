"""B-spline wavelet on interval (BSWI) scaling functions on the unit element.

The scaling functions of order ``m`` at scale ``j`` are realized as the
clamped B-spline basis on [0, 1] with ``m``-fold boundary knots and uniform
interior knots ``k / 2**j``.  For BSWI4,3 this gives the usual 11 functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

__all__ = [
    "BasisError",
    "BasisSpec",
    "BasisTable",
    "build_basis",
    "eval_phi",
    "eval_dphi",
    "build_table",
    "shape_functions",
]

GAUSS_POINTS = 5


class BasisError(ValueError):
    """Invalid basis parameters, evaluation point, or node placement."""


@dataclass(frozen=True)
class BasisSpec:
    """Order, scale, knot vector and interpolation nodes of a BSWI basis."""

    m: int
    j: int
    knots: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)

    @property
    def n_b(self) -> int:
        return 2**self.j + self.m - 1

    @property
    def degree(self) -> int:
        return self.m - 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.unique(self.knots)


@dataclass(frozen=True)
class BasisTable:
    """Nodal transform and element integrals of a basis.

    Attributes
    ----------
    spec : BasisSpec
    R : ndarray (n_b, n_b)
        Nodal transform; ``Phi(xi) @ R`` are the interpolating shape functions.
    gamma0 : ndarray
        ``int_0^1 Phi^T Phi dxi``.
    gamma1 : ndarray
        ``int_0^1 Phi'^T Phi' dxi``.
    gamma01 : ndarray
        ``int_0^1 Phi'^T Phi dxi`` (row index carries the derivative).
    """

    spec: BasisSpec
    R: np.ndarray = field(repr=False)
    gamma0: np.ndarray = field(repr=False)
    gamma1: np.ndarray = field(repr=False)
    gamma01: np.ndarray = field(repr=False)


def build_basis(m: int = 4, j: int = 3) -> BasisSpec:
    """Clamped uniform knot vector and uniformly spaced element nodes."""
    if int(m) != m or int(j) != j:
        raise BasisError(f"order and scale must be integers, got m={m}, j={j}")
    m, j = int(m), int(j)
    if m < 2 or j < 0:
        raise BasisError(f"need m >= 2 and j >= 0, got m={m}, j={j}")
    n_int = 2**j
    interior = np.arange(1, n_int) / n_int
    knots = np.concatenate([np.zeros(m), interior, np.ones(m)])
    n_b = n_int + m - 1
    nodes = np.linspace(0.0, 1.0, n_b)
    knots.flags.writeable = False
    nodes.flags.writeable = False
    return BasisSpec(m=m, j=j, knots=knots, nodes=nodes)


def _span(knots: np.ndarray, p: int, n_b: int, xi: float) -> int:
    # Last nonempty span is closed on the right so xi = 1 evaluates.
    if xi >= knots[n_b]:
        return n_b - 1
    return int(np.searchsorted(knots, xi, side="right")) - 1


def _check_xi(xi) -> np.ndarray:
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise BasisError(f"evaluation point outside [0, 1]: {xi!r}")
    return x


def _basis_funs(knots: np.ndarray, p: int, span: int, xi: float) -> np.ndarray:
    """Nonzero B-splines of degree 0..p at ``xi`` (Cox-de Boor triangle).

    Row ``k`` holds the ``k + 1`` nonzero functions of degree ``k``.
    """
    ndu = np.zeros((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    for k in range(1, p + 1):
        left[k] = xi - knots[span + 1 - k]
        right[k] = knots[span + k] - xi
        saved = 0.0
        for r in range(k):
            temp = ndu[k - 1, r] / (right[r + 1] + left[k - r])
            ndu[k, r] = saved + right[r + 1] * temp
            saved = left[k - r] * temp
        ndu[k, k] = saved
    return ndu


def _eval(spec: BasisSpec, xi, deriv: int) -> np.ndarray:
    x = _check_xi(xi)
    p, t, n_b = spec.degree, spec.knots, spec.n_b
    out = np.zeros((x.size, n_b))
    for row, xv in enumerate(x):
        s = _span(t, p, n_b, xv)
        ndu = _basis_funs(t, p, s, xv)
        if deriv == 0:
            out[row, s - p : s + 1] = ndu[p, : p + 1]
            continue
        # First derivative from the degree p-1 row.
        lower = ndu[p - 1, :p]
        d = np.zeros(p + 1)
        for r in range(p + 1):
            i = s - p + r
            if r >= 1:
                d[r] += p * lower[r - 1] / (t[i + p] - t[i])
            if r < p:
                d[r] -= p * lower[r] / (t[i + p + 1] - t[i + 1])
        out[row, s - p : s + 1] = d
    return out


def eval_phi(spec: BasisSpec, xi) -> np.ndarray:
    """Scaling-function row vector Phi(xi); 2-D ``(len(xi), n_b)`` for arrays."""
    out = _eval(spec, xi, 0)
    return out[0] if np.ndim(xi) == 0 else out


def eval_dphi(spec: BasisSpec, xi) -> np.ndarray:
    """dPhi/dxi; right derivative at interior knots, left derivative at 1."""
    out = _eval(spec, xi, 1)
    return out[0] if np.ndim(xi) == 0 else out


def _quadrature(spec: BasisSpec, npts: int = GAUSS_POINTS):
    g, w = np.polynomial.legendre.leggauss(npts)
    bp = spec.breakpoints
    a, b = bp[:-1, None], bp[1:, None]
    x = (0.5 * (b - a) * g + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w).ravel()
    return x, wt


def build_table(spec: BasisSpec) -> BasisTable:
    """Transform matrix ``R`` and the element integrals of ``spec``."""
    nodal = eval_phi(spec, spec.nodes)  # row i = Phi(xi_i)
    lu, piv = la.lu_factor(nodal, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-12 * np.max(np.abs(np.diag(lu))):
        raise BasisError("nodal interpolation matrix is singular; bad node placement")
    # Interpolation N_i(xi_j) = delta_ij needs R = inv(nodal) with rows Phi(xi_i).
    R = la.lu_solve((lu, piv), np.eye(spec.n_b))

    x, wt = _quadrature(spec)
    phi = eval_phi(spec, x)
    dphi = eval_dphi(spec, x)
    g0 = (phi * wt[:, None]).T @ phi
    g1 = (dphi * wt[:, None]).T @ dphi
    g01 = (dphi * wt[:, None]).T @ phi
    g0 = 0.5 * (g0 + g0.T)
    g1 = 0.5 * (g1 + g1.T)
    for arr in (R, g0, g1, g01):
        arr.flags.writeable = False
    return BasisTable(spec=spec, R=R, gamma0=g0, gamma1=g1, gamma01=g01)


def shape_functions(table: BasisTable, xi) -> np.ndarray:
    """Interpolating shape functions ``N(xi) = Phi(xi) R``."""
    return eval_phi(table.spec, xi) @ table.R


def shape_derivatives(table: BasisTable, xi) -> np.ndarray:
    return eval_dphi(table.spec, xi) @ table.R
