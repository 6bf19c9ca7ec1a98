"""Interpolation points and basis matrices parameterizing weighted SOS cones.

For polynomials of degree at most 2k in m variables over the box [-1, 1]^m,
the construction picks U = C(m + 2k, m) interpolation points and evaluates a
graded Chebyshev product basis at them. The first matrix holds the degree-k
basis values; one further matrix per coordinate folds in the box weight
1 - x_i^2 through its square root, so that products of columns stay within
degree 2k and the induced cone consists of pointwise-nonnegative values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = ["InterpParams", "build_interp", "cheb_eval", "n_basis", "graded_indices"]


def n_basis(m: int, deg: int) -> int:
    """Dimension of the polynomial space of total degree <= deg in m variables."""
    return math.comb(m + deg, m)


def graded_indices(m: int, max_deg: int):
    """Multi-indices of total degree <= max_deg, graded then lexicographic."""
    out = []
    for deg in range(max_deg + 1):
        level = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                level.append(prefix + (remaining,))
                return
            for take in range(remaining, -1, -1):
                rec(prefix + (take,), remaining - take, slots - 1)

        rec((), deg, m)
        out.extend(level)
    return out


def _cheb_1d(x: np.ndarray, max_deg: int) -> np.ndarray:
    """Values T_0(x) .. T_maxdeg(x) by the three-term recurrence, columnwise."""
    x = np.asarray(x, dtype=float)
    V = np.empty(x.shape + (max_deg + 1,))
    V[..., 0] = 1.0
    if max_deg >= 1:
        V[..., 1] = x
    for j in range(2, max_deg + 1):
        V[..., j] = 2.0 * x * V[..., j - 1] - V[..., j - 2]
    return V


def cheb_eval(j: int, x) -> float:
    """Value of the j-th graded Chebyshev product basis polynomial at x.

    ``j`` is a zero-based index into the graded ordering; for one variable
    this is simply T_j(x).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = x.size
    deg = 0
    while n_basis(m, deg) <= j:
        deg += 1
    alpha = graded_indices(m, deg)[j]
    V = _cheb_1d(x, max(alpha))
    return float(np.prod([V[i, a] for i, a in enumerate(alpha)]))


def chebyshev_vandermonde(points: np.ndarray, max_deg: int) -> np.ndarray:
    """Graded Chebyshev basis evaluated at each point (rows: points)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m = pts.shape[1]
    V1 = _cheb_1d(pts, max_deg)  # npts x m x (max_deg+1)
    idx = graded_indices(m, max_deg)
    out = np.empty((pts.shape[0], len(idx)))
    for col, alpha in enumerate(idx):
        acc = np.ones(pts.shape[0])
        for i, a in enumerate(alpha):
            if a:
                acc = acc * V1[:, i, a]
        out[:, col] = acc
    return out


@dataclass
class InterpParams:
    """Interpolation data for the weighted SOS cone on [-1, 1]^m."""

    m: int
    k: int
    U: int
    L: int
    Lt: int
    points: np.ndarray  # U x m
    P: list  # [U x L, then m matrices U x Lt]

    @property
    def nu(self) -> float:
        return float(self.L + self.m * self.Lt)


def _second_kind_points(n: int) -> np.ndarray:
    return np.cos(np.pi * np.arange(n) / (n - 1)) if n > 1 else np.zeros(1)


def build_interp(m: int, k: int, max_points: int = 5000) -> InterpParams:
    """Interpolation points and basis matrices for degree-2k weighted SOS.

    One variable uses the U Chebyshev points of the second kind. Several
    variables draw from a tensor Chebyshev grid of side 2k+1 and keep the U
    rows selected by column-pivoted orthogonalization of the degree-2k basis
    matrix (an approximate Fekete selection).
    """
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    U = n_basis(m, 2 * k)
    L = n_basis(m, k)
    Lt = n_basis(m, k - 1)
    if U > max_points:
        raise ValueError(f"U={U} exceeds the configured cap {max_points}")

    if m == 1:
        pts = _second_kind_points(U)[:, None]
    else:
        side = _second_kind_points(2 * k + 1)
        grids = np.meshgrid(*([side] * m), indexing="ij")
        cand = np.stack([g.ravel() for g in grids], axis=1)
        V = chebyshev_vandermonde(cand, 2 * k)
        _, R, piv = sla.qr(V.T, mode="economic", pivoting=True)
        rdiag = np.abs(np.diag(R))
        if rdiag.size < U or rdiag[:U].min() <= 1e-10 * rdiag.max():
            raise ValueError("candidate grid is rank deficient for this degree")
        pts = cand[np.sort(piv[:U])]

    Vk = chebyshev_vandermonde(pts, k)
    P1 = Vk[:, :L]
    rank = np.linalg.matrix_rank(P1, tol=1e-8 * max(P1.shape))
    if rank < L:
        raise ValueError("base interpolation matrix is rank deficient")
    P = [P1]
    for i in range(m):
        wgt = np.sqrt(np.maximum(1.0 - pts[:, i] ** 2, 0.0))
        P.append(wgt[:, None] * Vk[:, :Lt])
    return InterpParams(m=m, k=k, U=U, L=L, Lt=Lt, points=pts, P=P)
