"""Dense numerical kernels shared by all solvers.

Hermitian matrix exponential, positive-diagonal QR factorization, minimum-norm
point of a convex hull (Wolfe's algorithm), and a ball-constrained convex
quadratic minimizer used as the trust-region subproblem solver.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.optimize import brentq

from .errors import ContractViolationError, InputError, SingularMatrixError

HERMITIAN_TOL = 1e-10


def _check_hermitian(h, tol=HERMITIAN_TOL):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InputError(f"expected a square matrix, got shape {h.shape}")
    scale = max(1.0, np.linalg.norm(h))
    defect = np.linalg.norm(h - h.conj().T)
    if defect > tol * scale:
        raise ContractViolationError(
            f"matrix is not Hermitian within tolerance: defect {defect:.3e}"
        )
    return h


def herm_exp(h):
    """Exponential of a Hermitian matrix via eigendecomposition.

    Accurate for the Hermitian class: exp(h) = U diag(e^w) U† with (w, U) from
    ``eigh``.  Raises ContractViolationError on non-Hermitian input.
    """
    h = _check_hermitian(h)
    w, u = np.linalg.eigh((h + h.conj().T) / 2.0)
    return (u * np.exp(w)) @ u.conj().T


def qr_decompose(g):
    """Factor g = k·b with k unitary and b upper triangular, diag(b) > 0.

    The positive-diagonal convention makes the factorization unique.  Raises
    SingularMatrixError when the smallest singular value of g is below
    1e-12 times the largest.
    """
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InputError(f"expected a square matrix, got shape {g.shape}")
    sv = np.linalg.svd(g, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise SingularMatrixError(
            f"matrix numerically singular: sigma_min/sigma_max = {sv[-1] / sv[0]:.3e}"
        )
    k, b = np.linalg.qr(g)
    d = np.diagonal(b).copy()
    phase = d / np.abs(d)
    k = k * phase[np.newaxis, :]
    b = b * phase.conj()[:, np.newaxis]
    return k, b


def min_norm_point(points, tol=1e-12):
    """Minimum Euclidean-norm point of the convex hull of the given vectors.

    Wolfe's minimum-norm-point algorithm.  Returns ``(x, norm, weights)``
    where ``x = sum_i weights[i] * points[i]`` is the minimizer, weights are
    nonnegative and sum to one (up to roundoff).

    The first-order optimality certificate <x, p - x> >= -tol' holds for every
    input point p on return.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[np.newaxis, :]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("expected a nonempty list of equal-length real vectors")
    npts = pts.shape[0]
    sqnorms = np.einsum("ij,ij->i", pts, pts)

    # Corral: indices of an affinely independent subset; x is the current
    # candidate, maintained as a convex combination over the corral.
    start = int(np.argmin(sqnorms))
    corral = [start]
    coeffs = np.array([1.0])
    x = pts[start].copy()

    big = max(1.0, float(np.max(sqnorms)))
    eps_major = 1e-14 * big
    for _ in range(16 * npts * (pts.shape[1] + 2) + 64):
        # Major cycle: most violating vertex of the LP  min_p <x, p>.
        dots = pts @ x
        j = int(np.argmin(dots))
        xx = float(x @ x)
        if dots[j] >= xx - eps_major or xx <= tol * tol:
            break
        if j not in corral:
            corral.append(j)
            coeffs = np.append(coeffs, 0.0)
        # Minor cycles: move to the min-norm point of the affine hull of the
        # corral, dropping vertices until it is a convex combination.
        while True:
            sub = pts[corral]
            k = len(corral)
            a = np.empty((k + 1, k + 1))
            a[:k, :k] = sub @ sub.T
            a[k, :k] = 1.0
            a[:k, k] = 1.0
            a[k, k] = 0.0
            rhs = np.zeros(k + 1)
            rhs[k] = 1.0
            try:
                sol = np.linalg.solve(a, rhs)[:k]
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(a, rhs, rcond=None)[0][:k]
            if np.all(sol > 1e-12):
                coeffs = sol
                x = sol @ sub
                break
            # Line search from coeffs toward sol up to the nonnegativity wall.
            diff = coeffs - sol
            mask = diff > 1e-14
            if not np.any(mask):
                coeffs = np.maximum(sol, 0.0)
                coeffs /= coeffs.sum()
                x = coeffs @ sub
                break
            theta = np.min(coeffs[mask] / diff[mask])
            theta = min(max(theta, 0.0), 1.0)
            coeffs = (1.0 - theta) * coeffs + theta * sol
            coeffs[coeffs < 1e-13] = 0.0
            keep = coeffs > 0.0
            if not np.any(keep):
                keep[int(np.argmax(sol))] = True
                coeffs[keep] = 1.0
            corral = [c for c, k_ in zip(corral, keep) if k_]
            coeffs = coeffs[keep]
            coeffs /= coeffs.sum()

    weights = np.zeros(npts)
    weights[corral] = coeffs
    return x, float(np.linalg.norm(x)), weights


@dataclasses.dataclass
class TrustRegionProblem:
    """Ball-constrained convex quadratic: minimize w·h + h'Qh/(2e) over |h| <= radius."""

    linear_term: np.ndarray
    quadratic_term: np.ndarray
    radius: float

    def __post_init__(self):
        self.linear_term = np.asarray(self.linear_term, dtype=float)
        self.quadratic_term = np.asarray(self.quadratic_term, dtype=float)
        q = self.quadratic_term
        if q.shape != (self.linear_term.size, self.linear_term.size):
            raise InputError("quadratic term shape does not match linear term")
        scale = max(1.0, np.abs(q).max())
        if np.abs(q - q.T).max() > 1e-10 * scale:
            raise InputError("quadratic term is not symmetric within 1e-10")
        if self.radius <= 0:
            raise InputError("radius must be positive")

    def objective(self, h):
        h = np.asarray(h, dtype=float)
        return float(self.linear_term @ h + (h @ self.quadratic_term @ h) / (2.0 * math.e))


def ball_constrained_qp(prob: TrustRegionProblem):
    """Solve min { w·h + h'Qh/(2e) : |h|_2 <= radius } for PSD Q.

    Eigendecomposition of Q plus one-dimensional root finding on the Lagrange
    multiplier of the ball constraint.  Eigenvalues of Q below -1e-8 raise
    ContractViolationError; small negative ones are clipped to zero.
    """
    w = prob.linear_term
    r = prob.radius
    lam, v = np.linalg.eigh((prob.quadratic_term + prob.quadratic_term.T) / 2.0)
    scale = max(1.0, float(np.max(np.abs(lam))))
    if lam[0] < -1e-8 * scale:
        raise ContractViolationError(
            f"quadratic term not positive semidefinite: min eigenvalue {lam[0]:.3e}"
        )
    lam = np.maximum(lam, 0.0) / math.e  # effective curvature of the objective
    wt = v.T @ w

    wnorm = float(np.linalg.norm(w))
    if wnorm == 0.0:
        return np.zeros_like(w)

    def step_sqnorm(nu):
        return float(np.sum((wt / (lam + nu)) ** 2))

    # Interior candidate: stationary point -e Q^{-1} w on the range of Q.
    pos = lam > 1e-14 * max(1.0, float(lam[-1]))
    if np.all(np.abs(wt[~pos]) <= 1e-14 * wnorm):
        ht = np.zeros_like(wt)
        ht[pos] = -wt[pos] / lam[pos]
        if np.linalg.norm(ht) <= r:
            return v @ ht

    # Boundary: find nu > 0 with |h(nu)| = r, h(nu) = -(Q/e + nu I)^{-1} w.
    # step_sqnorm is decreasing in nu; at hi = wnorm/r it is always <= r^2,
    # and it exceeds r^2 as nu -> 0 (else the interior branch above returned).
    hi = wnorm / r
    lo = hi
    while step_sqnorm(lo) < r * r and lo > 1e-140:
        lo /= 2.0
    if step_sqnorm(lo) < r * r:
        nu = hi
    elif step_sqnorm(hi) >= r * r:
        nu = hi
    else:
        nu = brentq(lambda t: step_sqnorm(t) - r * r, lo, hi, rtol=1e-15)
    ht = -wt / (lam + nu)
    h = v @ ht
    hn = np.linalg.norm(h)
    if hn > 0:
        h *= min(1.0, r / hn)
    return h
