"""Analytic core: Kempf-Ness function, moment map, geodesic Hessian,
duality bounds, the spectrum-shifted gradient, and the moment-map gradient
flow used as a diagnostic oracle.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import numpy as np

from .errors import InputError
from .groups import (
    FactorKind,
    GroupElement,
    GroupSpec,
    LieDirection,
    project_direction,
)
from .kernels import qr_decompose
from .reps import (
    ConjugationRep,
    DirectSumRep,
    OperatorScalingRep,
    QuiverRep,
    Representation,
    RestrictedRep,
    TensorRep,
    TorusRep,
)


class MomentValue(LieDirection):
    """Block-Hermitian value of the moment map (traceless on special factors)."""


def _nonzero(v):
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0 or not np.isfinite(nrm):
        raise InputError("vector must be nonzero and finite")
    return v, float(nrm)


def kempf_ness(rep: Representation, v, g: GroupElement) -> float:
    """log-norm of the transformed vector (the geodesically convex objective)."""
    v, _ = _nonzero(v)
    return float(np.log(np.linalg.norm(rep.apply(g, v))))


def _unnormalized_moment_blocks(rep: Representation, v):
    """Blocks of the unnormalized moment map: tr[b_i H] = <v, Pi(H) v>."""
    if isinstance(rep, TorusRep):
        p = np.abs(np.asarray(v, dtype=complex)) ** 2
        mu = rep._wmat.T @ p
        out, pos = [], 0
        for n in rep.group.sizes:
            out.append(mu[pos : pos + n])
            pos += n
        return out
    if isinstance(rep, OperatorScalingRep):
        x = rep._mats(v)
        left = np.einsum("sij,skj->ik", x, x.conj())
        right = np.einsum("sji,sjk->ik", x, x.conj())  # = (X^+ X)^T per slice
        return [left, right]
    if isinstance(rep, TensorRep):
        t = np.asarray(v, dtype=complex).reshape(rep.dims)
        out = []
        for axis in range(len(rep.dims)):
            rho = np.tensordot(t, t.conj(), axes=(  # marginal on this axis
                [a for a in range(len(rep.dims)) if a != axis],
                [a for a in range(len(rep.dims)) if a != axis],
            ))
            out.append(rho)
        return out
    if isinstance(rep, ConjugationRep):
        x = rep._mats(v)
        gains = np.einsum("sij,skj->ik", x, x.conj())
        losses = np.einsum("sji,sjk->ik", x, x.conj()).conj()  # = sum X^+ X
        return [gains - losses]
    if isinstance(rep, QuiverRep):
        mats = rep._mats(v)
        out = [np.zeros((n, n), dtype=complex) for n in rep.dims]
        for (t_, h), x in zip(rep.arrows, mats):
            out[h] = out[h] + x @ x.conj().T
            out[t_] = out[t_] - x.conj().T @ x
        return out
    if isinstance(rep, RestrictedRep):
        return _unnormalized_moment_blocks(rep.parent, v)
    if isinstance(rep, DirectSumRep):
        parts = rep._parts(v)
        acc = None
        for r, p in zip(rep.reps, parts):
            blocks = _unnormalized_moment_blocks(r, p)
            if acc is None:
                acc = blocks
            else:
                acc = [a + b for a, b in zip(acc, blocks)]
        return acc
    return _generic_moment_blocks(rep, v)


def _generic_moment_blocks(rep: Representation, v):
    v = np.asarray(v, dtype=complex)
    out = []
    for fi, (kind, n) in enumerate(rep.group.factors):
        if kind.is_torus:
            blk = np.empty(n)
            for j in range(n):
                e = np.zeros(n)
                e[j] = 1.0
                blk[j] = float(np.real(np.vdot(v, rep.lie_apply_factor(fi, e, v))))
            out.append(blk)
        else:
            c = np.empty((n, n), dtype=complex)
            for a in range(n):
                for b in range(n):
                    e = np.zeros((n, n), dtype=complex)
                    e[a, b] = 1.0
                    c[a, b] = np.vdot(v, rep.lie_apply_factor(fi, e, v))
            out.append(c.T)
    return out


def moment_map(rep: Representation, v) -> MomentValue:
    """Gradient of the Kempf-Ness function at the identity, block-Hermitian."""
    v, nrm = _nonzero(v)
    blocks = [b / nrm**2 for b in _unnormalized_moment_blocks(rep, v)]
    proj = project_direction(rep.group, blocks)
    return MomentValue(rep.group, proj.blocks, validate=False)


def factor_basis_blocks(group: GroupSpec):
    """Orthonormal tangent basis as (factor_index, block) pairs.

    Matches the ordering of groups.tangent_basis.
    """
    from .groups import _special_diag_basis  # deterministic shared ordering

    out = []
    for fi, (kind, n) in enumerate(group.factors):
        if kind.is_torus:
            vecs = (
                [np.eye(n)[i] for i in range(n)]
                if kind is FactorKind.TORUS
                else _special_diag_basis(n)
            )
            out.extend((fi, v) for v in vecs)
        else:
            if kind is FactorKind.GL:
                for i in range(n):
                    m = np.zeros((n, n), dtype=complex)
                    m[i, i] = 1.0
                    out.append((fi, m))
            else:
                for v in _special_diag_basis(n):
                    out.append((fi, np.diag(v).astype(complex)))
            s = 1.0 / math.sqrt(2.0)
            for i in range(n):
                for j in range(i + 1, n):
                    m = np.zeros((n, n), dtype=complex)
                    m[i, j] = s
                    m[j, i] = s
                    out.append((fi, m))
                    m = np.zeros((n, n), dtype=complex)
                    m[i, j] = 1j * s
                    m[j, i] = -1j * s
                    out.append((fi, m))
    return out


@dataclasses.dataclass
class HessianForm:
    """Real symmetric matrix of the geodesic Hessian in an orthonormal basis."""

    group: GroupSpec
    basis: list
    matrix: np.ndarray

    def coefficients(self, direction: LieDirection):
        coeffs = np.empty(len(self.basis))
        for i, (fi, blk) in enumerate(self.basis):
            x = direction.blocks[fi]
            if np.asarray(blk).ndim == 1:
                coeffs[i] = float(np.dot(np.real(x), np.real(blk)))
            else:
                coeffs[i] = float(np.real(np.sum(np.conj(x) * blk)))
        return coeffs

    def quad(self, direction: LieDirection) -> float:
        c = self.coefficients(direction)
        return float(c @ self.matrix @ c)


def direction_to_coefficients(group: GroupSpec, blocks, basis):
    coeffs = np.empty(len(basis))
    for i, (fi, blk) in enumerate(basis):
        x = blocks[fi]
        if np.asarray(blk).ndim == 1:
            coeffs[i] = float(np.dot(np.real(np.asarray(x)), blk))
        else:
            coeffs[i] = float(np.real(np.sum(np.conj(np.asarray(x)) * blk)))
    return coeffs


def coefficients_to_direction(group: GroupSpec, coeffs, basis) -> LieDirection:
    blocks = []
    for kind, n in group.factors:
        blocks.append(np.zeros(n) if kind.is_torus else np.zeros((n, n), dtype=complex))
    for c, (fi, blk) in zip(coeffs, basis):
        blocks[fi] = blocks[fi] + c * blk
    return LieDirection(group, blocks, validate=False)


def hessian(rep: Representation, v, g: GroupElement, basis=None) -> HessianForm:
    """Geodesic Hessian of the Kempf-Ness function at g, as a dense form.

    Entry (a, b) is 2 (Re<w_a, w_b> - m_a m_b) with w_a the Lie action of the
    a-th basis direction on the normalized transformed vector u and
    m_a = <u, w_a>; the diagonal reproduces the variance formula.
    """
    v, _ = _nonzero(v)
    u = rep.apply(g, v)
    u = u / np.linalg.norm(u)
    if basis is None:
        basis = factor_basis_blocks(rep.group)
    d = len(basis)
    w = np.empty((d, rep.dim), dtype=complex)
    for a, (fi, blk) in enumerate(basis):
        w[a] = rep.lie_apply_factor(fi, blk, u)
    m = np.real(w @ u.conj())
    gram = np.real(w.conj() @ w.T)
    mat = 2.0 * (gram - np.outer(m, m))
    mat = (mat + mat.T) / 2.0
    return HessianForm(rep.group, basis, mat)


def regularizer_value(g: GroupElement) -> float:
    """reg(g) = |g|_F^2 + |g^{-1}|_F^2, summed over blocks."""
    total = 0.0
    for (kind, _), b in zip(g.group.factors, g.blocks):
        if kind.is_torus:
            d = np.abs(b) ** 2
            total += float(np.sum(d) + np.sum(1.0 / d))
        else:
            total += float(np.linalg.norm(b) ** 2 + np.linalg.norm(np.linalg.inv(b)) ** 2)
    return total


def regularized_value(rep, v, g, kappa, eps) -> float:
    return kempf_ness(rep, v, g) + (eps / kappa) * regularizer_value(g)


def regularized_gradient_hessian(rep: Representation, v, g: GroupElement, kappa, eps,
                                 basis=None, want_hessian=True):
    """Gradient and Hessian of log-norm plus (eps/kappa) reg, blockwise.

    The regularizer adds 2 eps/kappa (g g^+ - (g g^+)^-1) to each gradient
    block and 4 eps/kappa tr[(g g^+ + (g g^+)^-1) H^2] to the quadratic form.
    """
    if kappa <= 0 or eps <= 0:
        raise InputError("kappa and eps must be positive")
    v, _ = _nonzero(v)
    w = rep.apply(g, v)
    mu = moment_map(rep, w)
    scale = 2.0 * eps / kappa
    grad_blocks = []
    pos_parts = []
    for (kind, n), b, m in zip(g.group.factors, g.blocks, mu.blocks):
        if kind.is_torus:
            d = np.abs(b) ** 2
            grad_blocks.append(m + scale * (d - 1.0 / d))
            pos_parts.append(d + 1.0 / d)
        else:
            ggd = b @ b.conj().T
            ggd_inv = np.linalg.inv(ggd)
            grad_blocks.append(m + scale * (ggd - ggd_inv))
            pos_parts.append(ggd + ggd_inv)
    grad = project_direction(g.group, grad_blocks)
    gradient = MomentValue(g.group, grad.blocks, validate=False)
    if not want_hessian:
        return gradient, None

    if basis is None:
        basis = factor_basis_blocks(rep.group)
    form = hessian(rep, v, g, basis=basis)
    mat = form.matrix
    for a, (fa, ba) in enumerate(basis):
        for b_, (fb, bb) in enumerate(basis):
            if fb != fa or b_ < a:
                continue
            p = pos_parts[fa]
            if np.asarray(ba).ndim == 1:
                val = float(np.sum(p * ba * bb))
            else:
                val = float(np.real(np.trace(p @ ba @ bb)))
            mat[a, b_] += 2.0 * scale * val
            if b_ != a:
                mat[b_, a] += 2.0 * scale * val
    return gradient, HessianForm(rep.group, basis, mat)


@dataclasses.dataclass
class DualityReport:
    """Two-sided bound on cap^2(v)/|v|^2 from the moment map norm."""

    norm_mu: float
    lower_bound: float
    upper_bound: float
    lower_clamped: bool

    def as_dict(self):
        return dataclasses.asdict(self)


def duality_bounds(rep: Representation, v, gamma: float, weight_norm: float) -> DualityReport:
    v, _ = _nonzero(v)
    if gamma <= 0 or weight_norm <= 0:
        raise InputError("gamma and weight norm must be positive")
    nm = moment_map(rep, v).norm()
    lower = 1.0 - nm / gamma
    clamped = lower < 0.0
    return DualityReport(
        norm_mu=nm,
        lower_bound=max(lower, 0.0),
        upper_bound=1.0 - nm**2 / (4.0 * weight_norm**2),
        lower_clamped=clamped,
    )


class TargetSpectrum:
    """Per-GL-factor nonincreasing rational target spectra with involution p*."""

    def __init__(self, blocks, rep: Representation | None = None):
        self.blocks = tuple(tuple(Fraction(x) for x in blk) for blk in blocks)
        for blk in self.blocks:
            if any(a < b for a, b in zip(blk, blk[1:])):
                raise InputError(f"target spectrum block {blk} is not nonincreasing")
        self.ell = 1
        for blk in self.blocks:
            for x in blk:
                self.ell = self.ell * x.denominator // math.gcd(self.ell, x.denominator)
        if rep is not None:
            sizes = [n for _, n in rep.group.factors]
            if len(self.blocks) != len(sizes) or any(
                len(b) != n for b, n in zip(self.blocks, sizes)
            ):
                raise InputError("target spectrum shape does not match the group")
            if rep.multidegree is not None:
                for blk, d in zip(self.blocks, rep.multidegree):
                    if sum(blk, Fraction(0)) != d:
                        raise InputError(
                            f"block {blk} must sum to the factor degree {d}"
                        )
                    if any(x < 0 for x in blk):
                        raise InputError("homogeneous targets need nonnegative entries")

    def star_blocks(self):
        """p* = (-p_n, ..., -p_1) blockwise, as float arrays."""
        return [np.array([-float(x) for x in reversed(blk)]) for blk in self.blocks]

    def float_blocks(self):
        return [np.array([float(x) for x in blk]) for blk in self.blocks]

    def norm(self):
        return math.sqrt(sum(float(x) ** 2 for blk in self.blocks for x in blk))


def p_shifted_gradient(rep: Representation, v, g: GroupElement, p: TargetSpectrum):
    """Gradient of the spectrum-shifted objective: mu(pi(g)v) + k p* k^+ blockwise."""
    v, _ = _nonzero(v)
    w = rep.apply(g, v)
    mu = moment_map(rep, w)
    stars = p.star_blocks()
    blocks = []
    for (kind, _), gb, mb, ps in zip(g.group.factors, g.blocks, mu.blocks, stars):
        if kind.is_torus:
            raise InputError("spectrum targets are defined for GL factors")
        k, _ = qr_decompose(gb)
        blocks.append(mb + (k * ps[np.newaxis, :]) @ k.conj().T)
    proj = project_direction(g.group, blocks)
    return MomentValue(g.group, proj.blocks, validate=False)


def spec_distance(rep: Representation, v, g: GroupElement, p: TargetSpectrum):
    """Euclidean distance between sorted moment-map spectra and the target."""
    w = rep.apply(g, v)
    scale = np.max(np.abs(w))  # the moment map is scale invariant
    if scale > 0 and np.isfinite(scale):
        w = w / scale
    mu = moment_map(rep, w)
    total = 0.0
    per_factor = []
    for mb, pb in zip(mu.blocks, p.float_blocks()):
        eig = np.sort(np.linalg.eigvalsh(mb))[::-1]
        per_factor.append(eig)
        total += float(np.sum((eig - pb) ** 2))
    return math.sqrt(total), per_factor


@dataclasses.dataclass
class FlowTrace:
    times: np.ndarray
    vectors: list
    norms: np.ndarray
    moment_norms: np.ndarray
    mu_tilde_norms: np.ndarray
    status: str

    def identity_residuals(self, dt):
        """Centered-difference residuals of d|v|^2/dt = -4 |mu~| at interior samples."""
        if len(self.times) < 3:
            return np.array([])
        sq = self.norms**2
        res = (sq[2:] - sq[:-2]) / (self.times[2:] - self.times[:-2])
        return res + 4.0 * self.mu_tilde_norms[1:-1]


def gradient_flow(rep: Representation, v0, t_end: float, dt: float,
                  critical_tol=1e-10, adaptive=True) -> FlowTrace:
    """Fourth-order Runge-Kutta trajectory of the moment-map gradient flow.

    Integrates v' = -2 Pi(mu(v)/|mu(v)|) v.  Stops early at the critical set
    (|mu| below tolerance) or on norm collapse.  When the moment norm changes
    by more than 20% over a step the step is redone with half the step size.
    """
    v0, nrm0 = _nonzero(v0)
    if dt <= 0 or t_end <= 0:
        raise InputError("need positive dt and t_end")

    def field(v):
        mu = moment_map(rep, v)
        mun = mu.norm()
        return mu, mun

    def rhs(v):
        mu, mun = field(v)
        if mun < critical_tol:
            return np.zeros_like(v)
        scaled = [b / mun for b in mu.blocks]
        return -2.0 * rep.lie_apply(scaled, v)

    mu0, mun0 = field(v0)
    if mun0 < critical_tol:
        return FlowTrace(
            times=np.array([]),
            vectors=[],
            norms=np.array([]),
            moment_norms=np.array([]),
            mu_tilde_norms=np.array([]),
            status="already-critical",
        )

    times = [0.0]
    vectors = [v0.copy()]
    norms = [np.linalg.norm(v0)]
    moment_norms = [mun0]
    mu_tilde = [mun0 * norms[0] ** 2]
    t = 0.0
    v = v0.copy()
    status = "completed"
    max_steps = int(math.ceil(t_end / dt)) * 8 + 16
    steps = 0
    while t < t_end - 1e-15 and steps < max_steps:
        steps += 1
        h = min(dt, t_end - t)
        mun_before = moment_norms[-1]
        while True:
            k1 = rhs(v)
            k2 = rhs(v + 0.5 * h * k1)
            k3 = rhs(v + 0.5 * h * k2)
            k4 = rhs(v + h * k3)
            v_new = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            _, mun_after = field(v_new)
            if not adaptive or mun_after >= 0.8 * mun_before or h < dt / 64:
                break
            h /= 2.0
        v = v_new
        t += h
        nrm = float(np.linalg.norm(v))
        mun = mun_after
        times.append(t)
        vectors.append(v.copy())
        norms.append(nrm)
        moment_norms.append(mun)
        mu_tilde.append(mun * nrm**2)
        if mun < critical_tol:
            status = "critical"
            break
        if nrm < 1e-12:
            status = "vanished"
            break
    return FlowTrace(
        times=np.array(times),
        vectors=vectors,
        norms=np.array(norms),
        moment_norms=np.array(moment_norms),
        mu_tilde_norms=np.array(mu_tilde),
        status=status,
    )
