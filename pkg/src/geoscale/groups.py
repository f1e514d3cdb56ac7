"""Block-structured groups: products of GL(n), SL(n), and (special) tori.

A group element stores one invertible block per factor (full matrices for
GL/SL, complex diagonal vectors for torus kinds).  Tangent directions live in
i·Lie(K): Hermitian blocks, traceless for SL / zero-sum for special tori.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .errors import ContractViolationError, InputError, SingularMatrixError
from .kernels import herm_exp


class FactorKind(enum.Enum):
    GL = "GL"
    SL = "SL"
    TORUS = "TORUS"
    SPECIAL_TORUS = "SPECIAL_TORUS"

    @property
    def is_torus(self):
        return self in (FactorKind.TORUS, FactorKind.SPECIAL_TORUS)

    @property
    def is_special(self):
        return self in (FactorKind.SL, FactorKind.SPECIAL_TORUS)


@dataclasses.dataclass(frozen=True)
class GroupSpec:
    """Ordered list of (kind, size) factors; total n is the sum of sizes."""

    factors: tuple

    def __post_init__(self):
        if len(self.factors) == 0:
            raise InputError("group must have at least one factor")
        norm = []
        for kind, size in self.factors:
            kind = FactorKind(kind)
            size = int(size)
            if size < 1:
                raise InputError("factor sizes must be positive")
            norm.append((kind, size))
        object.__setattr__(self, "factors", tuple(norm))

    @property
    def total_size(self):
        return sum(size for _, size in self.factors)

    @property
    def sizes(self):
        return tuple(size for _, size in self.factors)

    def tangent_dim(self):
        """Real dimension of i.Lie(K) = sum over factors."""
        d = 0
        for kind, n in self.factors:
            if kind is FactorKind.GL:
                d += n * n
            elif kind is FactorKind.SL:
                d += n * n - 1
            elif kind is FactorKind.TORUS:
                d += n
            else:
                d += n - 1
        return d

    def identity(self):
        blocks = []
        for kind, n in self.factors:
            blocks.append(np.ones(n, dtype=complex) if kind.is_torus else np.eye(n, dtype=complex))
        return GroupElement(self, blocks)

    def restricted(self):
        """Same sizes with GL -> SL and TORUS -> SPECIAL_TORUS."""
        mapping = {
            FactorKind.GL: FactorKind.SL,
            FactorKind.TORUS: FactorKind.SPECIAL_TORUS,
            FactorKind.SL: FactorKind.SL,
            FactorKind.SPECIAL_TORUS: FactorKind.SPECIAL_TORUS,
        }
        return GroupSpec(tuple((mapping[k], n) for k, n in self.factors))


def _block_det(kind, block):
    return np.prod(block) if kind.is_torus else np.linalg.det(block)


class GroupElement:
    """One invertible block per factor; torus blocks are diagonal vectors."""

    def __init__(self, group: GroupSpec, blocks, validate=True):
        self.group = group
        self.blocks = [np.asarray(b, dtype=complex) for b in blocks]
        if len(self.blocks) != len(group.factors):
            raise InputError("wrong number of blocks")
        for (kind, n), b in zip(group.factors, self.blocks):
            expected = (n,) if kind.is_torus else (n, n)
            if b.shape != expected:
                raise InputError(f"block shape {b.shape} does not match factor ({kind}, {n})")
        if validate:
            self.validate()

    def validate(self):
        for (kind, n), b in zip(self.group.factors, self.blocks):
            if kind.is_torus:
                if np.min(np.abs(b)) < 1e-300:
                    raise SingularMatrixError("torus block has (near) zero entry")
            else:
                sv = np.linalg.svd(b, compute_uv=False)
                if sv[-1] <= 1e-12 * sv[0]:
                    raise SingularMatrixError("group element block numerically singular")
            if kind.is_special:
                det = _block_det(kind, b)
                if abs(det - 1.0) > 1e-8 * max(1.0, abs(det)):
                    raise ContractViolationError(
                        f"special factor determinant drifted: |det - 1| = {abs(det - 1.0):.3e}"
                    )

    def __matmul__(self, other: "GroupElement"):
        if other.group is not self.group and other.group.factors != self.group.factors:
            raise InputError("group mismatch in product")
        blocks = []
        for (kind, _), a, b in zip(self.group.factors, self.blocks, other.blocks):
            blocks.append(a * b if kind.is_torus else a @ b)
        return GroupElement(self.group, blocks, validate=False)

    def inv(self):
        blocks = []
        for (kind, _), b in zip(self.group.factors, self.blocks):
            blocks.append(1.0 / b if kind.is_torus else np.linalg.inv(b))
        return GroupElement(self.group, blocks, validate=False)

    def reproject_special(self):
        """Divide each special block by det^(1/n); undoes determinant drift."""
        for i, ((kind, n), b) in enumerate(zip(self.group.factors, self.blocks)):
            if kind.is_special:
                det = _block_det(kind, b)
                self.blocks[i] = b / det ** (1.0 / n)
        return self

    def copy(self):
        return GroupElement(self.group, [b.copy() for b in self.blocks], validate=False)


class LieDirection:
    """Element of i.Lie(K): Hermitian blocks (real vectors on torus factors)."""

    def __init__(self, group: GroupSpec, blocks, validate=True):
        self.group = group
        self.blocks = []
        for (kind, n), b in zip(group.factors, blocks):
            if kind.is_torus:
                b = np.asarray(b, dtype=float)
                if b.shape != (n,):
                    raise InputError("torus direction must be a real length-n vector")
            else:
                b = np.asarray(b, dtype=complex)
                if b.shape != (n, n):
                    raise InputError("matrix direction has wrong shape")
            self.blocks.append(b)
        if validate:
            self.validate()

    def validate(self):
        for (kind, n), b in zip(self.group.factors, self.blocks):
            if not kind.is_torus:
                scale = max(1.0, np.linalg.norm(b))
                if np.linalg.norm(b - b.conj().T) > 1e-10 * scale:
                    raise ContractViolationError("direction block not Hermitian within 1e-10")
            if kind.is_special:
                tr = np.sum(np.diagonal(b)) if not kind.is_torus else np.sum(b)
                if abs(tr) > 1e-10 * max(1.0, np.linalg.norm(b)):
                    raise ContractViolationError("special factor direction not traceless")

    def norm(self):
        return math.sqrt(sum(float(np.linalg.norm(b)) ** 2 for b in self.blocks))

    def scaled(self, c):
        return LieDirection(self.group, [c * b for b in self.blocks], validate=False)

    def __add__(self, other):
        return LieDirection(
            self.group, [a + b for a, b in zip(self.blocks, other.blocks)], validate=False
        )

    def exp(self):
        """Group element e^H, blockwise."""
        blocks = []
        for (kind, _), b in zip(self.group.factors, self.blocks):
            blocks.append(np.exp(b).astype(complex) if kind.is_torus else herm_exp(b))
        return GroupElement(self.group, blocks, validate=False)


def project_direction(group: GroupSpec, blocks):
    """Hermitize every block and traceless-project special factors."""
    out = []
    for (kind, n), b in zip(group.factors, blocks):
        if kind.is_torus:
            b = np.real(np.asarray(b)).astype(float)
            if kind.is_special:
                b = b - np.mean(b)
        else:
            b = np.asarray(b, dtype=complex)
            b = (b + b.conj().T) / 2.0
            if kind.is_special:
                b = b - (np.trace(b) / n) * np.eye(n)
        out.append(b)
    return LieDirection(group, out, validate=False)


def _special_diag_basis(n):
    """Orthonormal basis of zero-sum real n-vectors (n-1 vectors)."""
    basis = []
    for k in range(1, n):
        v = np.zeros(n)
        v[:k] = 1.0
        v[k] = -float(k)
        basis.append(v / np.linalg.norm(v))
    return basis


def tangent_basis(group: GroupSpec):
    """Deterministic orthonormal basis of i.Lie(K), as LieDirections.

    Per matrix factor: diagonal (traceless for SL) directions first, then for
    each i<j the symmetric and antisymmetric off-diagonal pair.
    """
    basis = []
    for fi, (kind, n) in enumerate(group.factors):
        if kind.is_torus:
            if kind is FactorKind.TORUS:
                vecs = [np.eye(n)[i] for i in range(n)]
            else:
                vecs = _special_diag_basis(n)
            for v in vecs:
                basis.append(_single_factor_direction(group, fi, v))
        else:
            if kind is FactorKind.GL:
                for i in range(n):
                    m = np.zeros((n, n), dtype=complex)
                    m[i, i] = 1.0
                    basis.append(_single_factor_direction(group, fi, m))
            else:
                for v in _special_diag_basis(n):
                    basis.append(_single_factor_direction(group, fi, np.diag(v).astype(complex)))
            s = 1.0 / math.sqrt(2.0)
            for i in range(n):
                for j in range(i + 1, n):
                    m = np.zeros((n, n), dtype=complex)
                    m[i, j] = s
                    m[j, i] = s
                    basis.append(_single_factor_direction(group, fi, m))
                    m = np.zeros((n, n), dtype=complex)
                    m[i, j] = 1j * s
                    m[j, i] = -1j * s
                    basis.append(_single_factor_direction(group, fi, m))
    return basis


def _single_factor_direction(group, factor_index, block):
    blocks = []
    for fi, (kind, n) in enumerate(group.factors):
        if fi == factor_index:
            blocks.append(block)
        elif kind.is_torus:
            blocks.append(np.zeros(n))
        else:
            blocks.append(np.zeros((n, n), dtype=complex))
    return LieDirection(group, blocks, validate=False)


def direction_coefficients(direction: LieDirection, basis):
    """Real coefficients of a direction in an orthonormal tangent basis."""
    coeffs = np.empty(len(basis))
    for i, b in enumerate(basis):
        acc = 0.0
        for (kind, _), x, y in zip(direction.group.factors, direction.blocks, b.blocks):
            if kind.is_torus:
                acc += float(np.dot(x, y))
            else:
                acc += float(np.real(np.sum(x.conj() * y)))
        coeffs[i] = acc
    return coeffs


def direction_from_coefficients(group: GroupSpec, basis, coeffs):
    blocks = None
    for c, b in zip(coeffs, basis):
        if blocks is None:
            blocks = [c * blk for blk in b.blocks]
        else:
            for i, blk in enumerate(b.blocks):
                blocks[i] = blocks[i] + c * blk
    return LieDirection(group, blocks, validate=False)
