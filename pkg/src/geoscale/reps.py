"""Representations of GL/SL/torus products with exact weight data.

Every representation exposes the same surface: ``apply`` (group action),
``lie_apply_factor`` / ``lie_apply`` (Lie algebra action, complex-linear in
the direction), the deduplicated weight set as exact rationals, and the
diagonal Gram of the invariant inner product in the working basis (the
identity for every representation in this module; Gelfand-Tsetlin irreps are
orthonormalized in gt.py before they reach this surface).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import InputError
from .groups import FactorKind, GroupElement, GroupSpec, LieDirection

_FAMILIES = (
    "torus",
    "matrix_scaling",
    "operator_scaling",
    "tensor",
    "conjugation",
    "quiver",
    "gt",
    "sum",
)


class Weight:
    """Block of exact rational vectors, one per group factor."""

    __slots__ = ("blocks",)

    def __init__(self, blocks):
        self.blocks = tuple(tuple(Fraction(x) for x in blk) for blk in blocks)

    def concat(self):
        return tuple(x for blk in self.blocks for x in blk)

    def as_array(self):
        return np.array([float(x) for x in self.concat()])

    def norm_sq(self):
        return sum(x * x for x in self.concat())

    def __eq__(self, other):
        return isinstance(other, Weight) and self.blocks == other.blocks

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"Weight({self.blocks})"


def dedupe_weights(weights):
    seen = {}
    for w in weights:
        seen.setdefault(w.blocks, w)
    return list(seen.values())


class Representation:
    """Base contract; concrete actions override the four core methods."""

    group: GroupSpec
    dim: int
    family: str = "generic"
    structure: str = "generic"  # "quiver" | "tu" | "generic", used by margin bounds
    multidegree = None  # per-factor homogeneity degrees, or None

    def apply(self, g: GroupElement, v):
        raise NotImplementedError

    def lie_apply_factor(self, factor_index, block, v):
        """Action of a Lie algebra element supported on one factor."""
        raise NotImplementedError

    def lie_apply(self, blocks, v):
        v = np.asarray(v, dtype=complex)
        out = np.zeros_like(v)
        for fi in range(len(self.group.factors)):
            out += self.lie_apply_factor(fi, blocks[fi], v)
        return out

    def weights(self):
        raise NotImplementedError

    def weight_norm(self):
        """Max Euclidean norm over the weight set (the smoothness constant source)."""
        return max(float(w.norm_sq()) for w in self.weights()) ** 0.5

    def invariant_norm_gram(self):
        return np.ones(self.dim)

    def random_vector(self, rng, scale=1.0):
        v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return scale * v


def lie_matrix(rep: Representation, direction) -> np.ndarray:
    """Dense matrix of the Lie algebra action in the working basis."""
    blocks = direction.blocks if isinstance(direction, LieDirection) else direction
    m = rep.dim
    out = np.empty((m, m), dtype=complex)
    basis = np.eye(m, dtype=complex)
    for j in range(m):
        out[:, j] = rep.lie_apply(blocks, basis[j])
    return out


class TorusRep(Representation):
    """Diagonal action: coordinate j scales by prod_i d_i^(w_ji)."""

    family = "torus"

    def __init__(self, weights, group=None):
        rows = [tuple(int(x) for x in w) for w in weights]
        if not rows:
            raise InputError("need at least one weight")
        length = len(rows[0])
        if any(len(r) != length for r in rows):
            raise InputError("ragged weight list")
        if group is None:
            group = GroupSpec(((FactorKind.TORUS, length),))
        if group.total_size != length:
            raise InputError("weight length does not match group size")
        if any(not k.is_torus for k, _ in group.factors):
            raise InputError("TorusRep requires torus factors only")
        self.group = group
        self.dim = len(rows)
        self._wmat = np.array(rows, dtype=float)
        self._wexp = np.array(rows, dtype=np.int64)
        self._wint = rows
        sizes = group.sizes
        self._offsets = np.cumsum((0,) + sizes)[:-1]

    def apply(self, g, v):
        d = np.concatenate(g.blocks)
        if np.all(d.imag == 0.0) and np.all(d.real > 0.0):
            scale = np.exp(self._wmat @ np.log(d.real))
        else:
            scale = np.prod(d[np.newaxis, :] ** self._wexp, axis=1)
        return np.asarray(v, dtype=complex) * scale

    def lie_apply_factor(self, fi, block, v):
        off = self._offsets[fi]
        n = self.group.sizes[fi]
        eig = self._wmat[:, off : off + n] @ np.asarray(block)
        return eig * np.asarray(v, dtype=complex)

    def weights(self):
        out = []
        sizes = self.group.sizes
        for row in self._wint:
            blocks, pos = [], 0
            for n in sizes:
                blocks.append(row[pos : pos + n])
                pos += n
            out.append(Weight(blocks))
        return dedupe_weights(out)


class OperatorScalingRep(Representation):
    """(g, h) acting on k-tuples of n x n matrices by X -> g X h^T."""

    family = "operator_scaling"
    structure = "tu"

    def __init__(self, n, k):
        if n < 1 or k < 1:
            raise InputError("need n >= 1 and k >= 1")
        self.n, self.k = n, k
        self.group = GroupSpec(((FactorKind.GL, n), (FactorKind.GL, n)))
        self.dim = k * n * n
        self.multidegree = (1, 1)

    def _mats(self, v):
        return np.asarray(v, dtype=complex).reshape(self.k, self.n, self.n)

    def apply(self, g, v):
        a, b = g.blocks
        x = self._mats(v)
        return np.einsum("ij,sjk,lk->sil", a, x, b).reshape(-1)

    def lie_apply_factor(self, fi, block, v):
        x = self._mats(v)
        h = np.asarray(block, dtype=complex)
        if fi == 0:
            out = np.einsum("ij,sjk->sik", h, x)
        else:
            out = np.einsum("sij,kj->sik", x, h)
        return out.reshape(-1)

    def weights(self):
        out = []
        for a in range(self.n):
            for b in range(self.n):
                ea = [0] * self.n
                eb = [0] * self.n
                ea[a] = 1
                eb[b] = 1
                out.append(Weight((ea, eb)))
        return out


class TensorRep(Representation):
    """(g_1, ..., g_k) acting on C^{n_1} x ... x C^{n_k} by the Kronecker product."""

    family = "tensor"

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise InputError("need k >= 2 tensor factors of positive dimension")
        self.dims = dims
        self.group = GroupSpec(tuple((FactorKind.GL, d) for d in dims))
        self.dim = int(np.prod(dims))
        self.multidegree = (1,) * len(dims)

    def apply(self, g, v):
        t = np.asarray(v, dtype=complex).reshape(self.dims)
        for axis, blk in enumerate(g.blocks):
            t = np.moveaxis(np.tensordot(blk, t, axes=(1, axis)), 0, axis)
        return t.reshape(-1)

    def lie_apply_factor(self, fi, block, v):
        t = np.asarray(v, dtype=complex).reshape(self.dims)
        h = np.asarray(block, dtype=complex)
        out = np.moveaxis(np.tensordot(h, t, axes=(1, fi)), 0, fi)
        return out.reshape(-1)

    def weights(self):
        out = []
        for idx in np.ndindex(*self.dims):
            blocks = []
            for axis, d in enumerate(self.dims):
                e = [0] * d
                e[idx[axis]] = 1
                blocks.append(e)
            out.append(Weight(blocks))
        return out


class ConjugationRep(Representation):
    """g acting on k-tuples of n x n matrices by simultaneous conjugation."""

    family = "conjugation"
    structure = "quiver"

    def __init__(self, n, k):
        if n < 1 or k < 1:
            raise InputError("need n >= 1 and k >= 1")
        self.n, self.k = n, k
        self.group = GroupSpec(((FactorKind.GL, n),))
        self.dim = k * n * n
        self.multidegree = (0,)

    def _mats(self, v):
        return np.asarray(v, dtype=complex).reshape(self.k, self.n, self.n)

    def apply(self, g, v):
        a = g.blocks[0]
        ainv = np.linalg.inv(a)
        x = self._mats(v)
        return np.einsum("ij,sjk,kl->sil", a, x, ainv).reshape(-1)

    def lie_apply_factor(self, fi, block, v):
        x = self._mats(v)
        h = np.asarray(block, dtype=complex)
        out = np.einsum("ij,sjk->sik", h, x) - np.einsum("sij,jk->sik", x, h)
        return out.reshape(-1)

    def weights(self):
        out = []
        for i in range(self.n):
            for j in range(self.n):
                e = [0] * self.n
                e[i] += 1
                e[j] -= 1
                out.append(Weight((e,)))
        return dedupe_weights(out)


class QuiverRep(Representation):
    """Quiver representation space with X_a -> g_{head} X_a g_{tail}^{-1}."""

    family = "quiver"
    structure = "quiver"

    def __init__(self, num_vertices, arrows, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) != num_vertices or any(d < 1 for d in dims):
            raise InputError("dims must list one positive size per vertex")
        for t, h in arrows:
            if not (0 <= t < num_vertices and 0 <= h < num_vertices):
                raise InputError(f"arrow ({t}, {h}) has an invalid endpoint")
        self.arrows = [(int(t), int(h)) for t, h in arrows]
        self.dims = dims
        self.group = GroupSpec(tuple((FactorKind.GL, d) for d in dims))
        self._shapes = [(dims[h], dims[t]) for t, h in self.arrows]
        self._sizes = [r * c for r, c in self._shapes]
        self._slices = np.cumsum([0] + self._sizes)
        self.dim = int(self._slices[-1])

    def _mats(self, v):
        v = np.asarray(v, dtype=complex)
        return [
            v[self._slices[i] : self._slices[i + 1]].reshape(self._shapes[i])
            for i in range(len(self.arrows))
        ]

    def apply(self, g, v):
        invs = [np.linalg.inv(b) for b in g.blocks]
        out = []
        for (t, h), x in zip(self.arrows, self._mats(v)):
            out.append((g.blocks[h] @ x @ invs[t]).reshape(-1))
        return np.concatenate(out)

    def lie_apply_factor(self, fi, block, v):
        hmat = np.asarray(block, dtype=complex)
        out = []
        for (t, h), x in zip(self.arrows, self._mats(v)):
            y = np.zeros_like(x)
            if h == fi:
                y = y + hmat @ x
            if t == fi:
                y = y - x @ hmat
            out.append(y.reshape(-1))
        return np.concatenate(out)

    def weights(self):
        out = []
        for (t, h) in self.arrows:
            for i in range(self.dims[h]):
                for j in range(self.dims[t]):
                    blocks = [[0] * d for d in self.dims]
                    blocks[h][i] += 1
                    blocks[t][j] -= 1
                    out.append(Weight(blocks))
        return dedupe_weights(out)


class DirectSumRep(Representation):
    """Block-diagonal sum of representations of the same group."""

    family = "sum"

    def __init__(self, reps):
        if not reps:
            raise InputError("need at least one summand")
        g0 = reps[0].group
        for r in reps[1:]:
            if r.group.factors != g0.factors:
                raise InputError("all summands must share the same group")
        self.reps = list(reps)
        self.group = g0
        self._sizes = [r.dim for r in reps]
        self._slices = np.cumsum([0] + self._sizes)
        self.dim = int(self._slices[-1])
        degs = [r.multidegree for r in reps]
        self.multidegree = degs[0] if all(d == degs[0] for d in degs) else None
        self.structure = (
            reps[0].structure if all(r.structure == reps[0].structure for r in reps) else "generic"
        )

    def _parts(self, v):
        v = np.asarray(v, dtype=complex)
        return [v[self._slices[i] : self._slices[i + 1]] for i in range(len(self.reps))]

    def apply(self, g, v):
        return np.concatenate([r.apply(g, p) for r, p in zip(self.reps, self._parts(v))])

    def lie_apply_factor(self, fi, block, v):
        return np.concatenate(
            [r.lie_apply_factor(fi, block, p) for r, p in zip(self.reps, self._parts(v))]
        )

    def weights(self):
        out = []
        for r in self.reps:
            out.extend(r.weights())
        return dedupe_weights(out)

    def invariant_norm_gram(self):
        return np.concatenate([r.invariant_norm_gram() for r in self.reps])


class RestrictedRep(Representation):
    """Restriction to unit-determinant blocks: GL -> SL, TORUS -> SPECIAL_TORUS.

    The action is unchanged; weights are traceless-projected blockwise.  The
    reported weight norm stays the parent's: it is still a valid bound for the
    restricted directions and matches the constants the solvers use.
    """

    def __init__(self, parent: Representation):
        self.parent = parent
        self.group = parent.group.restricted()
        self.dim = parent.dim
        self.family = parent.family
        self.structure = parent.structure
        self.multidegree = parent.multidegree

    def apply(self, g, v):
        inner = GroupElement(self.parent.group, g.blocks, validate=False)
        return self.parent.apply(inner, v)

    def lie_apply_factor(self, fi, block, v):
        return self.parent.lie_apply_factor(fi, block, v)

    def weights(self):
        out = []
        for w in self.parent.weights():
            blocks = []
            for blk in w.blocks:
                n = len(blk)
                shift = sum(blk, Fraction(0)) / n
                blocks.append(tuple(x - shift for x in blk))
            out.append(Weight(blocks))
        return dedupe_weights(out)

    def weight_norm(self):
        return self.parent.weight_norm()

    def invariant_norm_gram(self):
        return self.parent.invariant_norm_gram()


def torus_rep(weights):
    """Diagonal torus action with the given integer weight rows."""
    return TorusRep(weights)


def operator_scaling_rep(n, k, group_kind="SL"):
    rep = OperatorScalingRep(n, k)
    if FactorKind(group_kind) is FactorKind.SL:
        return restrict_to_sl(rep)
    return rep


def tensor_rep(dims, group_kind="GL"):
    rep = TensorRep(dims)
    if FactorKind(group_kind) is FactorKind.SL:
        return restrict_to_sl(rep)
    return rep


def conjugation_rep(n, k):
    return ConjugationRep(n, k)


def quiver_rep(num_vertices, arrows, dims, group_kind="GL"):
    rep = QuiverRep(num_vertices, arrows, dims)
    if FactorKind(group_kind) is FactorKind.SL:
        return restrict_to_sl(rep)
    return rep


def direct_sum(reps):
    return DirectSumRep(reps)


def restrict_to_sl(rep):
    for kind, _ in rep.group.factors:
        if kind in (FactorKind.SL, FactorKind.SPECIAL_TORUS):
            raise InputError("representation is already restricted")
    return RestrictedRep(rep)


def matrix_scaling_rep(n):
    """ST(n) x ST(n) acting on Mat(n) entries by (a, b) . M_ij = a_i M_ij b_j."""
    rows = []
    for a in range(n):
        for b in range(n):
            row = [0] * (2 * n)
            row[a] = 1
            row[n + b] = 1
            rows.append(row)
    group = GroupSpec(((FactorKind.TORUS, n), (FactorKind.TORUS, n)))
    rep = TorusRep(rows, group=group)
    rep.family = "matrix_scaling"
    rep.structure = "tu"
    rep.multidegree = (1, 1)
    restricted = RestrictedRep(rep)
    return restricted
