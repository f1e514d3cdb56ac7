"""Irreducible polynomial GL(n)-representations in the Gelfand-Tsetlin basis.

Pattern enumeration, exact rational Lie algebra matrices, the group action by
LDU factorization (with a polar-decomposition fallback), and the squared norms
of the basis vectors under the unitarily invariant inner product.  The public
representation surface works in the rescaled orthonormal basis so that the
invariant inner product is the standard one.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import scipy.linalg

from .errors import DegenerateInputError, InputError
from .groups import FactorKind, GroupSpec
from .reps import DirectSumRep, Representation, Weight, dedupe_weights


def check_highest_weight(lam):
    lam = tuple(int(x) for x in lam)
    if len(lam) == 0:
        raise InputError("highest weight must be nonempty")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise InputError(f"highest weight must be nonincreasing, got {lam}")
    if lam[-1] < 0:
        raise InputError("polynomial irreps need lambda_n >= 0 (apply a determinant twist first)")
    return lam


class GTPattern:
    """Triangular array; rows[i] is row i+1 (length i+1), top row equals lambda."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(int(x) for x in r) for r in rows)

    @property
    def n(self):
        return len(self.rows)

    def flat_top_down(self):
        return tuple(x for r in reversed(self.rows) for x in r)

    def is_valid(self):
        for i in range(1, self.n):
            upper, lower = self.rows[i], self.rows[i - 1]
            for j in range(i):
                if not (upper[j] >= lower[j] >= upper[j + 1]):
                    return False
        return True

    def bump(self, row_index, entry_index, delta):
        rows = [list(r) for r in self.rows]
        rows[row_index][entry_index] += delta
        return GTPattern(rows)

    def weight(self):
        """Integer GL(n) weight: row-sum differences."""
        sums = [sum(r) for r in self.rows]
        return tuple(
            sums[i] - (sums[i - 1] if i > 0 else 0) for i in range(self.n)
        )

    def __eq__(self, other):
        return isinstance(other, GTPattern) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"GTPattern({list(map(list, self.rows))})"


def enumerate_patterns(lam):
    """All patterns with top row lambda, in decreasing lexicographic order."""
    lam = check_highest_weight(lam)
    n = len(lam)
    rows_stack = [[tuple(lam)]]
    for i in range(n - 1, 0, -1):
        upper_choices = rows_stack
        rows_stack = []
        for partial in upper_choices:
            upper = partial[-1]
            ranges = [range(upper[j + 1], upper[j] + 1) for j in range(i)]
            for lower in itertools.product(*ranges):
                rows_stack.append(partial + [lower])
    patterns = [GTPattern(list(reversed(p))) for p in rows_stack]
    patterns.sort(key=lambda p: p.flat_top_down(), reverse=True)
    return patterns


def _l_value(rows, i, j):
    """l_{i,j} = lambda_{i,j} - j + 1 with 1-based (i, j)."""
    return rows[i - 1][j - 1] - j + 1


def _gram_sq_norm(pattern: GTPattern):
    """Exact squared invariant norm of a GT basis vector."""
    rows = pattern.rows
    n = pattern.n
    out = Fraction(1)
    for k in range(2, n + 1):
        for i in range(1, k):
            for j in range(i, k):
                a = _l_value(rows, k, i) - _l_value(rows, k - 1, j)
                b = _l_value(rows, k - 1, i) - _l_value(rows, k - 1, j)
                out *= Fraction(math.factorial(a), math.factorial(b))
        for i in range(1, k + 1):
            for j in range(i + 1, k + 1):
                a = _l_value(rows, k, i) - _l_value(rows, k, j) - 1
                b = _l_value(rows, k - 1, i) - _l_value(rows, k, j) - 1
                out *= Fraction(math.factorial(a), math.factorial(b))
    return out


class GTIrrep:
    """Irreducible GL(n) representation with highest weight lambda (a partition)."""

    def __init__(self, lam):
        self.lam = check_highest_weight(lam)
        self.n = len(self.lam)
        self.degree = sum(self.lam)
        self.patterns = enumerate_patterns(self.lam)
        self.dim = len(self.patterns)
        self._index = {p: i for i, p in enumerate(self.patterns)}
        self._exact_cache = {}
        self._ortho_cache = {}
        self.gram = [_gram_sq_norm(p) for p in self.patterns]
        self._scale = np.sqrt(np.array([float(g) for g in self.gram]))
        hw = GTPattern([[self.lam[j] for j in range(i + 1)] for i in range(self.n)])
        self.highest_index = self._index[hw]
        self._diag_exponents = np.array(
            [[p.weight()[i] for p in self.patterns] for i in range(self.n)], dtype=np.int64
        )

    # -- exact Lie algebra matrices (raw GT basis, rational entries) --

    def _zero(self):
        return [[Fraction(0)] * self.dim for _ in range(self.dim)]

    def _elementary(self, i, j):
        """Exact matrix of the Lie action of the (i, j) matrix unit, 1-based."""
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise InputError(f"index out of range: ({i}, {j})")
        key = (i, j)
        if key in self._exact_cache:
            return self._exact_cache[key]
        if i == j:
            mat = self._zero()
            for col, p in enumerate(self.patterns):
                mat[col][col] = Fraction(p.weight()[i - 1])
        elif j == i + 1:
            mat = self._raising(i)
        elif i == j + 1:
            mat = self._lowering(j)
        elif j > i:
            mat = _commutator(self._elementary(i, j - 1), self._elementary(j - 1, j))
        else:
            mat = _commutator(self._elementary(i, j + 1), self._elementary(j + 1, j))
        self._exact_cache[key] = mat
        return mat

    def _raising(self, i):
        mat = self._zero()
        for col, p in enumerate(self.patterns):
            rows = p.rows
            for j in range(1, i + 1):
                target = p.bump(i - 1, j - 1, +1)
                if not target.is_valid():
                    continue
                lij = _l_value(rows, i, j)
                num = Fraction(1)
                for k in range(1, i + 2):
                    num *= lij - _l_value(rows, i + 1, k)
                den = Fraction(1)
                for k in range(1, i + 1):
                    if k != j:
                        den *= lij - _l_value(rows, i, k)
                mat[self._index[target]][col] += -num / den
        return mat

    def _lowering(self, i):
        mat = self._zero()
        for col, p in enumerate(self.patterns):
            rows = p.rows
            for j in range(1, i + 1):
                target = p.bump(i - 1, j - 1, -1)
                if not target.is_valid():
                    continue
                lij = _l_value(rows, i, j)
                num = Fraction(1)
                for k in range(1, i):
                    num *= lij - _l_value(rows, i - 1, k)
                den = Fraction(1)
                for k in range(1, i + 1):
                    if k != j:
                        den *= lij - _l_value(rows, i, k)
                mat[self._index[target]][col] += num / den
        return mat

    def lie_matrix_exact(self, i, j):
        return self._elementary(i, j)

    def lie_matrix(self, i, j):
        """Float matrix of the (i, j) matrix unit in the orthonormal basis."""
        key = (i, j)
        if key not in self._ortho_cache:
            raw = np.array(
                [[float(x) for x in row] for row in self._elementary(i, j)], dtype=float
            )
            self._ortho_cache[key] = (self._scale[:, None] * raw) / self._scale[None, :]
        return self._ortho_cache[key]

    def lie_apply_matrix(self, h):
        """Orthonormal-basis matrix of the Lie action of an arbitrary n x n h."""
        h = np.asarray(h, dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in range(self.n):
            for j in range(self.n):
                if h[i, j] != 0:
                    out += h[i, j] * self.lie_matrix(i + 1, j + 1)
        return out

    # -- group action --

    def group_matrix(self, g):
        """Matrix of the group action in the orthonormal basis."""
        g = np.asarray(g, dtype=complex)
        if g.shape != (self.n, self.n):
            raise InputError(f"expected a {self.n} x {self.n} matrix")
        ldu = _ldu_no_pivot(g)
        if ldu is not None:
            lo, dia, up = ldu
            pl = scipy.linalg.expm(self.lie_apply_matrix(_nilpotent_log(lo)))
            pu = scipy.linalg.expm(self.lie_apply_matrix(_nilpotent_log(up)))
            pd = np.prod(dia[:, np.newaxis] ** self._diag_exponents, axis=0)
            return pl @ (pd[:, np.newaxis] * pu)
        return self._group_matrix_polar(g)

    def _group_matrix_polar(self, g):
        w, vecs = np.linalg.eigh(g.conj().T @ g)
        if w[0] <= (1e-12) ** 2 * w[-1] or w[0] <= 0:
            raise DegenerateInputError("group element is numerically singular")
        sqrt_w = np.sqrt(w)
        log_p = (vecs * np.log(sqrt_w)) @ vecs.conj().T
        p_inv = (vecs / sqrt_w) @ vecs.conj().T
        k = g @ p_inv
        log_k = scipy.linalg.logm(k)
        mk = scipy.linalg.expm(self.lie_apply_matrix(log_k))
        mp = _exp_hermitian_matrix(self.lie_apply_matrix(log_p))
        return mk @ mp

    def apply(self, g, vec):
        return self.group_matrix(g) @ np.asarray(vec, dtype=complex)


def _commutator(a, b):
    m = len(a)
    out = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for k in range(m):
            aik = a[i][k]
            bik = b[i][k]
            if aik:
                row_b = b[k]
                for j in range(m):
                    if row_b[j]:
                        out[i][j] += aik * row_b[j]
            if bik:
                row_a = a[k]
                for j in range(m):
                    if row_a[j]:
                        out[i][j] -= bik * row_a[j]
    return out


def _ldu_no_pivot(g, tol=1e-10):
    """g = L diag(d) U with unit triangular L, U; None if a pivot is too small."""
    n = g.shape[0]
    a = g.astype(complex).copy()
    lo = np.eye(n, dtype=complex)
    up = np.eye(n, dtype=complex)
    d = np.empty(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(g)))
    for k in range(n):
        piv = a[k, k]
        if abs(piv) < tol * scale:
            return None
        d[k] = piv
        lo[k + 1 :, k] = a[k + 1 :, k] / piv
        up[k, k + 1 :] = a[k, k + 1 :] / piv
        a[k + 1 :, k + 1 :] -= np.outer(lo[k + 1 :, k], a[k, k + 1 :])
    return lo, d, up


def _nilpotent_log(t):
    """log of a unit-triangular matrix via the finite series of I - t."""
    n = t.shape[0]
    x = np.eye(n, dtype=complex) - t
    out = np.zeros_like(x)
    power = np.eye(n, dtype=complex)
    for i in range(1, n):
        power = power @ x
        out -= power / i
    return out


def _exp_hermitian_matrix(h):
    h = (h + h.conj().T) / 2.0
    w, u = np.linalg.eigh(h)
    return (u * np.exp(w)) @ u.conj().T


def gt_lie_matrix(irrep: GTIrrep, i, j):
    """Exact rational matrix of the (i, j) matrix unit in the raw GT basis."""
    return irrep.lie_matrix_exact(i, j)


def gt_gram(irrep: GTIrrep):
    """Exact squared invariant norms of the raw GT basis vectors."""
    return list(irrep.gram)


def gt_apply(irrep: GTIrrep, g, vec):
    """Group action on an orthonormal-basis coordinate vector."""
    return irrep.apply(g, vec)


class GTSummand(Representation):
    """Tensor product of per-factor GT irreps over a product of GL factors."""

    family = "gt"

    def __init__(self, irreps, group: GroupSpec):
        if len(irreps) != len(group.factors):
            raise InputError("need one highest weight per group factor")
        for (kind, n), ir in zip(group.factors, irreps):
            if kind is not FactorKind.GL:
                raise InputError("GT representations are built over GL factors")
            if ir.n != n:
                raise InputError("highest weight length must match the factor size")
        self.irreps = list(irreps)
        self.group = group
        self.shape = tuple(ir.dim for ir in irreps)
        self.dim = int(np.prod(self.shape))
        self.multidegree = tuple(ir.degree for ir in irreps)

    def apply(self, g, v):
        t = np.asarray(v, dtype=complex).reshape(self.shape)
        for axis, (ir, blk) in enumerate(zip(self.irreps, g.blocks)):
            m = ir.group_matrix(blk)
            t = np.moveaxis(np.tensordot(m, t, axes=(1, axis)), 0, axis)
        return t.reshape(-1)

    def lie_apply_factor(self, fi, block, v):
        t = np.asarray(v, dtype=complex).reshape(self.shape)
        m = self.irreps[fi].lie_apply_matrix(np.asarray(block, dtype=complex))
        out = np.moveaxis(np.tensordot(m, t, axes=(1, fi)), 0, fi)
        return out.reshape(-1)

    def weights(self):
        out = []
        per_factor = [[p.weight() for p in ir.patterns] for ir in self.irreps]
        for combo in itertools.product(*per_factor):
            out.append(Weight(tuple(combo)))
        return dedupe_weights(out)


def gt_orthonormal_rep(lambda_list, factor_sizes):
    """Direct sum of GT irreducibles of GL(n_1) x ... x GL(n_k).

    lambda_list: one entry per summand, each a tuple of per-factor highest
    weights.  The working basis is orthonormal for the invariant inner product.
    """
    factor_sizes = tuple(int(n) for n in factor_sizes)
    group = GroupSpec(tuple((FactorKind.GL, n) for n in factor_sizes))
    summands = []
    for lam_tuple in lambda_list:
        if len(lam_tuple) != len(factor_sizes):
            raise InputError("each summand needs one highest weight per factor")
        irreps = [GTIrrep(lam) for lam in lam_tuple]
        summands.append(GTSummand(irreps, group))
    if len(summands) == 1:
        rep = summands[0]
    else:
        rep = DirectSumRep(summands)
        rep.family = "gt"
    return rep
