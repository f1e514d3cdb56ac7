"""Weight norm and weight margin computations.

Exact margin by subset enumeration at small scale, the gap / alpha / beta
machinery of the weight matrix with exact rational determinants, total
unimodularity detection, closed-form lower bounds per structural class, and
the constructive upper-bound witnesses for the left-right and conjugation
actions.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import EnumerationBudgetError, InputError
from .groups import FactorKind
from .kernels import min_norm_point
from .reps import Representation, Weight

DEFAULT_SUBSET_LIMIT = 18
DEFAULT_RANK_LIMIT = 4
DEFAULT_ROW_LIMIT = 20


@dataclasses.dataclass
class WeightMatrix:
    """Deduplicated weight rows as exact rationals."""

    rows: list  # list of tuples of Fraction
    cols: int

    @classmethod
    def from_rep(cls, rep: Representation):
        rows = [w.concat() for w in rep.weights()]
        return cls(rows=rows, cols=rep.group.total_size)

    @classmethod
    def from_rows(cls, rows):
        rows = [tuple(Fraction(x) for x in r) for r in rows]
        if not rows:
            raise InputError("weight matrix needs at least one row")
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise InputError("ragged weight rows")
        dedup = list(dict.fromkeys(rows))
        return cls(rows=dedup, cols=cols)

    def as_array(self):
        return np.array([[float(x) for x in r] for r in self.rows])

    @property
    def shape(self):
        return (len(self.rows), self.cols)


@dataclasses.dataclass
class MarginResult:
    value: float
    kind: str  # "exact" | "lower_bound" | "upper_bound"
    method: str  # brute_force | gap | unimodular | general | quiver | table
    witness: object = None
    note: str = ""

    def as_dict(self):
        return {
            "value": self.value if math.isfinite(self.value) else "inf",
            "kind": self.kind,
            "method": self.method,
            "note": self.note,
        }


def weight_norm(rep: Representation) -> float:
    """Max Euclidean weight norm; restrictions report their parent's value."""
    return rep.weight_norm()


def _exact_det(rows):
    """Exact determinant of a square matrix of Fractions (Gaussian elimination)."""
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                factor = m[r][col] * inv
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return det


def _check_enumeration_budget(mat: WeightMatrix, rank_limit, row_limit):
    rows, cols = mat.shape
    if min(rows, cols) > rank_limit or rows > row_limit:
        raise EnumerationBudgetError(
            f"submatrix enumeration refused for shape {mat.shape}: "
            f"limits are min(rows, cols) <= {rank_limit} and rows <= {row_limit}"
        )


def gap_alpha_beta(mat: WeightMatrix, rank_limit=DEFAULT_RANK_LIMIT,
                   row_limit=DEFAULT_ROW_LIMIT):
    """Exact gap, alpha, beta over all invertible square submatrices.

    gap = min smallest singular value, alpha/beta = min/max |det| (exact
    rationals).  Refuses if the enumeration budget is exceeded.
    """
    _check_enumeration_budget(mat, rank_limit, row_limit)
    rows, cols = mat.shape
    alpha = None
    beta = Fraction(0)
    gap = math.inf
    arr = mat.as_array()
    for r in range(1, min(rows, cols) + 1):
        for ridx in itertools.combinations(range(rows), r):
            sub_rows = [mat.rows[i] for i in ridx]
            for cidx in itertools.combinations(range(cols), r):
                square = [[row[j] for j in cidx] for row in sub_rows]
                det = _exact_det(square)
                if det == 0:
                    continue
                absdet = abs(det)
                alpha = absdet if alpha is None else min(alpha, absdet)
                beta = max(beta, absdet)
                sv = np.linalg.svd(arr[np.ix_(ridx, cidx)], compute_uv=False)
                gap = min(gap, float(sv[-1]))
    if alpha is None:
        raise InputError("weight matrix is zero; gap undefined")
    return gap, alpha, beta


def is_totally_unimodular(mat: WeightMatrix, rank_limit=DEFAULT_RANK_LIMIT,
                          row_limit=DEFAULT_ROW_LIMIT) -> bool:
    """Exact total unimodularity test: every square subdeterminant in {0, +-1}."""
    _check_enumeration_budget(mat, rank_limit, row_limit)
    if any(x.denominator != 1 for row in mat.rows for x in row):
        return False
    rows, cols = mat.shape
    for r in range(1, min(rows, cols) + 1):
        for ridx in itertools.combinations(range(rows), r):
            sub_rows = [mat.rows[i] for i in ridx]
            for cidx in itertools.combinations(range(cols), r):
                square = [[row[j] for j in cidx] for row in sub_rows]
                if abs(_exact_det(square)) > 1:
                    return False
    return True


def weight_margin_exact(weights, subset_limit=DEFAULT_SUBSET_LIMIT) -> MarginResult:
    """Exact weight margin by enumerating subsets up to size n + 1.

    The minimizing face of any hull avoiding the origin is spanned by an
    affinely independent subset, so subsets of at most n + 1 weights suffice.
    Witness is the lexicographically first minimizing subset.
    """
    if weights and isinstance(weights[0], Weight):
        vecs = [w.as_array() for w in weights]
    else:
        vecs = [np.asarray(w, dtype=float) for w in weights]
    count = len(vecs)
    if count == 0:
        raise InputError("need at least one weight")
    if count > subset_limit:
        raise EnumerationBudgetError(
            f"{count} weights exceed the exact-enumeration limit {subset_limit}; "
            "use margin_lower_bound instead"
        )
    dim = vecs[0].size
    best = math.inf
    witness = None
    max_size = min(count, dim + 1)
    for size in range(1, max_size + 1):
        for idx in itertools.combinations(range(count), size):
            pts = np.array([vecs[i] for i in idx])
            _, norm, _ = min_norm_point(pts)
            if norm > 1e-9 and norm < best - 1e-15:
                best = norm
                witness = idx
    if witness is None:
        return MarginResult(
            value=math.inf,
            kind="exact",
            method="brute_force",
            note="every weight-subset hull contains the origin; no unstable support exists",
        )
    return MarginResult(value=best, kind="exact", method="brute_force", witness=witness)


def _is_sl_like(rep):
    return any(k.is_special for k, _ in rep.group.factors)


def margin_lower_bound(rep: Representation) -> MarginResult:
    """Best applicable weight-margin bound with its method tag.

    Tries exact enumeration first; otherwise takes the largest among the
    gap-based, total-unimodularity, quiver, named-family, and general bounds.
    """
    weights = rep.weights()
    n = rep.group.total_size
    nw = rep.weight_norm()

    if len(weights) <= DEFAULT_SUBSET_LIMIT:
        return weight_margin_exact(weights)

    candidates = []

    mat = WeightMatrix.from_rep(rep)
    try:
        gap, _, _ = gap_alpha_beta(mat)
        candidates.append(MarginResult(gap / math.sqrt(n), "lower_bound", "gap"))
        if is_totally_unimodular(mat):
            candidates.append(MarginResult(n ** (-1.5), "lower_bound", "unimodular"))
    except EnumerationBudgetError:
        pass

    if rep.structure == "quiver":
        if not _is_sl_like(rep):
            candidates.append(MarginResult(n ** (-1.5), "lower_bound", "quiver"))
        else:
            sizes = rep.group.sizes
            k = len(sizes)
            prod = 1
            for s in sizes:
                prod *= s
            candidates.append(
                MarginResult(
                    prod ** (-k) * (n + 1) ** (-k) * n ** (-1.5), "lower_bound", "quiver"
                )
            )

    if rep.family in ("operator_scaling", "matrix_scaling"):
        block = rep.group.sizes[0]
        candidates.append(
            MarginResult(
                block ** (-1.5),
                "lower_bound",
                "table",
                note="named-family bound for the left-right/matrix scaling actions",
            )
        )

    if rep.family == "tensor" and _is_sl_like(rep):
        sizes = rep.group.sizes
        if len(sizes) == 3 and sizes[1] == sizes[2]:
            n0, n1 = sizes[0], sizes[1]
            amb = 2 * n1
            val = (
                (1.0 / n1)
                * (1.0 + 2.0 * n1) ** (-2)
                * (1.0 + 2.0 * n0 * (amb + n0)) ** (-n0)
                * amb ** (-1.5)
            )
            candidates.append(
                MarginResult(val, "lower_bound", "table", note="3-tensor product-action bound")
            )

    if _is_sl_like(rep):
        lcm = 1
        for s in rep.group.sizes:
            lcm = lcm * s // math.gcd(lcm, s)
        candidates.append(
            MarginResult(lcm ** (-float(n)) * nw ** (1.0 - n) / n, "lower_bound", "general")
        )
    else:
        candidates.append(MarginResult(nw ** (1.0 - n) / n, "lower_bound", "general"))

    return max(candidates, key=lambda c: c.value)


def margin_upper_witness_operator_scaling(n: int):
    """Constructive upper bound for the left-right action margin, even n >= 4.

    Builds the block distribution whose row marginals deviate from uniform by
    about 2 n^{-3/2} while its support hull provably misses the balanced
    point.  Returns (distribution, value) and checks the support condition.
    """
    if n < 4 or n % 2 != 0:
        raise InputError("the witness construction needs even n >= 4")
    s = n // 2
    x = np.zeros((n, n))
    x[: s - 1, :s] = 1.0 / (2.0 * s * (s - 1))
    x[s - 1 :, s:] = 1.0 / (2.0 * s * (s + 1))
    r = x.sum(axis=1)
    c = x.sum(axis=0)
    value = math.sqrt(
        float(np.sum((r - 1.0 / n) ** 2)) + float(np.sum((c - 1.0 / n) ** 2))
    )

    # Support condition: the hull of the SL-projected weights over the
    # witness support misses the origin.
    support = [(i, j) for i in range(n) for j in range(n) if x[i, j] > 0]
    pts = []
    for i, j in support:
        w = np.zeros(2 * n)
        w[i] += 1.0
        w[n + j] += 1.0
        w -= 1.0 / n
        pts.append(w)
    _, hull_dist, _ = min_norm_point(np.array(pts))
    if hull_dist <= 1e-9:
        raise InputError("witness support hull unexpectedly contains the origin")
    return x, value


def margin_upper_witness_conjugation(n: int):
    """Constructive upper bound for the simultaneous-conjugation margin, n >= 3.

    Distribution supported on consecutive pairs (i, i+1) whose weight average
    has norm Theta(n^{-3/2}); the strictly-upper-triangular support hull
    misses the origin.
    """
    if n < 3:
        raise InputError("need n >= 3 (for n = 2 the margin is exactly sqrt(2))")
    p = np.array([i * (n - 1) / 2.0 - i * (i - 1) / 2.0 for i in range(1, n)])
    lam = 1.0 / p.sum()
    x = np.zeros((n, n))
    for i in range(n - 1):
        x[i, i + 1] = lam * p[i]
    r = x.sum(axis=1)
    c = x.sum(axis=0)
    value = float(np.linalg.norm(r - c))

    pts = []
    for i in range(n):
        for j in range(i + 1, n):
            w = np.zeros(n)
            w[i] += 1.0
            w[j] -= 1.0
            pts.append(w)
    _, hull_dist, _ = min_norm_point(np.array(pts))
    if hull_dist <= 1e-9:
        raise InputError("upper-triangular support hull unexpectedly contains the origin")
    return x, value
