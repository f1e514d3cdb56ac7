import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg

from helpers import pairing, random_direction, random_element, random_unitary
from geoscale.errors import ContractViolationError, InputError
from geoscale.groups import FactorKind, GroupElement, GroupSpec, LieDirection
from geoscale.kernels import qr_decompose
from geoscale.reps import (
    conjugation_rep,
    direct_sum,
    lie_matrix,
    matrix_scaling_rep,
    operator_scaling_rep,
    quiver_rep,
    restrict_to_sl,
    tensor_rep,
    torus_rep,
)

ALL_BUILTINS = [
    lambda: torus_rep([[1], [-1]]),
    lambda: torus_rep([[1, 0], [0, 1], [2, -1]]),
    lambda: matrix_scaling_rep(2),
    lambda: operator_scaling_rep(2, 2, "GL"),
    lambda: operator_scaling_rep(2, 1, "SL"),
    lambda: tensor_rep([2, 2], "GL"),
    lambda: tensor_rep([2, 2, 2], "SL"),
    lambda: conjugation_rep(2, 2),
    lambda: quiver_rep(2, [(0, 1), (1, 0)], [2, 2], "GL"),
]


def test_group_spec_validation():
    with pytest.raises(InputError):
        GroupSpec(())
    with pytest.raises(InputError):
        GroupSpec(((FactorKind.GL, 0),))
    spec = GroupSpec(((FactorKind.GL, 2), (FactorKind.TORUS, 3)))
    assert spec.total_size == 5
    assert spec.tangent_dim() == 4 + 3
    assert spec.restricted().factors[0][0] is FactorKind.SL
    assert spec.restricted().tangent_dim() == 3 + 2


def test_special_factor_validation():
    spec = GroupSpec(((FactorKind.SL, 2),))
    with pytest.raises(ContractViolationError):
        GroupElement(spec, [np.diag([2.0, 2.0]).astype(complex)])
    GroupElement(spec, [np.diag([2.0, 0.5]).astype(complex)])  # det 1: fine
    with pytest.raises(ContractViolationError):
        LieDirection(spec, [np.eye(2, dtype=complex)])  # not traceless


def test_torus_rep_examples():
    rep = torus_rep([[1], [-1]])
    g = GroupElement(rep.group, [np.array([2.0 + 0j])])
    out = rep.apply(g, np.array([1.0, 1.0]))
    assert np.allclose(out, [2.0, 0.5])

    rep = torus_rep([[1, 0], [0, 1]])
    out = rep.lie_apply([np.array([1.0, 0.0])], np.array([1.0, 1.0]))
    assert np.allclose(out, [1.0, 0.0])

    with pytest.raises(InputError):
        torus_rep([[1, 0], [1]])


def test_operator_scaling_examples():
    rep = operator_scaling_rep(2, 1, "GL")
    ws = rep.weights()
    assert len(ws) == 4
    assert all(float(w.norm_sq()) == 2 for w in ws)
    g = GroupElement(rep.group, [np.diag([2.0, 0.5]).astype(complex), np.eye(2, dtype=complex)])
    out = rep.apply(g, np.array([1, 1, 1, 1], dtype=complex)).reshape(2, 2)
    assert np.allclose(out, [[2, 2], [0.5, 0.5]])
    # lie action: H1 X + X H2^T
    h1 = np.array([[1.0, 0], [0, -1.0]], dtype=complex)
    h2 = np.array([[0, 1.0], [1.0, 0]], dtype=complex)
    x = np.arange(4, dtype=complex)
    out = rep.lie_apply([h1, h2], x).reshape(2, 2)
    xm = x.reshape(2, 2)
    assert np.allclose(out, h1 @ xm + xm @ h2.T)


def test_tensor_examples():
    rep = tensor_rep([2, 2], "GL")
    a = 1.7
    g = GroupElement(rep.group, [np.diag([a, 1 / a]).astype(complex), np.eye(2, dtype=complex)])
    e11 = np.zeros(4, dtype=complex)
    e11[0] = 1.0
    assert np.allclose(rep.apply(g, e11), a * e11)
    assert rep.weight_norm() == math.sqrt(2)
    assert tensor_rep([2, 2, 2], "GL").weight_norm() == math.sqrt(3)


def test_conjugation_examples():
    rep = conjugation_rep(2, 1)
    ws = sorted(w.blocks for w in rep.weights())
    assert ws == sorted(
        [((Fraction(0), Fraction(0)),), ((Fraction(1), Fraction(-1)),), ((Fraction(-1), Fraction(1)),)]
    )
    h = np.diag([1.0, -1.0]).astype(complex)
    e12 = np.zeros(4, dtype=complex)
    e12[1] = 1.0
    assert np.allclose(rep.lie_apply([h], e12), 2.0 * e12)
    # diagonal fixed point
    g = GroupElement(rep.group, [np.diag([2.0, 3.0]).astype(complex)])
    d = np.array([5.0, 0, 0, -1.0], dtype=complex)
    assert np.allclose(rep.apply(g, d), d)


def test_quiver_examples():
    # one vertex with k loops reproduces the conjugation weights
    loop = quiver_rep(1, [(0, 0), (0, 0)], [2], "GL")
    conj = conjugation_rep(2, 2)
    assert sorted(w.blocks for w in loop.weights()) == sorted(w.blocks for w in conj.weights())
    # Kronecker quiver action: g_h X g_t^{-1}
    rep = quiver_rep(2, [(0, 1)], [2, 2], "GL")
    g = GroupElement(
        rep.group, [np.diag([2.0, 0.5]).astype(complex), np.eye(2, dtype=complex)]
    )
    x = np.arange(1, 5, dtype=complex)
    out = rep.apply(g, x).reshape(2, 2)
    assert np.allclose(out, x.reshape(2, 2) @ np.diag([0.5, 2.0]))
    # star quiver with two edges: Horn action (X, Y) -> (g1 X g3^-1, g2 Y g3^-1)
    star = quiver_rep(3, [(2, 0), (2, 1)], [2, 2, 2], "GL")
    assert star.dim == 8
    ws = {w.blocks for w in star.weights()}
    assert len(ws) == 8  # e_{vertex0 or 1, i} - e_{vertex2, j}
    with pytest.raises(InputError):
        quiver_rep(2, [(0, 5)], [2, 2], "GL")


def test_direct_sum():
    a = torus_rep([[1, 0]])
    b = torus_rep([[0, 1], [1, 0]])
    s = direct_sum([a, b])
    assert s.dim == 3
    combined = torus_rep([[1, 0], [0, 1]])
    assert {w.blocks for w in s.weights()} == {w.blocks for w in combined.weights()}
    g = GroupElement(a.group, [np.array([2.0, 3.0], dtype=complex)])
    v = np.array([1.0, 1.0, 1.0], dtype=complex)
    out = s.apply(g, v)
    assert np.allclose(out, [2.0, 3.0, 2.0])
    with pytest.raises(InputError):
        direct_sum([a, operator_scaling_rep(2, 1, "GL")])


def test_restrict_to_sl_projection():
    rep = operator_scaling_rep(2, 1, "SL")
    ws = {w.blocks for w in rep.weights()}
    half = Fraction(1, 2)
    assert ((half, -half), (half, -half)) in ws
    # projected blocks sum to zero exactly
    for w in ws:
        for blk in w:
            assert sum(blk, Fraction(0)) == 0
    # matrix scaling n=2: entries +-1/2
    ms = matrix_scaling_rep(2)
    for w in ms.weights():
        for blk in w.blocks:
            assert all(abs(x) == half for x in blk)
    # homogeneous degree-d rep: projection removes the trace
    t3 = tensor_rep([2, 2, 2], "SL")
    for w in t3.weights():
        for blk in w.blocks:
            assert sum(blk, Fraction(0)) == 0


def test_homomorphism_property():
    rng = np.random.default_rng(10)
    for make in ALL_BUILTINS:
        rep = make()
        for _ in range(6):
            g = random_element(rep.group, rng)
            h = random_element(rep.group, rng)
            v = rep.random_vector(rng)
            lhs = rep.apply(g @ h, v)
            rhs = rep.apply(g, rep.apply(h, v))
            assert np.linalg.norm(lhs - rhs) <= 1e-8 * np.linalg.norm(v) * 10


def test_identity_action():
    rng = np.random.default_rng(11)
    for make in ALL_BUILTINS:
        rep = make()
        v = rep.random_vector(rng)
        out = rep.apply(rep.group.identity(), v)
        assert np.linalg.norm(out - v) <= 1e-12 * np.linalg.norm(v)


def test_exponential_consistency():
    rng = np.random.default_rng(12)
    for make in ALL_BUILTINS:
        rep = make()
        h = random_direction(rep.group, rng)
        v = rep.random_vector(rng)
        mat = lie_matrix(rep, h)
        for t in (0.1, 1.0):
            lhs = rep.apply(h.scaled(t).exp(), v)
            rhs = scipy.linalg.expm(t * mat) @ v
            assert np.linalg.norm(lhs - rhs) <= 1e-7 * max(1.0, np.linalg.norm(rhs))


def test_weight_consistency_diagonal_action():
    # For diagonal H the weight vectors are eigenvectors with eigenvalue tr[H w].
    rng = np.random.default_rng(13)
    for make in ALL_BUILTINS:
        rep = make()
        mat = None
        hblocks = []
        for kind, n in rep.group.factors:
            d = rng.standard_normal(n)
            if kind.is_special:
                d -= d.mean()
            hblocks.append(d if kind.is_torus else np.diag(d).astype(complex))
        mat = lie_matrix(rep, hblocks)
        hvec = np.concatenate(
            [np.real(np.diagonal(b)) if np.asarray(b).ndim == 2 else b for b in hblocks]
        )
        # The Lie matrix must be diagonalizable with eigenvalues tr[H w]
        eigs = np.sort(np.real(np.linalg.eigvals(mat)))
        expected = sorted(
            float(np.dot(w.as_array(), hvec)) for w in rep.weights()
        )
        # weights() is deduplicated; compare as sets with tolerance
        for e in expected:
            assert np.min(np.abs(eigs - e)) <= 1e-8


def test_unitarity_of_invariant_norm():
    rng = np.random.default_rng(14)
    for make in ALL_BUILTINS:
        rep = make()
        blocks = []
        for kind, n in rep.group.factors:
            if kind.is_torus:
                phases = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
                if kind.is_special:
                    phases /= np.prod(phases) ** (1.0 / n)
                blocks.append(phases)
            else:
                k = random_unitary(n, rng)
                if kind.is_special:
                    k /= np.linalg.det(k) ** (1.0 / n)
                blocks.append(k)
        k = GroupElement(rep.group, blocks)
        v = rep.random_vector(rng)
        gram = rep.invariant_norm_gram()
        norm = lambda x: math.sqrt(float(np.sum(gram * np.abs(x) ** 2)))
        assert abs(norm(rep.apply(k, v)) - norm(v)) <= 1e-8 * norm(v)


def test_qr_unitary_factor_in_group():
    rng = np.random.default_rng(15)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) + 2 * np.eye(3)
    k, b = qr_decompose(g)
    assert np.allclose(k @ k.conj().T, np.eye(3), atol=1e-12)


def test_weight_norm_reported_from_parent():
    assert operator_scaling_rep(3, 2, "SL").weight_norm() == math.sqrt(2)
    assert matrix_scaling_rep(3).weight_norm() == math.sqrt(2)
    assert tensor_rep([2, 2, 2], "SL").weight_norm() == math.sqrt(3)
    assert conjugation_rep(4, 2).weight_norm() == math.sqrt(2)
