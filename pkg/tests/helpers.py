"""Shared construction helpers for the test suite."""

import numpy as np

from geoscale.groups import project_direction


def random_direction(group, rng, norm=1.0):
    """Random unit (or given-norm) tangent direction."""
    blocks = []
    for kind, n in group.factors:
        if kind.is_torus:
            blocks.append(rng.standard_normal(n))
        else:
            blocks.append(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    d = project_direction(group, blocks)
    return d.scaled(norm / d.norm())


def random_element(group, rng, spread=0.4):
    """Random group element of the form exp(H) with |H| = spread."""
    return random_direction(group, rng, spread).exp()


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))[np.newaxis, :]


def pairing(direction_a, direction_b):
    """Real trace pairing of two tangent directions / moment values."""
    total = 0.0
    for (kind, _), a, b in zip(direction_a.group.factors, direction_a.blocks, direction_b.blocks):
        if kind.is_torus:
            total += float(np.dot(np.real(a), np.real(b)))
        else:
            total += float(np.real(np.trace(a @ b)))
    return total


def gaussian_integer_vector(rng, size, bound=10):
    re = rng.integers(-bound, bound + 1, size=size)
    im = rng.integers(-bound, bound + 1, size=size)
    v = (re + 1j * im).astype(complex)
    if np.linalg.norm(v) == 0:
        v[0] = 1.0
    return v
