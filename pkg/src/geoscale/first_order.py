"""First-order geodesic solvers: scaling, spectrum-targeted (p-) scaling,
the randomized start for p-scaling, and the iteration budget formulas.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigurationError, InputError, RandomnessFailureError
from .geometry import (
    MomentValue,
    TargetSpectrum,
    moment_map,
    spec_distance,
)
from .groups import GroupElement, project_direction
from .kernels import qr_decompose
from .reps import Representation

REPROJECT_EVERY = 100


@dataclasses.dataclass
class FirstOrderConfig:
    step_size: float
    max_iterations: int
    target: float
    trace_every: int = 50

    def __post_init__(self):
        if self.step_size <= 0:
            raise InputError("step size must be positive")
        if self.max_iterations < 1:
            raise InputError("need at least one iteration")
        if self.target <= 0:
            raise InputError("target must be positive")
        if self.trace_every < 1:
            raise InputError("trace stride must be positive")


@dataclasses.dataclass
class ScalingReport:
    best_g: GroupElement
    best_grad_norm: float
    iterations_used: int
    trace: list
    status: str
    best_value: float = math.nan
    extras: dict = dataclasses.field(default_factory=dict)

    @property
    def converged(self):
        return self.status == "converged"


def first_order_minimize(oracle: Callable, group, config: FirstOrderConfig,
                         start: GroupElement | None = None) -> ScalingReport:
    """Geodesic gradient descent, by default from the identity.

    oracle(g) must return (gradient: LieDirection, value: float).  Returns the
    visited iterate with the smallest gradient norm; stops early once that
    norm reaches the target.
    """
    g = group.identity() if start is None else start.copy()
    best_g = g.copy()
    best_norm = math.inf
    best_value = math.nan
    trace = []
    iterations = 0
    eta = config.step_size
    for t in range(config.max_iterations):
        grad, value = oracle(g)
        gnorm = grad.norm()
        iterations = t + 1
        if gnorm < best_norm:
            best_norm = gnorm
            best_g = g.copy()
            best_value = value
        if t % config.trace_every == 0:
            trace.append((t, gnorm, value))
        if best_norm <= config.target:
            break
        g = grad.scaled(-eta).exp() @ g
        if (t + 1) % REPROJECT_EVERY == 0:
            g.reproject_special()
    if not trace or trace[-1][0] != iterations - 1:
        trace.append((iterations - 1, gnorm, value))
    status = "converged" if best_norm <= config.target else "budget_exhausted"
    return ScalingReport(
        best_g=best_g,
        best_grad_norm=best_norm,
        iterations_used=iterations,
        trace=trace,
        status=status,
        best_value=best_value,
    )


def _normalized_descent(rep: Representation, v, grad_fn, config: FirstOrderConfig,
                        start: GroupElement | None = None) -> ScalingReport:
    """Gradient descent that tracks a unit vector and the log-norm separately.

    The moment map is scale invariant, so iterating on the normalized
    transformed vector is exact while avoiding overflow/underflow when the
    orbit norm collapses or blows up (e.g. on null-cone inputs).
    """
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0 or not np.isfinite(nrm):
        raise InputError("vector must be nonzero and finite")
    if start is None:
        g = rep.group.identity()
        w = v / nrm
        log_norm = float(np.log(nrm))
    else:
        g = start.copy()
        w = rep.apply(g, v)
        wn = np.linalg.norm(w)
        w = w / wn
        log_norm = float(np.log(wn))

    best_g = g.copy()
    best_norm = math.inf
    best_value = math.nan
    trace = []
    iterations = 0
    eta = config.step_size
    gnorm, value = math.nan, math.nan
    for t in range(config.max_iterations):
        grad, shift = grad_fn(g, w)
        value = log_norm + shift
        gnorm = grad.norm()
        iterations = t + 1
        if gnorm < best_norm:
            best_norm, best_g, best_value = gnorm, g.copy(), value
        if t % config.trace_every == 0:
            trace.append((t, gnorm, value))
        if best_norm <= config.target:
            break
        step = grad.scaled(-eta).exp()
        w = rep.apply(step, w)
        wn = np.linalg.norm(w)
        w = w / wn
        log_norm += float(np.log(wn))
        with np.errstate(over="ignore", invalid="ignore"):
            # On divergent (null-cone) runs g itself may overflow; the
            # normalized w carries all information the iteration needs.
            g = step @ g
        if (t + 1) % REPROJECT_EVERY == 0:
            corr = _reprojection_element(g)
            if corr is not None:
                w = rep.apply(corr, w)
                wn = np.linalg.norm(w)
                w = w / wn
                log_norm += float(np.log(wn))
                g = corr @ g
    if not trace or trace[-1][0] != iterations - 1:
        trace.append((iterations - 1, gnorm, value))
    status = "converged" if best_norm <= config.target else "budget_exhausted"
    return ScalingReport(
        best_g=best_g,
        best_grad_norm=best_norm,
        iterations_used=iterations,
        trace=trace,
        status=status,
        best_value=best_value,
    )


def _reprojection_element(g: GroupElement):
    """Scalar per-block correction moving special factors back to det 1.

    Skipped (None) for blocks that already overflowed; those runs are
    divergent and only the separately tracked unit vector matters.
    """
    blocks = []
    needed = False
    for (kind, n), b in zip(g.group.factors, g.blocks):
        c = 1.0
        if kind.is_special and np.all(np.isfinite(b.view(float))):
            with np.errstate(over="ignore", invalid="ignore"):
                det = np.prod(b) if kind.is_torus else np.linalg.det(b)
            if np.isfinite(det) and det != 0:
                c = det ** (-1.0 / n)
                if abs(c - 1.0) > 1e-15:
                    needed = True
                else:
                    c = 1.0
        blocks.append(np.full(n, c, dtype=complex) if kind.is_torus else c * np.eye(n, dtype=complex))
    return GroupElement(g.group, blocks, validate=False) if needed else None


def scaling_solve(rep: Representation, v, target: float, max_iterations=None,
                  log_norm_over_cap=None, trace_every=50) -> ScalingReport:
    """Drive the moment map of pi(g)v to norm <= target.

    Step size 1/(2 N(pi)^2).  When no iteration budget is given it is derived
    from the scaling budget formula with C = 40 ln(10) m, a documented
    heuristic recorded in the report.
    """
    v = np.asarray(v, dtype=complex)
    if np.linalg.norm(v) == 0:
        raise InputError("vector must be nonzero")
    nw = rep.weight_norm()
    extras = {"weight_norm": nw, "step_size": 1.0 / (2.0 * nw**2)}
    if max_iterations is None:
        c = log_norm_over_cap
        if c is None:
            c = 40.0 * math.log(10.0) * rep.dim
            extras["budget_C"] = c
            extras["budget_C_heuristic"] = True
        max_iterations = iteration_budget_scaling(nw, target, c)

    def grad_fn(g, w):
        return moment_map(rep, w), 0.0

    config = FirstOrderConfig(
        step_size=1.0 / (2.0 * nw**2),
        max_iterations=max(1, int(max_iterations)),
        target=target,
        trace_every=trace_every,
    )
    report = _normalized_descent(rep, v, grad_fn, config)
    report.extras.update(extras)
    return report


def p_scaling_solve(rep: Representation, v, p: TargetSpectrum, target: float,
                    max_iterations, trace_every=50, start=None) -> ScalingReport:
    """Drive spec(mu(pi(g)v)) to the target spectrum p.

    Minimizes the shifted objective whose gradient is mu(pi(g)v) + k p* k^+;
    step size 1/(2 N^2) with N^2 = N(pi)^2 + |p|_2.  The returned extras
    record the final per-factor spectra and the spectral distance to p.
    """
    v = np.asarray(v, dtype=complex)
    if np.linalg.norm(v) == 0:
        raise InputError("vector must be nonzero")
    for kind, _ in rep.group.factors:
        if kind.is_torus:
            raise InputError("p-scaling runs over GL factors")
    nsq = rep.weight_norm() ** 2 + p.norm()

    stars = p.star_blocks()

    def grad_fn(g, w):
        mu = moment_map(rep, w)
        blocks = []
        # Shifted objective: the highest-weight-line term sum_j p*_j log b_jj
        # comes from the positive-diagonal QR factor of each block.
        shift = 0.0
        for gb, mb, ps in zip(g.blocks, mu.blocks, stars):
            k, b = qr_decompose(gb)
            blocks.append(mb + (k * ps[np.newaxis, :]) @ k.conj().T)
            shift += float(np.sum(ps * np.log(np.real(np.diagonal(b)))))
        proj = project_direction(g.group, blocks)
        return MomentValue(g.group, proj.blocks, validate=False), shift

    config = FirstOrderConfig(
        step_size=1.0 / (2.0 * nsq),
        max_iterations=max(1, int(max_iterations)),
        target=target,
        trace_every=trace_every,
    )
    report = _normalized_descent(rep, v, grad_fn, config, start=start)
    dist, spectra = spec_distance(rep, v, report.best_g, p)
    report.extras.update(
        {
            "step_size": config.step_size,
            "spec_distance": dist,
            "spectra": [list(map(float, s)) for s in spectra],
        }
    )
    return report


def paper_randomization_bound(n: int, d: int):
    """The published size bound 4 n^(3n^3+1) d^(n^4) for the random start."""
    return 4 * n ** (3 * n**3 + 1) * max(d, 1) ** (n**4)


def randomized_p_scaling(rep: Representation, v, p: TargetSpectrum, target: float,
                         max_iterations, rng=None, s_override=None,
                         trace_every=50) -> ScalingReport:
    """p-scaling from a random integer group element g0; returns g1 g0.

    Entries of g0 are drawn i.i.d. uniformly from {1, ..., S}.  The published
    S overflows 64-bit integers already for modest sizes; callers must then
    pass s_override (the success-probability guarantee becomes heuristic and
    is flagged in the report).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n_total = rep.group.total_size
    degree = sum(rep.multidegree) if rep.multidegree is not None else None
    s_heuristic = False
    if s_override is not None:
        s = int(s_override)
        if not (1 <= s < 2**63):
            raise InputError("s_override must be a positive integer below 2^63")
        s_heuristic = True
    else:
        if degree is None:
            raise ConfigurationError(
                "representation degree unknown; pass s_override to choose the range"
            )
        s = paper_randomization_bound(n_total, degree)
        if s >= 2**63:
            raise ConfigurationError(
                f"the published randomization bound S = {s:.3e} overflows 64-bit "
                "integers; pass s_override to run with a heuristic range"
            )
    blocks = []
    for kind, n in rep.group.factors:
        blk = rng.integers(1, s + 1, size=(n, n)).astype(complex)
        blocks.append(blk)
    g0 = GroupElement(rep.group, blocks, validate=False)
    for blk in g0.blocks:
        if abs(np.linalg.det(blk)) == 0.0:
            raise RandomnessFailureError("random integer start is singular; retry the seed")
    v0 = rep.apply(g0, v)
    if not np.all(np.isfinite(v0)):
        raise RandomnessFailureError("random start overflowed; use a smaller s_override")
    report = p_scaling_solve(rep, v0, p, target, max_iterations, trace_every=trace_every)
    combined = report.best_g @ g0
    dist, spectra = spec_distance(rep, v, combined, p)
    report.best_g = combined
    report.extras.update(
        {
            "random_start": [blk.real.astype(int).tolist() for blk in g0.blocks],
            "s_used": s,
            "s_heuristic": s_heuristic,
            "spec_distance": dist,
            "spectra": [list(map(float, s_)) for s_ in spectra],
        }
    )
    return report


def iteration_budget_scaling(weight_norm: float, target: float, log_norm_over_cap: float) -> int:
    """ceil(4 N^2 C / eps^2) iterations suffice for the scaling problem."""
    if weight_norm <= 0 or target <= 0 or log_norm_over_cap < 0:
        raise InputError("arguments must be positive (C may be zero)")
    return int(math.ceil(4.0 * weight_norm**2 * log_norm_over_cap / target**2))


class PolytopeEpsilon(NamedTuple):
    value: Fraction
    note: str


def polytope_membership_epsilon(n: int, d: int, ell: int) -> PolytopeEpsilon:
    """Sufficient p-scaling accuracy (2 ell)^-(n+1) d^-n n^-1 for membership.

    Exact rational; sufficient but typically astronomically small, hence
    flagged as a heuristic default rather than a practical choice.
    """
    if n < 1 or d < 1 or ell < 1:
        raise InputError("arguments must be positive integers")
    value = Fraction(1, (2 * ell) ** (n + 1) * d**n * n)
    return PolytopeEpsilon(value, "heuristic-exact: sufficient accuracy, typically astronomically small")
