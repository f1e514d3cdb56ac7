"""Command line interface.

Subcommands: scale | capacity | nullcone | pscale | margin | flow.
Each reads one JSON problem file, runs the requested solver, and writes a
machine-readable JSON report (stdout by default).  Exit codes: 0 solved or
decided, 2 inconclusive, 3 input error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import margins
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    EnumerationBudgetError,
    GeoscaleError,
    InputError,
    RandomnessFailureError,
)
from .first_order import (
    iteration_budget_scaling,
    p_scaling_solve,
    randomized_p_scaling,
    scaling_solve,
)
from .geometry import duality_bounds, gradient_flow, moment_map
from .problems import format_report, load_problem, serialize_group_element
from .second_order import norm_minimize

EXIT_SOLVED = 0
EXIT_INCONCLUSIVE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geoscale",
        description="Scaling, norm minimization, null-cone, moment-polytope, "
        "margin, and gradient-flow computations for group actions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("scale", "drive the moment map to zero (scaling problem)"),
        ("capacity", "approximate the log-capacity (norm minimization)"),
        ("nullcone", "decide null-cone membership via the scaling solver"),
        ("pscale", "drive the moment-map spectrum to a target point"),
        ("margin", "weight norm, weight margin, and matrix diagnostics"),
        ("flow", "integrate the moment-map gradient flow"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, help="problem file (JSON)")
        p.add_argument("--output", default=None, help="report file (default stdout)")
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--max-iters", type=int, default=None)
        p.add_argument("--cap-log-bound", type=float, default=None,
                       help="upper bound C on log(|v|/cap(v))")
        p.add_argument("--gamma", type=float, default=None,
                       help="weight margin (computed from the weights when omitted)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--randomize", action="store_true",
                       help="pscale: random integer starting element")
        p.add_argument("--s-override", type=int, default=None)
        p.add_argument("--trace-every", type=int, default=None)
        p.add_argument("--t-end", type=float, default=None)
        p.add_argument("--dt", type=float, default=None)
    return parser


def _setting(args, problem, cli_name, file_name, default):
    val = getattr(args, cli_name)
    if val is not None:
        return val
    if file_name in problem.solver:
        return problem.solver[file_name]
    return default


def _gamma_for(problem, args, params):
    gamma = _setting(args, problem, "gamma", "gamma", None)
    if gamma is not None:
        params["gamma"] = float(gamma)
        params["gamma_source"] = "user"
        return float(gamma), "user"
    result = margins.margin_lower_bound(problem.rep)
    params["gamma"] = result.value
    params["gamma_source"] = f"margins:{result.method}:{result.kind}"
    return result.value, result.kind


def _c_bound_for(problem, args, params):
    c = _setting(args, problem, "cap_log_bound", "C", None)
    if c is not None:
        params["C"] = float(c)
        params["C_heuristic"] = False
        return float(c)
    c = 40.0 * math.log(10.0) * problem.rep.dim
    params["C"] = c
    params["C_heuristic"] = True
    params["C_note"] = "default 40 ln(10) m; supply --cap-log-bound for certified budgets"
    return c


def _base_report(command, problem, params, seed):
    return {
        "command": command,
        "input_digest": problem.digest,
        "status": None,
        "parameters": params,
        "seed": seed,
    }


def _finish(report, status, t0):
    report["status"] = status
    report["wall_time_s"] = round(time.perf_counter() - t0, 6)
    return report


def cmd_scale(problem, args, t0):
    params = {}
    eps = float(_setting(args, problem, "epsilon", "epsilon", 1e-4))
    trace_every = int(_setting(args, problem, "trace_every", "trace_every", 50))
    max_iters = _setting(args, problem, "max_iters", "max_iters", None)
    c = _c_bound_for(problem, args, params)
    if max_iters is None:
        max_iters = iteration_budget_scaling(problem.rep.weight_norm(), eps, c)
        params["max_iters_from_budget"] = True
    params.update({"epsilon": eps, "max_iters": int(max_iters), "trace_every": trace_every})
    report = _base_report("scale", problem, params, None)
    result = scaling_solve(problem.rep, problem.vector, eps, max_iters, trace_every=trace_every)
    params["step_size"] = result.extras.get("step_size")
    gamma, _ = _gamma_for(problem, args, params)
    w = problem.rep.apply(result.best_g, problem.vector)
    du = duality_bounds(problem.rep, w, gamma, problem.rep.weight_norm())
    report["moment_norm"] = result.best_grad_norm
    report["log_norm"] = result.best_value
    report["iterations_used"] = result.iterations_used
    report["trace"] = [[int(i), float(gn), float(val)] for i, gn, val in result.trace]
    report["duality"] = du.as_dict()
    report["final_g"] = serialize_group_element(result.best_g)
    code = EXIT_SOLVED if result.converged else EXIT_INCONCLUSIVE
    return _finish(report, result.status, t0), code


def cmd_capacity(problem, args, t0):
    params = {}
    eps = float(_setting(args, problem, "epsilon", "epsilon", 0.01))
    c = _c_bound_for(problem, args, params)
    gamma, gamma_kind = _gamma_for(problem, args, params)
    gamma = min(gamma, 1.0)
    max_iters = _setting(args, problem, "max_iters", "max_iters", None)
    params["epsilon"] = eps
    report = _base_report("capacity", problem, params, None)
    result = norm_minimize(problem.rep, problem.vector, eps, c, gamma, max_iterations=max_iters)
    params["kappa"] = result.extras["kappa"]
    params["robustness"] = result.extras["robustness"]
    params["published_budget"] = result.extras["published_budget"]
    params["max_iters"] = result.iterations_used
    report["log_norm"] = result.objective_trace[-1] if result.objective_trace else None
    w = problem.rep.apply(result.g_final, problem.vector)
    report["log_norm_unregularized"] = float(np.log(np.linalg.norm(w)))
    report["moment_norm"] = moment_map(problem.rep, w).norm()
    report["guarantee"] = {
        "three_eps": result.extras["three_eps"],
        "holds_if": "iterations >= published budget, C >= log(|v|/cap), gamma <= weight margin",
        "budget_met": bool(result.extras["budget_met"]),
        "gamma_kind": gamma_kind,
    }
    report["objective_trace"] = [float(x) for x in result.objective_trace]
    report["iterations_used"] = result.iterations_used
    report["final_g"] = serialize_group_element(result.g_final)
    return _finish(report, result.status, t0), EXIT_SOLVED


def cmd_nullcone(problem, args, t0):
    params = {}
    gamma, gamma_kind = _gamma_for(problem, args, params)
    if not math.isfinite(gamma):
        report = _base_report("nullcone", problem, params, None)
        report["verdict"] = "semistable"
        report["note"] = "no weight-subset hull avoids the origin; the orbit never degenerates"
        return _finish(report, "decided", t0), EXIT_SOLVED
    eps = gamma / 2.0
    c = _c_bound_for(problem, args, params)
    budget = iteration_budget_scaling(problem.rep.weight_norm(), eps, c)
    max_iters = _setting(args, problem, "max_iters", "max_iters", None)
    run_iters = budget if max_iters is None else min(int(max_iters), budget)
    trace_every = int(_setting(args, problem, "trace_every", "trace_every", 50))
    params.update(
        {"epsilon": eps, "budget": budget, "max_iters": run_iters, "gamma_kind": gamma_kind}
    )
    report = _base_report("nullcone", problem, params, None)
    result = scaling_solve(problem.rep, problem.vector, eps, run_iters, trace_every=trace_every)
    report["moment_norm"] = result.best_grad_norm
    report["iterations_used"] = result.iterations_used
    report["final_g"] = serialize_group_element(result.best_g)
    if result.best_grad_norm <= eps:
        verdict, code = "semistable", EXIT_SOLVED
    elif gamma_kind == "exact" and result.iterations_used >= run_iters:
        verdict, code = "in_null_cone", EXIT_SOLVED
        notes = []
        if params.get("C_heuristic"):
            notes.append("verdict relies on the heuristic C bound")
        if run_iters < budget:
            notes.append("iteration cap below the certified budget")
        if notes:
            report["note"] = "; ".join(notes)
    else:
        verdict, code = "inconclusive", EXIT_INCONCLUSIVE
    report["verdict"] = verdict
    return _finish(report, "decided" if code == EXIT_SOLVED else "inconclusive", t0), code


def cmd_pscale(problem, args, t0):
    if problem.target is None:
        raise InputError("target: pscale needs a target spectrum 'p'")
    params = {}
    eps = float(_setting(args, problem, "epsilon", "epsilon", 1e-2))
    max_iters = int(_setting(args, problem, "max_iters", "max_iters", 100000))
    trace_every = int(_setting(args, problem, "trace_every", "trace_every", 50))
    randomize = bool(args.randomize or problem.solver.get("randomize", False))
    seed = _setting(args, problem, "seed", "seed", 0)
    s_override = _setting(args, problem, "s_override", "s_override", None)
    params.update(
        {
            "epsilon": eps,
            "max_iters": max_iters,
            "randomize": randomize,
            "p": [[str(x) for x in blk] for blk in problem.target.blocks],
            "ell": problem.target.ell,
        }
    )
    report = _base_report("pscale", problem, params, seed if randomize else None)
    if randomize:
        rng = np.random.default_rng(seed)
        result = randomized_p_scaling(
            problem.rep, problem.vector, problem.target, eps, max_iters,
            rng=rng, s_override=s_override, trace_every=trace_every,
        )
        params["s_used"] = result.extras["s_used"]
        params["s_heuristic"] = result.extras["s_heuristic"]
        report["random_start"] = result.extras["random_start"]
    else:
        result = p_scaling_solve(
            problem.rep, problem.vector, problem.target, eps, max_iters, trace_every=trace_every
        )
    report["gradient_norm"] = result.best_grad_norm
    report["spec_distance"] = result.extras["spec_distance"]
    report["spectra"] = result.extras["spectra"]
    report["iterations_used"] = result.iterations_used
    report["trace"] = [[int(i), float(gn), float(val)] for i, gn, val in result.trace]
    report["final_g"] = serialize_group_element(result.best_g)
    solved = result.extras["spec_distance"] <= eps
    return (
        _finish(report, "converged" if solved else "budget_exhausted", t0),
        EXIT_SOLVED if solved else EXIT_INCONCLUSIVE,
    )


def cmd_margin(problem, args, t0):
    params = {}
    report = _base_report("margin", problem, params, None)
    rep = problem.rep
    report["weight_norm"] = margins.weight_norm(rep)
    report["weight_count"] = len(rep.weights())
    mat = margins.WeightMatrix.from_rep(rep)
    try:
        exact = margins.weight_margin_exact(rep.weights())
        report["margin_exact"] = exact.as_dict()
        if exact.witness is not None:
            report["margin_exact"]["witness"] = list(exact.witness)
    except EnumerationBudgetError as exc:
        report["margin_exact"] = {"refused": str(exc)}
    bound = margins.margin_lower_bound(rep)
    report["margin_bound"] = bound.as_dict()
    try:
        gap, alpha, beta = margins.gap_alpha_beta(mat)
        report["gap"] = gap
        report["alpha"] = str(alpha)
        report["beta"] = str(beta)
        report["totally_unimodular"] = margins.is_totally_unimodular(mat)
    except EnumerationBudgetError as exc:
        report["gap"] = {"refused": str(exc)}
    return _finish(report, "computed", t0), EXIT_SOLVED


def cmd_flow(problem, args, t0):
    params = {}
    t_end = float(_setting(args, problem, "t_end", "t_end", 5.0))
    dt = float(_setting(args, problem, "dt", "dt", 1e-3))
    params.update({"t_end": t_end, "dt": dt})
    report = _base_report("flow", problem, params, None)
    trace = gradient_flow(problem.rep, problem.vector, t_end, dt)
    report["flow_status"] = trace.status
    report["samples"] = {
        "times": [float(x) for x in trace.times],
        "norms": [float(x) for x in trace.norms],
        "moment_norms": [float(x) for x in trace.moment_norms],
        "mu_tilde_norms": [float(x) for x in trace.mu_tilde_norms],
    }
    report["identity_residuals"] = [float(x) for x in trace.identity_residuals(dt)]
    return _finish(report, trace.status, t0), EXIT_SOLVED


COMMANDS = {
    "scale": cmd_scale,
    "capacity": cmd_capacity,
    "nullcone": cmd_nullcone,
    "pscale": cmd_pscale,
    "margin": cmd_margin,
    "flow": cmd_flow,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        problem = load_problem(args.input)
        report, code = COMMANDS[args.command](problem, args, t0)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigurationError, DegenerateInputError, RandomnessFailureError, GeoscaleError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = format_report(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
