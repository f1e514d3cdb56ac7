"""Problem-file schema (parse + validate) and report serialization.

A problem file is one JSON object describing the representation, the input
vector (complex entries as [re, im] pairs of numbers or decimal strings, or
plain Gaussian integers), an optional target spectrum (rationals as "num/den"
strings), and optional solver parameters.  Reports are emitted with a stable
field order so that identical inputs and seeds reproduce them byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

import numpy as np

from .errors import InputError
from .geometry import TargetSpectrum
from .groups import FactorKind, GroupElement
from .gt import gt_orthonormal_rep
from .reps import (
    Representation,
    conjugation_rep,
    matrix_scaling_rep,
    operator_scaling_rep,
    quiver_rep,
    restrict_to_sl,
    tensor_rep,
    torus_rep,
)

SOLVER_KEYS = {
    "epsilon",
    "max_iters",
    "C",
    "gamma",
    "seed",
    "s_override",
    "trace_every",
    "t_end",
    "dt",
    "randomize",
}


def _fail(path, message):
    raise InputError(f"{path}: {message}")


def _require(obj, key, path, types=None):
    if key not in obj:
        _fail(path, f"missing required field '{key}'")
    val = obj[key]
    if types is not None and not isinstance(val, types):
        _fail(f"{path}.{key}", f"expected {types}, got {type(val).__name__}")
    return val


def parse_complex(entry, path):
    if isinstance(entry, bool):
        _fail(path, "booleans are not numbers")
    if isinstance(entry, (int, float)):
        return complex(float(entry), 0.0)
    if isinstance(entry, str):
        try:
            return complex(float(entry), 0.0)
        except ValueError:
            _fail(path, f"cannot parse decimal string {entry!r}")
    if isinstance(entry, list) and len(entry) == 2:
        parts = []
        for i, x in enumerate(entry):
            if isinstance(x, (int, float)) and not isinstance(x, bool):
                parts.append(float(x))
            elif isinstance(x, str):
                try:
                    parts.append(float(x))
                except ValueError:
                    _fail(f"{path}[{i}]", f"cannot parse decimal string {x!r}")
            else:
                _fail(f"{path}[{i}]", "expected a number or decimal string")
        return complex(parts[0], parts[1])
    _fail(path, "expected a number, decimal string, or [re, im] pair")


def parse_rational(entry, path):
    try:
        if isinstance(entry, str):
            return Fraction(entry)
        if isinstance(entry, int):
            return Fraction(entry)
        if isinstance(entry, float):
            return Fraction(entry).limit_denominator(10**9)
    except (ValueError, ZeroDivisionError):
        pass
    _fail(path, f"cannot parse rational {entry!r} (use 'num/den' strings)")


def build_representation(spec, path="representation") -> Representation:
    if not isinstance(spec, dict):
        _fail(path, "expected an object")
    kind = _require(spec, "kind", path, str)
    group_kind = spec.get("group_kind", None)
    if group_kind is not None and group_kind not in ("GL", "SL"):
        _fail(f"{path}.group_kind", f"expected 'GL' or 'SL', got {group_kind!r}")
    try:
        if kind == "torus":
            weights = _require(spec, "weights", path, list)
            return torus_rep(weights)
        if kind == "matrix_scaling":
            return matrix_scaling_rep(int(_require(spec, "n", path, int)))
        if kind == "operator_scaling":
            return operator_scaling_rep(
                int(_require(spec, "n", path, int)),
                int(_require(spec, "k", path, int)),
                group_kind or "SL",
            )
        if kind == "tensor":
            return tensor_rep(_require(spec, "dims", path, list), group_kind or "GL")
        if kind == "conjugation":
            return conjugation_rep(
                int(_require(spec, "n", path, int)), int(_require(spec, "k", path, int))
            )
        if kind == "quiver":
            return quiver_rep(
                int(_require(spec, "vertices", path, int)),
                _require(spec, "arrows", path, list),
                _require(spec, "dims", path, list),
                group_kind or "GL",
            )
        if kind == "gt_irrep_sum":
            rep = gt_orthonormal_rep(
                _require(spec, "summands", path, list),
                _require(spec, "factor_sizes", path, list),
            )
            if group_kind == "SL":
                rep = restrict_to_sl(rep)
            return rep
    except InputError as exc:
        if str(exc).startswith(path):
            raise
        _fail(path, str(exc))
    _fail(f"{path}.kind", f"unknown representation kind {kind!r}")


class Problem:
    def __init__(self, rep, vector, target, solver, raw):
        self.rep = rep
        self.vector = vector
        self.target = target
        self.solver = solver
        self.raw = raw

    @property
    def digest(self):
        canonical = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(canonical).hexdigest()


def parse_problem(data) -> Problem:
    if not isinstance(data, dict):
        raise InputError("problem file must contain one JSON object")
    unknown = set(data) - {"representation", "vector", "target", "solver"}
    if unknown:
        _fail(sorted(unknown)[0], "unknown top-level field")
    rep = build_representation(_require(data, "representation", "problem", dict))
    vec_raw = _require(data, "vector", "problem", list)
    if len(vec_raw) != rep.dim:
        _fail("vector", f"length {len(vec_raw)} does not match the representation dimension {rep.dim}")
    vector = np.array(
        [parse_complex(x, f"vector[{i}]") for i, x in enumerate(vec_raw)], dtype=complex
    )
    if not np.all(np.isfinite(vector)):
        _fail("vector", "entries must be finite")

    target = None
    if "target" in data and data["target"] is not None:
        tgt = data["target"]
        if not isinstance(tgt, dict) or "p" not in tgt:
            _fail("target", "expected an object with field 'p'")
        blocks = tgt["p"]
        if not isinstance(blocks, list):
            _fail("target.p", "expected a list of per-factor blocks")
        parsed = []
        for bi, blk in enumerate(blocks):
            if not isinstance(blk, list):
                _fail(f"target.p[{bi}]", "expected a list of rationals")
            parsed.append([parse_rational(x, f"target.p[{bi}][{j}]") for j, x in enumerate(blk)])
        try:
            target = TargetSpectrum(parsed, rep=rep)
        except InputError as exc:
            _fail("target.p", str(exc))

    solver = data.get("solver", {}) or {}
    if not isinstance(solver, dict):
        _fail("solver", "expected an object")
    unknown = set(solver) - SOLVER_KEYS
    if unknown:
        _fail(f"solver.{sorted(unknown)[0]}", "unknown solver parameter")
    for key in ("epsilon", "C", "gamma", "t_end", "dt"):
        if key in solver and not isinstance(solver[key], (int, float)):
            _fail(f"solver.{key}", "expected a number")
    for key in ("max_iters", "seed", "s_override", "trace_every"):
        if key in solver and not isinstance(solver[key], int):
            _fail(f"solver.{key}", "expected an integer")
    return Problem(rep, vector, target, solver, data)


def load_problem(path) -> Problem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read problem file: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"problem file is not valid JSON: line {exc.lineno}, column {exc.colno}")
    return parse_problem(data)


def _complex_pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def serialize_group_element(g: GroupElement):
    blocks = []
    for (kind, _), b in zip(g.group.factors, g.blocks):
        if kind.is_torus:
            blocks.append({"kind": "diagonal", "entries": [_complex_pair(z) for z in b]})
        else:
            blocks.append(
                {"kind": "matrix", "entries": [[_complex_pair(z) for z in row] for row in b]}
            )
    return blocks


def deserialize_group_element(rep: Representation, blocks) -> GroupElement:
    out = []
    for spec_block, (kind, n) in zip(blocks, rep.group.factors):
        entries = spec_block["entries"]
        if spec_block["kind"] == "diagonal":
            out.append(np.array([complex(re, im) for re, im in entries]))
        else:
            out.append(
                np.array([[complex(re, im) for re, im in row] for row in entries]).reshape(n, n)
            )
    return GroupElement(rep.group, out, validate=False)


def format_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"
