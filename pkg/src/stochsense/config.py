"""Experiment configuration: YAML loading, defaults and validation.

A config file looks like::

    task: ghz-classify
    seed: 7
    params:
      n_values: [2, 3, 4]
      c: 0.3

Every task has a parameter schema below. Missing parameters take their
defaults; unknown or malformed ones are reported with their field path.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .inference import MAX_SHOTS, MAX_TRIALS, shots_grid

SEED_MAX = 2 ** 64 - 1


class ConfigError(ValueError):
    """Invalid configuration; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True)
class Field:
    kind: str
    default: Any
    doc: str
    check: Callable[[Any], str | None] | None = None


def _positive(v):
    return None if v > 0 else "must be positive"


def _nonneg(v):
    return None if v >= 0 else "must be nonnegative"


def _prob(v):
    return None if 0 < v < 1 else "must lie strictly between 0 and 1"


def _qubits(lo, hi):
    def check(values):
        values = values if isinstance(values, list) else [values]
        bad = [v for v in values if not lo <= v <= hi]
        return None if not bad else f"values {bad} outside the supported range [{lo}, {hi}]"
    return check


def _trials(v):
    if v < 100:
        return "need at least 100 trials"
    if v > MAX_TRIALS:
        return f"resource cap: at most {MAX_TRIALS} trials"
    return None


def _nonempty(values):
    return None if len(values) else "must not be empty"


def _even_positive(values):
    bad = [v for v in values if v < 2 or v % 2]
    return None if not bad else f"values {bad} are not positive even integers"


SHOTS_DOC = "explicit list of shot counts, or {min_exp, max_exp, per_octave} for a log2-spaced grid"

COMMON = {
    "trials": Field("int", 2000, "trials per grid point", _trials),
}

SCHEMAS: dict[str, dict[str, Field]] = {
    "bell-gaussian": {
        "sigma": Field("float", 1.5, "marginal standard deviation of each phase [rad]", _nonneg),
        "sigma_corr2": Field("float?", None, "cross-covariance [rad^2]; default corr_ratio * sigma^2"),
        "corr_ratio": Field("float", 0.99, "sigma_corr2 / sigma^2 when sigma_corr2 is not given"),
        "c_values": Field("list[float]", [-0.25], "mean phase differences of class A [rad]", _nonempty),
        "shots": Field("shots", {"min_exp": 0, "max_exp": 10, "per_octave": 4}, SHOTS_DOC),
        "report_shots": Field("int", 50, "shot count whose accuracy is reported in the summary", _positive),
        "target": Field("float", 0.95, "accuracy target for shots-to-target", _prob),
        "trials": COMMON["trials"],
    },
    "ghz-classify": {
        "n_values": Field("list[int]", [2, 3, 4, 5, 6], "qubit counts", _qubits(2, 10)),
        "c": Field("float", 0.3, "constraint value; classes are +c and -c [rad]"),
        "noise_sigma": Field("float", 0.0, "standard deviation of the constraint noise [rad]", _nonneg),
        "tables": Field("choice:exact,mc", "exact", "outcome tables from characteristic functions or Monte Carlo"),
        "convergence_ratio": Field("float", 5000.0, "Monte Carlo stopping ratio", lambda v: None if v > 1 else "must exceed 1"),
        "classifier": Field("choice:tvd,mle", "tvd", "post-processing rule"),
        "shots": Field("shots", {"min_exp": 0, "max_exp": 16, "per_octave": 4}, SHOTS_DOC),
        "target": Field("float", 0.95, "accuracy target", _prob),
        "trials": COMMON["trials"],
    },
    "ghz-estimate": {
        "n_values": Field("list[int]", [2, 3, 4, 5, 6], "qubit counts", _qubits(2, 10)),
        "c_range": Field("float", 0.2, "constraint values are drawn from [-c_range, c_range] [rad]", _positive),
        "c_points": Field("int", 101, "number of grid values of C used for training and testing", lambda v: None if v >= 2 else "need at least 2"),
        "shots": Field("shots", {"min_exp": 6, "max_exp": 26, "per_octave": 2}, SHOTS_DOC),
        "target_mse": Field("float", 1e-4, "MSE target [rad^2]", _positive),
        "trials": COMMON["trials"],
    },
    "xxz": {
        "n_values": Field("list[int]", [2, 3, 4, 5], "spin counts", _qubits(2, 8)),
        "temperatures": Field("list[float]", [0.2, 5.0], "temperatures k_B T [J]", _nonempty),
        "magnetization": Field("float", 0.1, "class A total magnetization; class B has the opposite sign", _positive),
        "anisotropy": Field("float", 0.75, "anisotropy of the zz coupling"),
        "coupling": Field("float", 1.0, "exchange coupling J [energy]", _positive),
        "phase_scale": Field("float", float(np.pi), "phase per unit of s_j [rad]", _positive),
        "n_samples": Field("int", 8000, "configurations per ensemble", _positive),
        "tau_therm": Field("int", 10000, "thermalisation steps", _nonneg),
        "tau_sweep": Field("int", 500, "steps between emitted configurations", _positive),
        "delta_s": Field("float", 0.2, "maximum s transfer per move", _positive),
        "delta_phi": Field("float", float(np.pi / 4), "maximum azimuth jitter per move [rad]", _positive),
        "mirror_classes": Field("bool", True, "build class B by negating class A phases instead of a second chain"),
        "symmetrize": Field("bool", True, "average tables over ring rotations and reflections"),
        "export_chains": Field("bool", False, "write each chain as CSV"),
        "shots": Field("shots", {"min_exp": 0, "max_exp": 16, "per_octave": 4}, SHOTS_DOC),
        "target": Field("float", 0.95, "accuracy target", _prob),
        "trials": COMMON["trials"],
    },
    "featmat": {
        "family": Field("choice:constrained-uniform,gaussian", "constrained-uniform", "distribution family"),
        "n_values": Field("list[int]", [2, 3, 4, 5, 6, 7, 8], "qubit counts (constrained-uniform)", _qubits(1, 10)),
        "c": Field("float", 0.3, "constraint value [rad]"),
        "search_max_n": Field("int", 3, "largest n for the numerical product search", _qubits(0, 6)),
        "search_starts": Field("int", 24, "product search starting points", _positive),
        "export_max_n": Field("int", 4, "largest n whose full feature matrix is written as CSV", _nonneg),
        "mean_a": Field("list[float]", [0.0, 0.0], "class A mean (gaussian) [rad]"),
        "mean_b": Field("list[float]", [0.0, 0.0], "class B mean (gaussian) [rad]"),
        "cov_a": Field("matrix", [[1.0, 0.5], [0.5, 1.0]], "class A covariance (gaussian) [rad^2]"),
        "cov_b": Field("matrix", [[1.0, 0.6], [0.6, 1.0]], "class B covariance (gaussian) [rad^2]"),
        "eigenmap": Field("choice:local,entangling-zz", "entangling-zz", "sensing map for the gaussian family"),
    },
    "quadratic": {
        "n_var_values": Field("list[int]", [2, 4, 8], "parameter counts", _even_positive),
        "c": Field("float", 0.5, "sum-of-squares constraint value [rad^2]", _positive),
        "n_thetas": Field("int", 50, "random constraint-satisfying parameter vectors per n_var", _positive),
        "epsilon": Field("float", 1e-3, "constraint perturbation for the slope check", _positive),
    },
    "multicopy": {
        "n_phi": Field("int", 16, "phi grid points over [0, pi)", _positive),
        "n_grid": Field("int", 16, "theta grid points for the full-period average", lambda v: None if v >= 7 else "need at least 7"),
    },
}

TASK_DOCS = {
    "bell-gaussian": "two-qubit correlated Gaussian classification, Bell vs product protocol",
    "ghz-classify": "N-qubit constrained-uniform classification of +C vs -C, GHZ vs product",
    "ghz-estimate": "N-qubit constrained-uniform estimation of C with a trained linear layer",
    "xxz": "classify the conserved magnetization of a thermal classical XXZ ring",
    "featmat": "feature matrices, separation values and product-state bounds",
    "quadratic": "sum-of-squares constraint sensed through X/Y Pauli strings",
    "multicopy": "two-copy protocols versus the single-copy averaged state",
}

TASKS = tuple(SCHEMAS)


def _coerce(kind: str, value, path: str, errors: list[str]):
    def fail(msg):
        errors.append(f"{path}: {msg}")
        return None

    if kind == "float?":
        return None if value is None else _coerce("float", value, path, errors)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            return fail(f"expected an integer, got {value!r}")
        return int(value)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float, np.number)):
            return fail(f"expected a number, got {value!r}")
        if not np.isfinite(value):
            return fail("must be finite")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            return fail(f"expected true/false, got {value!r}")
        return value
    if kind.startswith("choice:"):
        options = kind.split(":", 1)[1].split(",")
        if value not in options:
            return fail(f"expected one of {options}, got {value!r}")
        return value
    if kind in ("list[int]", "list[float]"):
        if not isinstance(value, (list, tuple)):
            return fail(f"expected a list, got {value!r}")
        inner = kind[5:-1]
        out = [_coerce(inner, v, f"{path}[{i}]", errors) for i, v in enumerate(value)]
        return None if any(v is None for v in out) else out
    if kind == "matrix":
        if not isinstance(value, (list, tuple)) or not all(isinstance(r, (list, tuple)) for r in value):
            return fail("expected a list of rows")
        rows = [_coerce("list[float]", r, f"{path}[{i}]", errors) for i, r in enumerate(value)]
        if any(r is None for r in rows):
            return None
        if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
            return fail("expected a square matrix")
        return rows
    if kind == "shots":
        if isinstance(value, dict):
            unknown = set(value) - {"min_exp", "max_exp", "per_octave"}
            if unknown:
                return fail(f"unknown keys {sorted(unknown)}")
            spec = {"min_exp": 0, "max_exp": 22, "per_octave": 1, **value}
            parts = {k: _coerce("int", v, f"{path}.{k}", errors) for k, v in spec.items()}
            if any(v is None for v in parts.values()):
                return None
            if parts["min_exp"] < 0 or parts["max_exp"] < parts["min_exp"] or parts["per_octave"] < 1:
                return fail("need 0 <= min_exp <= max_exp and per_octave >= 1")
            if 2 ** parts["max_exp"] > MAX_SHOTS:
                return fail(f"resource cap: shots above {MAX_SHOTS}")
            return parts
        values = _coerce("list[int]", value, path, errors)
        if values is None:
            return None
        if not values or min(values) < 1:
            return fail("shot counts must be positive and the list nonempty")
        if max(values) > MAX_SHOTS:
            return fail(f"resource cap: shots above {MAX_SHOTS}")
        return sorted(set(values))
    raise AssertionError(f"unhandled field kind {kind}")


def _cross_checks(task: str, p: dict, errors: list[str]) -> None:
    if task == "bell-gaussian":
        sigma2 = p["sigma"] ** 2
        corr = p["sigma_corr2"] if p["sigma_corr2"] is not None else p["corr_ratio"] * sigma2
        if abs(corr) > sigma2:
            field = "params.sigma_corr2" if p["sigma_corr2"] is not None else "params.corr_ratio"
            errors.append(f"{field}: covariance is not positive semidefinite "
                          f"(|sigma_corr2| = {abs(corr):.6g} > sigma^2 = {sigma2:.6g})")
    if task == "featmat" and p["family"] == "gaussian":
        for name in ("cov_a", "cov_b"):
            cov = np.asarray(p[name], dtype=float)
            mean = p["mean_" + name[-1]]
            if cov.shape[0] != len(mean):
                errors.append(f"params.{name}: shape {cov.shape} does not match mean_{name[-1]}")
            elif not np.allclose(cov, cov.T):
                errors.append(f"params.{name}: covariance must be symmetric")
            elif np.linalg.eigvalsh(cov).min() < -1e-12:
                errors.append(f"params.{name}: covariance is not positive semidefinite")
        dim = len(p["mean_a"])
        if p["eigenmap"] == "entangling-zz" and dim != 2:
            errors.append("params.eigenmap: entangling-zz senses exactly two parameters")
    if task == "xxz":
        for i, t in enumerate(p["temperatures"]):
            if t <= 0:
                errors.append(f"params.temperatures[{i}]: must be positive")
        for n in p["n_values"]:
            if p["magnetization"] > n:
                errors.append(f"params.magnetization: |M| = {p['magnetization']} exceeds n = {n}")


def validate(raw: Any) -> dict:
    """Return the fully resolved config or raise :class:`ConfigError`."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["<root>: expected a mapping"])
    unknown = set(raw) - {"task", "seed", "params", "output"}
    for key in sorted(unknown):
        errors.append(f"{key}: unknown top-level key")
    task = raw.get("task")
    if task not in SCHEMAS:
        errors.append(f"task: unknown task {task!r}; valid tasks are {', '.join(TASKS)}")
        raise ConfigError(errors)
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= SEED_MAX:
        errors.append(f"seed: expected an integer in [0, 2^64), got {seed!r}")
    params_in = raw.get("params") or {}
    if not isinstance(params_in, dict):
        errors.append("params: expected a mapping")
        params_in = {}
    schema = SCHEMAS[task]
    params = {}
    for key in sorted(set(params_in) - set(schema)):
        errors.append(f"params.{key}: unknown parameter for task {task}")
    for key, fld in schema.items():
        value = params_in.get(key, copy.deepcopy(fld.default))
        coerced = _coerce(fld.kind, value, f"params.{key}", errors)
        if coerced is not None and fld.check is not None:
            msg = fld.check(coerced)
            if msg:
                errors.append(f"params.{key}: {msg}")
        params[key] = coerced
    if not errors:
        _cross_checks(task, params, errors)
    output = raw.get("output", {}) or {}
    if not isinstance(output, dict) or set(output) - {"dir", "figures"}:
        errors.append("output: expected a mapping with optional keys dir, figures")
        output = {}
    if errors:
        raise ConfigError(errors)
    return {"task": task, "seed": int(seed), "params": params,
            "output": {"dir": str(output.get("dir", "results")), "figures": bool(output.get("figures", True))}}


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read config ({exc.strerror})"]) from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: invalid YAML ({exc})"]) from exc
    return validate(raw)


def diagnostics(raw: Any) -> list[str]:
    try:
        validate(raw)
    except ConfigError as exc:
        return exc.diagnostics
    return []


def resolve_shots(spec) -> np.ndarray:
    if isinstance(spec, dict):
        return shots_grid(spec["min_exp"], spec["max_exp"], spec["per_octave"])
    return np.asarray(spec, dtype=np.int64)


def config_hash(cfg: dict) -> str:
    """Short digest of the task, seed and parameters (output settings excluded)."""
    body = json.dumps({k: cfg[k] for k in ("task", "seed", "params")}, sort_keys=True)
    return hashlib.sha256(body.encode()).hexdigest()[:12]


def catalog() -> str:
    lines = []
    for task, schema in SCHEMAS.items():
        lines.append(f"{task}: {TASK_DOCS[task]}")
        for key, fld in schema.items():
            lines.append(f"    {key} (default {fld.default!r}): {fld.doc}")
    return "\n".join(lines)
