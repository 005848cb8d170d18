"""Experiment configuration: JSON schemas, cross-field checks, resource caps.

A config is a flat JSON object with a "kind" discriminator.  Validation
never raises; it returns a list of human-readable diagnostics so the
validate subcommand can print all problems at once.  Resource-cap
violations are phrased "resource cap: ..." and are additionally surfaced
as ResourceCapError by check_resource_caps for the run path, which wants
a distinct exit status for them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ResourceCapError, SchemaError, StructuralError
from .groups import FiniteTable, ZPow, group_from_json
from .ring import star_polynomial_from_json

SCHEMA_VERSION = 1
MAX_DEGREE = 4096
MAX_TRIALS = 10**7
KINDS = ("sofic", "embed", "gauss", "entropy", "harmonic")


@dataclass
class ExperimentConfig:
    """A parsed, not-yet-validated experiment description.

    text is the exact serialized form the config hash is computed from:
    the raw file bytes when loaded from disk, a canonical dump when
    assembled from CLI flags.
    """

    kind: str
    seed: int | None
    data: dict
    text: str

    @classmethod
    def from_dict(cls, data: dict, text: str | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise SchemaError(["config root must be a JSON object"])
        kind = data.get("kind")
        if kind not in KINDS:
            raise SchemaError([f"kind must be one of {'/'.join(KINDS)}, got {kind!r}"])
        seed = data.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise SchemaError(["seed must be an integer"])
        if text is None:
            text = json.dumps(data, sort_keys=True)
        return cls(kind=kind, seed=seed, data=data, text=text)

    @classmethod
    def from_path(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError([f"config is not valid JSON: {exc}"]) from exc
        return cls.from_dict(data, text=text)


def validate(config_path: str) -> list[str]:
    """All schema and cross-field diagnostics for a config file, no running."""
    try:
        cfg = ExperimentConfig.from_path(config_path)
    except SchemaError as exc:
        return list(exc.diagnostics)
    except OSError as exc:
        return [f"cannot read config: {exc}"]
    return validate_config(cfg.data)


def validate_config(data: dict) -> list[str]:
    diags: list[str] = []
    if not isinstance(data, dict):
        return ["config root must be a JSON object"]
    kind = data.get("kind")
    if kind not in KINDS:
        return [f"kind must be one of {'/'.join(KINDS)}, got {kind!r}"]
    seed = data.get("seed")
    if seed is not None and not isinstance(seed, int):
        diags.append("seed must be an integer")
    checker = {
        "sofic": _check_sofic,
        "embed": _check_embed,
        "gauss": _check_gauss,
        "entropy": _check_entropy,
        "harmonic": _check_harmonic,
    }[kind]
    checker(data, diags)
    diags.extend(resource_cap_violations(data))
    return diags


def check_resource_caps(data: dict) -> None:
    violations = resource_cap_violations(data)
    if violations:
        raise ResourceCapError("; ".join(violations))


def resource_cap_violations(data: dict) -> list[str]:
    out = []
    for key in ("degree",):
        v = data.get(key)
        if isinstance(v, int) and v > MAX_DEGREE:
            out.append(f"resource cap: {key} {v} exceeds max degree {MAX_DEGREE}")
    degrees = data.get("degrees")
    if isinstance(degrees, list):
        for v in degrees:
            if isinstance(v, int) and v > MAX_DEGREE:
                out.append(f"resource cap: degree {v} exceeds max degree {MAX_DEGREE}")
    for key in ("trials", "n_samples"):
        v = data.get(key)
        if isinstance(v, int) and v > MAX_TRIALS:
            out.append(f"resource cap: {key} {v} exceeds max trials {MAX_TRIALS}")
    return out


# ---------------------------------------------------------------------------
# per-kind checks


def _get_group(data: dict, diags: list[str]):
    obj = data.get("group")
    if not isinstance(obj, dict):
        diags.append("group must be a JSON object with a type field")
        return None
    try:
        return group_from_json(obj)
    except (StructuralError, KeyError, TypeError, ValueError) as exc:
        diags.append(f"bad group spec: {exc}")
        return None


def _check_degree_vs_group(spec, degree, diags: list[str]) -> None:
    if spec is None or not isinstance(degree, int):
        return
    if isinstance(spec, FiniteTable) and degree != spec.n:
        diags.append(f"degree {degree} must equal the group order {spec.n}")
    if isinstance(spec, ZPow):
        m = round(degree ** (1.0 / spec.dim))
        if not any((m + off) > 0 and (m + off) ** spec.dim == degree
                   for off in (-1, 0, 1)):
            diags.append(f"degree {degree} is not a perfect power for dim {spec.dim}")


def _positive_int(data, key, diags, required=True, default=None):
    v = data.get(key, default)
    if v is None:
        if required:
            diags.append(f"{key} is required")
        return None
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        diags.append(f"{key} must be a positive integer")
        return None
    return v


def _check_sofic(data: dict, diags: list[str]) -> None:
    spec = _get_group(data, diags)
    degree = _positive_int(data, "degree", diags)
    _check_degree_vs_group(spec, degree, diags)
    cap = _positive_int(data, "max_word_length", diags, required=False, default=3)
    if cap is not None and cap > 8:
        diags.append("max_word_length above 8 exceeds the evaluation word cap")
    # a missing seed on a free group is fine: one is drawn and recorded


def _check_embed(data: dict, diags: list[str]) -> None:
    spec = _get_group(data, diags)
    degree = _positive_int(data, "degree", diags)
    _check_degree_vs_group(spec, degree, diags)
    alphas = data.get("alphas")
    if not isinstance(alphas, list) or not alphas:
        diags.append("alphas must be a nonempty list of ring elements")
        alphas = []
    for i, terms in enumerate(alphas):
        if not isinstance(terms, list):
            diags.append(f"alphas[{i}] must be a list of {{g, re, im}} terms")
            continue
        for t in terms:
            if not isinstance(t, dict) or "g" not in t:
                diags.append(f"alphas[{i}] has a term without a g field")
                break
    poly_obj = data.get("polynomial")
    if not isinstance(poly_obj, dict):
        diags.append("polynomial must be a JSON object")
    else:
        try:
            poly = star_polynomial_from_json(poly_obj)
        except (StructuralError, KeyError, TypeError, ValueError) as exc:
            diags.append(f"bad polynomial: {exc}")
        else:
            if alphas and poly.arity() > len(alphas):
                diags.append(
                    f"polynomial uses {poly.arity()} slots but only "
                    f"{len(alphas)} alphas are given")
    if "round" in data and not isinstance(data["round"], bool):
        diags.append("round must be a boolean")


def _check_arc(obj, diags: list[str], where: str) -> None:
    if not isinstance(obj, dict):
        diags.append(f"{where} must be an object with measure or arcs")
        return
    if "measure" in obj:
        s = obj["measure"]
        if not isinstance(s, (int, float)) or not 0.0 < float(s) <= 1.0:
            diags.append(f"{where}.measure must lie in (0, 1]")
        return
    arcs = obj.get("arcs")
    if not isinstance(arcs, list) or not arcs:
        diags.append(f"{where} needs either a measure or a nonempty arcs list")
        return
    pairs = []
    for a in arcs:
        if (not isinstance(a, list) or len(a) != 2
                or not all(isinstance(x, (int, float)) for x in a)):
            diags.append(f"{where}.arcs entries must be [u, v] number pairs")
            return
        u, v = float(a[0]), float(a[1])
        if not (0.0 <= u < v <= 1.0):
            diags.append(f"{where}.arcs entry [{u}, {v}] must satisfy 0 <= u < v <= 1")
            return
        pairs.append((u, v))
    # conjugation symmetry keeps the linearized image real, which the
    # rounding step requires
    for u, v in pairs:
        mirror = (1.0 - v, 1.0 - u)
        if not any(math.isclose(mirror[0], x, abs_tol=1e-12)
                   and math.isclose(mirror[1], y, abs_tol=1e-12)
                   for x, y in pairs):
            diags.append(
                f"{where}.arcs must be symmetric under theta -> 1 - theta "
                f"(no mirror for [{u}, {v}]); use the measure form for the "
                f"symmetric arc")
            return


def _check_frequencies(obj, diags: list[str], where: str) -> list:
    """Returns the frequency window (list of ints) for cross-field checks."""
    if not isinstance(obj, dict):
        diags.append(f"{where} must be an object (t0 shorthand or window/rows/weights)")
        return []
    if "t0" in obj:
        if not isinstance(obj["t0"], (int, float)):
            diags.append(f"{where}.t0 must be a number")
        return [0]
    window = obj.get("window")
    rows = obj.get("rows")
    weights = obj.get("weights")
    if not (isinstance(window, list) and window
            and all(isinstance(g, int) for g in window)):
        diags.append(f"{where}.window must be a nonempty list of integers")
        return []
    if not (isinstance(rows, list) and rows):
        diags.append(f"{where}.rows must be a nonempty list of frequency rows")
        return window
    for r in rows:
        if not isinstance(r, list) or len(r) != len(window):
            diags.append(f"{where}.rows entries must have one number per window element")
            return window
    if not (isinstance(weights, list) and len(weights) == len(rows)):
        diags.append(f"{where}.weights must have one entry per row")
    return window


def _check_gauss(data: dict, diags: list[str]) -> None:
    degrees = data.get("degrees")
    if not (isinstance(degrees, list) and degrees
            and all(isinstance(d, int) and d >= 1 for d in degrees)):
        diags.append("degrees must be a nonempty list of positive integers")
    _check_arc(data.get("arc"), diags, "arc")
    cutoff = data.get("cutoff")
    if not isinstance(cutoff, int) or isinstance(cutoff, bool) or cutoff < 0:
        diags.append("cutoff must be a nonnegative integer")
    _check_frequencies(data.get("frequencies"), diags, "frequencies")
    _positive_int(data, "trials", diags)
    deltas = data.get("deltas", [])
    if not isinstance(deltas, list) or not all(
            isinstance(x, (int, float)) and x > 0 for x in deltas):
        diags.append("deltas must be a list of positive numbers")


def _check_entropy(data: dict, diags: list[str]) -> None:
    degrees = data.get("degrees")
    if not (isinstance(degrees, list) and degrees
            and all(isinstance(d, int) and d >= 1 for d in degrees)):
        diags.append("degrees must be a nonempty list of positive integers")
    p = data.get("p")
    if isinstance(p, str):
        if p not in ("identity", "zero"):
            diags.append('p must be "identity", "zero", or an arc pipeline object')
    elif isinstance(p, dict):
        _check_arc(p.get("arc"), diags, "p.arc")
        if not isinstance(p.get("cutoff"), int) or p.get("cutoff") < 0:
            diags.append("p.cutoff must be a nonnegative integer")
    else:
        diags.append('p must be "identity", "zero", or an arc pipeline object')
    eps = data.get("epsilons")
    if not (isinstance(eps, list) and eps
            and all(isinstance(x, (int, float)) and 0 < x < 1 for x in eps)):
        diags.append("epsilons must be a nonempty list in (0, 1)")
    _positive_int(data, "n_samples", diags)
    delta = data.get("delta")
    if not isinstance(delta, (int, float)) or delta <= 0:
        diags.append("delta must be positive")
    big_f = data.get("F")
    if not (isinstance(big_f, list) and all(isinstance(g, int) for g in big_f)):
        diags.append("F must be a list of integers (Z/m elements)")
        big_f = []
    eta = data.get("eta", 0.05)
    if not isinstance(eta, (int, float)) or eta <= 0:
        diags.append("eta must be positive")
    if "box" in data and (not isinstance(data["box"], (int, float)) or data["box"] <= 0):
        diags.append("box must be a positive bound")
    test_window: list = []
    if "tests" in data:
        test_window = _check_frequencies(data["tests"], diags, "tests")
    window = data.get("window")
    if window is not None:
        if not (isinstance(window, list) and all(isinstance(g, int) for g in window)):
            diags.append("window must be a list of integers")
        else:
            missing = [g for g in big_f if g not in window]
            if missing:
                diags.append(f"window F {big_f} is not contained in window E {window}")
            missing_t = [g for g in test_window if g not in window]
            if missing_t:
                diags.append(
                    f"test window {test_window} is not contained in window E {window}")


def _check_harmonic(data: dict, diags: list[str]) -> None:
    _positive_int(data, "trials", diags)
    size = _positive_int(data, "max_size", diags, required=False, default=12)
    if size is not None and size > 64:
        diags.append("max_size above 64 is not supported by the dense tables")
