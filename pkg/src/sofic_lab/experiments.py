"""Experiment pipelines behind the CLI: one runner per config kind.

run() is the single entry point: it validates, enforces resource caps,
resolves the master seed (drawing and recording one when the config has
none), dispatches, and stamps the report with regeneration metadata.
Every random stream inside a pipeline is keyed by a seed derived from
the master seed and a fixed index path, so reports are reproducible from
the sidecar alone.
"""

from __future__ import annotations

import time

import numpy as np

from .config import ExperimentConfig, check_resource_caps, validate_config
from .embedding import embedding_defect, linearize, matrix_norms, realify, spectral_round
from .entropy import MapParams, entropy_estimate
from .errors import SchemaError, StructuralError
from .gaussian import (
    ArcProjectionSpec,
    FourierTestFunction,
    GaussianSampler,
    arc_projection_coeffs,
    concentration_experiment,
)
from .groups import FreeGroup, ZPow, finite_group_fleet, group_from_json
from .harmonic import powers_stormer_check, random_positive_element
from .report import Report, base_metadata
from .ring import delta, ring_element_from_json, star_polynomial_from_json, zero_element
from .sofic import build_sofic, defect_report


def fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % (2**63))


def derived_seed(master: int, *path: int) -> int:
    """Deterministic child seed for the stream at a fixed index path."""
    seq = np.random.SeedSequence([int(master), *path])
    return int(seq.generate_state(1, dtype=np.uint64)[0] % (2**63))


def run(config: ExperimentConfig, out_path: str | None = None) -> Report:
    """Validate and execute one experiment; optionally write data + sidecar."""
    started = time.perf_counter()
    diags = validate_config(config.data)
    schema_diags = [d for d in diags if not d.startswith("resource cap")]
    if schema_diags:
        raise SchemaError(schema_diags)
    check_resource_caps(config.data)
    master = config.seed if config.seed is not None else fresh_seed()
    runner = {
        "sofic": _run_sofic,
        "embed": _run_embed,
        "gauss": _run_gauss,
        "entropy": _run_entropy,
        "harmonic": _run_harmonic,
    }[config.kind]
    report = runner(config.data, master)
    derived = report.metadata.pop("derived_seeds", {})
    extra = dict(report.metadata)
    meta = base_metadata(config.kind, config.text, master, derived)
    meta.update(extra)
    meta["wall_time_s"] = round(time.perf_counter() - started, 6)
    report.metadata = meta
    if out_path is not None:
        report.write(out_path)
    return report


# ---------------------------------------------------------------------------
# sofic: defect tables


def _element_label(obj) -> str:
    """CSV-safe label from an element's JSON form."""
    if isinstance(obj, list):
        return " ".join(str(c) for c in obj)
    return str(obj)


def _run_sofic(data: dict, master: int) -> Report:
    spec = group_from_json(data["group"])
    degree = data["degree"]
    cap = data.get("max_word_length", 3)
    build_seed = derived_seed(master, 0)
    sigma = build_sofic(spec, degree,
                        seed=build_seed if isinstance(spec, FreeGroup) else None)
    rep = defect_report(sigma, cap)
    rows = []
    for (g, h), mult in rep.multiplicativity.items():
        free = rep.freeness.get((g, h))
        rows.append((
            _element_label(spec.element_to_json(g)),
            _element_label(spec.element_to_json(h)),
            float(mult),
            "" if free is None else float(free),
        ))
    return Report(
        kind="sofic",
        columns=["g", "h", "mult_defect", "free_defect"],
        rows=rows,
        metadata={
            "derived_seeds": {"build": build_seed},
            "degree": degree,
            "max_word_length": cap,
        },
    )


# ---------------------------------------------------------------------------
# embed: defect and certificate report


def _run_embed(data: dict, master: int) -> Report:
    spec = group_from_json(data["group"])
    degree = data["degree"]
    build_seed = derived_seed(master, 0)
    sigma = build_sofic(spec, degree,
                        seed=build_seed if isinstance(spec, FreeGroup) else None)
    alphas = [ring_element_from_json(spec, terms) for terms in data["alphas"]]
    poly = star_polynomial_from_json(data["polynomial"])
    defects = embedding_defect(sigma, alphas, poly)
    mats = [linearize(sigma, a).matrix for a in alphas]
    image = poly.evaluate(mats)
    norms = matrix_norms(image)
    doc = {
        "kind": "embed",
        "degree": int(degree),
        "poly_defect": float(defects.poly_defect),
        "trace_defect": float(defects.trace_defect),
        "norm2_drift": float(defects.norm2_drift),
        "image_norm2": float(norms.norm2),
        "image_op_norm": float(norms.op_norm),
    }
    if data.get("round", False):
        m = np.asarray(image)
        if np.iscomplexobj(m):
            scale = max(1.0, float(np.max(np.abs(m))))
            if float(np.max(np.abs(m.imag))) > 1e-12 * scale:
                raise StructuralError(
                    "rounding needs a real symmetric polynomial image; "
                    "this polynomial produced complex entries")
            m = m.real
        rounded = spectral_round(m)
        doc["rounding"] = {
            "rank": int(rounded.rank),
            "normalized_trace": float(rounded.normalized_trace),
            "certificate": float(rounded.certificate),
            "certificate_bound": float(rounded.certificate_bound),
            "holds": bool(rounded.holds),
            "endpoint_warning": bool(rounded.endpoint_warning),
        }
    return Report(
        kind="embed",
        document=doc,
        metadata={"derived_seeds": {"build": build_seed}, "degree": degree},
    )


# ---------------------------------------------------------------------------
# shared pieces of the Z-quotient Gaussian pipeline


def _arc_spec(obj: dict, cutoff: int) -> ArcProjectionSpec:
    if "measure" in obj:
        return ArcProjectionSpec.symmetric(float(obj["measure"]), cutoff)
    arcs = tuple((float(u), float(v)) for u, v in obj["arcs"])
    return ArcProjectionSpec(arcs, cutoff)


def _rounded_projection(sigma, arc_obj: dict, cutoff: int):
    """arc coefficients -> realify -> spectral round."""
    p_hat = arc_projection_coeffs(_arc_spec(arc_obj, cutoff))
    return p_hat, spectral_round(realify(sigma, p_hat))


def _test_function(zp: ZPow, obj: dict) -> FourierTestFunction:
    if "t0" in obj:
        return FourierTestFunction.single_frequency([zp.identity], [float(obj["t0"])])
    window = tuple(zp.element(g) for g in obj["window"])
    rows = np.asarray(obj["rows"], dtype=np.float64)
    weights = np.asarray(
        [complex(w[0], w[1]) if isinstance(w, list) else complex(w)
         for w in obj["weights"]],
        dtype=np.complex128)
    return FourierTestFunction(window, rows, weights)


def _with_identity_first(zp: ZPow, window) -> tuple:
    out = [zp.identity]
    for g in window:
        if g not in out:
            out.append(g)
    return tuple(out)


def _run_gauss(data: dict, master: int) -> Report:
    zp = ZPow(1)
    trials = data["trials"]
    deltas = [float(x) for x in data.get("deltas", [])]
    f = _test_function(zp, data["frequencies"])
    window = _with_identity_first(zp, f.window)
    columns = ["d", "trial_count", "re_mean", "im_mean", "variance", "target"]
    columns += [f"dev_frac_delta{i + 1}" for i in range(len(deltas))]
    rows = []
    derived = {}
    for i, m in enumerate(data["degrees"]):
        sigma = build_sofic(zp, m)
        p_hat, rounded = _rounded_projection(sigma, data["arc"], data["cutoff"])
        seed_i = derived_seed(master, i)
        derived[f"degree_{m}"] = seed_i
        res = concentration_experiment(sigma, rounded.projection, p_hat, f,
                                       window, trials, deltas=deltas, seed=seed_i)
        rows.append((
            int(m), int(trials),
            float(res.mean.real), float(res.mean.imag),
            float(res.variance), float(res.target.real),
            *(float(res.deviation_fractions[dl]) for dl in deltas),
        ))
    return Report(
        kind="gauss",
        columns=columns,
        rows=rows,
        metadata={"derived_seeds": derived, "deltas": deltas, "trials": trials},
    )


def _run_entropy(data: dict, master: int) -> Report:
    zp = ZPow(1)
    n_samples = data["n_samples"]
    big_f = tuple(zp.element(g) for g in data["F"])
    rows = []
    derived = {}
    for i, m in enumerate(data["degrees"]):
        sigma = build_sofic(zp, m)
        seed_i = derived_seed(master, i)
        derived[f"degree_{m}"] = seed_i
        p = data["p"]
        if p == "identity":
            sampler = GaussianSampler.identity(m, seed_i)
            p_hat = delta(zp.identity)
        elif p == "zero":
            sampler = GaussianSampler.zero(m, seed_i)
            p_hat = zero_element(zp)
        else:
            p_hat, rounded = _rounded_projection(sigma, p["arc"], p["cutoff"])
            sampler = GaussianSampler(rounded.projection, seed_i)
        tests = ()
        if "tests" in data:
            f = _test_function(zp, data["tests"])
            tests = ((f, f.analytic_target(p_hat)),)
        box = None
        if "box" in data:
            box = {zp.identity: float(data["box"])}
        params = MapParams(
            F=big_f,
            delta=float(data["delta"]),
            tests=tests,
            box_bounds=box,
            eta=float(data.get("eta", 0.05)),
        )
        window = None
        if "window" in data:
            window = _with_identity_first(zp, (zp.element(g) for g in data["window"]))
        for eps in data["epsilons"]:
            est = entropy_estimate(sigma, sampler, params, float(eps),
                                   n_samples, window=window)
            rows.append((
                est.degree, est.epsilon, est.n_samples, est.members,
                est.packed, est.rate, est.analytic_bound, est.r_used, est.seed,
            ))
    return Report(
        kind="entropy",
        columns=["d", "epsilon", "n_samples", "members", "packed",
                 "rate", "analytic_bound", "R_used", "seed"],
        rows=rows,
        metadata={"derived_seeds": derived, "n_samples": n_samples},
    )


def _run_harmonic(data: dict, master: int) -> Report:
    trials = data["trials"]
    fleet = finite_group_fleet(data.get("max_size", 12))
    stream_seed = derived_seed(master, 0)
    rng = np.random.Generator(np.random.Philox(stream_seed))
    rows = []
    for t in range(trials):
        grp = fleet[int(rng.integers(len(fleet)))]
        y = random_positive_element(grp, rng)
        z = random_positive_element(grp, rng)
        res = powers_stormer_check(y, z)
        rows.append((t, grp.n, float(res.lhs), float(res.rhs), int(res.holds)))
    return Report(
        kind="harmonic",
        columns=["trial", "group_size", "lhs", "rhs", "holds"],
        rows=rows,
        metadata={"derived_seeds": {"stream": stream_seed}, "trials": trials},
    )
