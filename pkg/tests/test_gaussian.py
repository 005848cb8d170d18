import cmath
import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given
from hypothesis import strategies as st

from sofic_lab.errors import StructuralError
from sofic_lab.gaussian import (
    COORD_STD,
    ArcProjectionSpec,
    FourierTestFunction,
    GaussianSampler,
    Microstate,
    arc_projection_coeffs,
    build_microstate,
    characteristic_mean,
    concentration_experiment,
    empirical_functional,
    gaussian_target,
)
from sofic_lab.groups import ZPow
from sofic_lab.ring import delta, zero_element
from sofic_lab.sofic import build_sofic

Z = ZPow(1)


# ---------------------------------------------------------------------------
# arc projection coefficients

def quad_coeff(arcs, k):
    re = sum(scipy.integrate.quad(lambda t: math.cos(2 * math.pi * k * t), u, v)[0]
             for u, v in arcs)
    im = sum(scipy.integrate.quad(lambda t: -math.sin(2 * math.pi * k * t), u, v)[0]
             for u, v in arcs)
    return complex(re, im)


@pytest.mark.parametrize("arcs", [
    ((0.1, 0.35),),
    ((0.0, 0.125), (0.875, 1.0)),
    ((0.05, 0.2), (0.4, 0.45), (0.7, 0.9)),
])
def test_arc_coefficients_match_quadrature(arcs):
    spec = ArcProjectionSpec(arcs, cutoff=6)
    p_hat = arc_projection_coeffs(spec)
    for k in range(-6, 7):
        got = p_hat.coefficient(Z.element(k))
        assert got == pytest.approx(quad_coeff(arcs, k), abs=1e-12)


def test_zero_coefficient_is_the_measure():
    spec = ArcProjectionSpec.symmetric(0.3, cutoff=4)
    p_hat = arc_projection_coeffs(spec)
    assert p_hat.coefficient(Z.identity) == pytest.approx(0.3, abs=1e-15)
    assert spec.measure == pytest.approx(0.3)


@given(st.floats(min_value=0.01, max_value=0.99), st.integers(min_value=0, max_value=8))
def test_symmetric_arcs_have_real_hermitian_coefficients(measure, cutoff):
    p_hat = arc_projection_coeffs(ArcProjectionSpec.symmetric(measure, cutoff))
    for k in range(-cutoff, cutoff + 1):
        c = p_hat.coefficient(Z.element(k))
        c_neg = p_hat.coefficient(Z.element(-k))
        assert c == c_neg.conjugate()
        assert abs(c.imag) < 1e-15


def test_full_circle_gives_exact_delta_at_zero():
    p_hat = arc_projection_coeffs(ArcProjectionSpec.symmetric(1.0, cutoff=5))
    assert p_hat.coefficient(Z.identity) == 1.0
    for k in range(1, 6):
        assert p_hat.coefficient(Z.element(k)) == 0.0
        assert p_hat.coefficient(Z.element(-k)) == 0.0


def test_integer_frequency_times_length_snaps_to_zero():
    # length 1/2 arcs kill every even frequency exactly
    spec = ArcProjectionSpec(((0.25, 0.75),), cutoff=4)
    p_hat = arc_projection_coeffs(spec)
    assert p_hat.coefficient(Z.element(2)) == 0.0
    assert p_hat.coefficient(Z.element(4)) == 0.0


def test_overlapping_arcs_rejected():
    with pytest.raises(StructuralError):
        ArcProjectionSpec(((0.0, 0.5), (0.4, 0.6)), cutoff=2)
    with pytest.raises(StructuralError):
        ArcProjectionSpec(((0.2, 1.1),), cutoff=2)
    with pytest.raises(StructuralError):
        ArcProjectionSpec(((0.0, 0.5),), cutoff=-1)


# ---------------------------------------------------------------------------
# characteristic targets

def test_gaussian_target_hand_values():
    # p_hat = delta_0: ||t * p_hat||_2 = |t0|, so the target is e^(-pi t0^2)
    p_hat = delta(Z.identity)
    t0 = 0.35
    got = gaussian_target(p_hat, {Z.identity: t0})
    assert got == pytest.approx(math.exp(-math.pi * t0**2), rel=1e-14)
    # p_hat = delta_1 + delta_{-1}: squared norm doubles
    two_sided = delta(Z.element(1)) + delta(Z.element(-1))
    got2 = gaussian_target(two_sided, {Z.identity: t0})
    assert got2 == pytest.approx(math.exp(-2 * math.pi * t0**2), rel=1e-14)


def test_gaussian_target_of_zero_projection_is_one():
    assert gaussian_target(zero_element(Z), {Z.identity: 0.7}) == 1.0


def test_gaussian_target_rejects_complex_frequencies():
    with pytest.raises(StructuralError):
        gaussian_target(delta(Z.identity), {Z.identity: 1.0j})


def test_analytic_target_is_weighted_sum_of_characteristic_values():
    p_hat = delta(Z.identity)
    f = FourierTestFunction(
        window=(Z.identity,),
        frequencies=np.array([[0.2], [0.5]]),
        weights=np.array([1.0, -0.5j]),
    )
    want = (1.0 * math.exp(-math.pi * 0.04)
            - 0.5j * math.exp(-math.pi * 0.25))
    assert f.analytic_target(p_hat) == pytest.approx(want, rel=1e-14)


def test_test_function_bound_and_evaluation():
    f = FourierTestFunction.single_frequency([Z.identity], [0.35], weight=2.0)
    assert f.weight_bound() == 2.0
    val = f([1.25])
    assert val == pytest.approx(2.0 * cmath.exp(2j * math.pi * 0.35 * 1.25))
    assert abs(val) <= f.weight_bound() + 1e-12


def test_test_function_validates_shapes():
    with pytest.raises(StructuralError):
        FourierTestFunction(window=(Z.identity,),
                            frequencies=np.array([[0.1, 0.2]]),
                            weights=np.array([1.0]))
    with pytest.raises(StructuralError):
        FourierTestFunction(window=(Z.identity, Z.identity),
                            frequencies=np.array([[0.1, 0.2]]),
                            weights=np.array([1.0]))


# ---------------------------------------------------------------------------
# sampler

def test_sampling_is_stateless_prefix_consistent():
    s = GaussianSampler.identity(6, seed=101)
    big = s.sample(10)
    small = s.sample(5)
    assert np.array_equal(big[:5], small)


@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**31))
def test_prefix_property_holds_for_any_seed(m, seed):
    s = GaussianSampler.identity(3, seed=seed)
    assert np.array_equal(s.sample(m + 4)[:m], s.sample(m))


def test_sampler_rejects_bad_projections():
    with pytest.raises(StructuralError):
        GaussianSampler(0.5 * np.eye(4), seed=0)  # not idempotent
    m = np.zeros((3, 3))
    m[0, 1] = 1.0
    with pytest.raises(StructuralError):
        GaussianSampler(m, seed=0)  # not symmetric
    with pytest.raises(StructuralError):
        GaussianSampler(np.zeros((2, 3)), seed=0)


def test_coordinate_variance_matches_density():
    # density e^(-pi t^2) means Var = 1/(2 pi)
    s = GaussianSampler.identity(4, seed=77)
    xs = s.sample(200_000)
    assert xs.var() == pytest.approx(COORD_STD**2, rel=0.01)


def test_projected_samples_stay_in_range():
    rng = np.random.Generator(np.random.Philox(3))
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    p = q[:, :2] @ q[:, :2].T
    s = GaussianSampler(p, seed=5)
    xs = s.sample(50)
    assert np.allclose(xs @ p, xs, atol=1e-12)
    assert s.rank == 2


def test_characteristic_mean_matches_direct_average():
    s = GaussianSampler.identity(3, seed=42)
    v = np.array([0.3, -0.2, 0.5])
    n = 1000
    got = characteristic_mean(s, v, n)
    xs = s.sample(n)
    want = np.exp(2j * np.pi * (xs @ v)).mean()
    assert got == pytest.approx(want, abs=1e-12)


def test_characteristic_mean_concentrates_on_target():
    d = 16
    s = GaussianSampler.identity(d, seed=8)
    rng = np.random.Generator(np.random.Philox(15))
    v = rng.normal(size=d) * 0.1
    n = 20_000
    target = math.exp(-math.pi * float(v @ v))
    got = characteristic_mean(s, v, n)
    se = math.sqrt((1.0 - target**2) / n)
    assert abs(got - target) <= 3 * se


def test_characteristic_mean_checks_dimension():
    s = GaussianSampler.identity(3, seed=0)
    with pytest.raises(StructuralError):
        characteristic_mean(s, np.zeros(4), 10)


# ---------------------------------------------------------------------------
# microstates

def test_microstate_columns_transport_the_sample():
    sigma = build_sofic(Z, 5)
    x = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    window = (Z.identity, Z.element(1), Z.element(-1))
    ms = build_microstate(x, window, sigma)
    for g in window:
        inv = sigma.evaluate(g).inverse().images
        assert np.array_equal(ms.column(g), x[inv])
    assert np.array_equal(ms.column(Z.identity), x)
    assert ms.degree == 5


def test_microstate_window_needs_identity():
    sigma = build_sofic(Z, 4)
    with pytest.raises(StructuralError):
        build_microstate(np.zeros(4), (Z.element(1),), sigma)


def test_microstate_rejects_wrong_length_and_nonfinite():
    sigma = build_sofic(Z, 4)
    with pytest.raises(StructuralError):
        build_microstate(np.zeros(5), (Z.identity,), sigma)
    with pytest.raises(StructuralError):
        Microstate((Z.identity,), np.array([[np.nan]]))


def test_column_outside_window_is_an_error():
    ms = Microstate((Z.identity,), np.zeros((3, 1)))
    with pytest.raises(StructuralError):
        ms.column(Z.element(2))


def test_empirical_functional_hand_oracle():
    sigma = build_sofic(Z, 4)
    x = np.array([0.15, -0.4, 0.3, 0.05])
    window = (Z.identity, Z.element(1))
    ms = build_microstate(x, window, sigma)
    f = FourierTestFunction.single_frequency(window, [0.3, -0.7])
    got = empirical_functional(ms, f)
    inv = sigma.evaluate(Z.element(1)).inverse().images
    want = np.mean([
        cmath.exp(2j * math.pi * (0.3 * x[j] - 0.7 * x[inv[j]]))
        for j in range(4)
    ])
    assert got == pytest.approx(want, rel=1e-14)


def test_empirical_functional_requires_window_containment():
    ms = Microstate((Z.identity,), np.zeros((3, 1)))
    f = FourierTestFunction.single_frequency([Z.identity, Z.element(1)], [0.1, 0.2])
    with pytest.raises(StructuralError):
        empirical_functional(ms, f)


# ---------------------------------------------------------------------------
# concentration experiment

def test_concentration_experiment_is_deterministic():
    sigma = build_sofic(Z, 8)
    p_hat = delta(Z.identity)
    f = FourierTestFunction.single_frequency([Z.identity], [0.35])
    window = (Z.identity,)
    kwargs = dict(trials=64, deltas=(0.05, 0.2), seed=1234)
    r1 = concentration_experiment(sigma, np.eye(8), p_hat, f, window, **kwargs)
    r2 = concentration_experiment(sigma, np.eye(8), p_hat, f, window, **kwargs)
    assert r1.mean == r2.mean
    assert r1.variance == r2.variance
    assert r1.deviation_fractions == r2.deviation_fractions
    assert r1.target == f.analytic_target(p_hat)
    assert r1.seed == 1234


def test_concentration_accepts_prebuilt_sampler():
    sigma = build_sofic(Z, 8)
    p_hat = delta(Z.identity)
    f = FourierTestFunction.single_frequency([Z.identity], [0.35])
    sampler = GaussianSampler.identity(8, seed=999)
    res = concentration_experiment(sigma, sampler, p_hat, f, (Z.identity,),
                                   trials=16, seed=0)
    assert res.seed == 999


def test_concentration_checks_projection_dimension():
    sigma = build_sofic(Z, 8)
    p_hat = delta(Z.identity)
    f = FourierTestFunction.single_frequency([Z.identity], [0.35])
    with pytest.raises(StructuralError):
        concentration_experiment(sigma, np.eye(9), p_hat, f, (Z.identity,), trials=4)


def test_deviation_fractions_count_excursions():
    sigma = build_sofic(Z, 16)
    p_hat = delta(Z.identity)
    f = FourierTestFunction.single_frequency([Z.identity], [0.35])
    res = concentration_experiment(sigma, np.eye(16), p_hat, f, (Z.identity,),
                                   trials=128, deltas=(0.0, 10.0), seed=7)
    # |G - target| > 0 essentially always, > 10 never (|G| <= 1, target <= 1)
    assert res.deviation_fractions[0.0] == 1.0
    assert res.deviation_fractions[10.0] == 0.0