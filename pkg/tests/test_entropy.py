import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sofic_lab.entropy import (
    R_STIRLING,
    EntropyEstimate,
    MapParams,
    binary_entropy,
    delta2,
    entropy_estimate,
    equivariance_defect,
    greedy_packing,
    greedy_packing_indices,
    map_membership,
    packing_lower_bound,
    required_window,
)
from sofic_lab.errors import StructuralError
from sofic_lab.gaussian import FourierTestFunction, GaussianSampler, Microstate
from sofic_lab.gaussian import build_microstate
from sofic_lab.groups import ZPow
from sofic_lab.sofic import Permutation, build_sofic

Z = ZPow(1)


def identity_only(values):
    """Microstate over the one-element window (e,) with the given column."""
    col = np.asarray(values, dtype=np.float64)
    return Microstate((Z.identity,), col[:, None])


# ---------------------------------------------------------------------------
# pseudometric

def test_delta2_hand_value():
    phi = identity_only([0.5, -0.25, 2.0])
    psi = identity_only([0.0, 0.0, 0.0])
    # truncated diffs: 0.5, 0.25, 1.0
    want = math.sqrt((0.25 + 0.0625 + 1.0) / 3.0)
    assert delta2(phi, psi) == pytest.approx(want, rel=1e-15)


def test_delta2_requires_equal_degrees():
    with pytest.raises(StructuralError):
        delta2(identity_only([0.0]), identity_only([0.0, 0.0]))


coords = st.lists(st.floats(min_value=-5, max_value=5), min_size=3, max_size=3)


@given(coords, coords)
def test_delta2_is_symmetric_and_reflexive(xs, ys):
    phi, psi = identity_only(xs), identity_only(ys)
    assert delta2(phi, psi) == delta2(psi, phi)
    assert delta2(phi, phi) == 0.0


@given(coords, coords, coords)
def test_delta2_triangle_inequality(xs, ys, zs):
    # min(|a-b|, 1) is a metric on the line and delta2 is its l2 mean,
    # so Minkowski gives the triangle inequality
    phi, psi, chi = identity_only(xs), identity_only(ys), identity_only(zs)
    assert delta2(phi, chi) <= delta2(phi, psi) + delta2(psi, chi) + 1e-12


@given(coords, coords)
def test_delta2_is_capped_at_one(xs, ys):
    big = identity_only([x + 100.0 for x in xs])
    assert delta2(big, identity_only(ys)) <= 1.0 + 1e-15


# ---------------------------------------------------------------------------
# equivariance

def test_equivariance_vanishes_on_exact_quotients():
    sigma = build_sofic(Z, 8)
    rng = np.random.Generator(np.random.Philox(21))
    x = rng.normal(size=8)
    window = (Z.identity, Z.element(1), Z.element(-1))
    phi = build_microstate(x, window, sigma)
    assert equivariance_defect(phi, sigma, Z.element(1)) == 0.0
    assert equivariance_defect(phi, sigma, Z.element(-1)) == 0.0


def test_equivariance_needs_g_and_inverse_in_window():
    sigma = build_sofic(Z, 8)
    phi = build_microstate(np.zeros(8), (Z.identity, Z.element(1)), sigma)
    with pytest.raises(StructuralError, match="window too small"):
        equivariance_defect(phi, sigma, Z.element(1))


def test_planted_nonequivariance_is_detected():
    sigma = build_sofic(Z, 8)
    rng = np.random.Generator(np.random.Philox(4))
    x = rng.normal(size=8)
    window = (Z.identity, Z.element(1), Z.element(-1))
    phi = build_microstate(x, window, sigma)
    broken = sigma.with_override(Z.element(1), Permutation(np.arange(8)))
    assert equivariance_defect(phi, broken, Z.element(1)) > 0.0


# ---------------------------------------------------------------------------
# membership

def zeros_microstate(sigma, window):
    return build_microstate(np.zeros(sigma.degree), window, sigma)


def test_membership_thresholds_are_strict():
    sigma = build_sofic(Z, 8)
    f = FourierTestFunction.single_frequency([Z.identity], [0.35])
    window = (Z.identity,)
    phi = zeros_microstate(sigma, window)
    # empirical value of f on the zero microstate is exactly 1, and the
    # gap 1 - 0.75 = 0.25 is exact in binary, so strictness is observable
    target = 0.75
    at_gap = MapParams(F=(), delta=0.25, tests=((f, target),))
    assert map_membership(phi, sigma, at_gap).worst_functional_gap == 0.25
    assert not map_membership(phi, sigma, at_gap).member
    above_gap = MapParams(F=(), delta=0.25 + 1e-9, tests=((f, target),))
    assert map_membership(phi, sigma, above_gap).member


def test_membership_box_filter():
    sigma = build_sofic(Z, 4)
    window = (Z.identity,)
    phi = build_microstate(np.array([0.05, 0.2, 0.0, -0.3]), window, sigma)
    tight = MapParams(F=(), delta=1.0, box_bounds={Z.identity: 0.1}, eta=0.4)
    res = map_membership(phi, sigma, tight)
    assert res.box_mass == 0.5
    assert not res.member  # 0.5 is not > 1 - 0.4
    loose = MapParams(F=(), delta=1.0, box_bounds={Z.identity: 0.1}, eta=0.6)
    assert map_membership(phi, sigma, loose).member


def test_box_bound_boundary_counts_as_inside():
    sigma = build_sofic(Z, 2)
    phi = build_microstate(np.array([0.1, -0.1]), (Z.identity,), sigma)
    params = MapParams(F=(), delta=1.0, box_bounds={Z.identity: 0.1}, eta=0.5)
    assert map_membership(phi, sigma, params).box_mass == 1.0


def test_membership_equivariance_gate():
    sigma = build_sofic(Z, 8)
    rng = np.random.Generator(np.random.Philox(9))
    x = rng.normal(size=8)
    window = (Z.identity, Z.element(1), Z.element(-1))
    phi = build_microstate(x, window, sigma)
    params = MapParams(F=(Z.element(1),), delta=0.05)
    res = map_membership(phi, sigma, params)
    assert res.worst_equivariance == 0.0
    assert res.member
    broken = sigma.with_override(Z.element(1), Permutation(np.arange(8)))
    res2 = map_membership(phi, broken, params)
    assert res2.worst_equivariance > 0.05
    assert not res2.member


def test_map_params_validation():
    with pytest.raises(StructuralError, match="delta must be positive"):
        MapParams(delta=0.0)
    with pytest.raises(StructuralError, match="eta must be positive"):
        MapParams(eta=-0.1)
    with pytest.raises(StructuralError, match="must be positive"):
        MapParams(box_bounds={Z.identity: 0.0})


def test_required_window_contents():
    f = FourierTestFunction.single_frequency([Z.identity, Z.element(3)], [0.1, 0.2])
    params = MapParams(F=(Z.element(1),), delta=0.1, tests=((f, 1.0),),
                       box_bounds={Z.element(2): 1.0})
    window = required_window(params, Z)
    assert window[0] == Z.identity
    for g in (Z.element(1), Z.element(-1), Z.element(3), Z.element(2)):
        assert g in window
    assert len(window) == len(set(window))


# ---------------------------------------------------------------------------
# packing

rows_strategy = st.lists(
    st.lists(st.floats(min_value=-2, max_value=2), min_size=4, max_size=4),
    min_size=1, max_size=24,
)


def truncated_dist(a, b):
    d = np.minimum(np.abs(np.asarray(a) - np.asarray(b)), 1.0)
    return math.sqrt(float(np.mean(d**2)))


@given(rows_strategy, st.floats(min_value=0.05, max_value=1.5))
def test_greedy_packing_is_separated_and_maximal(rows, eps):
    arr = np.array(rows)
    kept = greedy_packing_indices(arr, eps)
    for a in range(len(kept)):
        for b in range(a + 1, len(kept)):
            assert truncated_dist(arr[kept[a]], arr[kept[b]]) > eps
    for i in range(len(arr)):
        if i not in kept:
            assert any(truncated_dist(arr[i], arr[j]) <= eps
                       for j in kept if j < i)


@given(rows_strategy, st.floats(min_value=0.05, max_value=1.5))
def test_greedy_packing_is_prefix_stable(rows, eps):
    arr = np.array(rows)
    full = greedy_packing_indices(arr, eps)
    n = len(arr) // 2
    assert greedy_packing_indices(arr[:n], eps) == [i for i in full if i < n]


def test_greedy_packing_counts_microstates():
    items = [identity_only([0.0, 0.0]), identity_only([5.0, 5.0]),
             identity_only([0.01, 0.01])]
    assert greedy_packing(items, 0.5) == 2
    assert greedy_packing([], 0.5) == 0


def test_packing_rejects_bad_epsilon():
    with pytest.raises(StructuralError):
        greedy_packing_indices(np.zeros((2, 2)), 0.0)


# ---------------------------------------------------------------------------
# analytic bounds

def test_binary_entropy_endpoints_and_midpoint():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == math.log(2.0)


def test_binary_entropy_domain():
    with pytest.raises(StructuralError):
        binary_entropy(-0.01)
    with pytest.raises(StructuralError):
        binary_entropy(1.01)


def test_packing_lower_bound_formula():
    eps, r = 1e-3, 5.0
    s = math.sqrt(eps)
    want = 0.5 * math.log((1 - s) / eps) - 0.5 * math.log(r) - binary_entropy(s)
    assert packing_lower_bound(eps, r) == pytest.approx(want, rel=1e-14)


def test_packing_lower_bound_reference_value():
    assert packing_lower_bound(1e-4, R_STIRLING) == pytest.approx(
        3.1252049505018205, abs=1e-12)
    assert R_STIRLING == pytest.approx(2 * math.pi * math.e, rel=0)


def test_packing_lower_bound_monotone_in_r():
    assert packing_lower_bound(1e-3, 1.0) > packing_lower_bound(1e-3, 20.0)


def test_packing_lower_bound_domain():
    with pytest.raises(StructuralError):
        packing_lower_bound(0.0, 1.0)
    with pytest.raises(StructuralError):
        packing_lower_bound(1.0, 1.0)
    with pytest.raises(StructuralError):
        packing_lower_bound(0.5, 0.0)


# ---------------------------------------------------------------------------
# entropy estimate

def test_zero_projection_packs_exactly_one():
    d = 6
    sigma = build_sofic(Z, d)
    sampler = GaussianSampler.zero(d, seed=11)
    params = MapParams(F=(Z.element(1),), delta=0.1)
    est = entropy_estimate(sigma, sampler, params, epsilon=1e-2, n_samples=16)
    assert est.members == 16
    assert est.packed == 1
    assert est.rate == 0.0
    assert est.degree == d
    assert est.r_used == R_STIRLING
    assert est.seed == 11


def test_empty_membership_gives_minus_infinity():
    d = 4
    sigma = build_sofic(Z, d)
    sampler = GaussianSampler.identity(d, seed=3)
    # impossible functional test: zero target but empirical magnitude ~1
    f = FourierTestFunction.single_frequency([Z.identity], [1e-6])
    params = MapParams(F=(), delta=1e-6, tests=((f, 0.0),))
    est = entropy_estimate(sigma, sampler, params, epsilon=0.1, n_samples=8)
    assert est.members == 0
    assert est.packed == 0
    assert est.rate == float("-inf")


def test_packed_count_is_monotone_in_budget():
    d = 12
    sigma = build_sofic(Z, d)
    sampler = GaussianSampler.identity(d, seed=7)
    params = MapParams(F=(Z.element(1),), delta=0.9)
    eps = 0.05
    counts = [entropy_estimate(sigma, sampler, params, eps, n).packed
              for n in (4, 16, 64)]
    assert counts == sorted(counts)
    assert counts[-1] > 1


def test_entropy_estimate_rate_definition():
    d = 12
    sigma = build_sofic(Z, d)
    sampler = GaussianSampler.identity(d, seed=7)
    params = MapParams(F=(Z.element(1),), delta=0.9)
    est = entropy_estimate(sigma, sampler, params, 0.05, 64)
    assert est.rate == pytest.approx(math.log(est.packed) / d, rel=1e-15)
    assert est.analytic_bound == packing_lower_bound(0.05, R_STIRLING)


def test_entropy_estimate_checks_dimension():
    sigma = build_sofic(Z, 8)
    sampler = GaussianSampler.identity(9, seed=0)
    with pytest.raises(StructuralError):
        entropy_estimate(sigma, sampler, MapParams(), 0.1, 4)


def test_entropy_estimate_is_a_dataclass_with_stable_fields():
    est = EntropyEstimate(degree=2, epsilon=0.1, n_samples=1, members=1,
                          packed=1, rate=0.0, analytic_bound=-1.0)
    assert est.r_used == R_STIRLING
