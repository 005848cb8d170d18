import numpy as np
import pytest

from sofic_lab.embedding import (
    MatrixImage,
    embedding_defect,
    linearize,
    matrix_norms,
    normalized_norm2,
    realify,
    spectral_round,
)
from sofic_lab.errors import StructuralError
from sofic_lab.groups import ZPow, cyclic_group, dihedral_group
from sofic_lab.ring import Product, Slot, Star, Sum, delta, ring_convolve, ring_star
from sofic_lab.sofic import build_sofic


def perm_matrix(perm):
    d = perm.degree
    m = np.zeros((d, d))
    m[perm.images, np.arange(d)] = 1.0
    return m


# ---------------------------------------------------------------------------
# linearization

def test_linearize_matches_permutation_matrix_sum():
    grp = dihedral_group(4)
    sigma = build_sofic(grp, grp.n)
    g, h = grp.generators()[:2]
    alpha = delta(g, 2.0) + delta(h, -0.5) + delta(grp.identity, 1.0 + 1.0j)
    want = (2.0 * perm_matrix(sigma.evaluate(g))
            - 0.5 * perm_matrix(sigma.evaluate(h))
            + (1.0 + 1.0j) * np.eye(grp.n))
    got = linearize(sigma, alpha).matrix
    assert np.array_equal(got, want)


def test_linearize_identity_element_is_identity_matrix():
    z = ZPow(1)
    sigma = build_sofic(z, 9)
    img = linearize(sigma, delta(z.identity))
    assert np.array_equal(img.matrix, np.eye(9))
    assert img.matrix.dtype == np.float64


def test_linearize_is_multiplicative_on_exact_quotients():
    z = ZPow(2)
    sigma = build_sofic(z, 16)
    a = delta(z.element((1, 0)), 1.5) + delta(z.element((0, -1)), -2.0)
    b = delta(z.element((1, 1))) - delta(z.identity, 0.25)
    lhs = linearize(sigma, a).matrix @ linearize(sigma, b).matrix
    rhs = linearize(sigma, ring_convolve(a, b)).matrix
    assert np.allclose(lhs, rhs, atol=1e-13)


def test_linearize_intertwines_star_and_adjoint():
    grp = cyclic_group(6)
    sigma = build_sofic(grp, 6)
    a = delta(grp.element(1), 1.0 - 2.0j) + delta(grp.element(3), 0.5j)
    assert np.allclose(linearize(sigma, ring_star(a)).matrix,
                       linearize(sigma, a).matrix.conj().T, atol=0)


def test_linearize_rejects_mismatched_group():
    sigma = build_sofic(cyclic_group(4), 4)
    other = delta(cyclic_group(5).identity)
    with pytest.raises(StructuralError):
        linearize(sigma, other)


# ---------------------------------------------------------------------------
# defect functionals

def test_exact_quotient_has_zero_embedding_defect():
    z = ZPow(1)
    sigma = build_sofic(z, 16)
    a = delta(z.element(1)) + delta(z.element(-1))
    poly = Product((Slot(0), Star(Slot(0))))
    rep = embedding_defect(sigma, [a], poly)
    assert rep.poly_defect == 0.0
    assert rep.trace_defect == 0.0
    assert rep.norm2_drift == 0.0


def test_injected_image_noise_shows_up_in_poly_defect():
    z = ZPow(1)
    sigma = build_sofic(z, 16)
    a = delta(z.element(1)) + delta(z.element(-1))
    poly = Product((Slot(0), Star(Slot(0))))
    clean = linearize(sigma, a).matrix
    noise = np.zeros_like(clean)
    noise[0, 1] = 0.3
    rep = embedding_defect(sigma, [a], poly, images=[clean + noise])
    assert rep.poly_defect > 0.0
    # the ring-side reference is untouched, so the trace side moves too
    assert rep.norm2_drift > 0.0


def test_embedding_defect_checks_arity():
    z = ZPow(1)
    sigma = build_sofic(z, 8)
    poly = Sum((Slot(0), Slot(1)))
    with pytest.raises(StructuralError):
        embedding_defect(sigma, [delta(z.identity)], poly)


def test_embedding_defect_checks_image_count():
    z = ZPow(1)
    sigma = build_sofic(z, 8)
    poly = Slot(0)
    a = delta(z.identity)
    with pytest.raises(StructuralError):
        embedding_defect(sigma, [a], poly, images=[np.eye(8), np.eye(8)])


# ---------------------------------------------------------------------------
# norms

def test_matrix_norms_against_svd():
    rng = np.random.Generator(np.random.Philox(5))
    a = rng.normal(size=(17, 17))
    norms = matrix_norms(a)
    svals = np.linalg.svd(a, compute_uv=False)
    assert norms.op_norm == pytest.approx(svals[0], rel=1e-12)
    assert norms.norm2 == pytest.approx(np.sqrt(np.sum(svals**2) / 17), rel=1e-12)


def test_matrix_norms_iterative_path():
    # diagonal above the dense cutoff: largest singular value is known
    d = 2100
    diag = np.linspace(0.1, 3.7, d)
    a = np.diag(diag)
    norms = matrix_norms(a)
    assert norms.op_norm == pytest.approx(3.7, rel=1e-6)
    assert norms.norm2 == pytest.approx(np.sqrt(np.mean(diag**2)), rel=1e-12)


def test_normalized_norm2_of_identity_is_one():
    assert normalized_norm2(np.eye(23)) == 1.0


# ---------------------------------------------------------------------------
# spectral rounding

def planted_spectrum(w, seed):
    """A symmetric matrix M with M^T M having exactly the eigenvalues w."""
    w = np.asarray(w, dtype=np.float64)
    rng = np.random.Generator(np.random.Philox(seed))
    q, _ = np.linalg.qr(rng.normal(size=(w.size, w.size)))
    return (q * np.sqrt(w)) @ q.T, q


def test_spectral_round_keeps_planted_window():
    w = np.array([0.0, 0.1, 0.45, 0.6, 0.9, 1.0, 1.3, 1.6, 2.0])
    m, q = planted_spectrum(w, seed=11)
    rounded = spectral_round(m)
    mask = (w >= 0.5) & (w <= 1.5)
    assert rounded.rank == int(mask.sum())
    want = (q[:, mask]) @ (q[:, mask]).T
    assert np.allclose(rounded.projection, want, atol=1e-9)
    assert rounded.normalized_trace == pytest.approx(mask.mean())


def test_certificate_matches_hand_computation():
    w = np.array([0.2, 0.8, 1.1, 1.9])
    m, _ = planted_spectrum(w, seed=3)
    rounded = spectral_round(m)
    chi = ((w >= 0.5) & (w <= 1.5)).astype(float)
    assert rounded.certificate == pytest.approx(np.mean((chi - w) ** 2), rel=1e-9)
    assert rounded.certificate_bound == pytest.approx(16 * np.mean((w - w**2) ** 2),
                                                      rel=1e-9)
    assert rounded.holds
    assert not rounded.endpoint_warning


def test_certificate_bound_is_sound_near_idempotents():
    # for spectra close to {0, 1} the certificate must hold with room
    rng = np.random.Generator(np.random.Philox(7))
    for trial in range(20):
        base = rng.integers(0, 2, size=12).astype(float)
        w = np.clip(base + rng.normal(scale=0.05, size=12), 0.0, None)
        m, _ = planted_spectrum(w, seed=100 + trial)
        rounded = spectral_round(m)
        assert rounded.certificate <= rounded.certificate_bound


def test_endpoint_warning_fires_on_planted_edge_eigenvalue():
    w = np.array([0.0, 0.5 + 1e-10, 1.0])
    m, _ = planted_spectrum(w, seed=2)
    assert spectral_round(m).endpoint_warning
    w_clear = np.array([0.0, 0.7, 1.0])
    m2, _ = planted_spectrum(w_clear, seed=2)
    assert not spectral_round(m2).endpoint_warning


def test_exact_projection_rounds_to_itself():
    w = np.array([1.0, 1.0, 0.0, 0.0, 1.0])
    m, q = planted_spectrum(w, seed=9)
    rounded = spectral_round(m)
    assert rounded.certificate == pytest.approx(0.0, abs=1e-24)
    assert rounded.rank == 3
    assert np.allclose(rounded.projection @ rounded.projection,
                       rounded.projection, atol=1e-12)


def test_spectral_round_rejects_nonsquare_and_complex():
    with pytest.raises(StructuralError):
        spectral_round(np.ones((3, 4)))
    with pytest.raises(StructuralError):
        spectral_round(np.eye(3) * (1.0 + 1e-6j))


# ---------------------------------------------------------------------------
# realification

def test_realify_equals_linearize_for_real_coefficients():
    z = ZPow(1)
    sigma = build_sofic(z, 8)
    a = delta(z.element(1)) + delta(z.element(-1))
    assert np.array_equal(realify(sigma, a).matrix, linearize(sigma, a).matrix)
    assert realify(sigma, a).matrix.dtype == np.float64


def test_realify_tolerates_roundoff_imaginary_parts():
    z = ZPow(1)
    sigma = build_sofic(z, 8)
    a = delta(z.element(1), 1.0 + 1e-13j) + delta(z.element(-1), 1.0)
    out = realify(sigma, a)
    assert not np.iscomplexobj(out.matrix)


def test_realify_rejects_truly_complex_coefficients():
    z = ZPow(1)
    sigma = build_sofic(z, 8)
    a = delta(z.element(1), 1.0j)
    with pytest.raises(StructuralError):
        realify(sigma, a)


def test_empty_window_gives_rank_zero_projection():
    m = np.diag([10.0, 20.0])
    rounded = spectral_round(m)
    assert rounded.rank == 0
    assert np.array_equal(rounded.projection, np.zeros((2, 2)))


def test_matrix_image_degree():
    img = MatrixImage(np.zeros((5, 5)))
    assert img.degree == 5
