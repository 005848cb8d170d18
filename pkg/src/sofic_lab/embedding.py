"""Linearization of sofic maps into matrix algebras.

sigma extends linearly to the group ring by sending sum_g alpha_g g to
sum_g alpha_g P_{sigma(g)}.  The defect functionals measure how far that
extension is from a trace-preserving *-homomorphism in the normalized
2-norm, and spectral_round replaces an approximate projection by an exact
one with a computable error certificate.

Norm conventions throughout: tr is the normalized trace (1/d) Tr, and
norm2 is the normalized Frobenius norm tr(A* A)^(1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import NumericalError, StructuralError
from .ring import GroupRingElement, StarPolynomial, ring_norm2, ring_trace
from .sofic import DENSE_EIGEN_MAX, ITERATIVE_TOL, SoficMap

REALIFY_IMAG_TOL = 1e-12
PROJECTION_TOL = 1e-9
ENDPOINT_WARN_TOL = 1e-9
ROUND_WINDOW = (0.5, 1.5)


@dataclass
class MatrixImage:
    """A d x d matrix image of a group-ring element, with its provenance."""

    matrix: np.ndarray
    sofic: SoficMap | None = None
    alpha: GroupRingElement | None = None

    @property
    def degree(self) -> int:
        return self.matrix.shape[0]


def normalized_norm2(a: np.ndarray) -> float:
    """Normalized Frobenius norm: sqrt((1/d) sum |a_ij|^2)."""
    d = a.shape[0]
    return float(np.linalg.norm(a) / np.sqrt(d))


def linearize(sigma: SoficMap, alpha: GroupRingElement) -> MatrixImage:
    """sum_g alpha_g (permutation matrix of sigma(g)), assembled sparsely.

    Every support element must evaluate within sigma's word cap.  Output
    dtype is real when all coefficients are real.
    """
    if alpha.group != sigma.group:
        raise StructuralError("ring element and sofic map live over different groups")
    d = sigma.degree
    real = alpha.is_real()
    mat = np.zeros((d, d), dtype=np.float64 if real else np.complex128)
    cols = np.arange(d)
    for g, c in alpha.items():
        img = sigma.evaluate(g).images
        mat[img, cols] += c.real if real else c
    return MatrixImage(mat, sofic=sigma, alpha=alpha)


def realify(sigma: SoficMap, alpha: GroupRingElement) -> MatrixImage:
    """Real matrix image (linearize averaged with its entrywise conjugate).

    Requires real coefficients (tolerance 1e-12 relative to the largest
    coefficient, so closed-form constructions carrying roundoff-size
    imaginary parts are accepted).  Permutation matrices are real, so for
    real alpha this equals linearize exactly.
    """
    scale = max([1.0] + [abs(c) for _, c in alpha.items()])
    if not alpha.is_real(tol=REALIFY_IMAG_TOL * scale):
        raise StructuralError("realify needs real coefficients")
    img = linearize(sigma, alpha)
    real_mat = np.ascontiguousarray((img.matrix + np.conjugate(img.matrix)).real / 2.0)
    return MatrixImage(real_mat, sofic=sigma, alpha=alpha)


@dataclass
class MatrixNorms:
    norm2: float
    op_norm: float


def matrix_norms(m: MatrixImage | np.ndarray) -> MatrixNorms:
    """Normalized 2-norm and operator norm.

    The operator norm comes from a symmetric eigensolve of M* M up to
    degree 2000 and from an iterative SVD (relative tolerance 1e-8) above.
    """
    a = m.matrix if isinstance(m, MatrixImage) else np.asarray(m)
    d = a.shape[0]
    if d <= DENSE_EIGEN_MAX:
        w = np.linalg.eigvalsh(a.conj().T @ a)
        op = float(np.sqrt(max(float(w[-1]), 0.0)))
    else:
        v0 = np.cos(np.arange(min(a.shape), dtype=np.float64))
        s = scipy.sparse.linalg.svds(a, k=1, which="LM", v0=v0, tol=ITERATIVE_TOL,
                                     return_singular_vectors=False)
        op = float(s[0])
    return MatrixNorms(norm2=normalized_norm2(a), op_norm=op)


@dataclass
class EmbeddingDefect:
    """How far sigma is from a trace-preserving *-homomorphism on one polynomial.

    poly_defect: ||P(sigma(a_1)..) - sigma(P(a_1..))||_2
    trace_defect: |tr sigma(P(a_1..)) - tau(P(a_1..))|
    norm2_drift: | ||P(sigma(a_1)..)||_2 - ||P(a_1..)||_2 |
    """

    poly_defect: float
    trace_defect: float
    norm2_drift: float


def embedding_defect(sigma: SoficMap, args: list[GroupRingElement],
                     poly: StarPolynomial,
                     images: list[np.ndarray] | None = None) -> EmbeddingDefect:
    """Evaluate poly both in the matrix algebra and in the group ring and
    compare the results.

    images, when given, replaces linearize(sigma, a) for each argument;
    that is how perturbation experiments inject noisy matrix images while
    keeping the ring-side reference fixed.
    """
    if poly.arity() > len(args):
        raise StructuralError(
            f"polynomial uses {poly.arity()} slots but got {len(args)} arguments")
    if images is None:
        images = [linearize(sigma, a).matrix for a in args]
    elif len(images) != len(args):
        raise StructuralError("images and args must align")
    p_mat = poly.evaluate(images)
    p_ring = poly.evaluate(args)
    sigma_p = linearize(sigma, p_ring).matrix
    d = sigma.degree
    poly_defect = normalized_norm2(p_mat - sigma_p)
    trace_defect = abs(np.trace(sigma_p) / d - ring_trace(p_ring))
    norm2_drift = abs(normalized_norm2(p_mat) - ring_norm2(p_ring))
    return EmbeddingDefect(float(poly_defect), float(trace_defect), float(norm2_drift))


@dataclass
class RoundedProjection:
    """An exact projection produced by windowed functional calculus.

    certificate is ||p - B||_2^2 for B = M^T M; certificate_bound is
    16 ||B - B^2||_2^2; holds records the inequality as computed.
    endpoint_warning flags eigenvalues within 1e-9 of the window edges,
    where the indicator's discontinuity makes the rounding ill-conditioned.
    """

    projection: np.ndarray
    certificate: float
    certificate_bound: float
    holds: bool
    endpoint_warning: bool
    rank: int

    @property
    def normalized_trace(self) -> float:
        return self.rank / self.projection.shape[0]


def spectral_round(m: MatrixImage | np.ndarray) -> RoundedProjection:
    """Round an approximate projection: p = chi_[1/2,3/2](M^T M).

    Eigendecomposes B = M^T M, keeps the eigenspaces with eigenvalue in
    the window, and reports the rounding distance together with its
    certificate bound.  M must be real and square.
    """
    a = m.matrix if isinstance(m, MatrixImage) else np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructuralError("spectral_round needs a square matrix")
    if np.iscomplexobj(a):
        if np.max(np.abs(a.imag)) != 0.0:
            raise StructuralError("spectral_round needs a real matrix")
        a = a.real
    b = a.T @ a
    try:
        w, v = np.linalg.eigh(b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolve failed in spectral_round: {exc}") from exc
    lo, hi = ROUND_WINDOW
    mask = (w >= lo) & (w <= hi)
    kept = v[:, mask]
    p = kept @ kept.T
    d = a.shape[0]
    chi = mask.astype(np.float64)
    certificate = float(np.mean((chi - w) ** 2))
    bound = float(16.0 * np.mean((w - w * w) ** 2))
    endpoint = bool(np.any(np.abs(w - lo) < ENDPOINT_WARN_TOL)
                    or np.any(np.abs(w - hi) < ENDPOINT_WARN_TOL))
    idem = normalized_norm2(p @ p - p)
    sym = normalized_norm2(p - p.T)
    if idem > PROJECTION_TOL or sym > PROJECTION_TOL:
        raise NumericalError(
            f"rounded projection fails idempotency/symmetry: {idem:g}, {sym:g}")
    return RoundedProjection(
        projection=p,
        certificate=certificate,
        certificate_bound=bound,
        holds=bool(certificate <= bound),
        endpoint_warning=endpoint,
        rank=int(np.count_nonzero(mask)),
    )
