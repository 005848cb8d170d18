"""Noncommutative harmonic analysis over finite groups.

Everything runs inside the left regular representation, where the Fourier
algebra collapses to a matrix algebra: positive definite functions are
coefficient functions, the algebra norm of phi_x is the normalized trace
of |lambda(x)|, and the Powers-Stormer inequality and the realization of
cyclic representations become exactly checkable statements about small
matrices.

Norm care: the l2(Gamma) norm of x delta_e equals the normalized
Frobenius norm of lambda(x) (each column of lambda(x) is a permuted copy
of the coefficient vector), so lhs and rhs of the Powers-Stormer check
are on the same scale by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, StructuralError
from .groups import FiniteTable
from .ring import GroupRingElement, left_regular_matrix, ring_star

PSD_CLAMP_REL = 1e-9
HERMITIAN_TOL = 1e-9
PS_SLACK = 1e-9
REALIZE_TOL = 1e-8


class PositiveDefiniteFunction:
    """phi: Gamma -> C with positive semidefinite gram [phi(h^-1 g)]_{g,h}."""

    def __init__(self, group: FiniteTable, values):
        if not isinstance(group, FiniteTable):
            raise StructuralError("positive definite functions need a finite group")
        vals = np.asarray(values, dtype=np.complex128).ravel()
        if vals.shape != (group.n,):
            raise StructuralError("need one value per group element")
        e = group.identity_index
        scale = max(1.0, float(np.max(np.abs(vals))))
        if abs(vals[e].imag) > 1e-12 * scale:
            raise StructuralError("phi(e) must be real")
        self.group = group
        self.values = vals
        gram = self.gram_matrix()
        if np.linalg.norm(gram - gram.conj().T) > HERMITIAN_TOL * group.n * scale:
            raise StructuralError("gram matrix is not Hermitian (phi(g^-1) != conj phi(g))")
        w = np.linalg.eigvalsh((gram + gram.conj().T) / 2.0)
        if w[0] < -PSD_CLAMP_REL * max(1.0, float(w[-1])):
            raise StructuralError("phi is not positive definite")

    def gram_matrix(self) -> np.ndarray:
        """G[g, h] = phi(h^-1 g)."""
        tbl = self.group.table
        inv = self.group.inverse_table
        return self.values[tbl[np.ix_(inv, np.arange(self.group.n))]].T

    def value(self, index: int) -> complex:
        return complex(self.values[index])

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values.imag)) <= tol * max(1.0, np.max(np.abs(self.values))))

    @classmethod
    def from_vector(cls, group: FiniteTable, xi) -> "PositiveDefiniteFunction":
        """The coefficient function phi(g) = <lambda(g) xi, xi>."""
        xi = np.asarray(xi, dtype=np.complex128).ravel()
        if xi.shape != (group.n,):
            raise StructuralError("vector length must equal the group order")
        inv = group.inverse_table
        vals = np.empty(group.n, dtype=np.complex128)
        for g in range(group.n):
            shifted = xi[group.table[inv[g]]]  # (lambda(g) xi)(h) = xi(g^-1 h)
            vals[g] = np.sum(shifted * np.conjugate(xi))
        return cls(group, vals)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Square root of a positive semidefinite matrix by eigendecomposition.

    Input must be Hermitian; eigenvalues below -1e-9 * ||A||_inf raise,
    smaller negatives (numerical PSD drift) are clamped to zero.  Real
    input gives real output.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StructuralError("psd_sqrt needs a square matrix")
    herm_gap = np.linalg.norm(a - a.conj().T)
    if herm_gap > HERMITIAN_TOL * (1.0 + np.linalg.norm(a)):
        raise StructuralError("psd_sqrt needs a Hermitian matrix")
    sym = (a + a.conj().T) / 2.0
    w, v = np.linalg.eigh(sym)
    clamp = PSD_CLAMP_REL * max(1.0, float(np.max(np.abs(w))))
    if w[0] < -clamp:
        raise NumericalError(f"matrix is not positive semidefinite (min eigenvalue {w[0]:g})")
    w = np.maximum(w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_abs(x: GroupRingElement) -> float:
    """tau(|x|): normalized trace of the absolute value of lambda(x)."""
    m = left_regular_matrix(x)
    w = np.linalg.eigvalsh(m.conj().T @ m)
    return float(np.sum(np.sqrt(np.maximum(w, 0.0)))) / x.group.n


@dataclass
class PowersStormerResult:
    lhs: float
    rhs: float
    holds: bool


def powers_stormer_check(y: GroupRingElement, z: GroupRingElement) -> PowersStormerResult:
    """||(y^(1/2) - z^(1/2)) delta_e||_2^2 against tau(|y - z|).

    Both inputs must have positive semidefinite regular representations.
    holds allows 1e-9 of slack for the eigensolves on both sides.
    """
    if y.group != z.group:
        raise StructuralError("both elements must live over the same group")
    group = y.group
    if not isinstance(group, FiniteTable):
        raise StructuralError("Powers-Stormer check needs a finite group")
    by = psd_sqrt(left_regular_matrix(y))
    bz = psd_sqrt(left_regular_matrix(z))
    e = group.identity_index
    dcol = by[:, e] - bz[:, e]
    lhs = float(np.sum(np.abs(dcol) ** 2))
    rhs = trace_abs(y - z)
    return PowersStormerResult(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs + PS_SLACK))


def conjugation_C(alpha: GroupRingElement) -> GroupRingElement:
    """Coefficientwise complex conjugation (the conjugation operator C)."""
    return GroupRingElement(alpha.group, {g: c.conjugate() for g, c in alpha.items()})


def realize_cyclic(phi: PositiveDefiniteFunction) -> np.ndarray:
    """A real vector zeta with <lambda(g) zeta, zeta> = phi(g) for all g.

    Construction: x = sum_h phi(h^-1) delta_h (so tau(x lambda(g)) = phi(g)),
    symmetrized through C, then zeta is the identity column of the matrix
    square root of lambda(y).  The reproducing identity is verified to
    1e-8 before returning.
    """
    group = phi.group
    if not phi.is_real():
        raise StructuralError("realize_cyclic needs a real-valued function")
    coeffs = {
        group.element(h): complex(phi.values[group.inverse_table[h]].real)
        for h in range(group.n)
    }
    x = GroupRingElement(group, coeffs)
    y = (x + conjugation_C(x)) * 0.5
    b = psd_sqrt(left_regular_matrix(y))
    zeta = np.ascontiguousarray(b[:, group.identity_index].real)
    worst = 0.0
    for g in range(group.n):
        shifted = zeta[group.table[group.inverse_table[g]]]
        worst = max(worst, abs(float(shifted @ zeta) - phi.values[g].real))
    if worst > REALIZE_TOL:
        raise NumericalError(f"cyclic realization error {worst:g} exceeds 1e-8")
    return zeta


def random_positive_element(group: FiniteTable, rng: np.random.Generator) -> GroupRingElement:
    """a* a for a with iid complex Gaussian coefficients on all of Gamma.

    The regular representation of the result is positive semidefinite by
    construction, which makes this the natural test-pair generator for the
    Powers-Stormer property checks.
    """
    re = rng.standard_normal(group.n)
    im = rng.standard_normal(group.n)
    a = GroupRingElement(group, {
        group.element(i): complex(re[i], im[i]) for i in range(group.n)
    })
    return ring_star(a) * a
