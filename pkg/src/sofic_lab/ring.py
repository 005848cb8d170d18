"""The group ring C(Gamma): finitely supported complex functions on a group.

Coefficients are double-precision complex.  Only literal zeros are pruned
from supports; there is no epsilon truncation, so numerical drift stays
visible instead of being silently rounded away.

Also defines star polynomials, small expression trees over +, product,
scalar multiple, and the star involution.  The same tree evaluates in the
group ring and in a matrix algebra, which is what the embedding-defect
measurements compare.
"""

from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .errors import StructuralError
from .groups import FiniteTable, GroupElement, GroupSpec, element_from_json, element_to_json


class GroupRingElement:
    """A finite formal sum of group elements with complex coefficients."""

    __slots__ = ("group", "_coeffs")

    def __init__(self, group: GroupSpec, coeffs: Mapping[GroupElement, complex]):
        self.group = group
        cleaned: dict[GroupElement, complex] = {}
        for g, c in coeffs.items():
            if g.group != group:
                raise StructuralError("coefficient keyed by an element of a different group")
            c = complex(c)
            if c != 0:
                cleaned[g] = c
        self._coeffs = cleaned

    # -- access ---------------------------------------------------------------

    @property
    def support(self) -> tuple[GroupElement, ...]:
        return tuple(self._coeffs)

    def coefficient(self, g: GroupElement) -> complex:
        return self._coeffs.get(g, 0j)

    def items(self):
        return self._coeffs.items()

    def __len__(self):
        return len(self._coeffs)

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.group == other.group and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.group, frozenset(self._coeffs.items())))

    def __repr__(self):
        terms = ", ".join(f"{c:g}*{g!r}" for g, c in self._coeffs.items())
        return f"GroupRingElement({terms or '0'})"

    def is_real(self, tol: float = 0.0) -> bool:
        """True when every coefficient's imaginary part is within tol of zero."""
        return all(abs(c.imag) <= tol for c in self._coeffs.values())

    def abs_coefficient_sum(self) -> float:
        """The l1 norm of the coefficient vector, an operator-norm bound."""
        return sum(abs(c) for c in self._coeffs.values())

    # -- algebra --------------------------------------------------------------

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        if self.group != other.group:
            raise StructuralError("cannot add elements over different groups")
        out = dict(self._coeffs)
        for g, c in other._coeffs.items():
            out[g] = out.get(g, 0j) + c
        return GroupRingElement(self.group, out)

    def __neg__(self):
        return GroupRingElement(self.group, {g: -c for g, c in self._coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, GroupRingElement):
            return ring_convolve(self, other)
        if isinstance(other, (int, float, complex)):
            return GroupRingElement(self.group, {g: c * other for g, c in self._coeffs.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented


def delta(g: GroupElement, coeff: complex = 1.0) -> GroupRingElement:
    """The single-term element coeff * g."""
    return GroupRingElement(g.group, {g: coeff})


def zero_element(group: GroupSpec) -> GroupRingElement:
    return GroupRingElement(group, {})


def ring_convolve(alpha: GroupRingElement, beta: GroupRingElement) -> GroupRingElement:
    """Product in the group ring: (alpha beta)_g = sum_h alpha_h beta_{h^-1 g}.

    Computed support-to-support, accumulating alpha_h beta_k at the product
    hk, which is the same sum reindexed.
    """
    if alpha.group != beta.group:
        raise StructuralError("cannot convolve elements over different groups")
    out: dict[GroupElement, complex] = {}
    for h, a in alpha.items():
        for k, b in beta.items():
            g = h * k
            out[g] = out.get(g, 0j) + a * b
    return GroupRingElement(alpha.group, out)


def ring_star(alpha: GroupRingElement) -> GroupRingElement:
    """The star involution: coefficient at g becomes conj(alpha_{g^-1})."""
    return GroupRingElement(
        alpha.group, {g.inverse(): c.conjugate() for g, c in alpha.items()}
    )


def ring_trace(alpha: GroupRingElement) -> complex:
    """tau(alpha) = coefficient at the identity."""
    return alpha.coefficient(alpha.group.identity)


def ring_norm2(alpha: GroupRingElement) -> float:
    """The 2-norm tau(alpha* alpha)^(1/2) = l2 norm of the coefficient vector."""
    return math.sqrt(sum(abs(c) ** 2 for _, c in alpha.items()))


def left_regular_matrix(alpha: GroupRingElement) -> np.ndarray:
    """Matrix of the left regular representation of alpha over a finite group.

    Entry (i, j) is alpha(g_i g_j^-1), in the delta basis indexed by table
    order.  Returns a float array when all coefficients are real, complex
    otherwise.  The normalized trace of the result equals ring_trace(alpha).
    """
    group = alpha.group
    if not isinstance(group, FiniteTable):
        raise StructuralError("left_regular_matrix needs a finite table group")
    n = group.n
    real = alpha.is_real()
    mat = np.zeros((n, n), dtype=np.float64 if real else np.complex128)
    cols = np.arange(n)
    for g, c in alpha.items():
        rows = group.table[g.key]  # rows[j] = index of g * g_j
        mat[rows, cols] += c.real if real else c
    return mat


# ---------------------------------------------------------------------------
# Star polynomials


def _alg_mul(u, v):
    if isinstance(u, GroupRingElement):
        return ring_convolve(u, v)
    return u @ v


def _alg_star(u):
    if isinstance(u, GroupRingElement):
        return ring_star(u)
    return np.conjugate(u).T


class StarPolynomial:
    """Expression tree over slots X_1..X_n, +, product, scalar, star."""

    def evaluate(self, args: Sequence):
        """Evaluate over group-ring or matrix arguments (all of one kind)."""
        raise NotImplementedError

    def arity(self) -> int:
        raise NotImplementedError

    def degree(self) -> int:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class Slot(StarPolynomial):
    def __init__(self, index: int):
        if index < 0:
            raise StructuralError("slot index must be nonnegative")
        self.index = index

    def evaluate(self, args):
        if self.index >= len(args):
            raise StructuralError(f"polynomial slot {self.index} but only {len(args)} arguments")
        return args[self.index]

    def arity(self):
        return self.index + 1

    def degree(self):
        return 1

    def to_json(self):
        return {"op": "slot", "index": self.index}


class Star(StarPolynomial):
    def __init__(self, inner: StarPolynomial):
        self.inner = inner

    def evaluate(self, args):
        return _alg_star(self.inner.evaluate(args))

    def arity(self):
        return self.inner.arity()

    def degree(self):
        return self.inner.degree()

    def to_json(self):
        return {"op": "star", "of": self.inner.to_json()}


class Scaled(StarPolynomial):
    def __init__(self, scalar: complex, inner: StarPolynomial):
        self.scalar = complex(scalar)
        self.inner = inner

    def evaluate(self, args):
        return self.scalar * self.inner.evaluate(args)

    def arity(self):
        return self.inner.arity()

    def degree(self):
        return self.inner.degree()

    def to_json(self):
        return {"op": "scale", "re": self.scalar.real, "im": self.scalar.imag, "of": self.inner.to_json()}


class Sum(StarPolynomial):
    def __init__(self, terms: Sequence[StarPolynomial]):
        if not terms:
            raise StructuralError("empty sum")
        self.terms = tuple(terms)

    def evaluate(self, args):
        acc = self.terms[0].evaluate(args)
        for t in self.terms[1:]:
            acc = acc + t.evaluate(args)
        return acc

    def arity(self):
        return max(t.arity() for t in self.terms)

    def degree(self):
        return max(t.degree() for t in self.terms)

    def to_json(self):
        return {"op": "add", "terms": [t.to_json() for t in self.terms]}


class Product(StarPolynomial):
    def __init__(self, factors: Sequence[StarPolynomial]):
        if not factors:
            raise StructuralError("empty product")
        self.factors = tuple(factors)

    def evaluate(self, args):
        acc = self.factors[0].evaluate(args)
        for f in self.factors[1:]:
            acc = _alg_mul(acc, f.evaluate(args))
        return acc

    def arity(self):
        return max(f.arity() for f in self.factors)

    def degree(self):
        return sum(f.degree() for f in self.factors)

    def to_json(self):
        return {"op": "mul", "factors": [f.to_json() for f in self.factors]}


def star_polynomial_from_json(obj: dict) -> StarPolynomial:
    """Parse an expression tree from its JSON form (see each node's to_json)."""
    if not isinstance(obj, dict) or "op" not in obj:
        raise StructuralError("polynomial node must be an object with an 'op' field")
    op = obj["op"]
    if op == "slot":
        index = obj.get("index")
        if not isinstance(index, int) or index < 0:
            raise StructuralError("slot node needs a nonnegative integer 'index'")
        return Slot(index)
    if op == "star":
        return Star(star_polynomial_from_json(obj.get("of")))
    if op == "scale":
        re = obj.get("re", 0.0)
        im = obj.get("im", 0.0)
        if not all(isinstance(v, (int, float)) for v in (re, im)):
            raise StructuralError("scale node needs numeric 're'/'im'")
        return Scaled(complex(re, im), star_polynomial_from_json(obj.get("of")))
    if op == "add":
        terms = obj.get("terms")
        if not isinstance(terms, list) or not terms:
            raise StructuralError("add node needs a nonempty 'terms' list")
        return Sum([star_polynomial_from_json(t) for t in terms])
    if op == "mul":
        factors = obj.get("factors")
        if not isinstance(factors, list) or not factors:
            raise StructuralError("mul node needs a nonempty 'factors' list")
        return Product([star_polynomial_from_json(f) for f in factors])
    raise StructuralError(f"unknown polynomial op {op!r}")


# ---------------------------------------------------------------------------
# JSON for ring elements


def ring_element_to_json(alpha: GroupRingElement) -> list[dict]:
    return [
        {"g": element_to_json(g), "re": c.real, "im": c.imag}
        for g, c in alpha.items()
    ]


def ring_element_from_json(spec: GroupSpec, obj) -> GroupRingElement:
    if not isinstance(obj, list):
        raise StructuralError("ring element must be a list of term objects")
    coeffs: dict[GroupElement, complex] = {}
    for term in obj:
        if not isinstance(term, dict) or "g" not in term:
            raise StructuralError("ring element term must be an object with a 'g' field")
        g = element_from_json(spec, term["g"])
        re = term.get("re", 0.0)
        im = term.get("im", 0.0)
        if not all(isinstance(v, (int, float)) for v in (re, im)):
            raise StructuralError("ring element coefficients must be numeric 're'/'im'")
        coeffs[g] = coeffs.get(g, 0j) + complex(re, im)
    return GroupRingElement(spec, coeffs)
