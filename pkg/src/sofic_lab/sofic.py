"""Sofic maps: assignments of degree-d permutations to group elements.

FiniteTable groups use the left regular action and ZPow groups use
translation on the quotient grid (Z/m)^k, so both are exact homomorphisms
and all defects vanish.  Free groups extend independent uniformly random
generator permutations homomorphically over reduced words; the extension
is multiplicative by construction, so any failure of soficity shows up
in the freeness defects alone.

Composition convention: permutations act on the left, (pq)(k) = p(q(k)),
and sigma(gh) = sigma(g) sigma(h) under that composition.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .errors import StructuralError
from .groups import FiniteTable, FreeGroup, GroupElement, GroupSpec, ZPow, words_up_to

DENSE_EIGEN_MAX = 2000
ITERATIVE_TOL = 1e-8


class Permutation:
    """A permutation of [0, d), stored as its image array."""

    __slots__ = ("images",)

    def __init__(self, images):
        arr = np.asarray(images, dtype=np.int64)
        if arr.ndim != 1:
            raise StructuralError("permutation images must be one-dimensional")
        d = arr.shape[0]
        counts = np.bincount(arr, minlength=d) if d else np.zeros(0, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= d or counts.max() > 1):
            raise StructuralError("images do not describe a bijection of [0, d)")
        arr.setflags(write=False)
        self.images = arr

    @classmethod
    def identity(cls, d: int) -> "Permutation":
        return cls(np.arange(d, dtype=np.int64))

    @property
    def degree(self) -> int:
        return self.images.shape[0]

    def __call__(self, k: int) -> int:
        return int(self.images[k])

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self . other)(k) = self(other(k))."""
        if other.degree != self.degree:
            raise StructuralError("cannot compose permutations of different degrees")
        return Permutation(self.images[other.images])

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.images)
        inv[self.images] = np.arange(self.degree, dtype=np.int64)
        return Permutation(inv)

    def fixed_point_count(self) -> int:
        return int(np.count_nonzero(self.images == np.arange(self.degree)))

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.images, np.arange(self.degree)))

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return np.array_equal(self.images, other.images)

    def __repr__(self):
        return f"Permutation(d={self.degree})"


class SoficMap:
    """A degree-d permutation assignment for one of the supported families.

    Build through build_sofic.  Evaluation is memoized per canonical
    element behind a lock; everything else is immutable, so instances are
    safe to share across threads.
    """

    def __init__(self, group: GroupSpec, degree: int, word_cap: int = 8,
                 seed: int | None = None,
                 letter_images: dict[int, Permutation] | None = None,
                 overrides: dict[GroupElement, Permutation] | None = None):
        self.group = group
        self.degree = int(degree)
        self.word_cap = int(word_cap)
        self.seed = seed
        self._letter_images = dict(letter_images or {})
        self._overrides = dict(overrides or {})
        self._memo: dict[GroupElement, Permutation] = {}
        self._lock = threading.Lock()
        if isinstance(group, ZPow):
            self.modulus = _infer_modulus(degree, group.dim)
            self._shape = (self.modulus,) * group.dim
        elif isinstance(group, FiniteTable):
            if degree != group.n:
                raise StructuralError("FiniteTable sofic maps use the regular action, degree must equal |G|")
            self.modulus = None
        elif isinstance(group, FreeGroup):
            if degree < 1:
                raise StructuralError("degree must be at least 1")
            for i in range(1, group.rank + 1):
                if i not in self._letter_images:
                    raise StructuralError(f"missing image for generator {i}")
            self.modulus = None
        else:
            raise StructuralError(f"unsupported group family {group.kind!r}")

    @property
    def generator_images(self) -> dict[GroupElement, Permutation]:
        return {g: self.evaluate(g) for g in self.group.generators()}

    def with_override(self, g: GroupElement, perm: Permutation) -> "SoficMap":
        """A copy of this map with sigma(g) replaced by an explicit permutation.

        Deliberately breaks the homomorphism property; useful for probing
        how the defect functionals respond to planted violations.
        """
        if perm.degree != self.degree:
            raise StructuralError("override degree mismatch")
        overrides = dict(self._overrides)
        overrides[g] = perm
        return SoficMap(self.group, self.degree, word_cap=self.word_cap, seed=self.seed,
                        letter_images=self._letter_images, overrides=overrides)

    def evaluate(self, g: GroupElement) -> Permutation:
        if g.group != self.group:
            raise StructuralError("element does not belong to this map's group")
        if g in self._overrides:
            return self._overrides[g]
        with self._lock:
            hit = self._memo.get(g)
        if hit is not None:
            return hit
        perm = self._evaluate_fresh(g)
        with self._lock:
            self._memo[g] = perm
        return perm

    def _evaluate_fresh(self, g: GroupElement) -> Permutation:
        group = self.group
        if isinstance(group, FiniteTable):
            return Permutation(group.table[g.key])
        if isinstance(group, ZPow):
            coords = np.indices(self._shape).reshape(group.dim, -1)
            shifted = (coords + np.asarray(g.key, dtype=np.int64)[:, None]) % self.modulus
            return Permutation(np.ravel_multi_index(shifted, self._shape))
        word = g.key
        if len(word) > self.word_cap:
            raise StructuralError(
                f"word length {len(word)} exceeds cap {self.word_cap}")
        acc = np.arange(self.degree, dtype=np.int64)
        for s in word:
            base = self._letter_images[abs(s)]
            img = base.images if s > 0 else base.inverse().images
            acc = acc[img]
        return Permutation(acc)


def _infer_modulus(degree: int, dim: int) -> int:
    m = round(degree ** (1.0 / dim))
    for candidate in (m - 1, m, m + 1):
        if candidate >= 1 and candidate**dim == degree:
            return candidate
    raise StructuralError(f"degree {degree} is not a perfect {dim}-th power")


def build_sofic(spec: GroupSpec, degree: int, seed: int | None = None,
                word_cap: int = 8) -> SoficMap:
    """Construct the family's sofic map at the given degree.

    FiniteTable: regular action, degree must equal |G|.  ZPow: translation
    on (Z/m)^k with m inferred from degree = m^k.  Free: homomorphic
    extension of independent uniform generator permutations drawn from a
    Philox stream keyed by seed (a fresh recorded seed if none is given).
    """
    if isinstance(spec, FreeGroup):
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (2**63))
        rng = np.random.Generator(np.random.Philox(seed))
        letters = {
            i: Permutation(rng.permutation(degree))
            for i in range(1, spec.rank + 1)
        }
        return SoficMap(spec, degree, word_cap=word_cap, seed=seed, letter_images=letters)
    return SoficMap(spec, degree, word_cap=word_cap, seed=seed)


def evaluate(sigma: SoficMap, g: GroupElement) -> Permutation:
    """sigma(g) as a Permutation (memoized homomorphic evaluation)."""
    return sigma.evaluate(g)


def multiplicativity_defect(sigma: SoficMap, g: GroupElement, h: GroupElement) -> float:
    """Fraction of points where sigma(g)sigma(h) and sigma(gh) disagree."""
    pg = sigma.evaluate(g)
    ph = sigma.evaluate(h)
    pgh = sigma.evaluate(g * h)
    mism = np.count_nonzero(pg.images[ph.images] != pgh.images)
    return mism / sigma.degree


def freeness_defect(sigma: SoficMap, g: GroupElement, h: GroupElement) -> float:
    """Fraction of points where sigma(g) and sigma(h) agree (0 is perfect).

    Requires g != h; the diagonal fraction is identically 1 and would only
    pollute averages.
    """
    if g == h:
        raise StructuralError("freeness defect is defined for distinct elements")
    pg = sigma.evaluate(g)
    ph = sigma.evaluate(h)
    return np.count_nonzero(pg.images == ph.images) / sigma.degree


@dataclass
class DefectReport:
    """Per-pair defect fractions over a word list, plus the cap they used."""

    multiplicativity: dict[tuple[GroupElement, GroupElement], float]
    freeness: dict[tuple[GroupElement, GroupElement], float]
    word_length_cap: int

    def max_multiplicativity(self) -> float:
        return max(self.multiplicativity.values(), default=0.0)

    def max_freeness(self) -> float:
        return max(self.freeness.values(), default=0.0)

    def mean_freeness(self) -> float:
        vals = list(self.freeness.values())
        return sum(vals) / len(vals) if vals else 0.0


def defect_report(sigma: SoficMap, max_word_length: int,
                  gens=None) -> DefectReport:
    """Defects over all ordered pairs of words of length <= max_word_length."""
    words = words_up_to(sigma.group, max_word_length, gens)
    mult: dict[tuple[GroupElement, GroupElement], float] = {}
    free: dict[tuple[GroupElement, GroupElement], float] = {}
    for g in words:
        for h in words:
            mult[(g, h)] = multiplicativity_defect(sigma, g, h)
            if g != h:
                free[(g, h)] = freeness_defect(sigma, g, h)
    return DefectReport(mult, free, max_word_length)


# ---------------------------------------------------------------------------
# Ergodicity diagnostics


def transition_matrix(sigma: SoficMap, gens: list[GroupElement]) -> np.ndarray:
    """Dense symmetrized transition operator (1/2|S|) sum_g (P_g + P_g^T)."""
    if not gens:
        raise StructuralError("need at least one generator")
    d = sigma.degree
    a = np.zeros((d, d))
    w = 1.0 / (2 * len(gens))
    cols = np.arange(d)
    for g in gens:
        img = sigma.evaluate(g).images
        a[img, cols] += w
        a[cols, img] += w
    return a


def spectral_gap(sigma: SoficMap, gens: list[GroupElement]) -> float:
    """1 - lambda_2, with lambda_2 the largest absolute eigenvalue of the
    symmetrized transition operator restricted to the mean-zero subspace.

    Dense symmetric eigensolve up to degree 2000; deflated Lanczos
    iteration (tolerance 1e-8) above.  Degree 1 has no mean-zero subspace
    and returns 1.0 by convention.
    """
    if not gens:
        raise StructuralError("need at least one generator")
    d = sigma.degree
    if d == 1:
        return 1.0
    lam2 = _lambda2(sigma, gens)
    # lambda_2 <= 1 analytically; anything past 1 is eigensolve roundoff
    return max(0.0, 1.0 - lam2)


def _lambda2(sigma: SoficMap, gens: list[GroupElement]) -> float:
    d = sigma.degree
    if d <= DENSE_EIGEN_MAX:
        a = transition_matrix(sigma, gens) - 1.0 / d
        eigs = np.linalg.eigvalsh(a)
        return float(max(abs(eigs[0]), abs(eigs[-1])))
    perms = [sigma.evaluate(g) for g in gens]
    pairs = [(p.images, p.inverse().images) for p in perms]
    w = 1.0 / (2 * len(pairs))

    def matvec(v):
        v = v - v.mean()
        out = np.zeros_like(v)
        for img, inv in pairs:
            out += v[inv]  # P v
            out += v[img]  # P^T v
        out *= w
        return out - out.mean()

    op = scipy.sparse.linalg.LinearOperator((d, d), matvec=matvec, dtype=np.float64)
    v0 = np.cos(np.arange(d, dtype=np.float64))
    v0 -= v0.mean()
    vals = scipy.sparse.linalg.eigsh(
        op, k=1, which="LM", v0=v0, tol=ITERATIVE_TOL, return_eigenvectors=False)
    return float(abs(vals[0]))


def _cut_vectors(sigma: SoficMap, gens: list[GroupElement]) -> list[np.ndarray]:
    """Eigenvectors worth cutting: largest-absolute and largest-signed
    mean-zero eigenvalue directions of the transition operator."""
    d = sigma.degree
    if d <= DENSE_EIGEN_MAX:
        a = transition_matrix(sigma, gens) - 1.0 / d
        eigs, vecs = np.linalg.eigh(a)
        top_signed = vecs[:, -1]
        top_abs = vecs[:, 0] if abs(eigs[0]) > abs(eigs[-1]) else vecs[:, -1]
        return [top_abs, top_signed]
    perms = [sigma.evaluate(g) for g in gens]
    pairs = [(p.images, p.inverse().images) for p in perms]
    w = 1.0 / (2 * len(pairs))

    def matvec(v):
        v = v - v.mean()
        out = np.zeros_like(v)
        for img, inv in pairs:
            out += v[inv] + v[img]
        out *= w
        return out - out.mean()

    op = scipy.sparse.linalg.LinearOperator((d, d), matvec=matvec, dtype=np.float64)
    v0 = np.cos(np.arange(d, dtype=np.float64))
    v0 -= v0.mean()
    _, vecs = scipy.sparse.linalg.eigsh(op, k=2, which="BE", v0=v0, tol=ITERATIVE_TOL)
    return [vecs[:, 0], vecs[:, -1]]


@dataclass
class ObstructionReport:
    """Outcome of the approximately-invariant-set search."""

    best_invariance_defect: float
    balance: float
    candidates_checked: int


def invariant_set_obstruction(sigma: SoficMap, gens: list[GroupElement],
                              trials: int, seed: int | None = None) -> ObstructionReport:
    """Search for near-balanced approximately invariant subsets.

    Candidates are all subsets when 2^d is small, otherwise random coin
    subsets plus sign and median cuts of the transition operator's extremal
    mean-zero eigenvectors, plus the deterministic half set.  Among
    candidates with balance in [0.25, 0.75] the report carries the minimal
    value of max_g u(A triangle sigma(g)A) and the balance achieving it.
    A small reported defect witnesses an approximately invariant balanced
    set; a large one is evidence of ergodicity at this degree.
    """
    if not gens:
        raise StructuralError("need at least one generator")
    d = sigma.degree
    if d < 2:
        raise StructuralError("obstruction search needs degree >= 2")

    blocks = [np.zeros((1, d), dtype=bool)]
    blocks[0][0, : (d + 1) // 2] = True  # deterministic half set
    if d <= 12:
        masks = (np.arange(2**d)[:, None] >> np.arange(d)[None, :]) & 1
        blocks.append(masks.astype(bool))
    else:
        if trials > 0:
            rng = np.random.Generator(np.random.Philox(seed if seed is not None else 0))
            blocks.append(rng.integers(0, 2, size=(trials, d)).astype(bool))
        for vec in _cut_vectors(sigma, gens):
            blocks.append(np.stack([vec > 0, vec >= np.median(vec)]))
    cands = np.concatenate(blocks, axis=0)

    balance = cands.mean(axis=1)
    near = (balance >= 0.25) & (balance <= 0.75)
    worst = np.zeros(cands.shape[0])
    for g in gens:
        inv = sigma.evaluate(g).inverse().images
        disagree = (cands != cands[:, inv]).mean(axis=1)
        np.maximum(worst, disagree, out=worst)
    near_idx = np.nonzero(near)[0]
    best_local = int(np.argmin(worst[near_idx]))
    best = near_idx[best_local]
    return ObstructionReport(
        best_invariance_defect=float(worst[best]),
        balance=float(balance[best]),
        candidates_checked=int(cands.shape[0]),
    )
