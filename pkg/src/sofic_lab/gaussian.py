"""Gaussian measures on projected coordinate subspaces and microstates.

The coordinate density is e^(-pi t^2), so each coordinate has variance
1/(2 pi).  Samples are drawn from a counter-based Philox stream keyed by
a recorded seed, and sampling is stateless: sample(n)[:m] equals
sample(m) draw for draw, which is what makes packing counts monotone in
the sample budget and CLI reruns byte-identical.

A microstate transports a sample vector x along a sofic map: row j of
the value table is g -> x[sigma(g)^{-1}(j)] over a finite window, with
coordinates outside the window read as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import StructuralError
from .groups import GroupElement, ZPow
from .ring import GroupRingElement, ring_convolve, ring_norm2
from .sofic import SoficMap

COORD_STD = 1.0 / math.sqrt(2.0 * math.pi)
PROJECTION_TOL = 1e-9


# ---------------------------------------------------------------------------
# Arc projections over Z


@dataclass(frozen=True)
class ArcProjectionSpec:
    """A union of circle arcs and a Fourier cutoff.

    Arcs are half-open subintervals [u, v) of [0, 1), pairwise disjoint.
    The truncated Fourier coefficients of the arc indicator supply a
    concrete approximate projection in the group ring of Z.
    """

    arcs: tuple[tuple[float, float], ...]
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 0:
            raise StructuralError("cutoff must be nonnegative")
        prev_end = 0.0
        for u, v in sorted(self.arcs):
            if not (0.0 <= u < v <= 1.0):
                raise StructuralError(f"arc [{u}, {v}) outside the circle")
            if u < prev_end:
                raise StructuralError("arcs must be pairwise disjoint")
            prev_end = v

    @property
    def measure(self) -> float:
        return sum(v - u for u, v in self.arcs)

    @classmethod
    def symmetric(cls, measure: float, cutoff: int) -> "ArcProjectionSpec":
        """The arc of given measure symmetric about 0 on the circle.

        Symmetric arcs have real Fourier coefficients, which is what makes
        the realified matrix pipeline applicable to them.
        """
        if not (0.0 <= measure <= 1.0):
            raise StructuralError("arc measure must lie in [0, 1]")
        if measure == 0.0:
            return cls((), cutoff)
        if measure == 1.0:
            return cls(((0.0, 1.0),), cutoff)
        half = measure / 2.0
        return cls(((0.0, half), (1.0 - half, 1.0)), cutoff)


def _interval_coeff(k: int, u: float, v: float) -> complex:
    """Integral of e^(-2 pi i k theta) over [u, v), in midpoint-phase form."""
    length = v - u
    x = k * length
    if x == round(x):
        base = length if x == 0 else 0.0
    else:
        base = length * np.sinc(x)
    return base * complex(np.exp(-1j * np.pi * k * (u + v)))


def arc_projection_coeffs(spec: ArcProjectionSpec) -> GroupRingElement:
    """Truncated Fourier coefficients of the arc indicator, over ZPow(1).

    Coefficient at k is the integral of e^(-2 pi i k theta) over the arcs,
    for |k| <= cutoff; the coefficient at 0 is the arc measure.  The
    Hermitian symmetry p_hat(k) = conj(p_hat(-k)) is enforced exactly by
    pairing +k with -k, so it survives roundoff.
    """
    group = ZPow(1)
    raw = {
        k: sum((_interval_coeff(k, u, v) for u, v in spec.arcs), 0j)
        for k in range(-spec.cutoff, spec.cutoff + 1)
    }
    coeffs: dict[GroupElement, complex] = {}
    for k, c in raw.items():
        sym = (c + raw[-k].conjugate()) / 2.0
        coeffs[group.element((k,))] = sym
    return GroupRingElement(group, coeffs)


# ---------------------------------------------------------------------------
# Characteristic targets


def gaussian_target(p_hat: GroupRingElement, t) -> float:
    """The characteristic functional exp(-pi ||t_check * p_hat||_2^2).

    t is a real frequency vector on a finite window, given either as a
    mapping {group element: value} or as a GroupRingElement with real
    coefficients; t_check is the corresponding ring element and * is ring
    convolution.  Always in (0, 1], and equal to 1 exactly when the
    convolution vanishes.
    """
    if isinstance(t, GroupRingElement):
        t_check = t
    elif isinstance(t, Mapping):
        t_check = GroupRingElement(p_hat.group, {g: complex(val) for g, val in t.items()})
    else:
        raise StructuralError("frequency must be a mapping or a GroupRingElement")
    if not t_check.is_real():
        raise StructuralError("frequency vectors are real-valued")
    if t_check.group != p_hat.group:
        raise StructuralError("frequency and projection live over different groups")
    return math.exp(-math.pi * ring_norm2(ring_convolve(t_check, p_hat)) ** 2)


@dataclass
class FourierTestFunction:
    """A finite Fourier sum f(x) = sum_k theta_k exp(2 pi i t_k . x).

    Frequencies t_k are real rows over a finite window of group elements;
    weights theta_k are complex.  |f| <= sum |theta_k| everywhere, so these
    are bounded continuous test functions with exactly computable Gaussian
    expectations.
    """

    window: tuple[GroupElement, ...]
    frequencies: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        freq = np.asarray(self.frequencies, dtype=np.float64)
        if freq.ndim != 2:
            freq = np.atleast_2d(freq)
        w = np.asarray(self.weights, dtype=np.complex128).ravel()
        if freq.shape[0] != w.shape[0]:
            raise StructuralError("one weight per frequency row required")
        if freq.shape[1] != len(self.window):
            raise StructuralError("frequency rows must match the window length")
        if len(set(self.window)) != len(self.window):
            raise StructuralError("window has repeated elements")
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "weights", w)

    @classmethod
    def single_frequency(cls, window: Sequence[GroupElement], t_row: Sequence[float],
                         weight: complex = 1.0) -> "FourierTestFunction":
        return cls(tuple(window), np.atleast_2d(np.asarray(t_row, dtype=np.float64)),
                   np.asarray([weight], dtype=np.complex128))

    def weight_bound(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def evaluate_rows(self, rows: np.ndarray) -> np.ndarray:
        """f applied to each row of a (m x |window|) array of window values."""
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        if rows.shape[1] != len(self.window):
            raise StructuralError("row width must match the window length")
        phases = rows @ self.frequencies.T
        return np.exp(2j * np.pi * phases) @ self.weights

    def __call__(self, values: Sequence[float]) -> complex:
        return complex(self.evaluate_rows(np.asarray(values, dtype=np.float64))[0])

    def analytic_target(self, p_hat: GroupRingElement) -> complex:
        """sum_k theta_k times the characteristic functional at t_k."""
        total = 0j
        for row, w in zip(self.frequencies, self.weights):
            t = {g: float(v) for g, v in zip(self.window, row)}
            total += w * gaussian_target(p_hat, t)
        return total


# ---------------------------------------------------------------------------
# Subspace Gaussian sampling


class GaussianSampler:
    """Gaussian measure on the range of a projection, coordinate density e^(-pi t^2).

    Sampling is stateless: each call rebuilds the Philox generator from
    the stored seed, so sample(n) extends sample(m) for m < n draw for
    draw.
    """

    generator_name = "philox"

    def __init__(self, projection: np.ndarray, seed: int):
        p = np.array(projection, dtype=np.float64)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise StructuralError("projection must be square")
        d = p.shape[0]
        scale = np.sqrt(d)
        if np.linalg.norm(p - p.T) / scale > PROJECTION_TOL:
            raise StructuralError("projection must be symmetric")
        if np.linalg.norm(p @ p - p) / scale > PROJECTION_TOL:
            raise StructuralError("projection must be idempotent to 1e-9")
        p.setflags(write=False)
        self.projection = p
        self.dimension = d
        self.seed = int(seed)
        self._is_identity = bool(np.array_equal(p, np.eye(d)))
        self._is_zero = not p.any()

    @classmethod
    def identity(cls, d: int, seed: int) -> "GaussianSampler":
        return cls(np.eye(d), seed)

    @classmethod
    def zero(cls, d: int, seed: int) -> "GaussianSampler":
        return cls(np.zeros((d, d)), seed)

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.projection))))

    def _rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.seed))

    def sample(self, n: int) -> np.ndarray:
        """n rows, each p.z with z of iid e^(-pi t^2) coordinates."""
        z = self._rng().standard_normal((n, self.dimension)) * COORD_STD
        if self._is_identity:
            return z
        if self._is_zero:
            return np.zeros_like(z)
        return z @ self.projection


def sample_subspace_gaussian(sampler: GaussianSampler, n: int) -> np.ndarray:
    """n subspace-Gaussian vectors as the rows of an (n x d) array."""
    return sampler.sample(n)


def characteristic_mean(sampler: GaussianSampler, v: np.ndarray, n: int,
                        chunk: int = 1 << 14) -> complex:
    """Monte-Carlo mean of exp(2 pi i <x, v>) over n samples, streamed.

    Uses <x, v> = <z, p v> so the d-dimensional samples are never
    materialized; the z stream is the same one sample(n) would consume,
    so this equals averaging over sample(n) up to summation order.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (sampler.dimension,):
        raise StructuralError("frequency vector has the wrong dimension")
    w = sampler.projection @ v
    rng = sampler._rng()
    total = 0j
    done = 0
    while done < n:
        m = min(chunk, n - done)
        z = rng.standard_normal((m, sampler.dimension)) * COORD_STD
        total += complex(np.exp(2j * np.pi * (z @ w)).sum())
        done += m
    return total / n


# ---------------------------------------------------------------------------
# Microstates


@dataclass
class Microstate:
    """Row j holds the window values of the j-th coordinate map.

    values[j, i] is phi(j)(window[i]); coordinates at group elements
    outside the window are implicitly 0.
    """

    window: tuple[GroupElement, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(self.window):
            raise StructuralError("values must be a (degree x window) array")
        if not np.all(np.isfinite(vals)):
            raise StructuralError("microstate values must be finite")
        if len(set(self.window)) != len(self.window):
            raise StructuralError("window has repeated elements")
        identity = self.window[0].group.identity if self.window else None
        if identity not in self.window:
            raise StructuralError("window must contain the identity")
        object.__setattr__(self, "values", vals)

    @property
    def degree(self) -> int:
        return self.values.shape[0]

    def column(self, g: GroupElement) -> np.ndarray:
        try:
            idx = self.window.index(g)
        except ValueError:
            raise StructuralError(f"{g!r} is outside this microstate's window") from None
        return self.values[:, idx]


def build_microstate(x: np.ndarray, window: Sequence[GroupElement],
                     sigma: SoficMap) -> Microstate:
    """The transported microstate phi(j)(g) = x[sigma(g)^{-1}(j)]."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (sigma.degree,):
        raise StructuralError("sample vector length must equal the sofic degree")
    window = tuple(window)
    cols = np.empty((sigma.degree, len(window)), dtype=np.float64)
    for i, g in enumerate(window):
        inv = sigma.evaluate(g).inverse().images
        cols[:, i] = x[inv]
    return Microstate(window, cols)


def empirical_functional(ms: Microstate, f: FourierTestFunction) -> complex:
    """(1/d) sum_j f(phi(j) restricted to f's window)."""
    positions = []
    for g in f.window:
        if g not in ms.window:
            raise StructuralError("test-function window exceeds the microstate window")
        positions.append(ms.window.index(g))
    rows = ms.values[:, positions]
    return complex(f.evaluate_rows(rows).mean())


# ---------------------------------------------------------------------------
# Concentration experiment


@dataclass
class ConcentrationResult:
    """Summary statistics of the empirical functional over Gaussian trials."""

    degree: int
    trials: int
    mean: complex
    variance: float
    target: complex
    deviation_fractions: dict[float, float] = field(default_factory=dict)
    seed: int = 0


def concentration_experiment(sigma: SoficMap, p_i, p_hat: GroupRingElement,
                             f: FourierTestFunction, window: Sequence[GroupElement],
                             trials: int, deltas: Sequence[float] = (),
                             seed: int = 0) -> ConcentrationResult:
    """Sample Gaussian vectors, transport them to microstates, and compare
    the empirical functional against the analytic characteristic target.

    p_i may be a projection matrix or a ready GaussianSampler (whose seed
    then wins).  variance is the unbiased sample variance of G around its
    own mean; each requested delta gets the fraction of trials with
    |G - target| > delta.
    """
    if isinstance(p_i, GaussianSampler):
        sampler = p_i
    else:
        sampler = GaussianSampler(np.asarray(p_i, dtype=np.float64), seed)
    if sampler.dimension != sigma.degree:
        raise StructuralError("projection dimension must match the sofic degree")
    window = tuple(window)
    xs = sampler.sample(trials)
    values = np.empty(trials, dtype=np.complex128)
    for i in range(trials):
        ms = build_microstate(xs[i], window, sigma)
        values[i] = empirical_functional(ms, f)
    target = f.analytic_target(p_hat)
    mean = complex(values.mean()) if trials else 0j
    if trials >= 2:
        variance = float(np.sum(np.abs(values - mean) ** 2) / (trials - 1))
    else:
        variance = 0.0
    fractions = {
        float(dl): float(np.mean(np.abs(values - target) > dl)) for dl in deltas
    }
    return ConcentrationResult(
        degree=sigma.degree,
        trials=trials,
        mean=mean,
        variance=variance,
        target=target,
        deviation_fractions=fractions,
        seed=sampler.seed,
    )
