"""Atomic alpha-distributions of binary data elements and their information measures.

A binary data element (X, Y) is summarised by the law of ``A = P(X=0 | Y)``.
Everything here works on finite atomic laws of ``A``; continuous channels are
quantized when they are built.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.special import ndtr

MERGE_TOL = 1e-12
CLASS_TOL = 1e-9
MASS_TOL = 1e-12
DOMAIN_SLACK = 1e-12

#: Upper bound on any varentropy, as stated alongside the bound proof.
VARENTROPY_BOUND = 2.2434
#: Sharper numerical bound quoted next to it (reported, never enforced).
VARENTROPY_SHARP_BOUND = 1.1716


class DistributionError(ValueError):
    """Raised when atoms do not form a valid alpha- or beta-distribution."""


def _check_unit(a, name="a"):
    arr = np.asarray(a, dtype=np.float64)
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} contains NaN")
    if np.any(arr < -DOMAIN_SLACK) or np.any(arr > 1 + DOMAIN_SLACK):
        raise ValueError(f"{name} must lie in [0, 1]")
    return np.clip(arr, 0.0, 1.0)


def _entropy_kernels(x):
    """``(H(x), H2(x))`` for an array already known to lie in [0, 1]."""
    y = 1.0 - x
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log2(x)
        ly = np.log2(y)
        tx = np.where(x > 0, x * lx, 0.0)
        ty = np.where(y > 0, y * ly, 0.0)
        sx = np.where(x > 0, tx * lx, 0.0)
        sy = np.where(y > 0, ty * ly, 0.0)
    return -(tx + ty), sx + sy


def _h_unchecked(x):
    return _entropy_kernels(x)[0]


def _scalar_or_array(out, like):
    if np.ndim(like) == 0:
        return float(out)
    return out


def binary_entropy(a):
    """Binary entropy in bits, with ``0 log 0 = 0``. Accepts scalars or arrays."""
    out = _h_unchecked(_check_unit(a))
    return _scalar_or_array(out, a)


def binary_entropy2(a):
    """Second-moment kernel ``a log2(a)^2 + (1-a) log2(1-a)^2``."""
    out = _entropy_kernels(_check_unit(a))[1]
    return _scalar_or_array(out, a)


def _merge_sorted(values: np.ndarray, masses: np.ndarray, tol: float):
    """Merge runs of sorted values whose neighbours are within ``tol``.

    A merged atom carries the summed mass at the mass-weighted mean value.
    """
    if values.size <= 1:
        return values, masses
    starts = np.concatenate(([True], np.diff(values) > tol))
    if starts.all():
        return values, masses
    idx = np.flatnonzero(starts)
    mass = np.add.reduceat(masses, idx)
    moment = np.add.reduceat(masses * values, idx)
    merged = moment / mass
    # a run of length one must keep its value bit-for-bit
    single = np.diff(np.append(idx, values.size)) == 1
    merged[single] = values[idx[single]]
    return merged, mass


def _normalize_atoms(values, masses, upper: float, tol: float = MERGE_TOL,
                     check_mass: bool = True):
    v = np.asarray(values, dtype=np.float64).ravel()
    m = np.asarray(masses, dtype=np.float64).ravel()
    if v.shape != m.shape:
        raise DistributionError("values and masses differ in length")
    if v.size == 0:
        raise DistributionError("a distribution needs at least one atom")
    if np.any(~np.isfinite(v)) or np.any(~np.isfinite(m)):
        raise DistributionError("atoms must be finite")
    if np.any(v < -DOMAIN_SLACK) or np.any(v > upper + DOMAIN_SLACK):
        raise DistributionError(f"atom locations must lie in [0, {upper:g}]")
    if np.any(m <= 0):
        raise DistributionError("atom masses must be positive")
    total = m.sum()
    if check_mass and abs(total - 1.0) > MASS_TOL:
        raise DistributionError(f"masses sum to {total!r}, not 1")
    v = np.clip(v, 0.0, upper)
    order = np.argsort(v, kind="stable")
    v, m = _merge_sorted(v[order], m[order], tol)
    return v, m


def _readonly(arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


class _Atomic:
    _upper = 1.0

    def __init__(self, values, masses, *, _trusted: bool = False):
        if _trusted:
            v = np.asarray(values, dtype=np.float64)
            m = np.asarray(masses, dtype=np.float64)
        else:
            v, m = _normalize_atoms(values, masses, self._upper)
        self._values = _readonly(v)
        self._masses = _readonly(m)
        self._moments = None

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    def __len__(self) -> int:
        return self._values.size

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return (np.array_equal(self._values, other._values)
                and np.array_equal(self._masses, other._masses))

    def __hash__(self):
        return hash((self._values.tobytes(), self._masses.tobytes()))

    def atoms(self) -> list[tuple[float, float]]:
        return [(float(v), float(m)) for v, m in zip(self._values, self._masses)]

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return (len(self) == len(other)
                and np.allclose(self._values, other._values, rtol=0, atol=atol)
                and np.allclose(self._masses, other._masses, rtol=0, atol=atol))

    def _entropy_moments(self) -> tuple[float, float]:
        # atoms are immutable and validated, so both moments are computed once
        if self._moments is None:
            h, h2 = _entropy_kernels(self._values)
            self._moments = (float(np.dot(self._masses, h)), float(np.dot(self._masses, h2)))
        return self._moments

    def conditional_entropy(self) -> float:
        return self._entropy_moments()[0]

    def varentropy(self) -> float:
        h, second = self._entropy_moments()
        return _clamp_variance(second - h * h)


class AlphaDistribution(_Atomic):
    """Finite law of the alpha-parameter ``A = P(X=0 | Y)``.

    Atoms are kept sorted by ``alpha``; atoms closer than ``MERGE_TOL`` are
    merged. Instances are immutable.

    Parameters
    ----------
    alphas : array-like
        Atom locations in ``[0, 1]``.
    masses : array-like
        Positive atom probabilities summing to one (within ``1e-12``).
    """

    @property
    def alphas(self) -> np.ndarray:
        return self._values

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]]) -> "AlphaDistribution":
        atoms = list(atoms)
        if not atoms:
            raise DistributionError("a distribution needs at least one atom")
        a, m = zip(*atoms)
        return cls(a, m)

    @classmethod
    def point(cls, alpha: float) -> "AlphaDistribution":
        return cls([alpha], [1.0])

    @classmethod
    def _from_raw(cls, alphas, masses, renormalize: bool = True) -> "AlphaDistribution":
        """Build from unsorted, possibly duplicated atoms produced internally."""
        m = np.asarray(masses, dtype=np.float64)
        if renormalize:
            m = m / m.sum()
        v, m = _normalize_atoms(alphas, m, 1.0, check_mass=not renormalize)
        return cls(v, m, _trusted=True)

    def mean(self) -> float:
        return float(np.dot(self._masses, self._values))

    def __repr__(self) -> str:
        if len(self) <= 6:
            body = ", ".join(f"({a:.6g}, {m:.6g})" for a, m in self.atoms())
            return f"AlphaDistribution([{body}])"
        return f"AlphaDistribution(<{len(self)} atoms>)"


class BetaDistribution(_Atomic):
    """Folded law of ``B = min(A, 1 - A)``, supported on ``[0, 1/2]``."""

    _upper = 0.5

    @property
    def betas(self) -> np.ndarray:
        return self._values

    def __repr__(self) -> str:
        if len(self) <= 6:
            body = ", ".join(f"({b:.6g}, {m:.6g})" for b, m in self.atoms())
            return f"BetaDistribution([{body}])"
        return f"BetaDistribution(<{len(self)} atoms>)"


def _clamp_variance(v: float) -> float:
    if v < 0:
        if v < -1e-12:
            raise ArithmeticError(f"negative varentropy {v!r}")
        return 0.0
    return v


def conditional_entropy(F) -> float:
    """``H(X|Y) = E H(A)`` in bits."""
    return F.conditional_entropy()


def varentropy(F) -> float:
    """``V(X|Y) = E H2(A) - (E H(A))^2``; tiny negative round-off is clamped to 0."""
    return F.varentropy()


def fold(a):
    """``min(a, 1 - a)``."""
    a = np.asarray(a, dtype=np.float64)
    return np.minimum(a, 1.0 - a)


def to_beta(F: AlphaDistribution) -> BetaDistribution:
    if isinstance(F, BetaDistribution):
        return F
    b = fold(F.alphas)
    v, m = _normalize_atoms(b, F.masses, 0.5, check_mass=False)
    return BetaDistribution(v, m, _trusted=True)


class BdeTag(str, enum.Enum):
    PERFECT = "perfect"
    PURELY_RANDOM = "purely_random"
    ERASING = "erasing"
    PURE = "pure"
    GENERAL = "general"


@dataclass(frozen=True)
class BdeClass:
    """Most specific class of a BDE plus the derived subset relations.

    ``param`` is the erasure probability for ``ERASING`` and the common beta
    value for ``PURE``; ``None`` otherwise.
    """

    tag: BdeTag
    param: Optional[float] = None

    @property
    def is_perfect(self) -> bool:
        return self.tag is BdeTag.PERFECT

    @property
    def is_purely_random(self) -> bool:
        return self.tag is BdeTag.PURELY_RANDOM

    @property
    def is_extreme(self) -> bool:
        return self.is_perfect or self.is_purely_random

    @property
    def is_erasing(self) -> bool:
        return self.is_extreme or self.tag is BdeTag.ERASING

    @property
    def is_pure(self) -> bool:
        return self.is_extreme or self.tag is BdeTag.PURE

    @property
    def pure_value(self) -> Optional[float]:
        if self.is_perfect:
            return 0.0
        if self.is_purely_random:
            return 0.5
        return self.param if self.tag is BdeTag.PURE else None

    @property
    def erasure_probability(self) -> Optional[float]:
        if self.is_perfect:
            return 0.0
        if self.is_purely_random:
            return 1.0
        return self.param if self.tag is BdeTag.ERASING else None

    def __str__(self) -> str:
        if self.param is None:
            return self.tag.value
        return f"{self.tag.value}({self.param:.12g})"


def classify(F) -> BdeClass:
    B = to_beta(F)
    at_zero = B.betas <= CLASS_TOL
    at_half = B.betas >= 0.5 - CLASS_TOL
    p_half = float(B.masses[at_half].sum())
    if not np.any(~at_zero):
        return BdeClass(BdeTag.PERFECT)
    if not np.any(~at_half):
        return BdeClass(BdeTag.PURELY_RANDOM)
    if not np.any(~(at_zero | at_half)):
        return BdeClass(BdeTag.ERASING, p_half)
    if len(B) == 1:
        return BdeClass(BdeTag.PURE, float(B.betas[0]))
    return BdeClass(BdeTag.GENERAL)


def make_bsc(eps: float) -> AlphaDistribution:
    """Binary symmetric channel with crossover ``eps`` and uniform input."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return AlphaDistribution([eps, 1.0 - eps], [0.5, 0.5])


def make_bec(eps: float) -> AlphaDistribution:
    """Binary erasure channel with erasure probability ``eps`` and uniform input."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    half = (1.0 - eps) / 2.0
    atoms = [(a, m) for a, m in ((0.0, half), (0.5, eps), (1.0, half)) if m > 0]
    return AlphaDistribution.from_atoms(atoms)


def make_biawgn(c: float, grid_points: int = 1000) -> AlphaDistribution:
    """Binary-input AWGN channel ``y = (-1)^x c + z``, quantized on a uniform grid.

    The output range ``[-c-8, c+8]`` is cut into ``grid_points`` equal cells
    (the two end cells absorb the tails). Each cell becomes one atom at the
    alpha of its midpoint, carrying the exact Gaussian cell probability.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    lo, hi = -c - 8.0, c + 8.0
    edges = np.linspace(lo, hi, grid_points + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    cdf_edges = edges.copy()
    cdf_edges[0], cdf_edges[-1] = -np.inf, np.inf
    mass = 0.5 * np.diff(ndtr(cdf_edges - c)) + 0.5 * np.diff(ndtr(cdf_edges + c))
    alpha = 0.5 * (1.0 + np.tanh(c * mid))  # == 1 / (1 + exp(-2 c y))
    keep = mass > 0
    return AlphaDistribution._from_raw(alpha[keep], mass[keep])

