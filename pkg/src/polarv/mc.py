"""Monte-Carlo estimates of entropy moments, used to cross-check the closed forms.

Sampling is split into a fixed number of blocks. Block ``b`` draws from its own
Philox stream spawned from the seed, so any sharding of blocks across workers
reproduces the same numbers. The block partition doubles as the jackknife
partition for standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dist import AlphaDistribution

N_BLOCKS = 100


class SamplingError(RuntimeError):
    """A sample landed on a zero-probability event."""


@dataclass(frozen=True)
class McEstimate:
    mean: float
    variance_of_estimator: float
    n_samples: int
    seed: int

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance_of_estimator)

    def z_score(self, reference: float) -> float:
        se = self.std_error
        if se == 0.0:
            return 0.0 if self.mean == reference else math.inf
        return (self.mean - reference) / se


def block_rngs(seed: int, n_blocks: int = N_BLOCKS) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    return [np.random.Generator(np.random.Philox(s)) for s in children]


def _block_sizes(n_samples: int, n_blocks: int) -> list[int]:
    base, extra = divmod(n_samples, n_blocks)
    return [base + (1 if b < extra else 0) for b in range(n_blocks)]


def sample_bde(F: AlphaDistribution, rng: np.random.Generator, size: Optional[int] = None):
    """Draw ``(x, a)``: an atom ``a`` by its mass, then ``x = 0`` with probability ``a``.

    With ``size`` given, returns arrays of that length.
    """
    n = 1 if size is None else size
    idx = rng.choice(len(F), size=n, p=F.masses)
    a = F.alphas[idx]
    x = (rng.random(n) >= a).astype(np.int8)
    if size is None:
        return int(x[0]), float(a[0])
    return x, a


def entropy_sample(x, a):
    """``-log2 a`` where ``x = 0`` and ``-log2(1 - a)`` where ``x = 1``."""
    x = np.asarray(x)
    a = np.asarray(a, dtype=np.float64)
    p = np.where(x == 0, a, 1.0 - a)
    if np.any(p <= 0):
        raise SamplingError("sampled a bit value of zero conditional probability")
    return -np.log2(p)


def _pair_step(x1, a1, x2, a2):
    """Push sampled ``(bit, alpha)`` pairs through one size-2 transform.

    Returns ``(u1, a_minus, p_u1, x2, a_plus)`` where ``p_u1`` is the conditional
    probability of the realized ``u1``.
    """
    u1 = x1 ^ x2
    p0 = a1 * a2 + (1.0 - a1) * (1.0 - a2)
    q0 = (1.0 - a1) * a2 + a1 * (1.0 - a2)
    p_u1 = np.where(u1 == 0, p0, q0)
    if np.any(p_u1 <= 0):
        raise SamplingError("U1 sampled on a zero-probability branch")
    a_plus = np.clip(np.where(u1 == 0, a1 * a2, (1.0 - a1) * a2) / p_u1, 0.0, 1.0)
    return u1, np.clip(p0, 0.0, 1.0), p_u1, x2, a_plus


def transform_sample(F1, F2, rng, size):
    """Sample ``(h_minus, h_plus)`` of the size-2 transform directly from the bits."""
    x1, a1 = sample_bde(F1, rng, size)
    x2, a2 = sample_bde(F2, rng, size)
    _, _, p_u1, x2, a_plus = _pair_step(x1, a1, x2, a2)
    return -np.log2(p_u1), entropy_sample(x2, a_plus)


def tree_sample(F0: AlphaDistribution, n: int, rng: np.random.Generator, size: int):
    """Entropy realizations of all ``2^n`` outputs for i.i.d. inputs drawn from ``F0``.

    Row ``i`` follows the index order of :func:`polarv.tree.polar_transform_n`.
    Works on sampled bits and posteriors only, with no merging or binning.
    """
    N = 1 << n
    x = np.empty((N, size), dtype=np.int8)
    a = np.empty((N, size))
    for i in range(N):
        x[i], a[i] = sample_bde(F0, rng, size)
    block = N
    while block > 1:
        half = block // 2
        for b in range(0, N, block):
            lo = slice(b, b + half)
            hi = slice(b + half, b + block)
            u1, am, _, x2, ap = _pair_step(x[lo], a[lo], x[hi], a[hi])
            x[lo], a[lo], x[hi], a[hi] = u1, am, x2, ap
        block = half
    return entropy_sample(x, a)


def _moments(u, v):
    return np.array([u.size, u.sum(), v.sum(), (u * u).sum(), (v * v).sum(), (u * v).sum()])


def _cov_from(m):
    n, su, sv, _, _, suv = m
    return (suv - su * sv / n) / (n - 1)


def _var_u_from(m):
    n, su, _, suu, _, _ = m
    return (suu - su * su / n) / (n - 1)


def _var_v_from(m):
    n, _, sv, _, svv, _ = m
    return (svv - sv * sv / n) / (n - 1)


def _mean_u_from(m):
    return m[1] / m[0]


def _mean_v_from(m):
    return m[2] / m[0]


def _jackknife(block_moments: np.ndarray, stat) -> tuple[float, float]:
    """Delete-one-block jackknife; returns (full-sample value, variance of estimator)."""
    total = block_moments.sum(axis=0)
    full = float(stat(total))
    B = block_moments.shape[0]
    loo = np.array([stat(total - block_moments[b]) for b in range(B)])
    var = float((B - 1) / B * np.sum((loo - loo.mean()) ** 2))
    return full, var


def _collect(sampler, n_samples, seed, n_blocks):
    if n_samples < 2 * n_blocks:
        raise ValueError(f"need at least {2 * n_blocks} samples")
    rngs = block_rngs(seed, n_blocks)
    rows = [_moments(*sampler(rng, size))
            for rng, size in zip(rngs, _block_sizes(n_samples, n_blocks))]
    return np.array(rows)


def _estimate(moments, stat, n_samples, seed) -> McEstimate:
    mean, var = _jackknife(moments, stat)
    return McEstimate(mean=mean, variance_of_estimator=var, n_samples=n_samples, seed=seed)


def estimate_cov(F1: AlphaDistribution, F2: AlphaDistribution, n_samples: int = 10**6,
                 seed: int = 0, n_blocks: int = N_BLOCKS) -> McEstimate:
    """Sample covariance of the two output entropy variables, with jackknife error."""
    mom = _collect(lambda rng, k: transform_sample(F1, F2, rng, k), n_samples, seed, n_blocks)
    return _estimate(mom, _cov_from, n_samples, seed)


def estimate_transform(F1, F2, n_samples: int = 10**6, seed: int = 0,
                       n_blocks: int = N_BLOCKS) -> dict[str, McEstimate]:
    """Entropy, varentropy and covariance estimates for both outputs from one sample set."""
    mom = _collect(lambda rng, k: transform_sample(F1, F2, rng, k), n_samples, seed, n_blocks)
    stats = {
        "h_minus": _mean_u_from,
        "h_plus": _mean_v_from,
        "v_minus": _var_u_from,
        "v_plus": _var_v_from,
        "cov": _cov_from,
    }
    return {k: _estimate(mom, s, n_samples, seed) for k, s in stats.items()}


def estimate_level_vbar(F0: AlphaDistribution, n: int, n_samples: int = 10**5,
                        seed: int = 0, n_blocks: int = N_BLOCKS) -> McEstimate:
    """Average over the ``2^n`` outputs of the sampled varentropy, with jackknife error."""
    if n_samples < 2 * n_blocks:
        raise ValueError(f"need at least {2 * n_blocks} samples")
    rows = []
    for rng, k in zip(block_rngs(seed, n_blocks), _block_sizes(n_samples, n_blocks)):
        h = tree_sample(F0, n, rng, k)
        rows.append(np.concatenate(([k], h.sum(axis=1), (h * h).sum(axis=1))))
    N = 1 << n

    def stat(m):
        k, s, ss = m[0], m[1:N + 1], m[N + 1:]
        return float(np.mean((ss - s * s / k) / (k - 1)))

    return _estimate(np.array(rows), stat, n_samples, seed)


def estimate_moments(F: AlphaDistribution, n_samples: int = 10**6, seed: int = 0,
                     n_blocks: int = N_BLOCKS) -> dict[str, McEstimate]:
    """Estimates of ``H`` (mean of h) and ``V`` (variance of h) for a single BDE."""

    def sampler(rng, k):
        h = entropy_sample(*sample_bde(F, rng, k))
        return h, h

    mom = _collect(sampler, n_samples, seed, n_blocks)
    return {"H": _estimate(mom, _mean_u_from, n_samples, seed),
            "V": _estimate(mom, _var_u_from, n_samples, seed)}
