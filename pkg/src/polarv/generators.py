"""Random and hand-built alpha-distributions for property checks."""

from __future__ import annotations

import numpy as np

from .dist import AlphaDistribution, make_bec

SPECIAL_ALPHAS = (0.0, 0.5, 1.0)


def random_alpha_distribution(rng: np.random.Generator, max_atoms: int = 8,
                              min_atoms: int = 1, special_rate: float = 0.1) -> AlphaDistribution:
    """Atoms uniform on [0, 1] (a fraction snapped to 0, 1/2 or 1), Dirichlet masses."""
    k = int(rng.integers(min_atoms, max_atoms + 1))
    alphas = rng.random(k)
    snap = rng.random(k) < special_rate
    alphas[snap] = rng.choice(SPECIAL_ALPHAS, size=int(snap.sum()))
    masses = rng.dirichlet(np.ones(k))
    masses = np.maximum(masses, 1e-6)
    return AlphaDistribution._from_raw(alphas, masses)


def random_erasing(rng: np.random.Generator, strict: bool = True) -> AlphaDistribution:
    """Erasing BDE with possibly asymmetric mass between alpha = 0 and alpha = 1."""
    eps = float(rng.uniform(0.05, 0.95)) if strict else float(rng.choice([0.0, 1.0]))
    split = float(rng.uniform(0.1, 0.9))
    atoms = [(0.0, (1 - eps) * split), (0.5, eps), (1.0, (1 - eps) * (1 - split))]
    return AlphaDistribution._from_raw(*zip(*[(a, m) for a, m in atoms if m > 0]))


def random_perfect(rng: np.random.Generator) -> AlphaDistribution:
    p = float(rng.uniform(0.0, 1.0))
    if p in (0.0, 1.0):
        return AlphaDistribution.point(p)
    return AlphaDistribution([0.0, 1.0], [p, 1.0 - p])


def purely_random() -> AlphaDistribution:
    return AlphaDistribution.point(0.5)


def random_non_extreme(rng: np.random.Generator, max_atoms: int = 4) -> AlphaDistribution:
    """A distribution with at least one atom away from {0, 1/2, 1}."""
    while True:
        F = random_alpha_distribution(rng, max_atoms, special_rate=0.0)
        if F.varentropy() > 1e-6:
            return F


def erasing(eps: float) -> AlphaDistribution:
    return make_bec(eps)
