"""Brute-force moments of the size-2 transform by enumerating every outcome.

For each atom pair (a1, a2) and bit pair (x1, x2) the posterior of (U1, U2)
given the side information is built from the product law of the bits, and the
entropy realizations are read off as negative log posteriors. Nothing here
reuses the closed-form evolution rules, so it serves as an independent check.
"""

from __future__ import annotations

import itertools
import math

from .dist import AlphaDistribution


def _p_bit(x: int, a: float) -> float:
    return a if x == 0 else 1.0 - a


def enumerate_outcomes(F1: AlphaDistribution, F2: AlphaDistribution):
    """Yield ``(prob, h1, h2, h_minus, h_plus)`` for every outcome of positive probability."""
    for (a1, m1), (a2, m2) in itertools.product(F1.atoms(), F2.atoms()):
        post = {(x1, x2): _p_bit(x1, a1) * _p_bit(x2, a2)
                for x1 in (0, 1) for x2 in (0, 1)}
        # (u1, u2) = (x1 ^ x2, x2) is a bijection
        joint_u = {(x1 ^ x2, x2): p for (x1, x2), p in post.items()}
        marg_u1 = {u1: joint_u[(u1, 0)] + joint_u[(u1, 1)] for u1 in (0, 1)}
        for (x1, x2), p in post.items():
            if p <= 0.0:
                continue
            u1, u2 = x1 ^ x2, x2
            h1 = -math.log2(_p_bit(x1, a1))
            h2 = -math.log2(_p_bit(x2, a2))
            h_minus = -math.log2(marg_u1[u1])
            h_plus = -math.log2(joint_u[(u1, u2)] / marg_u1[u1])
            yield m1 * m2 * p, h1, h2, h_minus, h_plus


def enumerate_transform(F1: AlphaDistribution, F2: AlphaDistribution) -> dict[str, float]:
    """Exact means, variances and the output covariance by direct expectation."""
    rows = list(enumerate_outcomes(F1, F2))
    total = math.fsum(r[0] for r in rows)

    def mean(k):
        return math.fsum(r[0] * r[k] for r in rows) / total

    means = {k: mean(k) for k in (1, 2, 3, 4)}

    def cov(j, k):
        return math.fsum(r[0] * (r[j] - means[j]) * (r[k] - means[k]) for r in rows) / total

    return {
        "h_in1": means[1],
        "h_in2": means[2],
        "h_minus": means[3],
        "h_plus": means[4],
        "v_in1": cov(1, 1),
        "v_in2": cov(2, 2),
        "v_minus": cov(3, 3),
        "v_plus": cov(4, 4),
        "cov": cov(3, 4),
    }


def enumerate_cov_split(F1: AlphaDistribution, F2: AlphaDistribution) -> tuple[float, float]:
    """``(cov1, cov2)``: mean conditional covariance given the side information,
    and covariance of the conditional means, both by enumeration."""
    groups = []
    for (a1, m1), (a2, m2) in itertools.product(F1.atoms(), F2.atoms()):
        sub = AlphaDistribution.point(a1), AlphaDistribution.point(a2)
        rows = list(enumerate_outcomes(*sub))
        w = math.fsum(r[0] for r in rows)
        em = math.fsum(r[0] * r[3] for r in rows) / w
        ep = math.fsum(r[0] * r[4] for r in rows) / w
        c = math.fsum(r[0] * (r[3] - em) * (r[4] - ep) for r in rows) / w
        groups.append((m1 * m2, c, em, ep))
    c1 = math.fsum(w * c for w, c, _, _ in groups)
    gm = math.fsum(w * em for w, _, em, _ in groups)
    gp = math.fsum(w * ep for w, _, _, ep in groups)
    c2 = math.fsum(w * (em - gm) * (ep - gp) for w, _, em, ep in groups)
    return c1, c2
