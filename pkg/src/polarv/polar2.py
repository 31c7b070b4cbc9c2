"""Size-2 polar transform of alpha-distributions and the output covariance.

The transform maps independent inputs (X1, Y1), (X2, Y2) to the pair
``(U1; Y1, Y2)`` and ``(U2; U1, Y1, Y2)`` with ``U1 = X1 xor X2`` and
``U2 = X2``. The covariance of the two output entropy variables splits as
``cov1 + cov2``: the expected conditional covariance given the outputs, and
the covariance of the conditional means.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .dist import (
    AlphaDistribution,
    _check_unit,
    _h_unchecked,
    _scalar_or_array,
    binary_entropy,
)

#: branches with probability weight at or below this are dropped
BRANCH_FLOOR = 1e-300


class ConsistencyError(RuntimeError):
    """Two independent routes to the same quantity disagree (an implementation bug)."""


def star(p, q):
    """Binary convolution ``p q + (1-p)(1-q)``."""
    p = _check_unit(p, "p")
    q = _check_unit(q, "q")
    out = np.clip(p * q + (1.0 - p) * (1.0 - q), 0.0, 1.0)
    return _scalar_or_array(out, out)


def _star(p, q):
    return np.clip(p * q + (1.0 - p) * (1.0 - q), 0.0, 1.0)


def pair_atoms(a1, m1, a2, m2):
    """Raw (unmerged) atoms of both outputs for the atom grid ``a1 x a2``.

    Returns ``(minus_alpha, minus_mass, plus_alpha, plus_mass)`` as flat
    arrays. Plus-branches whose weight is at most ``BRANCH_FLOOR`` carry no
    probability and are dropped before their 0/0 alpha is evaluated.
    """
    A1 = np.asarray(a1, dtype=np.float64)[:, None]
    A2 = np.asarray(a2, dtype=np.float64)[None, :]
    W = np.asarray(m1, dtype=np.float64)[:, None] * np.asarray(m2, dtype=np.float64)[None, :]

    s0 = _star(A1, A2)           # P(U1 = 0 | a1, a2)
    s1 = _star(1.0 - A1, A2)     # P(U1 = 1 | a1, a2)
    minus_alpha = s0.ravel()
    minus_mass = W.ravel()

    w0 = (W * s0).ravel()
    w1 = (W * s1).ravel()
    k0 = w0 > BRANCH_FLOOR
    k1 = w1 > BRANCH_FLOOR
    num0 = (A1 * A2).ravel()[k0]
    num1 = ((1.0 - A1) * A2).ravel()[k1]
    plus_alpha = np.concatenate((num0 / s0.ravel()[k0], num1 / s1.ravel()[k1]))
    plus_mass = np.concatenate((w0[k0], w1[k1]))
    np.clip(plus_alpha, 0.0, 1.0, out=plus_alpha)
    return minus_alpha, minus_mass, plus_alpha, plus_mass


def polar_pair(F1: AlphaDistribution, F2: AlphaDistribution):
    """Exact density evolution of one size-2 transform.

    Returns
    -------
    (AlphaDistribution, AlphaDistribution)
        Laws of the minus output ``(U1; Y)`` and the plus output ``(U2; U1, Y)``.
    """
    ma, mm, pa, pm = pair_atoms(F1.alphas, F1.masses, F2.alphas, F2.masses)
    return AlphaDistribution._from_raw(ma, mm), AlphaDistribution._from_raw(pa, pm)


def _special(x):
    # exact test: the kernel grows like q log^2 q near 0, so a tolerance here
    # would discard mass that the varentropy drop still sees
    return (x == 0.0) | (x == 0.5) | (x == 1.0)


def f_cov(p, q):
    """Conditional covariance kernel of the output entropies given ``(a1, a2) = (p, q)``.

    ``f(p, q) = (p*q)(p*q') log2[(p*q)/(p*q')] [H(p q'/(p*q')) - H(p q/(p*q))]``
    with ``q' = 1 - q``. Exactly zero when either argument is 0, 1/2 or 1.
    """
    out = _f_cov(*np.broadcast_arrays(_check_unit(p, "p"), _check_unit(q, "q")))
    return _scalar_or_array(out, out)


def _f_cov(P, Q):
    out = np.zeros(P.shape)
    live = ~(_special(P) | _special(Q))
    if np.any(live):
        p_, q_ = P[live], Q[live]
        s = _star(p_, q_)
        t = _star(p_, 1.0 - q_)
        h_t = _h_unchecked(np.clip(p_ * (1.0 - q_) / t, 0.0, 1.0))
        h_s = _h_unchecked(np.clip(p_ * q_ / s, 0.0, 1.0))
        out[live] = s * t * (np.log2(s) - np.log2(t)) * (h_t - h_s)
    return out


def h_minus_fn(p, q):
    return binary_entropy(star(p, q))


def h_plus_fn(p, q):
    return binary_entropy(p) + binary_entropy(q) - h_minus_fn(p, q)


def _grid(F1, F2):
    return np.outer(F1.masses, F2.masses)


def cov1(F1, F2) -> float:
    """Expected conditional covariance ``E f(A1, A2)``."""
    W = _grid(F1, F2)
    vals = F1._values[:, None], F2._values[None, :]
    return float(np.sum(W * _f_cov(*np.broadcast_arrays(*vals))))


def cov2(F1, F2) -> float:
    """Covariance of the conditional means ``cov[H-(B), H+(B)]`` over the folded pair."""
    # the double sum does not need merged fold atoms, so fold the values in place
    W = _grid(F1, F2)
    f1 = np.minimum(F1._values, 1.0 - F1._values)
    f2 = np.minimum(F2._values, 1.0 - F2._values)
    b1, b2 = np.broadcast_arrays(f1[:, None], f2[None, :])
    hm = _h_unchecked(_star(b1, b2))
    hp = _h_unchecked(b1) + _h_unchecked(b2) - hm
    e_m = np.sum(W * hm)
    e_p = np.sum(W * hp)
    # centred form keeps the cancellation error at the 1e-16 level
    return float(np.sum(W * (hm - e_m) * (hp - e_p)))


@dataclass(frozen=True)
class TransformReport:
    f_minus: AlphaDistribution
    f_plus: AlphaDistribution
    h_in: tuple[float, float]
    v_in: tuple[float, float]
    h_out: tuple[float, float]
    v_out: tuple[float, float]
    cov1: float
    cov2: float
    cov_total: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["f_minus"] = {"atoms": [{"alpha": a, "mass": m} for a, m in self.f_minus.atoms()]}
        d["f_plus"] = {"atoms": [{"alpha": a, "mass": m} for a, m in self.f_plus.atoms()]}
        for key in ("h_in", "v_in", "h_out", "v_out"):
            d[key] = list(d[key])
        return d


def transform_report(F1: AlphaDistribution, F2: AlphaDistribution,
                     tol: float = 1e-10) -> TransformReport:
    """Run one size-2 transform and assemble every entropy/varentropy diagnostic.

    The covariance is computed twice: as ``cov1 + cov2`` from closed forms, and
    as half the varentropy drop between inputs and outputs. A mismatch beyond
    ``tol`` raises :class:`ConsistencyError`.
    """
    fm, fp = polar_pair(F1, F2)
    h_in = (F1.conditional_entropy(), F2.conditional_entropy())
    v_in = (F1.varentropy(), F2.varentropy())
    h_out = (fm.conditional_entropy(), fp.conditional_entropy())
    v_out = (fm.varentropy(), fp.varentropy())
    c1, c2 = cov1(F1, F2), cov2(F1, F2)
    total = c1 + c2
    drop = 0.5 * (sum(v_in) - sum(v_out))
    if abs(total - drop) > tol:
        raise ConsistencyError(
            f"cov1 + cov2 = {total!r} but half the varentropy drop is {drop!r}")
    return TransformReport(fm, fp, h_in, v_in, h_out, v_out, c1, c2, total)
