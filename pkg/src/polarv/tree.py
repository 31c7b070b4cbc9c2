"""Order-2^n polar transforms and polarization statistics of the average varentropy."""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._kernels import binned_pair
from .dist import AlphaDistribution, binary_entropy, binary_entropy2
from .polar2 import BRANCH_FLOOR, polar_pair

#: Bound on varentropy used in the bad-fraction argument of the convergence proof.
PROOF_BOUND_M = 2.3434
HIST_BINS = 101
#: above this many raw atom pairs the quantized path bins on the fly
FUSED_PAIR_THRESHOLD = 1 << 18


class AtomBudgetError(MemoryError):
    """Exact evolution would exceed the configured atom budget."""


@dataclass(frozen=True)
class QuantizeConfig:
    max_atoms: int = 4096
    bin_count: int = 4096

    def __post_init__(self):
        if self.max_atoms < 2 or self.bin_count < 2:
            raise ValueError("max_atoms and bin_count must both be at least 2")


@dataclass(frozen=True)
class QuantizeDiagnostic:
    """Change in H and V caused by one quantization, next to its a-priori bound."""

    delta_h: float
    delta_v: float
    bound_h: float
    bound_v: float
    atoms_in: int
    atoms_out: int


def _modulus(fn: Callable, width: float, grid: int = 20001) -> float:
    x = np.linspace(0.0, 1.0 - width, grid)
    return float(np.max(np.abs(fn(x + width) - fn(x))))


def _bin_atoms(alphas, masses, bin_count):
    cells = np.minimum((alphas * bin_count).astype(np.int64), bin_count - 1)
    mass = np.bincount(cells, weights=masses, minlength=bin_count)
    mom = np.bincount(cells, weights=masses * alphas, minlength=bin_count)
    return _from_bins(mass, mom)


def _from_bins(mass, mom):
    keep = mass > 0
    alpha = np.clip(mom[keep] / mass[keep], 0.0, 1.0)
    return AlphaDistribution._from_raw(alpha, mass[keep])


def quantize(F: AlphaDistribution, cfg: QuantizeConfig) -> AlphaDistribution:
    """Bin ``F`` onto ``cfg.bin_count`` uniform cells when it has more than ``cfg.max_atoms`` atoms.

    Each non-empty cell becomes one atom holding the cell mass at the
    mass-weighted mean alpha, so total mass and ``E[A]`` are preserved.
    """
    if len(F) <= cfg.max_atoms:
        return F
    return _bin_atoms(F.alphas, F.masses, cfg.bin_count)


def quantize_report(F: AlphaDistribution, cfg: QuantizeConfig):
    Q = quantize(F, cfg)
    width = 1.0 / cfg.bin_count
    w_h = _modulus(binary_entropy, width)
    w_h2 = _modulus(binary_entropy2, width)
    diag = QuantizeDiagnostic(
        delta_h=Q.conditional_entropy() - F.conditional_entropy(),
        delta_v=Q.varentropy() - F.varentropy(),
        bound_h=w_h,
        bound_v=w_h2 + 2.0 * w_h,
        atoms_in=len(F),
        atoms_out=len(Q),
    )
    return Q, diag


def evolve_pair(F1: AlphaDistribution, F2: AlphaDistribution,
                quantize_cfg: Optional[QuantizeConfig] = None,
                max_exact_pairs: Optional[int] = None):
    """One size-2 transform, exact or followed by quantization of both outputs."""
    pairs = len(F1) * len(F2)
    if quantize_cfg is None:
        if max_exact_pairs is not None and pairs > max_exact_pairs:
            raise AtomBudgetError(
                f"exact transform needs {pairs} atom pairs (budget {max_exact_pairs}); "
                "rerun with quantization enabled")
        return polar_pair(F1, F2)
    if pairs <= FUSED_PAIR_THRESHOLD:
        fm, fp = polar_pair(F1, F2)
        return quantize(fm, quantize_cfg), quantize(fp, quantize_cfg)
    mm, mmom, pm, pmom = binned_pair(F1.alphas, F1.masses, F2.alphas, F2.masses,
                                     quantize_cfg.bin_count, BRANCH_FLOOR)
    return _from_bins(mm, mmom), _from_bins(pm, pmom)


def _n_jobs(n_jobs: Optional[int]) -> int:
    if n_jobs is None:
        n_jobs = int(os.environ.get("POLARV_THREADS", "1") or 1)
    return max(1, n_jobs)


def _pmap(fn, items, n_jobs):
    if n_jobs <= 1 or len(items) <= 1:
        return [fn(*it) for it in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(lambda it: fn(*it), items))


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"number of inputs must be a power of two, got {n}")
    return n.bit_length() - 1


def polar_transform_n(inputs: Sequence[AlphaDistribution],
                      quantize_cfg: Optional[QuantizeConfig] = None,
                      n_jobs: Optional[int] = None,
                      max_exact_pairs: Optional[int] = None) -> list[AlphaDistribution]:
    """Polar transform of order ``N = len(inputs)`` with ``G_N = F^{(x) n}`` (no bit reversal).

    Level by level, positions ``i`` and ``i + N/2`` of every block are combined;
    the minus output stays at ``i`` and the plus output at ``i + N/2``, after
    which each half is transformed independently. Output ``i`` is the law of
    the alpha-parameter of ``(U_i; U^{i-1}, Y)``.
    """
    N = len(inputs)
    _log2_exact(N)
    jobs = _n_jobs(n_jobs)
    cur = list(inputs)
    block = N
    while block > 1:
        half = block // 2
        slots = [(b + i, b + i + half) for b in range(0, N, block) for i in range(half)]
        outs = _pmap(lambda F1, F2: evolve_pair(F1, F2, quantize_cfg, max_exact_pairs),
                     [(cur[i], cur[j]) for i, j in slots], jobs)
        nxt: list = [None] * N
        for (i, j), (fm, fp) in zip(slots, outs):
            nxt[i], nxt[j] = fm, fp
        cur = nxt
        block = half
    return cur


def c_functional(F: AlphaDistribution) -> float:
    """Single-step varentropy decrease ``V(F) - [V(F-) + V(F+)] / 2`` for two copies of ``F``."""
    fm, fp = polar_pair(F, F)
    return F.varentropy() - 0.5 * (fm.varentropy() + fp.varentropy())


def entropy_histogram(h_values) -> list[int]:
    """Counts over 101 cells centred on 0, 0.01, ..., 1."""
    h = np.asarray(h_values, dtype=np.float64)
    idx = np.clip(np.floor(h * (HIST_BINS - 1) + 0.5).astype(np.int64), 0, HIST_BINS - 1)
    return np.bincount(idx, minlength=HIST_BINS).tolist()


def bad_fraction_lower_bound(v_bar: float, delta: float, bound: float = PROOF_BOUND_M) -> float:
    """Lower bound ``(v_bar - delta) / M`` on the fraction of indices with ``V >= delta``."""
    return (v_bar - delta) / bound


@dataclass
class LevelRecord:
    n: int
    v_bar: float
    d_n: Optional[float]
    p_n_delta: float
    entropy_histogram: list[int]
    h_sum: float
    max_atoms: int


@dataclass
class PolarizationTrace:
    delta: float
    levels: list[LevelRecord] = field(default_factory=list)
    distributions: Optional[list[list[AlphaDistribution]]] = None

    @property
    def v_bar(self) -> list[float]:
        return [r.v_bar for r in self.levels]

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "levels": [
                {
                    "n": r.n,
                    "v_bar": r.v_bar,
                    "d_n": r.d_n,
                    "p_n_delta": r.p_n_delta,
                    "entropy_histogram": r.entropy_histogram,
                }
                for r in self.levels
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "v_bar", "d_n", "p_n_delta"]
                        + [f"h{k:03d}" for k in range(HIST_BINS)])
        for r in self.levels:
            writer.writerow([r.n, _fmt(r.v_bar), "" if r.d_n is None else _fmt(r.d_n),
                             _fmt(r.p_n_delta)] + r.entropy_histogram)
        return buf.getvalue()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _level_record(n, dists, prev_vbar, delta) -> LevelRecord:
    vs = np.array([F.varentropy() for F in dists])
    hs = np.array([F.conditional_entropy() for F in dists])
    v_bar = float(vs.mean())
    return LevelRecord(
        n=n,
        v_bar=v_bar,
        d_n=None if prev_vbar is None else v_bar - prev_vbar,
        p_n_delta=float(np.mean(vs >= delta)),
        entropy_histogram=entropy_histogram(hs),
        h_sum=float(hs.sum()),
        max_atoms=max(len(F) for F in dists),
    )


def polarize_iid(F0: AlphaDistribution, n_max: int, delta: float = 0.05,
                 quantize_cfg: Optional[QuantizeConfig] = None,
                 max_exact_pairs: int = 1 << 22,
                 n_jobs: Optional[int] = None,
                 keep_distributions: bool = False) -> PolarizationTrace:
    """Track the average varentropy of ``2^n`` i.i.d. copies of ``F0`` for ``n = 0..n_max``.

    Uses the i.i.d. shortcut ``(F_{n,i}, F_{n,i+2^(n-1)}) = psi_2(F_{n-1,i}, F_{n-1,i})``,
    so only ``2^(n-1)`` size-2 transforms are evaluated per level. The index
    order this produces is the bit reversal of :func:`polar_transform_n`'s.

    Raises
    ------
    AtomBudgetError
        In exact mode, when a transform would need more than ``max_exact_pairs``
        atom pairs.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if not delta > 0:
        raise ValueError("delta must be positive")
    jobs = _n_jobs(n_jobs)
    trace = PolarizationTrace(delta=delta)
    dists = [F0]
    kept = [dists] if keep_distributions else None
    trace.levels.append(_level_record(0, dists, None, delta))
    for n in range(1, n_max + 1):
        outs = _pmap(lambda F: evolve_pair(F, F, quantize_cfg, max_exact_pairs),
                     [(F,) for F in dists], jobs)
        dists = [fm for fm, _ in outs] + [fp for _, fp in outs]
        trace.levels.append(_level_record(n, dists, trace.levels[-1].v_bar, delta))
        if kept is not None:
            kept.append(dists)
    trace.distributions = kept
    return trace
