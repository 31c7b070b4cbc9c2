"""Compiled inner loops for the quantized density-evolution path."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def binned_pair(a1, m1, a2, m2, bin_count, floor):
    """Evolve every atom pair and bin both outputs on the fly.

    Returns per-cell (mass, mass * alpha) sums for the minus and plus outputs.
    Cells split [0, 1] uniformly; alpha == 1 goes to the last cell.
    """
    minus_mass = np.zeros(bin_count)
    minus_mom = np.zeros(bin_count)
    plus_mass = np.zeros(bin_count)
    plus_mom = np.zeros(bin_count)
    last = bin_count - 1
    for i in range(a1.size):
        x = a1[i]
        xb = 1.0 - x
        wi = m1[i]
        for j in range(a2.size):
            y = a2[j]
            yb = 1.0 - y
            w = wi * m2[j]
            s0 = min(max(x * y + xb * yb, 0.0), 1.0)
            s1 = min(max(xb * y + x * yb, 0.0), 1.0)

            k = min(int(s0 * bin_count), last)
            minus_mass[k] += w
            minus_mom[k] += w * s0

            w0 = w * s0
            if w0 > floor:
                v = min(x * y / s0, 1.0)
                k = min(int(v * bin_count), last)
                plus_mass[k] += w0
                plus_mom[k] += w0 * v
            w1 = w * s1
            if w1 > floor:
                v = min(xb * y / s1, 1.0)
                k = min(int(v * bin_count), last)
                plus_mass[k] += w1
                plus_mom[k] += w1 * v
    return minus_mass, minus_mom, plus_mass, plus_mom
