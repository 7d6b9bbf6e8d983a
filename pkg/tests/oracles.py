"""Independent oracle implementations used to cross-check the library.

These deliberately re-derive each quantity from first principles (explicit
tuple enumeration, extreme-point scans, plain Python loops) and never call
the code path they are checking.
"""

import itertools

import numpy as np


def brute_kfold_tv(p_weights, q_weights, k):
    """Half L1 distance between k-fold products by full tuple enumeration."""
    n = len(p_weights)
    total = 0.0
    for tup in itertools.product(range(n), repeat=k):
        mp = 1.0
        mq = 1.0
        for z in tup:
            mp *= p_weights[z]
            mq *= q_weights[z]
        total += abs(mp - mq)
    return 0.5 * total


def brute_kfold_expectation(value_of_tuple, p_weights, k):
    """Expectation of an arbitrary tuple statistic under the k-fold product."""
    n = len(p_weights)
    total = 0.0
    for tup in itertools.product(range(n), repeat=k):
        w = 1.0
        for z in tup:
            w *= p_weights[z]
        total += w * value_of_tuple(tup)
    return total


def counts_of(tup, n):
    c = np.zeros(n, dtype=np.int64)
    for z in tup:
        c[z] += 1
    return c


def brute_best_response(member_rows, g, h, weights):
    """Exhaustive signed scan in plain Python: returns (index, sign, corr)."""
    best = None
    residual = [w * (gv - hv) for w, gv, hv in zip(weights, g, h)]
    for i, row in enumerate(member_rows):
        corr = sum(f * r for f, r in zip(row, residual))
        for sign in (+1, -1):
            value = sign * corr
            if best is None or value > best[2]:
                best = (i, sign, value)
    return best


def calibration_error_extreme_points(g, h, weights):
    """Maximize |E[w(h)(g - h)]| over all 0/1 reweightings of the level sets."""
    levels = sorted(set(h))
    masses = []
    for v in levels:
        masses.append(
            sum(w * (gv - hv) for w, gv, hv in zip(weights, g, h) if hv == v)
        )
    best = 0.0
    for bits in itertools.product((0, 1), repeat=len(levels)):
        val = abs(sum(b * m for b, m in zip(bits, masses)))
        best = max(best, val)
    return best
