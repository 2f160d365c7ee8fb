"""Independent brute-force oracles used to check the production code.

Everything here is deliberately naive: plain-Python loops, dict counting,
O(n^2) ranking and literal enumeration. None of it shares code with the
package under test.
"""

import itertools
import math


def scan_segments(pressure):
    """Segment-scanning reference for stroke and timing features.

    Walks the pressure series once, tracking maximal runs of pen-down
    (pressure > 0) and in-air (pressure == 0) samples.
    """
    down_segments = 0
    up_segments = 0
    air = 0
    down = 0
    prev_state = None
    for value in pressure:
        state = "down" if value > 0 else "up"
        if value > 0:
            down += 1
        else:
            air += 1
        if state != prev_state:
            if state == "down":
                down_segments += 1
            else:
                up_segments += 1
            prev_state = state
    if up_segments == 0:
        ntu = 0.0
        flagged = True
    else:
        ntu = air / up_segments
        flagged = False
    return {
        "strokes_down": down_segments,
        "strokes_up": up_segments,
        "time_in_air": air,
        "time_down": down,
        "normalized_time_up": ntu,
        "flagged": flagged,
    }


def histogram_entropy(series):
    """Dict-counting Shannon entropy in bits."""
    counts = {}
    for value in series:
        counts[value] = counts.get(value, 0) + 1
    n = len(series)
    h = 0.0
    for c in counts.values():
        p = c / n
        h -= p * math.log2(p)
    return h


def naive_ranks(values):
    """Midranks by pairwise counting, O(n^2)."""
    ranks = []
    for v in values:
        less = sum(1 for u in values if u < v)
        equal = sum(1 for u in values if u == v)
        ranks.append(less + (equal + 1) / 2.0)
    return ranks


def enumerate_signed_rank_p(diffs, alternative="two-sided"):
    """Exact signed-rank p-value by literal enumeration of sign assignments.

    Zero differences are dropped first. The two-sided p counts assignments at
    least as extreme in either direction: W' >= max(W, M - W) or
    W' <= min(W, M - W), with M the total rank sum.
    """
    d = [x for x in diffs if x != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks = naive_ranks([abs(x) for x in d])
    w_obs = sum(r for r, x in zip(ranks, d) if x > 0)
    m = sum(ranks)
    eps = 1e-9
    count = 0
    total = 0
    for signs in itertools.product((False, True), repeat=n):
        w = sum(r for r, positive in zip(ranks, signs) if positive)
        total += 1
        if alternative == "greater":
            count += w >= w_obs - eps
        elif alternative == "less":
            count += w <= w_obs + eps
        else:
            hi = max(w_obs, m - w_obs)
            lo = m - hi
            count += (w >= hi - eps) or (w <= lo + eps)
    return min(1.0, count / total)
