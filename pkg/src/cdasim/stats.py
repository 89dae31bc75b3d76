"""Trial aggregation and significance tests.

Mann-Whitney U is computed here directly (exact null distribution by dynamic
programming over tied mid-ranks, or the tie-corrected normal approximation);
scipy only supplies the t and normal distribution functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _st


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class TrialSample:
    strategy: str
    trial_index: int
    profit: int


def mean_ci(samples: Sequence[float], confidence: float = 0.95) -> tuple[float, float]:
    """(mean, half-width) of the Student-t confidence interval."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        raise StatsError("need at least two samples for a confidence interval")
    m = float(x.mean())
    s = float(x.std(ddof=1))
    tcrit = _st.t.ppf(0.5 + confidence / 2, n - 1)
    return m, float(tcrit * s / math.sqrt(n))


def t_test(a: Sequence[float], b: Sequence[float], paired: bool = False) -> float:
    """Two-sided Welch t-test p-value (or paired t-test with `paired=True`)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise StatsError("t-test needs at least two samples per group")
    if paired:
        if len(a) != len(b):
            raise StatsError("paired t-test needs equal-length samples")
        d = a - b
        sd = d.std(ddof=1)
        if sd == 0:
            return 1.0 if d.mean() == 0 else 0.0
        tstat = d.mean() / (sd / math.sqrt(len(d)))
        return float(2 * _st.t.sf(abs(tstat), len(d) - 1))
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    if va + vb == 0:
        return 1.0 if a.mean() == b.mean() else 0.0
    tstat = (a.mean() - b.mean()) / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (len(a) - 1) + vb ** 2 / (len(b) - 1))
    return float(min(1.0, 2 * _st.t.sf(abs(tstat), df)))


def rankdata(values: Sequence[float]) -> list[float]:
    """Mid-ranks (1-based), ties share the mean of their rank positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mid = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = mid
        i = j + 1
    return ranks


def u_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    ranks = rankdata(list(a) + list(b))
    n1 = len(a)
    return sum(ranks[:n1]) - n1 * (n1 + 1) / 2


def _exact_u_distribution(ranks2: Sequence[int], n1: int) -> dict[int, int]:
    """Counts of doubled rank sums over all size-n1 subsets of `ranks2`."""
    total = sum(ranks2)
    # table[k][s]: number of k-subsets with doubled rank sum s
    table = np.zeros((n1 + 1, total + 1), dtype=np.int64)
    table[0][0] = 1
    for r in ranks2:
        for k in range(n1, 0, -1):
            table[k][r:] = table[k][r:] + table[k - 1][: total + 1 - r]
    row = table[n1]
    return {s: int(c) for s, c in enumerate(row) if c}


def mann_whitney_u(a: Sequence[float], b: Sequence[float], exact: bool | None = None) -> float:
    """Two-sided p-value. Exact when both samples have fewer than 20 values
    (ties handled by enumerating the mid-rank distribution), otherwise the
    normal approximation with tie correction and continuity correction."""
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise StatsError("Mann-Whitney U needs non-empty samples")
    if exact is None:
        exact = n1 < 20 and n2 < 20
    ranks = rankdata(list(a) + list(b))
    mean_u = n1 * n2 / 2
    u = sum(ranks[:n1]) - n1 * (n1 + 1) / 2
    if exact:
        ranks2 = [int(round(2 * r)) for r in ranks]
        dist = _exact_u_distribution(ranks2, n1)
        total = sum(dist.values())
        offset = n1 * (n1 + 1)  # doubled minimum rank sum
        dev = abs(u - mean_u)
        hits = sum(c for s2, c in dist.items() if abs((s2 - offset) / 2 - mean_u) >= dev - 1e-9)
        return min(1.0, hits / total)
    n = n1 + n2
    counts = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    tie = sum(t ** 3 - t for t in counts.values())
    var = n1 * n2 / 12 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = (abs(u - mean_u) - 0.5) / math.sqrt(var)
    return float(min(1.0, 2 * _st.norm.sf(max(z, 0.0))))
