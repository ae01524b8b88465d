"""Nonparametric comparisons: Wilcoxon signed-rank and Friedman with post-hoc tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import chi2, norm, rankdata

from .core import ConfigurationError, InsufficientDataError

__all__ = [
    "WilcoxonResult",
    "FriedmanResult",
    "EXACT_MAX_N",
    "signed_rank_null_counts",
    "wilcoxon_exact_p",
    "wilcoxon_normal_p",
    "wilcoxon_signed_rank",
    "adjust_pvalues",
    "posthoc_from_ranks",
    "friedman_with_posthoc",
]

# exact null distribution up to this many non-zero pairs, normal beyond
EXACT_MAX_N = 50
MIN_PAIRS = 5


@dataclass
class WilcoxonResult:
    R_plus: float
    R_minus: float
    p_value: float
    n_effective: int
    method: str

    def significant(self, alpha: float) -> bool:
        return self.p_value < alpha


def _doubled(ranks) -> np.ndarray:
    # average ranks are multiples of 1/2, so 2*rank is an exact integer
    return np.rint(2.0 * np.asarray(ranks, dtype=float)).astype(np.int64)


def signed_rank_null_counts(ranks) -> list:
    """Number of sign assignments giving each value of ``2 * R+``.

    Entry ``s`` counts the subsets of `ranks` whose doubled sum is ``s``;
    the total is ``2 ** len(ranks)``. Python integers, so exact for any n.
    """
    r2 = _doubled(ranks)
    total = int(r2.sum())
    counts = [0] * (total + 1)
    counts[0] = 1
    top = 0
    for k in map(int, r2):
        top += k
        for s in range(top, k - 1, -1):
            if counts[s - k]:
                counts[s] += counts[s - k]
    return counts


def wilcoxon_exact_p(ranks, r_plus: float) -> float:
    """Two-sided exact p-value of ``R+ = r_plus`` under random signs on `ranks`."""
    counts = signed_rank_null_counts(ranks)
    n = len(counts) - 1
    obs = int(round(2 * r_plus))
    low = min(obs, n - obs)
    tail = sum(counts[: low + 1])
    return min(1.0, (2 * tail) / 2 ** len(ranks))


def wilcoxon_normal_p(ranks, r_plus: float) -> float:
    """Normal approximation with tie and continuity corrections, two-sided."""
    ranks = np.asarray(ranks, dtype=float)
    n = ranks.size
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes ** 3 - tie_sizes) / 48.0
    if var <= 0:
        return 1.0
    z = max(abs(r_plus - mean) - 0.5, 0.0) / np.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_signed_rank(a, b, method: str = "auto") -> WilcoxonResult:
    """Paired two-sided Wilcoxon signed-rank test on a minimization metric.

    Differences are ``b - a``, so ``R_plus`` collects the ranks of pairs where
    `a` is better (smaller). Zero differences are dropped and tied absolute
    differences share their average rank.

    Parameters
    ----------
    a, b : array_like
        Paired samples, `a` being the control.
    method : {"auto", "exact", "normal"}
        ``"auto"`` uses the exact conditional null distribution for up to
        `EXACT_MAX_N` non-zero pairs and the normal approximation beyond.

    Raises
    ------
    InsufficientDataError
        Fewer than 5 non-zero differences.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ConfigurationError("a and b must be 1-D and of equal length")
    d = b - a
    d = d[d != 0]
    n = d.size
    if n < MIN_PAIRS:
        raise InsufficientDataError(
            f"only {n} non-zero paired differences; need at least {MIN_PAIRS}")
    ranks = rankdata(np.abs(d))
    r_plus = float(ranks[d > 0].sum())
    r_minus = float(ranks[d < 0].sum())
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"
    if method == "exact":
        p = wilcoxon_exact_p(ranks, r_plus)
    elif method == "normal":
        p = wilcoxon_normal_p(ranks, r_plus)
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    return WilcoxonResult(r_plus, r_minus, p, n, method)


def adjust_pvalues(p, method: str) -> np.ndarray:
    """Family-wise adjusted p-values, clipped to 1.

    ``method`` is ``"bonferroni"``, ``"holm"`` (step-down) or ``"hochberg"``
    (step-up). Returned in the input order.
    """
    p = np.asarray(p, dtype=float)
    m = p.size
    if m == 0:
        return p.copy()
    if method == "bonferroni":
        return np.minimum(1.0, p * m)
    order = np.argsort(p, kind="stable")
    factors = m - np.arange(m)
    scaled = np.minimum(1.0, factors * p[order])
    if method == "holm":
        adj = np.maximum.accumulate(scaled)
    elif method == "hochberg":
        adj = np.minimum.accumulate(scaled[::-1])[::-1]
    else:
        raise ConfigurationError(f"unknown adjustment {method!r}")
    out = np.empty(m)
    out[order] = adj
    return out


@dataclass
class FriedmanResult:
    """Average ranks and control-vs-rest post-hoc p-values.

    The p-value arrays are indexed like ``comparisons`` (every algorithm
    except the control, in column order).
    """

    average_ranks: np.ndarray
    control: int
    comparisons: np.ndarray
    z: np.ndarray
    p_unadjusted: np.ndarray
    p_bonferroni: np.ndarray
    p_holm: np.ndarray
    p_hochberg: np.ndarray
    statistic: float = float("nan")
    p_friedman: float = float("nan")
    n_problems: int = 0
    labels: Optional[list] = field(default=None)


def posthoc_from_ranks(average_ranks, n_problems: int, control: int) -> FriedmanResult:
    """Control-vs-rest z-tests from Friedman average ranks."""
    ranks = np.asarray(average_ranks, dtype=float)
    a = ranks.size
    if not 0 <= control < a:
        raise ConfigurationError(f"control index {control} out of range")
    others = np.array([j for j in range(a) if j != control], dtype=int)
    se = np.sqrt(a * (a + 1) / (6.0 * n_problems))
    z = (ranks[others] - ranks[control]) / se
    p = np.minimum(1.0, 2.0 * norm.sf(np.abs(z)))
    return FriedmanResult(
        average_ranks=ranks,
        control=control,
        comparisons=others,
        z=z,
        p_unadjusted=p,
        p_bonferroni=adjust_pvalues(p, "bonferroni"),
        p_holm=adjust_pvalues(p, "holm"),
        p_hochberg=adjust_pvalues(p, "hochberg"),
        n_problems=n_problems,
    )


def friedman_with_posthoc(results, control: int = 0) -> FriedmanResult:
    """Friedman ranking of a problems x algorithms matrix (lower is better).

    Ties within a problem share their average rank. Besides the post-hoc
    comparisons against `control`, the omnibus Friedman chi-square statistic
    is reported (NaN when every row is constant).
    """
    x = np.asarray(results, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ConfigurationError("need at least 2 problems and 2 algorithms")
    n, a = x.shape
    ranks = rankdata(x, axis=1)
    avg = ranks.mean(axis=0)
    res = posthoc_from_ranks(avg, n, control)

    # omnibus statistic with tie correction
    ties = 0.0
    for row in x:
        _, t = np.unique(row, return_counts=True)
        ties += np.sum(t ** 3 - t)
    denom = 1.0 - ties / (n * (a ** 3 - a))
    if denom > 0:
        stat = 12.0 * n / (a * (a + 1)) * np.sum((avg - (a + 1) / 2.0) ** 2) / denom
        res.statistic = float(stat)
        res.p_friedman = float(chi2.sf(stat, a - 1))
    return res
