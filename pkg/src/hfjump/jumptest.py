"""Jump test statistics and decision rules.

The headline statistic studentizes the gap between pre-averaged
realized variance and truncated pre-averaged bipower variation with a
block-subsampled covariance estimate, giving a one-sided standard
normal test that tolerates heavy microstructure noise. A 5-minute
bipower test, a close-to-open return test and the Brown-Forsythe
variance test round out the toolkit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .core import EstimatorConfig, TickSeries
from .errors import DegenerateScale, InsufficientData
from .preavg import (PreAvgReturns, noise_variance, preavg_bv, preavg_rv,
                     preaveraged_returns, truncation_threshold)

# asymptotic variance factor of the linear bipower jump statistic
_BNS_THETA = math.pi ** 2 / 4.0 + math.pi - 5.0


@dataclass(frozen=True)
class JumpTestResult:
    """Outcome of a single jump test.

    A degenerate studentizer (quadratic form <= 0 after rounding) marks
    the test as missing: statistic and p_value are NaN and reject is
    False. It is never treated as a rejection.
    """

    statistic: float
    rv_star: float
    bv_star_trunc: float
    noise_var: float
    sigma_quadform: float
    p_value: float
    reject: bool
    u_n: float = math.nan
    n: int = 0

    @property
    def missing(self) -> bool:
        return math.isnan(self.statistic)


def subsample_covariance(pre: PreAvgReturns, u_n: float,
                         config: EstimatorConfig) -> np.ndarray:
    """Block-subsampled covariance of the n^(1/4)-scaled estimators.

    Truncated bipower statistics with exponent pairs (2,0) and (1,1)
    are computed on disjoint blocks of p*k_n returns; subsample l owns
    every L-th block. The sample covariance of the scaled deviations of
    subsample statistics from the full-sample statistic is positive
    semi-definite by construction and consistent under both hypotheses.
    """
    n, k = pre.n, pre.k_n
    L, p = config.subsample_L, config.subsample_p
    block = p * k
    n_blocks_per_sub = n // (L * block)
    if n_blocks_per_sub < 1:
        raise InsufficientData(f"need n >= L*p*k_n = {L * block} returns, got {n}")

    v = pre.values
    if math.isfinite(u_n):
        v = np.where(np.abs(v) <= u_n, v, 0.0)
    s = np.abs(v) * n ** 0.25
    m = s.size

    # full-sample statistics, appendix normalization (1/n) sum of scaled terms
    full20 = float(np.sum(s ** 2)) / n
    full11 = float(np.sum(s[: m - k] * s[k:])) / n

    # per-block pair sums: block b covers pre-averaged indices
    # [b*block, (b+1)*block - 2k + 1], i.e. pairs fully inside the block
    pair_count = block - 2 * k + 2
    prod = s[: m - k] * s[k:]
    sq = s ** 2
    n_blocks = n_blocks_per_sub * L
    v20 = np.empty(n_blocks)
    v11 = np.empty(n_blocks)
    for b in range(n_blocks):
        lo = b * block
        hi = min(lo + pair_count, prod.size)
        v11[b] = np.sum(prod[lo:hi])
        v20[b] = np.sum(sq[lo:min(lo + pair_count, sq.size)])
    v20 /= pair_count
    v11 /= pair_count

    scale = L * block / n
    dev = np.empty((2, L))
    for l in range(L):
        dev[0, l] = scale * np.sum(v20[l::L]) - full20
        dev[1, l] = scale * np.sum(v11[l::L]) - full11
    dev *= n ** 0.25 / math.sqrt(L)
    # Bessel divisor: the full-sample statistic is within O(k_n/n) of the
    # mean of the L subsample statistics, so dividing by L would shrink the
    # covariance by (L-1)/L and visibly oversize the test at L = 10
    sigma_tilde = dev @ dev.T / (L - 1)

    c = math.sqrt(n) * pre.c1_n
    half_pi = math.pi / 2.0
    rescale = np.array([[1.0, half_pi], [half_pi, half_pi ** 2]])
    return c * c * rescale * sigma_tilde


def jump_statistic_logp(log_prices, config: EstimatorConfig,
                        alpha: float = 0.05) -> JumpTestResult:
    """Noise-robust jump test on a log-price array (tick-time sampled)."""
    p = np.asarray(log_prices, dtype=float)
    n = p.size - 1
    k = config.k_n(n) if n >= 1 else 0
    h = config.h_n(n) if n >= 1 else 1
    need = {
        "pre-averaging (2*k_n + 1 prices)": 2 * max(k, 2),
        "noise estimation (5*h_n + 1 returns)": 5 * h + 1,
        "subsampling (L*p*k_n returns)": config.subsample_L * config.subsample_p * max(k, 2),
    }
    for name, bound in need.items():
        if n < bound:
            raise InsufficientData(f"n={n} below the {name} bound of {bound}")

    pre = preaveraged_returns(p, config)
    w2 = noise_variance(p, config)
    try:
        u_n = truncation_threshold(pre, w2, config)
    except DegenerateScale:
        u_n = math.inf
    rv = preavg_rv(pre, w2)
    bvt = preavg_bv(pre, w2, truncation=u_n)
    sigma = subsample_covariance(pre, u_n, config)
    quad = float(sigma[0, 0] - 2.0 * sigma[0, 1] + sigma[1, 1])

    if quad <= 0.0 or not math.isfinite(quad):
        return JumpTestResult(statistic=math.nan, rv_star=rv, bv_star_trunc=bvt,
                              noise_var=w2, sigma_quadform=quad, p_value=math.nan,
                              reject=False, u_n=u_n, n=n)
    stat = n ** 0.25 * (rv - bvt) / math.sqrt(quad)
    pval = float(stats.norm.sf(stat))
    return JumpTestResult(statistic=stat, rv_star=rv, bv_star_trunc=bvt,
                          noise_var=w2, sigma_quadform=quad, p_value=pval,
                          reject=bool(stat > stats.norm.ppf(1.0 - alpha)),
                          u_n=u_n, n=n)


def jump_statistic(ticks: TickSeries, config: EstimatorConfig,
                   alpha: float = 0.05) -> JumpTestResult:
    """Noise-robust jump test for one symbol-session of transaction ticks."""
    return jump_statistic_logp(ticks.log_prices(), config, alpha=alpha)


def decide_jump(results: Sequence[JumpTestResult], family_alpha: float) -> list[bool]:
    """Jump indicators under a Bonferroni family-wise error rate.

    With M tests, the critical value is the standard normal quantile at
    1 - family_alpha / M; a statistic exactly at the boundary does not
    reject, and missing tests never do.
    """
    if not 0.0 < family_alpha < 1.0:
        raise ValueError("family_alpha must lie in (0, 1)")
    if len(results) == 0:
        raise ValueError("no test results supplied")
    q = float(stats.norm.ppf(1.0 - family_alpha / len(results)))
    return [bool(r.statistic > q) for r in results]


def bns_test(prices_5min, variant: str = "linear",
             alpha: float = 0.05) -> JumpTestResult:
    """Classical bipower-variation jump test on sparsely sampled prices.

    variant selects the studentization: "linear" works on RV - BV,
    while "ratio" and "log" apply the usual transformations with the
    max adjustment. Quarticity comes from the quadpower estimator with
    small-sample degrees-of-freedom scaling. Not noise robust.
    """
    if variant not in ("linear", "ratio", "log"):
        raise ValueError(f"unknown variant {variant!r}")
    p = np.asarray(prices_5min, dtype=float)
    r = np.diff(np.log(p))
    n = r.size
    if n < 10:
        raise InsufficientData(f"need at least 10 returns, got {n}")

    a = np.abs(r)
    rv = float(np.sum(r ** 2))
    bv = (math.pi / 2.0) * (n / (n - 1.0)) * float(np.sum(a[1:] * a[:-1]))
    qq = (math.pi ** 2 / 4.0) * n * (n / (n - 3.0)) * float(
        np.sum(a[3:] * a[2:-1] * a[1:-2] * a[:-3]))

    if qq <= 0.0 or rv <= 0.0 or bv <= 0.0:
        stat = 0.0
    elif variant == "linear":
        stat = math.sqrt(n) * (rv - bv) / math.sqrt(_BNS_THETA * qq)
    else:
        denom = math.sqrt(_BNS_THETA * max(1.0, qq / bv ** 2))
        if variant == "ratio":
            stat = math.sqrt(n) * (1.0 - bv / rv) / denom
        else:
            stat = math.sqrt(n) * (math.log(rv) - math.log(bv)) / denom
    pval = float(stats.norm.sf(stat))
    return JumpTestResult(statistic=stat, rv_star=rv, bv_star_trunc=bv,
                          noise_var=math.nan, sigma_quadform=_BNS_THETA * qq,
                          p_value=pval,
                          reject=bool(stat > stats.norm.ppf(1.0 - alpha)), n=n)


def close_open_test(co_returns, announcement_flags, L: int = 22,
                    robust: bool = False) -> np.ndarray:
    """Standardized close-to-open returns for overnight jump detection.

    Each day's return is divided by a volatility estimate from the
    previous L non-announcement close-to-open returns (announcement
    days are excluded from the window). The robust variant uses the
    mean absolute deviation scaled by sqrt(pi/2). Days without L usable
    prior observations, or with a zero volatility estimate, yield NaN.
    """
    r = np.asarray(co_returns, dtype=float)
    flags = np.asarray(announcement_flags, dtype=bool)
    if r.shape != flags.shape:
        raise ValueError("returns and flags must have equal length")
    if L < 5:
        raise ValueError("L must be at least 5")

    z = np.full(r.size, math.nan)
    history: list[float] = []
    for t in range(r.size):
        if len(history) >= L:
            window = np.array(history[-L:])
            if robust:
                sigma = float(np.mean(np.abs(window))) * math.sqrt(math.pi / 2.0)
            else:
                sigma = math.sqrt(float(np.mean(window ** 2)))
            if sigma > 0.0:
                z[t] = r[t] / sigma
        if not flags[t]:
            history.append(r[t])
    return z


def brown_forsythe(group_a, group_b) -> tuple[float, float]:
    """Median-centered Levene test for equal variances across two groups.

    Returns (F statistic, p-value) against F(1, n_a + n_b - 2).
    """
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise InsufficientData("each group needs at least 2 observations")
    za = np.abs(a - np.median(a))
    zb = np.abs(b - np.median(b))
    na, nb = za.size, zb.size
    ma, mb = za.mean(), zb.mean()
    grand = (za.sum() + zb.sum()) / (na + nb)
    between = na * (ma - grand) ** 2 + nb * (mb - grand) ** 2
    within = float(np.sum((za - ma) ** 2) + np.sum((zb - mb) ** 2))
    df2 = na + nb - 2
    if between == 0.0:
        return 0.0, 1.0
    if within == 0.0:
        return math.inf, 0.0
    f = (df2 / 1.0) * between / within
    return float(f), float(stats.f.sf(f, 1, df2))
