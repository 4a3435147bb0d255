"""Uniformity tests for a binned sample: chi-square and Bayes-factor bounds.

The null hypothesis is that all ``r`` bins are equally likely. The
alternative averages the multinomial likelihood over a symmetric
Dirichlet prior with total concentration ``c``; the Bayes factor lower
bound is the infimum over ``c``. For large ``n`` that infimum tends to a
closed form in the chi-square statistic alone.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .histogram import Histogram
from .special import chi2_sf_exact, chi2_sf_wilson_hilferty, stirling_correction

EXACT_DF_LIMIT = 10**6
LOG_C_BRACKET = (math.log(1e-3), math.log(1e12))
LOG_C_TOL = 1e-6
DEFAULT_PSI0 = 0.5

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ChiSquareResult:
    tau: float
    df: int
    p_value: float
    method: str  # "exact-gamma" or "wilson-hilferty"


@dataclass(frozen=True)
class BayesResult:
    b_star: float
    rho_star: float
    posterior_lb: float
    psi0: float
    b_finite: Optional[float] = None
    c_star: Optional[float] = None
    bound: str = "asymptotic"  # which bound posterior_lb was computed from


def _square_sum(counts: np.ndarray) -> int:
    # group equal counts so the exact sum only touches distinct values
    values, mult = np.unique(counts, return_counts=True)
    return sum(int(v) * int(v) * int(m) for v, m in zip(values, mult))


def chi_square_stat(h: Histogram) -> float:
    """``tau = (r/n) * sum(x_i^2) - n``, exact up to one final rounding."""
    n = h.total
    if n < 1:
        raise ValueError("empty histogram")
    s = _square_sum(h.counts)
    return (h.r * s - n * n) / n


def chi_square_pvalue(tau: float, df: int) -> tuple[float, str]:
    """Upper-tail probability of ``chi2_df`` at ``tau`` and the method used."""
    if tau < 0 or df < 1:
        raise ValueError("need tau >= 0 and df >= 1")
    if df <= EXACT_DF_LIMIT:
        p, method = chi2_sf_exact(tau, df), "exact-gamma"
    else:
        p, method = chi2_sf_wilson_hilferty(tau, df), "wilson-hilferty"
    return min(max(p, 0.0), 1.0), method


def chi_square_test(h: Histogram) -> ChiSquareResult:
    tau = chi_square_stat(h)
    df = h.r - 1
    p, method = chi_square_pvalue(tau, df)
    return ChiSquareResult(tau, df, p, method)


def log_bayes_asymptotic(tau: float, r: int) -> tuple[float, float]:
    """``(log b_star, rho_star)``; see :func:`bayes_asymptotic_lower_bound`."""
    if r < 2:
        raise ValueError("need at least two bins")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    d = r - 1
    if tau <= d:
        return 0.0, 1.0
    t = tau / d - 1.0
    return 0.5 * d * (math.log1p(t) - t), math.sqrt(d / tau)


def bayes_asymptotic_lower_bound(tau: float, r: int) -> tuple[float, float]:
    """``inf_{0<rho<1} rho^(1-r) exp(-(1 - rho^2) tau / 2)`` and its minimizer.

    The exponent is convex in ``log rho``; the stationary point is
    ``rho^2 = (r-1)/tau``, which lies inside (0, 1) only when ``tau > r-1``.
    Otherwise the infimum is the limit 1 at ``rho -> 1``.
    """
    log_b, rho = log_bayes_asymptotic(tau, r)
    return math.exp(log_b), rho


def log_rising_ratio(a: float, m: int) -> float:
    """``log(Gamma(a+m) / (Gamma(a) a^m)) = sum_{i<m} log1p(i/a)``."""
    if m <= 1:
        return 0.0
    if m <= 64:
        return math.fsum(math.log1p(i / a) for i in range(1, m))
    if a >= 10.0:
        return (a + m - 0.5) * math.log1p(m / a) - m + stirling_correction(a + m) - stirling_correction(a)
    return math.lgamma(a + m) - math.lgamma(a) - m * math.log(a)


def _count_of_counts(counts: np.ndarray) -> list[tuple[int, int]]:
    values, mult = np.unique(counts, return_counts=True)
    return [(int(v), int(m)) for v, m in zip(values, mult) if v > 1]


def log_bayes_factor_dirichlet(log_c: float, n: int, r: int, groups) -> float:
    """Log Bayes factor of uniform vs. symmetric Dirichlet with concentration ``e^log_c``.

    ``groups`` lists ``(count value, number of bins with that count)``.
    Rewriting every log-gamma ratio relative to ``a^m`` makes the ``log r``
    and ``log c`` terms cancel exactly, leaving only small log1p sums.
    """
    c = math.exp(log_c)
    a = c / r
    return log_rising_ratio(c, n) - math.fsum(m * log_rising_ratio(a, v) for v, m in groups)


def golden_section_minimize(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6
) -> tuple[float, float]:
    """Minimize ``f`` on ``[lo, hi]``; returns ``(argmin, min)``.

    Assumes unimodality; if an endpoint beats the interior estimate the
    endpoint is returned instead.
    """
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    for x in (lo, hi):
        fx = f(x)
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def log_bayes_finite(h: Histogram) -> tuple[float, float]:
    """``(log b_finite, c_star)`` for the Dirichlet class, minimized over ``c``."""
    n = h.total
    if n < 1:
        raise ValueError("empty histogram")
    groups = _count_of_counts(h.counts)
    log_c, log_b = golden_section_minimize(
        lambda lc: log_bayes_factor_dirichlet(lc, n, h.r, groups), *LOG_C_BRACKET, tol=LOG_C_TOL
    )
    return log_b, math.exp(log_c)


def bayes_finite_lower_bound(h: Histogram) -> tuple[float, float]:
    log_b, c_star = log_bayes_finite(h)
    return math.exp(log_b), c_star


def posterior_lower_bound(b: float, psi0: float = DEFAULT_PSI0) -> float:
    """``P(H0 | x) >= (1 + (1 - psi0)/psi0 / b)^-1``."""
    if not 0.0 < psi0 < 1.0:
        raise ValueError("psi0 must lie in (0, 1)")
    if b < 0:
        raise ValueError("Bayes factor must be non-negative")
    if b == 0:
        return 0.0
    if math.isinf(b):
        return 1.0
    return b * psi0 / (b * psi0 + (1.0 - psi0))


def bayes_test(
    h: Histogram,
    psi0: float = DEFAULT_PSI0,
    finite: bool = True,
    bound: str = "asymptotic",
    tau: Optional[float] = None,
) -> BayesResult:
    """Both Bayes factor bounds and the posterior bound from the chosen one."""
    if bound not in ("asymptotic", "finite"):
        raise ValueError("bound must be 'asymptotic' or 'finite'")
    if bound == "finite" and not finite:
        raise ValueError("finite bound requested but not computed")
    if tau is None:
        tau = chi_square_stat(h)
    b_star, rho_star = bayes_asymptotic_lower_bound(tau, h.r)
    b_finite = c_star = None
    if finite:
        b_finite, c_star = bayes_finite_lower_bound(h)
    b = b_finite if bound == "finite" else b_star
    return BayesResult(b_star, rho_star, posterior_lower_bound(b, psi0), psi0, b_finite, c_star, bound)


def analysis_dict(h: Histogram, chi: ChiSquareResult, bayes: BayesResult) -> dict:
    out = {"n": h.total, "r": h.r, **asdict(chi), **asdict(bayes)}
    if bayes.b_finite is None:
        del out["b_finite"], out["c_star"]
    return out
