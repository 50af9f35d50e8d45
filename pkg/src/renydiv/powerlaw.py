"""Zipf-type power-law models: construction, least-squares fitting, QQ data."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counts import CountVector
from .distributions import ProbVector
from .errors import DomainError


@dataclass(frozen=True)
class PowerLawModel:
    """p_i proportional to i^(-beta) on ranks i = 1..m, normalized by h_norm."""

    beta: float
    m: int
    h_norm: float

    def pmf(self) -> ProbVector:
        i = np.arange(1, self.m + 1, dtype=float)
        return ProbVector(i ** (-self.beta) / self.h_norm)


@dataclass(frozen=True)
class FitResult:
    beta_hat: float
    std_error: float
    residual_sse: float


def powerlaw_pmf(beta: float, m: int) -> ProbVector:
    """Normalized power law with exponent beta > 0 on m ranks.

    For 0 < beta < 1 the normalizing constant grows like m^(1-beta)/(1-beta).
    """
    if beta <= 0:
        raise DomainError("beta must be > 0")
    if m < 1:
        raise DomainError("m must be >= 1")
    i = np.arange(1, m + 1, dtype=float)
    w = i ** (-float(beta))
    return ProbVector(w / math.fsum(w.tolist()))


def powerlaw_model(beta: float, m: int) -> PowerLawModel:
    if beta <= 0:
        raise DomainError("beta must be > 0")
    if m < 1:
        raise DomainError("m must be >= 1")
    i = np.arange(1, m + 1, dtype=float)
    h = math.fsum((i ** (-float(beta))).tolist())
    return PowerLawModel(beta=float(beta), m=int(m), h_norm=h)


def _positive_sorted_counts(c) -> np.ndarray:
    if isinstance(c, CountVector):
        arr = np.asarray(c.counts, dtype=float)
    else:
        arr = np.asarray(c, dtype=float)
    arr = arr[arr > 0]
    return np.sort(arr)[::-1]


def fit_powerlaw_ls(c) -> FitResult:
    """Least-squares exponent fit on the log rank-frequency line.

    Ordinary least squares of log(count of the rank-i category) on log(i)
    over all positive-count ranks; beta_hat = -slope, std_error the usual
    OLS slope standard error. Counts may be real-valued (the fit is scale
    invariant; the intercept absorbs any positive factor).
    """
    counts = _positive_sorted_counts(c)
    k = counts.size
    if k < 3:
        raise DomainError("need at least 3 positive-count ranks to fit")
    x = np.log(np.arange(1, k + 1, dtype=float))
    y = np.log(counts)
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (y - ybar)).sum()) / sxx
    resid = y - ybar - slope * (x - xbar)
    sse = float((resid**2).sum())
    if k > 2:
        se = math.sqrt(sse / (k - 2) / sxx)
    else:
        se = 0.0
    return FitResult(beta_hat=-slope, std_error=se, residual_sse=sse)


def powerlaw_qq(c, model: PowerLawModel) -> list[tuple[float, float]]:
    """(model quantile, empirical quantile) pairs over a rank grid.

    Quantiles are ranks: the empirical side uses the count-ordered CDF, the
    model side the power law's CDF. A sample drawn from the model lands on
    the diagonal up to sampling error; an exponent mismatch shows as
    systematic curvature. Empty counts give an empty sequence.
    """
    counts = _positive_sorted_counts(c)
    if counts.size == 0:
        return []
    n = counts.sum()
    emp_cdf = np.cumsum(counts) / n
    model_cdf = np.cumsum(model.pmf().probs)
    grid = (np.arange(1, counts.size + 1) - 0.5) / counts.size
    emp_q = np.searchsorted(emp_cdf, grid, side="left") + 1
    mod_q = np.searchsorted(model_cdf, grid, side="left") + 1
    mod_q = np.minimum(mod_q, model.m)
    return [(float(mq), float(eq)) for mq, eq in zip(mod_q, emp_q)]
