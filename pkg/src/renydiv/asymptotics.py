"""CLT-based confidence intervals, chi-square statistics, and hypothesis tests.

Non-degenerate regime: the plug-in entropy/divergence are asymptotically
normal with scale CV(W)/sqrt(n) resp. CV(V)/sqrt(n); the coefficients of
variation are evaluated at the plug-in distributions (the population values
are unknown in practice; estimation noise is second order and the attached
low-diversity advisory flags questionable regimes).

Degenerate regime (uniform p, or p = q): the linear term of the expansion
vanishes and the statistics are driven by chi-square-type quadratic forms,
standardized by (mu_n, sqrt(2) gamma_n).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counts import CountVector, JointCountTable, as_count_vector
from .distributions import JointDistribution, ProbVector, as_prob_vector, check_alpha
from .errors import (
    DegenerateStatisticError,
    DomainError,
    ShapeError,
    UndefinedStatisticError,
    UsageError,
)
from .measures import cross_power_sum, renyi_divergence, renyi_entropy
from .projections import (
    LDReport,
    ld_diagnostic,
    projection_w_moments,
    v_moments_independent,
)

MARGINAL_EQUALITY_TOL = 1e-9
_DEGENERATE_REL_TOL = 1e-12


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _normal_quantile_lower(u: float) -> float:
    """Acklam rational approximation for u <= 1/2, one Halley refinement."""
    a = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
         1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
    b = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
         6.680131188771972e01, -1.328068155288572e01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
         -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
         3.754408661907416e00)
    if u < 0.02425:
        qv = math.sqrt(-2.0 * math.log(u))
        x = (((((c[0] * qv + c[1]) * qv + c[2]) * qv + c[3]) * qv + c[4]) * qv + c[5]) / (
            (((d[0] * qv + d[1]) * qv + d[2]) * qv + d[3]) * qv + 1.0)
    else:
        qv = u - 0.5
        r = qv * qv
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * qv / (
            ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    # Halley refinement; in the lower tail the erfc-based CDF is cancellation-free
    e = normal_cdf(x) - u
    w = e * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - w / (1.0 + x * w / 2.0)


def normal_quantile(u: float) -> float:
    """Inverse standard normal CDF, accurate to well below 1e-9 over (0, 1).

    Rational approximation plus one Halley step; the upper half reflects to
    the lower half (1 - u is exact there), keeping the far tails accurate.
    """
    if not (0.0 < u < 1.0):
        raise DomainError("quantile level must lie strictly between 0 and 1")
    if u == 0.5:
        return 0.0
    if u > 0.5:
        return -_normal_quantile_lower(1.0 - u)
    return _normal_quantile_lower(u)


@dataclass(frozen=True)
class EstimateWithCI:
    estimate: float
    level: float
    lower: float
    upper: float
    std_error: float
    n: int
    m: int
    method: str
    ld: LDReport | None = None


@dataclass(frozen=True)
class TestReport:
    statistic: float
    null_mean: float
    null_sd: float
    p_value: float
    sidedness: str
    m: int
    n: int
    method: str


def _p_value(z: float, sidedness: str) -> float:
    if sidedness == "upper":
        return normal_cdf(-z)
    if sidedness == "two-sided":
        return 2.0 * normal_cdf(-abs(z))
    raise UsageError(f"unknown sidedness {sidedness!r}")


def pearson_chi_square(c, p) -> float:
    """X^2 = n * sum (phat_i - p_i)^2 / p_i against a fully specified p > 0."""
    cv = as_count_vector(c)
    pv = as_prob_vector(p)
    if pv.m != cv.m:
        raise ShapeError(f"count/probability sizes differ: {cv.m} vs {pv.m}")
    if np.any(pv.probs <= 0):
        raise DomainError("Pearson statistic requires strictly positive p_i")
    phat = cv.counts / cv.n
    terms = (phat - pv.probs) ** 2 / pv.probs
    return cv.n * math.fsum(terms.tolist())


def two_sample_chi_square(joint: JointCountTable, p) -> float:
    """X^2_{2p} = n * sum (phat_i - qhat_i)^2 / (2 p_i) from a bivariate table.

    The weights r_i = 2 p_i correspond to the equal-marginal null.
    """
    if not isinstance(joint, JointCountTable):
        raise ShapeError("two_sample_chi_square expects a JointCountTable")
    pv = as_prob_vector(p)
    if pv.m != joint.m:
        raise ShapeError(f"joint/probability sizes differ: {joint.m} vs {pv.m}")
    if np.any(pv.probs <= 0):
        raise DomainError("two-sample statistic requires strictly positive p_i")
    n = joint.n
    phat = joint.row_counts() / n
    qhat = joint.col_counts() / n
    terms = (phat - qhat) ** 2 / (2.0 * pv.probs)
    return n * math.fsum(terms.tolist())


def _null_params_from_arrays(pij: np.ndarray, marg: np.ndarray) -> tuple[float, float]:
    """mu_n and gamma_n^2 for an equal-marginal joint, marginal given explicitly."""
    diag = np.diag(pij)
    mu = math.fsum((1.0 - diag / marg).tolist())
    t1 = math.fsum((((marg - diag) / marg) ** 2).tolist())
    sym = pij + pij.T
    denom = 4.0 * np.outer(marg, marg)
    ratio = sym * sym / denom
    off = math.fsum(ratio.ravel().tolist()) - math.fsum(np.diag(ratio).tolist())
    return mu, t1 + off


def chi_square_null_params(joint: JointDistribution) -> tuple[float, float]:
    """(mu_n, gamma_n^2) for the two-sample statistic under equal marginals.

    mu_n = sum_i (1 - p_ii / p_i);
    gamma_n^2 = sum_i (p_i - p_ii)^2 / p_i^2
              + sum_{i != j} (p_ij + p_ji)^2 / (4 p_i p_j).
    For an independent product joint both equal m - 1 exactly.
    """
    if not isinstance(joint, JointDistribution):
        raise ShapeError("chi_square_null_params expects a JointDistribution")
    p, q = joint.row, joint.col
    if np.max(np.abs(p - q)) > MARGINAL_EQUALITY_TOL:
        raise DomainError(
            "marginals differ beyond tolerance: the null parameters assume p_i = q_i"
        )
    if np.any(p <= 0):
        raise DomainError("null parameters require strictly positive marginals")
    return _null_params_from_arrays(joint.pij, p)


def _observed_phat(c: CountVector) -> ProbVector:
    return c.phat_observed()


def entropy_ci(c, alpha: float, level: float = 0.95) -> EstimateWithCI:
    """Plug-in Renyi entropy with the non-degenerate CLT interval.

    std_error = CV(W at phat) * alpha / ((1 - alpha) sqrt(n)). Degenerate
    (empirically uniform) counts have CV = 0 and no usable interval here;
    that direction belongs to uniformity_test.
    """
    alpha = check_alpha(alpha)
    if not (0.0 < level < 1.0):
        raise DomainError("confidence level must lie in (0, 1)")
    cv = as_count_vector(c)
    if cv.n < 2:
        raise DomainError("need n >= 2 observations")
    if cv.m_observed < 2:
        raise DegenerateStatisticError(
            "all mass in one category: entropy estimate is 0 and its CLT variance "
            "is undefined; nothing to test in the non-degenerate regime"
        )
    phat = _observed_phat(cv)
    w = projection_w_moments(phat, alpha)
    if w.variance <= _DEGENERATE_REL_TOL * w.mean * w.mean:
        raise DegenerateStatisticError(
            "empirically uniform counts: CV(W) = 0, the entropy CLT is degenerate; "
            "use uniformity_test instead"
        )
    est = renyi_entropy(phat, alpha)
    se = w.cv * alpha / ((1.0 - alpha) * math.sqrt(cv.n))
    z = normal_quantile(0.5 + level / 2.0)
    ld = ld_diagnostic(phat, None, cv.n, alpha)
    return EstimateWithCI(
        estimate=est, level=level, lower=est - z * se, upper=est + z * se,
        std_error=se, n=cv.n, m=phat.m, method="thm1", ld=ld,
    )


def hill_ci(c, alpha: float, level: float = 0.95) -> EstimateWithCI:
    """Effective-number-of-classes interval: exp-transform of the entropy CI."""
    h = entropy_ci(c, alpha, level)
    enc = math.exp(h.estimate)
    return EstimateWithCI(
        estimate=enc, level=level,
        lower=math.exp(h.lower), upper=math.exp(h.upper),
        std_error=enc * h.std_error, n=h.n, m=h.m, method="thm1", ld=h.ld,
    )


def _effective_n(n1: int, n2: int) -> float:
    # harmonic-mean effective size; equals n when totals match (the theorem's
    # setting samples one bivariate array, so equal totals are the base case)
    return 2.0 * n1 * n2 / (n1 + n2)


def divergence_ci(cx, cy, alpha: float, level: float = 0.95,
                  joint: JointCountTable | None = None) -> EstimateWithCI:
    """Plug-in Renyi divergence with the non-degenerate CLT interval.

    std_error = CV(V at plug-in) / ((1 - alpha) sqrt(n)). Without a joint
    table the two samples are treated as independent (product plug-in joint);
    with one, V's moments use the observed joint cells. Empirically identical
    marginals give CV(V) = 0: that direction belongs to equality_test.
    """
    alpha = check_alpha(alpha)
    if not (0.0 < level < 1.0):
        raise DomainError("confidence level must lie in (0, 1)")
    if joint is not None:
        cvx, cvy = joint.marginal_count_vectors()
        n_eff = float(joint.n)
    else:
        cvx = as_count_vector(cx)
        cvy = as_count_vector(cy)
        if cvx.m != cvy.m:
            raise ShapeError(f"category counts differ: {cvx.m} vs {cvy.m}")
        n_eff = _effective_n(cvx.n, cvy.n)
    phat = ProbVector(cvx.counts / cvx.n)
    qhat = ProbVector(cvy.counts / cvy.n)
    shared = (phat.probs > 0) & (qhat.probs > 0)
    if not shared.any():
        raise DomainError("no shared support between the two samples")
    est = renyi_divergence(phat, qhat, alpha)
    if joint is None:
        v = v_moments_independent(phat, qhat, alpha)
    else:
        v = _v_moments_from_joint_counts(joint, alpha)
    if v.variance <= _DEGENERATE_REL_TOL * v.mean * v.mean:
        raise DegenerateStatisticError(
            "empirically identical marginals: CV(V) = 0, the divergence CLT is "
            "degenerate; use equality_test instead"
        )
    se = v.cv / ((1.0 - alpha) * math.sqrt(n_eff))
    z = normal_quantile(0.5 + level / 2.0)
    union = (phat.probs > 0) | (qhat.probs > 0)
    # the LD conditions need strictly positive masses on the whole universe
    ld = ld_diagnostic(phat, qhat, int(round(n_eff)), alpha) if shared.all() else None
    return EstimateWithCI(
        estimate=float(est), level=level, lower=float(est) - z * se,
        upper=float(est) + z * se, std_error=se,
        n=int(round(n_eff)), m=int(union.sum()), method="thm2", ld=ld,
    )


def _v_moments_from_joint_counts(joint: JointCountTable, alpha: float):
    """V moments at the plug-in joint, over the observed cells."""
    from .projections import _moments

    n = joint.n
    p = joint.row_counts() / n
    q = joint.col_counts() / n
    mean_terms, second_terms = [], []
    for (i, j), cnt in joint.cells.items():
        w = cnt / n
        a = alpha * (q[i] / p[i]) ** (1.0 - alpha) if q[i] > 0 else 0.0
        b = (1.0 - alpha) * (p[j] / q[j]) ** alpha if p[j] > 0 else 0.0
        v = a + b
        mean_terms.append(w * v)
        second_terms.append(w * v * v)
    return _moments(math.fsum(mean_terms), math.fsum(second_terms))


def generalized_binomial(a: float, k: int) -> float:
    """binom(a, k) = a (a-1) ... (a-k+1) / k! for real a."""
    out = 1.0
    for i in range(k):
        out *= (a - i) / (i + 1)
    return out


def uniformity_test(c, alpha: float, method: str = "thm3") -> TestReport:
    """Test whether counts come from the uniform distribution on their m categories.

    method="thm3": the degenerate entropy CLT statistic
        n [H_a(uhat) - log m - (1-a)^(-1) log(1 + binom(a,2) m/n)] / (a sqrt(m/2)),
    undefined when n <= m.
    method="lemma2i": the standardized Pearson statistic (X^2_u - m) / sqrt(2m).
    Two-sided p-value against N(0, 1) either way.
    """
    alpha = check_alpha(alpha)
    cv = as_count_vector(c)
    n, m = cv.n, cv.m
    if n < 2 or m < 2:
        raise DomainError("need n >= 2 and m >= 2")
    if method == "lemma2i":
        x2 = pearson_chi_square(cv, ProbVector.uniform(m))
        z = (x2 - m) / math.sqrt(2.0 * m)
        return TestReport(
            statistic=z, null_mean=float(m), null_sd=math.sqrt(2.0 * m),
            p_value=_p_value(z, "two-sided"), sidedness="two-sided",
            m=m, n=n, method="lemma2i",
        )
    if method == "thm3":
        if n <= m:
            raise UndefinedStatisticError(
                f"normalized entropy statistic undefined for n <= m (n={n}, m={m})"
            )
        coef = generalized_binomial(alpha, 2)
        center = math.log(m) + math.log1p(coef * m / n) / (1.0 - alpha)
        h_hat = renyi_entropy(cv.phat(), alpha)
        sd = alpha * math.sqrt(m / 2.0)
        z = n * (h_hat - center) / sd
        return TestReport(
            statistic=z, null_mean=n * center, null_sd=sd,
            p_value=_p_value(z, "two-sided"), sidedness="two-sided",
            m=m, n=n, method="thm3",
        )
    raise UsageError(f"unknown uniformity method {method!r}")


def _shrunken_joint_null_params(joint: JointCountTable, alpha: float) -> tuple[float, float]:
    """Paired-mode (mu_n, gamma_n^2): plug-in joint shrunk toward independence.

    Each observed cell is shrunk toward the product of the pooled marginals
    with weight 1/(1 + n_ij); unobserved cells take the product value. The
    pooled marginal r = (phat + qhat)/2 stands in for the common marginal the
    population formulas assume.
    """
    n = joint.n
    phat = joint.row_counts() / n
    qhat = joint.col_counts() / n
    r = 0.5 * (phat + qhat)
    keep = r > 0
    idx = np.nonzero(keep)[0]
    pos = {int(v): k for k, v in enumerate(idx)}
    rm = r[keep]
    prod = np.outer(rm, rm)
    shrunk = prod.copy()
    for (i, j), cnt in joint.cells.items():
        w = 1.0 / (1.0 + cnt)
        ii, jj = pos[i], pos[j]
        shrunk[ii, jj] = (1.0 - w) * (cnt / n) + w * prod[ii, jj]
    shrunk /= shrunk.sum()
    marg = 0.5 * (shrunk.sum(axis=1) + shrunk.sum(axis=0))
    return _null_params_from_arrays(shrunk, marg)


def equality_test(cx=None, cy=None, alpha: float = 0.5, mode: str = "independent",
                  joint: JointCountTable | None = None) -> TestReport:
    """Degenerate-divergence test of H0: p = q.

    Statistic: [n (a(a-1))^(-1) (S_a(phat, qhat) - 1) - mu_n] / (sqrt(2) gamma_n),
    one-sided upper (the numerator's leading term is non-negative by Holder,
    so only upward deviations indicate p != q).

    mode="independent": two separate samples, mu_n = gamma_n^2 = m - 1 with m
    the union support size. mode="paired": a bivariate table, (mu_n, gamma_n^2)
    estimated from the smoothed plug-in joint.
    """
    alpha = check_alpha(alpha)
    if mode == "paired":
        if joint is None:
            raise UsageError("paired mode requires joint counts")
        cvx, cvy = joint.marginal_count_vectors()
        n_eff = float(joint.n)
        mu, gamma_sq = _shrunken_joint_null_params(joint, alpha)
        union = (cvx.counts > 0) | (cvy.counts > 0)
        m_union = int(union.sum())
    elif mode == "independent":
        if cx is None or cy is None:
            raise UsageError("independent mode requires two count vectors")
        cvx = as_count_vector(cx)
        cvy = as_count_vector(cy)
        if cvx.m != cvy.m:
            raise ShapeError(f"category counts differ: {cvx.m} vs {cvy.m}")
        union = (cvx.counts > 0) | (cvy.counts > 0)
        m_union = int(union.sum())
        n_eff = _effective_n(cvx.n, cvy.n)
        mu = gamma_sq = float(max(m_union - 1, 0))
    else:
        raise UsageError(f"unknown mode {mode!r}")
    if m_union < 2:
        raise DomainError("need at least 2 observed categories")
    s = cross_power_sum(
        ProbVector(cvx.counts / cvx.n), ProbVector(cvy.counts / cvy.n), alpha
    )
    gamma = math.sqrt(gamma_sq)
    z = (n_eff / (alpha * (alpha - 1.0)) * (float(s) - 1.0) - mu) / (math.sqrt(2.0) * gamma)
    return TestReport(
        statistic=z, null_mean=mu, null_sd=math.sqrt(2.0) * gamma,
        p_value=_p_value(z, "upper"), sidedness="upper",
        m=m_union, n=int(round(n_eff)), method="thm4",
    )


def binomial_thinning(c, tau: float, seed) -> CountVector:
    """Retain each of the n observations independently with probability tau.

    The returned total is Binomial(n, tau)-distributed; per-category totals
    are Binomial(c_i, tau), which realizes exactly the same thinning. The
    stream is consumed from `seed` (an int or a numpy Generator), so results
    are reproducible; do not share one Generator across threads.
    """
    tau = float(tau)
    if not (0.0 < tau < 1.0):
        raise DomainError("tau must lie strictly between 0 and 1")
    cv = as_count_vector(c)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    thinned = rng.binomial(cv.counts, tau)
    if thinned.sum() < 1:
        # keep the CountVector invariant n >= 1: resample until non-empty,
        # which conditions on the (overwhelmingly likely) non-degenerate event
        while thinned.sum() < 1:
            thinned = rng.binomial(cv.counts, tau)
    return CountVector(thinned)
