"""Exact moments of the projection variables W and V, and CLT-condition diagnostics.

W takes the value a * p_i^(a-1) with probability p_i; V takes the value
a (q_i/p_i)^(1-a) + (1-a) (p_j/q_j)^a with probability p_ij. Their first two
moments drive every non-degenerate confidence interval in this package:
E W = a * S_a(p), E V = S_a(p, q), and the variances vanish exactly on the
degenerate directions (uniform p for W; p = q for V).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import JointDistribution, as_prob_vector, check_alpha
from .errors import DomainError, ShapeError
from .measures import cross_power_sum, power_sum

# Desk-scale advisory thresholds for the asymptotic o(.) conditions: a finite-n
# quotient below 0.1 reads "pass", below 0.5 "marginal", otherwise "fail".
ADVISORY_PASS = 0.1
ADVISORY_MARGINAL = 0.5


@dataclass(frozen=True)
class ProjectionMoments:
    mean: float
    variance: float
    cv: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


def _moments(mean: float, second: float) -> ProjectionMoments:
    variance = second - mean * mean
    if variance < 0:
        # exact-zero variance cases land epsilon-negative after rounding
        if variance > -1e-12 * max(second, 1.0):
            variance = 0.0
        else:
            raise AssertionError("negative variance from moment computation")
    cv = math.sqrt(variance) / abs(mean)
    return ProjectionMoments(mean=mean, variance=variance, cv=cv)


def projection_w_moments(p, alpha: float) -> ProjectionMoments:
    """Moments of W: mean a*S_a(p), variance a^2 (sum p^(2a-1) - S_a(p)^2).

    Requires every p_i > 0: W is defined pointwise on the support, and
    silently shrinking the support would change m in the CLT normalizers.
    """
    alpha = check_alpha(alpha)
    probs = as_prob_vector(p).probs
    if np.any(probs <= 0):
        raise DomainError("W is undefined on null support: all p_i must be > 0")
    s = math.fsum(np.power(probs, alpha).tolist())
    second = alpha * alpha * math.fsum(np.power(probs, 2.0 * alpha - 1.0).tolist())
    return _moments(alpha * s, second)


def noise_and_signal_w_variance(p0: float, m: int, alpha: float) -> float:
    """Closed-form Var W for the signal-contamination model.

    The model puts mass p0 on one signal point and spreads 1 - p0 uniformly
    over m noise points, so W has a two-point law. p0 = 0 degenerates to the
    pure-noise (uniform) model with Var W = 0.
    """
    alpha = check_alpha(alpha)
    if not (0.0 < p0 < 1.0):
        raise DomainError("p0 must lie strictly between 0 and 1")
    if m < 1:
        raise DomainError("m must be >= 1")
    a = m ** (1.0 - alpha) * (1.0 - p0) ** alpha * math.sqrt(p0 / (1.0 - p0))
    b = p0**alpha * math.sqrt((1.0 - p0) / p0)
    return alpha * alpha * (a - b) ** 2


def projection_v_moments(joint: JointDistribution, alpha: float) -> ProjectionMoments:
    """Moments of V from an explicit bivariate distribution.

    mean = S_a(p, q) over the marginals; variance = 0 iff p = q.
    The two marginal supports must coincide (support mismatch leaves the
    value a (q_i/p_i)^(1-a) + (1-a) (p_j/q_j)^a undefined).
    """
    alpha = check_alpha(alpha)
    if not isinstance(joint, JointDistribution):
        raise ShapeError("projection_v_moments expects a JointDistribution")
    p, q = joint.row, joint.col
    if not np.array_equal(p > 0, q > 0):
        raise DomainError("marginal supports differ: V is undefined off shared support")
    mask = joint.pij > 0
    if not mask.any():
        raise DomainError("joint distribution has empty support")
    ii, jj = np.nonzero(mask)
    # any cell with mass forces its row and column marginals positive, so the
    # ratios below never divide by zero once supports are known to coincide
    vals = alpha * (q[ii] / p[ii]) ** (1.0 - alpha) + (1.0 - alpha) * (
        p[jj] / q[jj]
    ) ** alpha
    w = joint.pij[mask]
    mean = math.fsum((w * vals).tolist())
    second = math.fsum((w * vals * vals).tolist())
    return _moments(mean, second)


def v_moments_independent(p, q, alpha: float) -> ProjectionMoments:
    """Moments of V for independent marginals, without forming the m x m joint.

    With (i, j) independent, V = A_i + B_j splits into independent pieces
    A_i = a (q_i/p_i)^(1-a) drawn from p and B_j = (1-a) (p_j/q_j)^a drawn
    from q, so the variance is Var A + Var B. Categories where one marginal
    vanishes use the 0^a = 0 convention of the power sums.
    """
    alpha = check_alpha(alpha)
    pv = as_prob_vector(p)
    qv = as_prob_vector(q)
    if pv.m != qv.m:
        raise ShapeError(f"category counts differ: {pv.m} vs {qv.m}")
    pp, qq = pv.probs, qv.probs

    psup = pp > 0
    a_vals = np.zeros(pv.m)
    a_vals[psup] = alpha * np.where(
        qq[psup] > 0, (qq[psup] / pp[psup]) ** (1.0 - alpha), 0.0
    )
    ea = math.fsum((pp[psup] * a_vals[psup]).tolist())
    ea2 = math.fsum((pp[psup] * a_vals[psup] ** 2).tolist())

    qsup = qq > 0
    b_vals = np.zeros(qv.m)
    b_vals[qsup] = (1.0 - alpha) * np.where(
        pp[qsup] > 0, (pp[qsup] / qq[qsup]) ** alpha, 0.0
    )
    eb = math.fsum((qq[qsup] * b_vals[qsup]).tolist())
    eb2 = math.fsum((qq[qsup] * b_vals[qsup] ** 2).tolist())

    # E V^2 = E A^2 + 2 E A E B + E B^2 since A and B are independent
    return _moments(ea + eb, ea2 + 2.0 * ea * eb + eb2)


def bhattacharyya_v_variance(p, q) -> float:
    """Var V at a = 1/2 for independent marginals: 1/2 - (sum sqrt(p_i q_i))^2 / 2."""
    s = cross_power_sum(p, q, 0.5)
    return 0.5 - 0.5 * float(s) ** 2


@dataclass(frozen=True)
class LDReport:
    """Finite-n values of the low-diversity CLT applicability conditions.

    All quantities are diagnostics only; nothing here blocks computation.
    entropy_condition / divergence_condition are the non-degenerate CLT
    quotients (infinite when the projection variance vanishes); the
    degenerate_* fields carry the degenerate-regime replacements (m^2/n for
    the uniform-entropy CLT, and the pointwise-mass condition for the
    degenerate-divergence CLT). Advisory labels use the 0.1 / 0.5 thresholds.
    """

    p_star: float
    ld_ratio: float
    m_over_n: float
    entropy_condition: float
    divergence_condition: float | None
    degenerate_entropy_condition: float
    degenerate_divergence_condition: float | None
    advisories: dict = field(default_factory=dict)


def _advisory(value: float) -> str:
    if value < ADVISORY_PASS:
        return "pass"
    if value < ADVISORY_MARGINAL:
        return "marginal"
    return "fail"


def ld_diagnostic(p, q, n: int, alpha: float) -> LDReport:
    """Evaluate the CLT applicability quotients at a concrete (m, n).

    q may be None for the one-sample (entropy) case. Zero-probability
    categories are rejected, not dropped: the conditions normalize by the
    support size and the minimum mass.
    """
    alpha = check_alpha(alpha)
    if n < 1:
        raise DomainError("n must be >= 1")
    pv = as_prob_vector(p)
    if np.any(pv.probs <= 0):
        raise DomainError("ld_diagnostic requires strictly positive masses")
    qv = None
    if q is not None:
        qv = as_prob_vector(q)
        if qv.m != pv.m:
            raise ShapeError(f"category counts differ: {pv.m} vs {qv.m}")
        if np.any(qv.probs <= 0):
            raise DomainError("ld_diagnostic requires strictly positive masses")

    m = pv.m
    p_star = float(pv.probs.min())
    if qv is not None:
        p_star = min(p_star, float(qv.probs.min()))
    ld_ratio = 1.0 / (n * p_star)
    m_over_n = m / n

    degenerate_rel_tol = 1e-12

    w = projection_w_moments(pv, alpha)
    sum_p_am1 = math.fsum(np.power(pv.probs, alpha - 1.0).tolist())
    if w.variance > degenerate_rel_tol * w.mean * w.mean:
        entropy_condition = sum_p_am1 / math.sqrt(n * w.variance)
    else:
        entropy_condition = math.inf
    degenerate_entropy_condition = m * m / n

    divergence_condition = None
    degenerate_divergence_condition = None
    if qv is not None:
        v = v_moments_independent(pv, qv, alpha)
        ratio_sum = math.fsum(
            ((qv.probs / pv.probs) ** (1.0 - alpha)).tolist()
        ) + math.fsum(((pv.probs / qv.probs) ** alpha).tolist())
        if v.variance > degenerate_rel_tol * v.mean * v.mean:
            divergence_condition = ratio_sum / math.sqrt(n * v.variance)
        else:
            divergence_condition = math.inf
        degenerate_divergence_condition = max(
            1.0 / (n * m * p_star * p_star), m / (n * p_star)
        )

    advisories = {
        "entropy_clt": _advisory(
            entropy_condition if math.isfinite(entropy_condition)
            else degenerate_entropy_condition
        )
    }
    if qv is not None:
        advisories["divergence_clt"] = _advisory(
            divergence_condition if math.isfinite(divergence_condition)
            else degenerate_divergence_condition
        )

    return LDReport(
        p_star=p_star,
        ld_ratio=ld_ratio,
        m_over_n=m_over_n,
        entropy_condition=entropy_condition,
        divergence_condition=divergence_condition,
        degenerate_entropy_condition=degenerate_entropy_condition,
        degenerate_divergence_condition=degenerate_divergence_condition,
        advisories=advisories,
    )
