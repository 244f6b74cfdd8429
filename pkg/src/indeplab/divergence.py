"""Exact chi-square divergence of the sign-mixture alternative from the null.

The mixture P1 averages N(0, Sigma_uv) over all 2^(p+q) sign patterns; P0 is
N(0, I).  The n-sample chi-square divergence reduces to a double binomial sum

    E_{U,V}[(1 - a^2 U V)^(-n)] - 1

over U = sum of p signs, V = sum of q signs, which this module evaluates
exactly, together with the closed-form upper bound 4 b^2 log4 / (1 - b^2 log4)
and the induced total-variation and power bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .structured_cov import amplitude

LOG4 = math.log(4.0)


class DivergenceInfiniteError(ValueError):
    """The defining Gaussian integral diverges (some 1 - a^2 U V <= 0)."""


@dataclass(frozen=True)
class DivergenceReport:
    """Chi-square divergence with the full chain of derived bounds."""

    chi2_exact: float
    chi2_closed_bound: float
    tv_upper: float
    power_upper: float
    pd_ok: bool
    mgf_ok: bool
    b_caps_ok: bool


@dataclass(frozen=True)
class GammaQuad:
    """The four quadratic-form eigenvalues for one (u'g, v'h) configuration."""

    gammas: tuple[float, float, float, float]
    t: float
    a: float
    p: int
    q: int
    ug: int
    vh: int


def gamma_eigs(a: float, p: int, q: int, ug: int, vh: int) -> GammaQuad:
    """Closed-form eigenvalues of the 4x4 coupled quadratic form.

    gamma_ij = (1/2)(-2apq + (-1)^i a q ug + (-1)^i a p vh - (-1)^j sqrt(R)),
    with the discriminant R depending on i.  Inputs must satisfy |ug| <= p,
    |vh| <= q and the parity constraints ug = p (mod 2), vh = q (mod 2).
    """
    if abs(ug) > p or abs(vh) > q:
        raise ValueError("|ug| <= p and |vh| <= q required")
    if (ug - p) % 2 != 0 or (vh - q) % 2 != 0:
        raise ValueError("ug, vh must match the parity of p, q")
    gammas = []
    for i in (0, 1):
        si = (-1.0) ** i
        trace = -2.0 * a * p * q + si * a * q * ug + si * a * p * vh
        # The pair (gamma_i0, gamma_i1) solves x^2 - trace*x + prod = 0.  The
        # product factors exactly, and the discriminant equals the expanded
        # polynomial 4pq - (-1)^i 4q(u'g) + ...; evaluating it as
        # trace^2 - 4 prod avoids catastrophic cancellation near zero roots.
        prod = (p - si * ug) * (q - si * vh) * (a * a * p * q - 1.0)
        R = trace * trace - 4.0 * prod
        if R < 0:
            # Tolerate rounding at a double root; anything larger is an
            # internal inconsistency.
            if R > -1e-9 * max(1.0, 4.0 * p * q):
                R = 0.0
            else:
                raise ArithmeticError(f"negative discriminant R = {R:.4g} (internal inconsistency)")
        root = math.sqrt(R)
        # Small-magnitude root through the product, large one directly.
        lo = 0.5 * (trace - root)
        hi = 0.5 * (trace + root)
        if trace >= 0.0:
            lo = prod / hi if hi != 0.0 else lo
        else:
            hi = prod / lo if lo != 0.0 else hi
        gammas.extend([lo, hi])
    denom = 1.0 - p * q * a * a
    t = a / denom if denom > 0 else math.inf
    return GammaQuad(gammas=tuple(gammas), t=t, a=a, p=p, q=q, ug=ug, vh=vh)


def _gamma_grid(a: float, p: int, q: int) -> np.ndarray:
    """All gamma_ij over the full achievable (ug, vh) grid, vectorized.

    Returns shape (len(Us), len(Vs), 4).
    """
    Us = np.arange(-p, p + 1, 2, dtype=float)[:, None]
    Vs = np.arange(-q, q + 1, 2, dtype=float)[None, :]
    out = np.empty((Us.shape[0], Vs.shape[1], 4))
    k = 0
    for i in (0, 1):
        si = (-1.0) ** i
        R = (
            4.0 * p * q
            - si * 4.0 * q * Us
            + a * a * q * q * Us**2
            - si * 4.0 * p * Vs
            + 4.0 * Us * Vs
            - 2.0 * a * a * p * q * Us * Vs
            + a * a * p * p * Vs**2
        )
        root = np.sqrt(np.maximum(R, 0.0))
        for j in (0, 1):
            out[:, :, k] = 0.5 * (-2.0 * a * p * q + si * a * q * Us + si * a * p * Vs - (-1.0) ** j * root)
            k += 1
    return out


def mgf_validity(a: float, p: int, q: int) -> bool:
    """True iff t * gamma_ij < 1 for every achievable (ug, vh) configuration.

    Returns False outright when a^2 pq >= 1 (the family is not even PD).
    """
    if a == 0.0:
        return True
    denom = 1.0 - p * q * a * a
    if denom <= 0:
        return False
    t = a / denom
    return bool(np.all(t * _gamma_grid(a, p, q) < 1.0))


def chi_square_exact(n: int, p: int, q: int, b: float) -> float:
    """Exact chi-square divergence via the double binomial sum, in log space.

    chi2 = sum_{k,l} C(p,k) C(q,l) 2^-(p+q) (1 - a^2 (p-2k)(q-2l))^-n  -  1.
    """
    if b == 0.0:
        return 0.0
    a = amplitude(n, p, q, b)
    Us = np.arange(-p, p + 1, 2, dtype=float)
    Vs = np.arange(-q, q + 1, 2, dtype=float)
    x = a * a * Us[:, None] * Vs[None, :]
    if np.any(1.0 - x <= 0.0):
        raise DivergenceInfiniteError(
            "1 - a^2 U V <= 0 at some support point: the integral diverges"
        )
    k = np.arange(p + 1, dtype=float)
    l = np.arange(q + 1, dtype=float)
    logw_p = gammaln(p + 1) - gammaln(k + 1) - gammaln(p - k + 1) - p * math.log(2.0)
    logw_q = gammaln(q + 1) - gammaln(l + 1) - gammaln(q - l + 1) - q * math.log(2.0)
    logw = logw_p[::-1, None] + logw_q[::-1, None].T  # index order matches Us, Vs
    exponent = -n * np.log1p(-x)
    if np.max(exponent) < 500.0:
        # Small-value path: sum weighted expm1 terms with compensated
        # summation, accurate when chi2 is near 0.
        terms = np.exp(logw) * np.expm1(exponent)
        return math.fsum(np.sort(terms, axis=None))
    return float(np.expm1(logsumexp(logw + exponent)))


def chi_square_closed_bound(b: float) -> float:
    """Closed-form upper bound 4 b^2 log4 / (1 - b^2 log4), for b < 1/sqrt(log4)."""
    if not 0.0 < b < 1.0 / math.sqrt(LOG4):
        raise ValueError(f"b must lie in (0, 1/sqrt(log 4)), got {b}")
    x = b * b * LOG4
    return 4.0 * x / (1.0 - x)


def select_b(kappa: float, alpha: float, beta: float) -> float:
    """Largest signal constant satisfying every cap used in the bound chain.

    Takes the minimum of the divergence cap (beta-alpha)/(sqrt(log4)(1+beta-alpha))
    and the MGF cap 1/(2 sqrt(kappa)), shrunk by a strict-inequality margin.
    """
    if not (0.0 < alpha < beta < 1.0):
        raise ValueError("need 0 < alpha < beta < 1")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    gap = beta - alpha
    divergence_cap = gap / (math.sqrt(LOG4) * (1.0 + gap))
    mgf_cap = (1.0 - 1e-6) * 0.5 / math.sqrt(kappa)
    return min(divergence_cap, mgf_cap)


def minimax_power_upper(n: int, p: int, q: int, b: float, alpha: float) -> DivergenceReport:
    """Full report: exact chi2, closed bound, TV bound, and the power bound.

    power_upper = alpha + (1/2) sqrt(chi2_exact), since the squared L1
    distance is at most the chi-square divergence.
    """
    a = amplitude(n, p, q, b) if b > 0 else 0.0
    pd_ok = a * a * p * q < 1.0
    mgf_ok = mgf_validity(a, p, q) if pd_ok else False
    b_caps_ok = 0.0 <= b < 1.0 / math.sqrt(LOG4)
    chi2 = chi_square_exact(n, p, q, b)
    closed = chi_square_closed_bound(b) if (b_caps_ok and b > 0) else (0.0 if b == 0 else math.inf)
    tv = 0.5 * math.sqrt(max(chi2, 0.0))
    return DivergenceReport(
        chi2_exact=chi2,
        chi2_closed_bound=closed,
        tv_upper=tv,
        power_upper=alpha + tv,
        pd_ok=pd_ok,
        mgf_ok=mgf_ok,
        b_caps_ok=b_caps_ok,
    )


def hoeffding_tail_bound(p: int, q: int, b: float, mu: float) -> float:
    """Tail bound 4 * mu^(-1/(b^2 log4)) on P(|UV| >= (log mu / log 2) sqrt(pq)/b^2).

    This is the two-sided Hoeffding bound on the product of the two
    independent sign sums; p and q cancel out of the final expression.
    """
    if mu <= 1.0:
        raise ValueError("mu must exceed 1")
    if b <= 0:
        raise ValueError("b must be positive")
    return 4.0 * mu ** (-1.0 / (b * b * LOG4))
