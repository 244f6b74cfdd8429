"""Brute-force validators for the closed-form divergence machinery.

Everything here is deliberately independent of the closed forms it checks:
enumeration over sign vectors, dense eigendecompositions, and Monte-Carlo
integration of the exact density ratio.  Feasible only at tiny dimensions;
that is the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .structured_cov import LeastFavorableCov, amplitude, cov_det, cov_inverse

MAX_ENUM_DIM = 8  # 4^(p+q) quadruple enumeration cap
MAX_MC_DIM = 5
MAX_MC_N = 4


class InfeasibleSizeError(ValueError):
    """Requested brute-force computation is too large to enumerate."""


@dataclass(frozen=True)
class OracleReport:
    """Outcome of one closed-form vs brute-force comparison."""

    name: str
    closed_form: float
    brute_force: float
    tolerance: float

    @property
    def abs_err(self) -> float:
        return abs(self.closed_form - self.brute_force)

    @property
    def rel_err(self) -> float:
        scale = max(abs(self.closed_form), abs(self.brute_force))
        return self.abs_err / scale if scale > 0 else 0.0

    @property
    def passed(self) -> bool:
        if self.closed_form == 0.0 or self.brute_force == 0.0:
            return self.abs_err <= self.tolerance
        return self.rel_err <= self.tolerance


def _sign_vectors(d: int) -> np.ndarray:
    """All 2^d sign vectors as a (2^d, d) array."""
    return np.array(list(product((-1.0, 1.0), repeat=d)))


def enumerate_chi_square(n: int, p: int, q: int, b: float) -> float:
    """Average of (1 - a^2 (u'g)(v'h))^(-n) over all sign quadruples, minus 1.

    Exact 4^(p+q) enumeration; requires p + q <= 8.
    """
    if p + q > MAX_ENUM_DIM:
        raise InfeasibleSizeError(f"p+q = {p + q} exceeds enumeration cap {MAX_ENUM_DIM}")
    if b == 0.0:
        return 0.0
    a = amplitude(n, p, q, b)
    su = _sign_vectors(p)
    sv = _sign_vectors(q)
    ug = su @ su.T  # all u'g inner products
    vh = sv @ sv.T
    x = a * a * ug[:, :, None, None] * vh[None, None, :, :]
    if np.any(1.0 - x <= 0.0):
        raise ValueError("1 - a^2 (u'g)(v'h) <= 0: divergent configuration")
    terms = np.expm1(-n * np.log1p(-x))
    return math.fsum(np.sort(terms, axis=None)) / terms.size


def mc_chi_square(
    n: int, p: int, q: int, b: float, trials: int, rng: np.random.Generator, chunk: int = 50_000
) -> tuple[float, float]:
    """Monte-Carlo estimate of E_0[(f1/f0)^2] - 1 with the exact mixture ratio.

    Draws z_1..z_n ~ N(0, I) and evaluates the 2^(p+q)-component Gaussian
    mixture density ratio exactly through the dense inverse and determinant.
    Returns (estimate, standard error).
    """
    if p + q > MAX_MC_DIM or n > MAX_MC_N:
        raise InfeasibleSizeError(f"(p+q, n) = ({p + q}, {n}) exceeds MC caps ({MAX_MC_DIM}, {MAX_MC_N})")
    a = amplitude(n, p, q, b)
    su = _sign_vectors(p)
    sv = _sign_vectors(q)
    components = []
    for u in su:
        for v in sv:
            lf = LeastFavorableCov(u=u, v=v, a=a)
            # log-ratio of N(0, Sigma) to N(0, I) at z: -(n/2) log det
            # + (1/2) sum_i z_i'(I - Sigma^-1) z_i
            components.append((np.eye(p + q) - cov_inverse(lf), cov_det(lf)))
    m = len(components)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        batch = min(chunk, trials - done)
        z = rng.standard_normal((batch, n, p + q))
        log_ratios = np.empty((batch, m))
        for c, (delta, det) in enumerate(components):
            quad = np.einsum("bij,jk,bik->b", z, delta, z)
            log_ratios[:, c] = 0.5 * quad - 0.5 * n * math.log(det)
        peak = log_ratios.max(axis=1, keepdims=True)
        ratio = np.exp(peak[:, 0]) * np.exp(log_ratios - peak).mean(axis=1)
        sq = ratio * ratio
        total += float(sq.sum())
        total_sq += float((sq * sq).sum())
        done += batch
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    stderr = math.sqrt(var / trials)
    return mean - 1.0, stderr


def gamma_numeric(
    u: np.ndarray, v: np.ndarray, g: np.ndarray, h: np.ndarray, a: float
) -> np.ndarray:
    """Eigenvalues of S^(1/2) A S^(1/2) for the 4x4 covariance of the sign
    projections (u'z, v'z, g'z, h'z), computed by dense eigendecomposition.

    Returns the four eigenvalues sorted ascending.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    g = np.asarray(g, float)
    h = np.asarray(h, float)
    p, q = u.size, v.size
    ug = float(u @ g)
    vh = float(v @ h)
    A = np.array(
        [[-q * a, 1, 0, 0], [1, -p * a, 0, 0], [0, 0, -q * a, 1], [0, 0, 1, -p * a]],
        dtype=float,
    )
    # S has fixed eigenvectors (1,0,+-1,0)/sqrt(2), (0,1,0,+-1)/sqrt(2) with
    # eigenvalues p +- ug and q +- vh; forming the PSD square root from them
    # avoids the precision loss of a generic eigh near singular S.
    r2 = math.sqrt(2.0)
    V = np.array(
        [
            [1 / r2, 0, 1 / r2, 0],
            [0, 1 / r2, 0, 1 / r2],
            [1 / r2, 0, -1 / r2, 0],
            [0, 1 / r2, 0, -1 / r2],
        ]
    )
    w = np.array([p + ug, q + vh, p - ug, q - vh])
    sqrt_S = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return np.sort(np.linalg.eigvalsh(sqrt_S @ A @ sqrt_S))


def quad_form_pair(u, v, g, h, a: float, z: np.ndarray) -> tuple[float, float]:
    """Both sides of the identity T(u,v,z) + T(g,h,z) = chi' A chi.

    T(u,v,z) = 2(v'z)(u'z) - qa(u'z)^2 - pa(v'z)^2 with u, v acting on their
    own blocks of z.  Used to validate the 4x4 reduction on random z.
    """
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    g = np.asarray(g, float)
    h = np.asarray(h, float)
    p, q = u.size, v.size
    zx, zy = z[:p], z[p:]

    def T(uu, vv):
        uz = float(uu @ zx)
        vz = float(vv @ zy)
        return 2.0 * vz * uz - q * a * uz * uz - p * a * vz * vz

    lhs = T(u, v) + T(g, h)
    chi = np.array([u @ zx, v @ zy, g @ zx, h @ zy])
    A = np.array(
        [[-q * a, 1, 0, 0], [1, -p * a, 0, 0], [0, 0, -q * a, 1], [0, 0, 1, -p * a]],
        dtype=float,
    )
    rhs = float(chi @ A @ chi)
    return lhs, rhs


def _binomial_pmf(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Support and pmf of the sum of d independent +-1 signs."""
    k = np.arange(d + 1)
    logw = (
        np.vectorize(math.lgamma)(d + 1.0)
        - np.vectorize(math.lgamma)(k + 1.0)
        - np.vectorize(math.lgamma)(d - k + 1.0)
        - d * math.log(2.0)
    )
    return d - 2.0 * k, np.exp(logw)


def enumerate_uv_tail(p: int, q: int, threshold: float) -> float:
    """Exact P(|UV| >= threshold) for the product of the two sign sums."""
    if p > 12 or q > 12:
        raise InfeasibleSizeError("p, q must be <= 12 for exact tail enumeration")
    U, wu = _binomial_pmf(p)
    V, wv = _binomial_pmf(q)
    prod = np.abs(U[:, None] * V[None, :])
    w = wu[:, None] * wv[None, :]
    return float(w[prod >= threshold].sum())
