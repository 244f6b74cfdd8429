"""Built-in oracle comparison sweep behind the `verify` subcommand.

Each entry pits a closed form against an independent brute-force computation
at tiny dimensions and reports the worst-case discrepancy.  Aggregate rows
use closed_form = 0 as the target with brute_force holding the observed
maximum error.
"""

from __future__ import annotations

import math

import numpy as np

from . import divergence as dv
from . import oracles
from . import structured_cov as sc


def _row(name: str, closed: float, brute: float, tol: float, passed: bool | None = None) -> dict:
    abs_err = abs(closed - brute)
    scale = max(abs(closed), abs(brute))
    rel_err = abs_err / scale if scale > 0 else 0.0
    if passed is None:
        passed = (abs_err <= tol) if (closed == 0.0 or brute == 0.0) else (rel_err <= tol)
    return {
        "name": name,
        "closed_form": closed,
        "brute_force": brute,
        "abs_err": abs_err,
        "rel_err": rel_err,
        "pass": bool(passed),
    }


def run_suite(seed: int = 0, inject_fault: bool = False) -> list[dict]:
    rng = np.random.default_rng([seed, 0xFACADE])
    rows: list[dict] = []

    # Chi-square: binomial closed form vs full sign-quadruple enumeration.
    for (p, q) in [(1, 1), (2, 2), (3, 2), (4, 4)]:
        for n in (1, 5):
            for b in (0.1, 0.3):
                closed = dv.chi_square_exact(n, p, q, b)
                brute = oracles.enumerate_chi_square(n, p, q, b)
                rows.append(_row(f"chi2_enum_p{p}q{q}n{n}b{b:g}", closed, brute, 1e-12))

    # Eigenvalue closed form vs dense eigendecomposition; product identity.
    max_eig_err = 0.0
    max_prod_err = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 7))
        q = int(rng.integers(1, 7))
        u = rng.choice([-1.0, 1.0], p)
        g = rng.choice([-1.0, 1.0], p)
        v = rng.choice([-1.0, 1.0], q)
        h = rng.choice([-1.0, 1.0], q)
        a = float(rng.uniform(0.01, 0.9 / math.sqrt(p * q)))
        quad = dv.gamma_eigs(a, p, q, int(u @ g), int(v @ h))
        closed = np.sort(np.array(quad.gammas))
        if inject_fault:
            closed = closed * (1.0 + 1e-3)
        numeric = oracles.gamma_numeric(u, v, g, h, a)
        max_eig_err = max(max_eig_err, float(np.max(np.abs(closed - numeric))))
        prod = float(np.prod(1.0 - quad.t * closed))
        target = ((1.0 - a * a * (u @ g) * (v @ h)) / (1.0 - a * a * p * q)) ** 2
        max_prod_err = max(max_prod_err, abs(prod - target) / abs(target))
    rows.append(_row("gamma_eigs_max_abs_err", 0.0, max_eig_err, 1e-8))
    rows.append(_row("gamma_product_identity_max_rel_err", 0.0, max_prod_err, 1e-10))

    # Sherman-Morrison inverse, determinant, and square root vs dense oracles.
    max_inv = max_det = max_sqrt = 0.0
    for _ in range(100):
        p = int(rng.integers(1, 11))
        q = int(rng.integers(1, 11))
        a = float(rng.uniform(0.0, 0.95)) / math.sqrt(p * q)
        lf = sc.LeastFavorableCov(u=rng.choice([-1.0, 1.0], p), v=rng.choice([-1.0, 1.0], q), a=a)
        dense = sc.dense_cov(lf)
        max_inv = max(max_inv, float(np.max(np.abs(dense @ sc.cov_inverse(lf) - np.eye(p + q)))))
        det = np.linalg.det(dense)
        max_det = max(max_det, abs(sc.cov_det(lf) - det) / abs(det))
        z = rng.standard_normal(p + q)
        max_sqrt = max(max_sqrt, float(np.max(np.abs(sc.cov_sqrt_apply(lf, sc.cov_sqrt_apply(lf, z)) - dense @ z))))
    rows.append(_row("sherman_morrison_inverse_max_abs_err", 0.0, max_inv, 1e-10))
    rows.append(_row("determinant_max_rel_err", 0.0, max_det, 1e-10))
    rows.append(_row("sqrt_composition_max_abs_err", 0.0, max_sqrt, 1e-10))

    # Quadratic-form reduction to the 4x4 representation.
    max_quad = 0.0
    for _ in range(200):
        p = int(rng.integers(1, 7))
        q = int(rng.integers(1, 7))
        u = rng.choice([-1.0, 1.0], p)
        g = rng.choice([-1.0, 1.0], p)
        v = rng.choice([-1.0, 1.0], q)
        h = rng.choice([-1.0, 1.0], q)
        a = float(rng.uniform(0.01, 0.5 / math.sqrt(p * q)))
        z = rng.standard_normal(p + q)
        lhs, rhs = oracles.quad_form_pair(u, v, g, h, a, z)
        max_quad = max(max_quad, abs(lhs - rhs))
    rows.append(_row("quad_form_identity_max_abs_err", 0.0, max_quad, 1e-10))

    # Hoeffding tail bound dominates the exact sign-sum tail.
    worst_violation = 0.0
    for (p, q) in [(3, 3), (5, 4), (6, 6)]:
        for b in (0.2, 0.4):
            for mu in (1.5, 2.0, math.e, 10.0):
                threshold = (math.log(mu) / math.log(2.0)) * math.sqrt(p * q) / (b * b)
                exact = oracles.enumerate_uv_tail(p, q, threshold)
                bound = dv.hoeffding_tail_bound(p, q, b, mu)
                worst_violation = max(worst_violation, exact - bound)
    rows.append(_row("hoeffding_tail_dominates", 0.0, max(worst_violation, 0.0), 0.0,
                     passed=worst_violation <= 0.0))

    # (1-x)^(-1/x) <= 4 on x in [-10, 1/2], excluding 0.
    grid = np.concatenate([np.linspace(-10.0, -1e-6, 20001), np.linspace(1e-6, 0.5, 20001)])
    vals = np.exp(-np.log1p(-grid) / grid)
    excess = float(np.max(vals - 4.0))
    rows.append(_row("one_minus_x_pow_bound", 0.0, max(excess, 0.0), 0.0, passed=excess <= 1e-12))

    # Monte-Carlo validation of the Gaussian-integral derivation (small run).
    est, se = oracles.mc_chi_square(2, 1, 1, 0.4, trials=40_000, rng=np.random.default_rng([seed, 1]))
    closed = dv.chi_square_exact(2, 1, 1, 0.4)
    rows.append(_row("mc_chi2_p1q1n2b0.4", closed, est, 4.0 * se, passed=abs(est - closed) <= 4.0 * se))

    return rows
