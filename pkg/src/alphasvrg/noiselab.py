"""Exact gradient-noise variance versus the closed-form noise bound.

With uniform sampling over ``N`` known points the expectation of the
estimator's squared error is a finite average, so the bounds in
:func:`alphasvrg.theory.noise_bound` can be checked without Monte Carlo.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import problems, theory
from .problems import ProblemInstance


@dataclass(frozen=True)
class NoiseCheckReport:
    alpha: float
    test_points: int
    max_ratio: float
    violations: int


def exact_noise_variance(p: ProblemInstance, w, w_bar, alpha: float) -> float:
    """``(1/N) sum_n ||grad J(w) - g_n||^2`` for the alpha-SVRG estimates ``g_n``."""
    G = problems.per_sample_gradients(p, w)
    G_bar = problems.per_sample_gradients(p, w_bar)
    full = problems.full_gradient(p, w)
    full_bar = problems.full_gradient(p, w_bar)
    D = full - (G - alpha * G_bar + alpha * full_bar)
    return float(np.mean(np.einsum("ij,ij->i", D, D)))


def _ball(rng, count, dim, center, radius):
    u = rng.standard_normal((count, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / dim)
    return center + r[:, None] * u


def sample_points(p: ProblemInstance, n_points: int, seed) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random ``(w, w_bar)`` pairs, uniform in the ball of radius ``10 ||w^o||`` about ``w^o``."""
    w_o = p.minimizer
    radius = 10.0 * max(float(np.linalg.norm(w_o)), 1e-3)
    rng = np.random.default_rng(seed)
    W = _ball(rng, n_points, p.dim, w_o, radius)
    W_bar = _ball(rng, n_points, p.dim, w_o, radius)
    return list(zip(W, W_bar))


def check_lemma_bounds(p: ProblemInstance, alpha_grid, n_points: int = 1000, seed=0,
                       points=None) -> list[NoiseCheckReport]:
    """Compare the exact noise variance with the bound at every point and alpha.

    The same points are used for every alpha.  A point counts as a
    violation when the exact variance exceeds the bound by more than a
    relative ``1e-12``; the ratio is 0 where both are 0.
    """
    alpha_grid = [float(a) for a in alpha_grid]
    for a in alpha_grid:
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {a}")
    if points is None:
        points = sample_points(p, n_points, seed)
    c = problems.constants(p)
    w_o = c.minimizer
    reports = []
    for a in alpha_grid:
        worst, bad = 0.0, 0
        for w, w_bar in points:
            exact = exact_noise_variance(p, w, w_bar, a)
            e, e_bar = w_o - w, w_o - w_bar
            bound = theory.noise_bound(c, a, float(e @ e), float(e_bar @ e_bar))
            if exact > bound * (1 + 1e-12):
                bad += 1
            if bound > 0:
                ratio = exact / bound
            else:
                ratio = 0.0 if exact == 0 else np.inf
            worst = max(worst, ratio)
        reports.append(NoiseCheckReport(a, len(points), worst, bad))
    return reports
