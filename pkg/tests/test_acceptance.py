"""End-to-end acceptance checks; each test reports one PASS/FAIL line.

The lines are collected into an "acceptance criteria" section of the
pytest terminal summary.
"""
import csv
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from alphasvrg import cli, experiments, noiselab, problems, theory
from alphasvrg.experiments import ExperimentConfig
from alphasvrg.optimizer import (OptimizerConfig, alpha_svrg_gradient, run, run_many,
                                 run_reference_sgd, run_reference_svrg)


@pytest.fixture(scope="session")
def figure1(tmp_path_factory):
    """Default-config ``fig1`` run through the CLI, parsed back from its CSV."""
    out = tmp_path_factory.mktemp("fig1_first")
    assert cli.main(["fig1", "--out", str(out)]) == 0
    path = out / "figure1.csv"
    rows = {}
    for r in csv.DictReader(open(path)):
        rows[(float(r["noise_level"]), float(r["alpha"]))] = {
            k: float(r[k]) for k in ("i_star_mean", "ci_low", "ci_high")}
    return path, rows


def test_1_reduction_equivalence(acceptance_report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    mismatches = 0
    for k in range(20):
        p = problems.generate(50, 2, float(rng.choice([0.1, 1.0, 1.5])), int(rng.integers(2 ** 32)))
        T = int(rng.integers(50, 300))
        w0 = rng.standard_normal(2)
        seed = int(rng.integers(2 ** 63))
        mu = float(rng.uniform(0.005, 0.05))
        sgd = OptimizerConfig(0.0, mu, 1, T, w0, seed)
        svrg = OptimizerConfig(1.0, mu, int(rng.integers(1, 60)), T, w0, seed)
        for cfg, ref in ((sgd, run_reference_sgd), (svrg, run_reference_svrg)):
            a, b = run(p, p.minimizer, cfg), ref(p, p.minimizer, cfg)
            if not (np.array_equal(a.msd, b.msd) and np.array_equal(a.final_model, b.final_model)):
                mismatches += 1
    elapsed = time.perf_counter() - start
    ok = acceptance_report("1 reduction equivalence", mismatches == 0 and elapsed < 1.0,
                           f"{mismatches} mismatches over 40 comparisons, {elapsed:.2f}s")
    assert ok


def test_2_unbiasedness(acceptance_report):
    rng = np.random.default_rng(7)
    p = problems.generate(50, 2, 1.0, 77)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        w, wb = rng.standard_normal((2, 2)) * 3
        a = float(rng.random())
        fb = problems.full_gradient(p, wb)
        avg = sum(alpha_svrg_gradient(p, w, wb, fb, n, a) for n in range(p.n_samples)) / p.n_samples
        full = problems.full_gradient(p, w)
        worst = max(worst, np.linalg.norm(avg - full) / np.linalg.norm(full))
    elapsed = time.perf_counter() - start
    ok = acceptance_report("2 unbiasedness", worst <= 1e-12 and elapsed < 1.0,
                           f"max relative error {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_3_noise_bounds(acceptance_report):
    alphas = [0.0, 0.25, 0.5, 0.75, 1.0]
    total, worst = 0, 0.0
    for seed in range(5):
        p = problems.generate(50, 2, [0.1, 1.0, 1.5, 0.5, 0.0][seed], 3000 + seed)
        for r in noiselab.check_lemma_bounds(p, alphas, 1000, seed=seed):
            total += r.violations
            worst = max(worst, r.max_ratio)
    ok = acceptance_report("3 noise variance bounds", total == 0,
                           f"{total} violations over 5 instances x 5 alphas x 1000 points, max ratio {worst:.3f}")
    assert ok


def test_4_bound_reductions(acceptance_report):
    rng = np.random.default_rng(11)
    worst = 0.0

    def track(a, b):
        nonlocal worst
        worst = max(worst, abs(a - b) / abs(b) if b else abs(a))

    for _ in range(100):
        p = problems.generate(50, 2, float(rng.uniform(0, 2)), int(rng.integers(2 ** 32)))
        c = problems.constants(p)
        msd0 = float(rng.uniform(0.1, 10))
        eps = float(rng.uniform(1e-3, 1e-2))
        # alpha = 0, m = 1
        mu = float(rng.uniform(0.01, 0.99)) * theory.stability_step_limit(c, 0.0, 1)
        k = int(rng.integers(0, 200))
        b = theory.convergence_bound(theory.BoundInputs(c, 0.0, mu, 1, eps, msd0))
        track(b.at_epoch(k), (1 - mu * c.nu) ** k * msd0 + 3 * mu * c.sigma_sq / c.nu)
        # alpha = 1
        m = int(math.floor(theory.snapshot_period_floor(c, 1.0))) + int(rng.integers(1, 200))
        mu = float(rng.uniform(0.01, 0.99)) * min(c.nu / (9 * c.delta_sq), 1 / (m * c.nu))
        k = int(rng.integers(0, 50))
        b = theory.convergence_bound(theory.BoundInputs(c, 1.0, mu, m, eps, msd0))
        track(b.at_epoch(k), ((1 - mu * c.nu) ** m + 8 * mu * c.delta_sq / c.nu) ** k * msd0)
        # complexities
        i1 = theory.iteration_complexity(theory.BoundInputs(c, 1.0, mu, m, eps, msd0))
        rate = min(c.nu / (9 * c.delta_sq), 1 / (m * c.nu))
        track(i1, 2 * math.log(msd0 / eps) / (rate * (c.nu - 16 * c.delta_sq / (m * c.nu))))
        i0 = theory.iteration_complexity(theory.BoundInputs(c, 0.0, mu, 1, eps, msd0))
        rate = min(eps * c.nu / (6 * c.sigma_sq), c.nu / (7 * c.delta_sq))
        track(i0, 2 * math.log(2 * msd0 / eps) / (rate * c.nu))
    ok = acceptance_report("4 bound reductions", worst <= 1e-12, f"max relative error {worst:.2e}")
    assert ok


def test_5_convergence_bound_dominates(acceptance_report):
    p = problems.generate(50, 2, 1.0, 5150)
    c = problems.constants(p)
    msd0 = float(c.minimizer @ c.minimizer)
    seeds = np.arange(1, 201, dtype=np.uint64)
    details, ok = [], True
    for alpha in (0.2, 0.5, 1.0):
        m = int(math.floor(theory.snapshot_period_floor(c, alpha))) + 1
        mu = 0.5 * theory.stability_step_limit(c, alpha, m)
        bound = theory.convergence_bound(theory.BoundInputs(c, alpha, mu, m, 5e-3, msd0))
        runs = run_many(p, c.minimizer, OptimizerConfig(alpha, mu, m, 20 * m), seeds)
        mean = np.mean([t.msd[::m] for t in runs], axis=0)
        ratio = max(mean[k] / bound.at_epoch(k) for k in range(21))
        ok &= ratio <= 1.05
        details.append(f"alpha={alpha} m={m} max empirical/bound {ratio:.3f}")
    acceptance_report("5 convergence bound dominance", ok, "; ".join(details))
    assert ok


def _cell(rows, noise, alpha):
    return rows[(noise, alpha)]


def test_6a_low_noise_prefers_sgd(figure1, acceptance_report):
    _, rows = figure1
    sgd, svrg = _cell(rows, 0.1, 0.0), _cell(rows, 0.1, 1.0)
    ok = sgd["i_star_mean"] < svrg["i_star_mean"] and sgd["ci_high"] < svrg["ci_low"]
    acceptance_report("6a noise 0.1: alpha=0 beats alpha=1", ok,
                      f"alpha=0 {sgd['i_star_mean']:.1f} [{sgd['ci_low']:.1f}, {sgd['ci_high']:.1f}], "
                      f"alpha=1 {svrg['i_star_mean']:.1f} [{svrg['ci_low']:.1f}, {svrg['ci_high']:.1f}]")
    assert ok


def test_6b_high_noise_prefers_svrg(figure1, acceptance_report):
    _, rows = figure1
    sgd, svrg = _cell(rows, 1.5, 0.0), _cell(rows, 1.5, 1.0)
    ok = svrg["i_star_mean"] < sgd["i_star_mean"] and svrg["ci_high"] < sgd["ci_low"]
    acceptance_report("6b noise 1.5: alpha=1 beats alpha=0", ok,
                      f"alpha=1 {svrg['i_star_mean']:.1f} [{svrg['ci_low']:.1f}, {svrg['ci_high']:.1f}], "
                      f"alpha=0 {sgd['i_star_mean']:.1f} [{sgd['ci_low']:.1f}, {sgd['ci_high']:.1f}]")
    assert ok


def test_6c_moderate_noise_interior_minimum(figure1, acceptance_report):
    _, rows = figure1
    curve = {a: v["i_star_mean"] for (noise, a), v in rows.items() if noise == 1.0}
    best = min(curve.values())
    argmins = [a for a, v in curve.items() if v == best]
    ok = any(0.0 < a < 1.0 for a in argmins)
    acceptance_report("6c noise 1.0: interior alpha is best", ok,
                      f"minimum {best:.1f} at alpha in {argmins}; "
                      + ", ".join(f"{a:g}:{v:.0f}" for a, v in sorted(curve.items())))
    assert ok


def test_7_regime_rule(figure1, acceptance_report):
    _, rows = figure1
    ec = ExperimentConfig()
    ok, details = True, []
    for k, noise in enumerate(ec.noise_levels):
        cs = [problems.constants(experiments.make_problem(ec, k, r)) for r in range(ec.n_repetitions)]
        noise_term = 6 * np.mean([c.sigma_sq for c in cs])
        target_term = 8 * ec.epsilon * np.mean([c.delta_sq for c in cs])
        predicted = (theory.Regime.PREFER_SMALL_ALPHA if noise_term < target_term
                     else theory.Regime.PREFER_LARGE_ALPHA)
        sgd, svrg = _cell(rows, noise, 0.0)["i_star_mean"], _cell(rows, noise, 1.0)["i_star_mean"]
        observed = theory.Regime.PREFER_SMALL_ALPHA if sgd < svrg else theory.Regime.PREFER_LARGE_ALPHA
        decisive = max(noise_term, target_term) > 2 * min(noise_term, target_term)
        if decisive:
            ok &= predicted is observed
        details.append(f"noise {noise}: 6s2={noise_term:.3f} 8eps*d2={target_term:.3f} "
                       f"predicted {predicted.value} observed {observed.value}"
                       + ("" if decisive else " (not decisive)"))
    acceptance_report("7 regime rule", ok, "; ".join(details))
    assert ok


def test_8_determinism(figure1, tmp_path, acceptance_report):
    first, _ = figure1
    proc = subprocess.run([sys.executable, "-m", "alphasvrg", "fig1", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    ok = (tmp_path / "figure1.csv").read_bytes() == first.read_bytes()
    acceptance_report("8 determinism", ok, "two fig1 invocations (separate processes) produce "
                      + ("byte-identical" if ok else "different") + " CSVs")
    assert ok
