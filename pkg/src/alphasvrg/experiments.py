"""Iteration-complexity study on synthetic linear regression.

For every observation-noise level and every alpha, each repetition draws a
fresh problem, sweeps the learning-rate grid, and records the first
iteration at which the MSD averaged over ``n_inner_runs`` seeded runs drops
to ``epsilon``.  Repetitions are summarised by their mean and a normal
95% interval.

Seeds are derived from ``master_seed`` and the cell coordinates only::

    data seed        SeedSequence([master_seed, 0, noise_index, repetition])
    run-seed stream  SeedSequence([master_seed, 1, noise_index, repetition])

so every alpha and learning rate of one repetition sees the same sample
streams, and results do not depend on evaluation order.
"""
from __future__ import annotations

import csv
import dataclasses
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels, problems, rng, svgplot, theory
from .optimizer import OptimizerConfig, run_many
from .problems import ProblemInstance

log = logging.getLogger(__name__)

Z95 = 1.959963984540054


class ConfigError(ValueError):
    pass


def _default_alphas():
    return tuple(round(0.1 * k, 10) for k in range(11))


def _default_mus():
    return tuple(round(float(v), 12) for v in np.linspace(0.05, 0.6, 12))


@dataclass(frozen=True)
class ExperimentConfig:
    n_samples: int = 50
    dim: int = 2
    snapshot_period: int = 50
    epsilon: float = 5e-3
    noise_levels: tuple = (0.1, 1.0, 1.5)
    alpha_grid: tuple = field(default_factory=_default_alphas)
    mu_grid: tuple = field(default_factory=_default_mus)
    n_repetitions: int = 10
    n_inner_runs: int = 10
    max_iterations: int = 20 * 50 * 50
    master_seed: int = 0
    feature_variance: float = 1.0
    fixed_data: bool = False

    def __post_init__(self):
        for name in ("noise_levels", "alpha_grid", "mu_grid"):
            value = tuple(float(v) for v in getattr(self, name))
            if not value:
                raise ConfigError(f"{name}: grid must be non-empty")
            object.__setattr__(self, name, value)
        checks = {
            "n_samples": self.n_samples >= self.dim,
            "dim": self.dim >= 1,
            "snapshot_period": self.snapshot_period >= 1,
            "epsilon": self.epsilon > 0,
            "noise_levels": all(v >= 0 for v in self.noise_levels),
            "alpha_grid": all(0 <= v <= 1 for v in self.alpha_grid),
            "mu_grid": all(v >= 0 for v in self.mu_grid),
            "n_repetitions": self.n_repetitions >= 1,
            "n_inner_runs": self.n_inner_runs >= 1,
            "max_iterations": self.max_iterations >= 1,
            "master_seed": 0 <= self.master_seed < 2 ** 64,
            "feature_variance": self.feature_variance > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ConfigError(f"{name}: invalid value {getattr(self, name)!r}")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _parse_value(name, raw, typ):
    try:
        if typ == "tuple":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if typ == "bool":
            low = raw.strip().lower()
            if low not in {"true", "false", "1", "0", "yes", "no"}:
                raise ValueError(raw)
            return low in {"true", "1", "yes"}
        if typ == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw.strip()!r} as {typ}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` lines; lists are comma-separated, ``#`` starts a comment."""
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        values[key] = _parse_value(key, raw, types[key])
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def format_config(ec: ExperimentConfig) -> str:
    lines = []
    for f in dataclasses.fields(ec):
        v = getattr(ec, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------

def data_seed(ec: ExperimentConfig, noise_index: int, repetition: int) -> int:
    rep = 0 if ec.fixed_data else repetition
    return int(np.random.SeedSequence([ec.master_seed, 0, noise_index, rep]).generate_state(1, np.uint64)[0])


def run_seed_stream(ec: ExperimentConfig, noise_index: int, repetition: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([ec.master_seed, 1, noise_index, repetition])


def make_problem(ec: ExperimentConfig, noise_index: int, repetition: int) -> ProblemInstance:
    return problems.generate(ec.n_samples, ec.dim, ec.noise_levels[noise_index],
                             data_seed(ec, noise_index, repetition), ec.feature_variance)


# ---------------------------------------------------------------------------
# empirical iteration complexity
# ---------------------------------------------------------------------------

def mean_msd_trajectory(p: ProblemInstance, w_ref, base_cfg: OptimizerConfig, n_inner_runs: int,
                        seed_stream, backend=None) -> np.ndarray:
    """Element-wise mean MSD of ``n_inner_runs`` runs differing only in their seed.

    Run seeds are the first ``n_inner_runs`` words of ``seed_stream``.  An
    ``inf`` entry in any run makes the mean ``inf`` at that index.
    """
    if n_inner_runs < 1:
        raise ValueError("n_inner_runs must be >= 1")
    seeds = rng.spawn_seeds(seed_stream, n_inner_runs)
    msd = np.stack([t.msd for t in run_many(p, w_ref, base_cfg, seeds, backend=backend)])
    return np.cumsum(msd, axis=0)[-1] / n_inner_runs


def first_hitting_iteration(mean_msd, epsilon: float):
    """Smallest ``i`` with ``mean_msd[i] <= epsilon``, or ``None``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    hits = np.flatnonzero(np.asarray(mean_msd) <= epsilon)
    return int(hits[0]) if hits.size else None


def estimate_iteration_complexity(p: ProblemInstance, w_ref, alpha: float, ec: ExperimentConfig,
                                  repetition_seed, backend=None):
    """Best first-hitting iteration over ``ec.mu_grid`` and the step size attaining it.

    Returns ``(None, None)`` when no step size reaches ``ec.epsilon`` within
    ``ec.max_iterations``.  Ties go to the earlier grid entry.
    """
    seeds = rng.spawn_seeds(repetition_seed, ec.n_inner_runs)
    w0 = np.zeros(p.dim)
    best, best_mu = None, None
    for mu in ec.mu_grid:
        hit = kernels.hitting_iteration(p.features, p.labels, w_ref, w0, alpha, mu, ec.snapshot_period,
                                        ec.max_iterations, seeds, ec.epsilon, backend=backend)
        if hit >= 0 and (best is None or hit < best):
            best, best_mu = hit, mu
    return best, best_mu


@dataclass(frozen=True)
class ComplexityEstimate:
    """Repetition summary for one (noise level, alpha) cell.

    Repetitions that never reach the target enter the mean censored at
    ``max_iterations + 1``; ``unreachable`` is set when any did.
    """

    alpha: float
    noise_level: float
    i_star_mean: float
    ci_low: float
    ci_high: float
    best_mu: float
    unreachable: bool
    values: tuple = ()
    n_unreached: int = 0


def summarize(alpha, noise_level, hits, mus, budget) -> ComplexityEstimate:
    values = np.array([budget + 1 if h is None else h for h in hits], dtype=np.float64)
    n = values.size
    mean = float(np.mean(values))
    half = Z95 * float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    reached = [mu for mu in mus if mu is not None]
    if reached:
        counts = Counter(reached)
        best_mu = min(counts, key=lambda mu: (-counts[mu], mu))
    else:
        best_mu = math.nan
    n_unreached = sum(h is None for h in hits)
    return ComplexityEstimate(alpha, noise_level, mean, mean - half, mean + half, best_mu,
                              n_unreached > 0, tuple(values), n_unreached)


def figure1_estimates(ec: ExperimentConfig, backend=None) -> list[ComplexityEstimate]:
    """All (noise level, alpha) cells, ordered by noise level then alpha."""
    rows = []
    for k, noise in enumerate(ec.noise_levels):
        hits = {a: [] for a in ec.alpha_grid}
        mus = {a: [] for a in ec.alpha_grid}
        for rep in range(ec.n_repetitions):
            p = make_problem(ec, k, rep)
            w_ref = p.minimizer
            stream = run_seed_stream(ec, k, rep)
            for a in ec.alpha_grid:
                h, mu = estimate_iteration_complexity(p, w_ref, a, ec, stream, backend=backend)
                hits[a].append(h)
                mus[a].append(mu)
        log.info("noise level %g done", noise)
        rows.extend(summarize(a, noise, hits[a], mus[a], ec.max_iterations) for a in ec.alpha_grid)
    return rows


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

FIGURE1_COLUMNS = ["noise_level", "alpha", "i_star_mean", "ci_low", "ci_high", "best_mu", "unreachable"]
THEORY_COLUMNS = ["noise_level", "alpha", "snapshot_period", "nu", "delta_sq", "sigma_sq", "initial_msd",
                  "snapshot_floor", "max_learning_rate", "iteration_complexity", "valid", "regime"]


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def write_figure1_csv(rows, path) -> Path:
    path = Path(path)
    _write_csv(path, FIGURE1_COLUMNS, [dataclasses.asdict(r) for r in rows])
    return path


def write_figure1_svg(rows, path, ec: ExperimentConfig | None = None) -> Path:
    series = []
    for noise in dict.fromkeys(r.noise_level for r in rows):
        sel = [r for r in rows if r.noise_level == noise]
        series.append(svgplot.Series(
            label=f"noise variance {noise:g}",
            x=[r.alpha for r in sel],
            y=[r.i_star_mean for r in sel],
            lo=[r.ci_low for r in sel],
            hi=[r.ci_high for r in sel],
        ))
    title = "Iteration complexity vs alpha"
    if ec is not None:
        title += f" (N={ec.n_samples}, m={ec.snapshot_period}, eps={ec.epsilon:g})"
    svg = svgplot.line_chart(series, xlabel="alpha", ylabel="iteration complexity", title=title, log_y=True)
    path = Path(path)
    path.write_text(svg)
    return path


def run_figure1(ec: ExperimentConfig, out_dir, backend=None) -> list[Path]:
    """Write ``figure1.csv`` and ``figure1.svg`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = figure1_estimates(ec, backend=backend)
    return [write_figure1_csv(rows, out_dir / "figure1.csv"),
            write_figure1_svg(rows, out_dir / "figure1.svg", ec)]


def theory_rows(ec: ExperimentConfig) -> list[dict]:
    """Closed-form complexity per (noise level, alpha) on each level's first problem."""
    rows = []
    for k, noise in enumerate(ec.noise_levels):
        p = make_problem(ec, k, 0)
        c = problems.constants(p)
        msd0 = float(c.minimizer @ c.minimizer)
        for a in ec.alpha_grid:
            row = {
                "noise_level": noise, "alpha": a, "snapshot_period": ec.snapshot_period,
                "nu": c.nu, "delta_sq": c.delta_sq, "sigma_sq": c.sigma_sq, "initial_msd": msd0,
                "snapshot_floor": theory.snapshot_period_floor(c, a),
                "max_learning_rate": None, "iteration_complexity": None, "valid": False,
                "regime": theory.regime(c, ec.epsilon).value,
            }
            inputs = theory.BoundInputs(c, a, 1.0, ec.snapshot_period, ec.epsilon, msd0)
            try:
                row["max_learning_rate"] = theory.max_learning_rate(c, a, ec.snapshot_period, ec.epsilon)
                row["iteration_complexity"] = theory.iteration_complexity(inputs)
                row["valid"] = True
            except theory.ConstraintError:
                pass
            rows.append(row)
    return rows


def run_theory_overlay(ec: ExperimentConfig, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "theory.csv"
    _write_csv(path, THEORY_COLUMNS, theory_rows(ec))
    return [path]
