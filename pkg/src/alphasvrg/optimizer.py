"""Unified alpha-SVRG loop and textbook SGD / SVRG reference loops.

The update is ``w_i = w_{i-1} - mu * g_i`` with

    g_i = grad Q(w_{i-1}; x_n) - alpha * grad Q(w_bar; x_n) + alpha * grad J(w_bar)

where the snapshot ``w_bar`` is refreshed at iterations ``1, m+1, 2m+1, ...``
and ``n`` is drawn uniformly from the run's SplitMix64 stream (see
:mod:`alphasvrg.rng`).  ``alpha = 0`` is SGD, ``alpha = 1`` is SVRG.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import kernels, problems, rng
from .problems import ProblemInstance


@dataclass(frozen=True)
class OptimizerConfig:
    alpha: float
    learning_rate: float
    snapshot_period: int
    max_iterations: int
    initial_model: np.ndarray | None = None
    run_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.learning_rate >= 0.0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.snapshot_period < 1:
            raise ValueError(f"snapshot_period must be >= 1, got {self.snapshot_period}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 <= int(self.run_seed) < 2 ** 64:
            raise ValueError("run_seed must be an unsigned 64-bit integer")

    def start(self, dim: int) -> np.ndarray:
        """Initial model, zeros unless one was given."""
        if self.initial_model is None:
            return np.zeros(dim)
        w0 = np.asarray(self.initial_model, dtype=np.float64)
        if w0.shape != (dim,):
            raise ValueError(f"initial_model has shape {w0.shape}, expected ({dim},)")
        if not np.isfinite(w0).all():
            raise ValueError("initial_model must be finite")
        return w0


@dataclass
class Trajectory:
    msd: np.ndarray
    final_model: np.ndarray
    samples_drawn: int
    full_gradients_computed: int

    @property
    def diverged(self) -> bool:
        return not math.isfinite(self.msd[-1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_msd_csv(buf, self.msd)
        return buf.getvalue()


def write_msd_csv(fh, msd) -> None:
    """Write ``iteration,msd`` rows; ``repr`` formatting, ``inf`` for divergence."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["iteration", "msd"])
    for i, v in enumerate(msd):
        writer.writerow([i, repr(float(v))])


def _check_reference(p: ProblemInstance, w_ref) -> np.ndarray:
    w_ref = np.asarray(w_ref, dtype=np.float64)
    if w_ref.shape != (p.dim,):
        raise ValueError(f"w_ref has shape {w_ref.shape}, expected ({p.dim},)")
    if not np.isfinite(w_ref).all():
        raise ValueError("w_ref must be finite")
    return w_ref


def alpha_svrg_gradient(p: ProblemInstance, w, w_bar, full_grad_bar, n: int, alpha: float) -> np.ndarray:
    """Control-variate gradient estimate for sample ``n``.

    Averaging over all ``n`` recovers ``full_gradient(p, w)`` for every
    ``alpha``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    full_grad_bar = np.asarray(full_grad_bar, dtype=np.float64)
    if full_grad_bar.shape != (p.dim,):
        raise ValueError(f"full_grad_bar has shape {full_grad_bar.shape}, expected ({p.dim},)")
    g = problems.loss_gradient(p, n, w)
    g_bar = problems.loss_gradient(p, n, w_bar)
    return g - alpha * g_bar + alpha * full_grad_bar


def run_many(p: ProblemInstance, w_ref, cfg: OptimizerConfig, seeds, backend=None) -> list[Trajectory]:
    """:func:`run` for each seed in ``seeds`` (``cfg.run_seed`` is ignored)."""
    w_ref = _check_reference(p, w_ref)
    w0 = cfg.start(p.dim)
    msd, final, steps, n_full = kernels.trajectories(
        p.features, p.labels, w_ref, w0, cfg.alpha, cfg.learning_rate,
        cfg.snapshot_period, cfg.max_iterations, seeds, backend=backend)
    return [Trajectory(msd[r], final[r], int(steps[r]), int(n_full[r])) for r in range(msd.shape[0])]


def run(p: ProblemInstance, w_ref, cfg: OptimizerConfig, backend=None) -> Trajectory:
    """Run the unified loop once and record ``||w_ref - w_i||^2`` for every i.

    A non-finite distance stops the run; the remaining entries are ``inf``.
    """
    return run_many(p, w_ref, cfg, [cfg.run_seed], backend=backend)[0]


# ---------------------------------------------------------------------------
# reference loops (test oracles)
# ---------------------------------------------------------------------------

def _reference_loop(p, w_ref, cfg, update):
    w_ref = _check_reference(p, w_ref)
    w = cfg.start(p.dim).copy()
    T = cfg.max_iterations
    msd = np.full(T + 1, np.inf)
    msd[0] = _sum_sq(w_ref - w)
    idx = rng.sample_indices([cfg.run_seed], 1, T + 1, p.n_samples)[0]
    state = {"full": 0}
    steps = T
    with np.errstate(all="ignore"):
        for i in range(1, T + 1):
            w = update(i, w, int(idx[i - 1]), state)
            d = _sum_sq(w_ref - w)
            if not math.isfinite(d):
                steps = i
                break
            msd[i] = d
    return Trajectory(msd, w, steps, state["full"])


def _sum_sq(e) -> float:
    d = 0.0
    for v in e:
        d += float(v) * float(v)
    return d


def run_reference_sgd(p: ProblemInstance, w_ref, cfg: OptimizerConfig) -> Trajectory:
    """Plain SGD, ``w_i = w_{i-1} - mu * grad Q(w_{i-1}; x_n)``.

    ``alpha`` and ``snapshot_period`` in ``cfg`` are ignored.
    """
    mu = cfg.learning_rate

    def update(i, w, n, state):
        return w - mu * problems.loss_gradient(p, n, w)

    return _reference_loop(p, w_ref, cfg, update)


def run_reference_svrg(p: ProblemInstance, w_ref, cfg: OptimizerConfig) -> Trajectory:
    """Plain SVRG with snapshot period ``cfg.snapshot_period``; ``alpha`` is ignored."""
    mu, m = cfg.learning_rate, cfg.snapshot_period
    snap = {}

    def update(i, w, n, state):
        if (i - 1) % m == 0:
            snap["w"] = w.copy()
            snap["g"] = problems.full_gradient(p, w)
            state["full"] += 1
        g = problems.loss_gradient(p, n, w) - problems.loss_gradient(p, n, snap["w"]) + snap["g"]
        return w - mu * g

    return _reference_loop(p, w_ref, cfg, update)
