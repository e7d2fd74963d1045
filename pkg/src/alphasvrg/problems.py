"""Synthetic least-squares problems and their exact regularity constants.

Samples follow ``gamma_n = h_n . w_star + v_n`` with ``v_n ~ N(0, noise_variance)``
and the per-sample loss is ``Q(w; x_n) = (h_n . w - gamma_n)**2``.  All
arithmetic that the optimizer kernels repeat is written in the same
operation order as :mod:`alphasvrg.kernels` so the two agree bit for bit.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

MAX_GENERATION_ATTEMPTS = 100


class DegenerateProblemError(RuntimeError):
    """Raised when no positive-definite design could be drawn."""


class SingularHessianError(ValueError):
    pass


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ProblemInstance:
    """Finite-sum least-squares dataset.

    ``features`` is ``(N, M)``, ``labels`` is ``(N,)``.  ``ground_truth`` is
    the generator's model, not the empirical-risk minimizer; use
    :attr:`minimizer` (or :func:`constants`) for the latter.
    """

    features: np.ndarray
    labels: np.ndarray
    ground_truth: np.ndarray
    noise_variance: float = 0.0
    data_seed: int = 0

    def __post_init__(self):
        H = _readonly(self.features)
        y = _readonly(self.labels)
        w_star = _readonly(self.ground_truth)
        if H.ndim != 2 or y.ndim != 1 or H.shape[0] != y.shape[0] or H.shape[0] < 1:
            raise ValueError(f"features {H.shape} and labels {y.shape} must describe N >= 1 samples")
        if w_star.shape != (H.shape[1],):
            raise ValueError(f"ground_truth has shape {w_star.shape}, expected ({H.shape[1]},)")
        if not (np.isfinite(H).all() and np.isfinite(y).all() and np.isfinite(w_star).all()):
            raise ValueError("problem data must be finite")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")
        object.__setattr__(self, "features", H)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "ground_truth", w_star)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @cached_property
    def hessian(self) -> np.ndarray:
        """``(2/N) * sum_n h_n h_n^T``, the constant Hessian of the risk."""
        H = self.features
        return _readonly(2.0 * (H.T @ H) / self.n_samples)

    @cached_property
    def minimizer(self) -> np.ndarray:
        """Empirical-risk minimizer from the normal equations."""
        H, y = self.features, self.labels
        try:
            w = np.linalg.solve(H.T @ H, H.T @ y)
        except np.linalg.LinAlgError as exc:
            raise SingularHessianError("normal equations are singular") from exc
        # one step of iterative refinement on the normal equations
        w = w - np.linalg.solve(H.T @ H, H.T @ (H @ w - y))
        return _readonly(w)


def _check_vector(p: ProblemInstance, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (p.dim,):
        raise ValueError(f"model has shape {w.shape}, expected ({p.dim},)")
    return w


def _residuals(H, y, w):
    dot = H[:, 0] * w[0]
    for j in range(1, H.shape[1]):
        dot = dot + H[:, j] * w[j]
    return dot - y


def _min_eigenvalue(S: np.ndarray) -> float:
    if S.shape == (2, 2):
        a, b, c = S[0, 0], S[0, 1], S[1, 1]
        mean = 0.5 * (a + c)
        radius = np.hypot(0.5 * (a - c), b)
        top = mean + radius
        # det / top avoids cancellation in mean - radius
        return float((a * c - b * b) / top) if top > 0 else float(mean - radius)
    return float(np.linalg.eigvalsh(S)[0])


def _is_positive_definite(H: np.ndarray) -> bool:
    S = 2.0 * (H.T @ H) / H.shape[0]
    return _min_eigenvalue(S) > 1e-12 * max(1.0, float(np.trace(S)))


def generate(n_samples: int, dim: int, noise_variance: float, data_seed: int,
             feature_variance: float = 1.0) -> ProblemInstance:
    """Draw a linear-regression instance.

    The ground truth and the observation noise come from
    ``default_rng(data_seed)``.  Features come from
    ``default_rng([data_seed, attempt])`` and are redrawn (``attempt`` =
    0, 1, ...) until the empirical Hessian is positive definite.
    """
    if dim < 1 or n_samples < dim:
        raise ValueError(f"need n_samples >= dim >= 1, got n_samples={n_samples}, dim={dim}")
    if noise_variance < 0 or feature_variance <= 0:
        raise ValueError("noise_variance must be >= 0 and feature_variance > 0")
    data_seed = int(data_seed)
    stream = np.random.default_rng(data_seed)
    w_star = stream.standard_normal(dim)
    noise = np.sqrt(noise_variance) * stream.standard_normal(n_samples)
    for attempt in range(MAX_GENERATION_ATTEMPTS):
        H = np.sqrt(feature_variance) * np.random.default_rng([data_seed, attempt]).standard_normal((n_samples, dim))
        if _is_positive_definite(H):
            break
    else:
        raise DegenerateProblemError(
            f"no positive-definite design after {MAX_GENERATION_ATTEMPTS} attempts (seed {data_seed})")
    # same summation order as the residuals, so a noise-free model fits exactly
    labels = _residuals(H, -noise, w_star)
    return ProblemInstance(H, labels, w_star, float(noise_variance), data_seed)


def risk(p: ProblemInstance, w) -> float:
    w = _check_vector(p, w)
    r = _residuals(p.features, p.labels, w)
    return float(np.mean(r * r))


def loss(p: ProblemInstance, n: int, w) -> float:
    """Single-sample loss ``(h_n . w - gamma_n)**2``."""
    n = _check_index(p, n)
    res = _residuals(p.features[n:n + 1], p.labels[n:n + 1], _check_vector(p, w))[0]
    return float(res * res)


def _check_index(p: ProblemInstance, n: int) -> int:
    if not 0 <= n < p.n_samples:
        raise IndexError(f"sample index {n} out of range for N={p.n_samples}")
    return int(n)


def per_sample_gradients(p: ProblemInstance, w) -> np.ndarray:
    """All per-sample loss gradients at ``w`` as an ``(N, M)`` array."""
    w = _check_vector(p, w)
    res = _residuals(p.features, p.labels, w)
    return (2.0 * p.features) * res[:, None]


def loss_gradient(p: ProblemInstance, n: int, w) -> np.ndarray:
    n = _check_index(p, n)
    w = _check_vector(p, w)
    h = p.features[n]
    res = _residuals(h[None, :], p.labels[n:n + 1], w)[0]
    return (2.0 * h) * res


def full_gradient(p: ProblemInstance, w) -> np.ndarray:
    """Exact risk gradient; per-sample gradients summed first to last."""
    return np.cumsum(per_sample_gradients(p, w), axis=0)[-1] / p.n_samples


@dataclass(frozen=True)
class ProblemConstants:
    nu: float
    delta_sq: float
    sigma_sq: float
    per_sample_delta: np.ndarray
    minimizer: np.ndarray


def constants(p: ProblemInstance) -> ProblemConstants:
    """Exact strong-convexity and smoothness constants of ``p``.

    ``delta_n = 2 ||h_n||^2`` is the tight Lipschitz constant of the
    per-sample gradient; ``nu`` is the smallest Hessian eigenvalue.
    """
    nu = _min_eigenvalue(p.hessian)
    if not nu > 0:
        raise SingularHessianError(f"risk Hessian is not positive definite (min eigenvalue {nu})")
    H = p.features
    delta_n = 2.0 * np.einsum("ij,ij->i", H, H)
    w_o = p.minimizer
    G = per_sample_gradients(p, w_o)
    sigma_sq = float(np.mean(np.einsum("ij,ij->i", G, G)))
    return ProblemConstants(
        nu=nu,
        delta_sq=float(np.mean(delta_n ** 2)),
        sigma_sq=sigma_sq,
        per_sample_delta=_readonly(delta_n),
        minimizer=w_o,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def save(p: ProblemInstance, csv_path) -> Path:
    """Write samples to ``csv_path`` and metadata to ``csv_path`` + ``.json``.

    Floats use ``repr`` so a round trip is exact.
    """
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"h{j}" for j in range(p.dim)] + ["gamma"])
        for h, g in zip(p.features, p.labels):
            writer.writerow([repr(float(v)) for v in h] + [repr(float(g))])
    header = {
        "n_samples": p.n_samples,
        "dim": p.dim,
        "ground_truth": [float(v) for v in p.ground_truth],
        "noise_variance": p.noise_variance,
        "data_seed": p.data_seed,
    }
    meta_path = csv_path.with_name(csv_path.name + ".json")
    meta_path.write_text(json.dumps(header, indent=2) + "\n")
    return meta_path


def load(csv_path) -> ProblemInstance:
    csv_path = Path(csv_path)
    header = json.loads(csv_path.with_name(csv_path.name + ".json").read_text())
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
    if data.shape != (header["n_samples"], header["dim"] + 1):
        raise ValueError(f"{csv_path}: data shape {data.shape} disagrees with header")
    return ProblemInstance(data[:, :-1], data[:, -1], header["ground_truth"],
                           float(header["noise_variance"]), int(header["data_seed"]))
