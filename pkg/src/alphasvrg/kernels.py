"""Hot loops of the unified alpha-SVRG iteration.

Two interchangeable implementations live here:

* ``numba`` kernels, one scalar loop per run;
* ``numpy`` kernels, stepping all runs in lockstep with array ops.

Every floating-point operation is performed in the same order in both, so
their outputs are bit-identical.  The canonical order, shared with
:mod:`alphasvrg.problems`, is

* residual: ``((h0*w0 + h1*w1) + ...) - y``
* per-sample gradient: ``(2*h_j) * residual``
* full gradient: rows summed first to last, then divided by ``N``
* estimator: ``(g(w) - alpha*g(w_bar)) + alpha*full_grad(w_bar)``
* msd: ``((e0*e0 + e1*e1) + ...)`` with ``e = w_ref - w``

Module-level ``trajectories`` and ``hitting_iteration`` dispatch to the
backend chosen in :mod:`alphasvrg._backend`.
"""
import numpy as np

from . import rng
from ._backend import HAS_NUMBA, USE_NUMBA, njit

_CHUNK = 4096


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

@njit
def _nb_sample(seed, i, n):
    z = seed + np.uint64(i) * rng.GOLDEN_GAMMA
    z = (z ^ (z >> rng.S30)) * rng.MIX1
    z = (z ^ (z >> rng.S27)) * rng.MIX2
    z = z ^ (z >> rng.S31)
    return np.int64(((z >> rng.S32) * np.uint64(n)) >> rng.S32)


@njit
def _nb_full_gradient(H, y, W, r, out):
    N, M = H.shape
    for j in range(M):
        out[r, j] = 0.0
    for n in range(N):
        dot = H[n, 0] * W[r, 0]
        for j in range(1, M):
            dot += H[n, j] * W[r, j]
        res = dot - y[n]
        for j in range(M):
            out[r, j] += (2.0 * H[n, j]) * res
    for j in range(M):
        out[r, j] /= N


# The alpha == 0 case is a separate function: branching on alpha inside one
# step function blocks LLVM optimizations and costs ~5x per iteration.
@njit
def _nb_step_sgd(H, y, W, r, mu, n):
    M = H.shape[1]
    dot = H[n, 0] * W[r, 0]
    for j in range(1, M):
        dot += H[n, j] * W[r, j]
    res = dot - y[n]
    for j in range(M):
        W[r, j] = W[r, j] - mu * ((2.0 * H[n, j]) * res)


@njit
def _nb_step_vr(H, y, W, W_bar, F_bar, r, alpha, mu, n):
    M = H.shape[1]
    dot = H[n, 0] * W[r, 0]
    for j in range(1, M):
        dot += H[n, j] * W[r, j]
    res = dot - y[n]
    dot_b = H[n, 0] * W_bar[r, 0]
    for j in range(1, M):
        dot_b += H[n, j] * W_bar[r, j]
    res_b = dot_b - y[n]
    for j in range(M):
        h2 = 2.0 * H[n, j]
        g = h2 * res - alpha * (h2 * res_b) + alpha * F_bar[r, j]
        W[r, j] = W[r, j] - mu * g


@njit
def _nb_sqdist(w_ref, W, r):
    d = 0.0
    for j in range(w_ref.shape[0]):
        e = w_ref[j] - W[r, j]
        d += e * e
    return d


@njit
def _nb_trajectories(H, y, w_ref, w0, alpha, mu, m, n_iter, seeds):
    N, M = H.shape
    R = seeds.shape[0]
    msd = np.empty((R, n_iter + 1))
    W = np.empty((R, M))
    W_bar = np.empty((R, M))
    F_bar = np.zeros((R, M))
    steps = np.zeros(R, dtype=np.int64)
    n_full = np.zeros(R, dtype=np.int64)
    vr = alpha != 0.0
    for r in range(R):
        for j in range(M):
            W[r, j] = w0[j]
        msd[r, 0] = _nb_sqdist(w_ref, W, r)
        seed = seeds[r]
        done = n_iter
        for i in range(1, n_iter + 1):
            if (i - 1) % m == 0:
                for j in range(M):
                    W_bar[r, j] = W[r, j]
                if vr:
                    _nb_full_gradient(H, y, W_bar, r, F_bar)
                    n_full[r] += 1
            n = _nb_sample(seed, i, N)
            if vr:
                _nb_step_vr(H, y, W, W_bar, F_bar, r, alpha, mu, n)
            else:
                _nb_step_sgd(H, y, W, r, mu, n)
            d = _nb_sqdist(w_ref, W, r)
            if not np.isfinite(d):
                for k in range(i, n_iter + 1):
                    msd[r, k] = np.inf
                done = i
                break
            msd[r, i] = d
        steps[r] = done
    return msd, W, steps, n_full


@njit
def _nb_hitting_iteration(H, y, w_ref, w0, alpha, mu, m, n_iter, seeds, eps):
    N, M = H.shape
    R = seeds.shape[0]
    W = np.empty((R, M))
    W_bar = np.empty((R, M))
    F_bar = np.zeros((R, M))
    vr = alpha != 0.0
    acc = 0.0
    for r in range(R):
        for j in range(M):
            W[r, j] = w0[j]
        acc += _nb_sqdist(w_ref, W, r)
    if acc / R <= eps:
        return 0
    for i in range(1, n_iter + 1):
        if (i - 1) % m == 0:
            for r in range(R):
                for j in range(M):
                    W_bar[r, j] = W[r, j]
                if vr:
                    _nb_full_gradient(H, y, W_bar, r, F_bar)
        acc = 0.0
        for r in range(R):
            n = _nb_sample(seeds[r], i, N)
            if vr:
                _nb_step_vr(H, y, W, W_bar, F_bar, r, alpha, mu, n)
            else:
                _nb_step_sgd(H, y, W, r, mu, n)
            acc += _nb_sqdist(w_ref, W, r)
        mean = acc / R
        if not np.isfinite(mean):
            return -1
        if mean <= eps:
            return i
    return -1


# ---------------------------------------------------------------------------
# numpy
# ---------------------------------------------------------------------------

def _np_rowdot(A, B):
    out = A[..., 0] * B[..., 0]
    for j in range(1, A.shape[-1]):
        out = out + A[..., j] * B[..., j]
    return out


def _np_sqdist(w_ref, W):
    E = w_ref[None, :] - W
    return _np_rowdot(E, E)


def _np_full_gradients(H, y, W):
    """Full gradient at each row of ``W``; shape (R, M)."""
    res = _np_rowdot(H[None, :, :], W[:, None, :]) - y[None, :]
    G = (2.0 * H)[None, :, :] * res[:, :, None]
    return np.cumsum(G, axis=1)[:, -1, :] / H.shape[0]


def _np_step(H, y, W, W_bar, F_bar, alpha, mu, idx):
    h = H[idx]
    h2 = 2.0 * h
    res = _np_rowdot(h, W) - y[idx]
    if alpha != 0.0:
        res_b = _np_rowdot(h, W_bar) - y[idx]
        g = h2 * res[:, None] - alpha * (h2 * res_b[:, None]) + alpha * F_bar
    else:
        g = h2 * res[:, None]
    return W - mu * g


def _np_trajectories(H, y, w_ref, w0, alpha, mu, m, n_iter, seeds):
    N, M = H.shape
    R = seeds.shape[0]
    msd = np.full((R, n_iter + 1), np.inf)
    W = np.tile(w0, (R, 1))
    W_bar = W.copy()
    F_bar = np.zeros((R, M))
    steps = np.full(R, n_iter, dtype=np.int64)
    n_full = np.zeros(R, dtype=np.int64)
    alive = np.ones(R, dtype=bool)
    msd[:, 0] = _np_sqdist(w_ref, W)
    with np.errstate(all="ignore"):
        for lo in range(1, n_iter + 1, _CHUNK):
            hi = min(lo + _CHUNK, n_iter + 1)
            table = rng.sample_indices(seeds, lo, hi, N)
            for i in range(lo, hi):
                if (i - 1) % m == 0:
                    W_bar = np.where(alive[:, None], W, W_bar)
                    if alpha != 0.0:
                        F_bar = np.where(alive[:, None], _np_full_gradients(H, y, W_bar), F_bar)
                        n_full += alive
                W_new = _np_step(H, y, W, W_bar, F_bar, alpha, mu, table[:, i - lo])
                W = np.where(alive[:, None], W_new, W)
                d = _np_sqdist(w_ref, W)
                died = alive & ~np.isfinite(d)
                steps[died] = i
                alive &= ~died
                msd[alive, i] = d[alive]
                if not alive.any():
                    return msd, W, steps, n_full
    return msd, W, steps, n_full


def _np_hitting_iteration(H, y, w_ref, w0, alpha, mu, m, n_iter, seeds, eps):
    N, M = H.shape
    R = seeds.shape[0]
    W = np.tile(w0, (R, 1))
    W_bar = W.copy()
    F_bar = np.zeros((R, M))
    if np.cumsum(_np_sqdist(w_ref, W))[-1] / R <= eps:
        return 0
    with np.errstate(all="ignore"):
        for lo in range(1, n_iter + 1, _CHUNK):
            hi = min(lo + _CHUNK, n_iter + 1)
            table = rng.sample_indices(seeds, lo, hi, N)
            for i in range(lo, hi):
                if (i - 1) % m == 0:
                    W_bar = W.copy()
                    if alpha != 0.0:
                        F_bar = _np_full_gradients(H, y, W_bar)
                W = _np_step(H, y, W, W_bar, F_bar, alpha, mu, table[:, i - lo])
                mean = np.cumsum(_np_sqdist(w_ref, W))[-1] / R
                if not np.isfinite(mean):
                    return -1
                if mean <= eps:
                    return i
    return -1


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_IMPLS = {"numpy": (_np_trajectories, _np_hitting_iteration)}
if HAS_NUMBA:
    _IMPLS["numba"] = (_nb_trajectories, _nb_hitting_iteration)


def available_backends():
    return sorted(_IMPLS)


def _prepare(H, y, w_ref, w0, seeds):
    return (
        np.ascontiguousarray(H, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(w_ref, dtype=np.float64),
        np.ascontiguousarray(w0, dtype=np.float64),
        np.ascontiguousarray(np.atleast_1d(seeds), dtype=np.uint64),
    )


def trajectories(H, y, w_ref, w0, alpha, mu, m, n_iter, seeds, backend=None):
    """Run one unified alpha-SVRG loop per seed.

    Returns ``(msd, final, steps, n_full)``: the ``(R, n_iter + 1)`` squared
    distances to ``w_ref`` (``inf`` after divergence), the final iterates,
    the number of updates executed and the number of full gradients taken.
    """
    impl = _IMPLS[backend or ("numba" if USE_NUMBA else "numpy")][0]
    H, y, w_ref, w0, seeds = _prepare(H, y, w_ref, w0, seeds)
    return impl(H, y, w_ref, w0, float(alpha), float(mu), int(m), int(n_iter), seeds)


def hitting_iteration(H, y, w_ref, w0, alpha, mu, m, n_iter, seeds, eps, backend=None):
    """First index at which the across-seed mean msd is ``<= eps``, or -1.

    Equivalent to scanning the mean of :func:`trajectories` but stops as
    soon as the target is met or any run diverges.
    """
    impl = _IMPLS[backend or ("numba" if USE_NUMBA else "numpy")][1]
    H, y, w_ref, w0, seeds = _prepare(H, y, w_ref, w0, seeds)
    return int(impl(H, y, w_ref, w0, float(alpha), float(mu), int(m), int(n_iter), seeds, float(eps)))
