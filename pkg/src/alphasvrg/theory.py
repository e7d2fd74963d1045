"""Closed-form noise, convergence and iteration-complexity bounds.

All functions take a :class:`~alphasvrg.problems.ProblemConstants` (or any
object with ``nu``, ``delta_sq`` and ``sigma_sq``).  Learning-rate
constraints are treated as strict inequalities throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .problems import ProblemConstants


class ConstraintError(ValueError):
    """A step-size or snapshot-period precondition does not hold."""


class Regime(enum.Enum):
    PREFER_SMALL_ALPHA = "PreferSmallAlpha"
    PREFER_LARGE_ALPHA = "PreferLargeAlpha"


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


def _safe_div(num, den):
    return math.inf if den == 0 else num / den


# ---------------------------------------------------------------------------
# gradient noise
# ---------------------------------------------------------------------------

def noise_bound(constants: ProblemConstants, alpha: float, msd_w: float, msd_wbar: float) -> float:
    """Upper bound on ``E||grad J(w) - g||^2`` for the alpha-SVRG estimator ``g``.

    ``(2a + 6) d2 msd_w + 8 a d2 msd_wbar + 3 (1 - a) s2``; at ``alpha=0`` this
    is the SGD bound and at ``alpha=1`` the SVRG bound.
    """
    _check_alpha(alpha)
    if msd_w < 0 or msd_wbar < 0:
        raise ValueError("squared distances must be nonnegative")
    d2, s2 = constants.delta_sq, constants.sigma_sq
    return (2 * alpha + 6) * d2 * msd_w + 8 * alpha * d2 * msd_wbar + 3 * (1 - alpha) * s2


# ---------------------------------------------------------------------------
# step-size and snapshot constraints
# ---------------------------------------------------------------------------

def snapshot_period_floor(constants: ProblemConstants, alpha: float) -> float:
    """``16 alpha delta^2 / nu^2``; admissible periods are strictly larger."""
    return 16 * alpha * constants.delta_sq / constants.nu ** 2


def _require_period(constants, alpha, m):
    floor = snapshot_period_floor(constants, alpha)
    if not m > floor:
        raise ConstraintError(f"snapshot period m={m} must exceed 16*alpha*delta^2/nu^2 = {floor:.6g}")


def stability_step_limit(constants: ProblemConstants, alpha: float, m: int) -> float:
    """``min{nu / ((2a + 7) d2), 1 / (m nu)}``, the strict upper limit on mu."""
    nu, d2 = constants.nu, constants.delta_sq
    return min(nu / ((2 * alpha + 7) * d2), 1.0 / (m * nu))


def target_step_limit(constants: ProblemConstants, alpha: float, epsilon: float) -> float:
    """Step size that keeps the steady-state term at or below ``epsilon / 2``.

    ``nu / (8 d2 a + 6 s2 (1 - a) / eps)``; infinite when the denominator is 0.
    """
    nu, d2, s2 = constants.nu, constants.delta_sq, constants.sigma_sq
    return _safe_div(nu, 8 * d2 * alpha + 6 * s2 * (1 - alpha) / epsilon)


def max_learning_rate(constants: ProblemConstants, alpha: float, m: int, epsilon: float) -> float:
    _check_alpha(alpha)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    _require_period(constants, alpha, m)
    return min(stability_step_limit(constants, alpha, m), target_step_limit(constants, alpha, epsilon))


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundInputs:
    constants: ProblemConstants
    alpha: float
    mu: float
    m: int
    epsilon: float
    initial_msd: float

    def __post_init__(self):
        _check_alpha(self.alpha)
        if self.mu <= 0 or self.m < 1 or self.epsilon <= 0 or self.initial_msd < 0:
            raise ValueError("need mu > 0, m >= 1, epsilon > 0, initial_msd >= 0")


@dataclass(frozen=True)
class ConvergenceBound:
    """Epoch-level bound ``E||w^o - w_{km}||^2 <= base**k * msd_0 + steady_state``."""

    contraction_per_epoch: float
    steady_state: float
    valid: bool
    inputs: BoundInputs

    def at_epoch(self, k: int) -> float:
        return self.contraction_per_epoch ** k * self.inputs.initial_msd + self.steady_state

    # per-iteration recursion E e_i <= A e_{i-1} + B e_snap + C
    @property
    def _A(self):
        x = self.inputs
        c = x.constants
        return 1 - 2 * x.mu * c.nu + (2 * x.alpha + 7) * x.mu ** 2 * c.delta_sq

    @property
    def _B(self):
        x = self.inputs
        return 8 * x.alpha * x.constants.delta_sq * x.mu ** 2

    @property
    def _C(self):
        x = self.inputs
        return 3 * (1 - x.alpha) * x.constants.sigma_sq * x.mu ** 2

    # epoch recursion E e_{(k+1)m} <= A_tilde E e_{km} + B_tilde
    @property
    def _A_tilde(self):
        x = self.inputs
        c = x.constants
        q = (1 - x.mu * c.nu) ** x.m
        return q + 8 * x.alpha * c.delta_sq * x.mu * (1 - q) / c.nu

    @property
    def _B_tilde(self):
        x = self.inputs
        c = x.constants
        q = (1 - x.mu * c.nu) ** x.m
        return 3 * (1 - x.alpha) * x.mu * c.sigma_sq * (1 - q) / c.nu

    @property
    def _A_upper(self):
        x = self.inputs
        c = x.constants
        return 1 - x.mu * c.nu * x.m / 2 + 8 * x.alpha * c.delta_sq * x.mu / c.nu


def convergence_violations(inputs: BoundInputs) -> list[str]:
    c, a = inputs.constants, inputs.alpha
    out = []
    if not inputs.mu < c.nu / ((2 * a + 7) * c.delta_sq):
        out.append("mu < nu / ((2*alpha + 7) * delta^2)")
    if not inputs.mu < 1.0 / (inputs.m * c.nu):
        out.append("mu < 1 / (m * nu)")
    if not inputs.m > snapshot_period_floor(c, a):
        out.append("m > 16 * alpha * delta^2 / nu^2")
    return out


def convergence_bound(inputs: BoundInputs, check: bool = True) -> ConvergenceBound:
    """Contraction base and steady state of the alpha-SVRG epoch bound.

    With ``check=False`` a bound is returned even when the preconditions
    fail, flagged ``valid=False`` (its values are then meaningless).
    """
    violated = convergence_violations(inputs)
    if violated and check:
        raise ConstraintError("violated: " + "; ".join(violated))
    c, a, mu, m = inputs.constants, inputs.alpha, inputs.mu, inputs.m
    base = (1 - mu * c.nu) ** m + 8 * mu * c.delta_sq * a / c.nu
    steady = 3 * mu * c.sigma_sq * (1 - a) / (c.nu - 8 * mu * c.delta_sq * a)
    return ConvergenceBound(base, steady, not violated, inputs)


def sgd_convergence_bound(constants: ProblemConstants, mu: float, i: int, initial_msd: float) -> float:
    """Classical SGD bound ``(1 - mu nu)^i msd_0 + 3 mu s2 / nu`` (mu < nu / 7 d2)."""
    if not mu < constants.nu / (7 * constants.delta_sq):
        raise ConstraintError("violated: mu < nu / (7 * delta^2)")
    return (1 - mu * constants.nu) ** i * initial_msd + 3 * mu * constants.sigma_sq / constants.nu


def svrg_convergence_bound(constants: ProblemConstants, mu: float, m: int, k: int, initial_msd: float) -> float:
    """Classical SVRG epoch bound ``((1 - mu nu)^m + 8 mu d2 / nu)^k msd_0``."""
    nu, d2 = constants.nu, constants.delta_sq
    if not (mu < min(nu / (9 * d2), 1 / (m * nu)) and m > 16 * d2 / nu ** 2):
        raise ConstraintError("violated: mu < min{nu/(9 delta^2), 1/(m nu)} and m > 16 delta^2/nu^2")
    return ((1 - mu * nu) ** m + 8 * mu * d2 / nu) ** k * initial_msd


# ---------------------------------------------------------------------------
# iteration complexity
# ---------------------------------------------------------------------------

def iteration_complexity(inputs: BoundInputs) -> float:
    """Sufficient number of updates to reach ``epsilon`` under the best step size.

    ``inputs.mu`` is not used; the step size is :func:`max_learning_rate`.
    The value is negative when ``initial_msd`` is already below
    ``epsilon (1 + alpha) / 2``.
    """
    c, a, m, eps = inputs.constants, inputs.alpha, inputs.m, inputs.epsilon
    rate = max_learning_rate(c, a, m, eps)
    drift = c.nu - 16 * c.delta_sq * a / (m * c.nu)
    if not drift > 0:
        raise ConstraintError(f"nu - 16*alpha*delta^2/(m*nu) = {drift:.6g} must be positive")
    if inputs.initial_msd == 0:
        return -math.inf
    return 2 * math.log(2 * inputs.initial_msd / (eps * (1 + a))) / (rate * drift)


def epoch_complexity(inputs: BoundInputs) -> float:
    return iteration_complexity(inputs) / inputs.m


def sgd_iteration_complexity(constants: ProblemConstants, epsilon: float, initial_msd: float) -> float:
    """Classical SGD complexity ``ln(2 msd_0 / eps) / (min{eps nu / 6 s2, nu / 7 d2} nu)``."""
    nu = constants.nu
    rate = min(_safe_div(epsilon * nu, 6 * constants.sigma_sq), nu / (7 * constants.delta_sq))
    return math.log(2 * initial_msd / epsilon) / (rate * nu)


def svrg_iteration_complexity(constants: ProblemConstants, m: int, epsilon: float, initial_msd: float) -> float:
    """Classical SVRG complexity ``2 ln(msd_0 / eps) / (min{nu / 9 d2, 1 / m nu} (nu - 16 d2 / m nu))``."""
    nu, d2 = constants.nu, constants.delta_sq
    drift = nu - 16 * d2 / (m * nu)
    if not drift > 0:
        raise ConstraintError(f"m={m} must exceed 16*delta^2/nu^2 = {16 * d2 / nu ** 2:.6g}")
    return 2 * math.log(initial_msd / epsilon) / (min(nu / (9 * d2), 1 / (m * nu)) * drift)


def regime(constants: ProblemConstants, epsilon: float) -> Regime:
    """Which end of the alpha range enlarges the admissible step size.

    Small stochasticity (``6 s2 < 8 eps d2``) favours small alpha.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if 6 * constants.sigma_sq < 8 * epsilon * constants.delta_sq:
        return Regime.PREFER_SMALL_ALPHA
    return Regime.PREFER_LARGE_ALPHA
