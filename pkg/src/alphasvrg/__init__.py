"""alpha-SVRG on strongly convex least squares: optimizer, bounds and experiments."""
from ._backend import BACKEND
from .experiments import ExperimentConfig
from .optimizer import OptimizerConfig, Trajectory, alpha_svrg_gradient, run
from .problems import ProblemConstants, ProblemInstance, constants, generate

__all__ = [
    "BACKEND",
    "ExperimentConfig",
    "OptimizerConfig",
    "ProblemConstants",
    "ProblemInstance",
    "Trajectory",
    "alpha_svrg_gradient",
    "constants",
    "generate",
    "run",
]
__version__ = "0.1.0"
