"""Leader-follower equilibria for threshold-verified vector computations.

Geometry of balls and caps, the acceptance/error kernels, the adversary's
characteristic curve, the leader-follower solver and a Monte-Carlo oracle.
"""

from .errors import ConfigurationError, DegenerateInputError, DomainError
from .frontier import CharacteristicCurve, Locus, c_eta, characteristic_curve, phi_inverse, sweep, upper_concave_envelope
from .game import (
    EquilibriumReport,
    SingleShell,
    TwoShellMixture,
    UtilitySpec,
    best_response,
    build_noise,
    evaluate_utility,
    optimal_eta,
    worst_case_dc_value,
)
from .kernels import GameParams, KernelSample, cut_point, phi, psi

__version__ = "0.1.0"

__all__ = [
    "CharacteristicCurve",
    "ConfigurationError",
    "DegenerateInputError",
    "DomainError",
    "EquilibriumReport",
    "GameParams",
    "KernelSample",
    "Locus",
    "SingleShell",
    "TwoShellMixture",
    "UtilitySpec",
    "best_response",
    "build_noise",
    "c_eta",
    "characteristic_curve",
    "cut_point",
    "evaluate_utility",
    "optimal_eta",
    "phi",
    "phi_inverse",
    "psi",
    "sweep",
    "upper_concave_envelope",
    "worst_case_dc_value",
]
