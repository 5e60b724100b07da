"""
starisac - Secure beamforming for STAR-RIS aided MU-MIMO ISAC systems.

This package maximizes the sum secrecy rate of a dual-function base station
serving multi-antenna users through a simultaneously transmitting and
reflecting surface, while sensing targets that are treated as eavesdroppers:
- Scenario and channel generation (Rayleigh direct links, Rician surface links)
- Closed-form gradients and feasibility projections
- Penalty dual decomposition with monitored accelerated projected gradient
- STAR, conventional RIS and no-RIS benchmark variants
- Monte-Carlo sweeps, per-iteration timing and CSV/JSON outputs
"""

__version__ = "1.0.0"

# Import main classes and functions
from .factory import get_variant, solve_variant
from .base import BaseVariant
from .registry import list_variants, register_variant

# Import variant classes
from .star_ris import StarRisVariant
from .conventional_ris import ConventionalRisVariant
from .no_ris import NoRisVariant

from .scenario import ChannelSet, ScenarioConfig, build_geometry, generate_channels, load_scenario_config
from .model import (
    ReceiveBeamformers,
    SensingSpec,
    StarRisProfile,
    TransmitCovariances,
    augmented_objective,
    evaluate_solution,
    sum_secrecy_rate,
)
from .optimizer import PddResult, SolverOptions, run_inner, run_pdd
from .experiments import ExperimentPlan, emit_results, run_experiment, timing_base_config, timing_probe

# Import utilities
from .logger import logger
from .logging_mixin import LoggingMixin
from .validation import ConfigError, ContractViolation, DomainError, EvaluationError, ValidationUtils

__all__ = [
    # Version info
    "__version__",

    # Main factory functions
    "get_variant",
    "solve_variant",
    "list_variants",
    "register_variant",

    # Variants
    "BaseVariant",
    "StarRisVariant",
    "ConventionalRisVariant",
    "NoRisVariant",

    # Model
    "ScenarioConfig",
    "ChannelSet",
    "build_geometry",
    "generate_channels",
    "load_scenario_config",
    "TransmitCovariances",
    "StarRisProfile",
    "ReceiveBeamformers",
    "SensingSpec",
    "sum_secrecy_rate",
    "augmented_objective",
    "evaluate_solution",

    # Solver and experiments
    "SolverOptions",
    "PddResult",
    "run_inner",
    "run_pdd",
    "ExperimentPlan",
    "run_experiment",
    "timing_probe",
    "timing_base_config",
    "emit_results",

    # Utilities
    "logger",
    "LoggingMixin",
    "ValidationUtils",
    "ConfigError",
    "ContractViolation",
    "DomainError",
    "EvaluationError",
]
