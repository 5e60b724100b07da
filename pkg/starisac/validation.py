"""
Validation utilities for the STAR-RIS ISAC solver.
Provides feasibility predicates, configuration checks, and contract-violation logging.
"""

import json
import logging
from typing import Any, Dict, Iterable, Optional

import numpy as np

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid scenario, solver, or experiment configuration."""


class DomainError(ValueError):
    """Numeric argument outside the domain of an operation."""


class ContractViolation(ValueError):
    """A documented pre-condition of an operation does not hold."""


class EvaluationError(RuntimeError):
    """An objective or constraint quantity could not be evaluated."""


class ValidationUtils:
    """Utility class for feasibility and configuration checks."""

    HERMITIAN_TOL = 1e-10
    PSD_TOL = -1e-9
    POWER_TOL = 1e-9
    CIRCLE_TOL = 1e-10
    UNIT_NORM_TOL = 1e-10

    # Count fields that must be >= 1 (n_ris_elements may be 0 for NoRIS)
    POSITIVE_COUNT_FIELDS = ("n_tx", "n_rx", "n_user_antennas", "n_users", "n_targets")

    KNOWN_VARIANTS = ("STAR", "cRIS", "NoRIS")

    @classmethod
    def is_hermitian(cls, mat: np.ndarray, tol: Optional[float] = None) -> bool:
        """
        Check Hermitian symmetry by the max absolute asymmetry.

        Args:
            mat: Square matrix or stack of square matrices
            tol: Allowed max |X - X^H| entry

        Returns:
            bool: True if Hermitian within tolerance
        """
        tol = cls.HERMITIAN_TOL if tol is None else tol
        mat = np.asarray(mat)
        if mat.ndim < 2 or mat.shape[-1] != mat.shape[-2]:
            return False
        if mat.size == 0:
            return True
        asym = np.max(np.abs(mat - np.conj(np.swapaxes(mat, -1, -2))))
        return bool(asym <= tol)

    @classmethod
    def is_psd(cls, mat: np.ndarray, tol: Optional[float] = None) -> bool:
        """Check that every matrix in a (stack of) Hermitian matrices has min eigenvalue >= tol."""
        tol = cls.PSD_TOL if tol is None else tol
        mat = np.asarray(mat)
        if mat.size == 0:
            return True
        sym = 0.5 * (mat + np.conj(np.swapaxes(mat, -1, -2)))
        return bool(np.min(np.linalg.eigvalsh(sym)) >= tol)

    @classmethod
    def is_finite(cls, *arrays: Any) -> bool:
        return all(bool(np.all(np.isfinite(np.asarray(a)))) for a in arrays)

    @classmethod
    def within_power_budget(cls, mats: np.ndarray, p_max: float) -> bool:
        total = float(np.real(np.trace(np.asarray(mats), axis1=-2, axis2=-1)).sum())
        return total <= p_max + cls.POWER_TOL

    @classmethod
    def on_power_split_circle(cls, theta_r: np.ndarray, theta_t: np.ndarray,
                              tol: Optional[float] = None) -> bool:
        """Check |theta_mR|^2 + |theta_mT|^2 = 1 for every element."""
        tol = cls.CIRCLE_TOL if tol is None else tol
        power = np.abs(theta_r) ** 2 + np.abs(theta_t) ** 2
        return bool(np.all(np.abs(power - 1.0) <= tol))

    @classmethod
    def is_unit_norm(cls, vectors: np.ndarray, tol: Optional[float] = None) -> bool:
        """Check every row vector has unit squared norm."""
        tol = cls.UNIT_NORM_TOL if tol is None else tol
        vectors = np.atleast_2d(vectors)
        norms = np.sum(np.abs(vectors) ** 2, axis=-1)
        return bool(np.all(np.abs(norms - 1.0) <= tol))

    @classmethod
    def validate_config_dict(cls, config: Dict[str, Any]) -> list:
        """
        Validate scenario configuration values.

        Args:
            config: Mapping with ScenarioConfig field names

        Returns:
            list: Human-readable problems; empty when the config is valid
        """
        problems = []

        for name in cls.POSITIVE_COUNT_FIELDS:
            value = config.get(name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                problems.append(f"{name} must be an integer >= 1, got {value!r}")

        variant = config.get("system_variant")
        if variant not in cls.KNOWN_VARIANTS:
            problems.append(f"system_variant must be one of {cls.KNOWN_VARIANTS}, got {variant!r}")

        n_ris = config.get("n_ris_elements")
        if not isinstance(n_ris, (int, np.integer)) or isinstance(n_ris, bool) or n_ris < 0:
            problems.append(f"n_ris_elements must be an integer >= 0, got {n_ris!r}")
        elif n_ris == 0 and variant != "NoRIS":
            problems.append("n_ris_elements may be 0 only for the NoRIS variant")

        for name in ("p_max", "mean_rcs", "noise_power"):
            value = config.get(name)
            if not isinstance(value, (int, float)) or not np.isfinite(value) or value <= 0:
                problems.append(f"{name} must be a positive finite number, got {value!r}")

        threshold = config.get("sensing_sinr_threshold")
        if not isinstance(threshold, (int, float)) or threshold < 0:
            problems.append(f"sensing_sinr_threshold must be >= 0, got {threshold!r}")

        n_users = config.get("n_users")
        indices = config.get("reflection_user_indices")
        if isinstance(n_users, int) and indices is not None:
            if not cls._is_index_subset(indices, n_users):
                problems.append(
                    f"reflection_user_indices must be distinct indices in [0, {n_users}), got {indices!r}"
                )

        return problems

    @classmethod
    def _is_index_subset(cls, indices: Iterable[Any], n: int) -> bool:
        try:
            values = list(indices)
        except TypeError:
            return False
        if len(set(values)) != len(values):
            return False
        return all(isinstance(v, (int, np.integer)) and 0 <= v < n for v in values)

    @classmethod
    def log_contract_event(cls, event_type: str, details: Dict[str, Any]) -> None:
        """
        Log a contract violation or numerical anomaly with structured details.

        Args:
            event_type: Type of event (e.g. "NON_HERMITIAN_INPUT")
            details: JSON-serialisable event details
        """
        event = {"event_type": event_type, "details": details}
        logger.warning(f"Contract event: {json.dumps(event, default=str)}")
