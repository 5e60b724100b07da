"""
Feasibility operators: joint water-filling onto the power-capped PSD set,
per-element power-split normalization of the STAR profile, the single-sided
profile of a conventional RIS, and the SINR-optimal receive combiner.
"""

from typing import Optional, Union

import numpy as np
import scipy.linalg

from .model import (
    ReceiveBeamformers,
    SensingSpec,
    StarRisProfile,
    TransmitCovariances,
    hermitian_part,
)
from .scenario import ChannelSet
from .validation import ContractViolation, DomainError, ValidationUtils


def _active_count(values: np.ndarray, budget: float) -> int:
    """Number of eigenvalues above the water level; ``values`` sorted descending."""
    levels = (np.cumsum(values) - budget) / np.arange(1, values.size + 1)
    above = np.nonzero(values > levels)[0]
    # Rounding can hide a dominant eigenvalue; it is always active
    return int(above[-1]) + 1 if above.size else 1


def water_level(eigenvalues: np.ndarray, budget: float) -> float:
    """
    Smallest mu >= 0 with sum(max(lambda - mu, 0)) <= budget.

    Breakpoint scan over the sorted eigenvalues; exact, no bisection.
    """
    values = np.sort(np.asarray(eigenvalues, dtype=float).ravel())[::-1]
    if np.clip(values, 0.0, None).sum() <= budget:
        return 0.0
    count = _active_count(values, budget)
    return max(float((values[:count].sum() - budget) / count), 0.0)


def water_fill(eigenvalues: np.ndarray, budget: float) -> np.ndarray:
    """
    max(lambda - mu, 0) at the water level, elementwise over any shape.

    Active powers are formed as (lambda - mean of the active set) + budget / count
    so the budget is met to rounding even when the eigenvalues dwarf it.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    values = np.sort(eigenvalues.ravel())[::-1]
    if np.clip(values, 0.0, None).sum() <= budget:
        return np.clip(eigenvalues, 0.0, None)
    count = _active_count(values, budget)
    active_mean = values[:count].mean()
    return np.clip((eigenvalues - active_mean) + budget / count, 0.0, None)


def project_covariances(raw: Union[TransmitCovariances, np.ndarray], p_max: float,
                        n_users: Optional[int] = None) -> TransmitCovariances:
    """
    Frobenius-nearest point of {J_i PSD, sum_i tr(J_i) <= p_max}.

    Args:
        raw: Covariances or a (K+L, N_T, N_T) stack of Hermitian matrices
        p_max: Power budget in watts
        n_users: Number of communication covariances when ``raw`` is an array

    Returns:
        TransmitCovariances: Projected covariances

    Raises:
        ContractViolation: If the input is not Hermitian within tolerance
    """
    if isinstance(raw, TransmitCovariances):
        mats, n_users = raw.mats, raw.n_users
    else:
        mats = np.asarray(raw, dtype=complex)
        n_users = mats.shape[0] if n_users is None else n_users
    if p_max <= 0:
        raise DomainError(f"Power budget must be positive, got {p_max}")

    scale = max(1.0, float(np.max(np.abs(mats)))) if mats.size else 1.0
    if not ValidationUtils.is_hermitian(mats, ValidationUtils.HERMITIAN_TOL * scale):
        ValidationUtils.log_contract_event("NON_HERMITIAN_INPUT", {
            "operation": "project_covariances",
            "max_asymmetry": float(np.max(np.abs(mats - np.conj(np.swapaxes(mats, -1, -2))))),
        })
        raise ContractViolation("project_covariances requires Hermitian input")

    eigenvalues, eigenvectors = np.linalg.eigh(hermitian_part(mats))
    clipped = water_fill(eigenvalues, p_max)
    projected = (eigenvectors * clipped[:, None, :]) @ np.conj(np.swapaxes(eigenvectors, -1, -2))
    return TransmitCovariances(hermitian_part(projected), n_users)


def _random_unit(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    draws = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return draws / np.linalg.norm(draws, axis=1, keepdims=True)


def project_star_profile(raw: Union[StarRisProfile, np.ndarray],
                         rng: Optional[np.random.Generator] = None) -> StarRisProfile:
    """Scale every element pair onto the unit sphere of C^2; zero pairs get a random point."""
    stacked = raw.stacked if isinstance(raw, StarRisProfile) else np.asarray(raw, dtype=complex)
    n = stacked.shape[0] // 2
    pairs = np.stack([stacked[:n], stacked[n:]], axis=1)

    norms = np.linalg.norm(pairs, axis=1)
    degenerate = norms == 0.0
    projected = np.empty_like(pairs)
    projected[~degenerate] = pairs[~degenerate] / norms[~degenerate, None]
    if np.any(degenerate):
        rng = np.random.default_rng(0) if rng is None else rng
        projected[degenerate] = _random_unit(rng, int(degenerate.sum()), 2)

    return StarRisProfile(projected[:, 0].copy(), projected[:, 1].copy())


def crirs_project_profile(raw: Union[StarRisProfile, np.ndarray], n_reflect: Optional[int] = None,
                          rng: Optional[np.random.Generator] = None,
                          system_variant: str = "cRIS") -> StarRisProfile:
    """
    Project onto a conventional RIS split into a reflect-only and a transmit-only half.

    Elements ``[0, n_reflect)`` keep a unit-modulus theta_R with theta_T = 0,
    the remaining elements the mirror image; ``n_reflect`` defaults to N_S // 2.
    """
    if system_variant != "cRIS":
        raise ContractViolation(f"Single-sided projection used with the {system_variant} variant")
    stacked = raw.stacked if isinstance(raw, StarRisProfile) else np.asarray(raw, dtype=complex)
    n = stacked.shape[0] // 2
    n_reflect = n // 2 if n_reflect is None else n_reflect
    if not 0 <= n_reflect <= n:
        raise DomainError(f"Reflection partition {n_reflect} outside [0, {n}]")

    active = np.concatenate([stacked[:n_reflect], stacked[n + n_reflect:]])
    magnitude = np.abs(active)
    phases = np.empty_like(active)
    phases[magnitude > 0] = active[magnitude > 0] / magnitude[magnitude > 0]
    if np.any(magnitude == 0):
        rng = np.random.default_rng(0) if rng is None else rng
        phases[magnitude == 0] = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, int((magnitude == 0).sum())))

    theta_r = np.zeros(n, dtype=complex)
    theta_t = np.zeros(n, dtype=complex)
    theta_r[:n_reflect] = phases[:n_reflect]
    theta_t[n_reflect:] = phases[n_reflect:]
    return StarRisProfile(theta_r, theta_t)


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate so the first (near-)largest-magnitude entry is real and nonnegative."""
    magnitude = np.abs(vector)
    anchor = int(np.argmax(magnitude >= magnitude.max() * (1.0 - 1e-9)))
    rotated = vector * (np.conj(vector[anchor]) / magnitude[anchor])
    rotated[anchor] = magnitude[anchor]
    return rotated


def optimal_receive_beamformer(channels: ChannelSet, cov: TransmitCovariances, l: int,
                               spec: SensingSpec) -> np.ndarray:
    """
    Unit-norm combiner maximizing target l's SINR.

    Principal generalized eigenvector of the pair (a V_Rl S V_Rl^H,
    I + a sum_{j != l} V_Rj S V_Rj^H + G S G^H). Returns e_1 when the
    numerator vanishes.
    """
    if not 0 <= l < channels.n_targets:
        raise DomainError(f"Target index {l} outside [0, {channels.n_targets})")
    sigma = cov.total()
    v_r_mats = channels.v_r_mats
    echo = v_r_mats @ sigma @ np.conj(np.swapaxes(v_r_mats, -1, -2))

    numerator = hermitian_part(spec.mean_rcs * echo[l])
    n_rx = channels.n_rx
    if not np.any(numerator):
        basis = np.zeros(n_rx, dtype=complex)
        basis[0] = 1.0
        return basis

    denominator = (np.eye(n_rx) + spec.mean_rcs * (echo.sum(axis=0) - echo[l])
                   + channels.g_si @ sigma @ channels.g_si.conj().T)
    _, vectors = scipy.linalg.eigh(numerator, hermitian_part(denominator),
                                   subset_by_index=[n_rx - 1, n_rx - 1])
    vector = vectors[:, 0]
    return _fix_phase(vector / np.linalg.norm(vector))


def optimal_receive_beamformers(channels: ChannelSet, cov: TransmitCovariances,
                                spec: SensingSpec) -> ReceiveBeamformers:
    return ReceiveBeamformers(np.stack([
        optimal_receive_beamformer(channels, cov, l, spec) for l in range(channels.n_targets)
    ]))
