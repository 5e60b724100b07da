"""
Objective and constraint model: effective channels, per-user secrecy rates,
per-target sensing SINR/rates and the augmented Lagrangian.

User and target indices are 0-based. Internal helpers take a precomputed
effective-channel stack ``z`` of shape (K, N_U, N_T) so the optimizer can
evaluate many candidates per iteration without rebuilding it.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from .scenario import ChannelSet, ScenarioConfig
from .validation import DomainError, EvaluationError, ValidationUtils


def hermitian_part(mats: np.ndarray) -> np.ndarray:
    return 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))


@dataclass(frozen=True)
class TransmitCovariances:
    """Stack of K communication and L sensing covariances, shape (K+L, N_T, N_T)."""

    mats: np.ndarray
    n_users: int

    @classmethod
    def zeros(cls, n_users: int, n_targets: int, n_tx: int) -> "TransmitCovariances":
        return cls(np.zeros((n_users + n_targets, n_tx, n_tx), dtype=complex), n_users)

    @property
    def comm(self) -> np.ndarray:
        return self.mats[:self.n_users]

    @property
    def sensing(self) -> np.ndarray:
        return self.mats[self.n_users:]

    def total(self) -> np.ndarray:
        return self.mats.sum(axis=0)

    def interference(self, k: int) -> np.ndarray:
        """Sum of every covariance except user k's."""
        return self.total() - self.mats[k]

    def total_power(self) -> float:
        return float(np.real(np.trace(self.mats, axis1=-2, axis2=-1)).sum())

    def is_feasible(self, p_max: float) -> bool:
        return (ValidationUtils.is_hermitian(self.mats)
                and ValidationUtils.is_psd(self.mats)
                and ValidationUtils.within_power_budget(self.mats, p_max))


@dataclass(frozen=True)
class StarRisProfile:
    theta_r: np.ndarray
    theta_t: np.ndarray

    @classmethod
    def uniform(cls, n_ris: int) -> "StarRisProfile":
        """Equal power split, zero phase on every element."""
        value = np.full(n_ris, math.sqrt(0.5), dtype=complex)
        return cls(value, value.copy())

    @classmethod
    def from_stacked(cls, stacked: np.ndarray) -> "StarRisProfile":
        stacked = np.asarray(stacked, dtype=complex)
        n = stacked.shape[0] // 2
        return cls(stacked[:n].copy(), stacked[n:].copy())

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.theta_r, self.theta_t])

    @property
    def n_ris(self) -> int:
        return self.theta_r.shape[0]

    def per_user(self, reflection_mask: np.ndarray) -> np.ndarray:
        """Row k is theta_R for reflection users and theta_T otherwise, shape (K, N_S)."""
        return np.where(np.asarray(reflection_mask)[:, None], self.theta_r[None, :], self.theta_t[None, :])

    def is_feasible(self) -> bool:
        return ValidationUtils.on_power_split_circle(self.theta_r, self.theta_t)


@dataclass(frozen=True)
class ReceiveBeamformers:
    """One receive combiner per target, shape (L, N_R)."""

    phis: np.ndarray

    def __getitem__(self, l: int) -> np.ndarray:
        return self.phis[l]

    def __len__(self) -> int:
        return self.phis.shape[0]

    @classmethod
    def random(cls, n_targets: int, n_rx: int, rng: np.random.Generator) -> "ReceiveBeamformers":
        phis = rng.standard_normal((n_targets, n_rx)) + 1j * rng.standard_normal((n_targets, n_rx))
        return cls(phis / np.linalg.norm(phis, axis=1, keepdims=True))


@dataclass(frozen=True)
class SensingSpec:
    """Per-target rate thresholds Delta_l = ln(1 + Gamma_l) and the mean RCS."""

    thresholds: np.ndarray
    mean_rcs: float

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "SensingSpec":
        return cls(np.full(config.n_targets, config.sensing_threshold_nats), config.mean_rcs)


@dataclass(frozen=True)
class SolutionMetrics:
    sum_secrecy_nats: float
    sum_secrecy_bits: float
    clamped_sum_secrecy_nats: float
    per_user_secrecy: Tuple[float, ...]
    sensing_sinr: Tuple[float, ...]
    sensing_rates: Tuple[float, ...]
    total_power: float
    sensing_satisfied: bool

    def to_dict(self) -> dict:
        return {
            "sum_secrecy_nats": self.sum_secrecy_nats,
            "sum_secrecy_bits": self.sum_secrecy_bits,
            "clamped_sum_secrecy_nats": self.clamped_sum_secrecy_nats,
            "per_user_secrecy": list(self.per_user_secrecy),
            "sensing_sinr": list(self.sensing_sinr),
            "sensing_rates": list(self.sensing_rates),
            "total_power": self.total_power,
            "sensing_satisfied": self.sensing_satisfied,
        }


def effective_channels(channels: ChannelSet, theta: StarRisProfile) -> np.ndarray:
    """Z_k = H_Bk + H_Sk diag(theta_k) H_BS for every user, shape (K, N_U, N_T)."""
    per_user = theta.per_user(channels.reflection_mask)
    return channels.h_bk + (channels.h_sk * per_user[:, None, :]) @ channels.h_bs


def effective_channel(channels: ChannelSet, theta: StarRisProfile, k: int) -> np.ndarray:
    if not 0 <= k < channels.n_users:
        raise DomainError(f"User index {k} outside [0, {channels.n_users})")
    theta_k = theta.theta_r if k in channels.reflection_users else theta.theta_t
    return channels.h_bk[k] + (channels.h_sk[k] * theta_k) @ channels.h_bs


def _logdet_ratio(x: np.ndarray, y: np.ndarray) -> float:
    """ln det(I + X Y^-1) for Hermitian X and Hermitian positive definite Y."""
    try:
        chol = scipy.linalg.cholesky(y, lower=True)
        w = scipy.linalg.solve_triangular(chol, x, lower=True)
        s = scipy.linalg.solve_triangular(chol, w.conj().T, lower=True)
        m = np.eye(x.shape[0]) + hermitian_part(s)
        inner = scipy.linalg.cholesky(m, lower=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EvaluationError(f"Log-determinant not evaluable: {e}") from e
    return 2.0 * float(np.sum(np.log(np.real(np.diag(inner)))))


def _sandwich(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """A S A^H."""
    return a @ s @ a.conj().T


def _secrecy_rates(z: np.ndarray, v_t: np.ndarray, cov: TransmitCovariances) -> np.ndarray:
    sigma = cov.total()
    n_u, n_l = z.shape[1], v_t.shape[0]
    rates = np.empty(cov.n_users)
    for k in range(cov.n_users):
        sigma_c = sigma - cov.mats[k]
        user = _logdet_ratio(_sandwich(z[k], cov.mats[k]), np.eye(n_u) + _sandwich(z[k], sigma_c))
        eve = _logdet_ratio(_sandwich(v_t, cov.mats[k]), np.eye(n_l) + _sandwich(v_t, sigma_c))
        rates[k] = user - eve
    return rates


def _sensing_sinrs(channels: ChannelSet, cov: TransmitCovariances, phis: np.ndarray,
                   mean_rcs: float) -> np.ndarray:
    sigma = cov.total()
    v_r_mats = channels.v_r_mats
    sinrs = np.empty(channels.n_targets)
    for l in range(channels.n_targets):
        phi = phis[l]
        echoes = np.einsum("jrt,r->jt", v_r_mats.conj(), phi)  # rows a_j = V_Rj^H phi
        powers = np.real(np.einsum("jt,ts,js->j", echoes.conj(), sigma, echoes))
        g = channels.g_si.conj().T @ phi
        self_int = float(np.real(g.conj() @ sigma @ g))
        noise = float(np.real(np.vdot(phi, phi)))
        interference = mean_rcs * (powers.sum() - powers[l]) + self_int + noise
        sinrs[l] = mean_rcs * powers[l] / interference
    return sinrs


def secrecy_rate(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile, k: int,
                 z: Optional[np.ndarray] = None) -> float:
    """
    Secrecy rate of user k against all targets treated as eavesdroppers.

    May be negative; the clamp to zero is applied only in reported metrics.

    Raises:
        EvaluationError: If an interference-plus-noise matrix is not positive definite
    """
    if not 0 <= k < channels.n_users:
        raise DomainError(f"User index {k} outside [0, {channels.n_users})")
    z_k = effective_channel(channels, theta, k) if z is None else z[k]
    sigma_c = cov.interference(k)
    n_u, n_l = z_k.shape[0], channels.n_targets
    user = _logdet_ratio(_sandwich(z_k, cov.mats[k]), np.eye(n_u) + _sandwich(z_k, sigma_c))
    eve = _logdet_ratio(_sandwich(channels.v_t, cov.mats[k]), np.eye(n_l) + _sandwich(channels.v_t, sigma_c))
    return user - eve


def sum_secrecy_rate(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile,
                     z: Optional[np.ndarray] = None) -> float:
    z = effective_channels(channels, theta) if z is None else z
    return float(_secrecy_rates(z, channels.v_t, cov).sum())


def sensing_sinr(channels: ChannelSet, cov: TransmitCovariances, phi_l: np.ndarray, l: int,
                 spec: SensingSpec) -> float:
    if not 0 <= l < channels.n_targets:
        raise DomainError(f"Target index {l} outside [0, {channels.n_targets})")
    phis = np.zeros((channels.n_targets, channels.n_rx), dtype=complex)
    phis[l] = phi_l
    # Only row l of the combiner stack enters target l's SINR
    return float(_sensing_sinrs(channels, cov, phis, spec.mean_rcs)[l])


def sensing_rate(channels: ChannelSet, cov: TransmitCovariances, phi_l: np.ndarray, l: int,
                 spec: SensingSpec) -> float:
    return math.log1p(sensing_sinr(channels, cov, phi_l, l, spec))


def sensing_rates(channels: ChannelSet, cov: TransmitCovariances, phis: ReceiveBeamformers,
                  spec: SensingSpec) -> np.ndarray:
    return np.log1p(_sensing_sinrs(channels, cov, phis.phis, spec.mean_rcs))


def residual_from_rate(rate: float, threshold: float, tau: float) -> float:
    """G_l = Delta_l + tau_l - R_sl."""
    return threshold + tau - rate


def constraint_residual(channels: ChannelSet, cov: TransmitCovariances, phi_l: np.ndarray, l: int,
                        spec: SensingSpec, tau_l: float) -> float:
    if tau_l < 0:
        raise DomainError(f"Slack must be non-negative, got {tau_l}")
    return residual_from_rate(sensing_rate(channels, cov, phi_l, l, spec), spec.thresholds[l], tau_l)


def penalty(residuals: np.ndarray, nu: np.ndarray, rho: float) -> float:
    """sum_l nu_l G_l + G_l^2 / (2 rho)."""
    if rho <= 0:
        raise DomainError(f"Penalty parameter must be positive, got {rho}")
    residuals = np.asarray(residuals, dtype=float)
    return float(np.sum(np.asarray(nu) * residuals + residuals ** 2 / (2.0 * rho)))


def augmented_objective(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile,
                        tau: np.ndarray, nu: np.ndarray, rho: float, phis: ReceiveBeamformers,
                        spec: SensingSpec) -> float:
    """
    Sum secrecy rate minus the augmented-Lagrangian penalty on the sensing constraints.

    Raises:
        DomainError: If ``rho`` is not positive
    """
    if rho <= 0:
        raise DomainError(f"Penalty parameter must be positive, got {rho}")
    rates = sensing_rates(channels, cov, phis, spec)
    residuals = spec.thresholds + np.asarray(tau, dtype=float) - rates
    return sum_secrecy_rate(channels, cov, theta) - penalty(residuals, nu, rho)


def evaluate_solution(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile,
                      phis: ReceiveBeamformers, spec: SensingSpec) -> SolutionMetrics:
    """Reported metrics of a solution: raw and clamped secrecy sums plus per-target sensing."""
    per_user = _secrecy_rates(effective_channels(channels, theta), channels.v_t, cov)
    sinrs = _sensing_sinrs(channels, cov, phis.phis, spec.mean_rcs)
    rates = np.log1p(sinrs)
    total = float(per_user.sum())
    return SolutionMetrics(
        sum_secrecy_nats=total,
        sum_secrecy_bits=total / math.log(2.0),
        clamped_sum_secrecy_nats=float(np.clip(per_user, 0.0, None).sum()),
        per_user_secrecy=tuple(float(r) for r in per_user),
        sensing_sinr=tuple(float(s) for s in sinrs),
        sensing_rates=tuple(float(r) for r in rates),
        total_power=cov.total_power(),
        sensing_satisfied=bool(np.all(rates >= spec.thresholds - 1e-9)),
    )
