"""
Closed-form gradients of the augmented objective.

Gradients follow the conjugate-coordinate convention: for a perturbation dX
the first-order change of the objective is Re tr(grad^H dX) for Hermitian
arguments and 2 Re <grad, dx> for the complex profile vector, so ascent
steps read X + step * grad.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .model import (
    ReceiveBeamformers,
    SensingSpec,
    StarRisProfile,
    TransmitCovariances,
    _sensing_sinrs,
    effective_channels,
    hermitian_part,
)
from .scenario import ChannelSet
from .validation import DomainError, EvaluationError


@dataclass(frozen=True)
class CovariancesGradient:
    """Per-covariance gradients, same (K+L, N_T, N_T) layout as TransmitCovariances."""

    mats: np.ndarray


@dataclass(frozen=True)
class ProfileGradient:
    grad_r: np.ndarray
    grad_t: np.ndarray

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.grad_r, self.grad_t])


def _inverse(y: np.ndarray) -> np.ndarray:
    """Inverse of a Hermitian positive definite matrix through its Cholesky factor."""
    try:
        factor = scipy.linalg.cho_factor(y, lower=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EvaluationError(f"Interference-plus-noise matrix not positive definite: {e}") from e
    return hermitian_part(scipy.linalg.cho_solve(factor, np.eye(y.shape[0], dtype=complex)))


def _whitened_gram(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """A^H (I + A S A^H)^-1 A."""
    inv = _inverse(np.eye(a.shape[0]) + a @ s @ a.conj().T)
    return a.conj().T @ inv @ a


def secrecy_gradient_stack(z: np.ndarray, v_t: np.ndarray, cov: TransmitCovariances) -> np.ndarray:
    """
    Gradient of the sum secrecy rate with respect to every covariance.

    User k contributes the "own" term Z^H C^-1 Z - V^H D^-1 V to its own
    covariance and the difference term Z^H (C^-1 - A^-1) Z - V^H (D^-1 - B^-1) V
    to all others, so each gradient is the shared sum of difference terms plus
    a per-user correction.
    """
    sigma = cov.total()
    eve_full = _whitened_gram(v_t, sigma)
    shared = np.zeros_like(sigma)
    own = np.zeros_like(cov.mats)
    for k in range(cov.n_users):
        sigma_c = sigma - cov.mats[k]
        user_full = _whitened_gram(z[k], sigma)
        user_int = _whitened_gram(z[k], sigma_c)
        eve_int = _whitened_gram(v_t, sigma_c)
        shared += (user_full - user_int) - (eve_full - eve_int)
        own[k] = user_int - eve_int
    return hermitian_part(shared[None, :, :] + own)


def sensing_gradient(channels: ChannelSet, cov: TransmitCovariances, phi_l: np.ndarray, l: int,
                     mean_rcs: float) -> np.ndarray:
    """Gradient of R_sl = ln(1 + gamma_sl) with respect to the total covariance."""
    sigma = cov.total()
    echoes = np.einsum("jrt,r->jt", channels.v_r_mats.conj(), phi_l)
    g = channels.g_si.conj().T @ phi_l
    powers = np.real(np.einsum("jt,ts,js->j", echoes.conj(), sigma, echoes))

    full_num = mean_rcs * np.einsum("jt,js->ts", echoes, echoes.conj()) + np.outer(g, g.conj())
    full_den = (mean_rcs * powers.sum() + float(np.real(g.conj() @ sigma @ g))
                + float(np.real(np.vdot(phi_l, phi_l))))
    excl_num = full_num - mean_rcs * np.outer(echoes[l], echoes[l].conj())
    excl_den = full_den - mean_rcs * powers[l]
    return hermitian_part(full_num / full_den - excl_num / excl_den)


def grad_secrecy_wrt_J(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile,
                       k: int, varpi: int) -> np.ndarray:
    """
    Gradient of user k's secrecy rate with respect to covariance ``varpi``.

    Args:
        channels: Channel realization
        cov: Current covariances
        theta: Current profile
        k: User index in [0, K)
        varpi: Covariance index in [0, K+L)

    Returns:
        np.ndarray: Hermitian N_T x N_T matrix
    """
    if not 0 <= k < channels.n_users:
        raise DomainError(f"User index {k} outside [0, {channels.n_users})")
    if not 0 <= varpi < cov.mats.shape[0]:
        raise DomainError(f"Covariance index {varpi} outside [0, {cov.mats.shape[0]})")
    z_k = effective_channels(channels, theta)[k]
    sigma = cov.total()
    sigma_c = sigma - cov.mats[k]
    if varpi == k:
        grad = _whitened_gram(z_k, sigma) - _whitened_gram(channels.v_t, sigma)
    else:
        grad = ((_whitened_gram(z_k, sigma) - _whitened_gram(z_k, sigma_c))
                - (_whitened_gram(channels.v_t, sigma) - _whitened_gram(channels.v_t, sigma_c)))
    return hermitian_part(grad)


def grad_sensing_wrt_J(channels: ChannelSet, cov: TransmitCovariances, phi_l: np.ndarray, l: int,
                       spec: SensingSpec) -> np.ndarray:
    """Gradient of R_sl; identical for every covariance index."""
    if not 0 <= l < channels.n_targets:
        raise DomainError(f"Target index {l} outside [0, {channels.n_targets})")
    return sensing_gradient(channels, cov, np.asarray(phi_l, dtype=complex), l, spec.mean_rcs)


def penalty_weights(channels: ChannelSet, cov: TransmitCovariances, tau: np.ndarray, nu: np.ndarray,
                    rho: float, phis: ReceiveBeamformers, spec: SensingSpec) -> np.ndarray:
    """nu_l + G_l / rho, the weight of each sensing gradient in the augmented gradient."""
    if rho <= 0:
        raise DomainError(f"Penalty parameter must be positive, got {rho}")
    rates = np.log1p(_sensing_sinrs(channels, cov, phis.phis, spec.mean_rcs))
    residuals = spec.thresholds + np.asarray(tau, dtype=float) - rates
    return np.asarray(nu, dtype=float) + residuals / rho


def grad_augmented_wrt_J(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile,
                         tau: np.ndarray, nu: np.ndarray, rho: float, phis: ReceiveBeamformers,
                         spec: SensingSpec, z: Optional[np.ndarray] = None) -> CovariancesGradient:
    z = effective_channels(channels, theta) if z is None else z
    grads = secrecy_gradient_stack(z, channels.v_t, cov)
    weights = penalty_weights(channels, cov, tau, nu, rho, phis, spec)
    sensing = np.zeros_like(grads[0])
    for l, weight in enumerate(weights):
        if weight != 0.0:
            sensing += weight * sensing_gradient(channels, cov, phis[l], l, spec.mean_rcs)
    return CovariancesGradient(hermitian_part(grads + sensing[None, :, :]))


def grad_augmented_wrt_theta(channels: ChannelSet, cov: TransmitCovariances, theta: StarRisProfile,
                             reflection_users: Optional[Sequence[int]] = None,
                             z: Optional[np.ndarray] = None) -> ProfileGradient:
    """
    Gradient with respect to the stacked profile [theta_R; theta_T].

    Only the secrecy rates depend on the profile. Each user's term is the
    diagonal of H_Sk^H (C^-1 Z Sigma - A^-1 Z Sigma_c) H_BS^H, accumulated into
    the half of its own region; the diagonal is taken by a row-wise
    contraction so the cost stays linear in N_S.
    """
    reflection = set(channels.reflection_users if reflection_users is None else reflection_users)
    z = effective_channels(channels, theta) if z is None else z
    sigma = cov.total()
    n_u = channels.n_user_antennas
    grad_r = np.zeros(channels.n_ris, dtype=complex)
    grad_t = np.zeros(channels.n_ris, dtype=complex)
    h_bs_conj = channels.h_bs.conj()
    for k in range(channels.n_users):
        sigma_c = sigma - cov.mats[k]
        full = _inverse(np.eye(n_u) + z[k] @ sigma @ z[k].conj().T) @ z[k] @ sigma
        interference = _inverse(np.eye(n_u) + z[k] @ sigma_c @ z[k].conj().T) @ z[k] @ sigma_c
        diag = ((channels.h_sk[k].conj().T @ (full - interference)) * h_bs_conj).sum(axis=1)
        if k in reflection:
            grad_r += diag
        else:
            grad_t += diag
    return ProfileGradient(grad_r, grad_t)


def _hermitian_basis(n: int):
    """Orthonormal basis of n x n Hermitian matrices under Re tr(A^H B)."""
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        yield e
        for j in range(i + 1, n):
            re = np.zeros((n, n), dtype=complex)
            re[i, j] = re[j, i] = 1.0 / np.sqrt(2.0)
            yield re
            im = np.zeros((n, n), dtype=complex)
            im[i, j] = 1j / np.sqrt(2.0)
            im[j, i] = -1j / np.sqrt(2.0)
            yield im


def finite_difference_oracle(objective: Callable[[np.ndarray], float], point: np.ndarray,
                             basis: str = "auto", step: float = 1e-6) -> np.ndarray:
    """
    Central-difference gradient estimate under the conventions of this module.

    Args:
        objective: Real scalar function of an array shaped like ``point``
        point: Evaluation point
        basis: ``"real"`` (plain coordinates), ``"wirtinger"`` (complex vector,
               returns 0.5 * (d/dRe + j d/dIm)) or ``"hermitian"`` (stack of
               Hermitian matrices along the leading axes); ``"auto"`` picks
               ``"real"`` for real input and ``"wirtinger"`` otherwise
        step: Central difference step

    Returns:
        np.ndarray: Gradient estimate with the shape of ``point``
    """
    if step <= 0:
        raise DomainError(f"Finite-difference step must be positive, got {step}")
    point = np.asarray(point)
    if basis == "auto":
        basis = "real" if not np.iscomplexobj(point) else "wirtinger"

    def central(direction: np.ndarray) -> float:
        return (objective(point + step * direction) - objective(point - step * direction)) / (2.0 * step)

    if basis == "real":
        point = point.astype(float)
        grad = np.zeros_like(point)
        for index in np.ndindex(point.shape):
            direction = np.zeros_like(point)
            direction[index] = 1.0
            grad[index] = central(direction)
        return grad

    if basis == "wirtinger":
        point = point.astype(complex)
        grad = np.zeros_like(point)
        for index in np.ndindex(point.shape):
            direction = np.zeros_like(point)
            direction[index] = 1.0
            d_re = central(direction)
            direction[index] = 1j
            d_im = central(direction)
            grad[index] = 0.5 * (d_re + 1j * d_im)
        return grad

    if basis == "hermitian":
        point = point.astype(complex)
        n = point.shape[-1]
        grad = np.zeros_like(point)
        for lead in np.ndindex(point.shape[:-2]):
            for element in _hermitian_basis(n):
                direction = np.zeros_like(point)
                direction[lead] = element
                grad[lead] += central(direction) * element
        return grad

    raise DomainError(f"Unknown finite-difference basis {basis!r}")
