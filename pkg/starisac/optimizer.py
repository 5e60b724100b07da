"""
Penalty dual decomposition solver.

The inner loop is a monitored accelerated projected gradient ascent over the
covariances and the STAR profile with closed-form slack and receive-combiner
refreshes; the outer loop updates the multipliers and shrinks the penalty.
"""

import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, ClassVar, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .gradients import grad_augmented_wrt_J, grad_augmented_wrt_theta
from .logger import logger
from .logging_mixin import LoggingMixin
from .model import (
    ReceiveBeamformers,
    SensingSpec,
    SolutionMetrics,
    StarRisProfile,
    TransmitCovariances,
    _secrecy_rates,
    _sensing_sinrs,
    effective_channels,
    evaluate_solution,
    hermitian_part,
)
from .projections import optimal_receive_beamformers, project_covariances, project_star_profile
from .scenario import ChannelSet, ScenarioConfig
from .validation import ConfigError, DomainError, EvaluationError

ProfileProjection = Callable[[np.ndarray, np.random.Generator], StarRisProfile]


def _has_kind(value: Any, kind: str) -> bool:
    if isinstance(value, bool):
        return kind == "bool"
    if kind == "int":
        return isinstance(value, (int, np.integer))
    if kind == "real":
        return isinstance(value, (int, float, np.integer, np.floating))
    return False


@dataclass(frozen=True)
class SolverOptions:
    inner_max_iter: int = 2000
    outer_max_iter: int = 30
    tolerance: float = 1e-5
    window: int = 5
    rho_init: float = 10.0
    zeta: float = 0.1
    rho_floor: float = 1e-12
    armijo_initial_step: float = 1.0
    armijo_beta: float = 0.5
    armijo_c: float = 1e-4
    armijo_max_backtracks: int = 30
    trace_substeps: bool = True
    seed: int = 0

    _FIELD_KINDS: ClassVar[Dict[str, str]] = {
        "inner_max_iter": "int", "outer_max_iter": "int", "tolerance": "real", "window": "int",
        "rho_init": "real", "zeta": "real", "rho_floor": "real", "armijo_initial_step": "real",
        "armijo_beta": "real", "armijo_c": "real", "armijo_max_backtracks": "int",
        "trace_substeps": "bool", "seed": "int",
    }

    def __post_init__(self):
        wrong_type = [name for name, kind in self._FIELD_KINDS.items()
                      if not _has_kind(getattr(self, name), kind)]
        if wrong_type:
            raise ConfigError(f"Invalid solver options: wrong type for {wrong_type}")

        problems = []
        for name in ("inner_max_iter", "outer_max_iter", "window"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be >= 1")
        if self.armijo_max_backtracks < 0:
            problems.append("armijo_max_backtracks must be >= 0")
        if self.tolerance < 0:
            problems.append("tolerance must be >= 0")
        if self.rho_init <= 0 or self.rho_floor <= 0:
            problems.append("rho_init and rho_floor must be positive")
        if not 0 < self.zeta <= 1:
            problems.append("zeta must lie in (0, 1]")
        if not 0 < self.armijo_beta < 1:
            problems.append("armijo_beta must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            problems.append("armijo_c must lie in (0, 1)")
        if self.armijo_initial_step <= 0:
            problems.append("armijo_initial_step must be positive")
        if problems:
            raise ConfigError("Invalid solver options: " + "; ".join(problems))

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverOptions":
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(f"Unknown solver option keys: {unknown}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PddState:
    nu: np.ndarray
    rho: float
    tau: np.ndarray
    zeta: float = 0.1

    def __post_init__(self):
        if self.rho <= 0:
            raise DomainError(f"Penalty parameter must be positive, got {self.rho}")
        if np.any(np.asarray(self.tau) < 0):
            raise DomainError("Slacks must be non-negative")

    @classmethod
    def initial(cls, n_targets: int, opts: SolverOptions) -> "PddState":
        return cls(np.zeros(n_targets), opts.rho_init, np.zeros(n_targets), opts.zeta)


@dataclass
class ApgState:
    j_current: np.ndarray
    j_previous: np.ndarray
    m_extrapolation: np.ndarray
    theta_current: np.ndarray
    theta_previous: np.ndarray
    xi_extrapolation: np.ndarray
    t_current: float
    t_previous: float
    phis: np.ndarray

    @classmethod
    def start(cls, j: np.ndarray, theta: np.ndarray, phis: np.ndarray) -> "ApgState":
        return cls(j, j, j, theta, theta, theta, 1.0, 1.0, phis)

    def extrapolate(self, current: np.ndarray, previous: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        """x + (t_prev / t)(anchor - x) + ((t_prev - 1) / t)(x - x_prev)."""
        return (current + (self.t_previous / self.t_current) * (anchor - current)
                + ((self.t_previous - 1.0) / self.t_current) * (current - previous))

    def advance_momentum(self):
        self.t_previous, self.t_current = self.t_current, next_momentum(self.t_current)


def next_momentum(t: float) -> float:
    return 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    outer: int
    augmented: float
    true_objective: float
    sensing_rates: Tuple[float, ...]
    residuals: Tuple[float, ...]
    branch_j: str
    branch_theta: str
    steps_j: Tuple[float, float]
    steps_theta: Tuple[float, float]
    rho: float
    wall_time: float
    substeps: Tuple[float, ...] = ()

    @property
    def min_residual(self) -> float:
        return min(self.residuals, default=0.0)


@dataclass
class ConvergenceTrace:
    records: List[IterationRecord] = field(default_factory=list)
    outer_boundaries: List[int] = field(default_factory=list)
    # Augmented values at entry to and exit from each run_inner call
    entry_values: List[float] = field(default_factory=list)
    exit_values: List[float] = field(default_factory=list)

    def append(self, record: IterationRecord):
        self.records.append(record)

    def mark_outer_boundary(self):
        self.outer_boundaries.append(len(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def augmented_values(self) -> np.ndarray:
        return np.array([r.augmented for r in self.records])

    def outer_drops(self) -> np.ndarray:
        """Fall of the augmented value across each multiplier and penalty update."""
        return np.array(self.exit_values[:-1]) - np.array(self.entry_values[1:])

    def to_rows(self) -> List[Dict[str, Any]]:
        return [{
            "iter": r.iteration,
            "augmented": r.augmented,
            "true": r.true_objective,
            "min_residual": r.min_residual,
            "branch_J": r.branch_j,
            "branch_theta": r.branch_theta,
            "rho": r.rho,
            "outer": r.outer,
        } for r in self.records]


@dataclass(frozen=True)
class InnerInit:
    j: TransmitCovariances
    theta: StarRisProfile
    phis: Optional[ReceiveBeamformers] = None


@dataclass
class InnerResult:
    j: TransmitCovariances
    theta: StarRisProfile
    phis: ReceiveBeamformers
    tau: np.ndarray
    trace: ConvergenceTrace
    converged: bool
    iterations: int
    augmented: float
    true_objective: float
    residuals: np.ndarray


@dataclass
class PddResult:
    j: TransmitCovariances
    theta: StarRisProfile
    phis: ReceiveBeamformers
    tau: np.ndarray
    nu: np.ndarray
    rho: float
    trace: ConvergenceTrace
    converged: bool
    outer_iterations: int
    inner_iterations: int
    augmented: float
    true_objective: float
    metrics: SolutionMetrics

    @property
    def relative_gap(self) -> float:
        return abs(self.augmented - self.true_objective) / max(abs(self.augmented), 1e-12)


class LineSearchResult(NamedTuple):
    step: float
    value: float
    point: Optional[np.ndarray]


def update_tau(rate: float, threshold: float, nu: float, rho: float) -> float:
    """Exact maximizer of the augmented objective over one slack."""
    if rho <= 0:
        raise DomainError(f"Penalty parameter must be positive, got {rho}")
    return max(0.0, rate - threshold - nu * rho)


def armijo_step(along: Callable[[float], Tuple[float, float, np.ndarray]], base_value: float,
                directional_derivative: float, opts: SolverOptions, initial_step: Optional[float] = None,
                max_expansions: int = 0) -> LineSearchResult:
    """
    Backtracking search for a projected ascent step.

    A trial step s is accepted when f(P(x + s d)) >= f(x) + c Re<d, P(x + s d) - x>.
    With ``max_expansions`` > 0 an accepted first trial is grown by 1/beta while
    the gain still tracks the linear model (the Goldstein side of the test is
    violated) and the value keeps improving.

    Args:
        along: Maps a step s to (f(P(x + s d)), Re<d, P(x + s d) - x>, P(x + s d))
        base_value: f(x)
        directional_derivative: Re<d, d>; zero means there is nothing to search
        opts: Line-search constants
        initial_step: First trial step, ``opts.armijo_initial_step`` when omitted
        max_expansions: Upper bound on step growths after an accepted first trial

    Returns:
        LineSearchResult: Accepted step with its value and point, or step 0
        with ``point=None`` when every trial fails
    """
    step = opts.armijo_initial_step if initial_step is None else initial_step
    if directional_derivative == 0.0:
        return LineSearchResult(step, base_value, None)
    if not step > 0.0 or not math.isfinite(step):
        raise DomainError(f"Initial step must be positive and finite, got {step}")

    def accepted(value: float, increase: float) -> bool:
        if not math.isfinite(base_value):
            return math.isfinite(value)
        return value >= base_value + opts.armijo_c * max(increase, 0.0)

    value, increase, point = along(step)
    if accepted(value, increase):
        for _ in range(max_expansions):
            if not math.isfinite(base_value) or value < base_value + (1.0 - opts.armijo_c) * increase:
                break
            longer = step / opts.armijo_beta
            longer_value, longer_increase, longer_point = along(longer)
            if not (accepted(longer_value, longer_increase) and longer_value > value):
                break
            step, value, increase, point = longer, longer_value, longer_increase, longer_point
        return LineSearchResult(step, value, point)

    for _ in range(opts.armijo_max_backtracks):
        step *= opts.armijo_beta
        value, increase, point = along(step)
        if accepted(value, increase):
            return LineSearchResult(step, value, point)
    return LineSearchResult(0.0, base_value, None)


class _AugmentedProblem:
    """Augmented objective at fixed multipliers, penalty and sensing parameters."""

    def __init__(self, channels: ChannelSet, spec: SensingSpec, nu: np.ndarray, rho: float):
        self.channels = channels
        self.spec = spec
        self.nu = np.asarray(nu, dtype=float)
        self.rho = rho
        self.n_users = channels.n_users

    def z(self, theta: np.ndarray) -> np.ndarray:
        return effective_channels(self.channels, StarRisProfile.from_stacked(theta))

    def cov(self, mats: np.ndarray) -> TransmitCovariances:
        return TransmitCovariances(mats, self.n_users)

    def sensing_rates(self, mats: np.ndarray, phis: np.ndarray) -> np.ndarray:
        return np.log1p(_sensing_sinrs(self.channels, self.cov(mats), phis, self.spec.mean_rcs))

    def evaluate(self, mats: np.ndarray, z: np.ndarray, tau: np.ndarray, phis: np.ndarray):
        """(augmented, true objective, sensing rates, residuals)."""
        cov = self.cov(mats)
        true_objective = float(_secrecy_rates(z, self.channels.v_t, cov).sum())
        rates = self.sensing_rates(mats, phis)
        residuals = self.spec.thresholds + tau - rates
        penalty = float(np.sum(self.nu * residuals + residuals ** 2 / (2.0 * self.rho)))
        return true_objective - penalty, true_objective, rates, residuals

    def value(self, mats: np.ndarray, z: np.ndarray, tau: np.ndarray, phis: np.ndarray) -> float:
        try:
            augmented = self.evaluate(mats, z, tau, phis)[0]
        except EvaluationError:
            return -math.inf
        return augmented if math.isfinite(augmented) else -math.inf

    def grad_j(self, mats: np.ndarray, theta: np.ndarray, z: np.ndarray, tau: np.ndarray,
               phis: np.ndarray) -> np.ndarray:
        return grad_augmented_wrt_J(self.channels, self.cov(mats), StarRisProfile.from_stacked(theta),
                                    tau, self.nu, self.rho, ReceiveBeamformers(phis), self.spec, z=z).mats

    def grad_theta(self, mats: np.ndarray, theta: np.ndarray, z: np.ndarray) -> np.ndarray:
        return grad_augmented_wrt_theta(self.channels, self.cov(mats), StarRisProfile.from_stacked(theta),
                                        z=z).stacked


def _ascent_candidate(origin: np.ndarray, base_value: float, gradient: Optional[np.ndarray],
                      project: Callable[[np.ndarray], np.ndarray],
                      evaluate: Callable[[np.ndarray], float], opts: SolverOptions,
                      origin_feasible: bool, radius: float) -> Tuple[np.ndarray, float, float]:
    """
    Armijo-searched projected gradient step; falls back to the (projected) origin at step 0.

    The first trial moves the origin by ``opts.armijo_initial_step * radius``
    along the gradient, where ``radius`` is the size of the feasible set.
    """
    if gradient is not None:
        def along(step: float):
            point = project(origin + step * gradient)
            return evaluate(point), float(np.real(np.vdot(gradient, point - origin))), point

        directional = float(np.real(np.vdot(gradient, gradient)))
        if not math.isfinite(directional):
            result = LineSearchResult(0.0, base_value, None)
        else:
            initial = opts.armijo_initial_step * radius / math.sqrt(directional) if directional > 0.0 else None
            if initial is not None and not (0.0 < initial < math.inf):
                initial = None
            result = armijo_step(along, base_value, directional, opts, initial_step=initial,
                                 max_expansions=opts.armijo_max_backtracks)
        if result.point is not None:
            return result.point, result.value, result.step
        step = result.step if directional == 0.0 else 0.0
    else:
        step = 0.0

    if origin_feasible:
        return origin, base_value, step
    point = project(origin)
    return point, evaluate(point), step


def _relative_change_converged(history: List[float], window: int, tolerance: float) -> bool:
    if len(history) <= window:
        return False
    reference = history[-1 - window]
    return abs(history[-1] - reference) <= tolerance * max(abs(reference), 1e-12)


def run_inner(channels: ChannelSet, init: InnerInit, pdd: PddState, opts: Optional[SolverOptions] = None,
              *, spec: SensingSpec, p_max: float, project_profile: Optional[ProfileProjection] = None,
              update_profile: bool = True, rng: Optional[np.random.Generator] = None, outer: int = 1,
              iteration_offset: int = 0, trace: Optional[ConvergenceTrace] = None) -> InnerResult:
    """
    Monitored accelerated projected gradient ascent at fixed (nu, rho).

    Each iteration extrapolates the covariances, builds a momentum candidate
    and a plain candidate, keeps the better one (ties favor momentum), does
    the same for the profile, then refreshes the slacks and the receive
    combiners. Stops once the augmented objective changes by at most
    ``opts.tolerance`` (relative) over ``opts.window`` iterations.

    Args:
        channels: Channel realization
        init: Starting covariances, profile and (optionally) combiners
        pdd: Multipliers, penalty and current slacks
        opts: Solver options
        spec: Sensing thresholds and mean RCS
        p_max: Power budget in watts
        project_profile: Profile projection, defaults to the STAR projection
        update_profile: False skips the profile block entirely
        rng: Random source for the combiner initializer and degenerate projections
        outer: Outer iteration number recorded in the trace
        iteration_offset: Global iteration counter at entry
        trace: Trace to append to; a new one is created when omitted

    Returns:
        InnerResult: Final iterate (best iterate when the cap is hit) and its trace
    """
    opts = opts or SolverOptions()
    rng = np.random.default_rng(opts.seed) if rng is None else rng
    project_profile = project_profile or project_star_profile
    trace = ConvergenceTrace() if trace is None else trace
    problem = _AugmentedProblem(channels, spec, pdd.nu, pdd.rho)
    n_users = channels.n_users
    # Every feasible stacked profile has norm sqrt(N_S)
    profile_radius = math.sqrt(max(channels.n_ris, 1))

    def project_j(raw: np.ndarray) -> np.ndarray:
        return project_covariances(hermitian_part(raw), p_max, n_users).mats

    def project_theta(raw: np.ndarray) -> np.ndarray:
        return project_profile(raw, rng).stacked

    phis = (init.phis.phis if init.phis is not None
            else ReceiveBeamformers.random(channels.n_targets, channels.n_rx, rng).phis)
    state = ApgState.start(init.j.mats.copy(), init.theta.stacked, phis)
    tau = np.asarray(pdd.tau, dtype=float).copy()

    z_current = problem.z(state.theta_current)
    current_value = problem.value(state.j_current, z_current, tau, state.phis)
    trace.entry_values.append(current_value)
    history: List[float] = []
    best: Optional[tuple] = None
    converged = False
    iterations = 0

    for iteration in range(1, opts.inner_max_iter + 1):
        started = time.perf_counter()
        start_value = current_value

        # Covariance block
        j_old = state.j_current
        q = state.extrapolate(state.j_current, state.j_previous, state.m_extrapolation)
        q_value = problem.value(q, z_current, tau, state.phis)

        def value_j(mats: np.ndarray) -> float:
            return problem.value(mats, z_current, tau, state.phis)

        try:
            grad_q = problem.grad_j(q, state.theta_current, z_current, tau, state.phis)
        except EvaluationError:
            grad_q = None
        m_point, m_value, mu1 = _ascent_candidate(q, q_value, grad_q, project_j, value_j, opts,
                                                  origin_feasible=False, radius=p_max)
        grad_j = problem.grad_j(j_old, state.theta_current, z_current, tau, state.phis)
        u_point, u_value, mu2 = _ascent_candidate(j_old, start_value, grad_j, project_j, value_j, opts,
                                                  origin_feasible=True, radius=p_max)
        if m_value >= u_value:
            j_new, after_j, branch_j = m_point, m_value, "M"
        else:
            j_new, after_j, branch_j = u_point, u_value, "U"
        state.m_extrapolation = m_point
        state.j_previous, state.j_current = j_old, j_new

        # Profile block
        theta_old = state.theta_current
        if update_profile:
            omega = state.extrapolate(state.theta_current, state.theta_previous, state.xi_extrapolation)

            def value_theta(theta: np.ndarray) -> float:
                return problem.value(j_new, problem.z(theta), tau, state.phis)

            omega_z = problem.z(omega)
            omega_value = problem.value(j_new, omega_z, tau, state.phis)
            try:
                grad_omega = problem.grad_theta(j_new, omega, omega_z)
            except EvaluationError:
                grad_omega = None
            xi_point, xi_value, eta1 = _ascent_candidate(omega, omega_value, grad_omega, project_theta,
                                                         value_theta, opts, origin_feasible=False,
                                                         radius=profile_radius)
            grad_theta = problem.grad_theta(j_new, theta_old, z_current)
            wp_point, wp_value, eta2 = _ascent_candidate(theta_old, after_j, grad_theta, project_theta,
                                                         value_theta, opts, origin_feasible=True,
                                                         radius=profile_radius)
            if xi_value >= wp_value:
                theta_new, after_theta, branch_theta = xi_point, xi_value, "xi"
            else:
                theta_new, after_theta, branch_theta = wp_point, wp_value, "wp"
            state.xi_extrapolation = xi_point
            state.theta_previous, state.theta_current = theta_old, theta_new
            z_current = problem.z(theta_new)
        else:
            after_theta, branch_theta, eta1, eta2 = after_j, "none", 0.0, 0.0

        # Slack refresh at the current combiners
        rates = problem.sensing_rates(j_new, state.phis)
        tau = np.array([update_tau(rates[l], spec.thresholds[l], pdd.nu[l], pdd.rho)
                        for l in range(channels.n_targets)])
        after_tau = problem.value(j_new, z_current, tau, state.phis)

        # Combiner refresh at the new covariances
        state.phis = optimal_receive_beamformers(channels, problem.cov(j_new), spec).phis
        augmented, true_objective, rates, residuals = problem.evaluate(j_new, z_current, tau, state.phis)
        current_value = augmented

        state.advance_momentum()
        iterations = iteration
        substeps = (start_value, after_j, after_theta, after_tau, augmented) if opts.trace_substeps else ()
        trace.append(IterationRecord(
            iteration=iteration_offset + iteration,
            outer=outer,
            augmented=augmented,
            true_objective=true_objective,
            sensing_rates=tuple(float(r) for r in rates),
            residuals=tuple(float(g) for g in residuals),
            branch_j=branch_j,
            branch_theta=branch_theta,
            steps_j=(mu1, mu2),
            steps_theta=(eta1, eta2),
            rho=pdd.rho,
            wall_time=time.perf_counter() - started,
            substeps=substeps,
        ))
        logger.debug(f"Iteration {iteration_offset + iteration}: augmented={augmented:.8f}, "
                     f"true={true_objective:.8f}, branches={branch_j}/{branch_theta}",
                     extra={"outer": outer})

        if best is None or augmented > best[0]:
            best = (augmented, true_objective, j_new, state.theta_current, state.phis, tau.copy(),
                    residuals.copy())

        history.append(augmented)
        if _relative_change_converged(history, opts.window, opts.tolerance):
            converged = True
            break

    if converged:
        final = (current_value, true_objective, state.j_current, state.theta_current, state.phis,
                 tau, residuals)
    else:
        final = best
    augmented, true_objective, j, theta, phis, tau, residuals = final
    trace.exit_values.append(augmented)
    return InnerResult(
        j=TransmitCovariances(j, n_users),
        theta=StarRisProfile.from_stacked(theta),
        phis=ReceiveBeamformers(phis),
        tau=np.asarray(tau),
        trace=trace,
        converged=converged,
        iterations=iterations,
        augmented=augmented,
        true_objective=true_objective,
        residuals=np.asarray(residuals),
    )


def _gap_closed(records: List[IterationRecord], window: int, tolerance: float) -> bool:
    tail = records[-window:]
    if not tail:
        return False
    return all(abs(r.augmented - r.true_objective) <= tolerance * max(abs(r.augmented), 1e-12)
               for r in tail)


class PddSolver(LoggingMixin):
    """Outer multiplier/penalty loop around ``run_inner``."""

    def __init__(self, opts: Optional[SolverOptions] = None,
                 project_profile: Optional[ProfileProjection] = None, update_profile: bool = True):
        self.opts = opts or SolverOptions()
        self.project_profile = project_profile or project_star_profile
        self.update_profile = update_profile

    def solve(self, channels: ChannelSet, config: ScenarioConfig,
              initial_theta: Optional[StarRisProfile] = None) -> PddResult:
        opts = self.opts
        spec = SensingSpec.from_config(config)
        rng = np.random.default_rng(opts.seed)
        pdd = PddState.initial(channels.n_targets, opts)

        j = TransmitCovariances.zeros(channels.n_users, channels.n_targets, channels.n_tx)
        theta = initial_theta if initial_theta is not None else StarRisProfile.uniform(channels.n_ris)
        phis = ReceiveBeamformers.random(channels.n_targets, channels.n_rx, rng)
        trace = ConvergenceTrace()
        converged = False
        inner = None
        outer = 0

        for outer in range(1, opts.outer_max_iter + 1):
            trace.mark_outer_boundary()
            inner = run_inner(channels, InnerInit(j, theta, phis), pdd, opts, spec=spec, p_max=config.p_max,
                              project_profile=self.project_profile, update_profile=self.update_profile,
                              rng=rng, outer=outer, iteration_offset=len(trace), trace=trace)
            self.log_inner_summary(outer, inner.iterations, inner.augmented, inner.true_objective,
                                   inner.converged)
            j, theta, phis = inner.j, inner.theta, inner.phis
            pdd.tau = inner.tau

            if _gap_closed(trace.records, opts.window, opts.tolerance):
                converged = True
                break

            pdd.nu = pdd.nu + inner.residuals / pdd.rho
            pdd.rho = max(pdd.zeta * pdd.rho, opts.rho_floor)
            self.log_outer_update(outer, pdd.rho, pdd.nu, inner.residuals)

        if not converged:
            logger.warning(f"Outer loop hit its iteration cap ({opts.outer_max_iter}) "
                           f"without closing the augmented/true gap")

        return PddResult(
            j=j,
            theta=theta,
            phis=phis,
            tau=pdd.tau,
            nu=pdd.nu,
            rho=pdd.rho,
            trace=trace,
            converged=converged,
            outer_iterations=outer,
            inner_iterations=len(trace),
            augmented=inner.augmented,
            true_objective=inner.true_objective,
            metrics=evaluate_solution(channels, j, theta, phis, spec),
        )


def run_pdd(channels: ChannelSet, config: ScenarioConfig, opts: Optional[SolverOptions] = None, *,
            project_profile: Optional[ProfileProjection] = None,
            initial_theta: Optional[StarRisProfile] = None, update_profile: bool = True) -> PddResult:
    """Solve one realization with the penalty dual decomposition loop."""
    solver = PddSolver(opts, project_profile=project_profile, update_profile=update_profile)
    return solver.solve(channels, config, initial_theta=initial_theta)
