from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from .logging_mixin import LoggingMixin
from .model import StarRisProfile
from .optimizer import PddResult, SolverOptions, run_pdd
from .scenario import ChannelSet, ScenarioConfig
from .validation import EvaluationError


class BaseVariant(ABC, LoggingMixin):
    """A system variant: how the surface is modeled and which profile set is feasible."""

    name: str = ""
    updates_profile: bool = True

    def __init__(self, options: Optional[SolverOptions] = None):
        self.options = options or SolverOptions()
        self.log_variant_init(self.name, self.updates_profile)

    def prepare_channels(self, channels: ChannelSet) -> ChannelSet:
        return channels

    @abstractmethod
    def initial_profile(self, n_ris: int) -> StarRisProfile:
        pass

    @abstractmethod
    def project_profile(self, raw: np.ndarray, rng: np.random.Generator) -> StarRisProfile:
        pass

    def solve(self, channels: ChannelSet, config: ScenarioConfig, seed: Optional[int] = None) -> PddResult:
        channels = self.prepare_channels(channels)
        if not channels.is_finite():
            self.log_contract_event("NON_FINITE_CHANNELS", {"variant": self.name, "seed": seed})
            raise EvaluationError("Channel realization contains non-finite entries")

        start = self.log_solve_start(self.name, channels.n_ris, channels.n_users, channels.n_targets, seed)
        result = run_pdd(channels, config, self.options,
                         project_profile=self.project_profile,
                         initial_theta=self.initial_profile(channels.n_ris),
                         update_profile=self.updates_profile)
        self.log_solve_end(self.name, start, result.metrics.sum_secrecy_nats, result.converged, seed)
        return result
