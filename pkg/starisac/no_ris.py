import numpy as np

from .base import BaseVariant
from .model import StarRisProfile
from .registry import register_variant
from .scenario import ChannelSet


@register_variant("NoRIS", "Direct links only, surface channels zeroed", aliases=("noris", "none"))
class NoRisVariant(BaseVariant):
    updates_profile = False

    def prepare_channels(self, channels: ChannelSet) -> ChannelSet:
        return channels.without_ris()

    def initial_profile(self, n_ris: int) -> StarRisProfile:
        return StarRisProfile.uniform(n_ris)

    def project_profile(self, raw: np.ndarray, rng: np.random.Generator) -> StarRisProfile:
        # Never called while updates_profile is False
        return StarRisProfile.from_stacked(raw)
