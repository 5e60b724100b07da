import numpy as np

from .base import BaseVariant
from .model import StarRisProfile
from .projections import crirs_project_profile
from .registry import register_variant


@register_variant("cRIS", "Two conventional surfaces of N_S/2 elements, one reflect-only, one transmit-only",
                  aliases=("cris", "conventional"))
class ConventionalRisVariant(BaseVariant):
    """First half of the elements reflects, second half transmits."""

    def initial_profile(self, n_ris: int) -> StarRisProfile:
        return crirs_project_profile(StarRisProfile.uniform(n_ris), system_variant="cRIS")

    def project_profile(self, raw: np.ndarray, rng: np.random.Generator) -> StarRisProfile:
        return crirs_project_profile(raw, rng=rng, system_variant="cRIS")
