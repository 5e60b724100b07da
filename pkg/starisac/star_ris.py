import numpy as np

from .base import BaseVariant
from .model import StarRisProfile
from .projections import project_star_profile
from .registry import register_variant


@register_variant("STAR", "Simultaneously transmitting and reflecting surface, power-splitting mode",
                  aliases=("star", "star-ris"))
class StarRisVariant(BaseVariant):
    def initial_profile(self, n_ris: int) -> StarRisProfile:
        return StarRisProfile.uniform(n_ris)

    def project_profile(self, raw: np.ndarray, rng: np.random.Generator) -> StarRisProfile:
        return project_star_profile(raw, rng)
