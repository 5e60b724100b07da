from typing import Optional

from .registry import variant_registry
from .logger import logger
from .optimizer import PddResult, SolverOptions
from .scenario import ChannelSet, ScenarioConfig
from .validation import ConfigError

# Import all variants to ensure they're registered
from .star_ris import StarRisVariant
from .conventional_ris import ConventionalRisVariant
from .no_ris import NoRisVariant


def get_variant(name: str, options: Optional[SolverOptions] = None):
    """
    Factory function to create system variant instances using the registry pattern.

    Args:
        name: Variant name ('STAR', 'cRIS', 'NoRIS'; case-insensitive aliases accepted)
        options: Solver options shared by every solve of the instance

    Returns:
        BaseVariant: An instance of the registered variant

    Raises:
        ConfigError: If the variant is not registered
    """
    try:
        return variant_registry.create_variant(name, options)
    except ConfigError as e:
        logger.error(f"Failed to create variant: {e}")
        raise


def solve_variant(channels: ChannelSet, config: ScenarioConfig, options: Optional[SolverOptions] = None,
                  variant: Optional[str] = None, seed: Optional[int] = None) -> PddResult:
    """Solve one realization with ``variant`` (defaults to ``config.system_variant``)."""
    return get_variant(variant or config.system_variant, options).solve(channels, config, seed=seed)
