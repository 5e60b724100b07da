"""
Registry of system variants using decorators.
Variants register under a canonical name plus case-insensitive aliases.
"""

from typing import Any, Dict, Optional

from .logger import logger
from .validation import ConfigError


class VariantRegistry:
    """Registry for system variants with decorator-based registration."""

    def __init__(self):
        self._variants: Dict[str, Dict[str, Any]] = {}
        self._aliases: Dict[str, str] = {}

    def register_variant(self, name: str, description: str = "", aliases: tuple = ()):
        """
        Decorator to register a variant class.

        Args:
            name: Canonical variant name (e.g., "STAR", "cRIS")
            description: One-line description shown by ``list_variants``
            aliases: Extra names accepted on the command line
        """
        def decorator(cls):
            cls.name = name
            self._variants[name] = {"class": cls, "description": description}
            for alias in (name, *aliases):
                self._aliases[alias.lower()] = name
            logger.debug(f"Registered variant: {name} -> {cls.__name__}")
            return cls
        return decorator

    def resolve(self, name: str) -> str:
        canonical = self._aliases.get(str(name).lower())
        if canonical is None:
            available = list(self._variants.keys())
            raise ConfigError(f"Unsupported variant: {name}. Available: {available}")
        return canonical

    def get_variant_info(self, name: str) -> Dict[str, Any]:
        return self._variants[self.resolve(name)]

    def list_variants(self) -> Dict[str, str]:
        """Canonical names mapped to their descriptions."""
        return {name: info["description"] for name, info in self._variants.items()}

    def create_variant(self, name: str, options: Optional[Any] = None):
        info = self.get_variant_info(name)
        variant_class = info["class"]
        logger.debug(f"Instantiating {variant_class.__name__}")
        return variant_class(options)


# Global registry instance
variant_registry = VariantRegistry()


def register_variant(name: str, description: str = "", aliases: tuple = ()):
    """Register a system variant."""
    return variant_registry.register_variant(name, description, aliases)


def list_variants() -> Dict[str, str]:
    return variant_registry.list_variants()
