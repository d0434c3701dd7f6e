# spectral_operations/validators.py
"""attrs validators shared by the value types; failures raise ConfigurationError
naming the attribute so the config layer can prefix the section path."""

import math

from spectral_operations.errors import ConfigurationError


def finite(instance, attribute, value):
    if not math.isfinite(value):
        raise ConfigurationError(f"{attribute.name} must be finite, got {value!r}")


def positive(instance, attribute, value):
    if not (math.isfinite(value) and value > 0):
        raise ConfigurationError(f"{attribute.name} must be positive, got {value!r}")


def nonnegative(instance, attribute, value):
    if not (math.isfinite(value) and value >= 0):
        raise ConfigurationError(f"{attribute.name} must be non-negative, got {value!r}")


def positive_int(instance, attribute, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigurationError(f"{attribute.name} must be a positive integer, got {value!r}")
