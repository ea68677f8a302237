"""Preferential attachment with random initial degrees."""

from ._core import (
    ConfigError,
    PreconditionError,
    UnsupportedRegime,
    WeightDistribution,
    __version__,
    closed_form_constant,
    exponents,
    generate,
    limit_pk,
    verify,
)

__all__ = [
    "ConfigError",
    "PreconditionError",
    "UnsupportedRegime",
    "WeightDistribution",
    "__version__",
    "closed_form_constant",
    "exponents",
    "generate",
    "limit_pk",
    "verify",
]
