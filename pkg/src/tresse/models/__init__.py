"""Pydantic models for Tresse configuration and reports."""

from tresse.models.config import ClassifyConfig, OutputConfig, SamplingConfig, TresseConfig

__all__ = [
    "ClassifyConfig",
    "OutputConfig",
    "SamplingConfig",
    "TresseConfig",
]
