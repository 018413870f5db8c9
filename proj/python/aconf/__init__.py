"""Algorithm configuration: parameter spaces, configurators and campaign evaluation."""

from ._core import (
    AconfError,
    ParameterSpace,
    approaches,
    campaign_synthetic,
    configure_synthetic,
    gga_schedule,
    penalized_cost,
    spearman,
    speedup_factor,
)

__all__ = [
    "AconfError",
    "ParameterSpace",
    "approaches",
    "campaign_synthetic",
    "configure_synthetic",
    "gga_schedule",
    "penalized_cost",
    "spearman",
    "speedup_factor",
]
