"""Forward and inverse Fourier transforms over graded and equispaced frequency grids."""

from fthms.ftransform.grid import FrequencyGrid, TimeSamples, build_time_samples
from fthms.ftransform.inverse import InverseTransform, inverse_ft, recenter_sum
from fthms.ftransform.partition import TimeWindowPartition

__all__ = [
    "FrequencyGrid",
    "InverseTransform",
    "TimeSamples",
    "TimeWindowPartition",
    "build_time_samples",
    "inverse_ft",
    "recenter_sum",
]
