"""Trimodal reweighted-kernel distribution family."""

from .distribution import (
    MixtureWeights,
    ModalityReport,
    ParamVector,
    TrimodalDistribution,
    t_transform,
)
from .kernels import KERNEL_NAMES, HFunction, Kernel, get_kernel

__version__ = "0.1.0"

__all__ = [
    "KERNEL_NAMES",
    "HFunction",
    "Kernel",
    "MixtureWeights",
    "ModalityReport",
    "ParamVector",
    "TrimodalDistribution",
    "get_kernel",
    "t_transform",
    "__version__",
]
