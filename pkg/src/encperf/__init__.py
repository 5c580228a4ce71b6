"""Certified and simulated l2-gain analysis for encrypted dynamic controllers."""
from .analysis import AnalysisError, AnalysisResult, METHODS, min_l2_gain
from .fixtures import batch_reactor_plant, hinf_controller
from .ss_core import ClosedLoop, Controller, PerformanceIndex, Plant, interconnect

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "AnalysisResult",
    "METHODS",
    "min_l2_gain",
    "batch_reactor_plant",
    "hinf_controller",
    "ClosedLoop",
    "Controller",
    "PerformanceIndex",
    "Plant",
    "interconnect",
]
