"""Multi-frequency Calderon-Zygmund decomposition and variational multiplier toolkit."""
from .czdecomp import CzOutput, InvariantViolation, cz_decompose, verify_bounds
from .expspan import be_ratio, gram, riesz_project
from .grid import DyadicInterval, FrequencySet, Interval, SampledSignal
from .multifreq import KRange, MultiplierFamily, MotherSymbol, SmoothingKernel, calV, delta_k, scaling_scan
from .variation import VectorSequence, jump_cover, parent_table, rm_block, tilde_variation

__all__ = [
    "CzOutput", "InvariantViolation", "cz_decompose", "verify_bounds",
    "be_ratio", "gram", "riesz_project",
    "DyadicInterval", "FrequencySet", "Interval", "SampledSignal",
    "KRange", "MultiplierFamily", "MotherSymbol", "SmoothingKernel", "calV", "delta_k", "scaling_scan",
    "VectorSequence", "jump_cover", "parent_table", "rm_block", "tilde_variation",
]
