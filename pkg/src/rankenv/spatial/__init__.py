"""Point patterns, their simulation and summary functions."""
from .fit import FitError, fit_csr, fit_matclust, fit_null
from .models import (Binomial, HardCore, MatClust, Poisson, Superposition, generate,
                     mix_matclust, parse_model)
from .pattern import PointPattern, Window, read_pattern, write_pattern
from .shift import random_shift, shift_by
from .summary import (EdgeCorrection, SummarySpec, cross_l_function, estimate_many,
                      estimate_summary, f_function, g_function, j_function, k_function,
                      l_function, pcf)

__all__ = [
    "Binomial", "EdgeCorrection", "FitError", "HardCore", "MatClust", "PointPattern",
    "Poisson", "SummarySpec", "Superposition", "Window", "cross_l_function",
    "estimate_many", "estimate_summary", "f_function", "fit_csr", "fit_matclust",
    "fit_null", "g_function", "generate", "j_function", "k_function", "l_function",
    "mix_matclust", "parse_model", "pcf", "random_shift", "read_pattern", "shift_by",
    "write_pattern",
]
