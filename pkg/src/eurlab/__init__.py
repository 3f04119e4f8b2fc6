"""Entropic uncertainty bounds with null outcomes."""
from .bounds import (
    BoundInput,
    BoundResult,
    SmoothParams,
    cond_max_entropy_classical,
    cond_shannon,
    eur_modified,
    eur_modified_smooth,
    eur_unmodified,
    key_rate,
    smoothing_f,
)
from .continuous_povm import IntervalBinSpec, analytic_overlap, slepian_overlap_oracle
from .operators import MatrixPovm, validate_povm

__version__ = "0.1.0"
