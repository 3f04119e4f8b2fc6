"""End-to-end drivers."""
from .attack import nunn_attack_sim, sinc2_window_prob
from .config import ScenarioConfig, TripartiteTestState, bin_width_for_overlap, time_frequency_config
from .contour import equal_null_crossing, fig2_contour, px_frontier
from .equivalence import appendix1_equivalence_check
from .falsifier import bound_falsifier, lemma_check
from .keyrate import tf_keyrate_scan
from .saturation import cv_saturation_report, shift_for_saturation

__all__ = [
    "ScenarioConfig",
    "TripartiteTestState",
    "appendix1_equivalence_check",
    "bin_width_for_overlap",
    "bound_falsifier",
    "cv_saturation_report",
    "equal_null_crossing",
    "fig2_contour",
    "lemma_check",
    "nunn_attack_sim",
    "px_frontier",
    "shift_for_saturation",
    "sinc2_window_prob",
    "tf_keyrate_scan",
    "time_frequency_config",
]
