"""Homodyne saturation check for a squeezed-light source."""
from __future__ import annotations

from dataclasses import dataclass

from scipy.optimize import brentq

from ..bounds import BoundInput, eur_modified, eur_unmodified
from ..continuous_povm import analytic_overlap
from ..states import TmsvSpec, flush_to_zero, tmsv_saturation_prob


@dataclass(frozen=True)
class SaturationReport:
    spec: TmsvSpec
    range_lo: float
    range_hi: float
    bin_width: float
    mean_shift: float
    p_sat_x: float
    p_sat_p: float
    c_less: float
    h_max: float
    bound: object
    unmodified_bits: float

    @property
    def abort(self) -> bool:
        return self.bound.clamped or self.bound.clamped_bound == 0.0

    def to_dict(self) -> dict:
        return {
            "antisqueezing_db": self.spec.antisqueezing_db,
            "vacuum_variance_convention": self.spec.vacuum_variance_convention,
            "range": [self.range_lo, self.range_hi],
            "bin_width": self.bin_width,
            "mean_shift": self.mean_shift,
            "p_sat_x": self.p_sat_x,
            "p_sat_p": self.p_sat_p,
            "c_less": self.c_less,
            "h_max_bits": self.h_max,
            "bound": self.bound.to_dict(),
            "unmodified_bound_bits": self.unmodified_bits,
            "abort": self.abort,
        }


def cv_saturation_report(
    spec: TmsvSpec = TmsvSpec(),
    range_lo: float = -61.6,
    range_hi: float = 61.6,
    bin_width: float = 0.08,
    h_max: float = 1.0,
    mean_shift: float = 0.0,
) -> SaturationReport:
    """Saturation probabilities of both quadratures and the resulting bound.

    The abort flag is raised whenever the null-aware bound is clamped to 0.
    """
    px = flush_to_zero(tmsv_saturation_prob(spec, range_lo, range_hi, mean_shift))
    pp = flush_to_zero(tmsv_saturation_prob(spec, range_lo, range_hi, mean_shift))
    c = analytic_overlap(bin_width, bin_width / spec.commutator)
    bound = eur_modified(BoundInput(px, pp, c, h_max))
    return SaturationReport(spec, range_lo, range_hi, bin_width, mean_shift, px, pp, c, h_max, bound, eur_unmodified(c, h_max))


def shift_for_saturation(spec: TmsvSpec, range_lo: float, range_hi: float, target: float) -> float:
    """Positive mean shift that makes the saturation probability equal ``target``."""
    base = tmsv_saturation_prob(spec, range_lo, range_hi)
    if not base < target < 1:
        raise ValueError("target must exceed the unshifted saturation probability and be below 1")
    span = range_hi - range_lo + 20 * spec.quadrature_std
    return brentq(lambda m: tmsv_saturation_prob(spec, range_lo, range_hi, m) - target, 0.0, span, xtol=1e-12)
