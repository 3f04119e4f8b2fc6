"""Entropic uncertainty bounds and classical conditional entropies (bits)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import JointDistribution

TERMS = ("z_null", "x_null", "overlap")


@dataclass(frozen=True)
class BoundInput:
    """Inputs of the null-aware bound.

    ``h_max_term`` is the conditional max-entropy of Alice's informative
    outcomes given Bob (or any upper bound on it), in bits.
    """

    p_z_null: float
    p_x_null: float
    c_less: float
    h_max_term: float

    def __post_init__(self):
        for name in ("p_z_null", "p_x_null", "c_less"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if math.isnan(self.h_max_term):
            raise ValueError("h_max_term is NaN")


@dataclass(frozen=True)
class BoundResult:
    raw_bound: float
    clamped_bound: float
    clamped: bool
    dominant_term: str
    diagnostic: str | None = None

    def to_dict(self) -> dict:
        out = {
            "raw_bound_bits": self.raw_bound,
            "clamped_bound_bits": self.clamped_bound,
            "clamped": self.clamped,
            "dominant_term": self.dominant_term,
        }
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        return out


@dataclass(frozen=True)
class SmoothParams:
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")


def eur_unmodified(c: float, h_max: float) -> float:
    """``-log2 c - h_max``; ``+inf`` when ``c == 0``."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"overlap must lie in [0, 1], got {c}")
    if c == 0.0:
        return math.inf
    return -math.log2(c) - h_max


def _result(terms: tuple, diagnostic: str | None = None) -> BoundResult:
    bracket = sum(terms)
    dominant = TERMS[int(np.argmax(terms))]
    if bracket == 0.0:
        return BoundResult(math.inf, math.inf, False, dominant, diagnostic)
    raw = -2.0 * math.log2(bracket)
    clamped = raw < 0
    return BoundResult(raw, max(0.0, raw), clamped, dominant, diagnostic)


def _terms(p_z: float, p_x: float, p_x_kept: float, c: float, h: float) -> tuple:
    # sqrt(c) * sqrt(2)^h, computed in log space to survive large |h|
    if c == 0.0 or p_x_kept == 0.0:
        overlap = 0.0
    else:
        overlap = math.sqrt(p_x_kept) * 2.0 ** (0.5 * (math.log2(c) + h))
    return math.sqrt(p_z), math.sqrt(p_x), overlap


def eur_modified(inp: BoundInput) -> BoundResult:
    """Lower bound on ``H_min(Z_A|E)`` that tolerates null outcomes.

    ``-2 log2[sqrt(pZ) + sqrt(pX) + sqrt(1-pX) sqrt(c<) sqrt(2)^Hmax]``,
    clamped at zero. When the bracket reaches 1 the trivial bound wins.
    """
    return _result(_terms(inp.p_z_null, inp.p_x_null, 1.0 - inp.p_x_null, inp.c_less, inp.h_max_term))


def smoothing_f(p: float, eps: float, sign: str) -> float:
    """Extreme null probability over states within purified distance ``eps``.

    Writing ``p = sin^2(phi)`` and ``1 - eps = cos(theta)``, the closed form is
    ``sin^2(phi +/- theta)``. Past ``phi +/- theta`` leaving ``[0, pi/2]`` the
    optimum saturates, so ``f_-`` is 0 once ``p < eps(2 - eps)`` and ``f_+`` is
    1 once ``p > (1 - eps)^2``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps}")
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    if eps == 0.0:
        return p
    base = 2 * eps + p + 2 * p * eps**2 - 4 * p * eps - eps**2
    root = 2 * (1 - eps) * math.sqrt(max(0.0, p * (1 - p) * (2 * eps - eps**2)))
    if sign == "plus":
        if p > (1 - eps) ** 2:
            return 1.0
        return min(1.0, max(p, base + root))
    if p < eps * (2 - eps):
        return 0.0
    return max(0.0, min(p, base - root))


def eur_modified_smooth(inp: BoundInput, smooth: SmoothParams) -> BoundResult:
    """Smooth variant: null probabilities enter through their worst case in the ball."""
    eps = smooth.epsilon
    pz = smoothing_f(inp.p_z_null, eps, "plus")
    px = smoothing_f(inp.p_x_null, eps, "plus")
    px_low = smoothing_f(inp.p_x_null, eps, "minus")
    diagnostic = None
    if pz >= 1.0 and px >= 1.0:
        diagnostic = "smoothed null probabilities both reach 1"
    return _result(_terms(pz, px, 1.0 - px_low, inp.c_less, inp.h_max_term), diagnostic)


def key_rate(bound: BoundResult, leak: float) -> float:
    if leak < 0:
        raise ValueError("leak must be non-negative")
    return max(0.0, bound.clamped_bound - leak)


# Classical entropies -----------------------------------------------------------


def _plogp(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = -x[pos] * np.log2(x[pos])
    return out


def _entropy(p: np.ndarray) -> float:
    return float(_plogp(p).sum())


def _local_parts(j: JointDistribution):
    coo = j.local.tocoo()
    s = coo.data
    if j.mix_weight:
        r = j.mix_weight * j.row_factor[coo.row] * j.col_factor[coo.col]
    else:
        r = np.zeros_like(s)
    return coo.row, coo.col, s, r


def joint_entropy(j: JointDistribution) -> float:
    _, _, s, r = _local_parts(j)
    h = float(_plogp(s + r).sum() - _plogp(r).sum())
    if j.mix_weight:
        w = j.mix_weight
        # sum over all cells of f(w a_i b_j)
        h += float(_plogp(np.array([w]))[0]) + w * (_entropy(j.row_factor) + _entropy(j.col_factor))
    return h


def cond_shannon(j: JointDistribution) -> float:
    """``H(A|B)`` with rows as A and columns as B."""
    return joint_entropy(j) - _entropy(j.col_marginal())


def cond_max_entropy_classical(j: JointDistribution) -> float:
    """Order-1/2 conditional Renyi entropy ``log2 sum_b (sum_a sqrt p(a,b))^2``."""
    rows, cols, s, r = _local_parts(j)
    col_sums = np.bincount(cols, np.sqrt(s + r) - np.sqrt(r), minlength=j.shape[1])
    if j.mix_weight:
        col_sums = col_sums + np.sqrt(j.mix_weight * j.col_factor) * np.sqrt(j.row_factor).sum()
    return float(math.log2(np.sum(col_sums**2)))
