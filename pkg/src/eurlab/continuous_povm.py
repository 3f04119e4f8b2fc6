"""Binned continuous observables and the overlap of interval projectors.

Bins are kept symbolic (intervals), never as matrices. The maximum overlap
between a time bin of width ``dt`` and a frequency bin of width ``dw`` is the
top eigenvalue of the time- and band-limiting operator with bandwidth
parameter ``c = dw*dt/4``; :func:`analytic_overlap` evaluates it through the
prolate spheroidal radial function and :func:`slepian_overlap_oracle`
discretizes the integral operator directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.sparse.linalg import eigsh
from scipy.special import eval_legendre

_REL_TOL = 1e-9


@dataclass(frozen=True)
class IntervalBinSpec:
    """Equal-width bins of a continuous observable inside a detection window.

    ``centers`` are bin midpoints; every bin must lie inside
    ``[range_lo, range_hi]`` and bins may not overlap.
    """

    centers: tuple
    width: float
    range_lo: float
    range_hi: float

    def __post_init__(self):
        centers = np.sort(np.asarray(self.centers, dtype=float).ravel())
        object.__setattr__(self, "centers", centers)
        if not self.width > 0:
            raise ValueError(f"bin width must be positive, got {self.width}")
        if not self.range_lo < self.range_hi:
            raise ValueError(f"empty detection range [{self.range_lo}, {self.range_hi}]")
        slack = _REL_TOL * self.width
        if centers.size > 1 and np.min(np.diff(centers)) < self.width - slack:
            raise ValueError("bins overlap: center spacing is smaller than the bin width")
        if centers.size and (
            centers[0] - self.width / 2 < self.range_lo - slack
            or centers[-1] + self.width / 2 > self.range_hi + slack
        ):
            raise ValueError("bins extend beyond the detection range")

    @classmethod
    def uniform(cls, width: float, range_lo: float, range_hi: float, anchor: float | None = None):
        """Tile the range with as many whole bins as fit.

        Without ``anchor`` the tiling starts at ``range_lo``; with it the bin
        centers sit on the lattice ``anchor + k*width``.
        """
        if not width > 0:
            raise ValueError(f"bin width must be positive, got {width}")
        if anchor is None:
            n = int(math.floor((range_hi - range_lo) / width * (1 + _REL_TOL)))
            centers = range_lo + width * (np.arange(n) + 0.5)
        else:
            k_lo = math.ceil((range_lo + width / 2 - anchor) / width - _REL_TOL)
            k_hi = math.floor((range_hi - width / 2 - anchor) / width + _REL_TOL)
            centers = anchor + width * np.arange(k_lo, k_hi + 1)
        return cls(centers, width, range_lo, range_hi)

    @property
    def n_bins(self) -> int:
        return self.centers.size

    @property
    def lower(self) -> np.ndarray:
        return self.centers - self.width / 2

    @property
    def upper(self) -> np.ndarray:
        return self.centers + self.width / 2

    def is_contiguous(self) -> bool:
        return self.n_bins < 2 or bool(np.allclose(np.diff(self.centers), self.width, rtol=1e-9, atol=0))

    def edges(self) -> np.ndarray:
        """Bin edges, for contiguous bins only."""
        if not self.is_contiguous():
            raise ValueError("bins are not contiguous")
        return np.append(self.lower, self.upper[-1:])

    def uncovered(self) -> tuple:
        """Parts of the detection window no bin covers."""
        gaps = []
        lo = self.range_lo
        for a, b in zip(self.lower, self.upper):
            if a > lo + _REL_TOL * self.width:
                gaps.append((lo, float(a)))
            lo = max(lo, float(b))
        if self.range_hi > lo + _REL_TOL * self.width:
            gaps.append((lo, self.range_hi))
        return tuple(gaps)

    def to_config(self) -> dict:
        return {"centers": "auto", "width": self.width, "range_lo": self.range_lo, "range_hi": self.range_hi}


@dataclass(frozen=True)
class BinnedPovm:
    """Symbolic POVM: one element per bin plus a null element.

    The null element is the complement of the detection window. Any uncovered
    slivers inside the window are listed in ``uncovered`` and are also
    counted as null outcomes by the statistics code.
    """

    kind: str
    bins: IntervalBinSpec
    null_regions: tuple = field(init=False)

    def __post_init__(self):
        regions = ((-math.inf, self.bins.range_lo), (self.bins.range_hi, math.inf))
        object.__setattr__(self, "null_regions", regions)

    @property
    def null_index(self) -> int:
        return self.bins.n_bins

    @property
    def uncovered(self) -> tuple:
        return self.bins.uncovered()

    def __len__(self) -> int:
        return self.bins.n_bins + 1


def build_time_frequency_povms(freq: IntervalBinSpec, time: IntervalBinSpec) -> tuple:
    """Frequency (key) and arrival-time descriptors, in that order."""
    return BinnedPovm("frequency", freq), BinnedPovm("time", time)


def build_quadrature_povms(x: IntervalBinSpec, p: IntervalBinSpec) -> tuple:
    if not math.isclose(x.width, p.width, rel_tol=1e-12):
        raise ValueError(f"quadrature bins need a common width (got {x.width} and {p.width})")
    return BinnedPovm("x", x), BinnedPovm("p", p)


def bins_in_window(width: float, half_window: float) -> int:
    """Whole bins of ``width`` that tile ``[-half_window, half_window]``."""
    return IntervalBinSpec.uniform(width, -half_window, half_window).n_bins


# Prolate spheroidal route ----------------------------------------------------


def _prolate_legendre_coeffs(c: float) -> tuple:
    """Even Legendre coefficients of the lowest prolate angular function."""
    n_terms = int(c) + 30
    k = 2.0 * np.arange(n_terms)
    # x^2 in the orthonormal Legendre basis, even block
    diag = k * (k + 1) + c * c * (2 * k * k + 2 * k - 1) / ((2 * k - 1) * (2 * k + 3))
    kk = k[:-1]
    off = c * c * (kk + 1) * (kk + 2) / ((2 * kk + 3) * np.sqrt((2 * kk + 1) * (2 * kk + 5)))
    mat = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    _, vecs = np.linalg.eigh(mat)
    coeffs = vecs[:, 0] * np.sqrt((2 * k + 1) / 2)
    return k.astype(int), coeffs


def prolate_radial_at_one(c: float) -> float:
    """Radial prolate function ``R_00^(1)(c, 1)``.

    Uses the integral identity ``int_{-1}^{1} S_00(c,t) dt = 2 R_00(c,1) S_00(c,0)``
    with ``S_00`` expanded in Legendre polynomials, so only the ``P_0``
    coefficient survives the integral.
    """
    k, d = _prolate_legendre_coeffs(c)
    return float(d[0] / np.sum(d * eval_legendre(k, 0.0)))


def analytic_overlap(delta_omega: float, delta_t: float) -> float:
    """Maximum overlap of a frequency bin and a time bin.

    ``(dw*dt/2pi) * R_00(dw*dt/4, 1)**2``; tends to ``dw*dt/2pi`` for small
    products and to 1 for large ones.
    """
    if not (delta_omega > 0 and delta_t > 0):
        raise ValueError("bin widths must be positive")
    c = delta_omega * delta_t / 4
    if c > 20:
        # 1 - lambda_0 ~ 4 sqrt(pi c) exp(-2c) is below double precision here
        return 1.0
    val = (2 * c / math.pi) * prolate_radial_at_one(c) ** 2
    return min(val, 1.0)


@dataclass(frozen=True)
class SlepianGrid:
    n_points: int = 128
    rule: str = "gauss-legendre"
    rtol: float = 1e-6
    max_doublings: int = 6

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("n_points must be at least 64")
        if self.rule not in ("gauss-legendre", "midpoint"):
            raise ValueError(f"unknown quadrature rule {self.rule!r}")


def _nodes(rule: str, n: int, half: float) -> tuple:
    if rule == "gauss-legendre":
        x, w = leggauss(n)
        return half * x, half * w
    h = 2 * half / n
    return -half + h * (np.arange(n) + 0.5), np.full(n, h)


def _slepian_top_eigenvalue(delta_omega: float, delta_t: float, n: int, rule: str) -> float:
    t, w = _nodes(rule, n, delta_t / 2)
    diff = t[:, None] - t[None, :]
    np.fill_diagonal(diff, 1.0)
    kern = np.sin(delta_omega * diff / 2) / (np.pi * diff)
    np.fill_diagonal(kern, delta_omega / (2 * np.pi))
    sw = np.sqrt(w)
    mat = sw[:, None] * kern * sw[None, :]
    if n <= 512:
        return float(np.linalg.eigvalsh(mat)[-1])
    return float(eigsh(mat, k=1, which="LA", return_eigenvectors=False)[0])


def slepian_overlap_oracle(delta_omega: float, delta_t: float, grid: SlepianGrid = SlepianGrid()) -> float:
    """Top eigenvalue of the discretized band-limiting kernel on a time bin.

    The grid is doubled until successive values agree to ``grid.rtol``.
    """
    if not (delta_omega > 0 and delta_t > 0):
        raise ValueError("bin widths must be positive")
    n = grid.n_points
    prev = _slepian_top_eigenvalue(delta_omega, delta_t, n, grid.rule)
    for _ in range(grid.max_doublings):
        n *= 2
        cur = _slepian_top_eigenvalue(delta_omega, delta_t, n, grid.rule)
        if abs(cur - prev) <= grid.rtol * abs(cur):
            return cur
        prev = cur
    raise RuntimeError(f"Slepian eigenvalue did not converge by n_points={n}")


def binned_overlap(a: BinnedPovm, b: BinnedPovm, commutator: float = 1.0) -> float:
    """Restricted overlap of two conjugate binned observables.

    ``commutator`` is the scale ``k`` in ``[a, b] = i k``; time/frequency and
    quadratures with vacuum variance 1/2 use ``k = 1``.
    """
    return analytic_overlap(a.bins.width, b.bins.width / commutator)
