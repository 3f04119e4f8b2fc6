"""Source models and outcome statistics.

Covers the Gaussian time-frequency biphoton, two-mode squeezed vacuum
quadrature tails, fiber loss, and binned joint outcome distributions.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .continuous_povm import IntervalBinSpec

SPEED_OF_LIGHT = 299_792_458.0
MACHINE_ZERO = 2.0**-52
NULL = "null"

TIME_CONVENTIONS = ("direct_eq11", "paper_calibrated")
VACUUM_CONVENTIONS = ("unit_variance", "half_variance")


def angular_frequency(wavelength_m: float) -> float:
    return 2 * math.pi * SPEED_OF_LIGHT / wavelength_m


def frequency_range(wavelength_a: float, wavelength_b: float) -> tuple:
    """Angular-frequency window ``(lo, hi)`` spanned by two wavelengths."""
    w = sorted((angular_frequency(wavelength_a), angular_frequency(wavelength_b)))
    return w[0], w[1]


def half_period(rep_rate_hz: float) -> float:
    """Half of the repetition period: the arrival-time window is ``[-t_c, t_c]``."""
    return 1.0 / (2.0 * rep_rate_hz)


def flush_to_zero(p: float, floor: float = MACHINE_ZERO) -> float:
    """Report probabilities below ``floor`` as exactly zero."""
    return 0.0 if p < floor else p


@dataclass(frozen=True)
class GaussianBiphoton:
    """Biphoton with Gaussian joint spectrum.

    ``sigma_cor`` sets the spread of ``w_A - w_B`` (spectral amplitude
    ``exp(-(w_A-w_B)^2 sigma_cor^2/4)``) and ``sigma_coh`` the spread of
    ``w_A + w_B`` (amplitude ``exp(-(w_A+w_B)^2 sigma_coh^2)``). Frequencies
    are relative to ``omega_o`` internally.

    ``time_std_convention`` picks how the arrival-time spread is derived:
    ``direct_eq11`` Fourier transforms the amplitude literally, giving a
    single-photon time spread close to ``sigma_coh``; ``paper_calibrated``
    takes ``Var(t_A + t_B) = sigma_coh^2`` so the spread is about
    ``sigma_coh / 2``, which reproduces the 0.27% out-of-window rate at a
    55.6 MHz repetition rate.
    """

    sigma_coh: float = 6e-9
    sigma_cor: float = 2e-12
    omega_o: float = angular_frequency(1550e-9)
    time_std_convention: str = "paper_calibrated"

    def __post_init__(self):
        if not self.sigma_coh > self.sigma_cor > 0:
            raise ValueError("need sigma_coh > sigma_cor > 0")
        if self.time_std_convention not in TIME_CONVENTIONS:
            raise ValueError(f"unknown time convention {self.time_std_convention!r}")

    def frequency_covariance(self) -> np.ndarray:
        var_diff = 1.0 / self.sigma_cor**2
        var_sum = 1.0 / (4.0 * self.sigma_coh**2)
        return _cov_from_sum_diff(var_sum, var_diff)

    def time_covariance(self) -> np.ndarray:
        var_diff = self.sigma_cor**2
        if self.time_std_convention == "direct_eq11":
            var_sum = 4.0 * self.sigma_coh**2
        else:
            var_sum = self.sigma_coh**2
        return _cov_from_sum_diff(var_sum, var_diff)


def _cov_from_sum_diff(var_sum: float, var_diff: float) -> np.ndarray:
    # a = (s + d)/2, b = (s - d)/2 with s, d independent
    v = (var_sum + var_diff) / 4
    c = (var_sum - var_diff) / 4
    return np.array([[v, c], [c, v]])


def marginal_stds(src: GaussianBiphoton) -> tuple:
    """Single-party ``(frequency std [rad/s], arrival-time std [s])``."""
    return (
        math.sqrt(src.frequency_covariance()[0, 0]),
        math.sqrt(src.time_covariance()[0, 0]),
    )


def _two_sided_tail(lo: float, hi: float, std: float) -> float:
    """Mass of N(0, std^2) outside ``[lo, hi]``."""
    return float(ndtr(lo / std) + ndtr(-hi / std))


def null_prob_frequency(src: GaussianBiphoton, range_lo: float, range_hi: float) -> float:
    """Probability a photon's frequency falls outside ``[range_lo, range_hi]`` (rad/s)."""
    if not range_lo < range_hi:
        raise ValueError("degenerate frequency range")
    if not range_lo <= src.omega_o <= range_hi:
        raise ValueError("frequency range must contain the central frequency")
    std, _ = marginal_stds(src)
    return _two_sided_tail(range_lo - src.omega_o, range_hi - src.omega_o, std)


def null_prob_time(src: GaussianBiphoton, t_c: float) -> float:
    """Probability a photon arrives outside ``[-t_c, t_c]``."""
    if not t_c > 0:
        raise ValueError("t_c must be positive")
    _, std = marginal_stds(src)
    return _two_sided_tail(-t_c, t_c, std)


@dataclass(frozen=True)
class TmsvSpec:
    """Two-mode squeezed vacuum seen through one quadrature.

    The single-mode quadrature variance is the anti-squeezing factor times the
    vacuum variance, which is 1 or 1/2 depending on the convention.
    """

    antisqueezing_db: float = 19.3
    vacuum_variance_convention: str = "half_variance"

    def __post_init__(self):
        if self.antisqueezing_db < 0:
            raise ValueError("antisqueezing_db must be non-negative")
        if self.vacuum_variance_convention not in VACUUM_CONVENTIONS:
            raise ValueError(f"unknown vacuum convention {self.vacuum_variance_convention!r}")

    @property
    def vacuum_variance(self) -> float:
        return 1.0 if self.vacuum_variance_convention == "unit_variance" else 0.5

    @property
    def quadrature_std(self) -> float:
        return math.sqrt(10 ** (self.antisqueezing_db / 10) * self.vacuum_variance)

    @property
    def commutator(self) -> float:
        """``k`` in ``[x, p] = i k``."""
        return 2.0 * self.vacuum_variance


def tmsv_saturation_prob(spec: TmsvSpec, range_lo: float, range_hi: float, mean_shift: float = 0.0) -> float:
    """Probability a quadrature outcome lands outside the detector range.

    ``mean_shift`` displaces the distribution, emulating a saturation attack.
    """
    if not range_lo < 0 < range_hi:
        raise ValueError("quadrature range must contain 0")
    return _two_sided_tail(range_lo - mean_shift, range_hi - mean_shift, spec.quadrature_std)


@dataclass(frozen=True)
class ChannelModel:
    loss_db_per_km: float = 0.2
    distance_km: float = 0.0

    def __post_init__(self):
        if self.loss_db_per_km < 0 or self.distance_km < 0:
            raise ValueError("loss and distance must be non-negative")

    @property
    def transmission(self) -> float:
        return 10 ** (-self.loss_db_per_km * self.distance_km / 10)

    def at(self, distance_km: float) -> "ChannelModel":
        return ChannelModel(self.loss_db_per_km, distance_km)


def apply_loss_to_null_prob(p_null: float, channel: ChannelModel) -> float:
    """Null rate seen after the channel: lost photons also give no click."""
    if not 0 <= p_null <= 1:
        raise ValueError("p_null must be a probability")
    return 1 - channel.transmission * (1 - p_null)


# Joint distributions -----------------------------------------------------------


@dataclass(frozen=True)
class JointDistribution:
    """Joint distribution of two discrete outcomes.

    Stored as ``local + mix_weight * outer(row_factor, col_factor)``: a sparse
    non-negative matrix plus an optional rank-one term. The rank-one part
    carries outcomes that were resampled independently (lost photons), which
    would otherwise make a large alphabet dense.
    """

    row_labels: tuple
    col_labels: tuple
    local: sp.csr_array
    mix_weight: float = 0.0
    row_factor: np.ndarray | None = None
    col_factor: np.ndarray | None = None

    def __post_init__(self):
        local = sp.csr_array(self.local, dtype=float)
        local.sum_duplicates()
        object.__setattr__(self, "local", local)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        if local.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError("label counts do not match the probability matrix")
        if local.nnz and local.data.min() < -1e-15:
            raise ValueError("negative probability")
        if self.mix_weight:
            a = np.asarray(self.row_factor, dtype=float)
            b = np.asarray(self.col_factor, dtype=float)
            if a.shape != (local.shape[0],) or b.shape != (local.shape[1],):
                raise ValueError("rank-one factors have the wrong length")
            if self.mix_weight < 0 or a.min() < 0 or b.min() < 0:
                raise ValueError("negative probability")
            object.__setattr__(self, "row_factor", a / a.sum())
            object.__setattr__(self, "col_factor", b / b.sum())
        else:
            object.__setattr__(self, "row_factor", None)
            object.__setattr__(self, "col_factor", None)
        total = self.total()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_dense(cls, probs, row_labels=None, col_labels=None) -> "JointDistribution":
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != 2:
            raise ValueError("probability table must be 2-D")
        rows = tuple(range(probs.shape[0])) if row_labels is None else row_labels
        cols = tuple(range(probs.shape[1])) if col_labels is None else col_labels
        return cls(rows, cols, sp.csr_array(probs))

    @property
    def shape(self) -> tuple:
        return self.local.shape

    def total(self) -> float:
        return float(self.local.sum()) + float(self.mix_weight)

    def dense(self, max_entries: int = 50_000_000) -> np.ndarray:
        if self.shape[0] * self.shape[1] > max_entries:
            raise ValueError(f"distribution of shape {self.shape} is too large to materialize")
        out = self.local.toarray()
        if self.mix_weight:
            out += self.mix_weight * np.outer(self.row_factor, self.col_factor)
        return out

    def row_marginal(self) -> np.ndarray:
        m = np.asarray(self.local.sum(axis=1)).ravel()
        if self.mix_weight:
            m = m + self.mix_weight * self.row_factor
        return m

    def col_marginal(self) -> np.ndarray:
        m = np.asarray(self.local.sum(axis=0)).ravel()
        if self.mix_weight:
            m = m + self.mix_weight * self.col_factor
        return m

    def without_row(self, label) -> "JointDistribution":
        """Condition on the row outcome differing from ``label``."""
        keep = np.array([lab != label for lab in self.row_labels])
        kept_mass = float(self.row_marginal()[keep].sum())
        if kept_mass <= 0:
            raise ValueError("no probability mass left after dropping the row")
        local = self.local[keep] / kept_mass
        rows = tuple(lab for lab in self.row_labels if lab != label)
        if not self.mix_weight:
            return JointDistribution(rows, self.col_labels, local)
        a = self.row_factor[keep]
        w = self.mix_weight * a.sum() / kept_mass
        if a.sum() == 0:
            return JointDistribution(rows, self.col_labels, local)
        return JointDistribution(rows, self.col_labels, local, w, a, self.col_factor)

    def to_csv(self, fh=None) -> str | None:
        """Write ``row,col,probability`` lines for the non-zero entries."""
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row", "col", "probability"])
        dense = self.dense()
        for i, j in zip(*np.nonzero(dense)):
            writer.writerow([self.row_labels[i], self.col_labels[j], format(dense[i, j], ".17g")])
        return buf.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, text: str) -> "JointDistribution":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != ["row", "col", "probability"]:
            raise ValueError(f"unexpected CSV header {header}")
        entries = [(r, c, float(p)) for r, c, p in reader]
        rows = list(dict.fromkeys(r for r, _, _ in entries))
        cols = list(dict.fromkeys(c for _, c, _ in entries))
        ri = {lab: k for k, lab in enumerate(rows)}
        ci = {lab: k for k, lab in enumerate(cols)}
        probs = np.zeros((len(rows), len(cols)))
        for r, c, p in entries:
            probs[ri[r], ci[c]] = p
        return cls.from_dense(probs, rows, cols)


def _labels(bins: IntervalBinSpec) -> tuple:
    return tuple(range(bins.n_bins)) + (NULL,)


def _conditional_block(
    var_cond: float,
    var_other: float,
    cov: float,
    lower_cond: np.ndarray,
    upper_cond: np.ndarray,
    lower_other: np.ndarray,
    upper_other: np.ndarray,
    n_gauss: int = 10,
    cutoff: float = 13.0,
    chunk: int = 2048,
):
    """Probabilities that the conditioning variable lands in each of its bins
    and the other variable in each of its bins (or in none of them).

    Both variables are zero-mean jointly Gaussian. Returns COO triplets for the
    in-bin block and a vector of "other variable outside every bin" masses.
    """
    sd_c = math.sqrt(var_cond)
    slope = cov / var_cond
    s = math.sqrt(max(var_other - cov * slope, 0.0))
    s = max(s, 1e-300)
    nodes, weights = leggauss(n_gauss)

    n_other = lower_other.size
    width_other = float(np.min(upper_other - lower_other)) if n_other else 1.0
    band = min(n_other, int(math.ceil(2 * cutoff * s / width_other)) + 3)
    other_edges = np.unique(np.concatenate([lower_other, upper_other]))
    offsets = np.array([0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
    offsets = np.concatenate([-offsets[:0:-1], offsets]) * s

    rows_out, cols_out, vals_out = [], [], []
    other_null = np.zeros(lower_cond.size)
    live = np.nonzero((upper_cond > -cutoff * sd_c) & (lower_cond < cutoff * sd_c))[0]
    for start in range(0, live.size, chunk):
        idx = live[start : start + chunk]
        t_nodes, t_weights, owner = [], [], []
        for i in idx:
            a, b = lower_cond[i], upper_cond[i]
            cuts = [a, b]
            if slope != 0 and s / abs(slope) < (b - a):
                m_lo, m_hi = sorted((slope * a, slope * b))
                k0, k1 = np.searchsorted(other_edges, (m_lo - 9 * s, m_hi + 9 * s))
                sel = other_edges[k0:k1]
                if sel.size:
                    crit = ((sel[:, None] + offsets[None, :]) / slope).ravel()
                    cuts.extend(crit[(crit > a) & (crit < b)])
            else:
                cuts.append(0.5 * (a + b))
            cuts = np.unique(cuts)
            lo, hi = cuts[:-1], cuts[1:]
            half = 0.5 * (hi - lo)
            mid = 0.5 * (hi + lo)
            t_nodes.append((mid[:, None] + half[:, None] * nodes[None, :]).ravel())
            t_weights.append((half[:, None] * weights[None, :]).ravel())
            owner.append(np.full(lo.size * n_gauss, i))
        t = np.concatenate(t_nodes)
        w = np.concatenate(t_weights) * np.exp(-0.5 * (t / sd_c) ** 2) / (sd_c * math.sqrt(2 * math.pi))
        owner = np.concatenate(owner)
        m = slope * t
        if n_other == 0:
            other_null += np.bincount(owner, w, minlength=other_null.size)
            continue
        j0 = np.searchsorted(upper_other, m - cutoff * s)
        j0 = np.clip(j0, 0, max(n_other - band, 0))
        cols = j0[:, None] + np.arange(band)[None, :]
        p = ndtr((upper_other[cols] - m[:, None]) / s) - ndtr((lower_other[cols] - m[:, None]) / s)
        p = np.clip(p, 0.0, None)
        inside = p.sum(axis=1)
        other_null += np.bincount(owner, w * np.clip(1.0 - inside, 0.0, None), minlength=other_null.size)
        contrib = w[:, None] * p
        keep = contrib > 0
        rows_out.append(np.broadcast_to(owner[:, None], cols.shape)[keep])
        cols_out.append(cols[keep])
        vals_out.append(contrib[keep])
    if rows_out:
        r, c, v = np.concatenate(rows_out), np.concatenate(cols_out), np.concatenate(vals_out)
    else:
        r = c = np.zeros(0, dtype=int)
        v = np.zeros(0)
    return r, c, v, other_null


def _relative_edges(bins: IntervalBinSpec, shift: float) -> tuple:
    """Bin edges relative to ``shift``; contiguous bins share edges exactly."""
    if bins.is_contiguous() and bins.n_bins:
        start = bins.centers[0] - shift - bins.width / 2
        edges = start + bins.width * np.arange(bins.n_bins + 1)
        return edges[:-1], edges[1:]
    c = bins.centers - shift
    return c - bins.width / 2, c + bins.width / 2


def binned_gaussian_joint(
    cov: np.ndarray,
    bins_a: IntervalBinSpec,
    bins_b: IntervalBinSpec,
    mean=(0.0, 0.0),
) -> JointDistribution:
    """Bin a bivariate normal distribution, with a null outcome on each side.

    The null outcome collects everything outside the bins. Integration runs
    over one variable with Gauss-Legendre panels split where the conditional
    distribution of the other variable crosses a bin edge.
    """
    cov = np.asarray(cov, dtype=float)
    la, ua = _relative_edges(bins_a, mean[0])
    lb, ub = _relative_edges(bins_b, mean[1])
    na, nb = la.size, lb.size
    r, c, v, b_null = _conditional_block(cov[0, 0], cov[1, 1], cov[0, 1], la, ua, lb, ub)
    _, _, _, a_null = _conditional_block(cov[1, 1], cov[0, 0], cov[0, 1], lb, ub, la, ua)
    block = sp.coo_array((v, (r, c)), shape=(na + 1, nb + 1)).tocsr()
    extra_r = np.concatenate([np.arange(na), np.full(nb, na)])
    extra_c = np.concatenate([np.full(na, nb), np.arange(nb)])
    extra_v = np.concatenate([b_null, a_null])
    nulls = sp.coo_array((extra_v, (extra_r, extra_c)), shape=(na + 1, nb + 1)).tocsr()
    local = (block + nulls).tocsr()
    both_null = max(0.0, 1.0 - float(local.sum()))
    local = local + sp.coo_array(([both_null], ([na], [nb])), shape=(na + 1, nb + 1)).tocsr()
    local.eliminate_zeros()
    return JointDistribution(_labels(bins_a), _labels(bins_b), local.tocsr())


def apply_bob_loss(joint: JointDistribution, channel: ChannelModel, bob_null_replacement: bool) -> JointDistribution:
    """Send Bob's side through a lossy channel.

    A lost photon is a null outcome for Bob. With ``bob_null_replacement`` Bob
    relabels every null outcome by an independent draw from Alice's public
    non-null marginal, and the null column disappears.
    """
    if joint.mix_weight:
        raise ValueError("loss is applied to a source distribution without a mixed part")
    eta = channel.transmission
    na, nb = joint.shape
    null_col = joint.col_labels.index(NULL)
    p_a = joint.row_marginal()
    lost = sp.coo_array(((1 - eta) * p_a, (np.arange(na), np.full(na, null_col))), shape=(na, nb))
    local = (eta * joint.local + lost).tocsr()
    if not bob_null_replacement:
        return JointDistribution(joint.row_labels, joint.col_labels, local)
    a_null = joint.row_labels.index(NULL)
    public = np.delete(p_a, a_null)
    if public.size != nb - 1:
        raise ValueError("null replacement needs Alice and Bob to share one alphabet")
    keep_cols = [j for j in range(nb) if j != null_col]
    null_mass = local[:, [null_col]].toarray().ravel()
    local = local[:, keep_cols]
    cols = tuple(joint.col_labels[j] for j in keep_cols)
    weight = float(null_mass.sum())
    if weight == 0:
        return JointDistribution(joint.row_labels, cols, local)
    return JointDistribution(joint.row_labels, cols, local, weight, null_mass, public)


def joint_time_distribution(
    src: GaussianBiphoton,
    bins_a: IntervalBinSpec,
    bins_b: IntervalBinSpec,
    channel: ChannelModel = ChannelModel(),
    bob_null_replacement: bool = False,
) -> JointDistribution:
    """Binned arrival times of Alice and Bob, with loss on Bob's arm."""
    src_joint = binned_gaussian_joint(src.time_covariance(), bins_a, bins_b)
    return apply_bob_loss(src_joint, channel, bob_null_replacement)


def joint_frequency_distribution(
    src: GaussianBiphoton,
    bins_a: IntervalBinSpec,
    bins_b: IntervalBinSpec,
    channel: ChannelModel = ChannelModel(),
    bob_null_replacement: bool = False,
) -> JointDistribution:
    """Binned absolute frequencies (rad/s) of Alice and Bob."""
    src_joint = binned_gaussian_joint(
        src.frequency_covariance(), bins_a, bins_b, mean=(src.omega_o, src.omega_o)
    )
    return apply_bob_loss(src_joint, channel, bob_null_replacement)
