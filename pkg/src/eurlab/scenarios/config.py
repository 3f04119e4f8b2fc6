"""Experiment parameter bundles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..bounds import SmoothParams
from ..continuous_povm import IntervalBinSpec, analytic_overlap
from ..states import ChannelModel, GaussianBiphoton, TmsvSpec, frequency_range, half_period

DEFAULT_SEED = 20_160_419


def bin_width_for_overlap(target: float, other_width: float, commutator: float = 1.0) -> float:
    """Width ``w`` with ``analytic_overlap(w, other_width / commutator) == target``."""
    if not 0 < target < 1:
        raise ValueError("target overlap must lie in (0, 1)")
    other = other_width / commutator
    # overlap ~ w*other/2pi for small products
    guess = 2 * math.pi * target / other
    return brentq(lambda w: analytic_overlap(w, other) - target, guess / 10, guess * 10, xtol=1e-12 * guess, rtol=1e-14)


@dataclass(frozen=True)
class ScenarioConfig:
    """Source, binning, channel and scan settings for one driver run.

    ``bins`` is the pair (key basis, test basis): frequency then time for the
    biphoton source, x then p for the squeezed source.
    """

    source: GaussianBiphoton | TmsvSpec
    bins: tuple
    channel: ChannelModel = ChannelModel()
    distances_km: tuple = (0.0,)
    smoothing: SmoothParams = SmoothParams()
    c_less_override: float | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        d = tuple(float(x) for x in self.distances_km)
        object.__setattr__(self, "distances_km", d)
        if not d:
            raise ValueError("distance list is empty")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("distances must be strictly increasing")
        if len(self.bins) != 2:
            raise ValueError("bins must be a (key, test) pair")
        if self.c_less_override is not None and not 0 <= self.c_less_override <= 1:
            raise ValueError("c_less_override must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def key_bins(self) -> IntervalBinSpec:
        return self.bins[0]

    @property
    def test_bins(self) -> IntervalBinSpec:
        return self.bins[1]

    def c_less(self) -> float:
        if self.c_less_override is not None:
            return self.c_less_override
        commutator = self.source.commutator if isinstance(self.source, TmsvSpec) else 1.0
        return analytic_overlap(self.key_bins.width, self.test_bins.width / commutator)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def time_frequency_config(
    time_bin: float = 20e-12,
    freq_bin: float | None = None,
    c_target: float = 1e-3,
    rep_rate: float = 55.6e6,
    wavelengths: tuple = (1520e-9, 1610e-9),
    time_window: float | None = None,
    source: GaussianBiphoton = GaussianBiphoton(),
    channel: ChannelModel = ChannelModel(),
    distances_km: tuple = tuple(np.round(np.arange(0.0, 5.0001, 0.1), 10)),
    **kwargs,
) -> ScenarioConfig:
    """Biphoton scenario; the frequency bin defaults to the width giving ``c_target``.

    Time bins tile ``[-t_w, t_w]`` with ``t_w`` half the repetition period
    unless ``time_window`` is given. Frequency bins sit on a lattice centered
    at the source's central frequency.
    """
    t_w = half_period(rep_rate) if time_window is None else time_window
    if freq_bin is None:
        freq_bin = bin_width_for_overlap(c_target, time_bin)
    lo, hi = frequency_range(*wavelengths)
    fbins = IntervalBinSpec.uniform(freq_bin, lo, hi, anchor=source.omega_o)
    tbins = IntervalBinSpec.uniform(time_bin, -t_w, t_w)
    return ScenarioConfig(source, (fbins, tbins), channel, distances_km, **kwargs)


@dataclass(frozen=True)
class TripartiteTestState:
    """Pure state on A x B x E stored as an amplitude tensor ``psi[a, b, e]``."""

    dims: tuple
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if len(dims) != 3 or any(not 1 <= d <= 4 for d in dims):
            raise ValueError(f"dims must be three integers in 1..4, got {dims}")
        if amp.shape != dims:
            amp = amp.reshape(dims)
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"state norm is {norm!r}, not 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amp)

    def rho_a(self) -> np.ndarray:
        psi = self.amplitudes
        return np.einsum("abe,cbe->ac", psi, psi.conj())
