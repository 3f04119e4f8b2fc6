"""One test per acceptance criterion; each records a PASS/FAIL line for the summary."""
import math

import numpy as np
import pytest

from eurlab.bounds import BoundInput, SmoothParams, eur_modified, eur_modified_smooth, eur_unmodified, smoothing_f
from eurlab.continuous_povm import analytic_overlap, slepian_overlap_oracle
from eurlab.scenarios import (
    appendix1_equivalence_check,
    bound_falsifier,
    cv_saturation_report,
    equal_null_crossing,
    nunn_attack_sim,
    px_frontier,
    time_frequency_config,
)
from eurlab.states import (
    ChannelModel,
    GaussianBiphoton,
    TmsvSpec,
    frequency_range,
    half_period,
    marginal_stds,
    null_prob_frequency,
    null_prob_time,
    tmsv_saturation_prob,
)

RNG_SEED = 20160419


def test_criterion_1_reduction(acceptance):
    rng = np.random.default_rng(RNG_SEED)
    c = 10.0 ** rng.uniform(-12, 0, 10_000)
    h = rng.uniform(-5, 30, 10_000)
    worst = 0.0
    for ci, hi in zip(c, h):
        worst = max(worst, abs(eur_modified(BoundInput(0.0, 0.0, ci, hi)).raw_bound - eur_unmodified(ci, hi)))
    ok = worst <= 1e-12
    acceptance(1, ok, f"max |modified - unmodified| = {worst:.2e} over 10^4 draws")
    assert ok


def test_criterion_2_contour_thresholds(acceptance):
    cross = equal_null_crossing(1e-3, 1.0)
    cross0 = equal_null_crossing(0.0, 1.0)
    front = px_frontier(1e-3, 1e-3, 1.0)
    ok = abs(cross - 0.232) <= 0.005 and abs(cross0 - 0.25) <= 1e-4 and abs(front - 0.92) <= 0.02
    acceptance(2, ok, f"crossing {cross:.5f}, c->0 crossing {cross0:.6f}, frontier {front:.5f}")
    assert ok


def _trapz_tail(std, lo, hi, n=400_001):
    from scipy.integrate import trapezoid
    from scipy.stats import norm

    x = np.linspace(lo, hi, n)
    return 1 - trapezoid(norm.pdf(x, scale=std), x)


def test_criterion_3_null_probabilities(acceptance):
    src = GaussianBiphoton()
    f_std, t_std = marginal_stds(src)
    t_c = half_period(55.6e6)
    lo, hi = frequency_range(1520e-9, 1610e-9)
    p_t = null_prob_time(src, t_c)
    p_f = null_prob_frequency(src, lo, hi)
    dev_t = abs(p_t - _trapz_tail(t_std, -t_c, t_c))
    # the frequency window spans well over 100 std; integrate only where the density lives
    dev_f = abs(p_f - _trapz_tail(f_std, max(lo - src.omega_o, -40 * f_std), min(hi - src.omega_o, 40 * f_std)))
    ok = abs(p_t - 0.0027) <= 0.0002 and p_f < 2**-52 and dev_t < 1e-8 and dev_f < 1e-8
    acceptance(3, ok, f"p_T = {p_t:.7f}, p_F = {p_f:.1e}, oracle gaps {dev_t:.1e} / {dev_f:.1e}")
    assert ok


def test_criterion_4_overlap(acceptance):
    rng = np.random.default_rng(RNG_SEED)
    worst = 0.0
    for c in np.concatenate([[1e-4, 0.5], 10.0 ** rng.uniform(-4, math.log10(0.5), 60)]):
        dt = 1e-9
        dw = 4 * c / dt
        worst = max(worst, abs(slepian_overlap_oracle(dw, dt) / analytic_overlap(dw, dt) - 1))
    small = max(abs(analytic_overlap(2 * math.pi * r, 1.0) / r - 1) for r in np.linspace(1e-4, 0.1, 200))
    large = analytic_overlap(2 * math.pi * 20, 1.0)
    op = analytic_overlap(2 * math.pi * 1e-3, 1.0)
    ok = worst < 0.01 and small < 0.05 and large >= 0.999 and abs(op / 1e-3 - 1) < 0.05
    acceptance(4, ok, f"oracle rel err {worst:.1e}, small-product dev {small:.3f}, large {large:.6f}, c at 1e-3: {op:.4e}")
    assert ok


def test_criterion_5_keyrate(acceptance, reference_scan):
    rates = [r[-1] for r in reference_scan.rows]
    onset = reference_scan.zero_onset_km
    monotone = all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))
    ok = rates[0] > 0 and onset is not None and 0.5 <= onset <= 5.0 and monotone
    acceptance(5, ok, f"rate(0) = {rates[0]:.3f} bits, zero-rate onset {onset:.3f} km, monotone {monotone}")
    assert ok


def test_criterion_6_saturation(acceptance):
    worst_p = max(tmsv_saturation_prob(TmsvSpec(19.3, conv), -61.6, 61.6) for conv in ("half_variance", "unit_variance"))
    rep = cv_saturation_report()
    gap = abs(rep.bound.raw_bound - eur_unmodified(rep.c_less, rep.h_max))
    ok = worst_p < 1e-10 and gap <= 1e-12
    acceptance(6, ok, f"p_sat = {worst_p:.1e}, |bound - unmodified| = {gap:.1e}")
    assert ok


def test_criterion_7_smoothing(acceptance):
    rng = np.random.default_rng(RNG_SEED)
    p = rng.uniform(0, 1, 10_000)
    eps = rng.uniform(0, 0.5, 10_000)
    ident = all(smoothing_f(x, 0.0, s) == x for x in p[:1000] for s in ("plus", "minus"))
    sandwich = all(smoothing_f(x, e, "minus") <= x <= smoothing_f(x, e, "plus") for x, e in zip(p, eps))
    worst = 0.0
    for k in range(1000):
        inp = BoundInput(p[k] * 0.3, p[-k - 1] * 0.3, 10.0 ** (-4 * eps[k]), 4 * eps[-k - 1])
        a, b = eur_modified_smooth(inp, SmoothParams(0.0)).raw_bound, eur_modified(inp).raw_bound
        worst = max(worst, abs(a - b))
    ok = ident and sandwich and worst <= 1e-12
    acceptance(7, ok, f"f(p,0)=p {ident}, sandwich over 10^4 pairs {sandwich}, eps=0 gap {worst:.1e}")
    assert ok


def test_criterion_8_equivalence(acceptance):
    rep = appendix1_equivalence_check(1000, dims=(2, 3, 4, 5, 6), seed=RNG_SEED)
    ok = rep.passed and rep.max_deviation <= 1e-10
    acceptance(
        8, ok,
        f"{rep.n_trials} trials, max deviation {rep.max_deviation:.1e}, invalid POVMs {rep.invalid_povms}",
    )
    assert ok


def test_criterion_9_falsifier(acceptance):
    dims = ((2, 2, 2), (3, 3, 3), (4, 4, 4), (2, 4, 4), (4, 2, 3))
    rep = bound_falsifier(2000, dims=dims, seed=1)
    ok = rep.n_instances == 10_000 and rep.n_violations == 0
    acceptance(
        9, ok,
        f"{rep.n_instances} instances, {rep.n_violations} violations, {rep.n_candidates} candidates, "
        f"max excess {rep.max_excess:.2e}",
    )
    assert ok


def test_criterion_10_attack(acceptance):
    att = nunn_attack_sim(time_frequency_config(), 1e5).to_dict()
    _, t_std = marginal_stds(GaussianBiphoton())
    clean_cfg = time_frequency_config(time_window=12 * t_std, channel=ChannelModel(0.0))
    clean = nunn_attack_sim(clean_cfg, None).to_dict()
    loophole = att["naive_bound_bits"] > 0 and att["modified_bound"]["clamped_bound_bits"] == 0.0
    ok = loophole and clean["agree_within_3se"]
    acceptance(
        10, ok,
        f"attacked: naive {att['naive_bound_bits']:.3f} vs modified {att['modified_bound']['clamped_bound_bits']:.1f}; "
        f"no attack gap {clean['naive_minus_modified_bits']:.3g} (3 se = {3 * clean['standard_error_bits']:.3g})",
    )
    assert ok
