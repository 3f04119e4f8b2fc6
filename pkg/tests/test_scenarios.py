import math

import numpy as np
import pytest
from scipy.integrate import quad

from eurlab.bounds import eur_unmodified
from eurlab.continuous_povm import analytic_overlap
from eurlab.operators import random_density
from eurlab.scenarios import (
    TripartiteTestState,
    appendix1_equivalence_check,
    bin_width_for_overlap,
    bound_falsifier,
    cv_saturation_report,
    equal_null_crossing,
    fig2_contour,
    lemma_check,
    nunn_attack_sim,
    px_frontier,
    shift_for_saturation,
    sinc2_window_prob,
    tf_keyrate_scan,
    time_frequency_config,
)
from eurlab.scenarios.falsifier import fidelity_sum_lower, fidelity_sum_sdp, guess_prob
from eurlab.states import ChannelModel, GaussianBiphoton, TmsvSpec, marginal_stds


def test_contour_summary():
    res = fig2_contour(grid_n=11)
    s = res.summary()
    assert len(res.rows) == 121
    assert s["equal_null_crossing"] == pytest.approx(0.23077, abs=1e-5)
    assert s["frontier_p_x_null"] == pytest.approx(0.91228, abs=1e-5)
    assert res.rows[0][2] == pytest.approx(eur_unmodified(1e-3, 1.0), abs=1e-12)
    with pytest.raises(ValueError):
        fig2_contour(grid_n=1)


def test_crossing_limits():
    assert equal_null_crossing(0.0, 1.0) == pytest.approx(0.25, abs=1e-12)
    assert equal_null_crossing(1.0, 0.0) == 0.0
    assert px_frontier(0.95, 1e-3, 1.0) == 0.0


def test_bin_width_for_overlap():
    w = bin_width_for_overlap(1e-3, 20e-12)
    assert analytic_overlap(w, 20e-12) == pytest.approx(1e-3, rel=1e-9)


def test_time_frequency_config_shape():
    cfg = time_frequency_config()
    assert cfg.test_bins.n_bins == 899
    assert len(cfg.test_bins.uncovered()) == 1
    assert cfg.c_less() == pytest.approx(1e-3, rel=1e-9)
    assert cfg.key_bins.width == pytest.approx(314159351.49, rel=1e-9)


def _toy_config(**kw):
    src = GaussianBiphoton(sigma_coh=6e-9, sigma_cor=2e-12)
    return time_frequency_config(time_bin=40e-12, c_target=0.05, source=src, **kw)


def test_keyrate_lossless_is_flat():
    scan = tf_keyrate_scan(_toy_config(channel=ChannelModel(0.0), distances_km=(0.0, 5.0, 50.0)), refine=False)
    rates = [r[-1] for r in scan.rows]
    assert rates[0] > 0
    assert rates == pytest.approx([rates[0]] * 3, abs=1e-12)
    assert scan.zero_onset_km is None


def test_keyrate_monotone(reference_scan):
    rates = [r[-1] for r in reference_scan.rows]
    assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))
    leaks = [r[4] for r in reference_scan.rows]
    assert all(b >= a - 1e-12 for a, b in zip(leaks, leaks[1:]))
    assert reference_scan.p_f_null == 0.0


def test_keyrate_rejects_tmsv():
    cfg = _toy_config()
    bad = type(cfg)(TmsvSpec(), cfg.bins, cfg.channel, cfg.distances_km)
    with pytest.raises(TypeError):
        tf_keyrate_scan(bad)


def test_saturation_defaults():
    rep = cv_saturation_report()
    assert rep.p_sat_x == 0.0
    assert rep.bound.raw_bound == pytest.approx(rep.unmodified_bits, abs=1e-12)
    assert not rep.abort
    assert rep.c_less == pytest.approx(1e-3, rel=0.02)


def test_saturation_attack_aborts():
    spec = TmsvSpec()
    shift = shift_for_saturation(spec, -61.6, 61.6, 0.3)
    rep = cv_saturation_report(spec, mean_shift=shift)
    assert rep.p_sat_x == pytest.approx(0.3, abs=1e-9)
    assert rep.abort
    assert rep.to_dict()["abort"] is True
    with pytest.raises(ValueError):
        shift_for_saturation(spec, -61.6, 61.6, 1.5)


def test_sinc2_window_prob_by_quadrature():
    for width, half in ((1e5, 1e-9), (1e9, 5e-9), (3e10, 2e-9)):
        a = width * half / 2
        val = quad(lambda u: np.sinc(u / np.pi) ** 2 / np.pi, -a, a, limit=500)[0]
        assert sinc2_window_prob(width, half) == pytest.approx(val, abs=1e-9)
    assert sinc2_window_prob(0.0, 1.0) == 0.0


def test_attack_narrow_bins():
    rep = nunn_attack_sim(time_frequency_config(), 1e5, n_trials=20_000).to_dict()
    assert rep["naive_bound_bits"] > 0
    assert rep["modified_bound"]["clamped"]
    assert rep["modified_bound"]["clamped_bound_bits"] == 0.0
    assert rep["observed_p_x_null"] > 0.99


def test_attack_absent_agrees():
    _, t_std = marginal_stds(GaussianBiphoton())
    cfg = time_frequency_config(time_window=12 * t_std, channel=ChannelModel(0.0))
    rep = nunn_attack_sim(cfg, None, n_trials=20_000).to_dict()
    assert rep["agree_within_3se"]
    assert rep["attack_fraction"] == 0.0


def test_attack_validation():
    cfg = time_frequency_config()
    with pytest.raises(ValueError):
        nunn_attack_sim(cfg, 1e5, n_trials=10)
    with pytest.raises(ValueError):
        nunn_attack_sim(cfg, -1.0, n_trials=1000)


def test_attack_is_seeded():
    cfg = time_frequency_config()
    a = nunn_attack_sim(cfg, 1e5, n_trials=2000).to_dict()
    b = nunn_attack_sim(cfg, 1e5, n_trials=2000).to_dict()
    assert a == b


def test_helstrom_pure_states():
    theta = 0.4
    a = np.array([1, 0], dtype=complex)
    b = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
    sig = np.stack([np.outer(a, a.conj()), np.outer(b, b.conj())])[None] / 2
    lo, hi = guess_prob(sig)
    expect = 0.5 * (1 + math.sqrt(1 - math.cos(theta) ** 2))
    assert lo[0] == pytest.approx(expect, abs=1e-12)


def test_guess_prob_bounds_bracket():
    rng = np.random.default_rng(3)
    sig = np.stack([random_density(3, rng) / 3 for _ in range(3)])[None]
    lo, hi = guess_prob(sig, iters=400)
    assert 1 / 3 - 1e-12 <= lo[0] <= hi[0] + 1e-12
    assert hi[0] - lo[0] < 1e-3
    orth = np.stack([np.diag(np.eye(3)[k]) / 3 for k in range(3)]).astype(complex)[None]
    assert guess_prob(orth)[0][0] == pytest.approx(1.0, abs=1e-9)


def test_fidelity_sum_matches_sdp():
    rng = np.random.default_rng(4)
    rhos = np.stack([random_density(2, rng) * w for w in (0.3, 0.7)])
    assert fidelity_sum_lower(rhos[None])[0] == pytest.approx(fidelity_sum_sdp(rhos), abs=1e-6)


def test_falsifier_small_run():
    rep = bound_falsifier(60, dims=((2, 2, 2), (3, 2, 2)), seed=11, lemma_trials=20)
    d = rep.to_dict()
    assert rep.passed
    assert d["n_violations"] == 0
    assert d["n_instances"] == 120
    assert d["max_excess"] <= 1e-9


def test_falsifier_seeded():
    a = bound_falsifier(20, seed=5, lemma_trials=5).to_dict()
    b = bound_falsifier(20, seed=5, lemma_trials=5).to_dict()
    assert a == b


def test_falsifier_rejects_large_dims():
    with pytest.raises(ValueError):
        bound_falsifier(4, dims=((5, 2, 2),))


def test_lemma_check():
    res = lemma_check(50, np.random.default_rng(0))
    assert res["failures"] == 0


def test_equivalence_small():
    rep = appendix1_equivalence_check(50, seed=2)
    assert rep.passed
    assert rep.max_deviation < 1e-10


def test_tripartite_state():
    psi = np.zeros((2, 2, 2))
    psi[0, 0, 0] = psi[1, 1, 1] = 1 / math.sqrt(2)
    st = TripartiteTestState((2, 2, 2), psi)
    assert np.allclose(st.rho_a(), np.eye(2) / 2)
    prod = TripartiteTestState((2, 2, 1), np.array([1, 0, 0, 0]))
    assert np.allclose(prod.rho_a(), np.diag([1, 0]))
    with pytest.raises(ValueError):
        TripartiteTestState((2, 2, 2), np.ones(8))
    with pytest.raises(ValueError):
        TripartiteTestState((5, 1, 1), np.eye(5)[0])
