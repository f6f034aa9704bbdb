import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import gamma

from arqddf.codebook_lab import (
    DecoderConfig,
    LabConfig,
    bounded_distance_accept,
    build_codebook,
    build_relay_signatures,
    chernoff_factor,
    ml_decode,
    prefix_distances,
    relay_switch_symbol,
    run_arq_lab,
    superior_radius2,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_ml_exact_and_tie():
    sig = build_codebook(8, 16, 1.0, rng()).codewords
    assert ml_decode(sig[5], sig) == 5
    two = np.array([[1.0 + 0j, 0], [-1.0, 0]])
    assert ml_decode(np.zeros(2, complex), two) == 0
    with pytest.raises(ValueError):
        ml_decode(np.zeros(2), np.zeros((0, 2)))


def test_accept_trivial_cases():
    cfg = DecoderConfig(T=16, L=2, delta=0.2)
    sig = build_codebook(8, 32, 100.0, rng(1)).codewords
    assert bounded_distance_accept(sig[3, :16], sig[:, :16], 1, cfg) == 3
    same = np.repeat(sig[:1], 4, axis=0)
    assert bounded_distance_accept(same[0, :16], same[:, :16], 1, cfg) is None
    far = sig[0, :16] + 1e3
    assert bounded_distance_accept(far, sig[:, :16], 1, cfg) is None


def test_decoder_config():
    with pytest.raises(ValueError):
        DecoderConfig(delta=0)
    assert DecoderConfig(T=10, delta=0.5, sigma2=2.0).radius2(3) == pytest.approx(90.0)
    assert superior_radius2(10, 0.2, 0.5, 100.0) == pytest.approx(10 * 1.2 * 51)


def test_codebook_energy():
    for T in (64, 128):
        cb = build_codebook(256, T, 3.0, rng(T))
        assert abs(np.mean(np.abs(cb.codewords) ** 2) / 3.0 - 1) < 0.05
        per_word = np.mean(np.abs(cb.codewords) ** 2, axis=1)
        assert np.all(np.abs(per_word / 3.0 - 1) < 0.5)


def test_relay_signatures():
    g = rng(2)
    src, rel = build_codebook(16, 64, 1.0, g).codewords, build_codebook(16, 64, 1.0, g).codewords
    g_sd, g_rd = 0.7 - 0.2j, 1.1 + 0.5j
    assert np.array_equal(build_relay_signatures(src, rel, g_sd, g_rd, 64), g_sd * src)
    assert np.allclose(build_relay_signatures(src, rel, g_sd, 0.0, 10), g_sd * src)
    sig = build_relay_signatures(src, rel, g_sd, g_rd, 20)
    assert np.allclose(sig[:, :20], g_sd * src[:, :20])
    assert np.allclose(sig[:, 20:], g_sd * src[:, 20:] + g_rd * rel[:, 20:])


def test_signature_energy():
    g = rng(3)
    M, n, E, sw = 512, 128, 2.0, 48
    src, rel = build_codebook(M, n, E, g).codewords, build_codebook(M, n, E, g).codewords
    g_sd, g_rd = 0.8, 0.6j
    sig = build_relay_signatures(src, rel, g_sd, g_rd, sw)
    want = E * (abs(g_sd) ** 2 * n + abs(g_rd) ** 2 * (n - sw))
    assert abs(np.mean(np.sum(np.abs(sig) ** 2, axis=1)) / want - 1) < 0.05


def test_prefix_distances_match_direct():
    g = rng(4)
    B, M, L, T = 5, 8, 2, 6
    C1, C2 = build_codebook(M, L * T, 1.0, g).codewords, build_codebook(M, L * T, 1.0, g).codewords
    c1 = g.standard_normal(B) + 1j * g.standard_normal(B)
    c2 = g.standard_normal(B) + 1j * g.standard_normal(B)
    mask = (np.arange(L * T)[None, :] >= g.integers(0, L * T, B)[:, None]).astype(float)
    y = g.standard_normal((B, L * T)) + 1j * g.standard_normal((B, L * T))
    got = prefix_distances(y, [(c1, C1, None), (c2, C2, mask)], L, T)
    for b in range(B):
        sig = c1[b] * C1 + c2[b] * mask[b] * C2
        for ell in range(1, L + 1):
            k = ell * T
            direct = np.sum(np.abs(y[b, :k] - sig[:, :k]) ** 2, axis=1)
            assert np.allclose(got[b, :, ell - 1], direct, rtol=1e-10, atol=1e-9)


def test_switch_symbol():
    assert relay_switch_symbol(6.0, 0.0, 100) == 100
    assert relay_switch_symbol(6.0, 4.0, 100) == 2
    assert relay_switch_symbol(600.0, 1.0, 100) == 100


@given(st.floats(0.01, 2.0), st.integers(1, 400))
def test_chernoff_bounds_noise_tail(delta, n):
    # ||noise||^2 over n complex symbols of unit variance is Gamma(n, 1)
    assert gamma.sf(n * (1 + delta), n) <= chernoff_factor(delta, n) * (1 + 1e-9)


def test_lab_config_guards():
    for kw in (dict(M=1), dict(M=2048), dict(T=600), dict(scenario="mar_joint", M=10),
               dict(scenario="cvma"), dict(delta=0.0), dict(M=1024, T=512, L=4, max_elements=1 << 20)):
        with pytest.raises(ValueError):
            LabConfig(**kw)
    with pytest.raises(ValueError):
        run_arq_lab(LabConfig(T=8, M=4), 0)


def small(**kw):
    base = dict(T=16, M=16, L=2, delta=0.2, snr_db=0.0)
    base.update(kw)
    return LabConfig(**base)


@pytest.mark.parametrize("cfg", [small(), small(snr_db=10.0), small(scenario="mar_joint", T=32, snr_db=10.0)])
def test_lab_invariants(cfg):
    res = run_arq_lab(cfg, 20000, seed=1)
    assert res.sphere_violations == 0
    assert res.noise_violations == 0
    assert res.accepts.sum() <= res.n_trials
    # an ML error at round 1 means a reject or a wrong accept at round 1
    assert res.ml_errors_round1 <= res.rejects_round1 + res.undetected
    assert res.undetected <= res.final_errors
    assert res.undetected_relay_ok <= res.undetected
    assert res.final_error_rate <= 1 and res.undetected_rate <= 1


def test_lab_deterministic():
    a, b = run_arq_lab(small(), 3000, seed=5), run_arq_lab(small(), 3000, seed=5)
    assert np.array_equal(a.accepts, b.accepts)
    assert (a.undetected, a.final_errors, a.relay_errors) == (b.undetected, b.final_errors, b.relay_errors)


def test_wider_sphere_accepts_more_and_errs_more():
    tight = run_arq_lab(small(snr_db=10.0), 20000, seed=1)
    wide = run_arq_lab(small(snr_db=10.0, delta=2.0), 20000, seed=1)
    assert wide.accept_rates[0] > tight.accept_rates[0] + 0.1
    assert wide.undetected > tight.undetected


def test_tiny_delta_rejects():
    res = run_arq_lab(small(T=4, delta=0.01, snr_db=30.0), 20000, seed=1)
    # the noise norm exceeds a radius near its mean about half the time
    assert res.rejects_round1 / res.n_trials > 0.35


@pytest.mark.parametrize("seed", [1, 2])
def test_undetected_decays_with_T(seed):
    # wrong accepts caused by the relay forwarding a wrong message do not
    # shrink with T; the noise-driven ones (correct or silent relay) do
    short = run_arq_lab(small(T=16), 40000, seed=seed)
    long_ = run_arq_lab(small(T=32), 40000, seed=seed)
    a, b = short.undetected_relay_ok, long_.undetected_relay_ok
    assert a > 20
    assert b <= a - 3 * math.sqrt(a + b)
    assert b / a <= 10 * chernoff_factor(0.2, 16)


def test_nack_ratio_nan_without_errors():
    res = run_arq_lab(LabConfig(T=64, M=4, snr_db=40.0), 200, seed=0)
    if res.ml_errors_round1 == 0:
        assert math.isnan(res.nack_ml_ratio)
    else:
        assert res.nack_ml_ratio == res.rejects_round1 / res.ml_errors_round1
