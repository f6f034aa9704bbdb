import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arqddf.mc_simulator import (
    CHUNK,
    Campaign,
    ChannelConfig,
    Counts,
    CvmaState,
    InsufficientEventsError,
    ProtocolConfig,
    cvma_labels,
    draw_from_gains,
    estimate_slope,
    relay_listen_fraction_cvma,
    relay_listen_fraction_mar,
    round_outage_mar,
    round_outage_relay,
    round_outcome_cvma,
    run_campaign,
    run_counts,
    run_cvma,
    run_mar,
    run_relay,
    run_trials,
    sample_channel,
    wilson,
)
from arqddf.mc_simulator.engine import chunk_plan
from arqddf.mc_simulator.protocols import _run_cvma_full


def rng(seed=0):
    return np.random.default_rng(seed)


# --- channels ------------------------------------------------------------------

def test_sample_deterministic():
    a = sample_channel("mar", 1000, rng(7))
    b = sample_channel("mar", 1000, rng(7))
    for k in a.gains:
        assert np.array_equal(a.gains[k], b.gains[k])


@pytest.mark.parametrize("scenario", ["relay", "mar", "cvma"])
def test_sample_statistics(scenario):
    d = sample_channel(scenario, 10**6, rng(1))
    powers = {k: d.power(k) for k in d.gains}
    for k, p in powers.items():
        assert abs(p.mean() - 1) < 0.01, k
        assert abs(d.gains[k].mean()) < 0.01  # zero mean
        assert abs(np.mean(d.gains[k] ** 2)) < 0.01  # circular symmetry
    names = list(powers)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            assert abs(np.corrcoef(powers[names[i]], powers[names[j]])[0, 1]) < 0.01


def test_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(float("nan"))
    with pytest.raises(ValueError):
        ChannelConfig(10, noise_ratio_c=0)
    with pytest.raises(ValueError):
        ProtocolConfig(L=0)
    assert ChannelConfig(30).rho == pytest.approx(1000)


# --- listening fractions --------------------------------------------------------

def test_mar_listen_example():
    r1, rho, T = 0.5, 1e3, 100
    R = r1 * math.log2(rho)
    want = min(T, max(math.ceil(T * R / 2 / math.log2(1 + rho)),
                      math.ceil(T * R / math.log2(1 + 2 * rho)))) / T
    d = draw_from_gains("mar", g1=1, g2=1, gr=1, h1=1, h2=1)
    assert relay_listen_fraction_mar(d, r1, rho, 1.0, T)[0] == want
    assert want == 0.46  # the sum-rate ceiling dominates


def test_mar_listen_limits():
    zero = draw_from_gains("mar", g1=1, g2=1, gr=1, h1=0, h2=0)
    assert relay_listen_fraction_mar(zero, 0.5, 1e3)[0] == 1.0
    fs = [relay_listen_fraction_mar(draw_from_gains("mar", g1=1, g2=1, gr=1, h1=h, h2=h), 0.5, 1e6)[0]
          for h in (1, 1e2, 1e4, 1e8, 1e16)]
    assert all(b <= a for a, b in zip(fs, fs[1:]))
    assert fs[-1] <= 0.1


def test_cvma_listen():
    d0 = draw_from_gains("cvma", g_a0u0=1, g_a0u1=1, g_a1u0=1, g_a1u1=1, h=0)
    assert relay_listen_fraction_cvma(d0, 0.5, 1e3)[0] == 1.0
    d = draw_from_gains("cvma", g_a0u0=1, g_a0u1=1, g_a1u0=1, g_a1u1=1, h=1)
    assert relay_listen_fraction_cvma(d, 0.5, 1e3, T=1)[0] == 1.0
    rho, T = 1e8, 1000
    approx = 0.5 * math.log2(rho) / (2 * math.log2(rho))
    f = relay_listen_fraction_cvma(d, 0.5, rho, T=T)[0]
    assert abs(f - approx) <= 1 / T + 1e-8


@given(st.floats(0.05, 1.0), st.floats(5, 40), st.integers(1, 300))
def test_listen_fraction_in_unit_interval(r1, snr, T):
    d = sample_channel("mar", 64, rng(3))
    f = relay_listen_fraction_mar(d, r1, 10 ** (snr / 10), 1.0, T)
    assert np.all((f > 0) & (f <= 1))
    assert np.allclose(f * T, np.round(f * T))  # symbol granularity


# --- per-round outage -------------------------------------------------------------

def test_relay_trivial():
    strong = draw_from_gains("relay", g_sd=1e3, g_sr=0, g_rd=0)
    dead = draw_from_gains("relay", g_sd=0, g_sr=0, g_rd=0)
    for ell in (1, 2, 3):
        assert not round_outage_relay(strong, ell, 3, 0.5, 100.0)[0]
        assert round_outage_relay(dead, ell, 3, 0.5, 100.0)[0]
    with pytest.raises(ValueError):
        round_outage_relay(dead, 4, 3, 0.5, 100.0)


@given(st.integers(0, 10**6), st.floats(0.05, 0.99), st.floats(0, 30))
def test_relay_monotone_in_rounds(seed, r1, snr):
    d = sample_channel("relay", 256, rng(seed))
    rho = 10 ** (snr / 10)
    flags = [round_outage_relay(d, ell, None, r1, rho) for ell in range(1, 5)]
    for a, b in zip(flags, flags[1:]):
        assert np.all(b <= a)


def test_mar_first_phase_only():
    # relay never decodes (h = 0), so user 1 sees only its direct link
    d = draw_from_gains("mar", g1=0.01, g2=1, gr=100, h1=0, h2=0)
    rho, r1, T = 1e3, 0.5, 100
    flags = round_outage_mar(d, 1, 2, r1, rho, 1.0, T)
    bits = T * r1 * math.log2(rho)
    assert flags["type1"][0] == (T * math.log2(1 + rho * 1e-4) < bits / 2)
    assert flags["type1"][0]


@given(st.integers(0, 10**6), st.floats(0.05, 0.99), st.floats(0, 30))
def test_mar_swap_symmetry(seed, r1, snr):
    d = sample_channel("mar", 256, rng(seed))
    rho = 10 ** (snr / 10)
    a = round_outage_mar(d, 1, 2, r1, rho)
    b = round_outage_mar(d.swapped_users(), 1, 2, r1, rho)
    assert np.array_equal(a["type1"], b["type2"]) and np.array_equal(a["type12"], b["type12"])
    oa, ob = run_mar(d, 2, r1, rho), run_mar(d.swapped_users(), 2, r1, rho)
    assert np.array_equal(oa.user_error, ob.user_error[:, ::-1])
    assert np.array_equal(oa.done_round, ob.done_round)


def test_cvma_identity_like():
    d = draw_from_gains("cvma", g_a0u0=30, g_a0u1=0.01, g_a1u0=0.01, g_a1u1=30, h=1)
    st_ = round_outcome_cvma(d, 1, 2, 0.5, 1e3)
    assert st_.sup_done[0] == 1 and st_.inf_done[0] == 1


def test_cvma_dead_channel():
    d = draw_from_gains("cvma", g_a0u0=0, g_a0u1=0, g_a1u0=0, g_a1u1=0, h=0)
    state = CvmaState.initial(1)
    for ell in (1, 2, 3):
        state = round_outcome_cvma(d, ell, 3, 0.5, 1e3, state=state)
        assert state.sup_done[0] == 0 and state.inf_done[0] == 0
    out = run_cvma(d, 3, 0.5, 1e3)
    assert out.error[0] and out.done_round[0] == 0 and out.user_error[0].all()


@given(st.integers(0, 10**6), st.floats(0, 40))
def test_cvma_labeling(seed, snr):
    d = sample_channel("cvma", 512, rng(seed))
    lab = cvma_labels(d, 10 ** (snr / 10))
    idx = np.arange(len(d))
    chosen = lab.sinr[idx, lab.sup_ant, lab.sup_user]
    assert np.all(chosen[:, None, None] >= lab.sinr)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
@pytest.mark.parametrize("r1", [0.5, 1.2, 1.8])
def test_cvma_round1_filter_is_exact(L, r1):
    d = sample_channel("cvma", 20000, rng(L))
    rho = 10 ** 1.5
    fast = run_cvma(d, L, r1, rho)
    done, user = _run_cvma_full(d, L, r1, rho, 1.0, 100)
    assert np.array_equal(fast.done_round, done) and np.array_equal(fast.user_error, user)


def test_cvma_swap_symmetry():
    d = sample_channel("cvma", 50000, rng(5))
    a, b = run_cvma(d, 2, 1.0, 100.0), run_cvma(d.swapped_users(), 2, 1.0, 100.0)
    assert np.array_equal(a.user_error, b.user_error[:, ::-1])


# --- campaigns ------------------------------------------------------------------------

def test_zero_rate():
    est = run_trials("relay", ProtocolConfig(2, 0.0), ChannelConfig(20.0, "relay"), 5000, seed=1)
    assert est.pe == 0 and est.eta == 0 and np.all(est.p == 0)


@pytest.mark.parametrize("scenario,r1", [("relay", 0.5), ("mar", 0.5), ("cvma", 1.0)])
def test_counts_identities(scenario, r1):
    camp = Campaign(scenario, ProtocolConfig(4, r1), (5.0, 10.0, 15.0), seed=3)
    for e in run_campaign(camp, 30000):
        c = e.counts
        assert np.all(np.diff(c.not_done) <= 0)  # p(l) non-increasing in l
        assert c.rounds_sum == c.n_trials + int(c.not_done[:-1].sum())
        assert c.rounds_sum == pytest.approx(c.n_trials * (1 + e.p.sum()), rel=1e-12)
        assert c.errors <= c.not_done[-1]


def test_sharding_and_workers():
    camp = Campaign("mar", ProtocolConfig(2, 0.5), (10.0, 20.0), seed=11)
    n = 2 * CHUNK + 1234
    whole = run_counts(camp, n)
    parts = [a + b for a, b in zip(run_counts(camp, CHUNK), run_counts(camp, CHUNK + 1234, CHUNK))]
    assert whole == parts
    assert run_counts(camp, n, workers=2) == whole
    with pytest.raises(ValueError):
        run_counts(camp, 10, first_trial=5)


def test_chunk_plan():
    assert chunk_plan(CHUNK + 1) == [(0, CHUNK), (1, 1)]
    assert chunk_plan(5, 3 * CHUNK) == [(3, 5)]
    with pytest.raises(ValueError):
        chunk_plan(0)


def test_counts_merge_is_associative():
    a = Counts(2, 10, 1, 12, np.array([2, 1]), np.array([1, 0]))
    b = Counts(2, 5, 0, 5, np.array([0, 0]), np.array([0, 0]))
    c = Counts(2, 7, 2, 9, np.array([2, 2]), np.array([1, 2]))
    assert (a + b) + c == a + (b + c) == c + b + a
    with pytest.raises(ValueError):
        a + Counts(3)


def test_seed_changes_results():
    camp = Campaign("relay", ProtocolConfig(2, 0.5), (10.0,), seed=1)
    other = Campaign("relay", ProtocolConfig(2, 0.5), (10.0,), seed=2)
    assert run_counts(camp, 20000) != run_counts(other, 20000)
    assert run_counts(camp, 20000) == run_counts(camp, 20000)


def sigma(e):
    return math.sqrt(e.pe * (1 - e.pe) / e.counts.n_trials)


@pytest.mark.parametrize("scenario,r1", [("relay", 0.5), ("mar", 0.5), ("cvma", 1.0)])
def test_monotone_in_snr(scenario, r1):
    # with R1 = r1 log2(rho) the rate vanishes at 0 dB, so start past the low-SNR hump
    camp = Campaign(scenario, ProtocolConfig(2, r1), tuple(range(8, 33, 4)), seed=5)
    est = run_campaign(camp, 100000)
    for a, b in zip(est, est[1:]):
        assert b.pe <= a.pe + 3 * math.hypot(sigma(a), sigma(b))


@pytest.mark.parametrize("scenario,r1", [("relay", 0.5), ("mar", 0.5), ("cvma", 1.0)])
def test_arq_helps(scenario, r1):
    snr = (10.0,)
    one = run_campaign(Campaign(scenario, ProtocolConfig(1, r1), snr, seed=9), 100000)[0]
    two = run_campaign(Campaign(scenario, ProtocolConfig(2, r1), snr, seed=9), 100000)[0]
    assert two.pe <= one.pe + 3 * math.hypot(sigma(one), sigma(two))


def test_mar_user_symmetry_statistical():
    e = run_campaign(Campaign("mar", ProtocolConfig(2, 0.5), (10.0,), seed=4), 200000)[0]
    u1, u2 = e.counts.user_errors
    assert abs(u1 - u2) <= 3 * math.sqrt(u1 + u2)


# --- statistics -------------------------------------------------------------------------

def test_wilson_matches_formula():
    k, n, z = 37, 1000, 1.959963984540054
    p = k / n
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    lo, hi = wilson(k, n)
    assert lo == pytest.approx(centre - half, rel=1e-9) and hi == pytest.approx(centre + half, rel=1e-9)


def test_slope_exact_power_law():
    n = 10**8
    pts = [(s, round(n * 10 ** (-2 * s / 10)), n) for s in (10.0, 20.0, 30.0)]
    est = estimate_slope(pts)
    assert est.slope == pytest.approx(-2.0, abs=1e-12)
    assert est.diversity == pytest.approx(2.0)
    assert est.ci95 > 0 and len(est.points) == 3


@given(st.floats(0.5, 3.0), st.integers(0, 10**6))
def test_slope_with_noise(d, seed):
    g = rng(seed)
    n = 10**12
    pts = []
    for s in (10.0, 14.0, 18.0, 22.0):
        p = 10 ** (-d * s / 10) * (1 + 0.01 * g.standard_normal())
        pts.append((s, round(p * n), n))
    assert abs(estimate_slope(pts).slope + d) <= 0.05


def test_slope_insufficient_events():
    with pytest.raises(InsufficientEventsError):
        estimate_slope([(20.0, 100, 10**6), (24.0, 60, 10**6), (28.0, 49, 10**6)])
    with pytest.raises(InsufficientEventsError):
        estimate_slope([(20.0, 100, 10**6), (24.0, 60, 10**6)])
