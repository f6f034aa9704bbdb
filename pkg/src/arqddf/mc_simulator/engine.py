"""Seeded, chunked Monte Carlo campaigns with mergeable integer counts.

Trials are grouped in fixed-size chunks; chunk ``k`` draws its channels from
``SeedSequence(seed, spawn_key=(k,))``, so any subset of chunks can run in
any process and the summed counts do not depend on how the work was split.
Every chunk's draws are reused at all SNR points of a campaign (common
random numbers), which keeps the estimated curves smooth in SNR.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .channels import ChannelConfig, ProtocolConfig, sample_channel
from .protocols import RUNNERS, rate_bits

CHUNK = 1 << 16


@dataclass
class Counts:
    """Integer tallies at one SNR point; ``+`` merges shards."""

    L: int
    n_trials: int = 0
    errors: int = 0
    rounds_sum: int = 0
    not_done: np.ndarray = None  # not_done[l-1]: trials unacknowledged after round l
    user_errors: np.ndarray = None

    def __post_init__(self):
        if self.not_done is None:
            self.not_done = np.zeros(self.L, dtype=np.int64)
        if self.user_errors is None:
            self.user_errors = np.zeros(2, dtype=np.int64)

    def __add__(self, other: "Counts") -> "Counts":
        if other.L != self.L:
            raise ValueError("cannot merge counts with different L")
        return Counts(self.L, self.n_trials + other.n_trials, self.errors + other.errors,
                      self.rounds_sum + other.rounds_sum, self.not_done + other.not_done,
                      self.user_errors + other.user_errors)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Counts) and self.L == other.L
                and (self.n_trials, self.errors, self.rounds_sum)
                == (other.n_trials, other.errors, other.rounds_sum)
                and np.array_equal(self.not_done, other.not_done)
                and np.array_equal(self.user_errors, other.user_errors))

    @classmethod
    def from_outcome(cls, outcome, L: int) -> "Counts":
        done = outcome.done_round
        not_done = np.array([np.count_nonzero((done == 0) | (done > ell)) for ell in range(1, L + 1)],
                            dtype=np.int64)
        ue = np.zeros(2, dtype=np.int64)
        ue[:outcome.user_error.shape[1]] = outcome.user_error.sum(axis=0)
        return cls(L, len(done), int(np.count_nonzero(outcome.error)),
                   int(outcome.rounds_used(L).sum()), not_done, ue)


def wilson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return (float(ci.low), float(ci.high))


@dataclass
class PointEstimate:
    snr_db: float
    counts: Counts
    R1: float

    @property
    def pe(self) -> float:
        return self.counts.errors / self.counts.n_trials

    @property
    def pe_ci(self) -> tuple[float, float]:
        return wilson(self.counts.errors, self.counts.n_trials)

    @property
    def p(self) -> np.ndarray:
        """p(l) for l = 1..L-1: probability of still waiting after round l."""
        return self.counts.not_done[:-1] / self.counts.n_trials

    def p_ci(self, ell: int) -> tuple[float, float]:
        return wilson(int(self.counts.not_done[ell - 1]), self.counts.n_trials)

    @property
    def eta(self) -> float:
        """Average throughput R1 / (1 + sum_l p(l)) in bits per channel use."""
        return self.R1 / (1.0 + float(self.p.sum()))

    @property
    def eta_normalized(self) -> float:
        """eta / R1 (1 when every message is acknowledged in the first round)."""
        return 1.0 / (1.0 + float(self.p.sum()))


@dataclass
class Campaign:
    scenario: str
    protocol: ProtocolConfig
    snr_db: tuple[float, ...]
    c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for s in self.snr_db:
            ChannelConfig(s, self.scenario, self.c)  # validates
        self.protocol.check_scenario(self.scenario)


def _chunk_counts(campaign: Campaign, chunk: int, n: int) -> list[Counts]:
    rng = np.random.default_rng(np.random.SeedSequence(campaign.seed, spawn_key=(chunk,)))
    draw = sample_channel(campaign.scenario, CHUNK, rng)
    if n < CHUNK:
        draw.gains = {k: v[:n] for k, v in draw.gains.items()}
    pc, run = campaign.protocol, RUNNERS[campaign.scenario]
    out = []
    for snr in campaign.snr_db:
        rho = ChannelConfig(snr, campaign.scenario, campaign.c).rho
        outcome = run(draw, pc.L, pc.r1, rho, campaign.c, pc.T)
        out.append(Counts.from_outcome(outcome, pc.L))
    return out


def _run_chunks(campaign: Campaign, jobs: Sequence[tuple[int, int]]) -> list[Counts]:
    total = [Counts(campaign.protocol.L) for _ in campaign.snr_db]
    for chunk, n in jobs:
        total = [a + b for a, b in zip(total, _chunk_counts(campaign, chunk, n))]
    return total


def chunk_plan(n_trials: int, first_trial: int = 0) -> list[tuple[int, int]]:
    """(chunk index, trials used) pairs covering trials [first_trial, first_trial + n_trials).

    Shards must start on a chunk boundary so that each trial maps to the
    same random numbers no matter how the run is split.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if first_trial % CHUNK:
        raise ValueError(f"shards must start at a multiple of {CHUNK} trials")
    start = first_trial // CHUNK
    full, rest = divmod(n_trials, CHUNK)
    plan = [(start + k, CHUNK) for k in range(full)]
    if rest:
        plan.append((start + full, rest))
    return plan


def run_counts(campaign: Campaign, n_trials: int, first_trial: int = 0,
               workers: int = 1) -> list[Counts]:
    """Counts per SNR point for ``n_trials`` trials starting at ``first_trial``."""
    plan = chunk_plan(n_trials, first_trial)
    if workers <= 1 or len(plan) == 1:
        return _run_chunks(campaign, plan)
    batches = [plan[k::workers] for k in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunks, [campaign] * len(batches), batches))
    total = parts[0]
    for part in parts[1:]:
        total = [a + b for a, b in zip(total, part)]
    return total


def run_campaign(campaign: Campaign, n_trials: int, workers: int = 1) -> list[PointEstimate]:
    counts = run_counts(campaign, n_trials, workers=workers)
    return estimates(campaign, counts)


def estimates(campaign: Campaign, counts: Sequence[Counts]) -> list[PointEstimate]:
    out = []
    for snr, cnt in zip(campaign.snr_db, counts):
        rho = ChannelConfig(snr, campaign.scenario, campaign.c).rho
        out.append(PointEstimate(snr, cnt, rate_bits(campaign.protocol.r1, rho)))
    return out


def run_trials(scenario: str, protocol: ProtocolConfig, channel: ChannelConfig, n_trials: int,
               seed: int = 0, workers: int = 1) -> PointEstimate:
    """Single-SNR convenience wrapper around :func:`run_campaign`."""
    if channel.scenario != scenario:
        raise ValueError("channel config is for a different scenario")
    camp = Campaign(scenario, protocol, (channel.snr_db,), channel.noise_ratio_c, seed)
    return run_campaign(camp, n_trials, workers)[0]


# ---------------------------------------------------------------------------
# Diversity slope
# ---------------------------------------------------------------------------

MIN_EVENTS = 50


class InsufficientEventsError(ValueError):
    pass


@dataclass
class SlopeEstimate:
    slope: float
    ci95: float
    points: list[tuple[float, float]] = field(default_factory=list)

    @property
    def diversity(self) -> float:
        return -self.slope


def estimate_slope(points: Sequence[tuple[float, int, int]], min_events: int = MIN_EVENTS) -> SlopeEstimate:
    """OLS slope of log10 P_E against log10 rho.

    ``points`` holds (snr_db, errors, n_trials).  Points with fewer than
    ``min_events`` errors are dropped; at least three must remain.  The
    half-width of each point's Wilson interval in log10 units is taken as
    1.96 standard errors and propagated through the OLS weights.
    """
    used = [(s, k, n) for s, k, n in points if k >= min_events]
    if len(used) < 3:
        raise InsufficientEventsError(
            f"need >= 3 SNR points with >= {min_events} errors, have {len(used)}")
    x = np.array([s / 10.0 for s, _, _ in used])
    y = np.array([math.log10(k / n) for _, k, n in used])
    sig = []
    for _, k, n in used:
        lo, hi = wilson(k, n)
        sig.append((math.log10(hi) - math.log10(lo)) / (2 * 1.96))
    w = (x - x.mean()) / np.sum((x - x.mean()) ** 2)
    slope = float(w @ (y - y.mean()))
    ci = 1.96 * float(np.sqrt(np.sum(w ** 2 * np.square(sig))))
    return SlopeEstimate(slope, ci, list(zip(x.tolist(), y.tolist())))
