"""Per-round outage decisions of the ARQ-DDF protocols.

Decoding success is modelled by mutual-information outage: after ``l``
rounds of ``T`` symbols the receiver has accumulated ``sum_t I_t`` bits
against a message of ``R1 * T`` bits.  Every function works on whole arrays
of channel draws at one SNR.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelDraw


def rate_bits(r1: float, rho: float) -> float:
    """First-round rate R1 = r1 log2(rho) in bits per channel use."""
    return r1 * math.log2(rho)


def _listen_symbols(bits: float, capacity: np.ndarray) -> np.ndarray:
    """Symbols needed to collect ``bits`` at ``capacity`` bits/symbol (ceil, inf if 0)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        need = np.ceil(bits / capacity)
    if bits <= 0:
        return np.zeros_like(capacity)
    return np.where(capacity > 0, need, np.inf)


def _check_round(ell: int, L: int | None) -> None:
    if ell < 1 or (L is not None and ell > L):
        raise ValueError(f"round {ell} outside [1, {L}]")


def mar_listen_symbols(draw: ChannelDraw, r1: float, rho: float, c: float, T: int) -> np.ndarray:
    """Symbols the MAR relay listens before it can decode both users (uncapped)."""
    R = rate_bits(r1, rho)
    p1, p2 = draw.power("h1"), draw.power("h2")
    single = _listen_symbols(T * R / 2, np.log2(1 + np.minimum(p1, p2) * c * rho))
    joint = _listen_symbols(T * R, np.log2(1 + (p1 + p2) * c * rho))
    return np.maximum(single, joint)


def relay_listen_fraction_mar(draw: ChannelDraw, r1: float, rho: float, c: float = 1.0,
                              T: int = 100) -> np.ndarray:
    """f = T'/T for the MAR relay within a single round."""
    return np.minimum(T, mar_listen_symbols(draw, r1, rho, c, T)) / T


def cvma_listen_symbols(draw: ChannelDraw, r1: float, rho: float, c: float, T: int) -> np.ndarray:
    """Symbols the helping user listens to decode the other user's R1 T / 2 bits."""
    return _listen_symbols(T * rate_bits(r1, rho) / 2, np.log2(1 + draw.power("h") * c * rho))


def relay_listen_fraction_cvma(draw: ChannelDraw, r1: float, rho: float, c: float = 1.0,
                               T: int = 100) -> np.ndarray:
    return np.minimum(T, cvma_listen_symbols(draw, r1, rho, c, T)) / T


def relay_listen_symbols(draw: ChannelDraw, r1: float, rho: float, c: float, T: int) -> np.ndarray:
    """Symbols the single relay listens before decoding the R1 T source bits."""
    return _listen_symbols(T * rate_bits(r1, rho), np.log2(1 + draw.power("g_sr") * c * rho))


def _two_phase(listen: np.ndarray, ell: int, T: int, first: np.ndarray, second: np.ndarray):
    """Bits accumulated over ell rounds when the relay joins after ``listen`` symbols."""
    t = np.minimum(listen, ell * T)
    return t * first + (ell * T - t) * second


def round_outage_relay(draw: ChannelDraw, ell: int, L: int | None, r1: float, rho: float,
                       c: float = 1.0, T: int = 100, listen: np.ndarray | None = None) -> np.ndarray:
    """Destination cannot decode after ``ell`` rounds of the DDF relay protocol."""
    _check_round(ell, L)
    if listen is None:
        listen = relay_listen_symbols(draw, r1, rho, c, T)
    p_sd, p_rd = draw.power("g_sd"), draw.power("g_rd")
    acc = _two_phase(listen, ell, T, np.log2(1 + rho * p_sd), np.log2(1 + rho * (p_sd + p_rd)))
    return acc < T * rate_bits(r1, rho)


def round_outage_mar(draw: ChannelDraw, ell: int, L: int | None, r1: float, rho: float,
                     c: float = 1.0, T: int = 100, listen: np.ndarray | None = None) -> dict:
    """Outage flags for user 1 alone, user 2 alone and the pair after ``ell`` rounds."""
    _check_round(ell, L)
    if listen is None:
        listen = mar_listen_symbols(draw, r1, rho, c, T)
    bits = T * rate_bits(r1, rho)
    p1, p2, pr = draw.power("g1"), draw.power("g2"), draw.power("gr")

    def acc(p):
        return _two_phase(listen, ell, T, np.log2(1 + rho * p), np.log2(1 + rho * (p + pr)))

    return {"type1": acc(p1) < bits / 2, "type2": acc(p2) < bits / 2,
            "type12": acc(p1 + p2) < bits}


@dataclass
class CvmaLabels:
    """Superior/inferior assignment of one batch of CVMA draws.

    ``sup_user`` / ``sup_ant`` index the (user, antenna) pair with the
    largest SINR; powers are named gain_<user><antenna> with s/i labels.
    """

    sup_user: np.ndarray
    sup_ant: np.ndarray
    p_ss: np.ndarray
    p_si: np.ndarray
    p_is: np.ndarray
    p_ii: np.ndarray
    sinr: np.ndarray  # (n, 2 antennas, 2 users)


def cvma_labels(draw: ChannelDraw, rho: float) -> CvmaLabels:
    G = draw.cvma_matrix()
    P = G.real ** 2 + G.imag ** 2  # (n, antenna, user)
    sinr = rho * P / (1 + rho * P[:, :, ::-1])
    flat = sinr.reshape(len(P), 4).argmax(axis=1)
    ant, user = flat // 2, flat % 2
    other_ant, other_user = 1 - ant, 1 - user
    idx = np.arange(len(P))
    return CvmaLabels(user, ant,
                      p_ss=P[idx, ant, user], p_si=P[idx, other_ant, user],
                      p_is=P[idx, ant, other_user], p_ii=P[idx, other_ant, other_user],
                      sinr=sinr)


@dataclass
class CvmaState:
    """Round at which each user was acknowledged (0 = not yet)."""

    sup_done: np.ndarray
    inf_done: np.ndarray

    @classmethod
    def initial(cls, n: int) -> "CvmaState":
        return cls(np.zeros(n, dtype=np.int16), np.zeros(n, dtype=np.int16))


class CvmaRound:
    """Precomputed per-draw quantities for stepping the CVMA decoder."""

    def __init__(self, draw: ChannelDraw, r1: float, rho: float, c: float = 1.0, T: int = 100):
        self.R1, self.T = rate_bits(r1, rho), T
        G = draw.cvma_matrix()
        P = G.real ** 2 + G.imag ** 2
        lab = cvma_labels(draw, rho)
        self.labels = lab
        col = P.sum(axis=1)  # per-user power over both antennas
        det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
        self.I_sum = np.log2(1 + rho * col.sum(axis=1) + rho ** 2 * (det.real ** 2 + det.imag ** 2))
        self.I_user = np.log2(1 + rho * col)  # (n, 2)
        self.I_sup = np.log2(1 + rho * lab.p_ss / (1 + rho * lab.p_is))
        self.I_inf_alone = np.log2(1 + rho * (lab.p_is + lab.p_ii))
        self.I_inf_helped = np.log2(1 + rho * P.sum(axis=(1, 2)))
        self.listen = cvma_listen_symbols(draw, r1, rho, c, T)

    def joint_ok(self, ell: int) -> np.ndarray:
        per_user = self.R1 / (2 * ell)
        return (self.I_sum >= self.R1 / ell) & np.all(self.I_user >= per_user, axis=1)

    def joint_user_errors(self, ell: int) -> np.ndarray:
        """(n, 2) error flags of joint ML decoding, indexed by physical user."""
        sum_fail = (self.I_sum < self.R1 / ell)[:, None]
        return sum_fail | (self.I_user < self.R1 / (2 * ell))

    def step(self, ell: int, L: int, state: CvmaState) -> CvmaState:
        """Decoder actions at the end of round ``ell``."""
        _check_round(ell, L)
        sup, inf = state.sup_done.copy(), state.inf_done.copy()
        fresh = sup == 0
        if ell < L:
            joint = fresh & self.joint_ok(ell)
            sup[joint], inf[joint] = ell, ell
            alone = fresh & ~joint & (self.I_sup >= self.R1 / (2 * ell))
            sup[alone] = ell
        else:
            joint = fresh & self.joint_ok(ell)
            sup[joint], inf[joint] = ell, ell
        helped = (sup > 0) & (sup < ell) & (inf == 0)
        if helped.any():
            lp = sup[helped].astype(float)
            T = self.T
            t = np.minimum(self.listen[helped], (ell - lp) * T)
            acc = (lp * T + t) * self.I_inf_alone[helped] \
                + ((ell - lp) * T - t) * self.I_inf_helped[helped]
            ok = acc >= self.R1 * T / 2
            idx = np.flatnonzero(helped)[ok]
            inf[idx] = ell
        return CvmaState(sup, inf)


def round_outcome_cvma(draw: ChannelDraw, ell: int, L: int, r1: float, rho: float, c: float = 1.0,
                       T: int = 100, state: CvmaState | None = None) -> CvmaState:
    """One decoder step; ``state`` defaults to nothing decoded yet."""
    state = state or CvmaState.initial(len(draw))
    return CvmaRound(draw, r1, rho, c, T).step(ell, L, state)


@dataclass
class Outcome:
    """Per-trial results of a full ARQ run."""

    done_round: np.ndarray  # first round with every message acknowledged, 0 if never
    error: np.ndarray
    user_error: np.ndarray  # (n, 2); relay uses a single column

    def rounds_used(self, L: int) -> np.ndarray:
        return np.where(self.done_round > 0, self.done_round, L)


def _first_round(flags_ok: list[np.ndarray]) -> np.ndarray:
    done = np.zeros(len(flags_ok[0]), dtype=np.int16)
    for ell, ok in enumerate(flags_ok, start=1):
        done[(done == 0) & ok] = ell
    return done


def run_relay(draw: ChannelDraw, L: int, r1: float, rho: float, c: float = 1.0, T: int = 100) -> Outcome:
    listen = relay_listen_symbols(draw, r1, rho, c, T)
    out = [round_outage_relay(draw, ell, L, r1, rho, c, T, listen) for ell in range(1, L + 1)]
    err = out[-1]
    return Outcome(_first_round([~o for o in out]), err, err[:, None])


def run_mar(draw: ChannelDraw, L: int, r1: float, rho: float, c: float = 1.0, T: int = 100) -> Outcome:
    listen = mar_listen_symbols(draw, r1, rho, c, T)
    flags = [round_outage_mar(draw, ell, L, r1, rho, c, T, listen) for ell in range(1, L + 1)]
    ok = [~(f["type1"] | f["type2"] | f["type12"]) for f in flags]
    last = flags[-1]
    user = np.stack([last["type1"] | last["type12"], last["type2"] | last["type12"]], axis=1)
    return Outcome(_first_round(ok), ~ok[-1], user)


def _joint_first_round_ok(draw: ChannelDraw, r1: float, rho: float) -> np.ndarray:
    """Round-1 joint decoding succeeds; the decoder stops there for these draws."""
    R1 = rate_bits(r1, rho)
    G = draw.cvma_matrix()
    P = G.real ** 2 + G.imag ** 2
    col = P.sum(axis=1)
    det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
    I_sum = np.log2(1 + rho * col.sum(axis=1) + rho ** 2 * (det.real ** 2 + det.imag ** 2))
    return (I_sum >= R1) & np.all(np.log2(1 + rho * col) >= R1 / 2, axis=1)


def run_cvma(draw: ChannelDraw, L: int, r1: float, rho: float, c: float = 1.0, T: int = 100) -> Outcome:
    n = len(draw)
    done = np.ones(n, dtype=np.int16)
    user = np.zeros((n, 2), dtype=bool)
    # the full decoder only needs to run where round-1 joint decoding fails
    rest = np.flatnonzero(~_joint_first_round_ok(draw, r1, rho))
    if len(rest):
        sub = ChannelDraw(draw.scenario, {k: v[rest] for k, v in draw.gains.items()})
        done[rest], user[rest] = _run_cvma_full(sub, L, r1, rho, c, T)
    return Outcome(done, user.any(axis=1), user)


def _run_cvma_full(draw: ChannelDraw, L: int, r1: float, rho: float, c: float, T: int):
    stepper = CvmaRound(draw, r1, rho, c, T)
    state = CvmaState.initial(len(draw))
    for ell in range(1, L + 1):
        state = stepper.step(ell, L, state)
    done = np.where((state.sup_done > 0) & (state.inf_done > 0),
                    np.maximum(state.sup_done, state.inf_done), 0).astype(np.int16)
    # error flags by role: the superior user is lost only through a failed
    # final joint decode
    lab = stepper.labels
    idx = np.arange(len(draw))
    joint_err = stepper.joint_user_errors(L)
    never = state.sup_done == 0
    sup_err = never & joint_err[idx, lab.sup_user]
    inf_err = (state.inf_done == 0) & (~never | joint_err[idx, 1 - lab.sup_user])
    user = np.zeros((len(draw), 2), dtype=bool)
    user[idx, lab.sup_user] = sup_err
    user[idx, 1 - lab.sup_user] = inf_err
    return done, user


RUNNERS = {"relay": run_relay, "mar": run_mar, "cvma": run_cvma}
