"""Codeword-level experiments with random Gaussian codebooks.

Transmits actual codewords over one Rayleigh draw per trial and runs the
bounded-distance ARQ decoder: after round ``l`` the destination accepts
message ``m`` only if ``m`` is the unique message whose signature lies within
``sqrt(l T (1 + delta) sigma2)`` of the received prefix, and otherwise asks
for another round.  At the last round it falls back to plain ML decoding.

Two scenarios: ``"relay"`` (source, DDF relay, destination) and
``"mar_joint"`` (two sources and a shared relay, decoded as one joint
message).  The relay listens until its mutual information covers the
message, then ML-decodes what it heard and forwards with its own codebook;
its decoding errors are counted, not assumed away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BATCH_ELEMENTS = 1 << 22  # complex entries per (batch, M, L*T) tensor


@dataclass(frozen=True)
class DecoderConfig:
    T: int = 128
    L: int = 2
    delta: float = 0.2
    sigma2: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.T < 1 or self.L < 1:
            raise ValueError("T and L must be >= 1")

    def radius2(self, ell: int) -> float:
        return ell * self.T * (1 + self.delta) * self.sigma2


@dataclass(frozen=True)
class Codebook:
    codewords: np.ndarray  # (M, L*T)
    energy: float

    @property
    def M(self) -> int:
        return self.codewords.shape[0]


def build_codebook(M: int, length: int, energy: float, rng: np.random.Generator) -> Codebook:
    """i.i.d. CN(0, energy) entries."""
    z = rng.standard_normal((2, M, length)) * math.sqrt(energy / 2)
    return Codebook(z[0] + 1j * z[1], energy)


def build_relay_signatures(source: np.ndarray, relay: np.ndarray, g_sd: complex, g_rd: complex,
                           switch: int) -> np.ndarray:
    """Noiseless images s(m) at the destination when the relay joins at symbol ``switch``.

    ``source`` and ``relay`` are (M, n) codeword matrices; ``switch`` may
    exceed n, meaning the relay never transmits.
    """
    sig = g_sd * source
    if switch < source.shape[1]:
        sig = sig.copy()
        sig[:, switch:] += g_rd * relay[:, switch:]
    return sig


def ml_decode(y: np.ndarray, signatures: np.ndarray) -> int:
    """argmin_m ||y - s(m)||^2, lowest index on ties."""
    if len(signatures) == 0:
        raise ValueError("empty signature set")
    d = np.sum(np.abs(y[None, :] - signatures) ** 2, axis=1)
    return int(np.argmin(d))


def bounded_distance_accept(y: np.ndarray, signatures: np.ndarray, ell: int, cfg: DecoderConfig,
                            radius2: float | None = None) -> int | None:
    """Index of the unique message within the sphere, or None (reject).

    ``y`` and ``signatures`` hold the first ``ell * T`` symbols.  ``radius2``
    overrides the squared radius, e.g. with
    :func:`superior_radius2` for a receiver that treats another user as noise.
    """
    r2 = cfg.radius2(ell) if radius2 is None else radius2
    d = np.sum(np.abs(y[None, :] - signatures) ** 2, axis=1)
    inside = np.flatnonzero(d <= r2)
    return int(inside[0]) if len(inside) == 1 else None


def superior_radius2(T: int, delta: float, p_interf: float, rho: float, sigma2: float = 1.0) -> float:
    """Squared radius when one interfering user of power gain ``p_interf`` counts as noise."""
    return T * (1 + delta) * (p_interf * rho + sigma2)


def chernoff_factor(delta: float, n: int) -> float:
    """Chernoff bound ((1+delta) e^-delta)^n on P(||noise||^2 > n (1+delta) sigma2)."""
    return ((1 + delta) * math.exp(-delta)) ** n


def relay_switch_symbol(bits: float, capacity: float, horizon: int) -> int:
    """First symbol the relay transmits, horizon if it never decodes in time."""
    if capacity <= 0:
        return horizon
    return int(min(horizon, math.ceil(bits / capacity)))


@dataclass(frozen=True)
class LabConfig:
    scenario: str = "relay"
    T: int = 128
    M: int = 64
    L: int = 2
    delta: float = 0.2
    snr_db: float = 30.0
    c: float = 1.0
    max_elements: int = 1 << 26  # resource guard on M * L * T * batch

    def __post_init__(self):
        if self.scenario not in ("relay", "mar_joint"):
            raise ValueError(f"unknown lab scenario {self.scenario!r}")
        if not 2 <= self.M <= 1024:
            raise ValueError("M must be in [2, 1024]")
        if self.scenario == "mar_joint" and math.isqrt(self.M) ** 2 != self.M:
            raise ValueError("mar_joint needs M = M1 * M1 (per-user codebooks of equal size)")
        if not 1 <= self.T <= 512:
            raise ValueError("T must be in [1, 512]")
        if self.M * self.L * self.T > self.max_elements:
            raise ValueError("codebook exceeds the M * L * T budget")
        DecoderConfig(self.T, self.L, self.delta)

    @property
    def decoder(self) -> DecoderConfig:
        return DecoderConfig(self.T, self.L, self.delta)

    @property
    def rho(self) -> float:
        return 10 ** (self.snr_db / 10)


@dataclass
class LabResult:
    config: LabConfig
    n_trials: int
    accepts: np.ndarray  # first accept at round l (l = 1..L)
    undetected: int  # accepted a wrong message
    final_errors: int  # final decision wrong
    rejects_round1: int
    ml_errors_round1: int
    relay_errors: int
    undetected_relay_ok: int = 0  # wrong accepts with a correct or silent relay
    sphere_violations: int = 0  # accepts that fail the independent uniqueness recheck
    noise_violations: int = 0  # undetected errors with a small noise norm and a correct relay
    extra: dict = field(default_factory=dict)

    @property
    def accept_rates(self) -> np.ndarray:
        return self.accepts / self.n_trials

    @property
    def undetected_rate(self) -> float:
        return self.undetected / self.n_trials

    @property
    def final_error_rate(self) -> float:
        return self.final_errors / self.n_trials

    @property
    def nack_ml_ratio(self) -> float:
        """P(reject at round 1) / P(ML error at round 1); nan without ML errors."""
        if self.ml_errors_round1 == 0:
            return float("nan")
        return self.rejects_round1 / self.ml_errors_round1


def _seg(a: np.ndarray, L: int, T: int) -> np.ndarray:
    """Per-round sums over the last axis (length L*T -> L)."""
    return a.reshape(a.shape[:-1] + (L, T)).sum(axis=-1)


def _masked_seg_matmul(v: np.ndarray, C: np.ndarray, L: int, T: int) -> np.ndarray:
    """out[b, m, l] = sum over round l of v[b, t] * C[m, t]."""
    out = np.empty((v.shape[0], C.shape[0], L), dtype=np.result_type(v, C))
    for ell in range(L):
        sl = slice(ell * T, (ell + 1) * T)
        out[:, :, ell] = v[:, sl] @ C[:, sl].T
    return out


def prefix_distances(y: np.ndarray, terms, L: int, T: int) -> np.ndarray:
    """||y^l - s^l(m)||^2 for every message and round, shape (B, M, L).

    Signatures are ``s(m) = sum_j c_j * mask_j * C_j[m]`` with per-trial
    coefficients ``c_j`` (B,), codebooks ``C_j`` (M, n) and optional 0/1
    masks (B, n) selecting the symbols where term j is present.  Expanding
    the square keeps everything as matrix products.
    """
    seg = _seg(y.real ** 2 + y.imag ** 2, L, T)[:, None, :]
    cross = 0.0
    for c, C, mask in terms:
        v = y if mask is None else y * mask
        cross = cross + np.conj(c)[:, None, None] * _masked_seg_matmul(v, np.conj(C), L, T)
    gram = 0.0
    for j, (cj, Cj, mj) in enumerate(terms):
        for k, (ck, Ck, mk) in enumerate(terms):
            if k < j:
                continue
            W = Cj * np.conj(Ck)
            if mj is None and mk is None:
                g = _seg(W, L, T)[None]
            else:
                mask = mj if mk is None else (mk if mj is None else mj * mk)
                g = _masked_seg_matmul(mask.astype(W.dtype), W, L, T)
            term = (cj * np.conj(ck))[:, None, None] * g
            gram = gram + (term.real if j == k else 2 * term.real)
    dist = seg - 2 * cross.real + gram
    return np.cumsum(np.maximum(dist, 0.0), axis=2)


class _Experiment:
    def __init__(self, cfg: LabConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        n = cfg.L * cfg.T
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        E = cfg.rho  # sigma2 = 1
        if cfg.scenario == "relay":
            self.books = (build_codebook(cfg.M, n, E, rng).codewords,)
        else:
            m1 = math.isqrt(cfg.M)
            u1, u2 = build_codebook(m1, n, E, rng), build_codebook(m1, n, E, rng)
            # joint message m = i * M1 + j carries (i, j)
            joint = np.arange(cfg.M)
            self.books = (u1.codewords[joint // m1], u2.codewords[joint % m1])
        self.relay = build_codebook(cfg.M, n, E, rng).codewords

    def run_batch(self, batch: int, B: int, out: LabResult) -> None:
        cfg, rho = self.cfg, self.cfg.rho
        T, L, M, n = cfg.T, cfg.L, cfg.M, cfg.L * cfg.T
        rng = np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(1, batch)))
        bits = math.log2(M)
        g = (rng.standard_normal((5, B)) + 1j * rng.standard_normal((5, B))) * math.sqrt(0.5)
        msg = rng.integers(0, M, B)
        noise_d = (rng.standard_normal((B, n)) + 1j * rng.standard_normal((B, n))) * math.sqrt(0.5)
        noise_r = (rng.standard_normal((B, n)) + 1j * rng.standard_normal((B, n))) * math.sqrt(0.5 / cfg.c)

        if cfg.scenario == "relay":
            dest_coef, relay_coef, g_rd = (g[0],), (g[1],), g[2]
            cap = np.log2(1 + cfg.c * rho * np.abs(g[1]) ** 2)
            switch = np.array([relay_switch_symbol(bits, cp, n) for cp in cap])
        else:
            dest_coef, relay_coef, g_rd = (g[0], g[1]), (g[3], g[4]), g[2]
            p1, p2 = np.abs(g[3]) ** 2, np.abs(g[4]) ** 2
            single = np.log2(1 + np.minimum(p1, p2) * cfg.c * rho)
            joint = np.log2(1 + (p1 + p2) * cfg.c * rho)
            switch = np.array([max(relay_switch_symbol(bits / 2, a, n), relay_switch_symbol(bits, b, n))
                               for a, b in zip(single, joint)])
        idx = np.arange(B)
        pre = (np.arange(n)[None, :] < switch[:, None]).astype(float)
        post = 1.0 - pre

        # relay: ML on the symbols it heard before switching
        heard = sum(c[:, None] * C[msg] for c, C in zip(relay_coef, self.books))
        y_r = (heard + noise_r) * pre
        d_r = prefix_distances(y_r, [(c, C, pre) for c, C in zip(relay_coef, self.books)], L, T)
        m_relay = np.argmin(d_r[:, :, -1], axis=1)
        forwards = switch < n
        out.relay_errors += int(np.count_nonzero(forwards & (m_relay != msg)))

        sent = sum(c[:, None] * C[msg] for c, C in zip(dest_coef, self.books))
        y = sent + g_rd[:, None] * post * self.relay[m_relay] + noise_d
        terms = [(c, C, None) for c, C in zip(dest_coef, self.books)] + [(g_rd, self.relay, post)]
        dist = prefix_distances(y, terms, L, T)  # (B, M, L)
        radii = np.array([cfg.decoder.radius2(ell) for ell in range(1, L + 1)])
        inside = dist <= radii[None, None, :]
        unique = inside.sum(axis=1) == 1  # (B, L)
        accepted_msg = np.argmax(inside, axis=1)
        ml = np.argmin(dist, axis=1)  # lowest index on ties

        first = np.where(unique.any(axis=1), np.argmax(unique, axis=1), -1)
        has = first >= 0
        chosen = np.where(has, accepted_msg[idx, np.maximum(first, 0)], ml[:, L - 1])
        for ell in range(L):
            out.accepts[ell] += int(np.count_nonzero(first == ell))
        wrong_accept = has & (chosen != msg)
        out.undetected += int(np.count_nonzero(wrong_accept))
        out.final_errors += int(np.count_nonzero(chosen != msg))
        out.rejects_round1 += int(np.count_nonzero(~unique[:, 0]))
        out.ml_errors_round1 += int(np.count_nonzero(ml[:, 0] != msg))

        # recheck every acceptance with explicit signatures and direct distances
        for b in np.flatnonzero(has):
            k = (first[b] + 1) * T
            sig = sum(c[b] * C[:, :k] for c, C in zip(dest_coef, self.books)) \
                + g_rd[b] * post[b, :k] * self.relay[:, :k]
            if bounded_distance_accept(y[b, :k], sig, first[b] + 1, cfg.decoder) != chosen[b]:
                out.sphere_violations += 1
        relay_ok = ~forwards | (m_relay == msg)
        out.undetected_relay_ok += int(np.count_nonzero(wrong_accept & relay_ok))
        for b in np.flatnonzero(wrong_accept & relay_ok):
            k = (first[b] + 1) * T
            if np.sum(np.abs(noise_d[b, :k]) ** 2) <= cfg.decoder.radius2(first[b] + 1):
                out.noise_violations += 1


def run_arq_lab(cfg: LabConfig, n_trials: int, seed: int = 0) -> LabResult:
    """Bounded-distance ARQ decoding of ``n_trials`` messages; deterministic in ``seed``."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    exp = _Experiment(cfg, seed)
    res = LabResult(cfg, n_trials, np.zeros(cfg.L, dtype=np.int64), 0, 0, 0, 0, 0)
    per_batch = max(1, BATCH_ELEMENTS // (cfg.M * cfg.L * cfg.T))
    done, batch = 0, 0
    while done < n_trials:
        B = min(per_batch, n_trials - done)
        exp.run_batch(batch, B, res)
        done += B
        batch += 1
    return res
