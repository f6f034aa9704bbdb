"""Channel configuration and Rayleigh draws for the three scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SCENARIOS = ("relay", "mar", "cvma")

LINKS = {
    "relay": ("g_sd", "g_sr", "g_rd"),
    "mar": ("g1", "g2", "gr", "h1", "h2"),
    # G[antenna, user] entries then the inter-user link h
    "cvma": ("g_a0u0", "g_a0u1", "g_a1u0", "g_a1u1", "h"),
}


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    scenario: str = "relay"
    noise_ratio_c: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if not self.noise_ratio_c > 0:
            raise ValueError("noise_ratio_c must be positive")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")

    @property
    def rho(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


@dataclass(frozen=True)
class ProtocolConfig:
    L: int = 2
    r1: float = 0.5
    T: int = 100

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be an integer >= 1")
        if int(self.T) != self.T or self.T < 1:
            raise ValueError("T must be an integer >= 1")
        if not self.r1 >= 0:
            raise ValueError("r1 must be nonnegative")

    def check_scenario(self, scenario: str) -> None:
        hi = 2.0 if scenario == "cvma" else 1.0
        if self.r1 > hi:
            raise ValueError(f"r1={self.r1} outside [0, {hi}] for {scenario}")


@dataclass
class ChannelDraw:
    """Complex gains, one array entry per trial; fixed over all ARQ rounds."""

    scenario: str
    gains: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(next(iter(self.gains.values())))

    def power(self, name: str) -> np.ndarray:
        g = self.gains[name]
        return g.real ** 2 + g.imag ** 2

    def cvma_matrix(self) -> np.ndarray:
        """G with shape (n, 2 antennas, 2 users)."""
        g = self.gains
        return np.stack([np.stack([g["g_a0u0"], g["g_a0u1"]], axis=-1),
                         np.stack([g["g_a1u0"], g["g_a1u1"]], axis=-1)], axis=-2)

    def swapped_users(self) -> "ChannelDraw":
        """Same draw with the two users' labels exchanged (MAR / CVMA)."""
        g = self.gains
        if self.scenario == "mar":
            return ChannelDraw("mar", {"g1": g["g2"], "g2": g["g1"], "gr": g["gr"],
                                       "h1": g["h2"], "h2": g["h1"]})
        if self.scenario == "cvma":
            return ChannelDraw("cvma", {"g_a0u0": g["g_a0u1"], "g_a0u1": g["g_a0u0"],
                                        "g_a1u0": g["g_a1u1"], "g_a1u1": g["g_a1u0"], "h": g["h"]})
        raise ValueError("relay scenario has a single user")


def sample_channel(scenario: str, n: int, rng: np.random.Generator) -> ChannelDraw:
    """``n`` independent draws of every link, CN(0, 1) each."""
    links = LINKS[scenario]
    z = rng.standard_normal((len(links), 2, n)) * math.sqrt(0.5)
    return ChannelDraw(scenario, {name: z[k, 0] + 1j * z[k, 1] for k, name in enumerate(links)})


def draw_from_gains(scenario: str, **gains) -> ChannelDraw:
    """Build a draw from explicit gains (scalars or arrays), for tests and examples."""
    links = LINKS[scenario]
    missing = set(links) - set(gains)
    if missing:
        raise ValueError(f"missing gains {sorted(missing)}")
    arrs = {k: np.atleast_1d(np.asarray(gains[k], dtype=complex)) for k in links}
    n = max(len(a) for a in arrs.values())
    return ChannelDraw(scenario, {k: np.broadcast_to(a, (n,)).copy() for k, a in arrs.items()})
