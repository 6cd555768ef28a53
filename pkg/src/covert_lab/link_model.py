"""
Physical parameters, scenario taxonomy and the seeded channel sampler.

All arithmetic downstream of this module is linear-scale; decibels only
appear at the configuration boundary through :func:`db_to_linear`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Relationship",
    "Scheme",
    "ScenarioId",
    "IP",
    "IA",
    "FP",
    "FA",
    "ALL_SCENARIOS",
    "NoiseProfile",
    "TransmitConfig",
    "SecurityConstraints",
    "ChannelDraw",
    "db_to_linear",
    "linear_to_db",
    "make_rng",
    "substream",
    "sample_channel",
    "sample_channels",
]

DEFAULT_UPSILON = 0.01


class Relationship(enum.Enum):
    INDEPENDENCE = "independence"
    FRIEND = "friend"


class Scheme(enum.Enum):
    POWER_CONTROL = "power-control"
    ARTIFICIAL_NOISE = "artificial-noise"


@dataclass(frozen=True)
class ScenarioId:
    """Attacker relationship crossed with Alice's transmission scheme."""

    relationship: Relationship
    scheme: Scheme

    @property
    def code(self) -> str:
        r = "I" if self.relationship is Relationship.INDEPENDENCE else "F"
        s = "P" if self.scheme is Scheme.POWER_CONTROL else "A"
        return r + s

    @property
    def is_friend(self) -> bool:
        return self.relationship is Relationship.FRIEND

    @property
    def uses_artificial_noise(self) -> bool:
        return self.scheme is Scheme.ARTIFICIAL_NOISE

    @classmethod
    def parse(cls, text: str) -> "ScenarioId":
        """Parse one of ``ip``, ``ia``, ``fp``, ``fa`` (case-insensitive)."""
        try:
            return _BY_CODE[str(text).strip().upper()]
        except KeyError:
            raise ValueError(
                f"unknown scenario {text!r}; expected one of ip, ia, fp, fa"
            ) from None

    def __str__(self) -> str:
        return self.code


IP = ScenarioId(Relationship.INDEPENDENCE, Scheme.POWER_CONTROL)
IA = ScenarioId(Relationship.INDEPENDENCE, Scheme.ARTIFICIAL_NOISE)
FP = ScenarioId(Relationship.FRIEND, Scheme.POWER_CONTROL)
FA = ScenarioId(Relationship.FRIEND, Scheme.ARTIFICIAL_NOISE)
ALL_SCENARIOS = (IP, IA, FP, FA)
_BY_CODE = {s.code: s for s in ALL_SCENARIOS}


def _check_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class NoiseProfile:
    """Linear noise powers at Bob, Willie and Eve plus the detection margin."""

    sigma_b2: float
    sigma_w2: float
    sigma_e2: float
    upsilon: float = DEFAULT_UPSILON

    def __post_init__(self):
        for name in ("sigma_b2", "sigma_w2", "sigma_e2", "upsilon"):
            _check_positive(name, getattr(self, name))

    @classmethod
    def from_db(
        cls,
        sigma_b_db: float,
        sigma_w_db: float,
        sigma_e_db: float,
        upsilon: float = DEFAULT_UPSILON,
    ) -> "NoiseProfile":
        return cls(
            db_to_linear(sigma_b_db),
            db_to_linear(sigma_w_db),
            db_to_linear(sigma_e_db),
            upsilon,
        )

    @property
    def attacker_noise(self) -> float:
        """Willie and Eve's pooled noise power (friend relationship)."""
        return self.sigma_w2 + self.sigma_e2


@dataclass(frozen=True)
class TransmitConfig:
    """Transmit power, message power fraction and target secrecy rate."""

    pa: float
    rho: float = 1.0
    rs: float = 0.0

    def __post_init__(self):
        _check_positive("pa", self.pa)
        if not (0.0 < self.rho <= 1.0):
            raise ValueError(f"rho must lie in (0, 1], got {self.rho!r}")
        if not (math.isfinite(self.rs) and self.rs >= 0.0):
            raise ValueError(f"rs must be finite and >= 0, got {self.rs!r}")


@dataclass(frozen=True)
class SecurityConstraints:
    """Bounds on COP (``eps_c``), SOP (``eps_s``) and ``1 - TP`` (``eps_t``)."""

    eps_c: float
    eps_s: float
    eps_t: float

    def __post_init__(self):
        for name in ("eps_c", "eps_s", "eps_t"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v!r}")


@dataclass(frozen=True)
class ChannelDraw:
    """Channel power gains from Alice to Bob, Eve and Willie."""

    g_ab: float
    g_ae: float
    g_aw: float


def db_to_linear(x_db: float) -> float:
    """``10 ** (x_db / 10)``."""
    x_db = float(x_db)
    if not math.isfinite(x_db):
        raise ValueError(f"dB value must be finite, got {x_db!r}")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    x = float(x)
    if not (x > 0.0 and math.isfinite(x)):
        raise ValueError(f"linear value must be positive and finite, got {x!r}")
    return 10.0 * math.log10(x)


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """PCG64 generator for ``seed``."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(seed))


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator derived from ``(seed, *key)``.

    The same key always yields the same stream, so work split across any
    number of workers stays reproducible as long as the keys are fixed.
    """
    return make_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def sample_channel(rng: np.random.Generator) -> ChannelDraw:
    """One draw of the three independent unit-mean exponential gains."""
    g = rng.standard_exponential(3)
    return ChannelDraw(float(g[0]), float(g[1]), float(g[2]))


def sample_channels(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``n`` draws of ``(g_ab, g_ae, g_aw)`` as three arrays.

    Consumes the generator exactly like ``n`` calls to :func:`sample_channel`.
    """
    g = rng.standard_exponential((int(n), 3))
    return g[:, 0], g[:, 1], g[:, 2]
