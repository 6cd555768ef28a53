"""
Empirical estimators of TP, SOP and Willie's detection errors.

This is the independent check on :mod:`covert_lab.metrics`: it simulates
the channel gains and the capacities/received powers they induce and only
counts events, without using any closed form. Work is split into fixed
chunks, each drawing from its own substream keyed by ``(seed, stream,
chunk)``, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConditioningStarvationError
from .link_model import NoiseProfile, ScenarioId, TransmitConfig, substream
from . import metrics

__all__ = [
    "McEstimate",
    "Comparison",
    "ValidationReport",
    "estimate_tp",
    "estimate_sop",
    "estimate_detection",
    "validate_scenario",
    "worker_count",
]

CHUNK = 1 << 16
MIN_SAMPLES = 1000
Z95 = 1.959963984540054

_STREAM_TP, _STREAM_SOP, _STREAM_SILENT, _STREAM_TX = 1, 2, 3, 4


@dataclass(frozen=True)
class McEstimate:
    """Empirical probability with its 95% confidence half-width."""

    mean: float
    half_width: float
    n: int
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.mean <= 1.0):
            raise ValueError(f"mean must lie in [0, 1], got {self.mean!r}")
        if self.half_width < 0.0:
            raise ValueError("half_width must be >= 0")


def _bernoulli(hits: int, n: int, seed: int) -> McEstimate:
    p = hits / n
    return McEstimate(p, Z95 * math.sqrt(p * (1.0 - p) / n), n, seed)


def worker_count() -> int:
    """Thread pool size: ``COVERT_LAB_THREADS`` or the machine's CPU count."""
    env = os.environ.get("COVERT_LAB_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _chunk_sizes(n: int) -> list[int]:
    full, rest = divmod(int(n), CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _map_chunks(fn, sizes, workers=None):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(sizes) <= 1:
        return [fn(k, m) for k, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(len(sizes)), sizes))


def _check_n(n: int) -> int:
    n = int(n)
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n}")
    return n


# ---------------------------------------------------------------------------
# Simulated link quantities
# ---------------------------------------------------------------------------

def _sinr(gain, power_msg, power_jam, noise_power):
    return power_msg * gain / (power_jam * gain + noise_power)


def _bob_capacity(scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig, g_ab):
    if scenario.uses_artificial_noise:
        snr = _sinr(g_ab, cfg.rho * cfg.pa, (1.0 - cfg.rho) * cfg.pa, noise.sigma_b2)
    else:
        snr = cfg.pa * g_ab / noise.sigma_b2
    return np.log2(1.0 + snr)


def _eve_capacity(scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig, g_ae, g_aw):
    jam = (1.0 - cfg.rho) * cfg.pa if scenario.uses_artificial_noise else 0.0
    msg = cfg.rho * cfg.pa if scenario.uses_artificial_noise else cfg.pa
    if scenario.is_friend:
        pooled = g_ae + g_aw
        snr = _sinr(pooled, msg, jam, noise.sigma_e2 + noise.sigma_w2)
    else:
        snr = _sinr(g_ae, msg, jam, noise.sigma_e2)
    return np.log2(1.0 + snr)


def _willie_power(scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig, g_aw, g_ae, transmitting: bool):
    """Mean received power over a slot in the many-symbol limit."""
    if scenario.uses_artificial_noise:
        radiated = cfg.pa if transmitting else (1.0 - cfg.rho) * cfg.pa
    else:
        radiated = cfg.pa if transmitting else 0.0
    if scenario.is_friend:
        return radiated * (g_aw + g_ae) + noise.sigma_w2 + noise.sigma_e2
    return radiated * g_aw + noise.sigma_w2


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------

def estimate_tp(
    scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig, n: int, seed: int
) -> McEstimate:
    """Fraction of slots with ``C_b >= R_s``."""
    n = _check_n(n)

    def work(k, m):
        g = substream(seed, _STREAM_TP, k).standard_exponential(m)
        return int(np.count_nonzero(_bob_capacity(scenario, noise, cfg, g) >= cfg.rs))

    return _bernoulli(sum(_map_chunks(work, _chunk_sizes(n))), n, seed)


def estimate_sop(
    scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig, n: int, seed: int
) -> McEstimate:
    """Fraction of transmitting slots (``C_b >= R_s``) with ``C_s < R_s``.

    Rejection sampling: chunks are drawn in a fixed order until ``n`` slots
    have been accepted; the first ``n`` accepted slots are used.

    Raises
    ------
    ConditioningStarvationError
        If ``100 n`` draws yield fewer than ``n`` accepted slots.
    """
    n = _check_n(n)
    budget = 100 * n
    workers = worker_count()
    accepted = outages = drawn = 0
    k = 0

    def work(idx, m):
        g = substream(seed, _STREAM_SOP, idx).standard_exponential((m, 3))
        g_ab, g_ae, g_aw = g[:, 0], g[:, 1], g[:, 2]
        c_b = _bob_capacity(scenario, noise, cfg, g_ab)
        ok = c_b >= cfg.rs
        c_s = c_b[ok] - _eve_capacity(scenario, noise, cfg, g_ae[ok], g_aw[ok])
        return c_s < cfg.rs

    while accepted < n:
        if drawn >= budget:
            raise ConditioningStarvationError(
                f"only {accepted} of {drawn} draws had C_b >= R_s "
                f"(acceptance {accepted / drawn:.3%} < 1%)"
            )
        batch = list(range(k, k + max(1, workers)))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda i: work(i, CHUNK), batch))
        else:
            results = [work(i, CHUNK) for i in batch]
        for flags in results:
            drawn += CHUNK
            take = flags[: n - accepted]
            outages += int(np.count_nonzero(take))
            accepted += take.size
            if accepted >= n:
                break
        k += len(batch)
    return _bernoulli(outages, n, seed)


def estimate_detection(
    scenario: ScenarioId,
    noise: NoiseProfile,
    cfg: TransmitConfig,
    theta: float,
    n: int,
    seed: int,
) -> tuple[McEstimate, McEstimate, McEstimate]:
    """Simulate Willie's power test under both hypotheses.

    Silent and transmitting slots come from separate substreams, so the
    two error estimates are independent and the COP half-width is their
    quadrature sum.

    Returns
    -------
    (p_fa, p_md, cop)
    """
    n = _check_n(n)
    sizes = _chunk_sizes(n)

    def silent(k, m):
        g = substream(seed, _STREAM_SILENT, k).standard_exponential((m, 2))
        pw = _willie_power(scenario, noise, cfg, g[:, 0], g[:, 1], transmitting=False)
        return int(np.count_nonzero(np.broadcast_to(pw, (m,)) >= theta))

    def transmit(k, m):
        g = substream(seed, _STREAM_TX, k).standard_exponential((m, 2))
        pw = _willie_power(scenario, noise, cfg, g[:, 0], g[:, 1], transmitting=True)
        return int(np.count_nonzero(pw <= theta))

    p_fa = _bernoulli(sum(_map_chunks(silent, sizes)), n, seed)
    p_md = _bernoulli(sum(_map_chunks(transmit, sizes)), n, seed)
    raw = 1.0 - (p_fa.mean + p_md.mean)
    cop = McEstimate(
        min(max(raw, 0.0), 1.0),
        math.hypot(p_fa.half_width, p_md.half_width),
        n,
        seed,
    )
    return p_fa, p_md, cop


# ---------------------------------------------------------------------------
# Analytic-vs-simulation harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    """One analytic value checked against its Monte Carlo estimate.

    ``passed`` holds when the gap is at most three confidence half-widths
    plus one count (``1 / n``), the resolution of an empirical frequency.
    """

    name: str
    analytic: float
    estimate: McEstimate

    @property
    def gap(self) -> float:
        return abs(self.analytic - self.estimate.mean)

    @property
    def allowance(self) -> float:
        return 3.0 * self.estimate.half_width + 1.0 / self.estimate.n

    @property
    def passed(self) -> bool:
        return self.gap <= self.allowance


@dataclass(frozen=True)
class ValidationReport:
    scenario: ScenarioId
    noise: NoiseProfile
    cfg: TransmitConfig
    theta: float
    comparisons: tuple[Comparison, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    def lines(self) -> list[str]:
        out = []
        for c in self.comparisons:
            out.append(
                f"{self.scenario.code} {c.name:>3}: analytic={c.analytic:.6f} "
                f"mc={c.estimate.mean:.6f} +/- {c.estimate.half_width:.2e} "
                f"gap={c.gap:.2e} {'PASS' if c.passed else 'FAIL'}"
            )
        return out


def validate_scenario(
    scenario: ScenarioId,
    noise: NoiseProfile,
    cfg: TransmitConfig,
    n: int,
    seed: int,
    perturbation: float = 0.0,
) -> ValidationReport:
    """Compare analytic TP, SOP and COP at Willie's optimal threshold with simulation.

    ``perturbation`` is added to every analytic value; a non-zero value is
    used to confirm that the harness can fail.
    """
    rho = cfg.rho if scenario.uses_artificial_noise else 1.0
    theta = metrics.theta_star(scenario, noise, cfg.pa, rho)
    analytic = {
        "tp": metrics.tp(scenario, noise, cfg),
        "sop": metrics.sop(scenario, noise, cfg),
        "cop": metrics.cop(scenario, noise, cfg.pa, rho, theta),
    }
    _, _, cop_mc = estimate_detection(scenario, noise, cfg, theta, n, seed)
    estimates = {
        "tp": estimate_tp(scenario, noise, cfg, n, seed),
        "sop": estimate_sop(scenario, noise, cfg, n, seed),
        "cop": cop_mc,
    }
    comparisons = tuple(
        Comparison(name, analytic[name] + perturbation, estimates[name])
        for name in ("tp", "sop", "cop")
    )
    return ValidationReport(scenario, noise, cfg, theta, comparisons)
