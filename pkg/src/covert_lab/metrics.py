"""
Closed-form and quadrature-backed link metrics for the four scenarios.

Transmission probability (TP), secrecy outage probability (SOP), Willie's
detection errors, the covertness outage probability (COP) and Willie's
COP-maximising threshold. Rates are in bits per channel use, powers are
linear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, FeasibilityError
from .link_model import NoiseProfile, ScenarioId, TransmitConfig
from .numerics import QUAD_TOL, ToleranceSpec, integrate_1d, integrate_triangle

__all__ = [
    "DetectionErrors",
    "MetricSet",
    "tp_pc",
    "tp_an",
    "log_tp_an",
    "sop_ip",
    "sop_fp",
    "sop_ia",
    "sop_fa",
    "sop_ia_printed",
    "rate_ceiling",
    "theta_star",
    "noise_floor",
    "detection_errors",
    "cop",
    "cop_at_optimal_theta",
    "tp",
    "sop",
    "metric_set",
    "tp_pc_array",
    "tp_an_array",
    "sop_array",
    "cop_at_optimal_theta_array",
]

# The kernel is at most 1, so the exponential weight beyond this many
# e-folds carries mass below double precision and is not integrated.
_TAIL_EFOLDS = 50.0


@dataclass(frozen=True)
class DetectionErrors:
    """Willie's false-alarm and missed-detection probabilities."""

    p_fa: float
    p_md: float

    def __post_init__(self):
        for name in ("p_fa", "p_md"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


@dataclass(frozen=True)
class MetricSet:
    """TP, COP and SOP of one operating point."""

    tp: float
    cop: float
    sop: float


# ---------------------------------------------------------------------------
# Transmission probability
# ---------------------------------------------------------------------------

def _check_pa(pa: float) -> None:
    if not (pa > 0.0 and math.isfinite(pa)):
        raise DomainError(f"pa must be positive and finite, got {pa!r}")


def _check_rho(rho: float, *, allow_one: bool = True) -> None:
    ok = 0.0 < rho <= 1.0 if allow_one else 0.0 < rho < 1.0
    if not ok:
        raise DomainError(f"rho must lie in (0, 1{']' if allow_one else ')'}, got {rho!r}")


def _check_rs(rs: float) -> None:
    if not (rs >= 0.0 and math.isfinite(rs)):
        raise DomainError(f"rs must be finite and >= 0, got {rs!r}")


def tp_pc(noise: NoiseProfile, pa: float, rs: float) -> float:
    """``P(C_b >= R_s)`` under power control: ``exp(-(2^rs - 1) sigma_b2 / pa)``."""
    _check_pa(pa)
    _check_rs(rs)
    return math.exp(-math.expm1(rs * math.log(2.0)) * noise.sigma_b2 / pa)


def rate_ceiling(rho: float) -> float:
    """Largest rate the AN scheme can ever support, ``log2(1 / (1 - rho))``."""
    if rho >= 1.0:
        return math.inf
    return -math.log2(1.0 - rho)


def log_tp_an(noise: NoiseProfile, pa: float, rho: float, rs: float) -> float:
    """Natural log of :func:`tp_an`; ``-inf`` at or above the rate ceiling."""
    _check_pa(pa)
    _check_rho(rho)
    _check_rs(rs)
    q = math.expm1(rs * math.log(2.0))
    headroom = rho - q * (1.0 - rho)
    if headroom <= 0.0:
        return -math.inf
    return -q * noise.sigma_b2 / (pa * headroom)


def tp_an(noise: NoiseProfile, pa: float, rho: float, rs: float) -> float:
    """TP under the artificial-noise scheme.

    Zero when ``2^rs >= 1 / (1 - rho)``: the jamming share of Bob's own
    signal caps his SINR at ``rho / (1 - rho)`` whatever the channel.
    """
    return math.exp(log_tp_an(noise, pa, rho, rs))


# ---------------------------------------------------------------------------
# Secrecy outage probability
# ---------------------------------------------------------------------------

def sop_ip(noise: NoiseProfile, rs: float) -> float:
    """SOP with an independent Eve under power control (no ``pa`` dependence)."""
    _check_rs(rs)
    x = 2.0 ** rs * noise.sigma_b2
    return x / (x + noise.sigma_e2)


def sop_fp(noise: NoiseProfile, rs: float) -> float:
    """SOP when Willie shares his signal with Eve, power control.

    With ``x = 2^rs sigma_b2`` and ``c = sigma_w2 + sigma_e2`` this is
    ``x (x + 2c) / (x + c)^2``.
    """
    _check_rs(rs)
    x = 2.0 ** rs * noise.sigma_b2
    c = noise.attacker_noise
    return x * (x + 2.0 * c) / (x + c) ** 2


class _AnSopTerms:
    """Rate-dependent constants shared by the AN-scheme SOP integrals."""

    def __init__(self, noise: NoiseProfile, pa: float, rho: float, rs: float, eve_noise: float):
        _check_pa(pa)
        _check_rho(rho, allow_one=False)
        if not (rs > 0.0 and math.isfinite(rs)):
            raise DomainError(f"rs must be finite and > 0 for the AN-scheme SOP, got {rs!r}")
        t = 2.0 ** rs
        q = math.expm1(rs * math.log(2.0))
        if t * (1.0 - rho) >= 1.0:
            raise FeasibilityError(
                f"SOP undefined: 2^rs = {t:.6g} >= 1/(1-rho) = {1.0 / (1.0 - rho):.6g}, "
                "so Alice never transmits"
            )
        self.t, self.q = t, q
        self.pa, self.rho, self.sb2, self.c = pa, rho, noise.sigma_b2, eve_noise
        # room left under the SINR ceiling, 1 - 2^rs (1 - rho)
        self.room = 1.0 - t * (1.0 - rho)
        self.upper = self.room * eve_noise / (q * (1.0 - rho) * pa)
        self.limit = min(self.upper, _TAIL_EFOLDS)
        # log_kernel(s) = -k s / d(s); k / d(0) is its slope at 0 and sets the peak width
        self.k = noise.sigma_b2 * pa * (q * q * (1.0 - rho) + (t + rho - 1.0) * self.room) / self.room
        self.width = 1.0 / (1.0 + self.k / (self.room * pa * eve_noise))

    def breakpoints(self) -> np.ndarray:
        """Geometric breakpoints from the peak width out to the cutoff."""
        n = max(0, int(math.ceil(math.log(self.limit / self.width, 4.0))))
        return self.width * 4.0 ** np.arange(min(n, 64))

    def log_kernel(self, s):
        """``log P(C_s >= R_s | attacker gain sum s) / TP``.

        The published form writes this as the difference of two constants
        that both grow like ``-ln TP``. Combined over a common denominator the
        constant terms cancel exactly, leaving ``-k s / d(s)``.
        """
        s = np.asarray(s, dtype=float)
        d = -self.q * (1.0 - self.rho) * self.pa ** 2 * s + self.room * self.pa * self.c
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -self.k * s / d
        return np.where(d > 0.0, out, -np.inf)


def sop_ia(
    noise: NoiseProfile,
    pa: float,
    rho: float,
    rs: float,
    tol: ToleranceSpec = QUAD_TOL,
) -> float:
    """SOP with an independent Eve under the artificial-noise scheme.

    One-dimensional integral over Eve's channel gain ``y`` on ``[0, phi]``
    where ``phi = (1 - 2^rs (1 - rho)) sigma_e2 / ((2^rs - 1)(1 - rho) pa)``.

    Raises
    ------
    FeasibilityError
        If ``2^rs >= 1 / (1 - rho)`` (TP is zero, the conditional SOP is undefined).
    """
    terms = _AnSopTerms(noise, pa, rho, rs, noise.sigma_e2)
    integral = integrate_1d(
        lambda y: np.exp(terms.log_kernel(y) - y), 0.0, terms.limit, tol, terms.breakpoints()
    )
    return min(max(1.0 - integral, 0.0), 1.0)


def sop_fa(
    noise: NoiseProfile,
    pa: float,
    rho: float,
    rs: float,
    tol: ToleranceSpec = QUAD_TOL,
) -> float:
    """SOP with Willie and Eve pooling signals under the artificial-noise scheme.

    Double integral over the two attacker gains on the triangle
    ``y + z <= Phi`` with ``Phi`` as in :func:`sop_ia` but with the pooled
    noise ``sigma_w2 + sigma_e2``.
    """
    terms = _AnSopTerms(noise, pa, rho, rs, noise.attacker_noise)
    integral = integrate_triangle(
        lambda y, z: np.exp(terms.log_kernel(y + z) - y - z), terms.limit, tol, terms.breakpoints()
    )
    return min(max(1.0 - integral, 0.0), 1.0)


def sop_ia_printed(
    noise: NoiseProfile,
    pa: float,
    rho: float,
    rs: float,
    tol: ToleranceSpec = QUAD_TOL,
) -> float:
    """Term-by-term transcription of the published AN-scheme SOP integral.

    Kept as a cross-check of :func:`sop_ia`. Its two large constants cancel
    catastrophically when ``rho`` is close to 1 or ``rs`` is close to 0.
    """
    _check_pa(pa)
    _check_rho(rho, allow_one=False)
    t = 2.0 ** rs
    sb2, se2 = noise.sigma_b2, noise.sigma_e2
    if t * (1.0 - rho) >= 1.0:
        raise FeasibilityError("SOP undefined above the rate ceiling")
    a_term = (t - 1.0) * sb2 / (rho * pa - (t - 1.0) * (1.0 - rho) * pa)
    b_term = (t + rho - 1.0) * sb2 / ((1.0 - t) * (1.0 - rho) * pa)
    numer = (
        (t + rho - 1.0) * (1.0 - (1.0 - rho) * t) * sb2 * se2 / ((1.0 - t) * (1.0 - rho))
        - (t - 1.0) * sb2 * se2
    )
    phi = (1.0 - t * (1.0 - rho)) * se2 / ((t - 1.0) * (1.0 - rho) * pa)

    def integrand(y):
        denom = (1.0 - t) * (1.0 - rho) * pa ** 2 * y + (1.0 - (1.0 - rho) * t) * pa * se2
        with np.errstate(divide="ignore", over="ignore"):
            val = np.exp(a_term - b_term + numer / denom - y)
        return np.where(denom > 0.0, val, 0.0)

    upper = min(phi, max(a_term, 0.0) + _TAIL_EFOLDS)
    return 1.0 - integrate_1d(integrand, 0.0, upper, tol)


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------

def noise_floor(scenario: ScenarioId, noise: NoiseProfile) -> float:
    """Willie's received power when nothing at all is radiated."""
    return noise.attacker_noise if scenario.is_friend else noise.sigma_w2


def _gamma2_cdf(u: float) -> float:
    """``1 - (1 + u) e^{-u}``: CDF of a sum of two unit exponentials."""
    if u <= 0.0:
        return 0.0
    if u < 0.1:
        # sum_{k>=2} (-1)^k (k - 1) u^k / k!
        total, term = 0.0, 1.0
        for k in range(1, 16):
            term *= u / k
            if k >= 2:
                total += (-1) ** k * (k - 1) * term
        return total
    return -math.expm1(-u) - u * math.exp(-u)


def _gamma2_sf(u: float) -> float:
    if u <= 0.0:
        return 1.0
    return (1.0 + u) * math.exp(-u)


def _an_active(scenario: ScenarioId, rho: float) -> bool:
    return scenario.uses_artificial_noise and rho < 1.0


def theta_star(scenario: ScenarioId, noise: NoiseProfile, pa: float, rho: float = 1.0) -> float:
    """Willie's COP-maximising detection threshold.

    Power control (or AN with ``rho == 1``): the noise floor plus the margin
    ``upsilon``. Artificial noise: the stationary point of the COP in the
    threshold, ``floor - k (1 - rho) pa ln(1 - rho) / rho`` with ``k = 1``
    (independent) or ``k = 2`` (friend).
    """
    _check_pa(pa)
    _check_rho(rho)
    floor = noise_floor(scenario, noise)
    if not _an_active(scenario, rho):
        return floor + noise.upsilon
    k = 2.0 if scenario.is_friend else 1.0
    return floor + k * (rho - 1.0) * pa / rho * math.log1p(-rho)


def _detect_and_false_alarm(
    scenario: ScenarioId, noise: NoiseProfile, pa: float, rho: float, theta: float
) -> tuple[float, float]:
    """Return ``(P(detect | transmit), P(false alarm | silent))``."""
    _check_pa(pa)
    _check_rho(rho)
    if not math.isfinite(theta):
        raise DomainError(f"theta must be finite, got {theta!r}")
    x = theta - noise_floor(scenario, noise)
    if x <= 0.0:
        return 1.0, 1.0
    an = _an_active(scenario, rho)
    if scenario.is_friend:
        p_detect = _gamma2_sf(x / pa)
        p_fa = _gamma2_sf(x / ((1.0 - rho) * pa)) if an else 0.0
    else:
        p_detect = math.exp(-x / pa)
        p_fa = math.exp(-x / ((1.0 - rho) * pa)) if an else 0.0
    return p_detect, p_fa


def detection_errors(
    scenario: ScenarioId, noise: NoiseProfile, pa: float, rho: float, theta: float
) -> DetectionErrors:
    """False-alarm and missed-detection probabilities at threshold ``theta``.

    In the AN scenarios Alice keeps radiating jamming noise while silent,
    so Willie's silent-slot power is random; with power control it is the
    deterministic noise floor and ``p_fa`` is a 0/1 step.
    """
    p_detect, p_fa = _detect_and_false_alarm(scenario, noise, pa, rho, theta)
    x = theta - noise_floor(scenario, noise)
    if x <= 0.0:
        p_md = 0.0
    elif scenario.is_friend:
        p_md = _gamma2_cdf(x / pa)
    else:
        p_md = -math.expm1(-x / pa)
    return DetectionErrors(p_fa=p_fa, p_md=p_md)


def cop(scenario: ScenarioId, noise: NoiseProfile, pa: float, rho: float, theta: float) -> float:
    """``1 - (p_fa + p_md)`` at threshold ``theta``.

    Evaluated as ``P(detect) - p_fa`` so small values keep full relative
    precision.
    """
    p_detect, p_fa = _detect_and_false_alarm(scenario, noise, pa, rho, theta)
    if theta - noise_floor(scenario, noise) <= 0.0:
        return 0.0
    return p_detect - p_fa


def cop_at_optimal_theta(
    scenario: ScenarioId, noise: NoiseProfile, pa: float, rho: float = 1.0
) -> float:
    """Worst-case COP, i.e. at Willie's optimal threshold.

    PC: ``exp(-u)`` (independent) or ``(1 + u) exp(-u)`` (friend) with
    ``u = upsilon / pa``. AN: a function of ``rho`` alone,
    ``rho (1 - rho)^((1 - rho)/rho)`` (independent) or the difference of
    two shape-2 gamma survival terms (friend).
    """
    _check_pa(pa)
    _check_rho(rho)
    if not _an_active(scenario, rho):
        u = noise.upsilon / pa
        return _gamma2_sf(u) if scenario.is_friend else math.exp(-u)
    log_keep = math.log1p(-rho)
    if not scenario.is_friend:
        return rho * math.exp((1.0 - rho) / rho * log_keep)
    u = -2.0 * (1.0 - rho) * log_keep / rho
    return _gamma2_sf(u) - _gamma2_sf(u / (1.0 - rho))


# ---------------------------------------------------------------------------
# Scenario dispatch
# ---------------------------------------------------------------------------

def tp(scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig) -> float:
    if scenario.uses_artificial_noise:
        return tp_an(noise, cfg.pa, cfg.rho, cfg.rs)
    return tp_pc(noise, cfg.pa, cfg.rs)


def sop(
    scenario: ScenarioId,
    noise: NoiseProfile,
    cfg: TransmitConfig,
    tol: ToleranceSpec = QUAD_TOL,
) -> float:
    if scenario.uses_artificial_noise and cfg.rho < 1.0:
        fn = sop_fa if scenario.is_friend else sop_ia
        return fn(noise, cfg.pa, cfg.rho, cfg.rs, tol)
    return sop_fp(noise, cfg.rs) if scenario.is_friend else sop_ip(noise, cfg.rs)


def metric_set(scenario: ScenarioId, noise: NoiseProfile, cfg: TransmitConfig) -> MetricSet:
    """TP, worst-case COP and SOP at ``cfg``."""
    rho = cfg.rho if scenario.uses_artificial_noise else 1.0
    return MetricSet(
        tp=tp(scenario, noise, cfg),
        cop=cop_at_optimal_theta(scenario, noise, cfg.pa, rho),
        sop=sop(scenario, noise, cfg),
    )


# ---------------------------------------------------------------------------
# Array versions (used by the brute-force reference optimiser)
# ---------------------------------------------------------------------------

def tp_pc_array(noise: NoiseProfile, pa, rs) -> np.ndarray:
    pa, rs = np.broadcast_arrays(np.asarray(pa, float), np.asarray(rs, float))
    q = np.expm1(rs * math.log(2.0))
    return np.exp(-q * noise.sigma_b2 / pa)


def tp_an_array(noise: NoiseProfile, pa: float, rho, rs) -> np.ndarray:
    rho, rs = np.broadcast_arrays(np.asarray(rho, float), np.asarray(rs, float))
    q = np.expm1(rs * math.log(2.0))
    headroom = rho - q * (1.0 - rho)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.exp(-q * noise.sigma_b2 / (pa * headroom))
    return np.where(headroom > 0.0, out, 0.0)


def cop_at_optimal_theta_array(scenario: ScenarioId, noise: NoiseProfile, pa, rho) -> np.ndarray:
    pa, rho = np.broadcast_arrays(np.asarray(pa, float), np.asarray(rho, float))
    out = [cop_at_optimal_theta(scenario, noise, float(p), float(r)) for p, r in zip(pa.ravel(), rho.ravel())]
    return np.array(out).reshape(pa.shape)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_edges(width: np.ndarray, limit: np.ndarray, panels: int) -> np.ndarray:
    """Per-row panel edges on ``[0, limit]``: geometric from ``width`` when the
    peak is narrower than the range, uniform otherwise."""
    j = np.arange(panels) / (panels - 1)
    ratio = np.maximum(limit / width, 1.0)
    geo = width[:, None] * ratio[:, None] ** j[None, :]
    uni = limit[:, None] * np.linspace(0.0, 1.0, panels + 1)[None, 1:]
    inner = np.where((ratio > 1.0)[:, None], geo, uni)
    return np.concatenate([np.zeros((width.size, 1)), inner], axis=1)


def sop_array(
    scenario: ScenarioId,
    noise: NoiseProfile,
    pa,
    rho,
    rs,
    panels: int = 32,
) -> np.ndarray:
    """Broadcast SOP with a fixed composite Gauss-Legendre rule.

    An independent route to :func:`sop_ia` / :func:`sop_fa`: the pooled
    friend-case gain ``y + z`` is integrated as one shape-2 gamma variable
    instead of over the triangle, and no adaptivity is used. Entries above
    the AN rate ceiling are NaN.
    """
    pa, rho, rs = np.broadcast_arrays(
        np.asarray(pa, float), np.asarray(rho, float), np.asarray(rs, float)
    )
    shape = pa.shape
    pa, rho, rs = pa.ravel(), rho.ravel(), rs.ravel()
    if not scenario.uses_artificial_noise:
        x = 2.0 ** rs * noise.sigma_b2
        if scenario.is_friend:
            c = noise.attacker_noise
            out = x * (x + 2.0 * c) / (x + c) ** 2
        else:
            out = x / (x + noise.sigma_e2)
        return out.reshape(shape)

    c = noise.attacker_noise if scenario.is_friend else noise.sigma_e2
    out = np.full(pa.size, np.nan)
    t = 2.0 ** rs
    q = np.expm1(rs * math.log(2.0))
    room = 1.0 - t * (1.0 - rho)
    ok = (room > 0.0) & (rs > 0.0) & (rho < 1.0)
    idx = np.nonzero(ok)[0]
    for chunk in np.array_split(idx, max(1, idx.size // 512)):
        if chunk.size == 0:
            continue
        p, r, tt, qq, rm = pa[chunk], rho[chunk], t[chunk], q[chunk], room[chunk]
        upper = rm * c / (qq * (1.0 - r) * p)
        limit = np.minimum(upper, _TAIL_EFOLDS)
        d0 = rm * p * c
        k = noise.sigma_b2 * p * (qq * qq * (1.0 - r) + (tt + r - 1.0) * rm) / rm
        width = 1.0 / (1.0 + k / d0)
        edges = _panel_edges(width, limit, panels)
        half = 0.5 * np.diff(edges, axis=1)
        s = (0.5 * (edges[:, :-1] + edges[:, 1:]))[:, :, None] + half[:, :, None] * _GL_X
        pp, rr, qv, rmv, kv = (v[:, None, None] for v in (p, r, qq, rm, k))
        d = -qv * (1.0 - rr) * pp ** 2 * s + rmv * pp * c
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = np.where(d > 0.0, np.exp(-kv * s / d - s), 0.0)
        if scenario.is_friend:
            vals = vals * s
        integral = np.einsum("npk,np,k->n", vals, half, _GL_W)
        out[chunk] = np.clip(1.0 - integral, 0.0, 1.0)
    return out.reshape(shape)
