"""
Covert secrecy rate: maximise ``R_s * TP`` under COP, SOP and TP bounds.

Power control (IP, FP) is solved in closed form: the COP bound fixes the
largest admissible transmit power, and the rate is the smallest of the
objective's stationary point and the SOP / TP rate limits. Artificial
noise (IA, FA) uses the same structure with the message-power fraction
``rho`` in place of the power and numerically located rate candidates.
:func:`solve_reference` is a brute-force optimiser, independent of the
closed forms, used to check all four.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .exceptions import BracketError, CovertLabError
from .link_model import FA, FP, IA, IP, NoiseProfile, ScenarioId, SecurityConstraints
from .numerics import ToleranceSpec, find_root_bracket, lambert_w0, lambert_wm1, maximize_1d

__all__ = [
    "Regime",
    "RsCandidates",
    "CsrSolution",
    "ReferenceGrid",
    "solve",
    "solve_ip",
    "solve_fp",
    "solve_ia",
    "solve_fa",
    "solve_reference",
    "optimal_power_ip",
    "optimal_power_fp",
    "optimal_rho",
    "csr_closed_form",
    "SolverError",
]

LN2 = math.log(2.0)
TIE_TOL = 1e-9
# rho* must satisfy the covertness bound to ~1e-12, tighter than the default root tolerance
RHO_TOL = ToleranceSpec(rel_tol=1e-13, abs_tol=1e-14, max_iterations=300)
RATE_TOL = ToleranceSpec(rel_tol=1e-11, abs_tol=1e-14, max_iterations=300)
_RHO_LO, _RHO_HI = 1e-12, 1.0 - 1e-12
_EDGE = 1e-9


class SolverError(CovertLabError, RuntimeError):
    """A rate candidate could not be bracketed; carries the diagnostics."""


class Regime(enum.Enum):
    STATIONARY = "Stationary"
    SECRECY_BOUND = "SecrecyBound"
    TRANSMISSION_BOUND = "TransmissionBound"
    INFEASIBLE = "Infeasible"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RsCandidates:
    """Stationary rate and the SOP / TP rate limits at the optimal power."""

    r_stationary: float
    r_sop: float
    r_tp: float


@dataclass(frozen=True)
class CsrSolution:
    csr: float
    rs_opt: float
    power_opt: float
    regime: Regime
    tp_at_opt: float
    cop_at_opt: float
    sop_at_opt: float
    candidates: RsCandidates | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def feasible(self) -> bool:
        return self.regime is not Regime.INFEASIBLE

    def as_dict(self) -> dict:
        return {
            "csr": self.csr,
            "rs_opt": self.rs_opt,
            "power_opt": self.power_opt,
            "regime": self.regime.value,
            "feasible": self.feasible,
            "tp_at_opt": self.tp_at_opt,
            "cop_at_opt": self.cop_at_opt,
            "sop_at_opt": self.sop_at_opt,
        }


def _infeasible(power: float, candidates=None, notes=()) -> CsrSolution:
    nan = math.nan
    return CsrSolution(0.0, 0.0, power, Regime.INFEASIBLE, nan, nan, nan, candidates, tuple(notes))


def _select(c: RsCandidates) -> tuple[float, Regime]:
    """Smallest candidate; near-ties go to Stationary, then SOP, then TP."""
    ordered = (
        (c.r_stationary, Regime.STATIONARY),
        (c.r_sop, Regime.SECRECY_BOUND),
        (c.r_tp, Regime.TRANSMISSION_BOUND),
    )
    low = min(v for v, _ in ordered)
    for value, regime in ordered:
        if value <= low + TIE_TOL:
            return value, regime
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Power control
# ---------------------------------------------------------------------------

def optimal_power_ip(noise: NoiseProfile, eps_c: float) -> float:
    """Largest power meeting the COP bound against an independent Willie."""
    return -noise.upsilon / math.log(eps_c)


def optimal_power_fp(noise: NoiseProfile, eps_c: float) -> float:
    """Largest power meeting the COP bound when Willie pools with Eve.

    Solves ``(1 + u) exp(-u) = eps_c`` for ``u = upsilon / pa`` on the
    lower Lambert branch.
    """
    return -noise.upsilon / (1.0 + lambert_wm1(-eps_c / math.e))


def _pc_rate_tp(noise: NoiseProfile, pa: float, eps_t: float) -> float:
    return math.log1p(-pa * math.log1p(-eps_t) / noise.sigma_b2) / LN2


def _pc_rate_stationary(noise: NoiseProfile, pa: float) -> float:
    return lambert_w0(pa / noise.sigma_b2) / LN2


def _pc_rate_sop(scenario: ScenarioId, noise: NoiseProfile, eps_s: float) -> float:
    if scenario.is_friend:
        root = math.sqrt(1.0 - eps_s)
        # 1 - sqrt(1 - eps_s) without cancellation
        gap = eps_s / (1.0 + root)
        ratio = gap * noise.attacker_noise / (noise.sigma_b2 * root)
    else:
        ratio = noise.sigma_e2 * eps_s / ((1.0 - eps_s) * noise.sigma_b2)
    return math.log2(ratio)


def _solve_pc(scenario: ScenarioId, noise: NoiseProfile, cons: SecurityConstraints) -> CsrSolution:
    if scenario.is_friend:
        pa = optimal_power_fp(noise, cons.eps_c)
    else:
        pa = optimal_power_ip(noise, cons.eps_c)
    cands = RsCandidates(
        r_stationary=_pc_rate_stationary(noise, pa),
        r_sop=_pc_rate_sop(scenario, noise, cons.eps_s),
        r_tp=_pc_rate_tp(noise, pa, cons.eps_t),
    )
    if min(cands.r_sop, cands.r_tp) <= 0.0:
        return _infeasible(pa, cands)
    rs, regime = _select(cands)
    tp = metrics.tp_pc(noise, pa, rs)
    sop = metrics.sop_fp(noise, rs) if scenario.is_friend else metrics.sop_ip(noise, rs)
    cop = metrics.cop_at_optimal_theta(scenario, noise, pa)
    return CsrSolution(rs * tp, rs, pa, regime, tp, cop, sop, cands)


def solve_ip(noise: NoiseProfile, cons: SecurityConstraints) -> CsrSolution:
    """CSR with an independent Willie and Eve, power-control scheme."""
    return _solve_pc(IP, noise, cons)


def solve_fp(noise: NoiseProfile, cons: SecurityConstraints) -> CsrSolution:
    """CSR with Willie and Eve pooling signals, power-control scheme."""
    return _solve_pc(FP, noise, cons)


def csr_closed_form(scenario: ScenarioId, noise: NoiseProfile, cons: SecurityConstraints) -> tuple[float, Regime]:
    """Published piecewise CSR expression for the power-control scenarios.

    Written directly in terms of ``(eps_c, eps_s, eps_t)`` and kept separate
    from :func:`solve_ip` / :func:`solve_fp`, which go through the
    candidate rates; the two must agree.
    """
    if scenario.uses_artificial_noise:
        raise ValueError("closed form exists only for the power-control scenarios")
    sb2, ups = noise.sigma_b2, noise.upsilon
    ec, es, et = cons.eps_c, cons.eps_s, cons.eps_t
    if scenario.is_friend:
        # k plays the role of ln(eps_c) in the independent case
        k = 1.0 + lambert_wm1(-ec / math.e)
        root = math.sqrt(1.0 - es)
        gap = 1.0 - root
        c = noise.attacker_noise
        r_sop = math.log2(gap * c / (sb2 * root))
        sop_branch = r_sop * math.exp((gap * c - root * sb2) * k / (ups * root))
    else:
        k = math.log(ec)
        r_sop = math.log2(noise.sigma_e2 * es / ((1.0 - es) * sb2))
        sop_branch = r_sop * math.exp((noise.sigma_e2 * es - (1.0 - es) * sb2) * k / ((1.0 - es) * ups))
    w = lambert_w0(-ups / (sb2 * k))
    r0 = w / LN2
    stat_branch = r0 * math.exp(-1.0 / w - sb2 * k / ups)
    r_tp = math.log2(1.0 + ups * math.log(1.0 - et) / (sb2 * k))
    tp_branch = (1.0 - et) * r_tp
    cands = RsCandidates(r0, r_sop, r_tp)
    if min(r_sop, r_tp) <= 0.0:
        return 0.0, Regime.INFEASIBLE
    _, regime = _select(cands)
    value = {
        Regime.STATIONARY: stat_branch,
        Regime.SECRECY_BOUND: sop_branch,
        Regime.TRANSMISSION_BOUND: tp_branch,
    }[regime]
    return value, regime


# ---------------------------------------------------------------------------
# Artificial noise
# ---------------------------------------------------------------------------

def optimal_rho(scenario: ScenarioId, noise: NoiseProfile, pa: float, eps_c: float) -> float:
    """Largest message fraction whose worst-case COP equals ``eps_c``."""
    f = lambda r: metrics.cop_at_optimal_theta(scenario, noise, pa, r) - eps_c
    br = find_root_bracket(f, _RHO_LO, _RHO_HI, RHO_TOL)
    # keep the side that satisfies the bound
    return br.lo if br.f_lo <= 0.0 or br.lo == br.hi else br.root


def _an_objective_slope(noise: NoiseProfile, pa: float, rho: float, ceiling: float):
    """Central difference of ``ln(R_s * TP)``; same sign as the objective's slope."""

    def g(r):
        return math.log(r) + metrics.log_tp_an(noise, pa, rho, r)

    def slope(r):
        h = min(1e-6 * max(1.0, r), 0.25 * r, 0.25 * (ceiling - r))
        return (g(r + h) - g(r - h)) / (2.0 * h)

    return slope


def _an_rate_tp(noise: NoiseProfile, pa: float, rho: float, eps_t: float) -> float:
    lt = pa * math.log1p(-eps_t)
    return math.log2((lt - noise.sigma_b2) / ((1.0 - rho) * lt - noise.sigma_b2))


def _solve_an(scenario: ScenarioId, noise: NoiseProfile, pa: float, cons: SecurityConstraints, notes: list[str]) -> CsrSolution:
    if not (pa > 0.0 and math.isfinite(pa)):
        raise ValueError(f"pa must be positive and finite, got {pa!r}")
    rho = optimal_rho(scenario, noise, pa, cons.eps_c)
    ceiling = metrics.rate_ceiling(rho)
    lo, hi = _EDGE * min(1.0, ceiling), ceiling * (1.0 - _EDGE)

    slope = _an_objective_slope(noise, pa, rho, ceiling)
    try:
        r0 = find_root_bracket(slope, lo, hi, RATE_TOL).root
    except BracketError as exc:
        raise SolverError(
            f"{scenario.code}: stationary rate not bracketed on ({lo:.3g}, {hi:.3g}) "
            f"at rho*={rho:.9g}, pa={pa:.4g}: {exc}"
        ) from exc

    sop_fn = metrics.sop_fa if scenario.is_friend else metrics.sop_ia
    f = lambda r: sop_fn(noise, pa, rho, r) - cons.eps_s
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0.0:
        r_sop = 0.0
    elif f_hi <= 0.0:
        r_sop = hi
        notes.append("SOP stays below eps_s up to the rate ceiling")
    else:
        br = find_root_bracket(f, lo, hi, RATE_TOL)
        r_sop = br.lo if br.f_lo <= 0.0 else br.root

    cands = RsCandidates(r0, r_sop, _an_rate_tp(noise, pa, rho, cons.eps_t))
    if min(cands.r_sop, cands.r_tp) <= 0.0:
        return _infeasible(rho, cands, notes)
    rs, regime = _select(cands)
    tp = metrics.tp_an(noise, pa, rho, rs)
    sop = sop_fn(noise, pa, rho, rs)
    cop = metrics.cop_at_optimal_theta(scenario, noise, pa, rho)
    return CsrSolution(rs * tp, rs, rho, regime, tp, cop, sop, cands, tuple(notes))


def solve_ia(noise: NoiseProfile, pa: float, cons: SecurityConstraints) -> CsrSolution:
    """CSR with an independent Willie and Eve, artificial-noise scheme at power ``pa``."""
    return _solve_an(IA, noise, pa, cons, [])


def solve_fa(noise: NoiseProfile, pa: float, cons: SecurityConstraints) -> CsrSolution:
    """CSR with Willie and Eve pooling signals, artificial-noise scheme at power ``pa``.

    Before solving for ``rho*`` the bound ``eps_c`` is compared with the
    largest worst-case COP any ``rho`` can produce.
    """
    notes: list[str] = []
    _, top = maximize_1d(
        lambda r: metrics.cop_at_optimal_theta(FA, noise, pa, r), _RHO_LO, _RHO_HI
    )
    if cons.eps_c >= top:
        notes.append(f"eps_c={cons.eps_c} is above every achievable COP (max {top:.12g})")
        return _infeasible(math.nan, None, notes)
    return _solve_an(FA, noise, pa, cons, notes)


def solve(
    scenario: ScenarioId,
    noise: NoiseProfile,
    cons: SecurityConstraints,
    pa: float | None = None,
) -> CsrSolution:
    """Dispatch to the scenario's solver; ``pa`` is required for AN scenarios."""
    if scenario.uses_artificial_noise:
        if pa is None:
            raise ValueError(f"scenario {scenario.code} needs a transmit power pa")
        return (solve_fa if scenario.is_friend else solve_ia)(noise, pa, cons)
    return (solve_fp if scenario.is_friend else solve_ip)(noise, cons)


# ---------------------------------------------------------------------------
# Brute-force reference
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceGrid:
    """Decision grid for :func:`solve_reference`.

    The power axis is ``pa`` (log-spaced over ``pa_bounds``) for power
    control and ``rho`` (uniform over ``rho_bounds``) for artificial noise;
    the rate axis is uniform on ``(0, R_max]`` where ``R_max`` is found by
    doubling until no covert power can sustain the TP bound. Each
    refinement round re-grids ``+-window`` cells around the incumbent,
    for at most ``refine_rounds`` rounds.
    """

    n_power: int = 200
    n_rate: int = 200
    pa_bounds: tuple[float, float] = (1e-8, 1e2)
    rho_bounds: tuple[float, float] = (1e-6, 1.0 - 1e-9)
    refine_rounds: int = 400
    refine_points: int = 21
    window: float = 2.0

    def __post_init__(self):
        if self.n_power < 200 or self.n_rate < 200:
            raise ValueError("reference grid needs at least 200 points per axis")
        if self.refine_points < 3:
            raise ValueError("refine_points must be >= 3")


class _Problem:
    """Vectorised objective and constraints on the (power, rate) plane."""

    def __init__(self, scenario, noise, pa, cons):
        self.scenario, self.noise, self.pa, self.cons = scenario, noise, pa, cons
        self.an = scenario.uses_artificial_noise

    def power(self, u):
        return np.exp(u) if not self.an else u

    def cop(self, u):
        p = self.power(np.asarray(u, float))
        if self.an:
            return metrics.cop_at_optimal_theta_array(self.scenario, self.noise, self.pa, p)
        return metrics.cop_at_optimal_theta_array(self.scenario, self.noise, p, 1.0)

    def tp(self, u, r):
        p = self.power(u)
        if self.an:
            return metrics.tp_an_array(self.noise, self.pa, p, r)
        return metrics.tp_pc_array(self.noise, p, r)

    def evaluate(self, u, r):
        """Objective with infeasible points set to -inf."""
        u, r = np.broadcast_arrays(np.asarray(u, float), np.asarray(r, float))
        cons = self.cons
        cop = self.cop(u)
        tp = self.tp(u, r)
        ok = (cop <= cons.eps_c) & (tp >= 1.0 - cons.eps_t) & (r > 0.0)
        sop = np.full(u.shape, np.nan)
        if np.any(ok):
            p = self.power(u[ok])
            if self.an:
                sop[ok] = metrics.sop_array(self.scenario, self.noise, self.pa, p, r[ok])
            else:
                sop[ok] = metrics.sop_array(self.scenario, self.noise, p, 1.0, r[ok])
        ok &= sop <= cons.eps_s
        return np.where(ok, r * tp, -np.inf)


def solve_reference(
    scenario: ScenarioId,
    noise: NoiseProfile,
    pa: float | None,
    cons: SecurityConstraints,
    grid: ReferenceGrid = ReferenceGrid(),
) -> CsrSolution:
    """Exhaustive grid search plus local zoom refinement.

    Uses only the metric definitions (TP, worst-case COP, SOP), never the
    optimality structure exploited by the scenario solvers.
    """
    prob = _Problem(scenario, noise, pa, cons)
    if prob.an:
        if pa is None:
            raise ValueError(f"scenario {scenario.code} needs a transmit power pa")
        u_lo, u_hi = grid.rho_bounds
        u_axis = np.linspace(u_lo, u_hi, grid.n_power)
    else:
        u_lo, u_hi = (math.log(b) for b in grid.pa_bounds)
        u_axis = np.linspace(u_lo, u_hi, grid.n_power)

    covert = u_axis[prob.cop(u_axis) <= cons.eps_c]
    if covert.size == 0:
        return _infeasible(math.nan)
    r_max = 1e-3
    for _ in range(80):
        if not np.any(prob.tp(covert, r_max) >= 1.0 - cons.eps_t):
            break
        r_max *= 2.0
    r_axis = np.linspace(0.0, r_max, grid.n_rate + 1)[1:]

    uu, rr = np.meshgrid(u_axis, r_axis, indexing="ij")
    values = prob.evaluate(uu, rr)
    k = int(np.argmax(values))
    best = float(values.flat[k])
    if not math.isfinite(best):
        return _infeasible(math.nan)
    bu, br = float(uu.flat[k]), float(rr.flat[k])
    du = u_axis[1] - u_axis[0]
    dr = r_axis[1] - r_axis[0]

    # an axis shrinks only when the incumbent is interior to the window on it,
    # so the search can still walk along a constraint ridge
    shrink = 2.0 * grid.window / (grid.refine_points - 1)
    rounds = 0
    while rounds < grid.refine_rounds and (du > 1e-13 * max(1.0, abs(bu)) or dr > 1e-13 * br):
        rounds += 1
        us = np.clip(np.linspace(bu - grid.window * du, bu + grid.window * du, grid.refine_points), u_lo, u_hi)
        rs = np.clip(np.linspace(br - grid.window * dr, br + grid.window * dr, grid.refine_points), 0.0, None)
        uu, rr = np.meshgrid(us, rs, indexing="ij")
        values = prob.evaluate(uu, rr)
        k = int(np.argmax(values))
        i, j = divmod(k, grid.refine_points)
        if values.flat[k] > best:
            best, bu, br = float(values.flat[k]), float(uu.flat[k]), float(rr.flat[k])
        else:
            i = j = grid.refine_points // 2
        if 0 < i < grid.refine_points - 1 or us[0] == us[-1]:
            du *= shrink
        if 0 < j < grid.refine_points - 1:
            dr *= shrink

    power = float(prob.power(bu))
    if prob.an:
        tp = metrics.tp_an(noise, pa, power, br)
        cop = metrics.cop_at_optimal_theta(scenario, noise, pa, power)
        sop = float(metrics.sop_array(scenario, noise, pa, power, br))
    else:
        tp = metrics.tp_pc(noise, power, br)
        cop = metrics.cop_at_optimal_theta(scenario, noise, power)
        sop = float(metrics.sop_array(scenario, noise, power, 1.0, br))
    slack_sop = (cons.eps_s - sop) / cons.eps_s
    slack_tp = (tp - (1.0 - cons.eps_t)) / (1.0 - cons.eps_t)
    if min(slack_sop, slack_tp) > 1e-4:
        regime = Regime.STATIONARY
    elif slack_sop <= slack_tp:
        regime = Regime.SECRECY_BOUND
    else:
        regime = Regime.TRANSMISSION_BOUND
    return CsrSolution(best, br, power, regime, tp, cop, sop)
