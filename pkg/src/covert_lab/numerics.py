"""
Special functions and generic 1-D / 2-D numerical routines.

Lambert W (both real branches), adaptive Gauss-Kronrod quadrature on an
interval and on the triangle ``{y >= 0, z >= 0, y + z <= phi}``, a
Brent-style bracketing root finder and a grid-seeded bounded maximiser.
Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import BracketError, ConvergenceError, DomainError

__all__ = [
    "ToleranceSpec",
    "ROOT_TOL",
    "QUAD_TOL",
    "MAXIMIZE_TOL",
    "lambert_w0",
    "lambert_wm1",
    "integrate_1d",
    "integrate_triangle",
    "find_root",
    "find_root_bracket",
    "RootBracket",
    "maximize_1d",
]

_EPS = np.finfo(float).eps
_INV_E = math.exp(-1.0)
_BRANCH_POINT = -_INV_E


@dataclass(frozen=True)
class ToleranceSpec:
    """Convergence controls for the iterative routines.

    Parameters
    ----------
    rel_tol : float
        Relative tolerance, ``0 < rel_tol <= 1e-2``.
    abs_tol : float
        Absolute tolerance, ``>= 0``.
    max_iterations : int
        Iteration budget, ``>= 10``. For :func:`maximize_1d` this is also the
        number of grid intervals used to seed the local refinement.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 0.0
    max_iterations: int = 200

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-2):
            raise ValueError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol!r}")
        if not (self.abs_tol >= 0.0):
            raise ValueError(f"abs_tol must be >= 0, got {self.abs_tol!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 10:
            raise ValueError(
                f"max_iterations must be an integer >= 10, got {self.max_iterations!r}"
            )


ROOT_TOL = ToleranceSpec(rel_tol=1e-9, abs_tol=1e-15, max_iterations=200)
QUAD_TOL = ToleranceSpec(rel_tol=1e-8, abs_tol=1e-15, max_iterations=60)
MAXIMIZE_TOL = ToleranceSpec(rel_tol=1e-9, abs_tol=0.0, max_iterations=400)


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def _halley(x: float, w: float) -> float:
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        step = f / denom
        w -= step
        if abs(step) <= 4.0 * _EPS * (1.0 + abs(w)):
            break
    return w


def _branch_series(p: float) -> float:
    # expansion of W about x = -1/e in p = +-sqrt(2 (e x + 1))
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3 - 43.0 / 540.0 * p ** 4


def lambert_w0(x: float) -> float:
    """Principal branch ``W0`` of the Lambert W function.

    Returns the ``w >= -1`` solving ``w * exp(w) = x`` for ``x >= -1/e``.

    Raises
    ------
    DomainError
        If ``x < -1/e`` or ``x`` is not finite.
    """
    x = float(x)
    if not math.isfinite(x) or x < _BRANCH_POINT:
        raise DomainError(f"lambert_w0 is defined for x >= -1/e, got {x!r}")
    if x == 0.0:
        return 0.0
    if x == _BRANCH_POINT:
        return -1.0
    if x < -0.25:
        w = _branch_series(math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0)))
    elif x < 3.0:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    w = _halley(x, w)
    return max(w, -1.0)


def lambert_wm1(x: float) -> float:
    """Lower real branch ``W_{-1}`` of the Lambert W function.

    Returns the ``w <= -1`` solving ``w * exp(w) = x`` for ``-1/e <= x < 0``.

    Raises
    ------
    DomainError
        If ``x`` lies outside ``[-1/e, 0)``.
    """
    x = float(x)
    if not math.isfinite(x) or x < _BRANCH_POINT or x >= 0.0:
        raise DomainError(f"lambert_wm1 is defined for -1/e <= x < 0, got {x!r}")
    if x == _BRANCH_POINT:
        return -1.0
    if x < -0.25:
        w = _branch_series(-math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0)))
    else:
        l1 = math.log(-x)
        l2 = math.log(-l1)
        w = l1 - l2 + l2 / l1
    w = _halley(x, w)
    return min(w, -1.0)


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 abscissae on [-1, 1] with Kronrod and embedded 7-point Gauss weights.
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_gauss_half = np.zeros(8)
_gauss_half[1:7:2] = _WG[:3]
_gauss_half[7] = _WG[3]
_GAUSS = np.concatenate([_gauss_half[:-1], _gauss_half[::-1]])


_MAX_PANELS = 1 << 18


def _initial_panels(a, b, points):
    """Split each ``[a[i], b[i]]`` at the ``points`` lying strictly inside it."""
    m = a.size
    if points is None or len(points) == 0:
        return a.copy(), b.copy(), np.arange(m)
    pts = np.unique(np.asarray(points, dtype=float))
    inside = (pts[None, :] > a[:, None]) & (pts[None, :] < b[:, None])
    lo, hi, owner = [], [], []
    for i in range(m):
        edges = np.concatenate([[a[i]], pts[inside[i]], [b[i]]])
        lo.append(edges[:-1])
        hi.append(edges[1:])
        owner.append(np.full(edges.size - 1, i))
    return np.concatenate(lo), np.concatenate(hi), np.concatenate(owner)


def _adaptive_gk(f, a, b, tol: ToleranceSpec, points=None):
    """Integrate ``f`` over many intervals ``[a[i], b[i]]`` at once.

    ``f(x, owner)`` receives flat arrays of abscissae and the interval index
    each abscissa belongs to. Each interval starts split at the given
    ``points``; panels are then halved until each one carries no more than
    its width-proportional share of the tolerance.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    m = a.size
    span = b - a
    accepted = np.zeros(m)
    lo, hi, owner = _initial_panels(a, b, points)
    keep = span[owner] > 0
    lo, hi, owner = lo[keep], hi[keep], owner[keep]

    for _ in range(tol.max_iterations):
        if owner.size == 0:
            return accepted
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = np.asarray(f(x.ravel(), np.repeat(owner, _NODES.size)), dtype=float)
        fx = np.broadcast_to(fx, (x.size,)).reshape(x.shape)
        if not np.all(np.isfinite(fx)):
            raise ValueError("integrand returned a non-finite value")
        kron = half * (fx @ _KRONROD)
        err = np.abs(kron - half * (fx @ _GAUSS))

        total = accepted + np.bincount(owner, weights=kron, minlength=m)
        budget = np.maximum(tol.abs_tol, tol.rel_tol * np.abs(total[owner]))
        done = err <= budget * (hi - lo) / span[owner]
        # panels whose error estimate is at roundoff level, or which can no
        # longer be split in floating point, are accepted
        done |= err <= 50.0 * _EPS * half * (np.abs(fx) @ _KRONROD)
        done |= half <= 8.0 * _EPS * np.maximum(np.abs(mid), 1e-300)
        accepted += np.bincount(owner[done], weights=kron[done], minlength=m)

        split = ~done
        lo_s, hi_s, mid_s, own_s = lo[split], hi[split], mid[split], owner[split]
        lo = np.concatenate([lo_s, mid_s])
        hi = np.concatenate([mid_s, hi_s])
        owner = np.concatenate([own_s, own_s])
        if owner.size > _MAX_PANELS:
            raise ConvergenceError(f"adaptive quadrature needs more than {_MAX_PANELS} panels")
    if owner.size == 0:
        return accepted
    raise ConvergenceError(
        f"adaptive quadrature did not converge in {tol.max_iterations} refinement rounds"
    )


def _as_vectorized(f):
    def g(x):
        try:
            out = np.asarray(f(x), dtype=float)
        except TypeError:
            out = None
        if out is None or out.shape != np.shape(x):
            out = np.array([float(f(float(xi))) for xi in np.ravel(x)]).reshape(np.shape(x))
        return out
    return g


def integrate_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: ToleranceSpec = QUAD_TOL,
    points=None,
) -> float:
    """Adaptive 15-point Gauss-Kronrod integral of ``f`` over ``[a, b]``.

    ``f`` should accept a numpy array and return an array of the same shape;
    scalar-only callables are detected and evaluated point by point.
    ``points`` are optional breakpoints where the initial rule is split,
    e.g. to resolve a feature narrower than the interval.

    Raises
    ------
    DomainError
        If ``a > b``.
    ConvergenceError
        If the error estimate has not passed after ``tol.max_iterations``
        halving rounds.
    """
    a, b = float(a), float(b)
    if a > b:
        raise DomainError(f"integrate_1d needs a <= b, got [{a}, {b}]")
    if a == b:
        return 0.0
    g = _as_vectorized(f)
    return float(_adaptive_gk(lambda x, _owner: g(x), [a], [b], tol, points)[0])


def integrate_triangle(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    phi: float,
    tol: ToleranceSpec = QUAD_TOL,
    points=None,
) -> float:
    """Integral of ``f(y, z)`` over ``{y >= 0, z >= 0, y + z <= phi}``.

    Iterated form: an adaptive outer integral over ``z in [0, phi]`` whose
    integrand is the adaptive inner integral over ``y in [0, phi - z]``. All
    inner integrals requested by one outer refinement round are computed
    together. ``f`` must broadcast over numpy arrays. ``points`` are
    breakpoints applied to both coordinates.
    """
    phi = float(phi)
    if phi < 0.0 or not math.isfinite(phi):
        raise DomainError(f"integrate_triangle needs finite phi >= 0, got {phi!r}")
    if phi == 0.0:
        return 0.0

    def inner(z, _owner):
        z = np.asarray(z, dtype=float)
        return _adaptive_gk(
            lambda y, k: f(y, z[k]), np.zeros_like(z), phi - z, tol, points
        )

    return float(_adaptive_gk(inner, [0.0], [phi], tol, points)[0])


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

class RootBracket(NamedTuple):
    """Final state of a bracketing root search.

    ``root`` is the best estimate; ``lo``/``hi`` enclose the sign change
    (``lo == hi == root`` when ``f(root)`` is within ``abs_tol`` of zero).
    """

    root: float
    lo: float
    hi: float
    f_lo: float
    f_hi: float


def find_root_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceSpec = ROOT_TOL,
) -> RootBracket:
    """Brent's method (bisection with secant / inverse quadratic steps).

    Stops when ``|f(x)| <= tol.abs_tol`` or the bracket is narrower than
    ``tol.rel_tol * |x|``.

    Raises
    ------
    BracketError
        If ``f(lo) * f(hi) > 0``.
    ConvergenceError
        If ``tol.max_iterations`` is exhausted.
    """
    a, b = float(lo), float(hi)
    fa, fb = float(f(a)), float(f(b))
    if math.isnan(fa) or math.isnan(fb):
        raise BracketError(f"f is NaN at a bracket end: f({a})={fa}, f({b})={fb}")
    if fa * fb > 0.0:
        raise BracketError(
            f"no sign change on [{a}, {b}]: f(lo)={fa:.6g}, f(hi)={fb:.6g}"
        )
    if abs(fa) <= tol.abs_tol:
        return RootBracket(a, a, a, fa, fa)
    if abs(fb) <= tol.abs_tol:
        return RootBracket(b, b, b, fb, fb)

    c, fc = a, fa
    d = e = b - a
    for _ in range(tol.max_iterations):
        if fb * fc > 0.0:
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = tol.rel_tol * abs(b) + 2.0 * _EPS * abs(b) + 1e-300
        xm = 0.5 * (c - b)
        if abs(fb) <= tol.abs_tol or abs(c - b) <= tol1:
            lo_, hi_ = (b, c) if b <= c else (c, b)
            flo, fhi = (fb, fc) if b <= c else (fc, fb)
            if abs(fb) <= tol.abs_tol:
                lo_ = hi_ = b
                flo = fhi = fb
            return RootBracket(b, lo_, hi_, flo, fhi)
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(0.5 * tol1, xm)
        fb = float(f(b))
    raise ConvergenceError(f"find_root did not converge in {tol.max_iterations} iterations")


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceSpec = ROOT_TOL,
) -> float:
    """Root of ``f`` inside the sign-change bracket ``[lo, hi]``.

    See :func:`find_root_bracket` for the stopping rule and errors.
    """
    return find_root_bracket(f, lo, hi, tol).root


# ---------------------------------------------------------------------------
# Bounded maximisation
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceSpec = MAXIMIZE_TOL,
) -> tuple[float, float]:
    """Maximise ``f`` on ``[lo, hi]``.

    A uniform grid of ``tol.max_iterations + 1`` points seeds a golden-section
    search on the two cells around the best grid point. The refined point
    replaces the grid point only if it is strictly better, so a flat function
    returns ``lo``.

    Returns
    -------
    (argmax, max)
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise DomainError(f"maximize_1d needs lo < hi, got [{lo}, {hi}]")
    n = int(tol.max_iterations)
    grid = np.linspace(lo, hi, n + 1)
    values = np.array([float(f(x)) for x in grid])
    values = np.where(np.isnan(values), -np.inf, values)
    k = int(np.argmax(values))
    best_x, best_f = float(grid[k]), float(values[k])

    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, n)])
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = float(f(x1)), float(f(x2))
    target = tol.rel_tol * (hi - lo)
    for _ in range(400):
        if b - a <= target:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = float(f(x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = float(f(x2))
    for x, fx in ((x1, f1), (x2, f2)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f
