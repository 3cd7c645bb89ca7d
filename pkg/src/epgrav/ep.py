"""Exceptional-point location, branch sweeps and square-root splitting law."""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    EffectiveParams,
    ModeBranches,
    SystemParams,
    closed_form_arrays,
    discriminant,
    effective_params,
    splitting,
)
from .errors import BalanceError, FitError, NoEPError, ValidationError

DEFAULT_BRACKET = (1e8, 1e12)
DEFAULT_WINDOW = (1e-6, 1e-3)


@dataclass
class SweepResult:
    """Supermode branches over a photon-number grid.

    ``valid`` is False where the drive mapping could not be balanced; those
    points hold NaN.
    """

    n_values: np.ndarray
    branches: ModeBranches
    valid: np.ndarray

    @property
    def re_plus(self):
        return self.branches.re_plus

    @property
    def re_minus(self):
        return self.branches.re_minus

    @property
    def im_plus(self):
        return self.branches.im_plus

    @property
    def im_minus(self):
        return self.branches.im_minus


@dataclass
class EPResult:
    n0: float
    omega_eff_ep: float
    gamma_eff_ep: float
    residual: float
    relative_residual: float
    bracket: tuple


@dataclass
class SplittingResponse:
    """Splitting change ``|D(omega_m) - D(omega_m + s*dw)|`` at fixed ``n0``.

    ``direction`` is the sign ``s`` applied to every shift in ``dw``.
    """

    dw: np.ndarray
    dD: np.ndarray
    direction: int
    n0: float


@dataclass
class SqrtFit:
    Y: float
    window: tuple
    exponent: float
    rms_residual: float
    intercept: float
    n_points: int

    @property
    def exponent_ok(self):
        return 0.45 <= self.exponent <= 0.55


def track_branches(plus, minus):
    """Relabel two branch arrays so each moves continuously along the sweep.

    Each branch is predicted by linear extrapolation from its last two finite
    points; the pairing (keep or swap) closer to the prediction wins. The
    prediction lets crossing branches pass through each other.
    """
    plus = np.array(plus, dtype=complex)
    minus = np.array(minus, dtype=complex)
    seen = []
    for k in range(len(plus)):
        if not (np.isfinite(plus[k]) and np.isfinite(minus[k])):
            continue
        if seen:
            i = seen[-1]
            pp, pm = plus[i], minus[i]
            if len(seen) > 1:
                j = seen[-2]
                frac = (k - i) / (i - j)
                pp = pp + frac * (plus[i] - plus[j])
                pm = pm + frac * (minus[i] - minus[j])
            keep = abs(plus[k] - pp) + abs(minus[k] - pm)
            swap = abs(minus[k] - pp) + abs(plus[k] - pm)
            if swap < keep:
                plus[k], minus[k] = minus[k], plus[k]
        seen.append(k)
    return plus, minus


def _effective_map(p):
    if isinstance(p, SystemParams):
        return lambda n: effective_params(p.with_(n_cav=float(n)))
    if callable(p):
        return p
    raise ValidationError("expected SystemParams or a callable n -> EffectiveParams")


def sweep_branches(p, n_grid):
    """Closed-form supermodes at every ``n_cav`` in ``n_grid``, continuity tracked."""
    n_grid = np.asarray(n_grid, dtype=float)
    if n_grid.ndim != 1 or n_grid.size == 0:
        raise ValidationError("n_grid must be a non-empty 1-D array")
    if np.any(n_grid < 0) or np.any(np.diff(n_grid) <= 0):
        raise ValidationError("n_grid must be nonnegative and strictly increasing")
    eff_at = _effective_map(p)
    w = np.full(n_grid.shape, np.nan)
    g = np.full(n_grid.shape, np.nan)
    J = np.full(n_grid.shape, np.nan)
    valid = np.ones(n_grid.shape, dtype=bool)
    for i, n in enumerate(n_grid):
        try:
            e = eff_at(n)
        except BalanceError:
            valid[i] = False
            continue
        w[i], g[i], J[i] = e.omega_eff, e.gamma_eff, e.J
    plus, minus = closed_form_arrays(w, g, J)
    plus, minus = track_branches(plus, minus)
    return SweepResult(n_grid, ModeBranches(plus, minus), valid)


def bifurcation_index(sweep, rtol=1e-9):
    """First grid index where the imaginary parts have split, or None."""
    scale = np.nanmax(np.abs(sweep.branches.omega_plus))
    split = np.abs(sweep.im_plus - sweep.im_minus) > rtol * scale
    idx = np.flatnonzero(split & sweep.valid)
    return int(idx[0]) if idx.size else None


def coalescence_index(sweep, rtol=1e-9):
    """First grid index where the real parts have merged, or None."""
    scale = np.nanmax(np.abs(sweep.branches.omega_plus))
    merged = np.abs(sweep.re_plus - sweep.re_minus) <= rtol * scale
    idx = np.flatnonzero(merged & sweep.valid)
    return int(idx[0]) if idx.size else None


def _disc_at(eff_at, n):
    e = eff_at(n)
    return discriminant(e.omega_eff, e.gamma_eff, e.J)


def find_ep(p, n_bracket=DEFAULT_BRACKET, rtol=1e-13):
    """Photon number where the inner discriminant of the supermode formula vanishes.

    Parameters
    ----------
    p : SystemParams or callable
        Either the physical configuration (``n_cav`` is ignored) or any map
        ``n -> EffectiveParams``.
    n_bracket : (float, float)
        Search interval; the discriminant must change sign across it.
    rtol : float
        Relative bracket width at convergence.

    Raises
    ------
    NoEPError
        If the discriminant has the same sign at both ends.
    """
    eff_at = _effective_map(p)
    lo, hi = map(float, n_bracket)
    if not (0 <= lo < hi):
        raise ValidationError("bracket must satisfy 0 <= lo < hi", "n_bracket")
    d_lo, d_hi = _disc_at(eff_at, lo), _disc_at(eff_at, hi)
    if d_lo == 0.0:
        n0 = lo
    elif d_hi == 0.0:
        n0 = hi
    elif np.sign(d_lo) == np.sign(d_hi):
        raise NoEPError(f"no EP in range [{lo:.4g}, {hi:.4g}]: discriminant does not change sign")
    else:
        n0 = brentq(lambda n: _disc_at(eff_at, n), lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    e = eff_at(n0)
    res = discriminant(e.omega_eff, e.gamma_eff, e.J)
    ref = (e.omega_eff * e.J) ** 2 or 1.0
    return EPResult(n0, e.omega_eff, e.gamma_eff, res, res / ref, (lo, hi))


def ep_gamma_exact(omega_eff, J):
    """Critical gain ``gamma`` at fixed ``omega_eff`` and ``J`` (smaller root)."""
    x = 2 * omega_eff ** 2 * (1 - math.sqrt(1 - (J / omega_eff) ** 2))
    return math.sqrt(x)


def perturbation_direction(p, n0, rel_step=1e-6):
    """Sign of the ``omega_m`` shift that moves the EP to larger ``n_cav``.

    That shift takes the system at ``n0`` back into the unbroken phase, so the
    degeneracy is lifted and the splitting reopens.
    """
    pe = p.with_(n_cav=float(n0))
    h = rel_step * p.omega_m
    d = [discriminant(*_triple(effective_params(pe, p.omega_m + s * h))) for s in (1, -1)]
    return 1 if d[0] >= d[1] else -1


def _triple(e):
    return e.omega_eff, e.gamma_eff, e.J


def response_from_map(eff_at, dw_grid):
    """``|D(0) - D(dw)|`` for a generic perturbation map ``dw -> EffectiveParams``."""
    dw = np.asarray(dw_grid, dtype=float)
    base = splitting(eff_at(0.0))
    dD = np.array([abs(base - splitting(eff_at(x))) for x in dw])
    return dw, dD


def splitting_response(p, n0, dw_grid, direction="auto"):
    """Splitting change at ``n0`` when ``omega_m`` is shifted by ``direction * dw``.

    The drive detuning stays fixed; optical spring and damping are recomputed
    for the shifted mechanical frequency. ``direction="auto"`` picks the
    sign that pushes the EP to larger photon number.
    """
    dw_grid = np.asarray(dw_grid, dtype=float)
    if np.any(dw_grid < 0):
        raise ValidationError("perturbations must be >= 0", "dw_grid")
    if direction == "auto":
        direction = perturbation_direction(p, n0)
    elif direction not in (1, -1):
        raise ValidationError("must be 'auto', 1 or -1", "direction")
    pe = p.with_(n_cav=float(n0))
    dw, dD = response_from_map(
        lambda x: effective_params(pe, p.omega_m + direction * x), dw_grid)
    return SplittingResponse(dw, dD, direction, float(n0))


def splitting_curves(p, n_grid, dw, direction="auto", n0=None):
    """Splitting versus ``n_cav`` before and after one perturbation ``dw``.

    Returns ``(D_before, D_after, shifted_params)``.
    """
    n_grid = np.asarray(n_grid, dtype=float)
    if direction == "auto":
        if n0 is None:
            n0 = find_ep(p).n0
        direction = perturbation_direction(p, n0)
    shifted = p.with_(omega_m=p.omega_m + direction * dw)

    def curve(q):
        return np.array([splitting(effective_params(q.with_(n_cav=float(n)))) for n in n_grid])

    return curve(p), curve(shifted), shifted


def log_grid(omega_m, window=DEFAULT_WINDOW, points=31):
    """Perturbations log-spaced over ``window`` given in units of ``omega_m``."""
    lo, hi = window
    return omega_m * np.logspace(math.log10(lo), math.log10(hi), points)


def fit_sqrt_law(dw, dD=None, window=None):
    """Fit ``dD ~ sqrt(Y dw)``.

    ``Y`` comes from least squares of ``dD**2`` against ``dw`` through the
    origin. The free log-log slope is reported as a diagnostic; it drifts away
    from 0.5 once the window leaves the small-perturbation regime.

    ``dw`` may also be a :class:`SplittingResponse`.
    """
    if isinstance(dw, SplittingResponse):
        dw, dD = dw.dw, dw.dD
    dw = np.asarray(dw, dtype=float)
    dD = np.asarray(dD, dtype=float)
    if window is not None:
        keep = (dw >= window[0]) & (dw <= window[1])
        dw, dD = dw[keep], dD[keep]
    if dw.size < 8:
        raise FitError(f"need at least 8 points, got {dw.size}")
    if np.any(dw <= 0):
        raise FitError("perturbations must be positive")
    if np.log10(dw.max() / dw.min()) < 2 - 1e-9:
        raise FitError("points must span at least two decades")
    if np.any(dD <= 0):
        raise FitError("nonpositive splitting change in window; "
                       "the window extends past the square-root regime")
    Y = float(np.sum(dD ** 2 * dw) / np.sum(dw ** 2))
    slope, intercept = np.polyfit(np.log10(dw), np.log10(dD), 1)
    rel = dD / np.sqrt(Y * dw) - 1.0
    return SqrtFit(Y, (float(dw.min()), float(dw.max())), float(slope),
                   float(np.sqrt(np.mean(rel ** 2))), float(intercept), int(dw.size))


def enhancement_factor(Y, dw):
    """Gain of the square-root response over a linear one, ``sqrt(Y/dw)``."""
    if Y <= 0 or dw <= 0:
        raise ValidationError("Y and dw must be positive")
    return math.sqrt(Y / dw)
