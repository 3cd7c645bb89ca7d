"""Direct integration of the PT-symmetric quadrature equations.

Used to check the closed-form supermodes independently: the integrator
(Dormand-Prince 5(4), written out here) produces a trajectory whose spectral
peaks and envelope growth rate are compared with the eigenfrequencies.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .dynamics import build_heff, eigen_closed_form
from .errors import ConvergenceError, ValidationError

OVERFLOW_GUARD = 1e15

# Dormand-Prince 5(4) tableau
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = _A[6].copy()
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    """Uniformly sampled ``(q1, p1, q2, p2)``.

    ``diverged`` marks a run cut short by the overflow guard.
    """

    times: np.ndarray
    states: np.ndarray
    e: object
    diverged: bool = False
    n_steps: int = 0


@dataclass
class Spectrum:
    """Peak frequencies (angular, descending) and envelope growth rate."""

    peaks: np.ndarray
    resolution: float
    growth_rate: float
    single_peak: bool
    powers: np.ndarray = field(repr=False, default=None)


def generator(e):
    """Real matrix ``M`` with ``d psi/dt = M psi``."""
    return np.real(-1j * build_heff(e))


def _dopri_step(m, y, h, k1):
    # linear right-hand side: stage i is m @ (y + h * A[i] . K)
    K = np.empty((7, y.size))
    K[0] = k1
    for i in range(1, 7):
        K[i] = m @ (y + h * (_A[i, :i] @ K[:i]))
    y5 = y + h * (_B5 @ K)
    err = h * (_E @ K)
    return y5, err, K[6]


def integrate_eom(e, initial_state, t_span, dt_out, rtol=1e-10, atol=None,
                  max_steps=5_000_000):
    """Integrate the four quadrature equations from ``t = 0`` to ``t_span``.

    Parameters
    ----------
    e : EffectiveParams
    initial_state : array_like (4,)
    t_span : float
        Must be positive.
    dt_out : float
        Output spacing; must give at least 20 samples per period of the
        fastest supermode.
    rtol, atol : float
        Local error tolerances; ``atol`` defaults to ``rtol * |initial_state|``.

    Returns
    -------
    Trajectory
        Sampled on ``0, dt_out, 2 dt_out, ...``. Integration stops, with
        ``diverged=True``, once the state norm passes ``1e15`` times its
        initial value.
    """
    y0 = np.asarray(initial_state, dtype=float)
    if y0.shape != (4,):
        raise ValidationError("initial state must have 4 components", "initial_state")
    if not t_span > 0:
        raise ValidationError("must be > 0", "t_span")
    if not dt_out > 0:
        raise ValidationError("must be > 0", "dt_out")
    b = eigen_closed_form(e)
    w_max = max(abs(b.omega_plus), abs(b.omega_minus))
    if w_max > 0 and dt_out > 2 * math.pi / (20 * w_max) * (1 + 1e-12):
        raise ValidationError(
            f"dt_out={dt_out:.3g} gives fewer than 20 samples per period "
            f"(need <= {2 * math.pi / (20 * w_max):.3g})", "dt_out")

    n_out = int(math.floor(t_span / dt_out + 1e-9)) + 1
    times = np.arange(n_out) * dt_out
    states = np.zeros((n_out, 4))
    states[0] = y0
    norm0 = np.linalg.norm(y0)
    if norm0 == 0.0:
        return Trajectory(times, states, e)
    if atol is None:
        atol = rtol * norm0

    m = generator(e)
    y = y0.copy()
    t = 0.0
    k1 = m @ y
    h = min(dt_out, 0.01 / max(w_max, 1e-300))
    steps = 0
    for i in range(1, n_out):
        target = times[i]
        while t < target:
            if steps >= max_steps:
                raise ConvergenceError(f"exceeded {max_steps} integration steps")
            last = target - t <= h * (1 + 1e-12)
            step = target - t if last else h
            y_new, err, k_new = _dopri_step(m, y, step, k1)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = math.sqrt(np.mean((err / scale) ** 2))
            if err_norm <= 1.0:
                t = target if last else t + step
                y, k1 = y_new, k_new
                steps += 1
            factor = 0.9 * err_norm ** -0.2 if err_norm > 0 else 5.0
            h = step * min(5.0, max(0.2, factor))
        states[i] = y
        if np.linalg.norm(y) > OVERFLOW_GUARD * norm0:
            return Trajectory(times[:i + 1], states[:i + 1], e, True, steps)
    return Trajectory(times, states, e, False, steps)


def expm_solution(e, initial_state, times):
    """Reference solution ``expm(M t) psi0`` (scaling and squaring)."""
    from scipy.linalg import expm

    m = generator(e)
    y0 = np.asarray(initial_state, dtype=float)
    return np.array([expm(m * t) @ y0 for t in np.atleast_1d(times)])


def extract_spectrum(traj, components=(0, 2), max_peaks=2, rel_threshold=1e-2,
                     pad=8):
    """Spectral peaks and exponential growth rate of a trajectory.

    Peaks come from a Hann-windowed, zero-padded periodogram summed over
    ``components``, refined by a parabola through the log-power of the three
    bins around each local maximum. Local maxima below ``rel_threshold`` times
    the strongest one are ignored. ``resolution`` is ``2 pi / T``. If only one
    peak is found, ``single_peak`` is set: either the modes are degenerate or
    closer than the window can separate.

    The growth rate is the slope of ``log |state|`` over the second half of
    the record.
    """
    t = traj.times
    x = traj.states
    if t.size < 16:
        raise ValidationError("trajectory too short for spectral analysis")
    dt = t[1] - t[0]
    T = t[-1] - t[0]

    nfft = 1 << int(math.ceil(math.log2(t.size * pad)))
    win = np.hanning(t.size)
    power = np.zeros(nfft // 2 + 1)
    for c in components:
        sig = x[:, c] - np.mean(x[:, c])
        power += np.abs(np.fft.rfft(sig * win, nfft)) ** 2
    omega = 2 * math.pi * np.fft.rfftfreq(nfft, dt)

    interior = np.arange(1, power.size - 1)
    is_max = (power[interior] > power[interior - 1]) & (power[interior] >= power[interior + 1])
    cand = interior[is_max]
    cand = cand[power[cand] >= rel_threshold * power.max()] if cand.size else cand
    cand = cand[np.argsort(power[cand])[::-1]][:max_peaks]
    peaks = []
    for k in cand:
        a, b, c = np.log(power[k - 1:k + 2] + 1e-300)
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        peaks.append(omega[k] + shift * (omega[1] - omega[0]))
    peaks = np.sort(np.array(peaks))[::-1]

    half = t.size // 2
    norms = np.linalg.norm(x[half:], axis=1)
    ok = norms > 0
    if np.count_nonzero(ok) >= 2:
        rate = float(np.polyfit(t[half:][ok], np.log(norms[ok]), 1)[0])
    else:
        rate = 0.0
    return Spectrum(peaks, 2 * math.pi / T, rate, peaks.size < 2, power)
