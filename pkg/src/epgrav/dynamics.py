"""Optomechanical drive parameters -> effective PT-symmetric mechanics.

Two identical cavity-coupled membranes, coupled mechanically at rate ``J``.
Radiation pressure shifts each mechanical frequency (optical spring) and adds
damping or anti-damping depending on the detuning. With resonator 1 receiving
optical gain and resonator 2 the matching loss, the mechanics reduce to the
PT-symmetric quadrature equations

    dq1/dt = w p1                dq2/dt = w p2
    dp1/dt = -w q1 + J q2 + g p1 dp2/dt = -w q2 + J q1 - g p2

with ``w = omega_m + delta_omega`` and ``g = gamma_eff``. The supermode
frequencies are

    omega_pm = sqrt(w^2 - g^2/2 +- sqrt((g^2/2)^2 + w^2 (J^2 - g^2)))

All frequencies share one unit (see ``SystemParams.unit_mode``).
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import BalanceError, ValidationError

UNIT_MODES = ("paper-literal", "angular")

# fields that are rates/frequencies; scaled by 2*pi in angular mode
FREQUENCY_FIELDS = ("omega_m", "kappa", "g0", "J", "delta", "gamma1", "gamma2")

BALANCE_RTOL = 1e-6
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """Full physical configuration of the two-resonator sensor.

    ``drive_signs`` maps the optical damping ``Gamma`` onto the two
    resonators: resonator ``j`` receives ``drive_signs[j] * Gamma``. The
    default ``(+1, -1)`` makes resonator 1 the gain element whenever
    ``Gamma < 0`` (``delta > 0``) and gives resonator 2 the matching loss.
    """

    omega_m: float
    kappa: float
    g0: float
    J: float
    delta: float
    gamma1: float = 0.0
    gamma2: float = 0.0
    n_cav: float = 0.0
    m_t: float = 1.55e-10
    Q: float = 1.2e7
    unit_mode: str = "paper-literal"
    drive_signs: tuple = (1, -1)

    def __post_init__(self):
        for name in ("omega_m", "kappa", "Q", "m_t"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError("must be a finite positive number", name)
        if not (math.isfinite(self.n_cav) and self.n_cav >= 0):
            raise ValidationError("must be >= 0", "n_cav")
        if not (math.isfinite(self.J) and self.J >= 0):
            raise ValidationError("must be >= 0", "J")
        for name in ("g0", "delta", "gamma1", "gamma2"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError("must be finite", name)
        if self.unit_mode not in UNIT_MODES:
            raise ValidationError(f"must be one of {UNIT_MODES}", "unit_mode")
        signs = tuple(self.drive_signs)
        if len(signs) != 2 or any(s not in (1, -1) for s in signs):
            raise ValidationError("must be two entries from {+1, -1}", "drive_signs")
        object.__setattr__(self, "drive_signs", signs)

    @classmethod
    def device(cls, **changes):
        """Device parameters quoted for the SiN membrane setup, numbers as printed."""
        base = cls(omega_m=1e5, kappa=1e7, g0=50.0, J=1e5, delta=1e5)
        return replace(base, **changes) if changes else base

    @classmethod
    def from_frequencies(cls, unit_mode="paper-literal", **kw):
        """Build from config numbers; ``angular`` treats rates as Hz and multiplies by 2*pi."""
        if unit_mode not in UNIT_MODES:
            raise ValidationError(f"must be one of {UNIT_MODES}", "unit_mode")
        if unit_mode == "angular":
            kw = {k: (2 * math.pi * v if k in FREQUENCY_FIELDS else v) for k, v in kw.items()}
        return cls(unit_mode=unit_mode, **kw)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class OpticalResponse:
    """Optical spring shift and optically induced damping (positive = damping)."""

    delta_omega: float
    Gamma: float


@dataclass(frozen=True)
class EffectiveParams:
    """Reduced PT-symmetric triple. ``gamma_eff`` is the gain rate on resonator 1."""

    omega_eff: float
    gamma_eff: float
    J: float
    n_cav: float = float("nan")

    def scaled(self, s):
        return EffectiveParams(s * self.omega_eff, s * self.gamma_eff, s * self.J, self.n_cav)


@dataclass(frozen=True)
class ModeBranches:
    """Supermode eigenfrequencies; scalars or equal-length arrays."""

    omega_plus: complex
    omega_minus: complex

    @property
    def re_plus(self):
        return np.real(self.omega_plus)

    @property
    def re_minus(self):
        return np.real(self.omega_minus)

    @property
    def im_plus(self):
        return np.imag(self.omega_plus)

    @property
    def im_minus(self):
        return np.imag(self.omega_minus)


def _lorentzians(p, omega_m=None):
    w = p.omega_m if omega_m is None else omega_m
    half = (p.kappa / 2.0) ** 2
    lower = half + (p.delta - w) ** 2
    upper = half + (p.delta + w) ** 2
    return w, lower, upper


def optical_spring_shift(p, omega_m=None):
    """Radiation-pressure frequency shift ``delta_omega``.

    ``omega_m`` overrides the bare mechanical frequency (used for
    perturbation studies).
    """
    w, lower, upper = _lorentzians(p, omega_m)
    return 2.0 * p.g0 ** 2 * p.n_cav * ((p.delta - w) / lower + (p.delta + w) / upper)


def optical_damping(p, omega_m=None):
    """Optically induced damping ``Gamma``; negative values are anti-damping."""
    w, lower, upper = _lorentzians(p, omega_m)
    # (1/upper - 1/lower) without cancellation
    diff = (lower - upper) / (lower * upper)
    return p.g0 ** 2 * p.n_cav * p.kappa * diff


def optical_response(p, omega_m=None):
    return OpticalResponse(optical_spring_shift(p, omega_m), optical_damping(p, omega_m))


def effective_params(p, omega_m=None):
    """Reduce ``p`` to ``(omega_eff, gamma_eff, J)``.

    The net damping of resonator ``j`` is ``drive_signs[j] * Gamma + gamma_j``.
    PT balance requires the gain of resonator 1 to equal the loss of
    resonator 2; a relative mismatch above ``BALANCE_RTOL`` raises
    :class:`BalanceError` carrying the residual.
    """
    w = p.omega_m if omega_m is None else omega_m
    resp = optical_response(p, w)
    s1, s2 = p.drive_signs
    net1 = s1 * resp.Gamma + p.gamma1
    net2 = s2 * resp.Gamma + p.gamma2
    imbalance = net1 + net2
    gamma_eff = abs(net2)
    ref = max(gamma_eff, abs(resp.Gamma), abs(p.gamma1), abs(p.gamma2))
    if ref > 0 and abs(imbalance) > BALANCE_RTOL * ref:
        raise BalanceError(
            f"gain/loss imbalance {imbalance:.6g} (resonator 1 net damping {net1:.6g}, "
            f"resonator 2 net damping {net2:.6g})", residual=imbalance)
    return EffectiveParams(w + resp.delta_omega, gamma_eff, p.J, p.n_cav)


def build_heff(e):
    """4x4 effective Hamiltonian acting on ``(q1, p1, q2, p2)``."""
    w, g, J = e.omega_eff, e.gamma_eff, e.J
    m = np.array([
        [0.0, w, 0.0, 0.0],
        [-w, g, J, 0.0],
        [0.0, 0.0, 0.0, w],
        [J, 0.0, -w, -g],
    ])
    return 1j * m


def discriminant(omega_eff, gamma_eff, J):
    """Inner radicand ``(g^2/2)^2 + w^2 (J^2 - g^2)``; its root is the EP."""
    g2 = gamma_eff * gamma_eff
    return 0.25 * g2 * g2 + omega_eff * omega_eff * (J - gamma_eff) * (J + gamma_eff)


def _squared_roots(w, g, J):
    # roots of x^2 - 2a x + w^2 (w^2 - J^2), a = w^2 - g^2/2; the small root
    # comes from the product so it keeps full relative accuracy
    a = w * w - 0.5 * g * g
    s = np.sqrt(np.asarray(discriminant(w, g, J), dtype=complex))
    prod = (w * w) * (w - J) * (w + J)
    big_is_plus = np.real(a) * np.real(s) + np.imag(a) * np.imag(s) >= 0
    big = np.where(big_is_plus, a + s, a - s)
    direct = np.where(big_is_plus, a - s, a + s)
    with np.errstate(divide="ignore", invalid="ignore"):
        via_prod = np.where(big != 0, prod / np.where(big != 0, big, 1), 0)
    # the product form only when the direct difference has cancelled
    small = np.where(np.abs(direct) < 0.5 * np.abs(big), via_prod, direct)
    plus = np.where(big_is_plus, big, small)
    minus = np.where(big_is_plus, small, big)
    return plus, minus


def _order(plus, minus):
    # descending real part, ties (relative TIE_RTOL) broken by descending imag
    scale = np.maximum(np.abs(plus), np.abs(minus))
    dre = np.real(plus) - np.real(minus)
    tie = np.abs(dre) <= TIE_RTOL * scale
    swap = np.where(tie, np.imag(plus) < np.imag(minus), dre < 0)
    return np.where(swap, minus, plus), np.where(swap, plus, minus)


def closed_form_arrays(omega_eff, gamma_eff, J):
    """Vectorised supermode frequencies, ordered per :class:`ModeBranches`."""
    w = np.asarray(omega_eff, dtype=float)
    g = np.asarray(gamma_eff, dtype=float)
    J = np.asarray(J, dtype=float)
    x_plus, x_minus = _squared_roots(w, g, J)
    return _order(np.sqrt(x_plus + 0j), np.sqrt(x_minus + 0j))


def eigen_closed_form(e):
    """Closed-form supermode eigenfrequencies ``omega_+`` and ``omega_-``.

    Principal complex square roots throughout. The returned pair follows the
    ordering convention: larger real part first, ties by larger imaginary part.
    """
    plus, minus = closed_form_arrays(e.omega_eff, e.gamma_eff, e.J)
    return ModeBranches(complex(plus), complex(minus))


def splitting(e):
    """Supermode splitting ``Re(omega_+) - Re(omega_-)``; zero past the EP."""
    return float(splitting_arrays(e.omega_eff, e.gamma_eff, e.J))


def splitting_arrays(omega_eff, gamma_eff, J):
    plus, minus = closed_form_arrays(omega_eff, gamma_eff, J)
    d = np.real(plus) - np.real(minus)
    tie = np.abs(d) <= TIE_RTOL * np.maximum(np.abs(plus), np.abs(minus))
    return np.where(tie, 0.0, np.maximum(d, 0.0))


def is_pt_broken(e):
    return discriminant(e.omega_eff, e.gamma_eff, e.J) < 0
