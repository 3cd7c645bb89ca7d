"""Force-gradient readout chain: frequency shift, linewidth, detection floors."""

from dataclasses import dataclass
import math

from .errors import ValidationError

SIN_DENSITY = 3100.0  # kg/m^3, stoichiometric silicon nitride


@dataclass(frozen=True)
class DetectionFloor:
    """Smallest resolvable signal of one readout scheme.

    ``f_min`` is ``grad_min * r_char``, an order-of-magnitude force scale
    rather than a derived force limit.
    """

    sigma: float
    dw_min: float
    grad_min: float
    f_min: float
    r_char: float
    scheme: str = "ep"


def _positive(**kw):
    for name, v in kw.items():
        if not (math.isfinite(v) and v > 0):
            raise ValidationError("must be a finite positive number", name)


def _nonnegative(**kw):
    for name, v in kw.items():
        if not (math.isfinite(v) and v >= 0):
            raise ValidationError("must be >= 0", name)


def membrane_mass(side=1e-3, thickness=50e-9, density=SIN_DENSITY):
    """Mass of a square membrane: 1 mm x 50 nm SiN gives 1.55e-10 kg."""
    _positive(side=side, thickness=thickness, density=density)
    return side * side * thickness * density


def freq_shift_from_gradient(m_t, omega_m, dF_dr):
    """Resonance shift ``-dF_dr / (2 m_t omega_m)``.

    A positive gradient (restoring force weakening toward the source)
    softens the resonator.
    """
    _positive(m_t=m_t, omega_m=omega_m)
    return -dF_dr / (2.0 * m_t * omega_m)


def gradient_from_freq_shift(m_t, omega_m, dw):
    _positive(m_t=m_t, omega_m=omega_m)
    return -2.0 * m_t * omega_m * dw


def linewidth(omega_n, Q):
    """FWHM ``omega_n / Q``; ``Q = inf`` gives zero."""
    if not Q > 0:
        raise ValidationError("must be > 0", "Q")
    return omega_n / Q


def detection_floor(sigma, Y, m_t, omega_m, r_char=375e-9):
    """Floor of the EP sensor, from setting ``sqrt(Y dw) = sigma``.

    Returns ``dw_min = sigma**2 / Y``, ``grad_min = 2 m_t omega_m dw_min``
    and ``f_min = grad_min * r_char``.
    """
    _nonnegative(sigma=sigma)
    _positive(Y=Y, m_t=m_t, omega_m=omega_m, r_char=r_char)
    dw_min = sigma * sigma / Y
    grad = 2.0 * m_t * omega_m * dw_min
    return DetectionFloor(sigma, dw_min, grad, grad * r_char, r_char, "ep")


def floor_without_ep(sigma, m_t, omega_m, r_char=375e-9):
    """Linear-sensor floor: the shift itself must exceed one linewidth."""
    _nonnegative(sigma=sigma)
    _positive(m_t=m_t, omega_m=omega_m, r_char=r_char)
    grad = 2.0 * m_t * omega_m * sigma
    return DetectionFloor(sigma, sigma, grad, grad * r_char, r_char, "linear")
