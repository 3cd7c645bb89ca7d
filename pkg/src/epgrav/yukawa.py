"""Yukawa forces for a membrane above a striped source plate, and alpha-lambda limits.

Coordinates: the test slab occupies ``-t_test <= z <= 0``, the source slab
``gap <= z <= gap + t_source``. Forces are the z-component on the test body;
positive means attraction toward the source (the ``alpha > 0`` case).

Slab closed form
----------------
A uniform sheet of areal density ``s`` pulls a unit mass at height ``z`` with
the Yukawa part of ``-G m1 m2 (1 + alpha e^{-r/lam}) / r`` as

    f(z) = 2 pi G alpha s exp(-z / lam)

(integrate the potential over the sheet with ``r dr = rho drho``, then
differentiate in ``z``). Integrating ``f`` over the source thickness and the
test thickness gives, per unit area,

    F / A = 2 pi G alpha rho_t rho_s lam^2 exp(-gap/lam)
            (1 - exp(-t_test/lam)) (1 - exp(-t_source/lam))

For ``lam`` much larger than every length this tends to the infinite-sheet
value ``2 pi G alpha rho_t rho_s t_test t_source``. Only ``exp(-gap/lam)``
depends on the gap, so ``dF/dgap = -F / lam``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import constants

from .errors import ResolutionError, ValidationError

G_N = constants.G


@dataclass(frozen=True)
class SlabGeometry:
    t_test: float = 50e-9
    t_source: float = 500e-9
    gap: float = 100e-9
    area: float = 1e-6
    rho_test: float = 3100.0
    rho_a: float = 19300.0
    rho_b: float = 2330.0

    def __post_init__(self):
        for name in ("t_test", "t_source", "gap", "area", "rho_test", "rho_a", "rho_b"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError("must be a finite positive number", name)

    @property
    def face_to_center(self):
        """Membrane surface to source mid-plane (350 nm by default)."""
        return self.gap + self.t_source / 2

    @property
    def center_to_center(self):
        """Membrane mid-plane to source mid-plane (375 nm by default)."""
        return self.gap + self.t_test / 2 + self.t_source / 2

    @property
    def test_mass(self):
        return self.area * self.t_test * self.rho_test


@dataclass
class ExclusionCurve:
    """Smallest ``|alpha|`` the floor resolves at each ``lam``.

    ``valid`` is False where the signal underflowed to zero (alpha is inf there).
    """

    lambdas: np.ndarray
    alphas: np.ndarray
    floor: object
    geometry: SlabGeometry
    valid: np.ndarray


@dataclass
class OracleResult:
    force: float
    error: float
    coarse: float
    fine: float
    n_test_layers: int
    n_source_layers: int
    n_lateral: int


def yukawa_potential(m_t, m_s, r, alpha, lam, G=G_N):
    """Newtonian plus Yukawa pair potential."""
    if np.any(np.asarray(r) <= 0) or lam <= 0:
        raise ValidationError("r and lam must be positive")
    return -G * m_t * m_s / r * (1.0 + alpha * np.exp(-r / lam))


def point_yukawa_force(m1, m2, r, alpha, lam, G=G_N):
    """Magnitude of the Yukawa-only pair force (attractive for alpha > 0)."""
    return G * alpha * m1 * m2 * np.exp(-r / lam) * (1.0 / r ** 2 + 1.0 / (r * lam))


def _kernel_z(rho2, dz, alpha, lam, G):
    # z-force on a unit test mass from a unit source mass displaced by
    # (lateral rho, dz); rho2 = rho**2
    r = np.sqrt(rho2 + dz * dz)
    return G * alpha * np.exp(-r / lam) * (1.0 / (r * r) + 1.0 / (r * lam)) * (dz / r)


def pairwise_force(test_pos, test_mass, src_pos, src_mass, alpha, lam, G=G_N):
    """Brute-force sum of Yukawa pair forces on a set of test masses.

    Returns the total force vector on the test bodies.
    """
    tp = np.atleast_2d(np.asarray(test_pos, dtype=float))
    sp = np.atleast_2d(np.asarray(src_pos, dtype=float))
    tm = np.atleast_1d(np.asarray(test_mass, dtype=float))
    sm = np.atleast_1d(np.asarray(src_mass, dtype=float))
    d = sp[None, :, :] - tp[:, None, :]
    r = np.linalg.norm(d, axis=-1)
    mag = point_yukawa_force(tm[:, None], sm[None, :], r, alpha, lam, G)
    return np.sum((mag / r)[..., None] * d, axis=(0, 1))


def slab_yukawa_force(g, rho_source, alpha, lam, G=G_N):
    """Yukawa force between laterally infinite slabs over the overlap area."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValidationError("must be > 0", "lambda")
    shape = (-np.expm1(-g.t_test / lam)) * (-np.expm1(-g.t_source / lam))
    return (2 * math.pi * G * alpha * g.rho_test * rho_source * g.area
            * lam ** 2 * np.exp(-g.gap / lam) * shape)


def slab_yukawa_gradient(g, rho_source, alpha, lam, G=G_N):
    """Derivative of :func:`slab_yukawa_force` with respect to the gap."""
    return -slab_yukawa_force(g, rho_source, alpha, lam, G) / np.asarray(lam, dtype=float)


def differential_signal(g, alpha, lam, G=G_N):
    """Gradient contrast between the dense and light strip facing the membrane."""
    return slab_yukawa_gradient(g, g.rho_a - g.rho_b, alpha, lam, G)


def newtonian_force_contrast(g, G=G_N):
    """Newtonian force difference between strips (gap-independent for infinite slabs)."""
    return 2 * math.pi * G * g.rho_test * (g.rho_a - g.rho_b) * g.t_test * g.t_source * g.area


def _lateral_edges(h0, q, extent):
    edges = [0.0]
    while edges[-1] < extent:
        edges.append(min(extent, edges[-1] + max(h0, q * edges[-1])))
    return np.array(edges)


def _refine(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * edges.size - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def _voxel_sum(g, rho_source, alpha, lam, n_t, n_s, edges, G, chunk=32):
    centers = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    rho2 = (centers[:, None] ** 2 + centers[None, :] ** 2).ravel()
    cell = (widths[:, None] * widths[None, :]).ravel()
    h_t = g.t_test / n_t
    h_s = g.t_source / n_s
    z_t = -g.t_test + (np.arange(n_t) + 0.5) * h_t
    z_s = g.gap + (np.arange(n_s) + 0.5) * h_s
    dz = (z_s[None, :] - z_t[:, None]).ravel()
    # four symmetric lateral quadrants
    weight = 4.0 * g.rho_test * rho_source * h_t * h_s
    total = 0.0
    for k in range(0, dz.size, chunk):
        kz = _kernel_z(rho2[None, :], dz[k:k + chunk, None], alpha, lam, G)
        total += float(np.sum(kz @ cell))
    return weight * total * g.area


def voxel_oracle(g, rho_source, alpha, lam, resolution=8, lateral_extent=None,
                 tol=1e-2, G=G_N):
    """Slab force by direct summation of voxel pair forces.

    The source slab is cut into layers and a tensor grid of lateral cells out
    to ``lateral_extent`` (default ``100 * lam``) around the test column; the
    test slab is cut into layers. Every test-layer / source-voxel pair
    contributes the point Yukawa force at the voxel midpoints. The sum is
    scaled by the test area, which is exact for a source wider than the test
    patch by many ``lam``.

    Lateral cells grow geometrically (ratio ``1 + 1/resolution``) from
    ``min(gap, lam) / resolution``. The sum is repeated with every voxel
    halved and Richardson-extrapolated; ``error`` is one third of the change.

    Raises
    ------
    ResolutionError
        If ``error / |force|`` exceeds ``tol``.
    """
    if resolution < 8:
        raise ValidationError("need at least 8 voxels across every thickness", "resolution")
    if lam <= 0:
        raise ValidationError("must be > 0", "lambda")
    extent = 100.0 * lam if lateral_extent is None else float(lateral_extent)
    q = 1.0 / resolution
    n_t = max(resolution, math.ceil(resolution * g.t_test / lam))
    n_s = max(resolution, math.ceil(resolution * g.t_source / lam))
    edges = _lateral_edges(q * min(g.gap, lam), q, extent)
    coarse = _voxel_sum(g, rho_source, alpha, lam, n_t, n_s, edges, G)
    fine_edges = _refine(edges)
    fine = _voxel_sum(g, rho_source, alpha, lam, 2 * n_t, 2 * n_s, fine_edges, G)
    force = fine + (fine - coarse) / 3.0
    err = abs(fine - coarse) / 3.0
    if force != 0 and err / abs(force) > tol:
        raise ResolutionError(
            f"estimated relative error {err / abs(force):.2e} exceeds tolerance {tol:.2e}")
    return OracleResult(force, err, coarse, fine, n_t, n_s, fine_edges.size - 1)


def exclusion_curve(floor, g, lambdas, G=G_N):
    """``alpha_min(lam) = grad_min / |signal(alpha=1, lam)|`` on a lambda grid."""
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam <= 0):
        raise ValidationError("must be > 0", "lambda_grid")
    sig = np.abs(differential_signal(g, 1.0, lam, G))
    valid = sig > 0
    if not np.any(valid):
        raise ValidationError("differential signal vanishes for every lambda "
                              "(equal strip densities?)", "geometry")
    with np.errstate(divide="ignore"):
        alphas = np.where(valid, floor.grad_min / np.where(valid, sig, 1.0), np.inf)
    return ExclusionCurve(lam, alphas, floor, g, valid)


def read_overlay(path):
    """Two-column ``(lambda, alpha)`` text file; ``#`` starts a comment."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"expected two columns, got {data.shape[1]}", str(path))
    return data[:, 0], data[:, 1]
