"""Self-contained dense eigenvalue solver.

Complex Householder reduction to Hessenberg form followed by the
Wilkinson-shifted QR iteration with Givens rotations. It deliberately shares
no code with the closed-form supermode formula, so the two can be used to
check one another.
"""

import numpy as np

from .errors import ConvergenceError, ValidationError

_EPS = np.finfo(float).eps
_MAX_SWEEPS_PER_EIGENVALUE = 60
# magnitudes below this are zero for a unit-scaled matrix
_NEGLIGIBLE = 1e-280


def _hessenberg(a):
    n = a.shape[0]
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        t = np.max(np.abs(x))
        if t <= _NEGLIGIBLE:
            a[k + 1:, k] = 0.0
            continue
        # unit-scale the column so squares cannot underflow
        x /= t
        alpha = np.linalg.norm(x)
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        a[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ a[k + 1:, :])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v.conj())
        a[k + 2:, k] = 0.0
    return a


def _givens(x, y):
    # prescale so tiny (denormal) entries keep their phase
    t = max(abs(x.real), abs(x.imag), abs(y.real), abs(y.imag))
    if t <= _NEGLIGIBLE:
        return 1.0, 0.0
    x, y = x / t, y / t
    r = np.hypot(abs(x), abs(y))
    if x == 0:
        return 0.0, np.conj(y) / abs(y)
    c = abs(x) / r
    s = (x / abs(x)) * np.conj(y) / r
    return c, s


def _eig2(h):
    a, b, c, d = h[0, 0], h[0, 1], h[1, 0], h[1, 1]
    half = 0.5 * (a - d)
    root = np.sqrt(half * half + b * c + 0j)
    # pick the sign that avoids cancellation
    mid = 0.5 * (a + d)
    big = mid + root if abs(mid + root) >= abs(mid - root) else mid - root
    small = 2.0 * mid - big
    # the determinant only helps when the direct difference has cancelled
    if abs(small) < 0.5 * abs(big):
        small = (a * d - b * c) / big
    return [big, small]


def _wilkinson_shift(h):
    a, b, c, d = h[-2, -2], h[-2, -1], h[-1, -2], h[-1, -1]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4.0 - det + 0j)
    mu1 = tr / 2.0 + disc
    mu2 = tr / 2.0 - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_step(h, mu):
    n = h.shape[0]
    idx = np.arange(n)
    h[idx, idx] -= mu
    rots = []
    for k in range(n - 1):
        c, s = _givens(h[k, k], h[k + 1, k])
        g = np.array([[c, s], [-np.conj(s), c]])
        h[k:k + 2, k:] = g @ h[k:k + 2, k:]
        rots.append(g)
    for k, g in enumerate(rots):
        rows = slice(0, min(k + 2, n - 1) + 1)
        h[rows, k:k + 2] = h[rows, k:k + 2] @ g.conj().T
    h[idx, idx] += mu


def _eig_hessenberg(h, scale):
    n = h.shape[0]
    if n == 1:
        return [h[0, 0]]
    if n == 2:
        return _eig2(h)
    for it in range(_MAX_SWEEPS_PER_EIGENVALUE * n):
        for i in range(n - 1, 0, -1):
            ref = abs(h[i, i]) + abs(h[i - 1, i - 1])
            if ref == 0.0:
                ref = scale
            if abs(h[i, i - 1]) <= _EPS * ref:
                h[i, i - 1] = 0.0
                return (_eig_hessenberg(h[:i, :i].copy(), scale)
                        + _eig_hessenberg(h[i:, i:].copy(), scale))
        if it % 11 == 10:
            # exceptional shift to break cycles
            mu = h[-1, -1] + abs(h[-1, -2]) * (0.75 + 0.5j)
        else:
            mu = _wilkinson_shift(h)
        _qr_step(h, mu)
    raise ConvergenceError(f"QR iteration did not converge for a {n}x{n} block")


def eigen_numeric(m, check=True):
    """Eigenvalues of a small dense complex matrix.

    Parameters
    ----------
    m : array_like (n, n)
        Matrix with finite entries.
    check : bool
        Verify ``|det(m - lam I)| <= 1e-8 ||m||^n`` for every returned
        eigenvalue (after scaling ``m`` to unit norm).

    Returns
    -------
    numpy.ndarray (n,)
        Complex eigenvalues, unordered.
    """
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix entries must be finite")
    scale = np.max(np.abs(m))
    if scale == 0.0:
        return np.zeros(m.shape[0], dtype=complex)
    # exact power-of-two rescale; dividing by a denormal would overflow
    e = np.frexp(scale)[1]
    unit = np.ldexp(m.real, -e) + 1j * np.ldexp(m.imag, -e)
    scale = np.ldexp(1.0, e)
    unit[np.abs(unit) <= _NEGLIGIBLE] = 0.0
    vals = np.array(_eig_hessenberg(_hessenberg(unit.copy()), 1.0), dtype=complex)
    if check:
        eye = np.eye(m.shape[0])
        for lam in vals:
            resid = abs(np.linalg.det(unit - lam * eye))
            if resid > 1e-8:
                raise ConvergenceError(
                    f"eigenvalue {lam * scale} fails the determinant check ({resid:.2e})")
    return vals * scale
