import math

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from epgrav import (
    BalanceError,
    EffectiveParams,
    SystemParams,
    ValidationError,
    build_heff,
    discriminant,
    effective_params,
    eigen_closed_form,
    eigen_numeric,
    optical_damping,
    optical_spring_shift,
    splitting,
)
from epgrav.dynamics import is_pt_broken
from epgrav.ep import ep_gamma_exact, find_ep

mp.mp.dps = 50


def _mp_response(w, kappa, g0, delta, n):
    w, kappa, g0, delta, n = map(mp.mpf, (w, kappa, g0, delta, n))
    half = (kappa / 2) ** 2
    lo = half + (delta - w) ** 2
    hi = half + (delta + w) ** 2
    shift = 2 * g0 ** 2 * n * ((delta - w) / lo + (delta + w) / hi)
    damp = g0 ** 2 * n * kappa * (-1 / lo + 1 / hi)
    return shift, damp


def test_response_matches_high_precision_oracle():
    p = SystemParams.device(n_cav=1e10)
    shift, damp = _mp_response(1e5, 1e7, 50.0, 1e5, 1e10)
    assert optical_spring_shift(p) == pytest.approx(float(shift), rel=1e-13)
    assert optical_damping(p) == pytest.approx(float(damp), rel=1e-12)
    assert float(shift) == pytest.approx(3.99e5, rel=1e-3)
    # negative: anti-damping at blue detuning
    assert float(damp) == pytest.approx(-1.597e4, rel=1e-3)


def test_zero_photons_and_zero_detuning():
    assert optical_spring_shift(SystemParams.device()) == 0.0
    assert optical_damping(SystemParams.device()) == 0.0
    p = SystemParams.device(delta=0.0, n_cav=3e10)
    assert optical_spring_shift(p) == 0.0
    assert optical_damping(p) == 0.0


finite_pos = st.floats(1e2, 1e8)


@settings(max_examples=200, deadline=None)
@given(w=finite_pos, kappa=finite_pos, g0=st.floats(0.1, 1e3), delta=st.floats(-1e8, 1e8),
       n=st.floats(1.0, 1e12), k=st.floats(0.01, 100.0))
def test_linear_in_photon_number(w, kappa, g0, delta, n, k):
    p = SystemParams(omega_m=w, kappa=kappa, g0=g0, J=0.0, delta=delta, n_cav=n)
    q = p.with_(n_cav=n * k)
    for f in (optical_spring_shift, optical_damping):
        a, b = f(p), f(q)
        assert b == pytest.approx(k * a, rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(w=finite_pos, kappa=finite_pos, g0=st.floats(0.1, 1e3), delta=st.floats(-1e8, 1e8),
       n=st.floats(0.0, 1e12))
def test_odd_in_detuning(w, kappa, g0, delta, n):
    p = SystemParams(omega_m=w, kappa=kappa, g0=g0, J=0.0, delta=delta, n_cav=n)
    q = p.with_(delta=-delta)
    for f in (optical_spring_shift, optical_damping):
        assert f(q) == pytest.approx(-f(p), rel=1e-12, abs=1e-300)


def test_effective_params_no_drive():
    e = effective_params(SystemParams.device())
    assert (e.omega_eff, e.gamma_eff, e.J) == (1e5, 0.0, 1e5)


def test_effective_params_scale_with_photons():
    e1 = effective_params(SystemParams.device(n_cav=1e9))
    e10 = effective_params(SystemParams.device(n_cav=1e10))
    assert e10.omega_eff - 1e5 == pytest.approx(10 * (e1.omega_eff - 1e5), rel=1e-12)
    assert e10.gamma_eff == pytest.approx(10 * e1.gamma_eff, rel=1e-12)


def test_effective_gain_at_ep_matches_critical_value():
    p = SystemParams.device()
    ep = find_ep(p)
    e = effective_params(p.with_(n_cav=ep.n0))
    assert e.gamma_eff == pytest.approx(ep_gamma_exact(e.omega_eff, e.J), rel=0.05)
    # critical gain solves g^4/4 = w^2 (g^2 - J^2)
    g, w, J = e.gamma_eff, e.omega_eff, e.J
    assert g ** 4 / 4 == pytest.approx(w ** 2 * (g ** 2 - J ** 2), rel=1e-6)


def test_intrinsic_damping_must_balance():
    p = SystemParams.device(n_cav=1e10, gamma1=5.0, gamma2=0.0)
    with pytest.raises(BalanceError) as info:
        effective_params(p)
    assert info.value.residual == pytest.approx(5.0)
    # gamma1 = -gamma2 keeps the sum zero
    ok = effective_params(p.with_(gamma1=3.0, gamma2=-3.0))
    assert ok.gamma_eff == pytest.approx(abs(optical_damping(p)) - 3.0)


@pytest.mark.parametrize("bad", [dict(omega_m=0.0), dict(kappa=-1.0), dict(n_cav=-1.0),
                                 dict(J=-1.0), dict(Q=0.0), dict(m_t=0.0),
                                 dict(unit_mode="hz"), dict(drive_signs=(1, 2))])
def test_invalid_params_rejected(bad):
    with pytest.raises(ValidationError):
        SystemParams.device(**bad)


def test_angular_mode_scales_rates():
    p = SystemParams.from_frequencies("angular", omega_m=1e5, kappa=1e7, g0=50, J=1e5,
                                      delta=1e5)
    assert p.omega_m == pytest.approx(2 * math.pi * 1e5)
    assert p.g0 == pytest.approx(2 * math.pi * 50)


@settings(max_examples=100, deadline=None)
@given(w=st.floats(1e-3, 1e6), g=st.floats(0, 1e6), J=st.floats(0, 1e6))
def test_heff_trace_vanishes(w, g, J):
    assert np.trace(build_heff(EffectiveParams(w, g, J))) == 0


def test_uncoupled_lossless_block_diagonal():
    m = build_heff(EffectiveParams(3.0, 0.0, 0.0))
    assert np.all(m[:2, 2:] == 0) and np.all(m[2:, :2] == 0)
    ev = np.sort_complex(eigen_numeric(m))
    assert np.allclose(ev, [-3, -3, 3, 3], atol=1e-12)


def test_char_poly_matches_closed_form_quartic():
    w, g, J, lam = sp.symbols("w g J lam")
    m = sp.I * sp.Matrix([[0, w, 0, 0], [-w, g, J, 0], [0, 0, 0, w], [J, 0, -w, -g]])
    charpoly = sp.expand((m - lam * sp.eye(4)).det())
    # eigenvalues are +-omega_pm, so the polynomial is a quadratic in lam^2
    # with roots omega_pm^2 = a +- sqrt(disc)
    a = w ** 2 - g ** 2 / 2
    disc = (g ** 2 / 2) ** 2 + w ** 2 * (J ** 2 - g ** 2)
    quartic = sp.expand(lam ** 4 - 2 * a * lam ** 2 + (a ** 2 - disc))
    assert sp.simplify(charpoly - quartic) == 0

    rng = np.random.default_rng(3)
    for _ in range(20):
        vals = dict(zip((w, g, J), rng.uniform(0.1, 10, 3)))
        num = np.poly(np.array(m.subs(vals).evalf(), dtype=complex))
        ref = [complex(sp.N(quartic.subs(vals).coeff(lam, k))) for k in (4, 3, 2, 1, 0)]
        assert np.allclose(num, ref, rtol=1e-10, atol=1e-10)


def test_closed_form_trivial_cases():
    b = eigen_closed_form(EffectiveParams(7.0, 0.0, 0.0))
    assert b.omega_plus == 7.0 and b.omega_minus == 7.0
    w, g = 10.0, 3.0
    assert discriminant(w, g, g) == pytest.approx(g ** 4 / 4, rel=1e-15)
    b = eigen_closed_form(EffectiveParams(w, g, g))
    assert b.omega_plus == pytest.approx(w, rel=1e-15)
    assert b.omega_minus == pytest.approx(math.sqrt(w * w - g * g), rel=1e-15)


def test_splitting_cases():
    assert splitting(EffectiveParams(5.0, 0.0, 0.0)) == 0.0
    w, g = 10.0, 3.0
    assert splitting(EffectiveParams(w, g, g)) == pytest.approx(w - math.sqrt(w * w - g * g))
    # just past the critical gain: real parts merge, imaginary parts split
    J = 1.0
    gc = ep_gamma_exact(w, J)
    below, above = EffectiveParams(w, gc * 0.999, J), EffectiveParams(w, gc * 1.001, J)
    assert not is_pt_broken(below) and is_pt_broken(above)
    assert splitting(below) > 0
    assert splitting(above) == 0.0
    b = eigen_closed_form(above)
    assert b.im_plus != b.im_minus
    assert b.im_plus == pytest.approx(-b.im_minus, rel=1e-9)


def test_branch_order_convention():
    b = eigen_closed_form(EffectiveParams(10.0, 0.5, 1.0))
    assert b.re_plus > b.re_minus
    b = eigen_closed_form(EffectiveParams(10.0, 1.5, 1.0))
    assert b.im_plus > b.im_minus


@settings(max_examples=300, deadline=None)
@given(w=st.floats(1e-3, 1e3), g=st.floats(0, 1e3), J=st.floats(0, 1e3))
def test_closed_form_agrees_with_numeric(w, g, J):
    e = EffectiveParams(w, g, J)
    b = eigen_closed_form(e)
    ref = np.sort_complex(np.array([b.omega_plus, -b.omega_plus, b.omega_minus, -b.omega_minus]))
    ev = eigen_numeric(build_heff(e))
    scale = max(w, g, J)
    # match each closed-form root to its nearest numeric eigenvalue
    for r in ref:
        assert np.min(np.abs(ev - r)) <= 1e-6 * scale
