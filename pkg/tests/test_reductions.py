import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lle_pinning.field import Field, PotentialSpec, TorusGrid
from lle_pinning.reductions import (
    DualPumpParams,
    alpha,
    alpha_bound,
    dual_pump_reduce,
    dual_pump_residual,
    dual_pump_validate,
    line_grid,
    nls_soliton,
    odd_part_norm,
    reduced_solution,
    small_mu_params,
    veff_leading_order,
)
from lle_pinning.stationary import SolveError, residual

small = st.floats(-0.5, 0.5, allow_nan=False)


def test_reduced_potential_example():
    dp = DualPumpParams(d=0.1, zeta=3.7, mu=1.0, f0=2.0, f1=0.1, k1=1, nu1=0.02)
    p, frame = dual_pump_reduce(dp)
    assert p.potential.mean == pytest.approx(0.02)
    assert p.potential.cosine_coeffs == pytest.approx((-0.01,))
    assert p.eps == 1.0 and p.d == pytest.approx(0.1)
    assert frame.speed == 0.02 and frame.phase_amplitude == pytest.approx(0.05)
    assert DualPumpParams(0.1, 3.7, 1, 2, 0.1, k1=3).dispersion == pytest.approx(0.9)


@pytest.mark.parametrize("kw", [dict(f1=2.0), dict(f1=-2.5), dict(k1=0), dict(k1=1.5), dict(f0=0.0, f1=0.0)])
def test_dual_pump_invariants(kw):
    base = dict(d=0.1, zeta=3.7, mu=1.0, f0=2.0, f1=0.1)
    with pytest.raises(ValueError):
        DualPumpParams(**{**base, **kw})


@settings(max_examples=25, deadline=None)
@given(small, st.floats(-3, 3))
def test_frame_phase_has_unit_modulus(f1, xi):
    dp = DualPumpParams(0.1, 3.7, 1.0, 2.0, f1)
    assert abs(abs(dual_pump_reduce(dp)[1].phase(np.array([xi]))[0]) - 1.0) < 1e-15


@settings(max_examples=25, deadline=None)
@given(small, st.floats(-0.2, 0.2), st.floats(-0.3, 0.3), st.integers(1, 3))
def test_alpha_bound_holds(f1, nu1, d, k1):
    if d == 0:
        return
    dp = DualPumpParams(d, 3.7, 1.0, 2.0, f1, k1, nu1)
    xi = np.linspace(-np.pi, np.pi, 401)
    assert np.max(np.abs(alpha(xi, dp))) <= alpha_bound(dp) + 1e-15


@pytest.mark.parametrize("f1,nu1", [(0.1, 0.02), (-0.3, 0.0), (0.0, 0.05)])
def test_mapping_identity(f1, nu1):
    # exact algebra: after undoing the phase, the dual-pump residual equals the
    # reduced residual plus alpha w plus the forcing remainder
    dp = DualPumpParams(0.1, 3.7, 1.0, 2.0, f1, 1, nu1)
    g = TorusGrid(128)
    w = Field.from_function(g, lambda x: 1 + np.exp(np.cos(x)) * (1 + 0.5j) + 0.2 * np.sin(2 * x))
    p, frame = dual_pump_reduce(dp)
    x = g.points
    ph = frame.phase(x)
    lhs = dual_pump_residual(Field(g, values=w.values * ph), dp).values / ph
    remainder = 1j * dp.f0 * (1 / ph - 1) + 1j * dp.f1 * np.exp(1j * x) / ph
    rhs = residual(w, p).values + alpha(x, dp) * w.values + remainder
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_zero_second_pump_is_exact(bright):
    dp = DualPumpParams(0.1, 3.7, 1.0, 2.0, 0.0)
    rep = dual_pump_validate(dp, bright.solution.grid, start=bright.solution)
    assert rep.sigma0 == 0.0 and rep.alpha_sup == 0.0
    assert rep.mapped_residual < 1e-10
    assert np.array_equal(rep.mapped.values, bright.solution.values)


def test_constant_drift_cannot_be_pinned(bright):
    dp = DualPumpParams(0.1, 3.7, 1.0, 2.0, 0.0, nu1=0.05)
    with pytest.raises(SolveError):
        reduced_solution(dp, bright.solution.grid, start=bright.solution)


def test_nls_soliton_profile():
    s = nls_soliton(1.0, 1.0, L=40.0, grid=TorusGrid(1024, 80.0))
    u = s.field
    # -d u'' + zeta u - u^3 = 0 for u = sqrt(2 zeta) sech(sqrt(zeta/d) x)
    from lle_pinning.field import derivative
    res = -derivative(u, 2).values + u.values - np.abs(u.values) ** 2 * u.values
    assert np.max(np.abs(res)) < 1e-9
    assert s.mass == pytest.approx(4.0)
    assert np.sum(u.intensity) * u.grid.dx == pytest.approx(s.mass, rel=1e-10)
    assert odd_part_norm(u) < 1e-14


def test_nls_soliton_input_checks():
    with pytest.raises(ValueError):
        nls_soliton(3.7, -0.1)
    with pytest.raises(ValueError):
        nls_soliton(3.7, 0.1, L=1.0)
    with pytest.raises(ValueError):
        nls_soliton(3.7, 0.1, grid=TorusGrid(64))
    g = line_grid(3.7, 0.1)
    assert g.length == pytest.approx(2 * 40 / np.sqrt(37.0))


def test_leading_order_of_constant_potential_is_exact():
    s = nls_soliton(3.7, 0.1)
    assert veff_leading_order(0.3, s, PotentialSpec.constant(0.25)) == 0.25
    vals = veff_leading_order(np.linspace(-1, 1, 5), s, PotentialSpec.constant(-1.5))
    assert np.all(vals == -1.5)


@pytest.mark.parametrize("m", [1, 3])
def test_leading_order_matches_closed_form(m):
    # for V = cos(q x): a^2 cos(q sigma) (I + q I') / mass with
    # I(q) = int cos(q x) sech^2(k x) dx = pi q / (k^2 sinh(pi q / 2k))
    zeta, d = 3.7, 0.1
    s = nls_soliton(zeta, d)
    q = np.pi * m / s.truncation_length
    V = PotentialSpec(0.0, (1.0,), period=2 * np.pi / q)
    k, a = s.width_param, s.amplitude
    I = lambda q: np.pi * q / (k**2 * np.sinh(np.pi * q / (2 * k)))
    h = 1e-5
    dI = (I(q + h) - I(q - h)) / (2 * h)
    sig = np.linspace(-1.0, 1.0, 7)
    ref = a**2 * np.cos(q * sig) * (I(q) + q * dI) / s.mass
    assert np.max(np.abs(veff_leading_order(sig, s, V) - ref)) < 1e-8


@settings(max_examples=15, deadline=None)
@given(small, small, small, st.floats(-2, 2))
def test_leading_order_is_linear(a, b, c, sigma):
    s = nls_soliton(3.7, 0.1)
    P = 2 * s.truncation_length
    V1, V2 = PotentialSpec(a, (b,), period=P), PotentialSpec(0.0, (), (c,), period=P)
    lhs = veff_leading_order(sigma, s, V1 + V2)
    rhs = veff_leading_order(sigma, s, V1) + veff_leading_order(sigma, s, V2)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_small_mu_params_scale_the_pump():
    p = small_mu_params(3.7, 0.1, 0.05, 2.0, PotentialSpec.constant(0.0))
    assert p.mu == 0.05 and p.f0 == pytest.approx(0.1) and p.eps == 0.0
