import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from conftest import BRIGHT
from lle_pinning.evolution import (
    BlowUpError,
    EvolutionConfig,
    _phi_functions,
    critical_perturbation,
    evolve,
    evolve_and_fit,
    fit_log_rate,
    max_stable_dt,
    random_perturbation,
    step,
)
from lle_pinning.field import Field, TorusGrid, sobolev_norm
from lle_pinning.operators import assemble, full_spectrum


def phi_series(z, terms=40):
    """Power series of the ETDRK4 coefficients (numerators expanded, z^3 cancelled)."""
    e = [1 / math.factorial(k) for k in range(terms + 4)]
    q = sum(0.5 ** (k + 1) * e[k + 1] * z**k for k in range(terms))

    def cubic(p0, p1, p2, c0, c1):
        # (p0 + p1 z + p2 z^2) e^z + c0 + c1 z, divided by z^3
        coef = lambda n: p0 * e[n] + p1 * (e[n - 1] if n >= 1 else 0) + p2 * (e[n - 2] if n >= 2 else 0)
        return sum(coef(n + 3) * z**n for n in range(terms))

    f1 = cubic(4, -3, 1, -4, -1)
    f2 = cubic(-2, 1, 0, 2, 1)
    f3 = cubic(4, -1, 0, -4, -3)
    return q, f1, f2, f3


def test_phi_functions_match_series():
    z = np.array([1e-8, 0.1, -0.3 + 0.2j, 0.45j, -0.49, 0.6, -1.0 - 0.7j, 2j])
    got = _phi_functions(z)
    ref = phi_series(z)
    for a, b in zip(got, ref):
        assert np.max(np.abs(a - b)) < 1e-12
    assert got[1][0] == pytest.approx(1 / 6)


def test_constant_state_follows_ode():
    # a spatially constant field obeys u' = -i((zeta - i mu) u - |u|^2 u + i f0)
    g = TorusGrid(16)
    u0 = 0.3 + 0.8j
    _, rec = evolve(Field(g, values=np.full(g.n, u0)), BRIGHT, 1e-3, 2.0, record_every=500)

    def rhs(t, y):
        u = y[0] + 1j * y[1]
        du = -1j * ((BRIGHT.zeta - 1j * BRIGHT.mu) * u - abs(u) ** 2 * u + 1j * BRIGHT.f0)
        return [du.real, du.imag]

    sol = solve_ivp(rhs, (0, 2.0), [u0.real, u0.imag], t_eval=[t for t, _ in rec], rtol=1e-12, atol=1e-13)
    for (t, f), a, b in zip(rec, sol.y[0], sol.y[1]):
        assert np.max(np.abs(f.values - (a + 1j * b))) < 1e-9


def test_fourth_order_convergence(bright):
    p = BRIGHT.with_(eps=0.1)
    g = TorusGrid(64)
    u0 = Field.from_function(g, lambda x: 1 + 2 * np.exp(-4 * x**2) + 0.1j * np.sin(x))
    T = 0.4
    ref, _ = evolve(u0, p, T / 640, T, record_every=640)
    errs = []
    for m in (20, 40, 80):
        u, _ = evolve(u0, p, T / m, T, record_every=m)
        errs.append(sobolev_norm(u - ref, 0))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.6), orders


def test_stationary_state_is_preserved(bright):
    u, _ = evolve(bright.solution, BRIGHT, 1e-3, 2.0, record_every=2000)
    assert sobolev_norm(u - bright.solution, 1) < 1e-8


def test_step_matches_evolve(bright):
    a = step(bright.solution, BRIGHT.with_(eps=0.05), 1e-3)
    b, _ = evolve(bright.solution, BRIGHT.with_(eps=0.05), 1e-3, 1e-3)
    assert np.array_equal(a.coeffs, b.coeffs)


def test_config_validation():
    g = TorusGrid(64)
    p = BRIGHT.with_(eps=0.1)
    EvolutionConfig().validate(p, g)
    bad = [
        EvolutionConfig(dt=-1e-3),
        EvolutionConfig(dt=10 * max_stable_dt(p, g)),
        EvolutionConfig(scheme="euler"),
        EvolutionConfig(perturbation="noise"),
        EvolutionConfig(record_every=0),
    ]
    for cfg in bad:
        with pytest.raises(ValueError):
            cfg.validate(p, g)


def test_fit_log_rate_on_synthetic_data():
    t = np.linspace(0, 50, 201)
    dev = 1e-4 * np.exp(-0.3 * t)
    rate, corr, mask = fit_log_rate(t, dev)
    assert rate == pytest.approx(-0.3, rel=1e-10)
    assert corr == pytest.approx(-1.0, abs=1e-12)
    assert dev[mask].min() >= 1e-8
    assert np.isnan(fit_log_rate(t[:2], dev[:2])[0])


def test_random_perturbation_is_seeded():
    g = TorusGrid(64)
    a, b = random_perturbation(g, 7), random_perturbation(g, 7)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, random_perturbation(g, 8).values)


def test_critical_perturbation_is_an_eigenvector(bright):
    p = BRIGHT.with_(eps=0.0)
    v = critical_perturbation(bright.solution, p)
    lam = full_spectrum(assemble(bright.solution, p)).critical
    Lv = assemble(bright.solution, p).apply(v)
    assert sobolev_norm(Lv - v * lam.real, 0) < 1e-6 * sobolev_norm(v, 0)


def test_oversized_perturbation_is_rejected(bright):
    with pytest.raises(ValueError):
        evolve_and_fit(bright.solution, BRIGHT, EvolutionConfig(t_end=0.01, perturbation_scale=1.0))


def test_blow_up_is_reported(bright):
    g = bright.solution.grid
    bad = Field(g, values=np.full(g.n, np.nan + 0j))
    with pytest.raises(BlowUpError):
        evolve(bad, BRIGHT, 1e-3, 1e-2, record_every=1)
    fit = evolve_and_fit(bright.solution, BRIGHT,
                         EvolutionConfig(t_end=0.01, record_every=1, perturbation=bad))
    assert fit.blow_up_t is not None and fit.verdict == "inconclusive"


def test_decay_rate_at_stable_point(bright_analysis, bright_branches):
    # short run at eps = 0.05 on the zero that is stable for positive eps
    from lle_pinning.workflows import simulate

    z = bright_analysis.select("negative")[0]
    cfg = EvolutionConfig(t_end=20.0, record_every=200)
    pt, fit = simulate(bright_analysis, z, cfg, 0.05)
    assert pt.critical_eig.real < 0
    assert fit.verdict == "decays"
    assert fit.rate == pytest.approx(pt.critical_eig.real, rel=0.05)


def test_constant_state_is_a_fixed_point():
    from lle_pinning.stationary import solve_constant_states

    g = TorusGrid(32)
    p = BRIGHT.with_(eps=0.2)
    for uc in solve_constant_states(p).states:
        u0 = Field(g, values=np.full(g.n, uc))
        u, _ = evolve(u0, p, 1e-2, 1.0, record_every=100)
        assert sobolev_norm(u - u0, 0) < 1e-10


def test_soliton_stays_put_to_t10(bright):
    u, _ = evolve(bright.solution, BRIGHT, 1e-3, 10.0, record_every=10000)
    assert sobolev_norm(u - bright.solution, 1) < 1e-6


def test_translation_mode_is_neutral(bright):
    from lle_pinning.field import derivative

    u_star = bright.solution
    fit = evolve_and_fit(u_star, BRIGHT, EvolutionConfig(t_end=5.0, record_every=500,
                                                         perturbation=derivative(u_star, 1)))
    assert 0.5 <= fit.deviations[-1] / fit.deviations[0] <= 2.0
