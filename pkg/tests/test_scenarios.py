import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from madelung_ops import (
    EvalAtSingularity,
    InvariantViolation,
    NegativeDiscriminant,
    PowerSum,
)
from madelung_ops.scenarios import (
    FreeParticleParams,
    WaveguideParams,
    free_particle_c2,
    free_particle_fields,
    free_particle_model,
    free_particle_mu,
    free_particle_mu_dot,
    free_particle_nu,
    free_particle_nu_ddot,
    free_particle_nu_dot,
    free_particle_phase_derivs,
    waveguide_F,
    waveguide_fields,
    waveguide_n1_closed,
    waveguide_q_prime,
)

FIG1 = FreeParticleParams(eta=0.1, kappa=0.5, c1=0.8)
FIG2 = FreeParticleParams(eta=0.1, kappa=0.5, c1=0.2)


@pytest.mark.parametrize("c1", [0.8, 0.2])
def test_c2_for_plotted_sets(c1):
    assert free_particle_c2(0.1, 0.5, c1) == pytest.approx(2.0, abs=1e-12)


def test_c2_sign_choice():
    assert free_particle_c2(0.1, 0.5, 0.8, sign=-1) == pytest.approx(-2.0, abs=1e-12)


def test_c2_negative_discriminant():
    with pytest.raises(NegativeDiscriminant):
        free_particle_c2(0.5, 0.5, 0.2)
    with pytest.raises(InvariantViolation):
        FreeParticleParams(eta=0.5, kappa=0.5, c1=0.2)


@pytest.mark.parametrize("p", [FIG1, FIG2])
def test_nu_starts_at_zero(p):
    assert abs(free_particle_nu(0.0, p)) <= 1e-12


@pytest.mark.parametrize("p", [FIG1, FIG2])
def test_nu_obeys_its_ode(p):
    # kappa nu'^2 + nu'' = (4 eta^2 / kappa) exp(-4 kappa nu)
    t = np.linspace(0, 10, 1000)
    nu, nd, ndd = free_particle_nu(t, p), free_particle_nu_dot(t, p), free_particle_nu_ddot(t, p)
    r = p.kappa * nd**2 + ndd - 4 * p.eta**2 / p.kappa * np.exp(-4 * p.kappa * nu)
    assert np.max(np.abs(r)) <= 1e-9


@pytest.mark.parametrize("p", [FIG1, FIG2])
def test_mu_dot_tracks_width(p):
    t = np.linspace(0, 10, 1000)
    r = free_particle_mu_dot(t, p) + p.eta * np.exp(-2 * p.kappa * free_particle_nu(t, p))
    assert np.max(np.abs(r)) <= 1e-12
    h = 1e-5
    fd = (free_particle_mu(t + h, p) - free_particle_mu(t - h, p)) / (2 * h)
    np.testing.assert_allclose(fd, free_particle_mu_dot(t, p), atol=1e-9)


def test_peak_density_at_c2():
    t = np.linspace(0, 10, 2001)
    A, _, _ = free_particle_fields(0.0, t, FIG1)
    assert t[np.argmax(A)] == pytest.approx(FIG1.c2)


def test_pipeline_matches_printed_free_particle():
    x = np.linspace(-10, 10, 81)
    x = x[np.abs(x) > 0.05]
    t = np.linspace(0, 10, 81)[:, None]
    s = free_particle_model(FIG1).sample(x, t)
    A, S, V_B = free_particle_fields(x, t, FIG1)
    np.testing.assert_allclose(s.A.real, A, atol=1e-10)
    np.testing.assert_allclose(s.S.real, S, atol=1e-10)
    np.testing.assert_allclose(s.V_B.real, V_B, atol=1e-10)
    assert np.max(np.abs(s.V)) <= 1e-10


def test_phase_derivatives_match_differences():
    x = np.linspace(-10, 10, 41)
    t = np.linspace(0.1, 9.9, 41)[:, None]
    h = 1e-5
    S_x, S_t = free_particle_phase_derivs(x, t, FIG2)
    S = lambda xx, tt: free_particle_fields(xx, tt, FIG2)[1]
    np.testing.assert_allclose(S_x, (S(x + h, t) - S(x - h, t)) / (2 * h), atol=1e-7)
    np.testing.assert_allclose(S_t, (S(x, t + h) - S(x, t - h)) / (2 * h), atol=1e-7)


def test_waveguide_q_prime():
    assert waveguide_q_prime(1) == PowerSum.constant(1.0)
    q2 = waveguide_q_prime(2)
    assert q2.exponents == (0.5,)
    assert complex(q2.terms[0].coeff) == pytest.approx(np.sqrt(2))


def test_waveguide_F_complex_branch():
    # n = 2, x = -1, nu = 0.5: (-1)(1 - 0.5/sqrt(-2))^2 on the principal branch
    F = waveguide_F(2, -1.0, 0.5, lambda t: t)
    assert F == pytest.approx(-0.875 - 0.7071067811865476j, abs=1e-14)


def test_waveguide_F_rejects_origin():
    with pytest.raises(EvalAtSingularity):
        waveguide_F(2, 0.0, 1.0, np.sin)
    with pytest.raises(EvalAtSingularity):
        waveguide_fields(np.array([0.0, 1.0]), 1.0, WaveguideParams(n=2))


def test_n1_closed_at_origin():
    rho, S, V, V_B = waveguide_n1_closed(0.0, 0.0)
    assert (float(rho), float(S), float(V), float(V_B)) == pytest.approx((1, 0, -2.5, 1))


@settings(max_examples=40, deadline=None)
@given(c=st.floats(-2, 2))
def test_n1_pipeline_matches_printed(c):
    x = np.linspace(-4, 4, 33)
    t = np.linspace(0.05, 10, 33)[:, None]
    A, S, V, V_B, psi = waveguide_fields(x, t, WaveguideParams(n=1, c=c))
    rho, S0, V0, VB0 = waveguide_n1_closed(x, t, c)
    for got, want in ((np.abs(psi) ** 2, rho), (S, S0), (V, V0), (V_B, VB0)):
        assert np.max(np.abs(got - want)) <= 1e-10


def test_n2_positive_side_is_real_negative_side_is_not():
    t = np.linspace(0.05, 10, 30)[:, None]
    pos = waveguide_fields(np.linspace(0.1, 4, 30), t, WaveguideParams(n=2))
    neg = waveguide_fields(np.linspace(-4, -0.1, 30), t, WaveguideParams(n=2))
    assert all(np.nanmax(np.abs(v.imag)) <= 1e-12 for v in pos[:4])
    assert all(np.nanmax(np.abs(v.imag)) > 1e-3 for v in neg[:4])
