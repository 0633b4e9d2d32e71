"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) and asserts at the stated tolerance.
"""
import json
import time
from fractions import Fraction
from math import factorial
from pathlib import Path

import numpy as np
import pytest

from madelung_ops import PhaseAnsatz, PowerSum, evaluate, external_potential, fk_sequence
from madelung_ops.config import parse_config
from madelung_ops.madelung import F_series
from madelung_ops.runio import build_model, residual_block
from madelung_ops.scenarios import (
    FreeParticleClosed,
    FreeParticleParams,
    WaveguideParams,
    free_particle_ansatz,
    free_particle_c2,
    free_particle_fields,
    free_particle_model,
    free_particle_nu,
    free_particle_phase_derivs,
    gaussian,
    named_time,
    waveguide_ansatz,
    waveguide_closed_form,
    waveguide_model,
    waveguide_n1_closed,
)
from madelung_ops.verify import (
    EQUATIONS,
    GridSpec,
    StencilConfig,
    all_residuals,
    characteristics_amplitude,
    characteristics_backtrace,
)

pytestmark = pytest.mark.acceptance

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
FIGURE_SETS = {"fig1": (0.1, 0.5, 0.8), "fig2": (0.1, 0.5, 0.2)}


def test_c1_c2_reproduction(criterion):
    c2 = {k: free_particle_c2(*v) for k, v in FIGURE_SETS.items()}
    err = max(abs(v - 2.0) for v in c2.values())
    criterion("1 c2 = 2 for both figure sets", err <= 1e-12, f"max |c2 - 2| = {err:.1e}")


def test_c2_nu_vanishes_initially(criterion):
    err = max(abs(free_particle_nu(0.0, FreeParticleParams(*v))) for v in FIGURE_SETS.values())
    criterion("2 nu(0) = 0 for both figure sets", err <= 1e-12, f"max |nu(0)| = {err:.1e}")


def test_c3_free_particle_potential_is_zero(criterion):
    start = time.perf_counter()
    x = np.linspace(-10, 10, 201)
    t = np.linspace(0, 10, 201)[:, None]
    worst = 0.0
    for v in FIGURE_SETS.values():
        p = FreeParticleParams(*v)
        _, _, V_B = free_particle_fields(x, t, p)
        S_x, S_t = free_particle_phase_derivs(x, t, p)
        worst = max(worst, float(np.max(np.abs(external_potential(S_x, S_t, V_B)))))
    elapsed = time.perf_counter() - start
    criterion("3 free-particle V = 0 from closed forms", worst <= 1e-8 and elapsed < 1.0,
              f"Linf = {worst:.1e}, {elapsed:.3f} s")


def _scaled_error(ansatz, x, t, closed):
    """Max error relative to sum_k |nu^k/k! f_k| and the plain pointwise max."""
    F = F_series(ansatz, x, t)[0]
    nu = ansatz.time.nu(t)
    fs = fk_sequence(ansatz.q_prime, 200)
    scale = sum(np.abs(nu**k / factorial(k) * evaluate(f, x)) for k, f in enumerate(fs))
    diff = np.abs(F - closed)
    with np.errstate(divide="ignore", invalid="ignore"):
        pointwise = np.where(diff == 0, 0.0, diff / np.abs(closed))
    return float(np.max(diff / scale)), float(np.max(pointwise))


def test_c4_series_matches_closed_F(criterion):
    t = np.linspace(0, 10, 401)[:, None]
    x = np.linspace(-5, 5, 400)
    quad = PhaseAnsatz(PowerSum.monomial(Fraction(1, 2), 1), named_time("sin", "t"))
    F = F_series(quad, x, t)[0]
    exact = x * np.exp(-0.5 * np.sin(t))
    quad_err = float(np.max(np.abs(F - exact) / np.abs(exact)))
    ok = quad_err <= 1e-10
    lines = [f"quadratic rel {quad_err:.1e}"]

    # both sides of x = 0, outside the |x| < 0.1 window around the singular point
    xw = np.linspace(-5, 5, 401)
    xw = xw[np.abs(xw) >= 0.1]
    for n in (1, 2, 3):
        ansatz = waveguide_ansatz(WaveguideParams(n=n))
        fs = fk_sequence(ansatz.q_prime, 200)
        terminates = len(fs) == n + 1
        closed = waveguide_closed_form(n)(xw, np.sin(t))[0]
        scaled, pointwise = _scaled_error(ansatz, xw, t, closed)
        ok &= terminates and scaled <= 1e-12
        lines.append(f"n={n}: stops at k={len(fs) - 1}, rel {scaled:.1e} (pointwise {pointwise:.1e})")
    criterion("4 series vs closed-form F", ok, "; ".join(lines))


def test_c5_n1_closed_set(criterion):
    start = time.perf_counter()
    x = np.linspace(-4, 4, 201)
    t = np.linspace(0, 10, 202)[1:-1, None]
    s = waveguide_model(WaveguideParams(n=1, c=0.0)).sample(x, t)
    rho, S, V, V_B = waveguide_n1_closed(x, t, 0.0)
    diffs = {name: float(np.max(np.abs(got - want)))
             for name, got, want in (("density", s.density, rho), ("S", s.S, S),
                                     ("V", s.V, V), ("V_B", s.V_B, V_B))}
    elapsed = time.perf_counter() - start
    worst = max(diffs.values())
    criterion("5 n=1 pipeline vs printed set", worst <= 1e-10 and elapsed < 1.0,
              f"max abs diff {worst:.1e}, {elapsed:.3f} s")


RESIDUAL_CASES = [
    ("free fig1 closed", "fig1_free_particle.json", {}),
    ("free fig2 closed", "fig2_free_particle.json", {}),
    ("free fig1 pipeline", "fig1_free_particle.json", {"method": "series"}),
    ("waveguide n=1", "fig3_waveguide_n1.json", {}),
    ("waveguide n=2 x>0", "fig4_waveguide_n2_pos.json", {}),
    ("waveguide n=2 x<0", "fig4_waveguide_n2_neg.json", {}),
]


def _config(name, edits):
    doc = json.loads((CONFIGS / name).read_text())
    doc.update(edits)
    return parse_config(json.dumps(doc))


def test_c6_pde_residuals(criterion):
    start = time.perf_counter()
    ok, lines = True, []
    for label, name, edits in RESIDUAL_CASES:
        cfg = _config(name, edits)
        assert cfg.stencil.order == 4 and cfg.stencil.dx == cfg.stencil.dt == 1e-3
        block = residual_block(build_model(cfg), cfg)
        ok &= all(r["pass"] for r in block.values())
        lines.append(label + ": " + ", ".join(
            f"{eq} {block[eq]['linf']:.1e}/{block[eq]['threshold']:.0e}" for eq in EQUATIONS))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    criterion("6 PDE residual suite", ok, f"{elapsed:.1f} s; " + "; ".join(lines))


def _oracle(ansatz, model, a0, lo, hi, seed, want=500):
    """Backtraced foot point and transported amplitude at ``want`` random points."""
    rng = np.random.default_rng(seed)
    xs, ts = [], []
    while sum(len(v) for v in xs) < want:
        x = rng.uniform(lo, hi, want)
        t = rng.uniform(0, 10, want)
        foot = characteristics_backtrace(ansatz, x, t, steps=2000, on_singular="nan")
        keep = np.isfinite(foot)
        xs.append(x[keep])
        ts.append(t[keep])
    x = np.concatenate(xs)[:want]
    t = np.concatenate(ts)[:want]
    foot = characteristics_backtrace(ansatz, x, t, steps=2000)
    A = characteristics_amplitude(ansatz, a0, x, t, steps=2000)
    F, A_ref, _, _ = model.amplitude_derivs(x, t)
    return (float(np.max(np.abs(foot - F) / np.abs(F))),
            float(np.max(np.abs(A - A_ref) / np.abs(A_ref))), len(x))


def test_c7_characteristics_oracle(criterion):
    fp = FreeParticleParams(*FIGURE_SETS["fig1"])
    cases = [("free", free_particle_ansatz(fp), free_particle_model(fp), gaussian(fp.eta), -10, 10)]
    for n, lo, hi in ((1, -4, 4), (2, 0.1, 4), (2, -4, -0.1)):
        p = WaveguideParams(n=n)
        cases.append((f"n={n} [{lo},{hi}]", waveguide_ansatz(p), waveguide_model(p), p.a0, lo, hi))
    ok, lines = True, []
    for seed, (label, ansatz, model, a0, lo, hi) in enumerate(cases):
        e_foot, e_amp, count = _oracle(ansatz, model, a0, lo, hi, seed)
        ok &= count == 500 and e_foot <= 1e-8 and e_amp <= 1e-7
        lines.append(f"{label}: foot {e_foot:.1e}, A {e_amp:.1e}")
    criterion("7 characteristics oracle (500 points each)", ok, "; ".join(lines))


def test_c8_complex_regime(criterion):
    t = np.linspace(0, 10, 201)[:, None]
    model = waveguide_model(WaveguideParams(n=2))
    neg = model.sample(np.linspace(-4, -0.1, 201), t)
    im_neg = {k: float(np.nanmax(np.abs(getattr(neg, k).imag))) for k in ("A", "S", "V", "V_B")}
    peak = float(np.nanmax(neg.density))
    pos = model.sample(np.linspace(0.1, 4, 201), t)
    finite = all(np.all(np.isfinite(getattr(pos, k))) for k in ("A", "S", "V", "V_B"))
    im_pos = max(float(np.nanmax(np.abs(getattr(pos, k).imag))) for k in ("A", "S", "V", "V_B"))
    ok = min(im_neg.values()) > 1e-3 and peak > 1 and im_pos <= 1e-12 and finite
    criterion("8 complex regime n=2", ok,
              "x<0 max|Im| " + ", ".join(f"{k} {v:.2g}" for k, v in im_neg.items())
              + f"; max|psi|^2 {peak:.3g}; x>0 max|Im| {im_pos:.1e}")


CONVERGENCE_CASES = [
    ("free", FreeParticleClosed(FreeParticleParams(*FIGURE_SETS["fig1"])), (-5, 5)),
    ("n=1", waveguide_model(WaveguideParams(n=1)), (-4, 4)),
    ("n=2 x>0", waveguide_model(WaveguideParams(n=2)), (1, 4)),
    ("n=2 x<0", waveguide_model(WaveguideParams(n=2)), (-4, -1)),
]


def test_c9_stencil_convergence(criterion):
    coarse = StencilConfig(dx=0.05, dt=0.05, order=4, gap_margin=0.0)
    ok, lines = True, []
    for label, model, (lo, hi) in CONVERGENCE_CASES:
        grid = GridSpec(lo, hi, 41, 0.5, 9.5, 41)
        a = all_residuals(model, grid, coarse)
        b = all_residuals(model, grid, coarse.halved())
        ratios = {eq: a[eq].linf / b[eq].linf for eq in EQUATIONS}
        ok &= all(8 <= r <= 24 for r in ratios.values())
        lines.append(f"{label}: " + ", ".join(f"{eq} {r:.1f}" for eq, r in ratios.items()))
    criterion("9 order-4 convergence ratio in [8, 24]", ok, "; ".join(lines))
