"""
The two worked cases: a free Gaussian packet driven only by the Bohm
potential, and the waveguide-array-like family ``Q' ~ x**((n-1)/n)``.

Each case comes with printed closed forms and a :class:`MadelungModel`
built from the generic pipeline, so the two can be cross-checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EvalAtSingularity, InvariantViolation, NegativeDiscriminant
from .madelung import (
    FieldSample,
    InitialAmplitude,
    MadelungModel,
    PhaseAnsatz,
    TimeFunctions,
    TruncationPolicy,
    gaussian,
)
from .powersum import PowerSum, principal_power

# default |x| exclusion radius for n >= 2 (plotted windows stop at |x| = 0.1)
WAVEGUIDE_EXCLUSION = 0.1


# ---------------------------------------------------------------- free particle


@dataclass(frozen=True)
class FreeParticleParams:
    eta: float
    kappa: float
    c1: float
    c2_sign: int = 1
    c3: float = 0.0

    def __post_init__(self):
        if not self.eta > 0:
            raise InvariantViolation("eta must be positive (A0 = exp(-eta x^2) square-integrable)")
        if self.kappa == 0:
            raise InvariantViolation("kappa must be nonzero")
        if not self.c1 > 0:
            raise InvariantViolation("c1 must be positive")
        if self.c2_sign not in (1, -1):
            raise InvariantViolation("c2_sign must be +1 or -1")
        if self.kappa**2 * self.c1 - 4 * self.eta**2 < 0:
            raise InvariantViolation(
                "kappa^2 c1 - 4 eta^2 must be >= 0 so that c2 is real "
                f"(got {self.kappa**2 * self.c1 - 4 * self.eta**2:.6g})"
            )

    @property
    def c2(self) -> float:
        return free_particle_c2(self.eta, self.kappa, self.c1, self.c2_sign)


def free_particle_c2(eta, kappa, c1, sign=1) -> float:
    """Time of minimum packet width; chosen so that nu(0) = 0."""
    k2c1 = kappa**2 * c1
    disc = k2c1 - 4 * eta**2
    if disc < 0:
        raise NegativeDiscriminant(f"kappa^2 c1 - 4 eta^2 = {disc:.6g} < 0")
    return sign * math.sqrt(disc) / k2c1


def _width_denominator(t, p: FreeParticleParams):
    return 4 * p.eta**2 + p.kappa**4 * p.c1**2 * (np.asarray(t) - p.c2) ** 2


def free_particle_nu(t, params: FreeParticleParams):
    p = params
    return np.log(_width_denominator(t, p) / (p.kappa**2 * p.c1)) / (2 * p.kappa)


def free_particle_nu_dot(t, params: FreeParticleParams):
    p = params
    return p.kappa**3 * p.c1**2 * (np.asarray(t) - p.c2) / _width_denominator(t, p)


def free_particle_nu_ddot(t, params: FreeParticleParams):
    p = params
    D = _width_denominator(t, p)
    return p.kappa**3 * p.c1**2 * (2 * (4 * p.eta**2) - D) / D**2


def free_particle_mu(t, params: FreeParticleParams):
    p = params
    return -0.5 * np.arctan(p.kappa**2 * p.c1 * (np.asarray(t) - p.c2) / (2 * p.eta)) + p.c3


def free_particle_mu_dot(t, params: FreeParticleParams):
    p = params
    return -p.eta * p.kappa**2 * p.c1 / _width_denominator(t, p)


def free_particle_time(params: FreeParticleParams) -> TimeFunctions:
    return TimeFunctions(
        nu=lambda t: free_particle_nu(t, params),
        nu_dot=lambda t: free_particle_nu_dot(t, params),
        nu_ddot=lambda t: free_particle_nu_ddot(t, params),
        mu=lambda t: free_particle_mu(t, params),
        mu_dot=lambda t: free_particle_mu_dot(t, params),
        description="nu = ln[D/(k^2 c1)]/(2k), mu = -arctan[k^2 c1 (t-c2)/(2 eta)]/2 + c3",
    )


def quadratic_closed_form(kappa):
    """F = x exp(-kappa nu) and its x-derivatives."""

    def closed(x, nu):
        x, nu = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(nu, dtype=complex))
        s = np.exp(-kappa * nu)
        return x * s, s, np.zeros_like(x)

    return closed


def free_particle_ansatz(params: FreeParticleParams) -> PhaseAnsatz:
    return PhaseAnsatz(
        q_prime=PowerSum.monomial(params.kappa, 1),
        time=free_particle_time(params),
        closed_form=quadratic_closed_form(params.kappa),
    )


def free_particle_fields(x, t, params: FreeParticleParams):
    """Printed closed forms ``(A, S, V_B)``."""
    p = params
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    k2c1 = p.kappa**2 * p.c1
    D = _width_denominator(t, p)
    A = (k2c1 / D) ** 0.25 * np.exp(-k2c1 * p.eta * x**2 / D)
    S = (p.kappa**4 * p.c1**2 * (t - p.c2) * x**2 / (2 * D)
         - 0.5 * np.arctan(k2c1 * (t - p.c2) / (2 * p.eta)) + p.c3)
    V_B = p.eta * k2c1 * (D - 2 * p.eta * k2c1 * x**2) / D**2
    return A, S, V_B


def free_particle_phase_derivs(x, t, params: FreeParticleParams):
    """``(S_x, S_t)`` of the printed phase, differentiated by hand."""
    p = params
    x = np.asarray(x, dtype=float)
    tau = np.asarray(t, dtype=float) - p.c2
    a = p.kappa**4 * p.c1**2
    D = _width_denominator(t, p)
    S_x = a * tau * x / D
    S_t = a * x**2 * (4 * p.eta**2 - a * tau**2) / (2 * D**2) - p.eta * p.kappa**2 * p.c1 / D
    return S_x, S_t


class FreeParticleClosed:
    """Field model backed by the printed closed forms, with V = 0."""

    def __init__(self, params: FreeParticleParams):
        self.params = params

    def sample(self, x, t) -> FieldSample:
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        A, S, V_B = free_particle_fields(x, t, self.params)
        psi = A * np.exp(1j * S)
        return FieldSample(*(np.asarray(v, dtype=complex)
                             for v in (A, S, np.zeros_like(A), V_B, psi)))


def free_particle_model(params: FreeParticleParams,
                        policy: TruncationPolicy = TruncationPolicy(),
                        use_closed_form: bool = False) -> MadelungModel:
    return MadelungModel(free_particle_ansatz(params), gaussian(params.eta),
                         policy, use_closed_form)


# ------------------------------------------------------------ waveguide family


NU_CHOICES = {
    "sin": (np.sin, np.cos, lambda t: -np.sin(t)),
    "zero": (lambda t: np.zeros_like(np.asarray(t, dtype=float)),) * 3,
    "t": (lambda t: np.asarray(t, dtype=float),
          lambda t: np.ones_like(np.asarray(t, dtype=float)),
          lambda t: np.zeros_like(np.asarray(t, dtype=float))),
}
MU_CHOICES = {
    "t": (lambda t: np.asarray(t, dtype=float), lambda t: np.ones_like(np.asarray(t, dtype=float))),
    "zero": (lambda t: np.zeros_like(np.asarray(t, dtype=float)),) * 2,
}


def named_time(nu: str = "sin", mu: str = "t") -> TimeFunctions:
    try:
        n0, n1, n2 = NU_CHOICES[nu]
        m0, m1 = MU_CHOICES[mu]
    except KeyError as exc:
        raise InvariantViolation(f"unknown time function {exc.args[0]!r}") from None
    return TimeFunctions(n0, n1, n2, m0, m1, description=f"nu = {nu}, mu = {mu}")


@dataclass(frozen=True)
class WaveguideParams:
    n: int
    c: float = 0.0
    time: TimeFunctions = field(default_factory=named_time)
    a0: InitialAmplitude = field(default_factory=gaussian)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvariantViolation(f"n must be a positive integer, got {self.n!r}")


def waveguide_q_prime(n: int) -> PowerSum:
    """``Q' = n (n!)**(-1/n) x**((n-1)/n)``."""
    if n < 1:
        raise InvariantViolation("n must be >= 1")
    return PowerSum.monomial(n * math.factorial(n) ** (-1.0 / n), Fraction(n - 1, n))


def _inverse_root(n, x):
    # (n! x)**(-1/n) with the factorial folded into the coefficient
    return math.factorial(n) ** (-1.0 / n) * principal_power(x, Fraction(-1, n))


def waveguide_F(n: int, x, t, nu):
    """``F = x (1 - nu(t) / (n! x)**(1/n))**n``; ``nu`` is a callable."""
    x = np.asarray(x, dtype=complex)
    if np.any(x == 0):
        raise EvalAtSingularity("waveguide F is singular at x = 0")
    u = 1 - np.asarray(nu(np.asarray(t, dtype=float))) * _inverse_root(n, x)
    out = x * u**n
    return out if np.ndim(out) else complex(out)


def waveguide_closed_form(n: int):
    """Closed form ``(F, F_x, F_xx)`` as a function of ``(x, nu)``."""

    def closed(x, nu):
        x, nu = np.broadcast_arrays(np.asarray(x, dtype=complex), np.asarray(nu, dtype=complex))
        w = _inverse_root(n, x)
        u = 1 - nu * w
        F = x * u**n
        F1 = u ** (n - 1)
        if n == 1:
            F2 = np.zeros_like(x)
        else:
            F2 = (n - 1) * u ** (n - 2) * nu * w / (n * x)
        return F, np.broadcast_to(F1, x.shape), F2

    return closed


def waveguide_ansatz(params: WaveguideParams) -> PhaseAnsatz:
    return PhaseAnsatz(
        q_prime=waveguide_q_prime(params.n),
        time=params.time,
        q_constant=params.c,
        closed_form=waveguide_closed_form(params.n),
    )


def waveguide_model(params: WaveguideParams,
                    policy: TruncationPolicy = TruncationPolicy(),
                    use_closed_form: bool = False) -> MadelungModel:
    return MadelungModel(waveguide_ansatz(params), params.a0, policy, use_closed_form)


def waveguide_fields(x, t, params: WaveguideParams):
    """``(A, S, V, V_B, psi)`` from the generic pipeline."""
    x = np.asarray(x, dtype=float)
    if params.n >= 2 and np.any(x == 0):
        raise EvalAtSingularity("waveguide fields are singular at x = 0 for n >= 2")
    s = waveguide_model(params).sample(x, t)
    return s.A, s.S, s.V, s.V_B, s.psi


def waveguide_n1_closed(x, t, c=0.0):
    """Printed n = 1 set for nu = sin t, mu = t, A0 = exp(-x^2):
    ``(density, S, V, V_B)``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    s = np.sin(t)
    density = np.exp(-2 * (x - s) ** 2)
    S = t + (x + c) * np.cos(t)
    V = -1.25 + 2 * x**2 - 1.25 * np.cos(2 * t) + (c - 3 * x) * s
    V_B = np.cos(2 * t) - 2 * x**2 + 4 * x * s
    return density, S, V, V_B


class WaveguideN1Closed:
    """Field model from the printed n = 1 expressions (A = sqrt(density))."""

    def __init__(self, c: float = 0.0):
        self.c = c

    def sample(self, x, t) -> FieldSample:
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        density, S, V, V_B = waveguide_n1_closed(x, t, self.c)
        A = np.sqrt(density)
        return FieldSample(*(np.asarray(v, dtype=complex)
                             for v in (A, S, V, V_B, A * np.exp(1j * S))))
