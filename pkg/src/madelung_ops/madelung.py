"""
Amplitude, phase and potentials for a separable phase ``S = Q(x) nu'(t) + mu(t)``.

The continuity equation is solved by evaluating the initial amplitude at the
transformed position

    F(x, t) = sum_k (-nu(t))**k / k! * f_k(x),   f_0 = x,  f_{k+1} = Q' f_k',

and multiplying by ``(Q'(F)/Q'(x))**(1/2)``. :class:`MadelungModel` bundles
this into a full field evaluation (A, S, V, V_B, psi) with an exact second
derivative of A, so the Bohm potential never relies on finite differences.

All functions accept scalars or numpy arrays for ``x`` and ``t``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import (
    AmplitudeZero,
    InvariantViolation,
    PrefactorSingular,
    SeriesNotConverged,
)
from .powersum import PowerSum, differentiate, evaluate, multiply, principal_power

NU_ZERO_TOL = 1e-12

# prefactor convention, recorded verbatim in run reports
PREFACTOR_BRANCH = (
    "monomial Q': (F/x)**(e/2) on the principal branch of F/x; "
    "otherwise principal sqrt of Q'(F)/Q'(x)"
)
POWER_BRANCH = "x**e = exp(e*Log x), Arg in (-pi, pi]; integer e by real powers"


@dataclass(frozen=True)
class TimeFunctions:
    nu: Callable
    nu_dot: Callable
    nu_ddot: Callable
    mu: Callable
    mu_dot: Callable
    description: str = ""

    def __post_init__(self):
        nu0 = complex(self.nu(0.0))
        if abs(nu0) > NU_ZERO_TOL:
            raise InvariantViolation(f"nu(0) must vanish, got {nu0!r}")


@dataclass(frozen=True)
class InitialAmplitude:
    """A0(x) with its first and second derivatives (all complex-callable)."""

    a0: Callable
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    description: str = ""

    def __call__(self, x):
        return self.a0(x)


def gaussian(eta: float = 1.0) -> InitialAmplitude:
    """``A0(x) = exp(-eta x^2)`` with analytic derivatives."""

    def a0(x):
        return np.exp(-eta * np.asarray(x) ** 2)

    def d1(x):
        x = np.asarray(x)
        return -2 * eta * x * np.exp(-eta * x**2)

    def d2(x):
        x = np.asarray(x)
        return (4 * eta**2 * x**2 - 2 * eta) * np.exp(-eta * x**2)

    return InitialAmplitude(a0, d1, d2, description=f"exp(-{eta:g} x^2)")


@dataclass(frozen=True)
class TruncationPolicy:
    k_max: int = 200
    tail_tol: float = 1e-15

    def __post_init__(self):
        if self.k_max < 1:
            raise InvariantViolation("k_max must be >= 1")
        if self.tail_tol < 0:
            raise InvariantViolation("tail_tol must be nonnegative")


@dataclass(frozen=True)
class PhaseAnsatz:
    """``S(x, t) = (integral of q_prime + q_constant) * nu'(t) + mu(t)``.

    ``closed_form``, when given, maps ``(x, nu)`` to ``(F, F_x, F_xx)`` and is
    used as a fast path alongside the series.
    """

    q_prime: PowerSum
    time: TimeFunctions
    q_constant: complex = 0
    closed_form: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.q_prime.is_zero:
            raise InvariantViolation("Q' must not be identically zero")

    @cached_property
    def q(self) -> PowerSum:
        return self.q_prime.antiderivative(self.q_constant)

    @cached_property
    def q_second(self) -> PowerSum:
        return differentiate(self.q_prime)

    @cached_property
    def q_third(self) -> PowerSum:
        return differentiate(self.q_second)

    @cached_property
    def _fk_cache(self) -> dict:
        return {"chains": [_chain(PowerSum.x())], "done": False, "lock": threading.Lock()}

    def fk_chains(self, k_max: int) -> tuple[list[tuple[PowerSum, ...]], bool]:
        """``[(f_k, f_k', f_k''), ...]`` up to ``k_max`` and whether the list ended
        because the next f_k is exactly zero."""
        cache = self._fk_cache
        with cache["lock"]:
            chains = cache["chains"]
            while len(chains) <= k_max and not cache["done"]:
                nxt = multiply(self.q_prime, chains[-1][1])
                if nxt.is_zero:
                    cache["done"] = True
                else:
                    chains.append(_chain(nxt))
            out = chains[: k_max + 1]
            return out, cache["done"] and len(out) == len(chains)

    def fk(self, k_max: int) -> list[PowerSum]:
        return [c[0] for c in self.fk_chains(k_max)[0]]


def _chain(f: PowerSum) -> tuple[PowerSum, PowerSum, PowerSum]:
    d1 = differentiate(f)
    return f, d1, differentiate(d1)


def fk_sequence(q_prime: PowerSum, k_max: int) -> list[PowerSum]:
    """``[f_0, ..., f_k_max]``, truncated before the first exactly-zero f_k."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    seq = [PowerSum.x()]
    while len(seq) <= k_max:
        nxt = multiply(q_prime, differentiate(seq[-1]))
        if nxt.is_zero:
            break
        seq.append(nxt)
    return seq


def F_series(ansatz: PhaseAnsatz, x, t, policy: TruncationPolicy = TruncationPolicy(),
             derivs: int = 0):
    """Series value of F and, optionally, its first ``derivs`` x-derivatives.

    Returns a tuple ``(F, F_x, ...)`` of length ``derivs + 1``. Summation stops
    at the first k >= 1 whose largest term (over all points and requested
    derivatives) is within ``policy.tail_tol``, or when f_k vanishes exactly.
    """
    if derivs not in (0, 1, 2):
        raise ValueError("derivs must be 0, 1 or 2")
    x = np.asarray(x, dtype=complex)
    nu = np.asarray(ansatz.time.nu(np.asarray(t, dtype=float)), dtype=complex)
    shape = np.broadcast_shapes(x.shape, nu.shape)
    x = np.broadcast_to(x, shape)
    nu = np.broadcast_to(nu, shape)
    chains, exhausted = ansatz.fk_chains(policy.k_max)

    totals = [evaluate(g, x) for g in chains[0][: derivs + 1]]
    coef = np.ones(shape, dtype=complex)
    last = 0.0
    for k in range(1, len(chains)):
        coef = coef * (-nu) / k
        last = 0.0
        for i, g in enumerate(chains[k][: derivs + 1]):
            term = coef * evaluate(g, x)
            totals[i] = totals[i] + term
            last = max(last, float(np.max(np.abs(term), initial=0.0)))
        if last <= policy.tail_tol:
            break
    else:
        if not exhausted and len(chains) > 1:
            raise SeriesNotConverged(last, policy.k_max)
    return tuple(_squeeze(v) for v in totals)


def evaluate_F_series(ansatz: PhaseAnsatz, x, t,
                      policy: TruncationPolicy = TruncationPolicy()):
    return F_series(ansatz, x, t, policy)[0]


def _squeeze(v):
    v = np.asarray(v)
    return v if v.ndim else complex(v)


def _prefactor_base(ansatz: PhaseAnsatz, F, x):
    """Return ``(r, p)`` such that the amplitude prefactor equals ``r**p``."""
    qp = ansatz.q_prime
    x = np.asarray(x, dtype=complex)
    if qp.is_monomial:
        e = qp.terms[0].exponent
        if e == 0:
            return None, Fraction(0)
        if e > 0 and np.any(x == 0):
            raise PrefactorSingular("Q'(x) = 0 at x = 0")
        return np.asarray(F) / x, e / 2
    qx = evaluate(qp, x)
    if np.any(qx == 0):
        raise PrefactorSingular("Q'(x) = 0")
    return evaluate(qp, F) / qx, Fraction(1, 2)


def amplitude(ansatz: PhaseAnsatz, a0, F_value, x):
    """``(Q'(F)/Q'(x))**(1/2) * A0(F)``."""
    r, p = _prefactor_base(ansatz, F_value, x)
    pref = 1.0 if p == 0 else principal_power(r, p)
    return _squeeze(pref * np.asarray(a0(np.asarray(F_value, dtype=complex))))


def phase(ansatz: PhaseAnsatz, x, t):
    t = np.asarray(t, dtype=float)
    return _squeeze(evaluate(ansatz.q, x) * ansatz.time.nu_dot(t) + ansatz.time.mu(t))


def bohm_potential(second_deriv_of_A, A_value):
    A_value = np.asarray(A_value)
    if np.any(A_value == 0):
        raise AmplitudeZero("Bohm potential undefined where A = 0")
    return _squeeze(-0.5 * np.asarray(second_deriv_of_A) / A_value)


def external_potential(S_x, S_t, V_B):
    return _squeeze(-0.5 * np.asarray(S_x) ** 2 - np.asarray(V_B) - np.asarray(S_t))


def wavefunction(A, S):
    return _squeeze(np.asarray(A) * np.exp(1j * np.asarray(S)))


@dataclass(frozen=True)
class FieldSample:
    A: np.ndarray
    S: np.ndarray
    V: np.ndarray
    V_B: np.ndarray
    psi: np.ndarray

    @property
    def density(self):
        return np.abs(self.psi) ** 2

    def get(self, name: str):
        if name == "density":
            return self.density
        return getattr(self, name)


class MadelungModel:
    """Generic field pipeline for a phase ansatz and an initial amplitude.

    ``use_closed_form`` switches F (and its x-derivatives) from the series to
    the ansatz's registered closed form.
    """

    def __init__(self, ansatz: PhaseAnsatz, a0: InitialAmplitude,
                 policy: TruncationPolicy = TruncationPolicy(),
                 use_closed_form: bool = False):
        if a0.d1 is None or a0.d2 is None:
            raise InvariantViolation("initial amplitude needs analytic d1 and d2")
        if use_closed_form and ansatz.closed_form is None:
            raise InvariantViolation("ansatz has no registered closed form for F")
        self.ansatz = ansatz
        self.a0 = a0
        self.policy = policy
        self.use_closed_form = use_closed_form

    def F(self, x, t):
        """``(F, F_x, F_xx)``."""
        if self.use_closed_form:
            nu = self.ansatz.time.nu(np.asarray(t, dtype=float))
            return self.ansatz.closed_form(np.asarray(x, dtype=complex), nu)
        return F_series(self.ansatz, x, t, self.policy, derivs=2)

    def _prefactor(self, F, F1, F2, x):
        r, p = _prefactor_base(self.ansatz, F, x)
        if p == 0:
            return 1.0, 0.0, 0.0
        x = np.asarray(x, dtype=complex)
        if self.ansatz.q_prime.is_monomial:
            r1 = (F1 * x - F) / x**2
            r2 = F2 / x - 2 * F1 / x**2 + 2 * F / x**3
        else:
            qp, q2, q3 = self.ansatz.q_prime, self.ansatz.q_second, self.ansatz.q_third
            N, N1 = evaluate(qp, F), evaluate(q2, F) * F1
            N2 = evaluate(q3, F) * F1**2 + evaluate(q2, F) * F2
            D, D1, D2 = evaluate(qp, x), evaluate(q2, x), evaluate(q3, x)
            r1 = (N1 * D - N * D1) / D**2
            r2 = N2 / D - 2 * N1 * D1 / D**2 + N * (2 * D1**2 / D**3 - D2 / D)
        p = float(p)
        g = principal_power(r, p)
        lr1 = r1 / r
        g1 = g * p * lr1
        g2 = g * (p * (p - 1) * lr1**2 + p * r2 / r)
        return g, g1, g2

    def amplitude_derivs(self, x, t):
        """``(F, A, A_x, A_xx)``."""
        F, F1, F2 = self.F(x, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            g, g1, g2 = self._prefactor(F, F1, F2, x)
            a, a1, a2 = self.a0.a0(F), self.a0.d1(F), self.a0.d2(F)
            A = g * a
            A1 = g1 * a + g * a1 * F1
            A2 = g2 * a + 2 * g1 * a1 * F1 + g * (a2 * F1**2 + a1 * F2)
        return F, A, A1, A2

    def sample(self, x, t) -> FieldSample:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        x, t = np.broadcast_arrays(x, t)
        tf = self.ansatz.time
        _, A, _, A2 = self.amplitude_derivs(x, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            V_B = -0.5 * A2 / A
            Q = evaluate(self.ansatz.q, x)
            S = Q * tf.nu_dot(t) + tf.mu(t)
            S_x = evaluate(self.ansatz.q_prime, x) * tf.nu_dot(t)
            S_t = Q * tf.nu_ddot(t) + tf.mu_dot(t)
            V = external_potential(S_x, S_t, V_B)
            psi = A * np.exp(1j * S)
        return FieldSample(*(np.asarray(v, dtype=complex) for v in (A, S, V, V_B, psi)))

    def singular_gap(self, x, t):
        """Magnitude of the prefactor base; the fields blow up where it vanishes."""
        r, p = self.prefactor_base(x, t)
        if r is None or p.denominator == 1 and p >= 0:
            return np.full(np.broadcast_shapes(np.shape(x), np.shape(t)), np.inf)
        return np.abs(r)

    def prefactor_base(self, x, t):
        F = self.F(x, t)[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            return _prefactor_base(self.ansatz, F, x)
