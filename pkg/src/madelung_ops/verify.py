"""
Independent checks of the field pipeline.

Residuals of the Schrodinger, continuity and quantum Hamilton-Jacobi
equations are formed from central differences of re-evaluated fields (no
interpolation), and a method-of-characteristics integrator reproduces F and
the amplitude without using the closed amplitude formula.

Field models only need ``sample(x, t) -> FieldSample``; an optional
``singular_gap(x, t)`` lets the residuals skip points whose stencil comes
close to a moving singularity of the fields.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvariantViolation, StencilInExclusionZone, TrajectoryHitSingularity
from .madelung import InitialAmplitude, PhaseAnsatz
from .powersum import _fold_cut

EQUATIONS = ("schrodinger", "continuity", "qhj")


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    nx: int
    t_min: float
    t_max: float
    nt: int
    exclusion: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.x_min < self.x_max or not self.t_min < self.t_max:
            raise InvariantViolation("grid bounds must satisfy min < max")
        if self.nx < 3 or self.nt < 3:
            raise InvariantViolation("grid needs at least 3 points per axis")
        object.__setattr__(self, "exclusion",
                           tuple((float(c), float(r)) for c, r in self.exclusion))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.nt)

    def mesh(self):
        """``(X, T)`` of shape ``(nt, nx)``; rows are time slices."""
        return np.meshgrid(self.x, self.t)

    def excluded(self, x, reach: float = 0.0):
        """Mask of x values within ``radius + reach`` of an exclusion center."""
        x = np.asarray(x, dtype=float)
        mask = np.zeros(x.shape, dtype=bool)
        for center, radius in self.exclusion:
            mask |= np.abs(x - center) < radius + reach
        return mask


@dataclass(frozen=True)
class StencilConfig:
    dx: float = 1e-3
    dt: float = 1e-3
    order: int = 4
    # points whose footprint sees singular_gap < gap_margin are skipped
    gap_margin: float = 0.05

    def __post_init__(self):
        if self.order not in (2, 4):
            raise InvariantViolation("stencil order must be 2 or 4")
        if not (self.dx > 0 and self.dt > 0):
            raise InvariantViolation("stencil steps must be positive")

    @property
    def half_width(self) -> int:
        return self.order // 2

    def check_against(self, grid: GridSpec):
        for _, radius in grid.exclusion:
            if self.dx >= radius / 2:
                raise InvariantViolation(
                    f"dx = {self.dx} must be smaller than half the exclusion radius {radius}")

    def halved(self) -> StencilConfig:
        return StencilConfig(self.dx / 2, self.dt / 2, self.order, self.gap_margin)


@dataclass
class ResidualReport:
    equation_id: str
    linf: float
    l2: float
    worst_point: tuple[float, float]
    stencil: StencilConfig
    n_points: int
    n_skipped: int = 0

    def passes(self, tol: float) -> bool:
        return bool(np.isfinite(self.linf)) and self.linf <= tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["worst_point"] = list(self.worst_point)
        return d


# first and second derivative weights, indexed by offset -m..m
_D1 = {2: np.array([-1, 0, 1]) / 2, 4: np.array([1, -8, 0, 8, -1]) / 12}
_D2 = {2: np.array([1, -2, 1]), 4: np.array([-1, 16, -30, 16, -1]) / 12}

def _points(fields, grid: GridSpec, stencil: StencilConfig, strict: bool):
    """Flattened evaluation points and the number skipped."""
    stencil.check_against(grid)
    X, T = grid.mesh()
    X, T = X.ravel(), T.ravel()
    keep = ~grid.excluded(X)
    X, T = X[keep], T[keep]
    m = stencil.half_width
    touches = grid.excluded(X, reach=m * stencil.dx)
    gap = getattr(fields, "singular_gap", None)
    if gap is not None:
        near = np.zeros(X.shape, dtype=bool)
        for k in range(-m, m + 1):
            near |= gap(X + k * stencil.dx, T) < stencil.gap_margin
            near |= gap(X, T + k * stencil.dt) < stencil.gap_margin
        touches |= near
    if strict and np.any(touches):
        i = int(np.argmax(touches))
        raise StencilInExclusionZone(
            f"stencil at (x={X[i]:.6g}, t={T[i]:.6g}) reaches an excluded region")
    skipped = int(touches.sum())
    return X[~touches], T[~touches], skipped


def _stencil_samples(fields, X, T, stencil: StencilConfig):
    m = stencil.half_width
    along_x = [fields.sample(X + k * stencil.dx, T) for k in range(-m, m + 1)]
    along_t = [fields.sample(X, T + k * stencil.dt) for k in range(-m, m + 1)]
    return along_x, along_t


def _combine(samples, name, weights):
    return sum(w * s.get(name) for w, s in zip(weights, samples) if w != 0)


def _report(equation_id, r, X, T, stencil, skipped) -> ResidualReport:
    mag = np.abs(r)
    if mag.size == 0:
        return ResidualReport(equation_id, 0.0, 0.0, (math.nan, math.nan), stencil, 0, skipped)
    if np.all(np.isfinite(mag)):
        i = int(np.argmax(mag))
        linf = float(mag[i])
    else:
        i = int(np.argmax(~np.isfinite(mag)))
        linf = math.inf
    l2 = float(np.sqrt(np.sum(mag**2)))
    return ResidualReport(equation_id, linf, l2, (float(X[i]), float(T[i])),
                          stencil, int(mag.size), skipped)


def _residual(equation_id, fields, grid, stencil, strict):
    X, T, skipped = _points(fields, grid, stencil, strict)
    if X.size == 0:
        return _report(equation_id, np.array([]), X, T, stencil, skipped)
    sx, st = _stencil_samples(fields, X, T, stencil)
    d1, d2 = _D1[stencil.order], _D2[stencil.order]
    centre = sx[stencil.half_width]
    hx, ht = stencil.dx, stencil.dt
    with np.errstate(all="ignore"):
        if equation_id == "schrodinger":
            psi_t = _combine(st, "psi", d1) / ht
            psi_xx = _combine(sx, "psi", d2) / hx**2
            r = 1j * psi_t + 0.5 * psi_xx - centre.V * centre.psi
        elif equation_id == "continuity":
            A_x = _combine(sx, "A", d1) / hx
            S_x = _combine(sx, "S", d1) / hx
            S_xx = _combine(sx, "S", d2) / hx**2
            A_t = _combine(st, "A", d1) / ht
            r = 0.5 * (2 * A_x * S_x + centre.A * S_xx) + A_t
        elif equation_id == "qhj":
            S_x = _combine(sx, "S", d1) / hx
            S_t = _combine(st, "S", d1) / ht
            r = 0.5 * S_x**2 + centre.V + centre.V_B + S_t
        else:
            raise ValueError(f"unknown equation {equation_id!r}")
    return _report(equation_id, r, X, T, stencil, skipped)


def residual(equation_id: str, fields, grid: GridSpec,
             stencil: StencilConfig = StencilConfig(), strict: bool = False) -> ResidualReport:
    """Dispatch on ``equation_id`` (one of :data:`EQUATIONS`)."""
    return _residual(equation_id, fields, grid, stencil, strict)


def residual_continuity(fields, grid: GridSpec, stencil: StencilConfig = StencilConfig(),
                        strict: bool = False) -> ResidualReport:
    """``(2 A' S' + A S'')/2 + dA/dt`` over the non-excluded grid points."""
    return _residual("continuity", fields, grid, stencil, strict)


def residual_qhj(fields, grid: GridSpec, stencil: StencilConfig = StencilConfig(),
                 strict: bool = False) -> ResidualReport:
    """``S'^2/2 + V + V_B + dS/dt``."""
    return _residual("qhj", fields, grid, stencil, strict)


def residual_schrodinger(fields, grid: GridSpec, stencil: StencilConfig = StencilConfig(),
                         strict: bool = False) -> ResidualReport:
    """``i dpsi/dt + psi''/2 - V psi``; nothing here assumes V or psi real."""
    return _residual("schrodinger", fields, grid, stencil, strict)


def all_residuals(fields, grid, stencil=StencilConfig(), strict=False) -> dict:
    return {eq: _residual(eq, fields, grid, stencil, strict) for eq in EQUATIONS}


# --------------------------------------------------------------- characteristics

# |x| below which a trajectory is declared singular when Q' has non-integer
# or negative exponents
SINGULAR_RADIUS = 0.02


def _q_prime_singular(ansatz: PhaseAnsatz) -> bool:
    return any(e < 0 or e.denominator != 1 for e in ansatz.q_prime.exponents)


def _power_sum_on_sheet(p, z, log_z):
    """Evaluate ``p`` with ``x**e = exp(e * log_z)`` for a caller-chosen log."""
    out = np.zeros_like(z)
    for term in p.terms:
        e = term.exponent
        powered = z**e.numerator if e.denominator == 1 and e >= 0 else np.exp(float(e) * log_z)
        out = out + complex(term.coeff) * powered
    return out


def _continued_log(z, ref):
    # the logarithm of z on the sheet closest to ref (analytic continuation)
    L = np.log(z)
    return L + 2j * math.pi * np.round((ref - L).imag / (2 * math.pi))


def _integrate(ansatz, x, t, steps, direction, with_log_amp, on_singular):
    """RK4 in the normalized time sigma in [0, 1].

    Backward (direction = -1): s = t (1 - sigma), from (x, t) down to s = 0.
    Forward (direction = +1): s = t sigma, from (x, 0) up to s = t.
    The log-amplitude accumulator J obeys dJ/dsigma = t nu'(s) Q''(x) / 2 on
    the backward pass, so that A(x, t) = A0(x0) exp(-J(1)).

    Fractional powers are continued analytically along each trajectory,
    starting from the principal branch at the initial point, so complex paths
    that wind across the negative real axis stay on one sheet.
    """
    x = np.array(x, dtype=complex, ndmin=1)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape).copy()
    scalar = np.ndim(x) == 1 and x.size == 1
    qp, q2 = ansatz.q_prime, ansatz.q_second
    nu_dot = ansatz.time.nu_dot
    check = _q_prime_singular(ansatz)
    bad = np.zeros(x.shape, dtype=bool)

    def s_of(sigma):
        return t * (1 - sigma) if direction < 0 else t * sigma

    def rhs(sigma, y, ref):
        L = _continued_log(y, ref)
        rate = (-t if direction < 0 else t) * nu_dot(s_of(sigma))
        dy = rate * _power_sum_on_sheet(qp, y, L)
        dJ = -0.5 * rate * _power_sum_on_sheet(q2, y, L) if with_log_amp else 0.0
        return dy, dJ

    y = x.copy()
    J = np.zeros_like(y)
    h = 1.0 / steps
    active = t != 0
    with np.errstate(all="ignore"):
        log_y = np.log(_fold_cut(y))
        for i in range(steps):
            if check:
                bad |= active & (np.abs(y) < SINGULAR_RADIUS)
                bad |= ~np.isfinite(y)
            s0 = i * h
            k1, j1 = rhs(s0, y, log_y)
            k2, j2 = rhs(s0 + h / 2, y + h / 2 * k1, log_y)
            k3, j3 = rhs(s0 + h / 2, y + h / 2 * k2, log_y)
            k4, j4 = rhs(s0 + h, y + h * k3, log_y)
            y = np.where(active, y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), y)
            log_y = _continued_log(y, log_y)
            if with_log_amp:
                J = np.where(active, J + h / 6 * (j1 + 2 * j2 + 2 * j3 + j4), J)
    if check:
        bad |= active & (np.abs(y) < SINGULAR_RADIUS)
    bad |= ~np.isfinite(y)
    if np.any(bad):
        if on_singular == "raise":
            raise TrajectoryHitSingularity(bad)
        y = np.where(bad, np.nan, y)
        J = np.where(bad, np.nan, J)
    if scalar:
        return complex(y[0]), complex(J[0])
    return y, J


def characteristics_backtrace(ansatz: PhaseAnsatz, x, t, steps: int = 10_000,
                              on_singular: str = "raise"):
    """Foot point at s = 0 of the characteristic dx/ds = nu'(s) Q'(x) through (x, t).

    With ``on_singular="nan"`` failed trajectories come back as NaN instead of
    raising :class:`TrajectoryHitSingularity`.
    """
    return _integrate(ansatz, x, t, steps, -1, False, on_singular)[0]


def characteristics_forward(ansatz: PhaseAnsatz, x0, t, steps: int = 10_000,
                            on_singular: str = "raise"):
    """Position at time t of the characteristic leaving x0 at s = 0."""
    return _integrate(ansatz, x0, t, steps, +1, False, on_singular)[0]


def characteristics_amplitude(ansatz: PhaseAnsatz, a0: InitialAmplitude, x, t,
                              steps: int = 10_000, on_singular: str = "raise"):
    """Amplitude transported along the characteristic with source -nu' Q'' A / 2."""
    x0, J = _integrate(ansatz, x, t, steps, -1, True, on_singular)
    out = np.asarray(a0(np.asarray(x0, dtype=complex))) * np.exp(-np.asarray(J))
    return out if out.ndim else complex(out)
