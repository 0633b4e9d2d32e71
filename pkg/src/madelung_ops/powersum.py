"""
Exact term algebra for finite sums of power terms ``c * x**e``.

Exponents are :class:`fractions.Fraction` so that repeated differentiation of
fractional powers never drifts. Coefficients may be ``int``/``Fraction``
(kept exact) or ``complex``/``float`` (floating point); mixing them simply
promotes to complex.

Evaluation uses the principal branch ``x**e = exp(e * Log x)`` with the
argument of ``Log`` in ``(-pi, pi]``. Integer exponents on real input are
computed with real powers so that negative ``x`` stays exactly real.

    >>> p = PowerSum.monomial(1, Fraction(1, 2))
    >>> p(-1.0)
    1j
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import EvalAtSingularity, ExponentMinusOne

Coeff = Union[int, Fraction, float, complex]


def as_exponent(e) -> Fraction:
    if isinstance(e, float):
        raise TypeError("exponents must be exact (int or Fraction), got float")
    return Fraction(e)


def principal_power(z, e):
    """``z**e`` on the principal branch for arrays or scalars, ``e`` real."""
    z = _fold_cut(np.asarray(z, dtype=complex))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(float(e) * np.log(z))
    return out if out.ndim else complex(out)


def _fold_cut(z: np.ndarray) -> np.ndarray:
    # -0.0 imaginary parts would put negative reals on the lower lip (arg -pi)
    return np.where(z.imag == 0, z.real + 0j, z)


@dataclass(frozen=True)
class PowerTerm:
    coeff: Coeff
    exponent: Fraction


@dataclass(frozen=True, init=False)
class PowerSum:
    """Immutable sum of power terms, sorted by strictly increasing exponent.

    Construct from ``PowerTerm`` objects or ``(coeff, exponent)`` pairs; like
    terms are merged and exact zeros dropped. The empty sum is the zero
    function.
    """

    terms: tuple[PowerTerm, ...]

    def __init__(self, terms: Iterable = ()):
        merged: dict[Fraction, Coeff] = {}
        for term in terms:
            if isinstance(term, PowerTerm):
                c, e = term.coeff, term.exponent
            else:
                c, e = term
            e = as_exponent(e)
            merged[e] = merged.get(e, 0) + c
        normalized = tuple(
            PowerTerm(c, e) for e, c in sorted(merged.items()) if c != 0
        )
        object.__setattr__(self, "terms", normalized)

    @classmethod
    def monomial(cls, coeff: Coeff, exponent) -> PowerSum:
        return cls([(coeff, exponent)])

    @classmethod
    def constant(cls, value: Coeff) -> PowerSum:
        return cls([(value, 0)])

    @classmethod
    def x(cls) -> PowerSum:
        return cls([(1, 1)])

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    @property
    def exponents(self) -> tuple[Fraction, ...]:
        return tuple(t.exponent for t in self.terms)

    @property
    def has_negative_exponent(self) -> bool:
        return any(t.exponent < 0 for t in self.terms)

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = PowerSum.constant(other)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return PowerSum(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return PowerSum((-t.coeff, t.exponent) for t in self.terms)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return PowerSum((t.coeff * other, t.exponent) for t in self.terms)
        if not isinstance(other, PowerSum):
            return NotImplemented
        return multiply(self, other)

    __rmul__ = __mul__

    def __call__(self, x):
        return evaluate(self, x)

    def derivative(self) -> PowerSum:
        return differentiate(self)

    def antiderivative(self, constant: Coeff = 0) -> PowerSum:
        return antidifferentiate(self, constant)

    def to_json(self) -> list[list]:
        """Serialize as ``[re, im, num, den]`` quadruples."""
        out = []
        for t in self.terms:
            c = complex(t.coeff)
            out.append([c.real, c.imag, t.exponent.numerator, t.exponent.denominator])
        return out

    @classmethod
    def from_json(cls, quads) -> PowerSum:
        terms = []
        for re, im, num, den in quads:
            c = complex(re, im) if im else re
            terms.append((c, Fraction(int(num), int(den))))
        return cls(terms)

    def __repr__(self):
        if not self.terms:
            return "PowerSum(0)"
        parts = [f"{t.coeff!r}*x^({t.exponent})" for t in self.terms]
        return "PowerSum(" + " + ".join(parts) + ")"


def differentiate(p: PowerSum) -> PowerSum:
    return PowerSum(
        (t.coeff * t.exponent, t.exponent - 1) for t in p.terms if t.exponent != 0
    )


def antidifferentiate(p: PowerSum, constant: Coeff = 0) -> PowerSum:
    terms = []
    for t in p.terms:
        if t.exponent == -1:
            raise ExponentMinusOne(f"cannot integrate {t.coeff!r}*x^-1 within the algebra")
        e = t.exponent + 1
        terms.append((t.coeff / e, e))
    terms.append((constant, 0))
    return PowerSum(terms)


def multiply(p: PowerSum, q: PowerSum) -> PowerSum:
    return PowerSum(
        (a.coeff * b.coeff, a.exponent + b.exponent) for a in p.terms for b in q.terms
    )


def evaluate(p: PowerSum, x):
    """Evaluate ``p`` at scalar or array ``x``; always returns complex."""
    z = _fold_cut(np.asarray(x, dtype=complex))
    if p.has_negative_exponent and np.any(z == 0):
        raise EvalAtSingularity("negative exponent evaluated at x = 0")
    out = np.zeros_like(z)
    real_input = bool(np.all(z.imag == 0))
    log_z = None
    for t in p.terms:
        e = t.exponent
        if e == 0:
            powered = 1.0
        elif e.denominator == 1:
            k = e.numerator
            with np.errstate(over="ignore", divide="ignore"):
                powered = np.power(z.real, float(k)) if real_input else z ** k
        else:
            if log_z is None:
                with np.errstate(divide="ignore"):
                    log_z = np.log(z)
            with np.errstate(invalid="ignore"):
                powered = np.exp(float(e) * log_z)
        c = complex(t.coeff)
        # real coefficients multiply as reals so that inf never meets 0j
        out = out + (c.real * powered if c.imag == 0 else c * powered)
    return out if out.ndim else complex(out)
