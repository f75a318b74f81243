"""Build a SystemModel from monomial term lists.

Each right-hand-side component and the shape function V are sums of
terms coeff * prod(x_k^a_k) * prod(y_k^b_k) (y is the delayed state;
V depends on x only). Derivatives are taken symbolically term by term,
and every term is checked against the declared weights: mixing degrees
silently is the classic way to void the certificates downstream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError
from .homogeneity import (
    FULL_SPACE,
    NONNEGATIVE_ORTHANT,
    HomogeneousStructure,
    SystemModel,
)
from .numerics import guarded_power

_EXPONENT_TOL = 1e-9


@dataclass(frozen=True)
class Monomial:
    coeff: float
    x_powers: tuple
    y_powers: tuple

    def __post_init__(self):
        object.__setattr__(self, "x_powers", tuple(float(a) for a in self.x_powers))
        object.__setattr__(self, "y_powers", tuple(float(b) for b in self.y_powers))
        if len(self.x_powers) != len(self.y_powers):
            raise ConfigError("x_powers and y_powers must have equal length")
        if any(a < 0.0 for a in self.x_powers + self.y_powers):
            raise ConfigError("negative exponents are not supported")


def _derive_x(term: Monomial, j: int) -> Optional[Monomial]:
    a = term.x_powers[j]
    if a == 0.0:
        return None
    xp = list(term.x_powers)
    xp[j] = a - 1.0
    return Monomial(term.coeff * a, tuple(xp), term.y_powers)


def _pow(base: np.ndarray, e: float, domain: str) -> np.ndarray:
    if domain == FULL_SPACE:
        return base ** int(round(e))
    return guarded_power(base, e)


def _eval_terms(terms: Sequence[Monomial], x: np.ndarray, y: np.ndarray,
                domain: str) -> np.ndarray:
    shape = np.broadcast_shapes(x.shape, y.shape)[:-1]
    out = np.zeros(shape, dtype=float)
    for t in terms:
        val = np.full(shape, t.coeff, dtype=float)
        for k, a in enumerate(t.x_powers):
            if a != 0.0:
                val = val * _pow(x[..., k], a, domain)
        for k, b in enumerate(t.y_powers):
            if b != 0.0:
                val = val * _pow(y[..., k], b, domain)
        out += val
    return out


def _check_integer_exponents(terms: Sequence[Monomial], what: str):
    for t in terms:
        for e in t.x_powers + t.y_powers:
            if abs(e - round(e)) > 1e-12:
                raise ConfigError(
                    f"{what}: exponent {e} is fractional; fractional powers "
                    f"need the nonnegative orthant domain"
                )


def _weighted_degree(powers: Sequence[float], r: Sequence[float]) -> float:
    return float(sum(e * ri for e, ri in zip(powers, r)))


def build_monomial_model(structure: HomogeneousStructure, h: float,
                         f_terms: Sequence[Sequence[Monomial]],
                         V_terms: Sequence[Monomial],
                         domain: str = FULL_SPACE) -> SystemModel:
    n, r = structure.n, structure.r
    if domain not in (FULL_SPACE, NONNEGATIVE_ORTHANT):
        raise ConfigError(f"unknown domain {domain!r}")
    if len(f_terms) != n:
        raise ConfigError(f"need {n} right-hand-side components, got {len(f_terms)}")

    for i, terms in enumerate(f_terms):
        for t in terms:
            if len(t.x_powers) != n:
                raise ConfigError(f"f[{i}]: term has {len(t.x_powers)} variables, expected {n}")
            degree = _weighted_degree(t.x_powers, r) + _weighted_degree(t.y_powers, r)
            want = structure.mu + r[i]
            if abs(degree - want) > _EXPONENT_TOL:
                raise ConfigError(
                    f"f[{i}]: term {t.coeff}*x^{t.x_powers}*y^{t.y_powers} has "
                    f"weighted degree {degree}, expected mu + r[{i}] = {want}"
                )
    for t in V_terms:
        if len(t.x_powers) != n:
            raise ConfigError(f"V: term has {len(t.x_powers)} variables, expected {n}")
        if any(b != 0.0 for b in t.y_powers):
            raise ConfigError("V terms may not involve the delayed state")
        degree = _weighted_degree(t.x_powers, r)
        if abs(degree - structure.gamma) > _EXPONENT_TOL:
            raise ConfigError(
                f"V: term {t.coeff}*x^{t.x_powers} has weighted degree "
                f"{degree}, expected gamma = {structure.gamma}"
            )
    if domain == FULL_SPACE:
        for i, terms in enumerate(f_terms):
            _check_integer_exponents(terms, f"f[{i}]")
        _check_integer_exponents(V_terms, "V")

    jac_terms = [[[d for d in (_derive_x(t, j) for t in f_terms[i]) if d is not None]
                  for j in range(n)] for i in range(n)]
    dV_terms = [[d for d in (_derive_x(t, j) for t in V_terms) if d is not None]
                for j in range(n)]
    d2V_terms = [[[d for d in (_derive_x(t, j) for t in dV_terms[i]) if d is not None]
                  for j in range(n)] for i in range(n)]

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        out = np.empty(shape, dtype=float)
        for i in range(n):
            out[..., i] = _eval_terms(f_terms[i], x, y, domain)
        return out

    def df_dx(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        out = np.empty(shape[:-1] + (n, n), dtype=float)
        for i in range(n):
            for j in range(n):
                out[..., i, j] = _eval_terms(jac_terms[i][j], x, y, domain)
        return out

    def V(x):
        x = np.asarray(x, dtype=float)
        return _eval_terms(V_terms, x, x, domain)

    def dV(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for j in range(n):
            out[..., j] = _eval_terms(dV_terms[j], x, x, domain)
        return out

    def d2V(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape[:-1] + (n, n), dtype=float)
        for i in range(n):
            for j in range(n):
                out[..., i, j] = _eval_terms(d2V_terms[i][j], x, x, domain)
        return out

    return SystemModel(structure=structure, h=h, f=f, df_dx=df_dx,
                       V=V, dV=dV, d2V=d2V, domain=domain)
