"""Two-gene regulatory network with delayed cross-activation.

Concentrations x1, x2 >= 0 obey

    x1'(t) = -kappa1*x1(t)^2        + lambda1*x2(t-h)
    x2'(t) = -kappa2*x2(t)^(3/2)    + lambda2*x2(t)*x1(t-h)

which is homogeneous of degree 1 for the weights r = (1, 2), and
V(x) = x1^4 + x2^2 is homogeneous of degree 4. All growth/shape
constants admit closed forms on the nonnegative orthant, so this model
doubles as the analytic reference for the sampled estimators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functional import HistoryFunction
from .homogeneity import (
    NONNEGATIVE_ORTHANT,
    BoundConstants,
    HomogeneousStructure,
    Provenance,
    SystemModel,
)
from .numerics import guarded_power


@dataclass(frozen=True)
class GeneticNetworkParams:
    kappa1: float
    kappa2: float
    lambda1: float
    lambda2: float
    h: float

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "lambda1", "lambda2", "h"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


STRUCTURE = HomogeneousStructure(n=2, r=(1.0, 2.0), p=5.0, mu=1.0, gamma=4.0)


def build_example(params: GeneticNetworkParams):
    """(SystemModel, BoundConstants) for the network; the constants are
    closed-form (no sampling), hence exact up to float rounding."""
    k1, k2, l1, l2 = params.kappa1, params.kappa2, params.lambda1, params.lambda2

    def f(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.empty(np.broadcast(x, y).shape, dtype=float)
        out[..., 0] = -k1 * x[..., 0] ** 2 + l1 * y[..., 1]
        out[..., 1] = -k2 * guarded_power(x[..., 1], 1.5) + l2 * x[..., 1] * y[..., 0]
        return out

    def df_dx(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        out = np.zeros(shape[:-1] + (2, 2), dtype=float)
        out[..., 0, 0] = -2.0 * k1 * x[..., 0]
        out[..., 1, 1] = -1.5 * k2 * guarded_power(x[..., 1], 0.5) + l2 * y[..., 0]
        return out

    def V(x):
        x = np.asarray(x, dtype=float)
        return x[..., 0] ** 4 + x[..., 1] ** 2

    def dV(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        out[..., 0] = 4.0 * x[..., 0] ** 3
        out[..., 1] = 2.0 * x[..., 1]
        return out

    def d2V(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 2), dtype=float)
        out[..., 0, 0] = 12.0 * x[..., 0] ** 2
        out[..., 1, 1] = 2.0
        return out

    model = SystemModel(structure=STRUCTURE, h=params.h, f=f, df_dx=df_dx,
                        V=V, dV=dV, d2V=d2V, domain=NONNEGATIVE_ORTHANT)

    tag = Provenance(kind="analytic")
    constants = BoundConstants(
        m=(max(k1, l1), k2 + l2),
        eta=((2.0 * k1, 0.0), (0.0, max(1.5 * k2, l2))),
        beta=(4.0, 2.0),
        psi=((12.0, 0.0), (0.0, 2.0)),
        alpha0=1.0,
        alpha1=2.0 ** 0.2,
        w=2.0 * min(2.0 * k1, k2) - 4.0 * max(2.0 * l1, l2),
        provenance={name: tag for name in
                    ("m", "eta", "beta", "psi", "alpha0", "alpha1", "w")},
    )
    return model, constants


@dataclass(frozen=True)
class Scenario:
    params: GeneticNetworkParams
    history: HistoryFunction
    horizon: float


def figure1_scenario() -> Scenario:
    """Reference run: strong degradation, weak activation, long delay,
    tiny constant initial state."""
    params = GeneticNetworkParams(kappa1=9.0, kappa2=18.0,
                                  lambda1=0.25, lambda2=0.5, h=10.0)
    history = HistoryFunction.constant(np.array([5e-11, 5e-11]), params.h)
    return Scenario(params=params, history=history, horizon=1000.0)
