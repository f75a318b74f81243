import numpy as np
import pytest

import homdelay as hd


@pytest.fixture(scope="session")
def figure1():
    """(scenario, model, analytic constants) of the reference network."""
    scen = hd.figure1_scenario()
    model, constants = hd.build_example(scen.params)
    return scen, model, constants


@pytest.fixture(scope="session")
def classical_cert(figure1):
    _, model, bc = figure1
    return hd.certify_classical(bc, model.structure, model.h)


@pytest.fixture(scope="session")
def razumikhin_cert(figure1):
    _, model, bc = figure1
    return hd.search_alpha_rho(bc, model.structure, model.h)


@pytest.fixture(scope="session")
def cubic_decay_model():
    """Scalar x' = -x^3 (no delay coupling), homogeneous of degree 2 for
    r = (1,), with V = x^2; closed-form solution x0/sqrt(1+2*x0^2*t)."""
    s = hd.HomogeneousStructure(n=1, r=(1.0,), p=2.0, mu=2.0, gamma=2.0)

    def f(x, y):
        return -np.asarray(x, dtype=float) ** 3

    def df_dx(x, y):
        x = np.asarray(x, dtype=float)
        return (-3.0 * x**2)[..., None]

    def V(x):
        return np.asarray(x, dtype=float)[..., 0] ** 2

    def dV(x):
        return 2.0 * np.asarray(x, dtype=float)

    def d2V(x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1] + (1, 1), 2.0)

    return hd.SystemModel(structure=s, h=1.0, f=f, df_dx=df_dx, V=V, dV=dV,
                          d2V=d2V, domain=hd.FULL_SPACE)
