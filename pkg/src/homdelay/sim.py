"""Fixed-step delay integration by the method of steps.

The step is the classical fourth-order Runge-Kutta scheme with
dt = h / steps_per_delay, so every delayed lookup of a stage that sits
on the grid is an exact node read (indices shift by exactly
steps_per_delay). The only interpolated value is the delayed midpoint
needed by the two middle stages.

Delay systems propagate the initial derivative mismatch as solution
breakpoints at t = 0, h, 2h, ...; with this grid they all land on
nodes, so each step integrates over smooth data — but an interpolation
stencil straddling a breakpoint would still drop to first order and
drag the scheme down to second. Midpoints at negative times are
therefore read from the history function itself (exact for its declared
piecewise-linear semantics), and response-window midpoints use a local
cubic whose 4-node stencil is clamped to stay inside one smoothness
window. That keeps the observed order at four for smooth histories
(>= 3 guaranteed).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainViolationError, NumericalFailureError
from .functional import HistoryFunction
from .homogeneity import NONNEGATIVE_ORTHANT, SystemModel, hom_norm

# cubic Lagrange weights on four equispaced nodes, evaluated at the
# midpoints of the first, middle, and last segments; row k interpolates
# the midpoint of segment [base+k, base+k+1]
_MID_WEIGHTS = np.array([
    [5.0, 15.0, -5.0, 1.0],
    [-1.0, 9.0, 9.0, -1.0],
    [1.0, -5.0, 15.0, 5.0],
]) / 16.0


@dataclass
class Trajectory:
    """Solution samples on the uniform grid plus the resampled history.

    `states[k]` is x(k*dt) for k = 0..M; `history_states[j]` is
    x(-h + j*dt) for j = 0..N with history_states[-1] == states[0].
    """

    model: SystemModel
    history: HistoryFunction
    dt: float
    steps_per_delay: int
    times: np.ndarray
    states: np.ndarray
    history_states: np.ndarray
    hom_norms: np.ndarray
    rolling_sup: np.ndarray
    clamped_steps: int = 0
    v_series: Optional[np.ndarray] = None
    split: Optional[tuple] = None

    def all_states(self) -> np.ndarray:
        """History and solution stacked on one grid, -h..T."""
        return np.vstack([self.history_states[:-1], self.states])

    def all_norms(self) -> np.ndarray:
        return hom_norm(self.all_states(), self.model.structure)


def _delayed_midpoint(X: np.ndarray, j: int, N: int) -> np.ndarray:
    """Cubic value at the midpoint of response segment [j, j+1] (node
    indices; j >= N), with the stencil confined to the smoothness window
    [N + mN, N + (m+1)N] containing the segment."""
    window_start = N + ((j - N) // N) * N
    base = min(max(j - 1, window_start), window_start + N - 3)
    return _MID_WEIGHTS[j - base] @ X[base:base + 4]


def integrate(model: SystemModel, phi: HistoryFunction, T: float,
              steps_per_delay: int = 256) -> Trajectory:
    """Integrate x'(t) = f(x(t), x(t-h)) from history phi up to time T.

    T must be a multiple of dt = h/steps_per_delay (within 1e-9
    relative). On the nonnegative orthant, components dragged below zero
    by roundoff are clamped back (counted); anything below the roundoff
    allowance raises DomainViolationError.
    """
    if steps_per_delay < 8:
        raise ValueError("steps_per_delay must be at least 8")
    if steps_per_delay % 2:
        raise ValueError("steps_per_delay must be even (quadrature alignment)")
    if T <= 0.0:
        raise ValueError("horizon must be positive")
    if abs(phi.h - model.h) > 1e-12 * max(1.0, model.h):
        raise ValueError("history length does not match the model delay")
    s = model.structure
    h = model.h
    N = steps_per_delay
    dt = h / N
    steps_f = T / dt
    steps = int(round(steps_f))
    if steps < 1 or abs(steps_f - steps) > 1e-9 * max(1.0, steps_f):
        raise ValueError("horizon must be a positive multiple of dt = h/steps_per_delay")

    X = np.empty((N + steps + 1, s.n))
    X[: N + 1] = phi.resample(N).values
    orthant = model.domain == NONNEGATIVE_ORTHANT
    if orthant and np.any(X[: N + 1] < 0.0):
        raise DomainViolationError("history leaves the nonnegative orthant")

    f = model.f
    clamped = 0
    for k in range(steps):
        i = N + k
        xk = X[i]
        d0 = X[i - N]
        d1 = X[i - N + 1]
        j = i - N
        if j < N:
            dm = phi(-h + (j + 0.5) * dt)
        else:
            dm = _delayed_midpoint(X, j, N)
        k1 = f(xk, d0)
        k2 = f(xk + (0.5 * dt) * k1, dm)
        k3 = f(xk + (0.5 * dt) * k2, dm)
        k4 = f(xk + dt * k3, d1)
        xn = xk + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(xn)):
            raise NumericalFailureError(f"non-finite state at t={(k + 1) * dt:.6g}")
        if orthant:
            allowance = 1e-12 * (1.0 + float(np.linalg.norm(xn)))
            if np.any(xn < -allowance):
                raise DomainViolationError(
                    f"state left the nonnegative orthant at t={(k + 1) * dt:.6g}"
                )
            neg = xn < 0.0
            if np.any(neg):
                xn = np.where(neg, 0.0, xn)
                clamped += 1
        X[i + 1] = xn

    states = X[N:]
    all_norm = hom_norm(X, s)
    windows = np.lib.stride_tricks.sliding_window_view(all_norm, N + 1)
    rolling = windows.max(axis=1)
    return Trajectory(
        model=model,
        history=phi,
        dt=dt,
        steps_per_delay=N,
        times=np.arange(steps + 1) * dt,
        states=states,
        history_states=X[: N + 1].copy(),
        hom_norms=all_norm[N:],
        rolling_sup=rolling,
        clamped_steps=clamped,
    )


def hom_norm_series(traj: Trajectory):
    """Per-node homogeneous norm and the rolling sup over the trailing
    delay window (both already cached on the trajectory)."""
    return traj.hom_norms, traj.rolling_sup


@dataclass
class EnvelopeReport:
    nodes: int
    max_violation: float  # positive: the trajectory poked above the envelope
    first_violation_time: Optional[float]
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def envelope_values(envelope, times: np.ndarray, phi_norm: float) -> np.ndarray:
    """Evaluate a decay envelope (c_hat1, c_hat2, mu) at the grid times."""
    c_hat1, c_hat2, mu = envelope
    return c_hat1 * phi_norm / (1.0 + c_hat2 * phi_norm ** mu * times) ** (1.0 / mu)


def check_envelope(traj: Trajectory, envelope, phi_norm: float,
                   tolerance: float = 1e-9) -> EnvelopeReport:
    """Compare the trajectory's homogeneous norm against an envelope."""
    env = envelope_values(envelope, traj.times, phi_norm)
    viol = traj.hom_norms - env
    worst = float(viol.max())
    bad = viol > tolerance
    first = float(traj.times[bad][0]) if np.any(bad) else None
    return EnvelopeReport(nodes=traj.times.size, max_violation=worst,
                          first_violation_time=first, tolerance=tolerance)


def self_convergence_errors(model: SystemModel, phi: HistoryFunction, T: float,
                            steps_list) -> list:
    """Max node-wise differences between runs at successive step counts.

    Each entry compares steps_per_delay = N against 2N on the shared
    coarse nodes; the ratio of successive entries estimates the order.
    """
    steps_list = list(steps_list)
    runs = {N: integrate(model, phi, T, N) for N in steps_list}
    errs = []
    for N_lo, N_hi in zip(steps_list[:-1], steps_list[1:]):
        if N_hi % N_lo:
            raise ValueError("step counts must be nested for self-convergence")
        stride = N_hi // N_lo
        diff = runs[N_lo].states - runs[N_hi].states[::stride]
        errs.append(float(np.linalg.norm(diff, axis=1).max()))
    return errs
