"""Attraction radii, comparison dynamics, and decay envelopes.

Two pipelines produce an EstimateCertificate. The classical one pairs
the chi-based lower bound with the comparison rate rho2; the razumikhin
one replaces the lower bound with the segment-ratio version (parameter
alpha > 1), which buys a larger admissible radius at the price of an
extra feasibility condition linking alpha, the chosen rate rho <= rho2
and the radius.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleCertificateError, InternalInconsistencyError
from .functional import (
    CLASSICAL,
    RAZUMIKHIN,
    FunctionalCertificate,
    build_functional_certificate,
)
from .homogeneity import BoundConstants, HomogeneousStructure
from .numerics import bisect_increasing

DEFAULT_ALPHA_GRID = (1.01, 1.02, 1.05, 1.1, 1.2, 1.5, 2.0)
DEFAULT_RHO_FRACTIONS = (1.0, 0.5, 0.25)


@dataclass
class EstimateCertificate:
    """Radius + envelope constants of one pipeline.

    envelope(t): hom_norm(x(t)) <= c_hat1*||phi|| / (1 + c_hat2*||phi||^mu t)^(1/mu)
    for histories with sup hom-norm below Delta.
    """

    variant: str
    gamma: float
    mu: float
    h: float
    delta: float
    Delta: float
    c_lo: float
    b_hi: float
    rho1: float
    rho2: float
    rho: float
    c_hat1: float
    c_hat2: float
    u0_coeff: float  # initial comparison value per unit ||phi||^gamma
    functional: FunctionalCertificate
    alpha: Optional[float] = None

    def admissible(self, phi_norm: float) -> bool:
        return phi_norm < self.Delta

    def envelope(self, t, phi_norm: float):
        t = np.asarray(t, dtype=float)
        return self.c_hat1 * phi_norm / (
            1.0 + self.c_hat2 * phi_norm ** self.mu * t
        ) ** (1.0 / self.mu)

    def envelope_params(self):
        return (self.c_hat1, self.c_hat2, self.mu)

    def initial_comparison_value(self, phi_norm: float) -> float:
        return self.u0_coeff * phi_norm ** self.gamma

    def comparison(self, t, phi_norm: float):
        u0 = self.initial_comparison_value(phi_norm)
        return comparison_solution(u0, self.rho, self.gamma, self.mu, t)

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "functional"}
        for k, v in out.items():
            out[k] = None if v is None else (v if isinstance(v, str) else float(v))
        out["functional"] = self.functional.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EstimateCertificate":
        d = dict(d)
        d["functional"] = FunctionalCertificate.from_dict(d["functional"])
        return cls(**d)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "EstimateCertificate":
        return cls.from_dict(json.loads(text))


def _radius_root(front: float, fc: FunctionalCertificate, bc: BoundConstants,
                 s: HomogeneousStructure) -> float:
    """Positive root Delta of alpha1*D^gamma + b3*D^(gamma+mu) = front*delta^gamma
    by bisection on [0, delta]; residual is checked against 1e-12 of the
    right-hand side."""
    if front <= 0.0:
        raise InfeasibleCertificateError("radius equation has nonpositive right side")
    rhs = front * fc.delta ** s.gamma

    def g(D):
        return bc.alpha1 * D ** s.gamma + fc.b3 * D ** (s.gamma + s.mu) - rhs

    root = bisect_increasing(g, 0.0, fc.delta)
    if abs(g(root)) > 1e-12 * rhs:
        raise InternalInconsistencyError(
            f"radius root residual {g(root):.3e} exceeds 1e-12 of rhs {rhs:.3e}"
        )
    return root


def attraction_radius_classical(fc: FunctionalCertificate, bc: BoundConstants,
                                s: HomogeneousStructure) -> float:
    if fc.a1 <= 0.0:
        raise InfeasibleCertificateError("classical radius needs a1 > 0")
    return _radius_root(fc.a1, fc, bc, s)


def attraction_radius_razumikhin(fc: FunctionalCertificate, bc: BoundConstants,
                                 s: HomogeneousStructure) -> float:
    if fc.a1_tilde is None or fc.a1_tilde <= 0.0:
        raise InfeasibleCertificateError("razumikhin radius needs a1_tilde > 0")
    return _radius_root(fc.a1_tilde, fc, bc, s)


def connection_constants(fc: FunctionalCertificate, s: HomogeneousStructure, h: float):
    """(c, b, rho1, rho2): derivative margin, value bound, the power-sum
    constant and the comparison rate they induce."""
    c = min(fc.c0, fc.c2)
    b = max(fc.b1, fc.b2)
    rho1 = (2.0 * max(1.0, h)) ** (s.mu / s.gamma)
    rho2 = c / (rho1 * b ** ((s.gamma + s.mu) / s.gamma))
    return c, b, rho1, rho2


def comparison_solution(u0: float, rate: float, gamma: float, mu: float, t):
    """Closed-form solution of u' = -rate * u^((gamma+mu)/gamma), u(0)=u0."""
    if u0 < 0.0:
        raise ValueError("comparison initial value must be nonnegative")
    t = np.asarray(t, dtype=float)
    return u0 * (1.0 + rate * (mu / gamma) * u0 ** (mu / gamma) * t) ** (-gamma / mu)


def _check_front_identity(c_hat1: float, delta: float, Delta: float):
    if abs(c_hat1 - delta / Delta) > 1e-10 * (delta / Delta):
        raise InternalInconsistencyError(
            f"envelope amplitude {c_hat1!r} disagrees with delta/Delta {delta / Delta!r}"
        )


def envelope_constants_classical(fc: FunctionalCertificate, bc: BoundConstants,
                                 s: HomogeneousStructure, h: float, Delta: float):
    """(c_hat1, c_hat2) of the classical envelope; the amplitude must
    coincide with delta/Delta (cross-check of the radius equation)."""
    c, b, _rho1, _rho2 = connection_constants(fc, s, h)
    front = bc.alpha1 + fc.b3 * Delta ** s.mu
    c_hat1 = (front / fc.a1) ** (1.0 / s.gamma)
    _check_front_identity(c_hat1, fc.delta, Delta)
    c_hat2 = (c / b) * (s.mu / s.gamma) * (front / (2.0 * b * max(1.0, h))) ** (s.mu / s.gamma)
    return c_hat1, c_hat2


def condition22(rho: float, alpha: float, Delta_alpha: float, b3: float,
                bc: BoundConstants, s: HomogeneousStructure, h: float):
    """Feasibility link between the rate, alpha and the radius: the
    comparison solution may not drop by more than alpha^mu across one
    delay window starting from the worst admissible level. Returns
    (satisfied, margin) with margin = alpha^mu - left side."""
    front = bc.alpha1 + b3 * Delta_alpha ** s.mu
    lhs = 1.0 + rho * h * (s.mu / s.gamma) * front ** (s.mu / s.gamma) * Delta_alpha ** s.mu
    margin = alpha ** s.mu - lhs
    return margin >= 0.0, margin


def envelope_constants_razumikhin(fc: FunctionalCertificate, bc: BoundConstants,
                                  s: HomogeneousStructure, h: float,
                                  Delta_alpha: float, rho: float):
    """(c_hat1, c_hat2) of the rate-parametrized envelope; at rho = rho2
    this reproduces the classical printed form with a1_tilde in place of
    a1 (cross-checked in tests)."""
    front = bc.alpha1 + fc.b3 * Delta_alpha ** s.mu
    c_hat1 = (front / fc.a1_tilde) ** (1.0 / s.gamma)
    _check_front_identity(c_hat1, fc.delta, Delta_alpha)
    c_hat2 = rho * (s.mu / s.gamma) * front ** (s.mu / s.gamma)
    return c_hat1, c_hat2


def certify_classical(bc: BoundConstants, s: HomogeneousStructure, h: float,
                      split=None, delta_margin: float = 0.99) -> EstimateCertificate:
    fc = build_functional_certificate(bc, s, h, split=split, variant=CLASSICAL,
                                      delta_margin=delta_margin)
    Delta = attraction_radius_classical(fc, bc, s)
    c, b, rho1, rho2 = connection_constants(fc, s, h)
    c_hat1, c_hat2 = envelope_constants_classical(fc, bc, s, h, Delta)
    return EstimateCertificate(
        variant=CLASSICAL, gamma=s.gamma, mu=s.mu, h=h, delta=fc.delta, Delta=Delta,
        c_lo=c, b_hi=b, rho1=rho1, rho2=rho2, rho=rho2, c_hat1=c_hat1, c_hat2=c_hat2,
        u0_coeff=bc.alpha1 + fc.b3 * Delta ** s.mu, functional=fc, alpha=None,
    )


def certify_razumikhin(bc: BoundConstants, s: HomogeneousStructure, h: float,
                       alpha: float, rho_fraction: float = 1.0, split=None,
                       delta_margin: float = 0.99) -> EstimateCertificate:
    if not 0.0 < rho_fraction <= 1.0:
        raise ValueError("rho fraction must lie in (0, 1]")
    fc = build_functional_certificate(bc, s, h, split=split, variant=RAZUMIKHIN,
                                      alpha=alpha, delta_margin=delta_margin)
    Delta_alpha = attraction_radius_razumikhin(fc, bc, s)
    c, b, rho1, rho2 = connection_constants(fc, s, h)
    rho = rho_fraction * rho2
    ok, margin = condition22(rho, alpha, Delta_alpha, fc.b3, bc, s, h)
    if not ok:
        raise InfeasibleCertificateError(
            f"rate/alpha/radius condition fails by {-margin:.3e} "
            f"(alpha={alpha}, rho={rho:.3e}, Delta_alpha={Delta_alpha:.3e})"
        )
    c_hat1, c_hat2 = envelope_constants_razumikhin(fc, bc, s, h, Delta_alpha, rho)
    return EstimateCertificate(
        variant=RAZUMIKHIN, gamma=s.gamma, mu=s.mu, h=h, delta=fc.delta,
        Delta=Delta_alpha, c_lo=c, b_hi=b, rho1=rho1, rho2=rho2, rho=rho,
        c_hat1=c_hat1, c_hat2=c_hat2,
        u0_coeff=bc.alpha1 + fc.b3 * Delta_alpha ** s.mu, functional=fc, alpha=alpha,
    )


def search_alpha_rho(bc: BoundConstants, s: HomogeneousStructure, h: float,
                     split_grid=None, alpha_grid=DEFAULT_ALPHA_GRID,
                     rho_fractions=DEFAULT_RHO_FRACTIONS,
                     delta_margin: float = 0.99) -> EstimateCertificate:
    """Grid search for the razumikhin certificate maximizing the radius
    Delta_alpha, tie-broken by the largest feasible rate. Deterministic:
    grids are scanned in the given order. Raises with per-tuple
    diagnostics when nothing is feasible."""
    split_grid = list(split_grid) if split_grid is not None else [None]
    fractions = sorted(rho_fractions, reverse=True)
    best = None
    failures = []
    for split in split_grid:
        for alpha in alpha_grid:
            found = None
            for frac in fractions:
                try:
                    found = certify_razumikhin(bc, s, h, alpha, rho_fraction=frac,
                                               split=split, delta_margin=delta_margin)
                    break
                except InfeasibleCertificateError as exc:
                    failures.append(f"split={split}, alpha={alpha}, rho_frac={frac}: {exc}")
            if found is None:
                continue
            if best is None or (found.Delta, found.rho) > (best.Delta, best.rho):
                best = found
    if best is None:
        raise InfeasibleCertificateError(
            "no feasible (split, alpha, rho) tuple:\n" + "\n".join(failures[:20])
        )
    return best


# ---------------------------------------------------------------------------
# trajectory-level checks


@dataclass
class ComparisonCheck:
    name: str
    nodes_checked: int
    min_margin: float  # positive everywhere means the claim holds strictly
    first_violation_time: Optional[float]
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.nodes_checked == 0 or self.min_margin > -self.tolerance


@dataclass
class ComparisonReport:
    checks: list
    admissible: bool

    @property
    def passed(self) -> bool:
        return self.admissible and all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = [f"history admissible: {self.admissible}"]
        for c in self.checks:
            status = "ok" if c.passed else "VIOLATED"
            lines.append(
                f"{c.name}: {status} (checked {c.nodes_checked}, min margin "
                f"{c.min_margin:.3e}, tol {c.tolerance:.3e})"
                + (f" - {c.note}" if c.note else "")
            )
        return "\n".join(lines)


def check_comparison_lemmas(traj, cert: EstimateCertificate,
                            rho: Optional[float] = None) -> ComparisonReport:
    """Verify the comparison chain along a trajectory: the differential
    inequality for v, domination of v by the comparison solution, the
    window-ratio property of the comparison solution, and the norm
    estimate it induces."""
    if traj.v_series is None:
        raise ValueError("trajectory has no v_series; call trajectory_values first")
    fc = cert.functional
    if traj.split != (fc.w1, fc.w2):
        raise ValueError("trajectory v_series was computed with a different split")
    s = traj.model.structure
    rho = cert.rho if rho is None else rho
    phi_norm = traj.history.sup_hom_norm(s)
    admissible = cert.admissible(phi_norm)
    v = traj.v_series
    times = traj.times
    u = cert.comparison(times, phi_norm)
    checks = []

    def record(name, margin, times_axis, tol, note=""):
        worst = float(margin.min()) if margin.size else np.inf
        bad = margin <= -tol
        first = float(times_axis[bad][0]) if np.any(bad) else None
        checks.append(ComparisonCheck(name=name, nodes_checked=int(margin.size),
                                      min_margin=worst, first_violation_time=first,
                                      tolerance=tol, note=note))

    # differential inequality: dv/dt <= -rho2 * v^((gamma+mu)/gamma)
    if v.size >= 3:
        dv = (v[2:] - v[:-2]) / (2.0 * traj.dt)
        decay = cert.rho2 * np.maximum(v[1:-1], 0.0) ** ((s.gamma + s.mu) / s.gamma)
        tol = 1e-6 * float(np.abs(v).max())
        record("value_decay_inequality", -(dv + decay), times[1:-1], tol)

    # domination: v(x_t) < u(t)
    tol = 1e-8 * float(np.abs(u).max())
    record("value_below_comparison", u - v, times, tol)

    if cert.variant == RAZUMIKHIN:
        alpha = cert.alpha
        # window ratio: u(t+theta) < alpha^gamma * u(t); u is monotone
        # decreasing so theta = -h (clamped at 0) is the extremal offset
        shifted = cert.comparison(np.maximum(times - cert.h, 0.0), phi_norm)
        tol = 1e-10 * float(np.abs(u).max())
        record("comparison_window_ratio", alpha ** s.gamma * u - shifted, times, tol,
               note="extremal offset -h; closed form is monotone decreasing")
        # induced norm estimate: a1_tilde * ||x||^gamma < u(t)
        margin = u - fc.a1_tilde * traj.hom_norms ** s.gamma
        tol = 1e-8 * float(np.abs(u).max())
        record("norm_below_comparison", margin, times, tol)

    return ComparisonReport(checks=checks, admissible=admissible)
