"""Energy functional along history segments and its certificate constants.

The functional adds three pieces: the Lyapunov value at the segment end,
a cross term coupling the gradient with the integrated field over the
delay window, and a weighted integral of the homogeneous norm raised to
gamma+mu. Its lower/upper/derivative bounds hold inside a ball of
homogeneous radius delta; this module computes the constants of those
bounds, selects delta, and verifies the bounds along trajectories.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import InfeasibleCertificateError, NumericalFailureError
from .homogeneity import BoundConstants, HomogeneousStructure, SystemModel, hom_norm
from .numerics import bisect_increasing, golden_section_max, simpson_weights

if TYPE_CHECKING:  # pragma: no cover
    from .sim import Trajectory

CLASSICAL = "classical"
RAZUMIKHIN = "razumikhin"


@dataclass
class HistoryFunction:
    """Initial function on [-h, 0], stored as uniform piecewise-linear
    samples (a constant history is two equal samples)."""

    h: float
    values: np.ndarray  # (K+1, n) nodes on a uniform grid over [-h, 0]

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.h <= 0.0:
            raise ValueError("history length must be positive")
        if self.values.shape[0] < 2:
            raise ValueError("piecewise-linear history needs at least two nodes")

    @classmethod
    def constant(cls, value, h: float) -> "HistoryFunction":
        value = np.asarray(value, dtype=float)
        return cls(h=h, values=np.vstack([value, value]))

    @classmethod
    def from_callable(cls, fn, h: float, segments: int = 64) -> "HistoryFunction":
        """Sample a callable on a uniform grid; smooth shapes are
        approximated piecewise-linearly (documented approximation)."""
        thetas = np.linspace(-h, 0.0, segments + 1)
        return cls(h=h, values=np.asarray([fn(t) for t in thetas], dtype=float))

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-self.h, 0.0, self.values.shape[0])

    def __call__(self, theta):
        theta = np.clip(np.asarray(theta, dtype=float), -self.h, 0.0)
        pos = (theta + self.h) / self.h * (self.values.shape[0] - 1)
        lo = np.clip(pos.astype(int), 0, self.values.shape[0] - 2)
        frac = pos - lo
        out = (1.0 - frac)[..., None] * self.values[lo] + frac[..., None] * self.values[lo + 1]
        return out

    def resample(self, segments: int) -> "HistoryFunction":
        thetas = np.linspace(-self.h, 0.0, segments + 1)
        return HistoryFunction(h=self.h, values=self(thetas))

    def end_value(self) -> np.ndarray:
        return self.values[-1].copy()

    def sup_hom_norm(self, s: HomogeneousStructure, refine: int = 8) -> float:
        """Uniform-norm surrogate: max hom-norm over nodes refined
        `refine`-fold per segment. Exact for constant histories."""
        k = (self.values.shape[0] - 1) * refine
        thetas = np.linspace(-self.h, 0.0, k + 1)
        return float(hom_norm(self(thetas), s).max())


def default_split(w: float, h: float):
    """Balanced weight split (w1, w2): equalizes the three derivative
    margins, which maximizes the radius H2."""
    return w / 4.0, w / (4.0 * h)


def split_w0(w: float, split, h: float) -> float:
    w1, w2 = split
    if w1 <= 0.0 or w2 <= 0.0:
        raise ValueError("split weights must be positive")
    w0 = w - w1 - h * w2
    if w0 <= 0.0:
        raise ValueError("split leaves no margin: w - w1 - h*w2 must be positive")
    return w0


def eval_functional(phi: HistoryFunction, model: SystemModel, split,
                    quad_panels: int = 64) -> float:
    """Evaluate the functional on a history segment with composite
    Simpson quadrature (`quad_panels` even panels over the window)."""
    s = model.structure
    h = model.h
    w1, w2 = split
    weights = simpson_weights(quad_panels, h)
    thetas = np.linspace(-h, 0.0, quad_panels + 1)
    samples = phi(thetas)
    x0 = phi.end_value()

    term_value = float(model.V(x0))
    fvals = model.f(np.broadcast_to(x0, samples.shape), samples)
    term_cross = float(model.dV(x0) @ (weights @ fvals))
    norm_pow = hom_norm(samples, s) ** (s.gamma + s.mu)
    term_norm = float(weights @ ((w1 + (h + thetas) * w2) * norm_pow))
    return term_value + term_cross + term_norm


# ---------------------------------------------------------------------------
# certificate constants


@dataclass
class LowerBounds:
    a1: float
    a2: float
    H1: float
    feasible: bool


@dataclass
class DerivativeBounds:
    L: float
    s_matrix: np.ndarray
    c0: float
    c1: float
    c2: float
    H2: float
    feasible: bool


@dataclass
class UpperBounds:
    b1: float
    b2: float
    b3: float


@dataclass
class RazumikhinLowerBound:
    a1_tilde: float
    H3: float
    feasible: bool


def _beta_m(bc: BoundConstants) -> float:
    return float(np.dot(bc.beta, bc.m))


def lower_bound_constants(bc: BoundConstants, s: HomogeneousStructure, split,
                          chi: float, delta: float, h: float) -> LowerBounds:
    """Lower-bound constants a1, a2 and the radius H1 at coupling knob chi."""
    if chi <= 0.0:
        raise ValueError("chi must be positive")
    w1, _ = split
    r = s.weights
    denom = h * float(np.sum(bc.beta * bc.m * (1.0 + chi ** (-2.0 * (s.mu + r)))))
    H1 = (bc.alpha0 / denom) ** (1.0 / s.mu) if denom > 0.0 else np.inf
    a1 = bc.alpha0 - denom * delta ** s.mu
    a2 = w1 - float(np.sum(bc.beta * bc.m * chi ** (2.0 * (s.gamma - r))))
    return LowerBounds(a1=a1, a2=a2, H1=H1, feasible=(a1 > 0.0 and a2 > 0.0 and delta < H1))


def chi_upper_limit(bc: BoundConstants, s: HomogeneousStructure, w1: float) -> float:
    """Largest chi keeping a2 positive, by bisection on the increasing
    coupling sum; the returned value sits on the a2 > 0 side."""
    r = s.weights
    coeff = bc.beta * bc.m
    if np.all(coeff == 0.0):
        return 1e6

    def excess(chi):
        return float(np.sum(coeff * chi ** (2.0 * (s.gamma - r)))) - w1

    hi = 1.0
    while excess(hi) < 0.0 and hi < 1e6:
        hi *= 2.0
    if excess(hi) < 0.0:
        return hi
    lo = hi / 2.0 if hi > 1.0 else 1e-12
    while excess(lo) > 0.0:
        lo /= 2.0
        if lo < 1e-300:
            raise NumericalFailureError("could not bracket the chi upper limit")
    # keep the bracket end with a2 > 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return lo


def choose_chi(bc: BoundConstants, s: HomogeneousStructure, w1: float) -> float:
    """Pick chi by golden-section maximization of H1 over (0, chi_max].

    H1 is monotone increasing in chi (every denominator term decreases),
    so the search converges to chi_max with a2 shrinking toward zero;
    a2 stays strictly positive because the probes are interior and the
    bracket end itself satisfies a2 > 0. a2 feeds no downstream estimate
    constant, so trading it away maximizes the certified radius.
    """
    chi_max = chi_upper_limit(bc, s, w1)
    r = s.weights

    def neg_denom(chi):
        return -float(np.sum(bc.beta * bc.m * (1.0 + chi ** (-2.0 * (s.mu + r)))))

    chi, _ = golden_section_max(neg_denom, chi_max * 1e-6, chi_max)
    return chi


def derivative_bound_constants(bc: BoundConstants, s: HomogeneousStructure, split,
                               delta: float, h: float) -> DerivativeBounds:
    """Derivative-bound constants c0..c2 and the radius H2.

    The coupling matrix s_ij is 1 on nonnegative exponents and
    delta^(r_j - r_i - mu) on negative ones, so L depends on delta
    whenever the negative-exponent set is nonempty.
    """
    w1, w2 = split
    w0 = split_w0(bc.w, split, h)
    n = s.n
    r = s.weights
    s_matrix = np.ones((n, n))
    for i in range(n):
        for j in range(n):
            e = s.mu + r[i] - r[j]
            if e < 0.0:
                s_matrix[i, j] = delta ** (-e)
    L = float(np.sum(bc.m[None, :] * (bc.beta[:, None] * bc.eta * s_matrix
                                      + bc.m[:, None] * bc.psi)))
    c0 = w0 - 4.0 * h * L * delta ** s.mu
    c1 = w1 - 2.0 * h * L * delta ** s.mu
    c2 = w2 - 2.0 * L * delta ** s.mu
    if L > 0.0:
        H2 = (min(w0 / (4.0 * h * L), w1 / (2.0 * h * L), w2 / (2.0 * L))) ** (1.0 / s.mu)
    else:
        H2 = np.inf
    return DerivativeBounds(L=L, s_matrix=s_matrix, c0=c0, c1=c1, c2=c2, H2=H2,
                            feasible=(c0 > 0.0 and c1 > 0.0 and c2 > 0.0 and delta < H2))


def upper_bound_constants(bc: BoundConstants, s: HomogeneousStructure, split,
                          delta: float, h: float) -> UpperBounds:
    w1, w2 = split
    bm = _beta_m(bc)
    b1 = bc.alpha1 + 2.0 * h * bm * delta ** s.mu
    b2 = (w1 + h * w2 + bm) * delta ** s.mu
    b3 = (w1 + h * w2 + 2.0 * h * bm) * h
    return UpperBounds(b1=b1, b2=b2, b3=b3)


def razumikhin_lower_bound(bc: BoundConstants, s: HomogeneousStructure, alpha: float,
                           delta: float, h: float) -> RazumikhinLowerBound:
    """Lower bound valid on segments whose norm never exceeds alpha times
    the endpoint norm; less conservative than the chi route."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    r = s.weights
    denom = h * float(np.sum((1.0 + alpha ** (s.mu + r)) * bc.m * bc.beta))
    H3 = (bc.alpha0 / denom) ** (1.0 / s.mu) if denom > 0.0 else np.inf
    a1_tilde = bc.alpha0 - denom * delta ** s.mu
    return RazumikhinLowerBound(a1_tilde=a1_tilde, H3=H3,
                                feasible=(a1_tilde > 0.0 and delta < H3))


@dataclass
class FunctionalCertificate:
    """All constants of the functional bounds at a committed radius delta."""

    variant: str
    h: float
    w: float
    w0: float
    w1: float
    w2: float
    chi: float
    delta: float
    a1: float
    a2: float
    L: float
    c0: float
    c1: float
    c2: float
    b1: float
    b2: float
    b3: float
    H1: float
    H2: float
    alpha0: float
    alpha1: float
    H3: Optional[float] = None
    a1_tilde: Optional[float] = None
    alpha: Optional[float] = None

    @property
    def split(self):
        return (self.w1, self.w2)

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = None if v is None else (v if isinstance(v, str) else float(v))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionalCertificate":
        return cls(**d)


def _delta_fixed_point(target_other: float, margin: float, bc: BoundConstants,
                       s: HomogeneousStructure, split, h: float) -> float:
    """Solve delta = margin*min(target_other, H2(L(delta))).

    The right side is nonincreasing in delta, so the equation has a
    unique root found by bisection; with a delta-independent L it reduces
    to the closed form.
    """
    def H2_at(delta):
        return derivative_bound_constants(bc, s, split, delta, h).H2

    H2_zero = H2_at(0.0)
    cap = margin * min(target_other, H2_zero)
    if not np.isfinite(cap) or cap <= 0.0:
        raise InfeasibleCertificateError(
            "no positive radius: both H-limits are degenerate for this system"
        )

    def g(delta):
        return delta - margin * min(target_other, H2_at(delta))

    if g(cap) <= 0.0:
        return cap
    return bisect_increasing(g, 0.0, cap)


def build_functional_certificate(bc: BoundConstants, s: HomogeneousStructure, h: float,
                                 split=None, variant: str = CLASSICAL,
                                 alpha: Optional[float] = None,
                                 delta_margin: float = 0.99) -> FunctionalCertificate:
    """Commit a radius delta and assemble the full constant set.

    The classical variant requires delta < min{H1, H2} with a1, a2 > 0;
    the razumikhin variant requires alpha > 1 and delta < min{H2, H3}
    with a1_tilde > 0 (a1 may be negative there and is only reported).
    """
    if variant not in (CLASSICAL, RAZUMIKHIN):
        raise ValueError(f"unknown certificate variant {variant!r}")
    if not 0.0 < delta_margin < 1.0:
        raise ValueError("delta margin must lie in (0, 1)")
    if variant == RAZUMIKHIN and alpha is None:
        raise ValueError("razumikhin variant needs alpha > 1")
    split = tuple(split) if split is not None else default_split(bc.w, h)
    w1, w2 = split
    w0 = split_w0(bc.w, split, h)

    chi = choose_chi(bc, s, w1)
    lb_probe = lower_bound_constants(bc, s, split, chi, 0.0, h)
    if variant == CLASSICAL:
        target = lb_probe.H1
    else:
        target = razumikhin_lower_bound(bc, s, alpha, 0.0, h).H3
    delta = _delta_fixed_point(target, delta_margin, bc, s, split, h)

    lb = lower_bound_constants(bc, s, split, chi, delta, h)
    db = derivative_bound_constants(bc, s, split, delta, h)
    ub = upper_bound_constants(bc, s, split, delta, h)
    rz = razumikhin_lower_bound(bc, s, alpha, delta, h) if alpha is not None else None

    if not db.feasible:
        raise InfeasibleCertificateError(
            f"derivative margins infeasible at delta={delta:.6e}: "
            f"c0={db.c0:.3e}, c1={db.c1:.3e}, c2={db.c2:.3e}, H2={db.H2:.6e}"
        )
    if variant == CLASSICAL and not lb.feasible:
        raise InfeasibleCertificateError(
            f"lower bound infeasible at delta={delta:.6e}: "
            f"a1={lb.a1:.3e}, a2={lb.a2:.3e}, H1={lb.H1:.6e}"
        )
    if variant == RAZUMIKHIN and not rz.feasible:
        raise InfeasibleCertificateError(
            f"segment-ratio lower bound infeasible at delta={delta:.6e}: "
            f"a1_tilde={rz.a1_tilde:.3e}, H3={rz.H3:.6e}"
        )

    return FunctionalCertificate(
        variant=variant, h=h, w=bc.w, w0=w0, w1=w1, w2=w2, chi=chi, delta=delta,
        a1=lb.a1, a2=lb.a2, L=db.L, c0=db.c0, c1=db.c1, c2=db.c2,
        b1=ub.b1, b2=ub.b2, b3=ub.b3, H1=lb.H1, H2=db.H2,
        alpha0=bc.alpha0, alpha1=bc.alpha1,
        H3=None if rz is None else rz.H3,
        a1_tilde=None if rz is None else rz.a1_tilde,
        alpha=alpha,
    )


# ---------------------------------------------------------------------------
# values and checks along trajectories


def trajectory_values(traj: "Trajectory", split,
                      quad_panels: Optional[int] = None) -> np.ndarray:
    """Fill traj.v_series: the functional at every node, quadrature
    panels aligned with the integration grid (panels must divide the
    per-delay step count)."""
    model = traj.model
    s = model.structure
    h = model.h
    N = traj.steps_per_delay
    panels = N if quad_panels is None else quad_panels
    if N % panels:
        raise ValueError("quadrature panels must divide steps_per_delay for grid alignment")
    stride = N // panels
    w1, w2 = split

    all_states = traj.all_states()
    all_norms = traj.all_norms()
    M = traj.states.shape[0] - 1

    weights = simpson_weights(panels, h)
    thetas = np.linspace(-h, 0.0, panels + 1)
    kernel = weights * (w1 + (h + thetas) * w2)
    norm_pow = all_norms ** (s.gamma + s.mu)
    idx = np.arange(0, N + 1, stride)
    term_norm = np.empty(M + 1)
    term_cross = np.empty(M + 1)
    if stride == 1:
        term_norm[:] = np.correlate(norm_pow, kernel[::-1], mode="valid")
    else:
        for k in range(M + 1):
            term_norm[k] = kernel @ norm_pow[k + idx]
    for k in range(M + 1):
        xk = traj.states[k]
        window = all_states[k + idx]
        fvals = model.f(np.broadcast_to(xk, window.shape), window)
        term_cross[k] = model.dV(xk) @ (weights @ fvals)
    v = model.V(traj.states) + term_cross + term_norm
    traj.v_series = v
    traj.split = (w1, w2)
    return v


@dataclass
class BoundCheck:
    name: str
    nodes_checked: int
    nodes_skipped: int
    max_violation: float  # positive means the bound failed by that much
    first_violation_time: Optional[float]
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.nodes_checked == 0 or self.max_violation <= self.tolerance


@dataclass
class FunctionalBoundsReport:
    checks: list
    nodes_outside_delta: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        lines = [f"nodes outside delta-ball: {self.nodes_outside_delta}"]
        for c in self.checks:
            status = "ok" if c.passed else "VIOLATED"
            lines.append(
                f"{c.name}: {status} (checked {c.nodes_checked}, skipped {c.nodes_skipped}, "
                f"max violation {c.max_violation:.3e}, tol {c.tolerance:.3e}){' - ' + c.note if c.note else ''}"
            )
        return "\n".join(lines)


def _windowed_integrals(traj: "Trajectory", exponent: float) -> np.ndarray:
    """Simpson integral of hom_norm^exponent over the trailing delay
    window, for every node."""
    N = traj.steps_per_delay
    weights = simpson_weights(N, traj.model.h)
    series = traj.all_norms() ** exponent
    return np.correlate(series, weights[::-1], mode="valid")


def check_functional_bounds(traj: "Trajectory",
                            cert: FunctionalCertificate) -> FunctionalBoundsReport:
    """Verify the certified bounds along a simulated trajectory.

    Nodes whose rolling segment norm exceeds delta are skipped (the
    bounds are only claimed inside the ball). Tolerances combine a
    relative quadrature budget with the finite-difference budget
    1e-6 * max|v| for the derivative check.
    """
    if traj.v_series is None:
        raise ValueError("trajectory has no v_series; call trajectory_values first")
    if traj.split != (cert.w1, cert.w2):
        raise ValueError("trajectory v_series was computed with a different split")
    s = traj.model.structure
    v = traj.v_series
    norms = traj.hom_norms
    rolling = traj.rolling_sup
    N = traj.steps_per_delay
    all_norms = traj.all_norms()
    delayed = all_norms[: norms.size]  # hom_norm at t - h
    gp = s.gamma + s.mu

    S_int = _windowed_integrals(traj, gp)
    Q_int = _windowed_integrals(traj, s.gamma)

    inside = rolling <= cert.delta * (1.0 + 1e-12)
    n_out = int(np.count_nonzero(~inside))
    times = traj.times
    checks = []

    def record(name, violation, mask, tol, note="", t=times):
        checked = int(np.count_nonzero(mask))
        if checked:
            vmax = float(violation[mask].max())
            bad = mask & (violation > tol)
            first = float(t[bad][0]) if np.any(bad) else None
        else:
            vmax, first = -np.inf, None
        checks.append(BoundCheck(name=name, nodes_checked=checked,
                                 nodes_skipped=int(mask.size - checked),
                                 max_violation=vmax, first_violation_time=first,
                                 tolerance=tol, note=note))

    # lower bound: a1*||x||^gamma + a2*S <= v
    if cert.a1 > 0.0:
        rhs = cert.a1 * norms ** s.gamma + cert.a2 * S_int
        tol = 1e-8 * max(np.abs(v).max(), rhs.max(), 1e-300)
        record("lower_bound", rhs - v, inside, tol)
    else:
        checks.append(BoundCheck("lower_bound", 0, v.size, -np.inf, None, 0.0,
                                 note="skipped: a1 <= 0 at this delta"))

    # upper bound: v <= b1*||x||^gamma + b2*Q
    rhs = cert.b1 * norms ** s.gamma + cert.b2 * Q_int
    tol = 1e-8 * max(np.abs(v).max(), rhs.max(), 1e-300)
    record("upper_bound", v - rhs, inside, tol)

    # segment upper bound: v <= alpha1*||x||^gamma + b3*(sup norm)^{gamma+mu}
    rhs = cert.alpha1 * norms ** s.gamma + cert.b3 * rolling ** gp
    tol = 1e-8 * max(np.abs(v).max(), rhs.max(), 1e-300)
    record("segment_upper_bound", v - rhs, inside, tol)

    # ratio-set lower bound: a1_tilde*||x||^gamma + w1*S <= v on segments
    # with sup ||x(t+theta)|| <= alpha*||x(t)||
    if cert.alpha is not None and cert.a1_tilde is not None:
        member = inside & (rolling <= cert.alpha * norms * (1.0 + 1e-12))
        rhs = cert.a1_tilde * norms ** s.gamma + cert.w1 * S_int
        tol = 1e-8 * max(np.abs(v).max(), rhs.max() if rhs.size else 0.0, 1e-300)
        record("ratio_set_lower_bound", rhs - v, member, tol,
               note=f"membership: {int(member.sum())}/{member.size} nodes")

    # derivative bound: dv/dt <= -c0*||x||^gp - c1*||x(t-h)||^gp - c2*S
    if v.size >= 3:
        dv = (v[2:] - v[:-2]) / (2.0 * traj.dt)
        rhs = (cert.c0 * norms[1:-1] ** gp + cert.c1 * delayed[1:-1] ** gp
               + cert.c2 * S_int[1:-1])
        tol = 1e-6 * float(np.abs(v).max()) + 1e-8 * float(rhs.max())
        record("derivative_bound", dv + rhs, inside[1:-1], tol, t=times[1:-1])

    return FunctionalBoundsReport(checks=checks, nodes_outside_delta=n_out)
