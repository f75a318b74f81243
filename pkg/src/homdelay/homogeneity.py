"""Weighted-homogeneous algebra and bound-constant estimation.

A dilation with weight vector r scales state coordinates anisotropically,
x -> (eps^r_1 x_1, ..., eps^r_n x_n). The homogeneous norm built from
(r, p) is degree one under that dilation, and every quantity this package
certifies (vector field components, Lyapunov function values, their
derivatives) scales with a fixed degree. That reduces global bounds to
suprema/infima over compact level sets, which are estimated here by
quasi-random sampling plus deterministic corner/edge enrichment.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import CertificationError
from .numerics import guarded_power

FULL_SPACE = "full-space"
NONNEGATIVE_ORTHANT = "nonnegative-orthant"

_DOMAINS = (FULL_SPACE, NONNEGATIVE_ORTHANT)


@dataclass(frozen=True)
class HomogeneousStructure:
    """Dilation weights and degrees shared by a system and its Lyapunov
    function: weights r, norm exponent p, field degree mu, function
    degree gamma."""

    n: int
    r: tuple
    p: float
    mu: float
    gamma: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("state dimension must be >= 1")
        r = tuple(float(v) for v in self.r)
        if len(r) != self.n:
            raise ValueError("weight vector length must equal the state dimension")
        if any(v <= 0.0 for v in r):
            raise ValueError("dilation weights must be positive")
        if self.p < 1.0:
            raise ValueError("norm exponent p must be >= 1")
        if self.mu <= 0.0:
            raise ValueError("field degree mu must be positive")
        if self.gamma < 2.0 * max(r):
            raise ValueError("function degree gamma must be >= 2*max(r)")
        object.__setattr__(self, "r", r)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.r, dtype=float)


def hom_norm(x, s: HomogeneousStructure):
    """Homogeneous norm (sum_i |x_i|^(p/r_i))^(1/p); degree one under
    the dilation, zero only at the origin."""
    x = np.asarray(x, dtype=float)
    powers = s.p / s.weights
    return np.sum(np.abs(x) ** powers, axis=-1) ** (1.0 / s.p)


def dilate(x, eps: float, s: HomogeneousStructure):
    """Apply the anisotropic scaling x_i -> eps^r_i x_i."""
    if eps <= 0.0:
        raise ValueError("dilation parameter must be positive")
    x = np.asarray(x, dtype=float)
    return x * eps ** s.weights


@dataclass
class SystemModel:
    """A delay system x'(t) = f(x(t), x(t-h)) with its Lyapunov data.

    All evaluators are vectorized over a leading batch axis:
    f(x, y) maps (..., n) x (..., n) -> (..., n); df_dx gives the
    Jacobian in the first argument, (..., n, n); V, dV, d2V take (..., n).
    """

    structure: HomogeneousStructure
    h: float
    f: Callable
    df_dx: Callable
    V: Callable
    dV: Callable
    d2V: Callable
    domain: str = FULL_SPACE

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValueError("delay must be positive")
        if self.domain not in _DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}; expected one of {_DOMAINS}")


@dataclass(frozen=True)
class Provenance:
    kind: str  # "analytic" | "sampled"
    samples: int = 0
    safety: float = 1.0


@dataclass
class BoundConstants:
    """Growth/derivative constants feeding the certificates.

    m bounds |f_i| by m_i*(||x||^(mu+r_i) + ||y||^(mu+r_i)); eta bounds
    the Jacobian entries with sign-dependent exponents; beta/psi bound
    first/second derivatives of V; alpha0/alpha1 sandwich V; w is the
    delay-free decay margin. Max-type entries must over-estimate, the
    min-type entries (alpha0, w) must under-estimate.
    """

    m: np.ndarray
    eta: np.ndarray
    beta: np.ndarray
    psi: np.ndarray
    alpha0: float
    alpha1: float
    w: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        if np.any(self.m < 0.0) or np.any(self.eta < 0.0) or np.any(self.beta < 0.0) \
                or np.any(self.psi < 0.0):
            raise ValueError("bound constants must be nonnegative")
        if not 0.0 < self.alpha0 <= self.alpha1:
            raise ValueError("need 0 < alpha0 <= alpha1")
        if self.w <= 0.0:
            raise CertificationError(
                "delay-free stability margin w <= 0: the delay-free system is not "
                "certified asymptotically stable by this Lyapunov function"
            )


@dataclass(frozen=True)
class SamplingSpec:
    """Budget and seed for level-set sampling.

    `samples` quasi-random direction draws are enriched with axis points
    and two-coordinate angular grids (`pair_grid` points per pair), so
    corner/edge maximizers are hit exactly. Increasing `samples` with a
    fixed seed extends the Sobol sequence prefix, which makes estimated
    maxima monotone under refinement.
    """

    samples: int = 100_000
    seed: int = 0
    pair_grid: int = 128
    include_axes: bool = True

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("sampling spec needs at least one sample")
        if self.pair_grid < 0:
            raise ValueError("pair_grid must be nonnegative")


@dataclass
class HomogeneityReport:
    passed: bool
    worst_field_residual: float
    worst_value_residual: float
    samples: int
    tol: float


def exponent_partition(s: HomogeneousStructure):
    """Split Jacobian index pairs by the sign of mu + r_i - r_j.

    Pairs with nonnegative exponent land in R1 (direct growth bound,
    the zero-exponent case bounds the entry by a constant); strictly
    negative exponents land in R2 (reciprocal bound).
    """
    R1, R2 = [], []
    for i in range(s.n):
        for j in range(s.n):
            e = s.mu + s.r[i] - s.r[j]
            (R1 if e >= 0.0 else R2).append((i, j))
    return R1, R2


# ---------------------------------------------------------------------------
# direction generation


def _sobol_directions(dim: int, count: int, seed: int, orthant: bool) -> np.ndarray:
    """First `count` scrambled-Sobol points mapped to unit directions."""
    if count <= 0:
        return np.empty((0, dim))
    m = max(1, int(np.ceil(np.log2(max(count, 2)))))
    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    u = eng.random_base2(m)[:count]
    z = ndtri(np.clip(u, 1e-13, 1.0 - 1e-13))
    if orthant:
        z = np.abs(z)
    norms = np.linalg.norm(z, axis=1)
    keep = norms > 1e-12
    return z[keep] / norms[keep, None]


def _axis_directions(dim: int, orthant: bool) -> np.ndarray:
    eye = np.eye(dim)
    return eye if orthant else np.vstack([eye, -eye])


def _pair_directions(dim: int, k: int, orthant: bool) -> np.ndarray:
    """Angular grids on every two-coordinate plane."""
    if k <= 0 or dim < 2:
        return np.empty((0, dim))
    span = 0.5 * np.pi if orthant else 2.0 * np.pi
    angles = (np.arange(k) + 0.5) / k * span
    blocks = []
    for i in range(dim):
        for j in range(i + 1, dim):
            block = np.zeros((k, dim))
            block[:, i] = np.cos(angles)
            block[:, j] = np.sin(angles)
            blocks.append(block)
    return np.vstack(blocks)


def _directions(dim: int, grid: SamplingSpec, orthant: bool) -> np.ndarray:
    parts = [_sobol_directions(dim, grid.samples, grid.seed, orthant)]
    if grid.include_axes:
        parts.append(_axis_directions(dim, orthant))
    parts.append(_pair_directions(dim, grid.pair_grid, orthant))
    return np.vstack(parts)


def sphere_points(s: HomogeneousStructure, grid: SamplingSpec, domain: str) -> np.ndarray:
    """Points on the homogeneous unit sphere {hom_norm(x) = 1}."""
    d = _directions(s.n, grid, domain == NONNEGATIVE_ORTHANT)
    eps = 1.0 / hom_norm(d, s)
    return d * eps[:, None] ** s.weights


def pair_level_set_points(s: HomogeneousStructure, grid: SamplingSpec, k: float,
                          domain: str):
    """Points (x, y) on {hom_norm(x)^k + hom_norm(y)^k = 1}, built by
    rescaling joint directions along the dilation."""
    if k <= 0.0:
        raise ValueError("level-set exponent must be positive")
    d = _directions(2 * s.n, grid, domain == NONNEGATIVE_ORTHANT)
    dx, dy = d[:, : s.n], d[:, s.n:]
    nx, ny = hom_norm(dx, s), hom_norm(dy, s)
    total = nx ** k + ny ** k
    keep = total > 1e-300
    dx, dy, total = dx[keep], dy[keep], total[keep]
    eps = total ** (-1.0 / k)
    scale = eps[:, None] ** s.weights
    return dx * scale, dy * scale


# ---------------------------------------------------------------------------
# checks and estimators


def check_homogeneity(model: SystemModel, samples: int = 1000, tol: float = 1e-10,
                      seed: int = 0) -> HomogeneityReport:
    """Verify the declared degrees on random points and dilation factors.

    Residuals are normalized by 1 + |scaled value| so the check is
    meaningful across magnitudes.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    s = model.structure
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((samples, s.n))
    y = rng.standard_normal((samples, s.n))
    if model.domain == NONNEGATIVE_ORTHANT:
        x, y = np.abs(x), np.abs(y)
    eps = 10.0 ** rng.uniform(-2.0, 2.0, size=samples)
    scale = eps[:, None] ** s.weights

    fv = model.f(x, y)
    fs = model.f(x * scale, y * scale)
    expected = fv * eps[:, None] ** (s.mu + s.weights)
    res_f = np.abs(fs - expected) / (1.0 + np.abs(expected))
    worst_f = float(res_f.max())

    Vv = model.V(x)
    Vs = model.V(x * scale)
    expected_V = Vv * eps ** s.gamma
    res_V = np.abs(Vs - expected_V) / (1.0 + np.abs(expected_V))
    worst_V = float(res_V.max())

    return HomogeneityReport(
        passed=max(worst_f, worst_V) <= tol,
        worst_field_residual=worst_f,
        worst_value_residual=worst_V,
        samples=samples,
        tol=tol,
    )


def estimate_growth_bounds(model: SystemModel, grid: SamplingSpec,
                           safety: float = 1.05) -> np.ndarray:
    """Componentwise growth constants m_i = safety * sup |f_i| over the
    level set hom_norm(x)^k + hom_norm(y)^k = 1, k = mu + r_i.

    A component that vanishes identically on its level set is reported
    as zero with a warning (degenerate bound).
    """
    if safety < 1.0:
        raise ValueError("safety factor must be >= 1")
    s = model.structure
    m = np.zeros(s.n)
    cache: dict[float, tuple] = {}
    for i in range(s.n):
        k = s.mu + s.r[i]
        if k <= 0.0:
            k = 1.0  # degree-zero component: any positive exponent works
        key = round(k, 12)
        if key not in cache:
            cache[key] = pair_level_set_points(s, grid, k, model.domain)
        px, py = cache[key]
        vals = np.abs(model.f(px, py)[:, i])
        m[i] = safety * float(vals.max())
        if m[i] == 0.0:
            warnings.warn(
                f"growth bound m[{i}] is zero: component {i} vanishes on its level set",
                stacklevel=2,
            )
    return m


def estimate_jacobian_bounds(model: SystemModel, grid: SamplingSpec,
                             safety: float = 1.05):
    """Jacobian growth constants eta_ij plus the exponent partition.

    For every index pair the constant is the (safety-inflated) supremum
    of |df_i/dx_j| over the level set whose exponent is |mu + r_i - r_j|
    (exponent 1 when that is zero); on that set the sign-dependent bound
    reduces to the plain supremum.
    """
    if safety < 1.0:
        raise ValueError("safety factor must be >= 1")
    s = model.structure
    R1, R2 = exponent_partition(s)
    eta = np.zeros((s.n, s.n))
    groups: dict[float, list] = {}
    for i in range(s.n):
        for j in range(s.n):
            e = s.mu + s.r[i] - s.r[j]
            k = abs(e) if abs(e) > 1e-12 else 1.0
            groups.setdefault(round(k, 12), []).append((i, j))
    for key, pairs in groups.items():
        px, py = pair_level_set_points(s, grid, key, model.domain)
        J = model.df_dx(px, py)
        for (i, j) in pairs:
            eta[i, j] = safety * float(np.abs(J[:, i, j]).max())
    return eta, R1, R2


def estimate_lyapunov_bounds(model: SystemModel, grid: SamplingSpec,
                             safety: float = 1.05):
    """Sandwich/derivative constants of V and the delay-free margin w,
    all over the homogeneous unit sphere.

    Max-type values are inflated by `safety`, min-type values (alpha0, w)
    shrunk by it. Sampled extrema are inherently one-sided (a sampled max
    under-estimates, a sampled min over-estimates); the safety factor
    compensates but is not a rigorous bound.
    """
    if safety < 1.0:
        raise ValueError("safety factor must be >= 1")
    s = model.structure
    X = sphere_points(s, grid, model.domain)
    Vv = model.V(X)
    alpha0 = float(Vv.min()) / safety
    alpha1 = float(Vv.max()) * safety
    G = model.dV(X)
    beta = safety * np.abs(G).max(axis=0)
    H = model.d2V(X)
    psi = safety * np.abs(H).max(axis=0)
    decay = -np.einsum("ki,ki->k", G, model.f(X, X))
    w = float(decay.min()) / safety
    if w <= 0.0:
        raise CertificationError(
            "delay-free stability margin w <= 0: the delay-free system is not "
            "certified asymptotically stable by this Lyapunov function"
        )
    return alpha0, alpha1, np.asarray(beta), np.asarray(psi), w


def sampled_bound_constants(model: SystemModel, grid: SamplingSpec,
                            safety: float = 1.05,
                            overrides: dict | None = None) -> BoundConstants:
    """Assemble BoundConstants by sampling, honoring analytic overrides.

    `overrides` may supply any of m, eta, beta, psi, alpha0, alpha1, w;
    supplied entries take precedence over the sampled values and are
    tagged analytic in the provenance map.
    """
    overrides = dict(overrides or {})
    prov: dict[str, Provenance] = {}
    sampled = Provenance("sampled", samples=grid.samples, safety=safety)

    def pick(name, compute):
        if name in overrides:
            prov[name] = Provenance("analytic")
            return overrides[name]
        prov[name] = sampled
        return compute()

    m = pick("m", lambda: estimate_growth_bounds(model, grid, safety))
    eta = pick("eta", lambda: estimate_jacobian_bounds(model, grid, safety)[0])
    lyap_keys = ("alpha0", "alpha1", "beta", "psi", "w")
    if all(k in overrides for k in lyap_keys):
        vals = tuple(overrides[k] for k in lyap_keys)
        for k in lyap_keys:
            prov[k] = Provenance("analytic")
    else:
        a0s, a1s, betas, psis, ws = estimate_lyapunov_bounds(model, grid, safety)
        defaults = dict(alpha0=a0s, alpha1=a1s, beta=betas, psi=psis, w=ws)
        vals = []
        for k in lyap_keys:
            if k in overrides:
                prov[k] = Provenance("analytic")
                vals.append(overrides[k])
            else:
                prov[k] = sampled
                vals.append(defaults[k])
        vals = tuple(vals)
    alpha0, alpha1, beta, psi, w = vals
    return BoundConstants(m=m, eta=eta, beta=beta, psi=psi, alpha0=alpha0,
                          alpha1=alpha1, w=w, provenance=prov)


def finite_difference_gradient(func, x, step_scale: float = 1e-6):
    """Central-difference gradient for validating analytic derivatives.

    Validation helper only; never used by the certification pipeline.
    """
    x = np.asarray(x, dtype=float)
    step = step_scale * (1.0 + np.linalg.norm(x))
    grad = np.zeros_like(x)
    for i in range(x.size):
        hi = x.copy()
        lo = x.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (func(hi) - func(lo)) / (2.0 * step)
    return grad
