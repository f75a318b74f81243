"""YAML run-configuration: schema, validation, and object construction.

One document drives every subcommand. Top-level sections:

    schema_version: 1
    pipeline: both                    # classical | razumikhin | both
    seed: 0
    system:
      kind: builtin-example           # or: monomial
      delay: 10.0
      params: {kappa1: 9.0, kappa2: 18.0, lambda1: 0.25, lambda2: 0.5}
      # monomial systems instead declare weights/norm_power/degree/
      # lyapunov_degree/domain and term lists f: / V:
    constants:
      source: analytic                # or: sampled
      samples: 100000
      pair_grid: 128
      safety: 1.05
      overrides: {}
    certificate:
      split: [0.25, 0.25]             # fractions of w for (w1, h*w2)
      split_grid: null
      delta_margin: 0.99
      alpha: null                     # fix alpha, or search alpha_grid
      alpha_grid: [1.01, 1.02, 1.05, 1.1, 1.2, 1.5, 2.0]
      rho_fractions: [1.0, 0.5, 0.25]
    history:
      kind: constant                  # or: piecewise-linear (values:)
      value: [5.0e-11, 5.0e-11]
    simulation:
      horizon: 1000.0                 # default 100*delay
      steps_per_delay: 256
      quad_panels: null               # default steps_per_delay

Validation failures raise ConfigError tagged with the offending field
path; unknown keys are rejected so typos cannot silently fall back to
defaults.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError
from .estimates import DEFAULT_ALPHA_GRID, DEFAULT_RHO_FRACTIONS
from .functional import HistoryFunction
from .genetic import GeneticNetworkParams, build_example
from .homogeneity import (
    FULL_SPACE,
    NONNEGATIVE_ORTHANT,
    BoundConstants,
    HomogeneousStructure,
    Provenance,
    SamplingSpec,
    SystemModel,
    sampled_bound_constants,
)
from .monomial import Monomial, build_monomial_model

SCHEMA_VERSION = 1
PIPELINES = ("classical", "razumikhin", "both")
DEFAULT_SPLIT_FRACTIONS = (0.25, 0.25)
_CONSTANT_NAMES = ("m", "eta", "beta", "psi", "alpha0", "alpha1", "w")


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _check_keys(d: dict, allowed, path: str):
    for key in d:
        if key not in allowed:
            _fail(f"{path}.{key}", f"unknown field (expected one of {sorted(allowed)})")


def _section(doc: dict, key: str, path: str, required: bool = False) -> dict:
    sub = doc.get(key)
    if sub is None:
        if required:
            _fail(f"{path}.{key}", "missing required section")
        return {}
    if not isinstance(sub, dict):
        _fail(f"{path}.{key}", "must be a mapping")
    return sub


def _as_float(v, path: str, minimum=None, exclusive=False,
              maximum=None, max_exclusive=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {v!r}")
    v = float(v)
    if minimum is not None and (v <= minimum if exclusive else v < minimum):
        _fail(path, f"must be {'>' if exclusive else '>='} {minimum}, got {v}")
    if maximum is not None and (v >= maximum if max_exclusive else v > maximum):
        _fail(path, f"must be {'<' if max_exclusive else '<='} {maximum}, got {v}")
    return v


def _as_int(v, path: str, minimum=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(path, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        _fail(path, f"must be >= {minimum}, got {v}")
    return v


def _as_float_list(v, path: str, length: Optional[int] = None) -> list:
    if not isinstance(v, (list, tuple)):
        _fail(path, f"expected a list, got {v!r}")
    if length is not None and len(v) != length:
        _fail(path, f"expected {length} entries, got {len(v)}")
    return [_as_float(x, f"{path}[{i}]") for i, x in enumerate(v)]


def _split_fractions(v, path: str):
    f1, f2 = _as_float_list(v, path, length=2)
    if f1 <= 0.0 or f2 <= 0.0 or f1 + f2 >= 1.0:
        _fail(path, f"split fractions need f1, f2 > 0 and f1 + f2 < 1, got {(f1, f2)}")
    return (f1, f2)


def resolve_split(fractions, w: float, h: float):
    """(w1, w2) from fractions (w1/w, h*w2/w) of the decay margin."""
    f1, f2 = fractions
    return (f1 * w, f2 * w / h)


@dataclass(frozen=True)
class CertificateOptions:
    split_fractions: tuple = DEFAULT_SPLIT_FRACTIONS
    split_grid: Optional[tuple] = None
    delta_margin: float = 0.99
    alpha: Optional[float] = None
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    rho_fractions: tuple = DEFAULT_RHO_FRACTIONS


@dataclass
class RunConfig:
    schema_version: int
    pipeline: str
    seed: int
    system_kind: str
    model: SystemModel
    constants: BoundConstants
    analytic_constants: Optional[BoundConstants]  # builtin example only
    constants_source: str
    sampling: SamplingSpec
    safety: float
    certificate: CertificateOptions
    history: Optional[HistoryFunction]
    horizon: float
    steps_per_delay: int
    quad_panels: Optional[int]

    @property
    def h(self) -> float:
        return self.model.h


def _parse_terms(raw, n: int, path: str):
    if not isinstance(raw, (list, tuple)):
        _fail(path, "expected a list of terms")
    terms = []
    for i, item in enumerate(raw):
        tpath = f"{path}[{i}]"
        if not isinstance(item, dict):
            _fail(tpath, "expected a mapping with coeff/x/y")
        _check_keys(item, {"coeff", "x", "y"}, tpath)
        if "coeff" not in item:
            _fail(f"{tpath}.coeff", "missing required field")
        coeff = _as_float(item["coeff"], f"{tpath}.coeff")
        xp = _as_float_list(item.get("x", [0.0] * n), f"{tpath}.x", length=n)
        yp = _as_float_list(item.get("y", [0.0] * n), f"{tpath}.y", length=n)
        try:
            terms.append(Monomial(coeff, tuple(xp), tuple(yp)))
        except ConfigError as exc:
            _fail(tpath, str(exc))
    return terms


def _build_system(sec: dict, path: str):
    """(model, analytic_constants_or_None, kind) from the system section."""
    kind = sec.get("kind")
    if kind == "builtin-example":
        _check_keys(sec, {"kind", "delay", "params"}, path)
        params_sec = _section(sec, "params", path, required=True)
        _check_keys(params_sec, {"kappa1", "kappa2", "lambda1", "lambda2"}, f"{path}.params")
        kwargs = {}
        for name in ("kappa1", "kappa2", "lambda1", "lambda2"):
            if name not in params_sec:
                _fail(f"{path}.params.{name}", "missing required field")
            kwargs[name] = _as_float(params_sec[name], f"{path}.params.{name}",
                                     minimum=0.0, exclusive=True)
        if "delay" not in sec:
            _fail(f"{path}.delay", "missing required field")
        h = _as_float(sec["delay"], f"{path}.delay", minimum=0.0, exclusive=True)
        model, analytic = build_example(GeneticNetworkParams(h=h, **kwargs))
        return model, analytic, kind
    if kind == "monomial":
        _check_keys(sec, {"kind", "delay", "weights", "norm_power", "degree",
                          "lyapunov_degree", "domain", "f", "V"}, path)
        for name in ("delay", "weights", "norm_power", "degree", "lyapunov_degree",
                     "f", "V"):
            if name not in sec:
                _fail(f"{path}.{name}", "missing required field")
        weights = _as_float_list(sec["weights"], f"{path}.weights")
        n = len(weights)
        if n < 1:
            _fail(f"{path}.weights", "needs at least one weight")
        domain = sec.get("domain", FULL_SPACE)
        if domain not in (FULL_SPACE, NONNEGATIVE_ORTHANT):
            _fail(f"{path}.domain",
                  f"expected {FULL_SPACE!r} or {NONNEGATIVE_ORTHANT!r}, got {domain!r}")
        try:
            structure = HomogeneousStructure(
                n=n, r=tuple(weights),
                p=_as_float(sec["norm_power"], f"{path}.norm_power", minimum=1.0),
                mu=_as_float(sec["degree"], f"{path}.degree", minimum=0.0, exclusive=True),
                gamma=_as_float(sec["lyapunov_degree"], f"{path}.lyapunov_degree",
                                minimum=0.0, exclusive=True),
            )
        except ValueError as exc:
            _fail(path, str(exc))
        h = _as_float(sec["delay"], f"{path}.delay", minimum=0.0, exclusive=True)
        raw_f = sec["f"]
        if not isinstance(raw_f, (list, tuple)) or len(raw_f) != n:
            _fail(f"{path}.f", f"expected {n} component term lists")
        f_terms = [_parse_terms(comp, n, f"{path}.f[{i}]") for i, comp in enumerate(raw_f)]
        V_terms = _parse_terms(sec["V"], n, f"{path}.V")
        try:
            model = build_monomial_model(structure, h, f_terms, V_terms, domain=domain)
        except ConfigError as exc:
            _fail(path, str(exc))
        return model, None, kind
    _fail(f"{path}.kind",
          f"expected 'builtin-example' or 'monomial', got {kind!r}")


def _parse_overrides(sec: dict, path: str) -> dict:
    _check_keys(sec, set(_CONSTANT_NAMES), path)
    out = {}
    for name, value in sec.items():
        if name in ("m", "beta"):
            out[name] = np.asarray(_as_float_list(value, f"{path}.{name}"), dtype=float)
        elif name in ("eta", "psi"):
            if not isinstance(value, (list, tuple)):
                _fail(f"{path}.{name}", "expected a matrix (list of rows)")
            rows = [_as_float_list(row, f"{path}.{name}[{i}]")
                    for i, row in enumerate(value)]
            out[name] = np.asarray(rows, dtype=float)
        else:
            out[name] = _as_float(value, f"{path}.{name}")
    return out


def _apply_overrides(bc: BoundConstants, overrides: dict) -> BoundConstants:
    if not overrides:
        return bc
    fields = {name: getattr(bc, name) for name in _CONSTANT_NAMES}
    prov = dict(bc.provenance)
    for name, value in overrides.items():
        fields[name] = value
        prov[name] = Provenance("analytic")
    return BoundConstants(provenance=prov, **fields)


def _build_constants(cfg_sec: dict, path: str, model: SystemModel,
                     analytic: Optional[BoundConstants], seed_override: Optional[int],
                     doc_seed: int):
    _check_keys(cfg_sec, {"source", "samples", "pair_grid", "safety", "overrides"}, path)
    source = cfg_sec.get("source", "analytic" if analytic is not None else "sampled")
    if source not in ("analytic", "sampled"):
        _fail(f"{path}.source", f"expected 'analytic' or 'sampled', got {source!r}")
    safety = _as_float(cfg_sec.get("safety", 1.05), f"{path}.safety", minimum=1.0)
    seed = doc_seed if seed_override is None else seed_override
    try:
        grid = SamplingSpec(samples=_as_int(cfg_sec.get("samples", 100_000),
                                            f"{path}.samples", minimum=1),
                            seed=seed,
                            pair_grid=_as_int(cfg_sec.get("pair_grid", 128),
                                              f"{path}.pair_grid", minimum=0))
    except ValueError as exc:
        _fail(path, str(exc))
    overrides = _parse_overrides(_section(cfg_sec, "overrides", path), f"{path}.overrides")
    if source == "analytic":
        if analytic is None and not all(k in overrides for k in _CONSTANT_NAMES):
            _fail(f"{path}.source",
                  "analytic constants exist only for the builtin example; "
                  "monomial systems need source: sampled or a full overrides block")
        base = analytic if analytic is not None else BoundConstants(
            provenance={k: Provenance("analytic") for k in _CONSTANT_NAMES},
            **{k: overrides[k] for k in _CONSTANT_NAMES})
        constants = _apply_overrides(base, overrides if analytic is not None else {})
    else:
        constants = sampled_bound_constants(model, grid, safety=safety,
                                            overrides=overrides)
    return constants, source, grid, safety


def _build_certificate(sec: dict, path: str) -> CertificateOptions:
    _check_keys(sec, {"split", "split_grid", "delta_margin", "alpha", "alpha_grid",
                      "rho_fractions"}, path)
    split = sec.get("split")
    fractions = DEFAULT_SPLIT_FRACTIONS if split is None \
        else _split_fractions(split, f"{path}.split")
    grid = sec.get("split_grid")
    split_grid = None
    if grid is not None:
        if not isinstance(grid, (list, tuple)) or not grid:
            _fail(f"{path}.split_grid", "expected a non-empty list of [f1, f2] pairs")
        split_grid = tuple(_split_fractions(item, f"{path}.split_grid[{i}]")
                           for i, item in enumerate(grid))
    margin = _as_float(sec.get("delta_margin", 0.99), f"{path}.delta_margin",
                       minimum=0.0, exclusive=True, maximum=1.0, max_exclusive=True)
    alpha = sec.get("alpha")
    if alpha is not None:
        alpha = _as_float(alpha, f"{path}.alpha", minimum=1.0, exclusive=True)
    raw_grid = sec.get("alpha_grid")
    if raw_grid is None:
        alpha_grid = DEFAULT_ALPHA_GRID
    else:
        if not isinstance(raw_grid, (list, tuple)) or not raw_grid:
            _fail(f"{path}.alpha_grid", "alpha grid must be a non-empty list")
        alpha_grid = tuple(_as_float(a, f"{path}.alpha_grid[{i}]",
                                     minimum=1.0, exclusive=True)
                           for i, a in enumerate(raw_grid))
    raw_rho = sec.get("rho_fractions")
    if raw_rho is None:
        rho_fractions = DEFAULT_RHO_FRACTIONS
    else:
        if not isinstance(raw_rho, (list, tuple)) or not raw_rho:
            _fail(f"{path}.rho_fractions", "rho fractions must be a non-empty list")
        rho_fractions = tuple(_as_float(f, f"{path}.rho_fractions[{i}]",
                                        minimum=0.0, exclusive=True, maximum=1.0)
                              for i, f in enumerate(raw_rho))
    return CertificateOptions(split_fractions=fractions, split_grid=split_grid,
                              delta_margin=margin, alpha=alpha,
                              alpha_grid=alpha_grid, rho_fractions=rho_fractions)


def _build_history(sec: dict, path: str, h: float, n: int) -> Optional[HistoryFunction]:
    if not sec:
        return None
    _check_keys(sec, {"kind", "value", "values"}, path)
    kind = sec.get("kind", "constant")
    if kind == "constant":
        if "value" not in sec:
            _fail(f"{path}.value", "missing required field")
        value = _as_float_list(sec["value"], f"{path}.value", length=n)
        return HistoryFunction.constant(np.asarray(value), h)
    if kind == "piecewise-linear":
        raw = sec.get("values")
        if not isinstance(raw, (list, tuple)) or len(raw) < 2:
            _fail(f"{path}.values", "expected at least two [..] nodes")
        rows = [_as_float_list(row, f"{path}.values[{i}]", length=n)
                for i, row in enumerate(raw)]
        return HistoryFunction(h=h, values=np.asarray(rows, dtype=float))
    _fail(f"{path}.kind", f"expected 'constant' or 'piecewise-linear', got {kind!r}")


def load_config(path_or_text, seed_override: Optional[int] = None) -> RunConfig:
    """Parse and validate a YAML run configuration.

    `path_or_text` is a filesystem path unless it contains a newline, in
    which case it is taken as the document itself (convenient in tests).
    A --seed flag becomes `seed_override` and wins over the document.
    """
    text = str(path_or_text)
    if "\n" not in text:
        try:
            with open(text, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path_or_text!r}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")

    _check_keys(doc, {"schema_version", "pipeline", "seed", "system", "constants",
                      "certificate", "history", "simulation"}, "config")
    if "schema_version" not in doc:
        _fail("config.schema_version", "missing required field")
    version = _as_int(doc["schema_version"], "config.schema_version")
    if version != SCHEMA_VERSION:
        _fail("config.schema_version", f"unsupported version {version} (expected {SCHEMA_VERSION})")
    pipeline = doc.get("pipeline", "both")
    if pipeline not in PIPELINES:
        _fail("config.pipeline", f"expected one of {PIPELINES}, got {pipeline!r}")
    seed = _as_int(doc.get("seed", 0), "config.seed", minimum=0)

    model, analytic, kind = _build_system(
        _section(doc, "system", "config", required=True), "config.system")
    constants, source, grid, safety = _build_constants(
        _section(doc, "constants", "config"), "config.constants",
        model, analytic, seed_override, seed)
    cert = _build_certificate(_section(doc, "certificate", "config"), "config.certificate")
    history = _build_history(_section(doc, "history", "config"), "config.history",
                             model.h, model.structure.n)

    sim_sec = _section(doc, "simulation", "config")
    _check_keys(sim_sec, {"horizon", "steps_per_delay", "quad_panels"}, "config.simulation")
    horizon = _as_float(sim_sec.get("horizon", 100.0 * model.h),
                        "config.simulation.horizon", minimum=0.0, exclusive=True)
    steps = _as_int(sim_sec.get("steps_per_delay", 256),
                    "config.simulation.steps_per_delay", minimum=8)
    if steps % 2:
        _fail("config.simulation.steps_per_delay", f"must be even, got {steps}")
    quad = sim_sec.get("quad_panels")
    if quad is not None:
        quad = _as_int(quad, "config.simulation.quad_panels", minimum=2)
        if quad % 2:
            _fail("config.simulation.quad_panels", f"must be even, got {quad}")
        if steps % quad:
            _fail("config.simulation.quad_panels",
                  f"must divide steps_per_delay ({steps}), got {quad}")

    return RunConfig(schema_version=version, pipeline=pipeline,
                     seed=seed if seed_override is None else seed_override,
                     system_kind=kind, model=model, constants=constants,
                     analytic_constants=analytic, constants_source=source,
                     sampling=grid, safety=safety, certificate=cert, history=history,
                     horizon=horizon, steps_per_delay=steps, quad_panels=quad)
