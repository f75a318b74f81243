"""Certified attraction regions and decay envelopes for
weighted-homogeneous time-delay systems.

The library computes, for a constant-delay system whose right-hand side
is homogeneous under a weighted dilation, an explicit radius of
attraction in the homogeneous sup norm together with a pointwise decay
envelope — and then verifies every bound it claims along simulated
trajectories.
"""

__version__ = "0.1.0"

from .errors import (
    CertificationError,
    ConfigError,
    DomainViolationError,
    InfeasibleCertificateError,
    InternalInconsistencyError,
    NumericalFailureError,
)
from .homogeneity import (
    FULL_SPACE,
    NONNEGATIVE_ORTHANT,
    BoundConstants,
    HomogeneousStructure,
    HomogeneityReport,
    Provenance,
    SamplingSpec,
    SystemModel,
    check_homogeneity,
    dilate,
    hom_norm,
    sampled_bound_constants,
)
from .functional import (
    CLASSICAL,
    RAZUMIKHIN,
    FunctionalCertificate,
    HistoryFunction,
    build_functional_certificate,
    check_functional_bounds,
    default_split,
    eval_functional,
    trajectory_values,
)
from .sim import Trajectory, check_envelope, envelope_values, integrate
from .estimates import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_RHO_FRACTIONS,
    EstimateCertificate,
    certify_classical,
    certify_razumikhin,
    check_comparison_lemmas,
    comparison_solution,
    search_alpha_rho,
)
from .genetic import GeneticNetworkParams, Scenario, build_example, figure1_scenario
from .monomial import Monomial, build_monomial_model
from .config import RunConfig, load_config, resolve_split

__all__ = [
    "__version__",
    "BoundConstants",
    "CLASSICAL",
    "CertificationError",
    "ConfigError",
    "DEFAULT_ALPHA_GRID",
    "DEFAULT_RHO_FRACTIONS",
    "DomainViolationError",
    "EstimateCertificate",
    "FULL_SPACE",
    "FunctionalCertificate",
    "GeneticNetworkParams",
    "HistoryFunction",
    "HomogeneityReport",
    "HomogeneousStructure",
    "InfeasibleCertificateError",
    "InternalInconsistencyError",
    "Monomial",
    "NONNEGATIVE_ORTHANT",
    "NumericalFailureError",
    "Provenance",
    "RAZUMIKHIN",
    "RunConfig",
    "SamplingSpec",
    "Scenario",
    "SystemModel",
    "Trajectory",
    "build_example",
    "build_functional_certificate",
    "build_monomial_model",
    "certify_classical",
    "certify_razumikhin",
    "check_comparison_lemmas",
    "check_envelope",
    "check_functional_bounds",
    "check_homogeneity",
    "comparison_solution",
    "default_split",
    "dilate",
    "envelope_values",
    "eval_functional",
    "figure1_scenario",
    "hom_norm",
    "integrate",
    "load_config",
    "resolve_split",
    "sampled_bound_constants",
    "search_alpha_rho",
    "trajectory_values",
]
