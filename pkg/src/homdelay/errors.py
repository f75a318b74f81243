"""Exception types shared across the package."""


class ConfigError(Exception):
    """Bad run configuration (file, schema, or parameter ranges)."""


class CertificationError(Exception):
    """A certification step failed, e.g. the delay-free system is not
    certified asymptotically stable by the supplied Lyapunov function."""


class InfeasibleCertificateError(CertificationError):
    """No feasible certificate exists for the requested parameters."""


class InternalInconsistencyError(Exception):
    """Two independently computed quantities that must agree do not.

    Raised by built-in cross-checks; indicates a bug, not bad input.
    """


class NumericalFailureError(Exception):
    """Integration or evaluation produced NaN/Inf or failed to converge."""


class DomainViolationError(NumericalFailureError):
    """A trajectory left the declared state domain beyond roundoff."""
