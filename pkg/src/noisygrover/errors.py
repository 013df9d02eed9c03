"""Exception hierarchy for the noisygrover package.

Everything raised on purpose derives from NoisyGroverError so callers can
catch one type at the CLI boundary. Precondition violations on plain bad
input raise ConfigError; numerical failures get their own leaf types.
"""

from __future__ import annotations


class NoisyGroverError(Exception):
    """Base class for all package errors."""


class ConfigError(NoisyGroverError):
    """Invalid parameter, config file entry, or command-line value."""


class OracleSizeError(NoisyGroverError):
    """Full-matrix oracle requested for a state too large to materialize."""


class DegenerateStateError(NoisyGroverError):
    """State norm collapsed below the representable floor; cannot renormalize."""


class SigmaCeilingError(NoisyGroverError):
    """Noise ladder walked past the ceiling without crossing the threshold."""


class FitError(NoisyGroverError):
    """Base class for fitting failures."""


class FitDomainError(FitError):
    """Fit input outside the model domain (non-positive x or y for log fits)."""


class FitRankError(FitError):
    """Design matrix is rank deficient; parameters are not identifiable."""


class FitBoundaryError(FitError):
    """Best exponent landed on the scan boundary; result would be untrusted."""
