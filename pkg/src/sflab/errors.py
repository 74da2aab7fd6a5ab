"""Exception types shared across the package."""


class SflabError(Exception):
    """Base class for all package errors."""


class NonHermitianInput(SflabError):
    """A matrix fed to a Hermitian-only routine exceeds the Hermiticity tolerance."""


class ConvergenceFailure(SflabError):
    """The eigenvalue solver did not converge."""


class InvalidTruncation(SflabError):
    """The Fourier mode truncation is too small to define the operator."""


class TruncationTooTight(SflabError):
    """Gauge degree leaves no edge buffer inside the mode window."""


class NearSingularF(SflabError):
    """A boundary endomorphism is too close to singular to define a splitting."""


class InvalidGauge(SflabError):
    """A gauge symbol fails the unitarity or nonvanishing-determinant check."""


class ConstraintRankFailure(SflabError):
    """Boundary elimination produced a rank-deficient trial space."""


class NonHermitianAssembly(SflabError):
    """An assembled operator violates the Hermiticity invariant."""


class RefinementExhausted(SflabError):
    """Adaptive path refinement hit the sample cap without stabilizing."""


class CutoffOnEigenvalue(SflabError):
    """Spectral projection cutoff sits on (or too near) an eigenvalue."""


class InvalidProjection(SflabError):
    """A matrix meant to be an orthogonal projection is not one to tolerance."""


class WindowNotCalibrated(SflabError):
    """Relative index requested without a valid spectral-window certificate."""


class CrossCheckFailed(SflabError):
    """Two independent computations of the same integer disagree."""


class PhaseJumpTooLarge(SflabError):
    """Adjacent determinant samples differ in phase by too much to unwrap safely."""


class WindingNotInteger(SflabError):
    """Unwrapped total phase does not round cleanly to an integer winding."""


class ConfigError(SflabError):
    """An experiment configuration is malformed or references missing files."""
