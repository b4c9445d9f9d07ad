"""Exception types shared across the package."""


class BslError(Exception):
    """Base class for every error raised by this package."""


class DomainTooSmall(BslError):
    """Truncated domain does not hold the required probability mass."""


class Unnormalized(BslError):
    """A normalized density was required but the input is not normalized."""


class UnsupportedRepresentation(BslError):
    """The distribution representation is not valid for this operation."""


class DomainMismatch(BslError):
    """Inputs live on incompatible domains."""


class NonFinite(BslError):
    """A computation produced (or received) a NaN or infinity."""


class UnboundedConstant(BslError):
    """A system constant diverges under grid refinement."""


class ZeroEvidence(BslError):
    """Evidence fell below the admissibility floor; prior is inadmissible."""


class DegenerateVariance(BslError):
    """A Gaussian variance is zero or negative."""


class MissingConstant(BslError):
    """A Lipschitz-type constant needed for this metric is unavailable."""


class AllWeightsZero(BslError):
    """Every particle weight vanished; inadmissibility at particle resolution."""


class VacuousBound(BslError):
    """Bound inputs make the certificate vacuous (negative sqrt argument)."""


class MissingD(BslError):
    """Domain diameter required for a Wasserstein bound was not supplied."""


class IOFailure(BslError):
    """Writing an output artifact failed."""
