"""Exception types for the toolkit.

Every failure mode that callers are expected to branch on gets its own
class; all inherit from GibbsDimError so CLI entry points can map them
to exit codes in one place.
"""


class GibbsDimError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(GibbsDimError):
    """Invalid or unparseable experiment configuration (CLI exit 2)."""


class AdmissibilityError(GibbsDimError):
    """Potential fails the admissibility margin test (CLI exit 3)."""


class NonConvergent(GibbsDimError):
    """An iterative scheme failed to reach its tolerance (CLI exit 4)."""


# map layer

class NotAttracting(GibbsDimError):
    """No attracting fixed point of z^2 + c exists (|1 +- sqrt(1-4c)| >= 1)."""


class Superattracting(GibbsDimError):
    """The attracting fixed point is superattracting (|2 p0| below threshold)."""


class ConeCollapse(GibbsDimError):
    """Stable/unstable cone iteration failed to separate directions."""


class CriticalOnSet(GibbsDimError):
    """The critical set of the map meets the constructed basic set."""


# basic-set layer

class NotOnBasicSet(GibbsDimError):
    """Point fails basic-set membership where membership is required."""


class DepthInsufficient(GibbsDimError):
    """Prehistory depth too small for the requested realization tolerance."""


class AmbiguousMembership(GibbsDimError):
    """A preimage candidate sits within a factor 2 of the membership
    boundary, so its count cannot be certified at this tolerance."""

    def __init__(self, message, count_strict=None, count_loose=None):
        super().__init__(message)
        self.count_strict = count_strict
        self.count_loose = count_loose


# symbolic layer

class NewtonDiverged(NonConvergent):
    """Damped Newton failed to converge to a periodic point."""


class PeriodTooLarge(GibbsDimError):
    """Requested period exceeds the enumeration bound."""


# thermodynamic layer

class NotBaseOnly(GibbsDimError):
    """Transfer-operator pressure asked for a potential with fiber dependence."""


class SignViolation(GibbsDimError):
    """Lyapunov exponents violate chi_s < 0 < chi_u."""


# dimension layer

class NotNormalized(GibbsDimError):
    """Gibbs model is not normalized (P(phi_bar) != log d')."""


class DegenerateExponents(GibbsDimError):
    """A Lyapunov exponent is too close to zero for the dimension formula."""


class InsufficientSamples(GibbsDimError):
    """A Monte Carlo ball collected fewer than the minimum sample count."""


class InconsistentCount(GibbsDimError):
    """Sampled preimage counts are non-constant (classify falls back to the
    lower-bound report instead of raising; this class exists for callers
    that want to force the strict path)."""
