"""Exception types raised by spinpulse.

Every failure mode that callers are expected to handle gets its own class so
that sweep drivers can report row-level statuses by exception name.
"""


class SpinPulseError(Exception):
    """Base class for all spinpulse errors."""


class NotHermitian(SpinPulseError):
    """A matrix required to be Hermitian is not, within tolerance."""


class NotTraceless(SpinPulseError):
    """A matrix required to be traceless is not, within tolerance."""


class NotUnitary(SpinPulseError):
    """A matrix required to be unitary is not, within tolerance."""


class BranchAmbiguous(SpinPulseError):
    """An eigenphase cannot be assigned to a logarithm branch safely."""


class LambdaOutOfRange(SpinPulseError):
    """A pulse strength lies outside the supported open interval."""


class NonPositiveReference(SpinPulseError):
    """A reference pulse height or width is not strictly positive."""


class OutOfTable(SpinPulseError):
    """A tabulated pulse was evaluated outside its time domain."""


class NoConvergence(SpinPulseError):
    """Step doubling hit the step cap without meeting the tolerance."""


class UnitarityLost(SpinPulseError):
    """A propagated gate failed the unitarity check even after repair."""


class ResonantLambda(SpinPulseError):
    """A pulse strength sits inside the resonance guard of a quadrature."""


class QuadratureNoConvergence(SpinPulseError):
    """Gauss-Legendre refinement hit its order cap without converging."""


class BetaTooLarge(SpinPulseError):
    """A mean first-order vector is too large for the local rotation."""


class NonSymmetricResidual(SpinPulseError):
    """Frame rotation was requested for a gate with one-body terms."""


class IsotropicCoefficientAnomalous(SpinPulseError):
    """An extracted generator is far from the expected isotropic form."""


class ConfigError(SpinPulseError):
    """An experiment configuration is malformed or inconsistent."""
