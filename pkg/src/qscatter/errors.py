"""Exception types raised by the physics and matrix layers.

Class names follow the condition they report so the CLI can print them
verbatim (``EqualMomenta``, ``Undefined``, ...).
"""


class QScatterError(Exception):
    """Base class for every error raised by qscatter."""


class ComputationError(QScatterError):
    """A well-formed request that has no finite answer (CLI exit 1)."""


class InputError(QScatterError, ValueError):
    """Invalid parameters or arguments (CLI exit 2)."""


# cxmat
class DimensionMismatch(InputError):
    pass


class NonFinite(ComputationError):
    pass


class SingularMatrix(ComputationError):
    pass


# scattering
class NonPositiveMomentum(InputError):
    pass


class AtPole(ComputationError):
    pass


class NoConvergence(ComputationError):
    pass


class DerivativeVanished(ComputationError):
    pass


class NoSignChange(ComputationError):
    pass


# twobody
class EqualMomenta(ComputationError, ValueError):
    """Identical fermion momenta: the input state is null (a physics error, exit 1)."""


class SingularReflection(ComputationError):
    pass


class ZeroNorm(ComputationError):
    pass


class Undefined(ComputationError):
    pass


class BelowThreshold(ComputationError):
    pass


class EmptySector(ComputationError):
    def __init__(self, sector, norm):
        super().__init__(f"sector {sector} is empty (norm {norm:.3g})")
        self.sector = sector
        self.norm = norm
