"""Exception hierarchy shared by all liehodge modules."""


class LieHodgeError(Exception):
    """Base class for all domain errors raised by this package."""


class ParseError(LieHodgeError):
    """Malformed structure file, Beltrami file, or scalar literal."""


class JacobiError(LieHodgeError):
    """d(d tau^k) != 0 for some coframe element k."""

    def __init__(self, coframe_name: str, detail: str = ""):
        self.coframe_name = coframe_name
        msg = f"d^2 != 0 on coframe element {coframe_name!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class IntegrabilityError(LieHodgeError):
    """Some d tau^k has a nonzero (0,2)-component."""

    def __init__(self, coframe_name: str, component: str = ""):
        self.coframe_name = coframe_name
        msg = f"d of coframe element {coframe_name!r} has a (0,2)-component"
        if component:
            msg += f": {component}"
        super().__init__(msg)


class UnknownBuiltin(LieHodgeError):
    """Requested builtin presentation name is not shipped."""


class PresentationMismatch(LieHodgeError):
    """Operands built over different presentations."""


class SingularOperator(LieHodgeError):
    """A coframe operator inverse was requested but det = 0."""


class SingularFrame(LieHodgeError):
    """det(1 - phibar . phi) = 0: the deformed frame is degenerate."""


class NotIntegrable(LieHodgeError):
    """Beltrami differential fails dbar(phi) = (1/2)[phi, phi]."""

    def __init__(self, defect):
        self.defect = defect
        super().__init__(f"integrability defect dbar(phi) - (1/2)[phi,phi] = {defect}")


class DegreeMismatch(LieHodgeError):
    """Form bidegrees incompatible with the requested operation."""


class NotCocycle(LieHodgeError):
    """Input form fails the closedness required for a cohomology class."""


class InvalidArrow(LieHodgeError):
    """Requested comparison map is not one of the five diagram arrows."""


class NotSolvable(LieHodgeError):
    """A canonical equation has no solution; carries the obstruction."""

    def __init__(self, message: str, obstruction=None):
        self.obstruction = obstruction
        super().__init__(message)


class HypothesisFailed(LieHodgeError):
    """A mode-specific solvability hypothesis does not hold."""

    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"hypothesis {condition} does not hold on this presentation")
