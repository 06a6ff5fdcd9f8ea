"""Exception types raised across the package."""


class BellDiscError(Exception):
    """Base class for all package errors."""


class CapacityError(BellDiscError):
    """Photon number or mode count outside the supported range."""


class ShapeError(BellDiscError):
    """Matrix dimensions do not match the bound mode list."""


class ParameterError(BellDiscError, ValueError):
    """Element or protocol parameter outside its domain."""


class BindingError(BellDiscError):
    """Element bound to an inconsistent set of modes."""


class RoutingError(BellDiscError):
    """A photon reached an element with no rule for its labels."""


class ContractError(BellDiscError):
    """An element precondition on the incoming state was violated."""


class SpecError(BellDiscError):
    """A final-state mode cannot be mapped to a detector."""


class InputError(BellDiscError, ValueError):
    """Malformed analysis inputs (duplicate ids, bad priors)."""


class DomainError(BellDiscError, ValueError):
    """A closed-form formula evaluated outside its stated domain."""


class ParseError(BellDiscError, ValueError):
    """Circuit document failed schema validation.

    The ``path`` attribute holds a JSON-pointer-like location of the fault.
    """

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
