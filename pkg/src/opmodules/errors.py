"""Exception hierarchy shared by every layer of the package."""


class OpModulesError(Exception):
    """Base class for all errors raised by this package."""


class InputError(OpModulesError, ValueError):
    """Malformed numerical input (non-finite entries, bad shapes)."""


class DimensionError(InputError):
    """Operands whose dimensions do not line up."""


class AlgebraError(OpModulesError):
    """A basis that does not define a unital algebra."""


class UnsupportedError(OpModulesError):
    """An operation that needs structure the object does not carry."""


class ModuleAxiomError(OpModulesError):
    """A module or morphism failing one of its defining identities.

    ``axiom`` names the identity that failed.
    """

    def __init__(self, axiom, message):
        super().__init__(f"{axiom}: {message}")
        self.axiom = axiom


class NotAdmissibleError(OpModulesError):
    """A factorization whose pieces fall outside the requested exact structure."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SearchFailedError(OpModulesError):
    """An optimizer or enumeration that exhausted its budget."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log or []


class DefinitionError(OpModulesError):
    """A definition file that cannot be parsed or validated."""

    def __init__(self, message, location=None):
        prefix = f"{location}: " if location else ""
        super().__init__(prefix + message)
        self.location = location
