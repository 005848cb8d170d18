"""Exception taxonomy shared by the library and the CLI.

The CLI maps these onto exit codes: schema/structural problems exit 2,
numerical failures exit 3, resource-cap violations exit 4.
"""


class SoficLabError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(SoficLabError, ValueError):
    """Ill-formed inputs: mismatched groups, bad payloads, window violations."""


class SchemaError(SoficLabError, ValueError):
    """Config files that fail schema or cross-field validation."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class NumericalError(SoficLabError, ArithmeticError):
    """Numerical failure: eigensolve breakdown, tolerance violations."""


class ResourceCapError(SoficLabError):
    """Requested degree or trial count exceeds the desk-scale caps."""
