"""Exception types shared across the package."""


class AbflowError(Exception):
    """Base class for all library errors."""


class InvalidParamsError(AbflowError, ValueError):
    """Parameter set violates a documented constraint."""


class SingularPointError(AbflowError, ValueError):
    """Evaluation requested at the vortex core (origin) where the field diverges."""


class InvalidStartError(AbflowError, ValueError):
    """Integration start point lies inside the core exclusion radius."""


class InvalidContourError(AbflowError, ValueError):
    """Quadrature contour passes through the vortex core."""


class HomoclinicNotClosedError(AbflowError, RuntimeError):
    """No traced separatrix branch returned to the saddle within tolerance."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
