"""
Errors raised by the transport solvers

Every solver error derives from TransportError so the management commands
can map solver failures and configuration failures to distinct exit codes.
Problem definitions that break a hard invariant raise Django's
ValidationError from Problem.full_clean(), keyed by field path.
"""


class TransportError(Exception):
    """Base class for all solver errors"""


class DomainError(TransportError, ValueError):
    """Argument outside the domain of the requested operation"""


class DegenerateDenominatorError(DomainError):
    """A layer coefficient denominator underflowed to zero"""

    def __init__(self, layer_index, s):
        self.layer_index = layer_index
        self.s = s
        super().__init__(
            f"Degenerate denominator in layer {layer_index} at s={s!r} "
            "(invalid Laplace variable or pathological parameters)"
        )


class SingularSystemError(TransportError):
    """Linear system is singular or has a zero pivot"""

    def __init__(self, message, s=None):
        self.s = s
        if s is not None:
            message = f"{message} (s={s!r})"
        super().__init__(message)


class InversionOverflowError(TransportError, OverflowError):
    """Laplace-domain sample was not finite"""

    def __init__(self, s, x=None):
        self.s = s
        self.x = x
        where = f" at x={x!r}" if x is not None else ""
        super().__init__(f"Non-finite Laplace-domain concentration{where} for s_k={s!r}")


class QuadratureError(TransportError):
    """Poles/residues of the rational approximation could not be built"""


class GridAlignmentError(TransportError, ValueError):
    """Finite volume grid does not place a node on every interface"""

    def __init__(self, n, suggested_n):
        self.n = n
        self.suggested_n = suggested_n
        super().__init__(
            f"n={n} nodes do not place a node on every interface; try n={suggested_n}"
        )


class IntegrationError(TransportError):
    """Stiff time integrator failed"""


class NonFiniteSolutionError(TransportError):
    """A solution grid contains NaN or Inf values"""


class ConfigError(TransportError):
    """Configuration file or command line could not be interpreted"""

    def __init__(self, message, key_path=None):
        self.key_path = key_path
        if key_path:
            message = f"{key_path}: {message}"
        super().__init__(message)
