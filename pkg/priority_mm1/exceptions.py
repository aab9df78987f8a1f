class QueueingError(Exception):
    """A generic exception for all others to extend."""

    pass


class ParameterError(QueueingError, ValueError):
    """Raised when model parameters are outside their domain."""

    pass


class StabilityError(ParameterError):
    def __init__(self, rho, operation=None):
        """Raised when a stationary quantity is requested for ``rho >= 1``.

        :param rho: The offending traffic intensity.
        :param operation: The name of the refused operation (if known).
        """
        self.rho = rho
        self.operation = operation
        super().__init__(str(self))

    def __str__(self):
        s = f"unstable system: rho = {self.rho:.9g} (stationary analysis needs rho < 1)"
        if self.operation is not None:
            s = f"{self.operation}: {s}"
        return s


class DomainError(QueueingError, ValueError):
    """Raised when a function argument lies outside the domain it is defined on."""

    pass


class ConfigurationError(QueueingError):
    """Raised when there is a misconfiguration of a truncation, simulation or
    command line run."""

    pass


class TruncationError(QueueingError):
    def __init__(self, message, tail_mass=None, n1_max=None, n2_max=None):
        """Raised when automatic truncation cannot meet its tail target.

        :param message: A human readable description.
        :param tail_mass: The boundary mass of the last solved truncation.
        :param n1_max: The class-1 cap of the last solved truncation.
        :param n2_max: The class-2 cap of the last solved truncation.
        """
        self.message = message
        self.tail_mass = tail_mass
        self.n1_max = n1_max
        self.n2_max = n2_max
        super().__init__(message)

    def __str__(self):
        s = self.message
        if self.tail_mass is not None:
            s += f" (tail_mass={self.tail_mass:.3g}, caps={self.n1_max}x{self.n2_max})"
        return s


class SolverError(QueueingError):
    def __init__(self, message, diagnostics=None):
        """Raised when the stationary solve fails.

        :param message: A human readable description.
        :param diagnostics: A dict of solver facts (method, states, residual...).
        """
        self.message = message
        self.diagnostics = diagnostics or {}
        super().__init__(message)

    def __str__(self):
        if not self.diagnostics:
            return self.message
        details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        return f"{self.message} [{details}]"


class EngineError(QueueingError):
    def __init__(self, error, engine=None, params=None):
        """A wrapper for errors thrown by one of the engines during validation.

        :param error: The underlying error that occurred.
        :param engine: The engine name ("analytic", "ctmc" or "sim").
        :param params: The model parameters being evaluated (if obtainable).
        """
        self.error = error
        self.engine = engine
        self.params = params

    def __str__(self):
        s = ""
        if self.engine is not None:
            s += f"{self.engine}: "
        s += f"{self.error}"
        if self.params is not None:
            s += f" ({self.params})"
        return s


class FieldError(QueueingError):
    """Raised when an export field is misconfigured."""

    pass
