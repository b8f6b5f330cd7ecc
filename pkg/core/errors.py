"""
Exception Hierarchy
Errors raised by the simulator, grouped by how the CLI reports them
"""

from typing import FrozenSet, List, Optional


class SimulationError(Exception):
    """Base class for every error raised by this package"""


class ConfigError(SimulationError):
    """Invalid or unreadable run configuration"""

    def __init__(self, message: str, problems: Optional[List[str]] = None):
        self.problems = list(problems or [])
        if self.problems:
            message = message + "\n  - " + "\n  - ".join(self.problems)
        super().__init__(message)


class ExpressionError(SimulationError):
    """Base class for coefficient expression errors"""


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text"""

    def __init__(self, message: str, offset: int, expected: FrozenSet[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class UnknownIdentifierError(ExpressionError):
    """Identifier that is neither a variable, a constant nor a function"""

    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"Unknown identifier '{name}' at byte {offset}")


class ExpressionDomainError(ExpressionError):
    """Division by zero or a non-integer power of a non-positive base"""

    def __init__(self, message: str, index: Optional[int] = None):
        self.index = index
        if index is not None:
            message = f"{message} at vertex index {index}"
        super().__init__(message)


class CoefficientError(SimulationError):
    """Sampled coefficient violates its sign requirement"""


class NumericalError(SimulationError):
    """Base class for failures of the numerical machinery"""


class DtGuardError(NumericalError):
    """Time step too large for the linearized step matrix to stay definite"""

    def __init__(self, message: str, max_dt: float):
        self.max_dt = max_dt
        super().__init__(f"{message}; maximal admissible dt = {max_dt:.6g}")


class ConvergenceError(NumericalError):
    """Iterative method did not reach its tolerance"""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")


class PositivityError(NumericalError):
    """Density went negative beyond round-off"""


class StabilityBoundError(NumericalError):
    """Explicit step violates its diffusion stability bound"""


class SingularMatrixError(NumericalError):
    """Dense solve hit a zero pivot"""


class StepError(NumericalError):
    """Failure inside a simulation step, tagged with where it happened"""

    def __init__(self, step: int, t: float, cause: SimulationError):
        self.step = step
        self.t = t
        self.cause = cause
        super().__init__(f"Step {step} (t = {t:.6g}) failed: {cause}")


class AnalysisError(SimulationError):
    """Analysis request that cannot be answered for the given inputs"""
