"""Exception hierarchy shared across the package.

The CLI maps these onto its exit codes: input problems exit 2,
infeasible models exit 3 and numeric failures exit 4.
"""


class RPTestError(Exception):
    """Base class for all package errors."""


class InvalidDatasetError(RPTestError, ValueError):
    """Observations violate their invariants or cannot be parsed."""


class ContractViolation(RPTestError, ValueError):
    """A caller broke an operation's precondition."""


class DomainError(RPTestError, ValueError):
    """A numeric argument lies outside the operation's domain."""


class InfeasibleBoundsError(RPTestError):
    """Rank bounds admit no permutation."""

    def __init__(self, rank: int, message: str | None = None):
        self.rank = rank
        super().__init__(message or f"no observation can take rank {rank}")


class CapacityError(RPTestError):
    """Exhaustive enumeration would exceed the requested limit."""


class IsolatedNodeError(RPTestError):
    """The degree-biased walk was started on a node with no neighbours."""


class DegenerateNullError(RPTestError):
    """Permutation null has zero variance, so no asymptotic p-value exists."""


class ConvergenceError(RPTestError):
    """Iterative numeric routine failed to reach its tolerance."""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")
