"""Exception hierarchy shared by all modules."""


class LinforestError(Exception):
    pass


class ParameterError(LinforestError, ValueError):
    """Bad argument values (parity, ranges, sizes)."""


class ContractError(LinforestError, ValueError):
    """An input violates an operation's precondition (e.g. a non-regular graph)."""


class RetryableError(LinforestError, RuntimeError):
    """A randomized procedure ran out of budget; a fresh seed may succeed."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


class ResampleBudgetExceeded(RetryableError):
    pass


class NibbleFailure(RetryableError):
    pass


class InfeasibleError(LinforestError):
    """A flow-based construction is infeasible; ``witness`` carries the certificate."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
