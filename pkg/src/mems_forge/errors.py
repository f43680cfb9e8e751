"""Exception hierarchy.

Contract violations (bad inputs, unsupported configurations) derive from
``ValueError``; numerical failures derive from ``ArithmeticError``. The CLI
maps the first family to exit code 2 and the second to exit code 3.
"""


class MemsForgeError(Exception):
    pass


class ContractError(MemsForgeError, ValueError):
    """An input violates a documented precondition."""


class ShapeError(ContractError):
    pass


class DomainError(ContractError):
    pass


class ParameterError(ContractError):
    pass


class UnsupportedConfigurationError(ContractError):
    pass


class NumericalError(MemsForgeError, ArithmeticError):
    """A computation failed to converge or lost accuracy."""


class NotPSDError(NumericalError):
    pass


class IntegrationError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class TruncationError(NumericalError):
    pass
