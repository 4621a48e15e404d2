"""Exception types raised by the allocation package."""


class ParameterError(ValueError):
    """An argument is out of its documented domain."""


class ContractError(ValueError):
    """A caller violated an operation's precondition (e.g. relaying where the split is unrealizable)."""


class IntegrityError(RuntimeError):
    """A stored result disagrees with its recomputation."""


class OracleLimitError(ParameterError):
    """The exhaustive search was asked for more subcarriers than it is allowed to enumerate."""
