"""Exception hierarchy shared by all spinweb modules.

The CLI maps these onto process exit codes: ParameterError (and its
subclasses) to 2, ContractError to 3, FormatError and OSError to 4.
"""


class ParameterError(ValueError):
    """A parameter is outside its documented domain."""


class VariantError(ParameterError):
    """An operation was invoked on an unsupported disorder variant."""


class ContractError(RuntimeError):
    """A runtime precondition or invariant between modules was violated."""


class FormatError(ValueError):
    """An input file does not conform to its documented format."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no
