"""Exception hierarchy shared by all modules.

Every error a caller is expected to handle derives from :class:`WalkConvError`
(itself a ``ValueError``), which is what the command line maps to exit code 1.
"""


class WalkConvError(ValueError):
    pass


class ParseError(WalkConvError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ValidationError(WalkConvError):
    pass


class NotIrreducibleError(ValidationError):
    pass


class UnsupportedOperationError(WalkConvError):
    pass


class ConfigError(WalkConvError):
    pass


class TrainingDivergedError(WalkConvError):
    def __init__(self, iteration):
        super().__init__(f"objective became non-finite at iteration {iteration}")
        self.iteration = iteration
