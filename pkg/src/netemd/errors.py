"""Exception hierarchy.

Every error carries the CLI exit code it maps to (2 usage, 3 data, 4 capability).
"""


class NetEmdError(Exception):
    exit_code = 3


class ParseError(NetEmdError, ValueError):
    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class DomainError(NetEmdError, ValueError):
    pass


class CalibrationError(NetEmdError, RuntimeError):
    def __init__(self, message, achieved_degree=None):
        super().__init__(message)
        self.achieved_degree = achieved_degree


class CapabilityError(NetEmdError):
    exit_code = 4


class UsageError(NetEmdError):
    exit_code = 2
