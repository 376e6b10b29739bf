"""Exceptions raised by sgdc.

Every error knows how it should surface: `exit_code` is what the CLI returns,
`status_code` is what the HTTP service responds with.
"""


class SgdcError(Exception):
    exit_code = 2
    status_code = 422


class InvalidParameterError(SgdcError, ValueError):
    "A scalar or vector parameter lies outside its admissible range"

    exit_code = 1
    status_code = 400


class ConfigError(SgdcError, ValueError):
    "A solver, experiment or CLI configuration is inconsistent"

    exit_code = 1
    status_code = 400


class UnsupportedConfigurationError(SgdcError):
    "The combination of loss, groups and box has no supported treatment"

    exit_code = 1
    status_code = 400


class WrongDispatchError(SgdcError):
    "A closed-form subproblem solver was called for the wrong norm selector"


class ContractViolationError(SgdcError):
    "An internal invariant did not hold"


class EvaluationError(SgdcError, ArithmeticError):
    "A loss could not be evaluated in floating point"

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class LsInvalidError(SgdcError):
    "The line search exceeded its iteration bound; the smoothness constant is wrong"


class OracleRefusedError(SgdcError):
    "A brute-force oracle was asked to handle a problem that is too large"

    exit_code = 1
    status_code = 400
