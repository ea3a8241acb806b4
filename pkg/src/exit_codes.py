import os

from tma_exception import OutputException, ValidationException, VerificationFailureException


class ExitCodes:
    """Maps exceptions to process exit codes"""

    SUCCESS = 0
    VALIDATION_ERROR = 1
    VERIFICATION_FAILURE = 2
    IO_ERROR = 3
    UNEXPECTED = os.EX_SOFTWARE if hasattr(os, "EX_SOFTWARE") else 70

    @staticmethod
    def exception_to_exit_code(exception: BaseException) -> int:
        match exception:
            case ValidationException():
                return ExitCodes.VALIDATION_ERROR
            case VerificationFailureException():
                return ExitCodes.VERIFICATION_FAILURE
            case OutputException() | OSError():
                return ExitCodes.IO_ERROR
            case _:
                return ExitCodes.UNEXPECTED
