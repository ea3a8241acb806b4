import functools
import math
import numbers

import structlog

from exit_codes import ExitCodes
from tma_exception import (
    DelayOutOfRangeException,
    IndexOutOfRangeException,
    NonPositiveParameterException,
    TaperOutOfRangeException,
    TmaException,
)


class TmaValidation:

    @staticmethod
    def customize_exit_code_based_on_exception_type(func):
        """
        Known-exception types are mapped to their exit code.
        Unknown exceptions are logged with exception info and a generic exit code is returned.
        """

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger = structlog.getLogger(TmaValidation.__name__)
            try:
                return func(*args, **kwargs)
            except TmaException as tma_exception:
                exit_code = ExitCodes.exception_to_exit_code(tma_exception)
                logger.error(tma_exception.message, invariant=tma_exception.invariant, exception_type=type(tma_exception).__name__, exit_code=exit_code)
                return exit_code
            except OSError as os_error:
                logger.error("I/O failure", error=str(os_error), exit_code=ExitCodes.IO_ERROR)
                return ExitCodes.IO_ERROR
            except:
                logger.exception("Unknown exception", exc_info=True)
                return ExitCodes.UNEXPECTED

        return wrapper

    @staticmethod
    def is_integer(value) -> bool:
        return isinstance(value, numbers.Integral) and not isinstance(value, bool)

    @staticmethod
    def check_positive_int(name: str, value, minimum: int = 1) -> int:
        if not TmaValidation.is_integer(value):
            raise NonPositiveParameterException(f"{name} must be an integer, got {value!r}", invariant=f"{name} is an integer")
        if value < minimum:
            raise NonPositiveParameterException(f"{name} must be at least {minimum}, got {value}", invariant=f"{name} >= {minimum}")
        return int(value)

    @staticmethod
    def check_positive_real(name: str, value) -> float:
        if isinstance(value, bool) or not isinstance(value, numbers.Real) or not math.isfinite(value) or value <= 0:
            raise NonPositiveParameterException(f"{name} must be a positive finite number, got {value!r}", invariant=f"{name} > 0")
        return float(value)

    @staticmethod
    def check_index(name: str, value, upper: int) -> int:
        """Require 0 <= value < upper"""
        if not TmaValidation.is_integer(value) or not 0 <= value < upper:
            raise IndexOutOfRangeException(f"{name}={value!r} is outside [0, {upper})", invariant=f"0 <= {name} < {upper}")
        return int(value)

    @staticmethod
    def check_delay(d, num_delays: int) -> int:
        if not TmaValidation.is_integer(d) or not 0 <= d < num_delays:
            raise DelayOutOfRangeException(f"Delay {d!r} is outside [0, {num_delays})", invariant=f"0 <= d < D={num_delays}")
        return int(d)

    @staticmethod
    def check_taper(level, o_tau: int) -> int:
        if not TmaValidation.is_integer(level) or not 0 <= level <= o_tau:
            raise TaperOutOfRangeException(f"Taper level {level!r} is outside [0, {o_tau}]", invariant=f"0 <= l <= O_tau={o_tau}")
        return int(level)
