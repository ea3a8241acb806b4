import functools
import numbers

import structlog


class Decorators:

    @staticmethod
    def _is_scalar(arg) -> bool:
        return isinstance(arg, (numbers.Number, str)) and not isinstance(arg, complex)

    @staticmethod
    def _scalar_args(args) -> list:
        return [arg for arg in args if Decorators._is_scalar(arg)]

    @staticmethod
    def add_command_to_logging_context(func):
        """Binds the CLI command, taken from the function name, for everything logged underneath it"""

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with structlog.contextvars.bound_contextvars(command=func.__name__.removeprefix("cmd_")):
                return func(*args, **kwargs)

        return wrapper

    @staticmethod
    def log_invocation_with_scalar_args(func):
        """Limit the logging to scalar arguments so we don't overwhelm the logger with sample arrays"""

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with structlog.contextvars.bound_contextvars(function_name=func.__name__):
                logger = structlog.getLogger(func.__qualname__.split(".")[0])
                scalar_kwargs = {k: v for k, v in kwargs.items() if Decorators._is_scalar(v)}
                logger.debug(func.__name__, scalar_args=Decorators._scalar_args(args), **scalar_kwargs)
                return func(*args, **kwargs)

        return wrapper
