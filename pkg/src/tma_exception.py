class TmaException(Exception):
    def __init__(self, message: str | None = None, invariant: str | None = None):
        super().__init__()
        if message:
            self.message = message
        else:
            self.message = self.default_message
        self.invariant = invariant
        """Name of the violated invariant, if there is one"""

    def __str__(self) -> str:
        return self.message

    @property
    def default_message(self) -> str:
        return "TMA simulation error"


class ValidationException(TmaException):
    """Input rejected before any computation"""

    @property
    def default_message(self) -> str:
        return "Invalid input"


class NonPositiveParameterException(ValidationException):

    @property
    def default_message(self) -> str:
        return "Parameter must be positive"


class PhaseCountTooSmallException(ValidationException):
    """N < 2"""

    @property
    def default_message(self) -> str:
        return "At least two phase states are required"


class ParameterOutOfRangeException(ValidationException):

    @property
    def default_message(self) -> str:
        return "Parameter out of range"


class IndexOutOfRangeException(ParameterOutOfRangeException):

    @property
    def default_message(self) -> str:
        return "Index out of range"


class DelayOutOfRangeException(ParameterOutOfRangeException):
    """d outside [0, D)"""

    @property
    def default_message(self) -> str:
        return "Delay out of range"


class TaperOutOfRangeException(ParameterOutOfRangeException):
    """l outside [0, O_tau]"""

    @property
    def default_message(self) -> str:
        return "Taper level out of range"


class RateMismatchException(ValidationException):

    @property
    def default_message(self) -> str:
        return "Sample rate is not compatible with the switch rate"


class InvalidGridException(ValidationException):

    @property
    def default_message(self) -> str:
        return "Invalid angle grid"


class NoTaperLevelsException(ValidationException):
    """O_tau < 2 leaves no intermediate taper level"""

    @property
    def default_message(self) -> str:
        return "No intermediate taper levels"


class InvalidConfigException(ValidationException):

    @property
    def default_message(self) -> str:
        return "Invalid configuration"


class VerificationFailureException(TmaException):

    @property
    def default_message(self) -> str:
        return "Verification failed"


class OutputException(TmaException):
    """Writing an artifact failed"""

    @property
    def default_message(self) -> str:
        return "Unable to write output"
