"""Exception types shared across the package.

Every error carries a stable ``code`` string so CLI reports and callers can
dispatch on it without matching message text.
"""


class CollapselabError(Exception):
    code = "ERROR"


class LetterOutOfRangeError(CollapselabError):
    code = "LETTER_OUT_OF_RANGE"


class NotFoundWithinCapError(CollapselabError):
    """Element not reachable within the requested search radius; raise the cap."""

    code = "NOT_FOUND_WITHIN_CAP"


class BallTooLargeError(CollapselabError):
    code = "BALL_TOO_LARGE"


class BackendMismatchError(CollapselabError):
    code = "BACKEND_MISMATCH"


class BackendUnsupportedError(CollapselabError):
    code = "BACKEND_UNSUPPORTED"


class InconsistentOracleError(CollapselabError):
    code = "INCONSISTENT_ORACLE"


class SearchExhaustedError(CollapselabError):
    code = "SEARCH_EXHAUSTED"


class MembershipViolationError(CollapselabError):
    code = "MEMBERSHIP_VIOLATION"


class NotNormalError(CollapselabError):
    code = "NOT_NORMAL"


class StepCapExceededError(CollapselabError):
    code = "STEP_CAP_EXCEEDED"


class SelectionFailedError(CollapselabError):
    code = "SELECTION_FAILED"


class DecompositionFailedError(CollapselabError):
    code = "DECOMPOSITION_FAILED"


class CapExceededError(CollapselabError):
    code = "CAP_EXCEEDED"


class InputFormatError(CollapselabError):
    code = "INPUT_FORMAT"
