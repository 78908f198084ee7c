"""Exception hierarchy shared by every module.

The CLI maps these onto process exit codes, so the distinctions matter:
schema problems (malformed input), precondition violations (well-formed input
that a contract rejects), undecided comparisons at the precision cap, and
resource blowups are four different failure modes and are never conflated.
"""


class CousinlabError(Exception):
    """Base class for all package errors."""


class SchemaError(CousinlabError):
    """Malformed or non-exact input (bad JSON shape, float where a rational
    string is required, unknown kind tag)."""

    exit_code = 2


class PreconditionError(CousinlabError):
    """Structurally valid input rejected by an operation's contract."""

    exit_code = 3


class PrecisionExhausted(CousinlabError):
    """A certified comparison stayed undecided at the adaptive precision cap.

    Carries the cap that was reached.  Raising this is always preferred to
    guessing a sign from a small interval.
    """

    exit_code = 4

    def __init__(self, message, cap_bits=None):
        super().__init__(message)
        self.cap_bits = cap_bits


class ResourceLimit(CousinlabError):
    """Configured degree/height/size limit exceeded before an answer."""

    exit_code = 5
