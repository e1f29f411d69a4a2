"""
Exception hierarchy for euclidprefs.

All library errors derive from EuclidPrefsError so callers (and the CLI)
can catch one type. Most also derive from a built-in type that matches
their meaning, so `except ValueError` keeps working for input problems.
"""


class EuclidPrefsError(Exception):
    """Base class for every error raised by euclidprefs."""


# =============================================================================
# .soc INGESTION
# =============================================================================

class SocFormatError(EuclidPrefsError, ValueError):
    """A .soc document could not be turned into an election."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)


class TieOrIncomplete(SocFormatError):
    """A ranking omits or repeats a candidate, or contains a tie."""


class Malformed(SocFormatError):
    """A line does not follow the .soc grammar."""


# =============================================================================
# ELECTION OPERATIONS
# =============================================================================

class ElectionError(EuclidPrefsError, ValueError):
    """An operation received an election or argument it cannot work on."""


class EmptyKeep(ElectionError):
    """restrict() was asked to keep no candidates."""


class MismatchedUniverse(ElectionError):
    """Two votes (or a vote and an election) range over different candidates."""


class EmptySubset(ElectionError):
    """A voter subset is empty where a nonempty one is required."""


class EqualVotes(ElectionError):
    """Two votes that must differ are equal."""


class TooFewVoters(ElectionError):
    """The election has fewer distinct votes than the operation needs."""


class TooFewCandidates(ElectionError):
    """The election has fewer candidates than the operation needs."""


class SubsetTooLarge(ElectionError):
    """A candidate subset exceeds the size an operation supports."""


# =============================================================================
# SOLVERS AND CERTIFICATES
# =============================================================================

class InfeasibleAssignment(EuclidPrefsError, RuntimeError):
    """A solver assignment violates a constraint already in the model."""


class SolverFailure(EuclidPrefsError, RuntimeError):
    """A solver backend crashed or returned output that cannot be parsed."""


class MissingPoint(EuclidPrefsError, KeyError):
    """An embedding does not place every candidate and voter."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing point"


class CorruptCertificate(EuclidPrefsError, ValueError):
    """A certificate file is structurally broken or does not match its election."""


class ConfigError(EuclidPrefsError, ValueError):
    """A configuration file or override names an unknown key or a bad value."""
