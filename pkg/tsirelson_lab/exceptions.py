"""Error hierarchy and CLI exit codes for tsirelson_lab."""
from typing import Optional

# ---------- Exit codes ----------
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_VERIFICATION = 3


class TsirelsonLabError(Exception):
    """Base class for every domain error raised by the package."""

    exit_code = EXIT_DOMAIN


class SupportTooLarge(TsirelsonLabError):
    def __init__(self, support: int, bound: int):
        self.support = support
        self.bound = bound
        super().__init__(f"support of size {support} exceeds the configured bound {bound}")


class InvalidDef(TsirelsonLabError):
    """A NormDef (or a parameter used to build one) is out of its domain."""


class NotMember(TsirelsonLabError):
    """A set was expected to belong to a Schreier family and does not."""


class BoundExceeded(TsirelsonLabError):
    """An enumeration or brute-force guard was hit."""


class Exhausted(TsirelsonLabError):
    """A finite basis prefix ran out while thinning or selecting."""


class InsufficientBasis(TsirelsonLabError):
    """A construction needs more basis vectors than were supplied."""


class EpsilonTooSmallForBudget(TsirelsonLabError):
    def __init__(self, message: str, required: Optional[int] = None, bound: Optional[int] = None):
        self.required = required
        self.bound = bound
        super().__init__(message)


class BudgetExceeded(TsirelsonLabError):
    """A search found nothing it could evaluate within its budget."""


class InvalidConfig(TsirelsonLabError):
    """Settings or an experiment configuration file failed validation."""


class VectorFileError(TsirelsonLabError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class VerificationError(TsirelsonLabError):
    """A computed result failed an independent check."""

    exit_code = EXIT_VERIFICATION


class BadTree(VerificationError):
    NON_SUCCESSIVE = "non_successive"
    NOT_PARTITION = "not_partition"
    ADMISSIBILITY = "admissibility"
    TERMINAL_LEVEL = "terminal_level"
    LEAF_MISMATCH = "leaf_mismatch"
    LEVEL = "level"
    WEIGHT = "weight"
    FLOOR = "floor"

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


class UnverifiedUnconditionality(UserWarning):
    """A base norm was used without a declaration of 1-unconditionality."""
