"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes (see ``anisoflow.cli``): configuration
problems are usage errors, file problems are I/O errors, violated operator
preconditions are precondition errors, and NaN/divergence conditions are
numerical errors.
"""


class AnisoError(Exception):
    """Base class for all package errors."""


class StructureError(AnisoError):
    """Mismatched grids, wrong component counts, misaligned time grids."""


class DomainError(AnisoError):
    """Argument outside its mathematical domain (negative time, q <= 0, ...)."""


class ShellRangeError(AnisoError):
    """Dyadic shell index outside the resolvable range of a grid."""

    def __init__(self, which: str, index: int, lo: int, hi: int):
        self.which = which
        self.index = index
        self.lo = lo
        self.hi = hi
        super().__init__(
            f"{which} shell index {index} outside resolvable range [{lo}, {hi}]"
        )


class ConfigError(AnisoError):
    """Inconsistent or unusable configuration (quadrature, depths, schedules)."""


class PreconditionError(AnisoError):
    """Input violates a documented operator precondition."""


class DataError(AnisoError):
    """Corrupt numerical data (NaN/Inf samples)."""


class FileFormatError(AnisoError):
    """Malformed on-disk artifact; carries the offending byte offset."""

    def __init__(self, path: str, offset: int, reason: str):
        self.path = path
        self.offset = offset
        self.reason = reason
        super().__init__(f"{path}: byte {offset}: {reason}")
