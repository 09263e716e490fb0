"""Exception and warning types shared across the package.

Every failed validation carries the first witness found, so callers can
report exactly which axiom broke and where.
"""

from __future__ import annotations


class MustabError(Exception):
    """Base class for package-specific errors."""


class SpaceValidationError(MustabError):
    """A metric-space axiom failed."""


class DuplicateLabel(SpaceValidationError):
    def __init__(self, label: str, first: int, second: int) -> None:
        super().__init__(f"duplicate label {label!r} at indices {first} and {second}")
        self.label = label
        self.first = first
        self.second = second


class NonzeroDiagonal(SpaceValidationError):
    def __init__(self, i: int) -> None:
        super().__init__(f"dist[{i}][{i}] must be 0")
        self.i = i


class NonSymmetric(SpaceValidationError):
    def __init__(self, i: int, j: int) -> None:
        super().__init__(f"dist[{i}][{j}] != dist[{j}][{i}]")
        self.i = i
        self.j = j


class ZeroOffDiagonal(SpaceValidationError):
    def __init__(self, i: int, j: int) -> None:
        super().__init__(f"dist[{i}][{j}] is 0 but points {i} and {j} are distinct")
        self.i = i
        self.j = j


class TriangleViolation(SpaceValidationError):
    def __init__(self, i: int, j: int, k: int) -> None:
        super().__init__(
            f"dist[{i}][{j}] > dist[{i}][{k}] + dist[{k}][{j}]"
        )
        self.i = i
        self.j = j
        self.k = k


class MismatchedSpace(MustabError):
    """Two objects built over different metric spaces were combined."""


class NotBijective(MustabError):
    """A pushforward was requested along a non-invertible map."""


class OutOfRange(MustabError):
    """A numeric argument fell outside its documented range."""


class NotAbsolutelyContinuous(MustabError):
    def __init__(self, witness: int) -> None:
        super().__init__(f"point {witness} has positive mass under mu but zero mass under nu")
        self.witness = witness


class BudgetExceeded(MustabError):
    def __init__(self, count: int, budget: int) -> None:
        super().__init__(f"enumeration would visit {count} maps, budget is {budget}")
        self.count = count
        self.budget = budget


class MissingMeasure(MustabError):
    """A measure-dependent mode was requested without a measure."""


class SinglePoint(MustabError):
    """Separation thresholds need at least two points."""


class MalformedLasso(MustabError):
    """An eventually-periodic orbit description is structurally invalid."""


class PreconditionViolated(MustabError):
    def __init__(self, which: str, detail: str = "") -> None:
        msg = f"precondition violated: {which}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.which = which


class ShadowMissing(MustabError):
    """No tracking point exists where theory guarantees one; internal soundness bug."""

    def __init__(self, point: int) -> None:
        super().__init__(f"no shadowing point for the orbit starting at {point}")
        self.point = point


class SoundnessError(MustabError):
    """A quantity two independent routes must agree on came out different."""


class RangeTooSmall(MustabError):
    """The generator's coordinate range cannot hold the requested point count."""


class UsageError(MustabError):
    """Bad command-line arguments or malformed input file."""


class BoundTooSmallWarning(Warning):
    """A 'true' verdict was reached without exhausting the search depth.

    The verdict then only means "no refutation found within the bound".
    """
