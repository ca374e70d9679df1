"""Exception hierarchy shared by all fairtab modules.

Two broad families matter to callers: ``ValidationError`` covers bad inputs
(schema violations, infeasible requests) and maps to CLI exit code 2 /
HTTP 400, while ``IOFailure`` maps to exit code 1.
"""

from __future__ import annotations


class FairtabError(Exception):
    """Base class for every error raised by fairtab."""


class ValidationError(FairtabError):
    """Inputs violate a contract (schema, domain, feasibility)."""


class IOFailure(FairtabError):
    """Reading or writing an external resource failed."""


# ---------------------------------------------------------------------------
# Ingestion / schema


class MissingColumn(ValidationError):
    def __init__(self, attr: str):
        super().__init__(f"column {attr!r} missing from header")
        self.attr = attr


class MissingValue(ValidationError):
    def __init__(self, row: int, attr: str):
        super().__init__(f"row {row}: missing value for {attr!r}")
        self.row = row
        self.attr = attr


class DomainViolation(ValidationError):
    def __init__(self, row: int, attr: str, value: str):
        super().__init__(f"row {row}: value {value!r} outside declared domain of {attr!r}")
        self.row = row
        self.attr = attr
        self.value = value


class UnknownLabel(ValidationError):
    def __init__(self, label: str):
        super().__init__(f"unknown label value {label!r}")
        self.label = label


class SchemaMismatch(ValidationError):
    def __init__(self, detail: str = "schemas differ"):
        super().__init__(detail)


# ---------------------------------------------------------------------------
# Measures


class EmptyGroup(ValidationError):
    """The group has no tuples, so its frequencies are undefined."""


class EmptyLabel(ValidationError):
    """No tuples carry the label, so the population rate is undefined."""


class InvalidPartition(ValidationError):
    """Protected/unprotected shares do not form a partition (P + U != 1)."""


class DivisionByZeroMeasure(ValidationError):
    """A classical measure's denominator is zero; names the measure."""

    def __init__(self, name: str):
        super().__init__(f"measure {name!r} undefined: division by zero")
        self.name = name


# ---------------------------------------------------------------------------
# Mitigation


class InvalidTargets(ValidationError):
    """Target ratios violate the per-group consistency identity."""


class InfeasibleTargets(ValidationError):
    """No non-negative addition vector reaches the targets."""


class DigestMismatch(ValidationError):
    """A plan was produced against a different summary."""


class Overdelete(ValidationError):
    def __init__(self, group, label, requested: int, available: int):
        super().__init__(
            f"cannot delete {requested} tuples from cell ({group}, {label}); only {available} present"
        )
        self.group = group
        self.label = label


# ---------------------------------------------------------------------------
# Policy grids


class LatticeOverdelete(ValidationError):
    """A delete operation's range exceeds the targeted cell count."""


class NoRootInRange(ValidationError):
    def __init__(self, x: int):
        super().__init__(f"no zero-bias root within range at x={x}")
        self.x = x


# ---------------------------------------------------------------------------
# Sampling / realization


class InvalidSize(ValidationError):
    """A requested sample or partition size is out of bounds."""
