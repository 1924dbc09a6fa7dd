"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class AnonError(Exception):
    """Base class for all toolkit errors."""


class CsvParseError(AnonError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f" at row {row}" + (f", column {column}" if column is not None else "")
        super().__init__(message + where)


class SchemaMismatchError(AnonError):
    def __init__(self, missing: list[str], unexpected: list[str]):
        self.missing = missing
        self.unexpected = unexpected
        parts = []
        if missing:
            parts.append(f"missing from CSV header: {', '.join(missing)}")
        if unexpected:
            parts.append(f"not in schema: {', '.join(unexpected)}")
        super().__init__("header/schema mismatch; " + "; ".join(parts))


class CellTypeError(AnonError):
    def __init__(self, attribute: str, row: int, value: str, kind: str):
        self.attribute = attribute
        self.row = row
        self.value = value
        super().__init__(
            f"cell {value!r} in attribute {attribute!r} (row {row}) "
            f"does not parse as {kind}")


class UnknownAttributeError(AnonError):
    def __init__(self, attribute: str):
        self.attribute = attribute
        super().__init__(f"unknown attribute {attribute!r}")


class EmptyTableError(AnonError):
    pass


class RuleError(AnonError):
    """Invalid rule definition (bad strategy, overlapping bins, ...)."""


class CoverageError(AnonError):
    """A generalisation rule does not cover an observed value."""

    def __init__(self, attribute: str, row: int, value: str):
        self.attribute = attribute
        self.row = row
        self.value = value
        super().__init__(
            f"value {value!r} in attribute {attribute!r} (row {row}) "
            "is not covered by the rule")


class ApplyError(AnonError):
    """Rule application aborted; carries the audit log of completed steps."""

    def __init__(self, cause: AnonError, audit: list):
        self.cause = cause
        self.audit = audit
        super().__init__(str(cause))


class ConfigError(AnonError):
    pass


class MetricsError(AnonError):
    pass
