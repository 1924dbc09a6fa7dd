"""Dataset representation and CSV ingestion/egress.

Every cell is text with a declared kind; generalisation outputs like
"20-29" or "> 2019" then need no second cell type. Tables are immutable:
each transformation returns a new table, so they are safe to share across
workers.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping

from .errors import (CellTypeError, CsvParseError, SchemaMismatchError,
                     UnknownAttributeError)

#: Distinguished sentinel for missing cells. After normalisation it is an
#: ordinary observed category; missing therefore matches missing when
#: partitioning (extended match).
MISSING = "missing"

#: Cell spellings treated as missing, case-insensitive, besides blank and
#: whitespace-only cells.
NULL_LIKE = frozenset({"na", "n/a", "null", "nan", "none"})

KINDS = ("numeric", "year", "categorical", "free-text")
ROLES = ("DID", "QID", "SA", "NSA")

_YEAR_RE = re.compile(r"^\d{4}$")


@dataclass(frozen=True)
class AttributeMeta:
    """Declared name, kind, and optional manual role for one attribute.

    ``declared_role`` survives automatic classification (it is an override).
    ``value_order`` declares a total order over category labels; set by
    generalisation rules on their outputs, it makes the ordered ground
    distance available to t-closeness.
    """

    name: str
    kind: str = "categorical"
    declared_role: str | None = None
    value_order: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("attribute name must be non-empty")
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r} for {self.name!r}")
        if self.declared_role is not None and self.declared_role not in ROLES:
            raise ValueError(
                f"unknown role {self.declared_role!r} for {self.name!r}")


@dataclass(frozen=True)
class Table:
    name: str
    attributes: tuple[AttributeMeta, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        width = len(self.attributes)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(
                    f"row {i + 1} has {len(row)} cells, expected {width}")

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def index_of(self, attribute: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == attribute:
                return i
        raise UnknownAttributeError(attribute)

    def meta(self, attribute: str) -> AttributeMeta:
        return self.attributes[self.index_of(attribute)]

    def column(self, attribute: str) -> list[str]:
        i = self.index_of(attribute)
        return [row[i] for row in self.rows]

    def replace_column(self, attribute: str, values: list[str],
                       meta: AttributeMeta | None = None) -> "Table":
        i = self.index_of(attribute)
        if len(values) != self.row_count:
            raise ValueError("column length mismatch")
        attrs = list(self.attributes)
        if meta is not None:
            attrs[i] = meta
        rows = tuple(row[:i] + (v,) + row[i + 1:]
                     for row, v in zip(self.rows, values))
        return Table(self.name, tuple(attrs), rows)

    def drop_column(self, attribute: str) -> "Table":
        i = self.index_of(attribute)
        attrs = self.attributes[:i] + self.attributes[i + 1:]
        rows = tuple(row[:i] + row[i + 1:] for row in self.rows)
        return Table(self.name, attrs, rows)

    def select(self, attributes: Iterable[str]) -> "Table":
        idx = [self.index_of(a) for a in attributes]
        attrs = tuple(self.attributes[i] for i in idx)
        rows = tuple(tuple(row[i] for i in idx) for row in self.rows)
        return Table(self.name, attrs, rows)


def _is_null_like(cell: str) -> bool:
    stripped = cell.strip()
    return stripped == "" or stripped.lower() in NULL_LIKE


def _normalise_decimal(cell: str) -> str:
    # decimal-comma exports ("23,8") are a locale artifact; store "23.8"
    if cell.count(",") == 1:
        candidate = cell.replace(",", ".")
        try:
            float(candidate)
            return candidate
        except ValueError:
            pass
    return cell


def _check_cell(cell: str, meta: AttributeMeta, row_number: int) -> str:
    """Validate a typed cell, returning its (possibly locale-fixed) value."""
    if _is_null_like(cell) or cell == MISSING:
        return cell
    if meta.kind == "numeric":
        cell = _normalise_decimal(cell)
        try:
            float(cell)
        except ValueError:
            raise CellTypeError(meta.name, row_number, cell, "a decimal number")
    elif meta.kind == "year":
        if not _YEAR_RE.match(cell.strip()):
            raise CellTypeError(meta.name, row_number, cell, "a 4-digit year")
        cell = cell.strip()
    return cell


def load_csv(source: BinaryIO | str | Path, schema: list[AttributeMeta],
             name: str = "table") -> Table:
    """Read an RFC 4180 CSV with a header row into a Table.

    Header names must match the schema names as a set; the resulting column
    order follows the schema, not the file. Typed cells (numeric, year) must
    parse unless they are blank/null-like or the missing sentinel. No
    missing-value normalisation is applied here.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return load_csv(fh, schema, name=name)
    text = io.TextIOWrapper(source, encoding="utf-8", newline="")
    reader = csv.reader(text)
    try:
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError("empty input: no header row")
        schema_names = [a.name for a in schema]
        missing = sorted(set(schema_names) - set(header))
        unexpected = sorted(set(header) - set(schema_names))
        if missing or unexpected:
            raise SchemaMismatchError(missing, unexpected)
        if len(set(header)) != len(header):
            raise CsvParseError("duplicate header names")
        order = [header.index(n) for n in schema_names]

        rows = []
        for row_number, record in enumerate(reader, start=1):
            if not record:  # blank line
                continue
            if len(record) != len(header):
                raise CsvParseError(
                    f"expected {len(header)} fields, got {len(record)}",
                    row=row_number, column=len(record))
            cells = []
            for meta, src in zip(schema, order):
                cells.append(_check_cell(record[src], meta, row_number))
            rows.append(tuple(cells))
    except csv.Error as exc:
        raise CsvParseError(f"malformed CSV: {exc}",
                            row=getattr(reader, "line_num", None))
    finally:
        text.detach()
    return Table(name, tuple(schema), tuple(rows))


def normalize_missing(table: Table) -> tuple[Table, dict[str, float]]:
    """Replace blank/null-like cells with the sentinel.

    Returns the normalised table and the exact per-attribute missing
    fraction (missing cells / row count; 0.0 for an empty table). The
    operation is idempotent, and a pre-existing literal "missing" counts as
    missing by design.
    """
    counts = [0] * len(table.attributes)
    rows = []
    for row in table.rows:
        cells = []
        for j, cell in enumerate(row):
            if cell == MISSING or _is_null_like(cell):
                cell = MISSING
                counts[j] += 1
            cells.append(cell)
        rows.append(tuple(cells))
    n = table.row_count
    fractions = {a.name: (counts[j] / n if n else 0.0)
                 for j, a in enumerate(table.attributes)}
    return Table(table.name, table.attributes, tuple(rows)), fractions


def drop_sparse_attributes(table: Table, threshold: float = 0.85,
                           ) -> tuple[Table, list[str]]:
    """Drop attributes whose missing fraction strictly exceeds threshold.

    Run on a normalised table. Retained cells are untouched; the drop list
    is returned for the audit trail. An attribute at exactly the threshold
    is retained.
    """
    _, fractions = normalize_missing(table)
    dropped = [a.name for a in table.attributes
               if fractions[a.name] > threshold]
    out = table
    for name in dropped:
        out = out.drop_column(name)
    return out, dropped


def write_csv(table: Table, sink: BinaryIO | str | Path) -> None:
    """Write RFC 4180 CSV (CRLF, minimal quoting), header row first."""
    if isinstance(sink, (str, Path)):
        with open(sink, "wb") as fh:
            write_csv(table, fh)
        return
    text = io.TextIOWrapper(sink, encoding="utf-8", newline="")
    writer = csv.writer(text)
    writer.writerow(table.attribute_names)
    writer.writerows(table.rows)
    text.detach()


def csv_bytes(table: Table) -> bytes:
    buf = io.BytesIO()
    write_csv(table, buf)
    return buf.getvalue()


def schema_from_dict(doc: Iterable[Mapping] | Mapping) -> list[AttributeMeta]:
    """Build a schema from its configuration document.

    Accepts either the full document ({"attributes": [...]}) or the bare
    attribute list. Each entry carries name, kind, and optionally
    declared_role and value_order.
    """
    if isinstance(doc, Mapping):
        doc = doc["attributes"]
    metas = []
    for entry in doc:
        metas.append(AttributeMeta(
            name=entry["name"],
            kind=entry.get("kind", "categorical"),
            declared_role=entry.get("declared_role"),
            value_order=(tuple(entry["value_order"])
                         if entry.get("value_order") else None),
        ))
    return metas


def schema_to_dict(schema: Iterable[AttributeMeta]) -> dict:
    attributes = []
    for meta in schema:
        entry: dict = {"name": meta.name, "kind": meta.kind}
        if meta.declared_role:
            entry["declared_role"] = meta.declared_role
        if meta.value_order:
            entry["value_order"] = list(meta.value_order)
        attributes.append(entry)
    return {"attributes": attributes}


def load_schema(path: str | Path) -> list[AttributeMeta]:
    with open(path, encoding="utf-8") as fh:
        return schema_from_dict(json.load(fh))
