"""
Parsing of the source tables: foods, flavonoid contents, disease
associations and the optional drug/trial table.

Every table is a UTF-8 CSV with a fixed header schema. Headers match
case-insensitively and in any order; a ``column_map`` renames upstream
headers (for example real USDA exports) onto the canonical ones before
the schema is checked.
"""

import csv
import io
import logging
import os
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, TypeVar

from .errors import IngestError

logger = logging.getLogger(__name__)

R = TypeVar("R")


@dataclass(frozen=True, order=True)
class SourceProvenance:
    """Where a record came from: file name and 1-based line number."""

    file_name: str
    line_number: int

    def __str__(self) -> str:
        return f"{self.file_name}:{self.line_number}"


@dataclass(frozen=True)
class FoodRecord:
    food_code: str
    description: str
    food_group: str
    provenance: SourceProvenance

    COLUMNS = ("FoodCode", "Description", "FoodGroup")

    def cells(self) -> Tuple[str, ...]:
        return (self.food_code, self.description, self.food_group)


@dataclass(frozen=True)
class ContentRecord:
    food_code: str
    flavonoid_name: str
    subclass: str
    mean_mg_per_100g: Decimal
    method: str
    state: str
    provenance: SourceProvenance

    COLUMNS = ("FoodCode", "FlavonoidName", "Subclass", "Mean_mg_100g", "Method", "State")

    def cells(self) -> Tuple[str, ...]:
        return (
            self.food_code,
            self.flavonoid_name,
            self.subclass,
            str(self.mean_mg_per_100g),
            self.method,
            self.state,
        )


@dataclass(frozen=True)
class AssociationRecord:
    flavonoid_name: str
    disease_label: str
    external_disease_id: Optional[str]
    effect: str
    citation_key: str
    provenance: SourceProvenance

    COLUMNS = ("FlavonoidName", "DiseaseLabel", "DiseaseId", "Effect", "Citation")

    def cells(self) -> Tuple[str, ...]:
        return (
            self.flavonoid_name,
            self.disease_label,
            self.external_disease_id or "",
            self.effect,
            self.citation_key,
        )


@dataclass(frozen=True)
class DrugRecord:
    drug_name: str
    composition_of_food_code: str
    trial_id: Optional[str]
    disease_label: Optional[str]
    provenance: SourceProvenance

    COLUMNS = ("DrugName", "CompositionOfFoodCode", "TrialId", "DiseaseLabel")

    def cells(self) -> Tuple[str, ...]:
        return (
            self.drug_name,
            self.composition_of_food_code,
            self.trial_id or "",
            self.disease_label or "",
        )


@dataclass(frozen=True)
class SourceTables:
    """All parsed input tables of one pipeline run."""

    foods: List[FoodRecord]
    contents: List[ContentRecord]
    associations: List[AssociationRecord]
    drugs: List[DrugRecord]


def read_source(path: str) -> str:
    """Reads a UTF-8 input file.

    Raises:
        IngestError: If the bytes are not UTF-8, naming the line of the
            first bad byte.
    """
    data = Path(path).read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        line_number = data.count(b"\n", 0, e.start) + 1
        raise IngestError(f"not valid UTF-8: {e.reason}", os.path.basename(path), line_number)


def _read_rows(
    csv_text: str,
    file_name: str,
    columns: Sequence[str],
    column_map: Optional[Mapping[str, str]] = None,
) -> Iterator[Tuple[int, Dict[str, str]]]:
    """Yields (line number, row keyed by canonical column) for every data row."""
    if csv_text.startswith("\ufeff"):
        csv_text = csv_text[1:]
    reader = csv.reader(io.StringIO(csv_text, newline=""))

    header: Optional[List[str]] = None
    for raw in reader:
        if not any(cell.strip() for cell in raw):
            continue
        header = raw
        break
    if header is None:
        # An empty file has no header; there is nothing to check it against.
        return

    renames = {k.strip().lower(): v for k, v in (column_map or {}).items()}
    canonical = {c.lower(): c for c in columns}
    positions: Dict[str, int] = {}
    for idx, cell in enumerate(header):
        name = cell.strip().lower()
        name = renames.get(name, name).lower()
        if name in canonical:
            positions[canonical[name]] = idx

    for column in columns:
        if column not in positions:
            raise IngestError(f"missing column '{column}'", file_name)

    for raw in reader:
        line_number = reader.line_num
        if not any(cell.strip() for cell in raw):
            continue
        row = {}
        for column, idx in positions.items():
            row[column] = raw[idx].strip() if idx < len(raw) else ""
        yield line_number, row


def _required(
    row: Dict[str, str], column: str, file_name: str, line_number: int
) -> str:
    value = row[column]
    if not value:
        raise IngestError(f"empty required cell '{column}'", file_name, line_number)
    return value


def parse_food_table(
    csv_text: str,
    file_name: str = "foods.csv",
    column_map: Optional[Mapping[str, str]] = None,
) -> List[FoodRecord]:
    """Parses the food table (FoodCode, Description, FoodGroup).

    Args:
        csv_text (str): The CSV text including its header row.
        file_name (str): Name recorded in provenance and error messages.
        column_map (Optional[Mapping[str, str]]): Upstream header renames.

    Raises:
        IngestError: On a missing column, an empty required cell or a
            duplicate food code (the message names both lines).

    Returns:
        List[FoodRecord]: One record per data row, in file order.
    """
    records: List[FoodRecord] = []
    seen: Dict[str, int] = {}
    for line_number, row in _read_rows(csv_text, file_name, FoodRecord.COLUMNS, column_map):
        code = _required(row, "FoodCode", file_name, line_number)
        description = _required(row, "Description", file_name, line_number)
        group = _required(row, "FoodGroup", file_name, line_number)
        if code in seen:
            raise IngestError(
                f"duplicate food code '{code}' on lines {seen[code]} and {line_number}",
                file_name,
                line_number,
            )
        seen[code] = line_number
        records.append(
            FoodRecord(code, description, group, SourceProvenance(file_name, line_number))
        )
    logger.debug(f"parsed {len(records)} food rows from {file_name}")
    return records


def _parse_mean(value: str, file_name: str, line_number: int) -> Decimal:
    try:
        mean = Decimal(value)
    except InvalidOperation:
        raise IngestError(f"mean value '{value}' is not numeric", file_name, line_number)
    if not mean.is_finite():
        raise IngestError(f"mean value '{value}' is not finite", file_name, line_number)
    if mean < 0:
        raise IngestError(f"mean value '{value}' is negative", file_name, line_number)
    return mean


def parse_flavonoid_table(
    csv_text: str,
    file_name: str = "contents.csv",
    column_map: Optional[Mapping[str, str]] = None,
) -> List[ContentRecord]:
    """Parses the flavonoid content table.

    The subclass is carried verbatim; whether it names a known subclass is
    decided when the graph is built.
    """
    records: List[ContentRecord] = []
    for line_number, row in _read_rows(
        csv_text, file_name, ContentRecord.COLUMNS, column_map
    ):
        code = _required(row, "FoodCode", file_name, line_number)
        name = _required(row, "FlavonoidName", file_name, line_number)
        mean = _parse_mean(
            _required(row, "Mean_mg_100g", file_name, line_number),
            file_name,
            line_number,
        )
        records.append(
            ContentRecord(
                food_code=code,
                flavonoid_name=name,
                subclass=row["Subclass"],
                mean_mg_per_100g=mean,
                method=row["Method"],
                state=row["State"],
                provenance=SourceProvenance(file_name, line_number),
            )
        )
    logger.debug(f"parsed {len(records)} content rows from {file_name}")
    return records


def parse_disease_associations(
    csv_text: str,
    file_name: str = "associations.csv",
    column_map: Optional[Mapping[str, str]] = None,
) -> List[AssociationRecord]:
    """Parses the curated flavonoid to disease association table."""
    records: List[AssociationRecord] = []
    for line_number, row in _read_rows(
        csv_text, file_name, AssociationRecord.COLUMNS, column_map
    ):
        records.append(
            AssociationRecord(
                flavonoid_name=_required(row, "FlavonoidName", file_name, line_number),
                disease_label=_required(row, "DiseaseLabel", file_name, line_number),
                external_disease_id=row["DiseaseId"] or None,
                effect=row["Effect"],
                citation_key=row["Citation"],
                provenance=SourceProvenance(file_name, line_number),
            )
        )
    logger.debug(f"parsed {len(records)} association rows from {file_name}")
    return records


def parse_drug_table(
    csv_text: str,
    file_name: str = "drugs.csv",
    column_map: Optional[Mapping[str, str]] = None,
) -> List[DrugRecord]:
    """Parses the optional drug / clinical trial table."""
    records: List[DrugRecord] = []
    for line_number, row in _read_rows(csv_text, file_name, DrugRecord.COLUMNS, column_map):
        records.append(
            DrugRecord(
                drug_name=_required(row, "DrugName", file_name, line_number),
                composition_of_food_code=_required(
                    row, "CompositionOfFoodCode", file_name, line_number
                ),
                trial_id=row["TrialId"] or None,
                disease_label=row["DiseaseLabel"] or None,
                provenance=SourceProvenance(file_name, line_number),
            )
        )
    logger.debug(f"parsed {len(records)} drug rows from {file_name}")
    return records


def records_to_csv(records: Sequence[R], record_type: type) -> str:
    """Writes records back out in their canonical header schema."""
    if record_type not in (FoodRecord, ContentRecord, AssociationRecord, DrugRecord):
        raise TypeError(f"not a source record type: {record_type!r}")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(record_type.COLUMNS)
    for record in records:
        writer.writerow(record.cells())  # type: ignore[attr-defined]
    return buffer.getvalue()
