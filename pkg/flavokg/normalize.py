"""
Label canonicalization, entity merging and near-duplicate review.

Canonical keys are the matching keys for every later stage: vocabulary
mapping, IRI minting and query label lookup all compare canonical keys.
"""

import logging
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    AbstractSet,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

from rapidfuzz.distance import Levenshtein

from .errors import NormalizationError
from .ingest import SourceProvenance, SourceTables

logger = logging.getLogger(__name__)

TRAILING_PUNCTUATION = ".,;:!?"


class EntityKind(str, Enum):
    FOOD = "food"
    FOOD_GROUP = "food_group"
    FLAVONOID = "flavonoid"
    FLAVONOID_SUBCLASS = "flavonoid_subclass"
    DISEASE = "disease"
    DRUG = "drug"
    CLINICAL_TRIAL = "clinical_trial"

    def __str__(self) -> str:
        return self.value

    @property
    def strips_plurals(self) -> bool:
        return self in _PLURAL_KINDS


_PLURAL_KINDS = frozenset({EntityKind.FOOD, EntityKind.FOOD_GROUP, EntityKind.DISEASE})

# The subclass spelling used in the source literature, kept as a synonym.
BUILTIN_OVERRIDES: Dict[Tuple[str, EntityKind], str] = {
    ("Flavnaones", EntityKind.FLAVONOID_SUBCLASS): "flavanones",
}


def _strip_plural(word: str, exceptions: AbstractSet[str]) -> str:
    if len(word) <= 3 or word in exceptions:
        return word
    if word.endswith("ies") and word[-4].isalpha():
        return word[:-3] + "y"
    if word.endswith("ss") or word.endswith("us"):
        return word
    if word.endswith("s") and word[-2].isalpha():
        return word[:-1]
    return word


def canonicalize_label(
    raw: str,
    kind: EntityKind,
    plural_exceptions: AbstractSet[str] = frozenset(),
) -> str:
    """Computes the canonical matching key of a label.

    Applies Unicode NFC, lowercase folding, whitespace collapse and
    trailing punctuation stripping. Food, food group and disease labels
    additionally lose a plural suffix on their final word; chemical names
    (flavonoids, subclasses, drugs) and trial ids are never plural-stripped.

    Args:
        raw (str): The label as it appears in a source table.
        kind (EntityKind): Which entity kind's rules to apply.
        plural_exceptions (AbstractSet[str]): Words never plural-stripped.

    Raises:
        NormalizationError: If the label is empty after trimming.

    Returns:
        str: The canonical key. The function is idempotent.
    """
    text = unicodedata.normalize("NFC", raw)
    text = unicodedata.normalize("NFC", text.lower())
    text = " ".join(text.split())
    text = text.rstrip(TRAILING_PUNCTUATION + " ")
    if not text:
        raise NormalizationError(f"label {raw!r} is empty after trimming")

    if EntityKind(kind).strips_plurals:
        head, sep, last = text.rpartition(" ")
        text = head + sep + _strip_plural(last, plural_exceptions)
    return text


@dataclass(frozen=True)
class RawLabel:
    """A label occurrence as found in a source row."""

    label: str
    kind: EntityKind
    provenance: SourceProvenance


@dataclass(frozen=True)
class CanonicalEntity:
    canonical_key: str
    display_label: str
    kind: EntityKind
    merged_from: Tuple[Tuple[str, SourceProvenance], ...]

    @property
    def raw_labels(self) -> FrozenSet[str]:
        return frozenset(raw for raw, _ in self.merged_from)


@dataclass(frozen=True)
class NearDuplicate:
    first: str
    second: str
    distance: int
    kind: Optional[EntityKind] = None


@dataclass
class MergeReport:
    merges: List[Tuple[CanonicalEntity, List[str]]] = field(default_factory=list)
    review_queue: List[NearDuplicate] = field(default_factory=list)


def load_plural_exceptions(text: str) -> FrozenSet[str]:
    """Reads a plural exception list, one word per line."""
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def load_curation_overrides(text: str) -> Dict[Tuple[str, EntityKind], str]:
    """Reads `raw_label TAB kind TAB canonical_key` rows."""
    overrides: Dict[Tuple[str, EntityKind], str] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise NormalizationError(
                f"curation override line {line_number}: expected 3 tab-separated "
                f"columns, got {len(parts)}"
            )
        raw, kind, key = (p.strip() for p in parts)
        try:
            entity_kind = EntityKind(kind)
        except ValueError:
            raise NormalizationError(
                f"curation override line {line_number}: unknown kind '{kind}'"
            )
        if not raw or not key:
            raise NormalizationError(
                f"curation override line {line_number}: empty label or key"
            )
        overrides[(raw, entity_kind)] = key
    return overrides


class Normalizer:
    """Canonicalizes labels with curation overrides and plural exceptions.

    Overrides are looked up by (raw label, kind) before the rules run and
    win when present.
    """

    def __init__(
        self,
        overrides: Optional[Mapping[Tuple[str, EntityKind], str]] = None,
        plural_exceptions: AbstractSet[str] = frozenset(),
    ) -> None:
        self._overrides: Dict[Tuple[str, EntityKind], str] = dict(BUILTIN_OVERRIDES)
        self._overrides.update(overrides or {})
        self._plural_exceptions = frozenset(plural_exceptions)

    @property
    def plural_exceptions(self) -> FrozenSet[str]:
        return self._plural_exceptions

    def canonicalize(self, raw: str, kind: EntityKind) -> str:
        override = self._overrides.get((raw.strip(), EntityKind(kind)))
        if override is not None:
            return override
        return canonicalize_label(raw, kind, self._plural_exceptions)

    def merge(
        self, labels: Iterable[RawLabel], max_distance: int = 1
    ) -> Tuple[List[CanonicalEntity], MergeReport]:
        return merge_entities(labels, self, max_distance)


def _pick_display(raws: Sequence[str]) -> str:
    counts = Counter(raws)
    return min(counts, key=lambda raw: (-counts[raw], raw))


def merge_entities(
    labels: Iterable[RawLabel],
    normalizer: Optional[Normalizer] = None,
    max_distance: int = 1,
) -> Tuple[List[CanonicalEntity], MergeReport]:
    """Merges raw labels sharing a canonical key into entities.

    The display label is the most frequent raw form, ties broken by the
    lexicographically smallest form. Near-duplicate keys of the same kind
    are queued for review, never merged.

    Raises:
        NormalizationError: On an empty label, or when two labels share a
            canonical key across different kinds.

    Returns:
        Tuple[List[CanonicalEntity], MergeReport]: Entities sorted by
        canonical key, and the merge report.
    """
    normalizer = normalizer or Normalizer()
    groups: Dict[str, List[RawLabel]] = defaultdict(list)
    kinds: Dict[str, EntityKind] = {}
    for item in labels:
        raw = item.label.strip()
        key = normalizer.canonicalize(raw, item.kind)
        known = kinds.setdefault(key, EntityKind(item.kind))
        if known != item.kind:
            raise NormalizationError(
                f"canonical key '{key}' is shared by kinds '{known}' and "
                f"'{item.kind}' (at {item.provenance})"
            )
        groups[key].append(RawLabel(raw, EntityKind(item.kind), item.provenance))

    entities: List[CanonicalEntity] = []
    report = MergeReport()
    for key in sorted(groups):
        members = sorted(groups[key], key=lambda m: (m.provenance, m.label))
        display = _pick_display([m.label for m in members])
        entity = CanonicalEntity(
            canonical_key=key,
            display_label=display,
            kind=kinds[key],
            merged_from=tuple((m.label, m.provenance) for m in members),
        )
        entities.append(entity)
        absorbed = sorted({m.label for m in members} - {display})
        if absorbed:
            report.merges.append((entity, absorbed))

    keys_by_kind: Dict[EntityKind, List[str]] = defaultdict(list)
    for entity in entities:
        keys_by_kind[entity.kind].append(entity.canonical_key)
    for kind in sorted(keys_by_kind, key=str):
        for first, second, distance in detect_near_duplicates(
            keys_by_kind[kind], max_distance
        ):
            report.review_queue.append(NearDuplicate(first, second, distance, kind))
    report.review_queue.sort(key=lambda d: (d.distance, d.first, d.second))

    logger.debug(
        f"merged labels into {len(entities)} entities, "
        f"{len(report.merges)} merges, {len(report.review_queue)} review items"
    )
    return entities, report


def detect_near_duplicates(
    labels: Iterable[str], max_distance: int
) -> List[Tuple[str, str, int]]:
    """Finds label pairs within a small edit distance of each other.

    Args:
        labels (Iterable[str]): Canonical keys; duplicates are ignored.
        max_distance (int): Inclusive upper bound on Levenshtein distance.

    Returns:
        List[Tuple[str, str, int]]: Unordered pairs (first < second) with
        distance in [1, max_distance], sorted by (distance, first, second).
    """
    if max_distance < 1:
        raise ValueError(f"max_distance must be at least 1, got {max_distance}")
    unique = sorted(set(labels), key=lambda s: (len(s), s))
    pairs: List[Tuple[str, str, int]] = []
    for i, a in enumerate(unique):
        for b in unique[i + 1 :]:
            if len(b) - len(a) > max_distance:
                break
            distance = Levenshtein.distance(a, b, score_cutoff=max_distance)
            if 1 <= distance <= max_distance:
                first, second = (a, b) if a < b else (b, a)
                pairs.append((first, second, distance))
    pairs.sort(key=lambda p: (p[2], p[0], p[1]))
    return pairs


def collect_labels(tables: SourceTables) -> List[RawLabel]:
    """Gathers every entity-naming cell of the source tables."""
    labels: List[RawLabel] = []
    for food in tables.foods:
        labels.append(RawLabel(food.description, EntityKind.FOOD, food.provenance))
        labels.append(RawLabel(food.food_group, EntityKind.FOOD_GROUP, food.provenance))
    for content in tables.contents:
        labels.append(
            RawLabel(content.flavonoid_name, EntityKind.FLAVONOID, content.provenance)
        )
        if content.subclass:
            labels.append(
                RawLabel(
                    content.subclass, EntityKind.FLAVONOID_SUBCLASS, content.provenance
                )
            )
    for assoc in tables.associations:
        labels.append(
            RawLabel(assoc.flavonoid_name, EntityKind.FLAVONOID, assoc.provenance)
        )
        labels.append(RawLabel(assoc.disease_label, EntityKind.DISEASE, assoc.provenance))
    for drug in tables.drugs:
        labels.append(RawLabel(drug.drug_name, EntityKind.DRUG, drug.provenance))
        if drug.trial_id:
            labels.append(
                RawLabel(drug.trial_id, EntityKind.CLINICAL_TRIAL, drug.provenance)
            )
        if drug.disease_label:
            labels.append(
                RawLabel(drug.disease_label, EntityKind.DISEASE, drug.provenance)
            )
    return labels


def entities_tsv(entities: Sequence[CanonicalEntity]) -> str:
    lines = ["kind\tcanonical_key\tdisplay_label\toccurrences"]
    for entity in sorted(entities, key=lambda e: (str(e.kind), e.canonical_key)):
        lines.append(
            f"{entity.kind}\t{entity.canonical_key}\t{entity.display_label}\t"
            f"{len(entity.merged_from)}"
        )
    return "\n".join(lines) + "\n"


def merge_report_tsv(report: MergeReport) -> str:
    """Renders merges and review candidates as one TSV table."""
    lines = ["section\tkind\tfirst\tsecond\tdetail"]
    for entity, absorbed in report.merges:
        lines.append(
            f"merge\t{entity.kind}\t{entity.canonical_key}\t{entity.display_label}\t"
            + "|".join(absorbed)
        )
    for item in report.review_queue:
        lines.append(
            f"review\t{item.kind or ''}\t{item.first}\t{item.second}\t{item.distance}"
        )
    return "\n".join(lines) + "\n"
