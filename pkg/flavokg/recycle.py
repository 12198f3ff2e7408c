"""
Sub-language recycling: match canonical entities against flat vocabulary
snapshots (ChEBI, CDNO, DOID) and mint local IRIs for whatever is left.
"""

import logging
import re
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

from .config import DEFAULT_NAMESPACE, OBO_PURL_BASE
from .errors import FlavoKGError, VocabularyError
from .models import V1MappingResult
from .normalize import CanonicalEntity, EntityKind, canonicalize_label

logger = logging.getLogger(__name__)

CURIE_PATTERN = re.compile(r"^([A-Za-z_][A-Za-z0-9_.-]*):(\S+)$")
_SLUG_SAFE = frozenset("abcdefghijklmnopqrstuvwxyz0123456789-")

DEFAULT_VOCABULARY_ORDER: Dict[EntityKind, Tuple[str, ...]] = {
    EntityKind.FLAVONOID: ("chebi", "cdno", "doid"),
    EntityKind.FLAVONOID_SUBCLASS: ("chebi", "cdno", "doid"),
    EntityKind.DISEASE: ("doid", "chebi", "cdno"),
}
FALLBACK_VOCABULARY_ORDER = ("chebi", "cdno", "doid")


class MatchOutcome(str, Enum):
    EXACT_LABEL = "exact_label"
    NORMALIZED_LABEL = "normalized_label"
    SYNONYM = "synonym"
    MINTED = "minted"

    def __str__(self) -> str:
        return self.value

    @property
    def rank(self) -> int:
        return _RANKS[self]


_RANKS = {
    MatchOutcome.EXACT_LABEL: 1,
    MatchOutcome.NORMALIZED_LABEL: 2,
    MatchOutcome.SYNONYM: 3,
    MatchOutcome.MINTED: 4,
}


@dataclass(frozen=True)
class VocabTerm:
    curie: str
    label: str
    synonyms: Tuple[str, ...] = ()

    @property
    def prefix(self) -> str:
        return self.curie.split(":", 1)[0]


# (tier, entity kind, plural exceptions)
IndexKey = Tuple[str, EntityKind, FrozenSet[str]]


@dataclass(frozen=True)
class Vocabulary:
    """An immutable vocabulary snapshot with lazily built match indexes."""

    name: str
    terms: Tuple[VocabTerm, ...]
    _exact: Dict[str, Tuple[str, ...]] = field(
        default_factory=dict, compare=False, repr=False
    )
    _indexes: Dict[IndexKey, Dict[str, Tuple[str, ...]]] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        exact: Dict[str, List[str]] = defaultdict(list)
        for term in self.terms:
            exact[term.label].append(term.curie)
        self._exact.update(_freeze(exact))

    def __contains__(self, curie: object) -> bool:
        return any(term.curie == curie for term in self.terms)

    def curies(self) -> List[str]:
        return [term.curie for term in self.terms]

    def _index(
        self, tier: str, kind: EntityKind, plural_exceptions: FrozenSet[str]
    ) -> Dict[str, Tuple[str, ...]]:
        cached = self._indexes.get((tier, kind, plural_exceptions))
        if cached is not None:
            return cached
        index: Dict[str, List[str]] = defaultdict(list)
        for term in self.terms:
            surfaces = [term.label] if tier == "label" else list(term.synonyms)
            for surface in surfaces:
                try:
                    key = canonicalize_label(surface, kind, plural_exceptions)
                except FlavoKGError:
                    continue
                index[key].append(term.curie)
        frozen = _freeze(index)
        self._indexes[(tier, kind, plural_exceptions)] = frozen
        return frozen

    def lookup(
        self,
        outcome: MatchOutcome,
        entity: CanonicalEntity,
        plural_exceptions: AbstractSet[str] = frozenset(),
    ) -> Optional[str]:
        """Returns the smallest CURIE matching the entity at one tier.

        Term labels and synonyms are canonicalized with the same plural
        exceptions as the entity keys.
        """
        exceptions = frozenset(plural_exceptions)
        if outcome == MatchOutcome.EXACT_LABEL:
            found = set(self._exact.get(entity.display_label, ()))
            found.update(self._exact.get(entity.canonical_key, ()))
        elif outcome in (MatchOutcome.NORMALIZED_LABEL, MatchOutcome.SYNONYM):
            tier = "label" if outcome == MatchOutcome.NORMALIZED_LABEL else "synonym"
            index = self._index(tier, entity.kind, exceptions)
            found = set(index.get(entity.canonical_key, ()))
        else:
            return None
        return min(found) if found else None


def _freeze(index: Mapping[str, List[str]]) -> Dict[str, Tuple[str, ...]]:
    return {key: tuple(sorted(set(values))) for key, values in index.items()}


@dataclass(frozen=True)
class MappingResult:
    entity_key: str
    kind: EntityKind
    outcome: MatchOutcome
    iri_or_curie: str
    vocabulary: Optional[str] = None

    @property
    def match_quality(self) -> int:
        return self.outcome.rank

    @property
    def is_minted(self) -> bool:
        return self.outcome == MatchOutcome.MINTED

    def to_v1(self) -> V1MappingResult:
        return V1MappingResult(
            entity_key=self.entity_key,
            kind=str(self.kind),
            outcome=str(self.outcome),
            iri_or_curie=self.iri_or_curie,
            vocabulary=self.vocabulary,
            match_quality=self.match_quality,
        )


def load_vocabulary(tsv_text: str, name: str) -> Vocabulary:
    """Loads a `curie TAB label TAB synonym1|synonym2` snapshot.

    Blank lines and lines starting with `#` are skipped.

    Raises:
        VocabularyError: On a malformed CURIE or a duplicate CURIE, with the
            1-based line number.
    """
    terms: List[VocabTerm] = []
    seen: Dict[str, int] = {}
    for line_number, line in enumerate(tsv_text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        curie = parts[0].strip()
        if not CURIE_PATTERN.match(curie):
            raise VocabularyError(f"malformed CURIE '{curie}' in {name}", line_number)
        if curie in seen:
            raise VocabularyError(
                f"duplicate CURIE '{curie}' in {name} (first on line {seen[curie]})",
                line_number,
            )
        seen[curie] = line_number
        label = parts[1].strip() if len(parts) > 1 else ""
        if not label:
            raise VocabularyError(f"term '{curie}' has no label", line_number)
        synonyms: Tuple[str, ...] = ()
        if len(parts) > 2 and parts[2].strip():
            synonyms = tuple(s.strip() for s in parts[2].split("|") if s.strip())
        terms.append(VocabTerm(curie, label, synonyms))
    logger.debug(f"loaded {len(terms)} terms into vocabulary '{name}'")
    return Vocabulary(name=name, terms=tuple(terms))


def mint_local_iri(canonical_key: str, namespace: str = DEFAULT_NAMESPACE) -> str:
    """Mints a deterministic IRI under the local namespace.

    Spaces become `-`; every character outside `[a-z0-9-]` is written as
    uppercase `%HH` escapes of its UTF-8 bytes.

    Example:
        >>> mint_local_iri("(+)-catechin", "http://example.org/ff/")
        'http://example.org/ff/%28%2B%29-catechin'
    """
    if not namespace.endswith(("/", "#")):
        raise FlavoKGError(f"namespace must end with '/' or '#': {namespace}")
    if not canonical_key:
        raise FlavoKGError("cannot mint an IRI for an empty canonical key")
    slug = []
    for char in canonical_key.replace(" ", "-"):
        if char in _SLUG_SAFE:
            slug.append(char)
        else:
            slug.extend(f"%{byte:02X}" for byte in char.encode("utf-8"))
    return namespace + "".join(slug)


def expand_curie(curie: str, prefixes: Optional[Mapping[str, str]] = None) -> str:
    """Expands a CURIE through the prefix map, falling back to OBO PURLs."""
    match = CURIE_PATTERN.match(curie)
    if not match:
        raise VocabularyError(f"malformed CURIE '{curie}'")
    prefix, local = match.groups()
    if prefixes and prefix in prefixes:
        return prefixes[prefix] + local
    return f"{OBO_PURL_BASE}{prefix}_{local}"


def vocabulary_order(
    kind: EntityKind,
    vocabs: Sequence[Vocabulary],
    order: Optional[Mapping[EntityKind, Sequence[str]]] = None,
) -> List[Vocabulary]:
    """Orders the loaded vocabularies for one entity kind."""
    preferred = (order or {}).get(kind) or DEFAULT_VOCABULARY_ORDER.get(
        kind, FALLBACK_VOCABULARY_ORDER
    )
    by_name = {vocab.name: vocab for vocab in vocabs}
    ordered = [by_name[name] for name in preferred if name in by_name]
    ordered.extend(vocab for vocab in vocabs if vocab.name not in preferred)
    return ordered


def map_term(
    entity: CanonicalEntity,
    vocabs: Sequence[Vocabulary],
    namespace: str = DEFAULT_NAMESPACE,
    pinned: Optional[str] = None,
    plural_exceptions: AbstractSet[str] = frozenset(),
) -> MappingResult:
    """Maps one entity to the best vocabulary term, or mints a local IRI.

    Tiers are tried in order exact_label, normalized_label, synonym. Within
    a tier the earlier vocabulary wins, and within a vocabulary the
    smallest CURIE. A pinned CURIE (declared in a source table) wins
    outright but must exist in one of the vocabularies. Plural exceptions
    must be the ones the entity keys were canonicalized with.

    Raises:
        VocabularyError: If the pinned CURIE is absent from every vocabulary.
    """
    if pinned:
        for vocab in vocabs:
            if pinned in vocab:
                return MappingResult(
                    entity.canonical_key,
                    entity.kind,
                    MatchOutcome.EXACT_LABEL,
                    pinned,
                    vocab.name,
                )
        raise VocabularyError(
            f"declared identifier '{pinned}' for '{entity.display_label}' "
            "is not in any supplied vocabulary"
        )

    for outcome in (
        MatchOutcome.EXACT_LABEL,
        MatchOutcome.NORMALIZED_LABEL,
        MatchOutcome.SYNONYM,
    ):
        for vocab in vocabs:
            curie = vocab.lookup(outcome, entity, plural_exceptions)
            if curie is not None:
                return MappingResult(
                    entity.canonical_key, entity.kind, outcome, curie, vocab.name
                )
    return MappingResult(
        entity.canonical_key,
        entity.kind,
        MatchOutcome.MINTED,
        mint_local_iri(entity.canonical_key, namespace),
    )


def map_entities(
    entities: Iterable[CanonicalEntity],
    vocabs: Sequence[Vocabulary],
    namespace: str = DEFAULT_NAMESPACE,
    order: Optional[Mapping[EntityKind, Sequence[str]]] = None,
    pinned: Optional[Mapping[Tuple[EntityKind, str], str]] = None,
    plural_exceptions: AbstractSet[str] = frozenset(),
) -> List[MappingResult]:
    """Maps every entity using the per-kind vocabulary order."""
    results = []
    for entity in entities:
        ordered = vocabulary_order(entity.kind, vocabs, order)
        pin = (pinned or {}).get((entity.kind, entity.canonical_key))
        results.append(map_term(entity, ordered, namespace, pin, plural_exceptions))
    results.sort(key=lambda r: (str(r.kind), r.entity_key))
    return results


@dataclass(frozen=True)
class CoverageSummary:
    counts: Tuple[Tuple[str, MatchOutcome, int], ...]
    mapped_fraction: float

    def kind_fraction(self, kind: str) -> float:
        total = sum(n for k, _, n in self.counts if k == kind)
        mapped = sum(
            n for k, o, n in self.counts if k == kind and o != MatchOutcome.MINTED
        )
        return mapped / total if total else 0.0

    def to_tsv(self) -> str:
        lines = ["kind\toutcome\tcount"]
        lines.extend(f"{kind}\t{outcome}\t{count}" for kind, outcome, count in self.counts)
        lines.append(f"*\tmapped_fraction\t{self.mapped_fraction:.4f}")
        return "\n".join(lines) + "\n"


def mapping_report(results: Iterable[MappingResult]) -> CoverageSummary:
    """Counts outcomes per kind and the overall mapped fraction."""
    tally: Counter = Counter()
    kinds = set()
    total = 0
    mapped = 0
    for result in results:
        kinds.add(str(result.kind))
        tally[(str(result.kind), result.outcome)] += 1
        total += 1
        if not result.is_minted:
            mapped += 1
    counts = tuple(
        (kind, outcome, tally[(kind, outcome)])
        for kind in sorted(kinds)
        for outcome in sorted(MatchOutcome, key=lambda o: o.rank)
    )
    return CoverageSummary(counts, mapped / total if total else 0.0)


def mappings_tsv(results: Sequence[MappingResult]) -> str:
    lines = ["kind\tentity_key\toutcome\tiri_or_curie\tvocabulary"]
    for r in results:
        lines.append(
            f"{r.kind}\t{r.entity_key}\t{r.outcome}\t{r.iri_or_curie}\t{r.vocabulary or ''}"
        )
    return "\n".join(lines) + "\n"
