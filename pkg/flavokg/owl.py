"""
OWL document model, prefix handling and the canonical Turtle writer.

Axioms always hold absolute IRIs. Prefixes only matter at the edges:
CURIEs are expanded when a template is read and compacted again when
Turtle is written.
"""

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Set,
    Tuple,
    Union,
)

from rdflib import Graph, Literal, URIRef
from rdflib.namespace import OWL, RDF, RDFS, XSD

from .config import DEFAULT_NAMESPACE, DEFAULT_NAMESPACE_PREFIX
from .errors import FlavoKGError, LabelConflictError, PrefixError
from .recycle import CURIE_PATTERN

logger = logging.getLogger(__name__)

OBO_IN_OWL = "http://www.geneontology.org/formats/oboInOwl#"

STANDARD_PREFIXES: Dict[str, str] = {
    "owl": str(OWL),
    "rdf": str(RDF),
    "rdfs": str(RDFS),
    "xsd": str(XSD),
}

# Locals are compacted only when they stay readable by any Turtle parser.
_SAFE_LOCAL = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_-]*$")
_PREFIX_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$")
_IRIREF_ILLEGAL = re.compile(r'[\x00-\x20<>"{}|^`\\]')


def check_iri(iri: str) -> str:
    """Returns the IRI unchanged if Turtle can write it between angle brackets.

    Raises:
        FlavoKGError: On a space, a control character or one of <>"{}|^`\\.
    """
    bad = _IRIREF_ILLEGAL.search(iri)
    if bad:
        raise FlavoKGError(f"IRI <{iri}> contains {bad.group()!r}, which Turtle cannot write")
    return iri


@dataclass(frozen=True, order=True)
class ClassDeclaration:
    iri: str


@dataclass(frozen=True, order=True)
class Label:
    iri: str
    text: str


@dataclass(frozen=True, order=True)
class SubClassOf:
    sub: str
    sup: str


@dataclass(frozen=True, order=True)
class Annotation:
    """A literal-valued annotation."""

    iri: str
    property: str
    value: str


@dataclass(frozen=True, order=True)
class Relation:
    """An IRI-valued triple between two classes."""

    subject: str
    property: str
    object: str


Axiom = Union[ClassDeclaration, Label, SubClassOf, Annotation, Relation]


@dataclass(frozen=True)
class OwlDocument:
    axioms: FrozenSet[Axiom] = field(default_factory=frozenset)

    def __len__(self) -> int:
        return len(self.axioms)

    def __iter__(self) -> Iterator[Axiom]:
        return iter(sorted(self.axioms, key=_axiom_sort_key))

    def __or__(self, other: "OwlDocument") -> "OwlDocument":
        return OwlDocument(self.axioms | other.axioms)

    def of_type(self, axiom_type: type) -> List[Axiom]:
        return sorted(a for a in self.axioms if isinstance(a, axiom_type))

    def labels(self) -> Dict[str, Set[str]]:
        found: Dict[str, Set[str]] = defaultdict(set)
        for axiom in self.axioms:
            if isinstance(axiom, Label):
                found[axiom.iri].add(axiom.text)
        return dict(found)


def _axiom_sort_key(axiom: Axiom) -> Tuple[str, Tuple[str, ...]]:
    return (type(axiom).__name__, tuple(vars(axiom).values()))


class PrefixMap:
    """prefix -> IRI base, with the owl/rdf/rdfs/xsd prefixes always present."""

    def __init__(self, entries: Optional[Mapping[str, str]] = None) -> None:
        self._entries: Dict[str, str] = dict(STANDARD_PREFIXES)
        for prefix, base in (entries or {}).items():
            self.add(prefix, base)

    @classmethod
    def default(
        cls,
        namespace: str = DEFAULT_NAMESPACE,
        namespace_prefix: str = DEFAULT_NAMESPACE_PREFIX,
    ) -> "PrefixMap":
        return cls({namespace_prefix: namespace, "oboInOwl": OBO_IN_OWL})

    def add(self, prefix: str, base: str) -> None:
        if not _PREFIX_NAME.match(prefix):
            raise FlavoKGError(f"invalid prefix name '{prefix}'")
        known = self._entries.get(prefix)
        if known is not None and known != base:
            raise FlavoKGError(
                f"prefix '{prefix}' bound to both <{known}> and <{base}>"
            )
        self._entries[prefix] = base

    def __contains__(self, prefix: object) -> bool:
        return prefix in self._entries

    def __getitem__(self, prefix: str) -> str:
        return self._entries[prefix]

    def items(self) -> List[Tuple[str, str]]:
        return sorted(self._entries.items())

    def as_dict(self) -> Dict[str, str]:
        return dict(self._entries)

    def merged(self, other: "PrefixMap") -> "PrefixMap":
        combined = PrefixMap(self._entries)
        for prefix, base in other.items():
            combined.add(prefix, base)
        return combined

    def expand(self, value: str) -> str:
        """Expands a CURIE; absolute IRIs (with `://` or `urn:`) pass through.

        Raises:
            PrefixError: If the CURIE's prefix is not bound.
            FlavoKGError: If the IRI holds characters Turtle cannot write.
        """
        value = value.strip()
        if value.startswith("<") and value.endswith(">"):
            return check_iri(value[1:-1])
        if "://" in value or value.startswith("urn:"):
            return check_iri(value)
        match = CURIE_PATTERN.match(value)
        if not match:
            raise PrefixError(value)
        prefix, local = match.groups()
        if prefix not in self._entries:
            raise PrefixError(prefix)
        return check_iri(self._entries[prefix] + local)

    def compact(self, iri: str) -> Optional[str]:
        """The CURIE for an IRI under its longest matching base, if readable."""
        best: Optional[Tuple[str, str]] = None
        for prefix, base in self._entries.items():
            if iri.startswith(base) and (best is None or len(base) > len(best[1])):
                best = (prefix, base)
        if best is None:
            return None
        local = iri[len(best[1]) :]
        if not _SAFE_LOCAL.match(local):
            return None
        return f"{best[0]}:{local}"


def load_prefixes(tsv_text: str) -> PrefixMap:
    """Reads `prefix TAB IRI-base` rows.

    Raises:
        FlavoKGError: On a malformed row or a prefix bound twice.
    """
    entries: Dict[str, str] = {}
    for line_number, line in enumerate(tsv_text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 2 or not all(parts):
            raise FlavoKGError(
                f"prefixes line {line_number}: expected prefix and IRI base"
            )
        prefix, base = parts
        if prefix in entries and entries[prefix] != base:
            raise FlavoKGError(
                f"prefixes line {line_number}: prefix '{prefix}' bound twice"
            )
        entries[prefix] = base
    return PrefixMap(entries)


def merge_documents(docs: Iterable[OwlDocument]) -> OwlDocument:
    """Set union of axioms.

    Raises:
        LabelConflictError: If the union gives one IRI two different labels.
    """
    axioms: Set[Axiom] = set()
    for doc in docs:
        axioms.update(doc.axioms)
    merged = OwlDocument(frozenset(axioms))
    for iri, texts in sorted(merged.labels().items()):
        if len(texts) > 1:
            raise LabelConflictError(iri, list(texts))
    return merged


def _escape_literal(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


_TYPE = str(RDF.type)
_LABEL = str(RDFS.label)
_SUBCLASS = str(RDFS.subClassOf)
_CLASS = str(OWL.Class)
_PREDICATE_RANK = {_TYPE: 0, _LABEL: 1, _SUBCLASS: 2}


def _triples(doc: OwlDocument) -> Iterator[Tuple[str, str, Tuple[int, str]]]:
    """(subject, predicate, object) with objects tagged 0 = IRI, 1 = literal."""
    for axiom in doc.axioms:
        if isinstance(axiom, ClassDeclaration):
            yield axiom.iri, _TYPE, (0, _CLASS)
        elif isinstance(axiom, Label):
            yield axiom.iri, _LABEL, (1, axiom.text)
        elif isinstance(axiom, SubClassOf):
            yield axiom.sub, _SUBCLASS, (0, axiom.sup)
        elif isinstance(axiom, Annotation):
            yield axiom.iri, axiom.property, (1, axiom.value)
        elif isinstance(axiom, Relation):
            yield axiom.subject, axiom.property, (0, axiom.object)


def serialize_turtle(doc: OwlDocument, prefixes: Optional[PrefixMap] = None) -> str:
    """Writes the canonical, byte-stable Turtle rendering of a document.

    The prefix block is sorted by prefix name. Subjects are sorted by IRI
    and separated by a blank line; each line holds one full triple, with
    `a`, then rdfs:label, then rdfs:subClassOf, then other predicates by
    IRI, and objects sorted within a predicate.
    """
    prefixes = prefixes or PrefixMap()

    def term(iri: str) -> str:
        return prefixes.compact(iri) or f"<{check_iri(iri)}>"

    lines = [f"@prefix {prefix}: <{base}> ." for prefix, base in prefixes.items()]

    by_subject: Dict[str, Set[Tuple[str, Tuple[int, str]]]] = defaultdict(set)
    for subject, predicate, obj in _triples(doc):
        by_subject[subject].add((predicate, obj))

    for subject in sorted(by_subject):
        lines.append("")
        ordered = sorted(
            by_subject[subject],
            key=lambda po: (_PREDICATE_RANK.get(po[0], 3), po[0], po[1]),
        )
        for predicate, (is_literal, value) in ordered:
            rendered_predicate = "a" if predicate == _TYPE else term(predicate)
            rendered_object = f'"{_escape_literal(value)}"' if is_literal else term(value)
            lines.append(f"{term(subject)} {rendered_predicate} {rendered_object} .")
    return "\n".join(lines) + "\n"


def parse_turtle(text: str) -> OwlDocument:
    """Reads Turtle back into axioms with rdflib.

    rdf:type owl:Class becomes a ClassDeclaration; rdfs:label a Label;
    rdfs:subClassOf a SubClassOf; any other literal object an Annotation and
    any other IRI object a Relation.
    """
    rdf_graph = Graph()
    rdf_graph.parse(data=text, format="turtle")
    axioms: Set[Axiom] = set()
    for s, p, o in rdf_graph:
        subject, predicate = str(s), str(p)
        if isinstance(o, Literal):
            if p == RDFS.label:
                axioms.add(Label(subject, str(o)))
            else:
                axioms.add(Annotation(subject, predicate, str(o)))
        elif isinstance(o, URIRef):
            if p == RDF.type and o == OWL.Class:
                axioms.add(ClassDeclaration(subject))
            elif p == RDFS.subClassOf:
                axioms.add(SubClassOf(subject, str(o)))
            else:
                axioms.add(Relation(subject, predicate, str(o)))
        else:
            logger.warning(f"skipping blank-node triple on subject {subject}")
    return OwlDocument(frozenset(axioms))


def prefixes_of_turtle(text: str) -> PrefixMap:
    """The prefix bindings declared in a Turtle text."""
    rdf_graph = Graph(bind_namespaces="none")
    rdf_graph.parse(data=text, format="turtle")
    return PrefixMap({prefix: str(base) for prefix, base in rdf_graph.namespaces() if prefix})
