"""
Template sheets: directive-headed CSV tables in the ROBOT template style,
their expansion into OWL axioms, and the compilation of a knowledge graph
into three layers of sheets (vocabulary, axioms, food/flavonoid merge).

Supported directives (case-sensitive), one per column in row 2:

    ID                  the class IRI or CURIE (exactly one column)
    LABEL               rdfs:label
    TYPE                `class` or `owl:Class`; empty means class
    SC %                rdfs:subClassOf the cell value
    A <property>        literal annotation
    AI <property>       IRI-valued annotation (a Relation axiom)
    (empty)             column ignored

SC, A and AI accept a ` SPLIT=<char>` suffix to hold several values.
"""

import csv
import io
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .config import DEFAULT_NAMESPACE, DEFAULT_NAMESPACE_PREFIX
from .errors import TemplateError
from .graph import Direction, EdgeKind, KnowledgeGraph, NodeKind, derived_contains
from .owl import (
    OBO_IN_OWL,
    Annotation,
    Axiom,
    ClassDeclaration,
    Label,
    OwlDocument,
    PrefixMap,
    Relation,
    SubClassOf,
    merge_documents,
)

logger = logging.getLogger(__name__)

_VALUED_DIRECTIVE = re.compile(r"^(SC %|A (\S+)|AI (\S+))(?: SPLIT=(.))?$")
CLASS_TYPES = ("", "class", "owl:Class")

# Kind root classes: (local name, label).
KIND_ROOTS: Dict[str, Tuple[str, str]] = {
    NodeKind.FOOD_GROUP: ("Food", "Food"),
    NodeKind.FOOD: ("Food", "Food"),
    NodeKind.FLAVONOID_SUBCLASS: ("Flavonoid", "Flavonoid"),
    NodeKind.FLAVONOID: ("Flavonoid", "Flavonoid"),
    NodeKind.COMPOSITION: ("ChemicalComposition", "Chemical composition"),
    NodeKind.DISEASE: ("Disease", "Disease"),
    NodeKind.DRUG: ("Drug", "Drug"),
    NodeKind.CLINICAL_TRIAL: ("ClinicalTrial", "Clinical trial"),
}

RELATION_NAMES: Dict[str, str] = {
    EdgeKind.HAS_ASSOCIATED_DISEASE: "hasAssociatedDisease",
    EdgeKind.HAS_COMPONENT: "hasComponent",
    EdgeKind.HAS_COMPOSITION: "hasComposition",
    EdgeKind.FORMULATED_FROM: "formulatedFrom",
    EdgeKind.EVALUATED_IN: "evaluatedIn",
    EdgeKind.TARGETS: "targetsDisease",
}

CONTAINS_FLAVONOID = "containsFlavonoid"
ASSOCIATED_DISEASE_LABEL = "associatedDisease"
HAS_DB_XREF = OBO_IN_OWL + "hasDbXref"


class DirectiveKind(str, Enum):
    ID = "ID"
    LABEL = "LABEL"
    TYPE = "TYPE"
    SUBCLASS = "SC"
    ANNOTATION = "A"
    IRI_ANNOTATION = "AI"
    IGNORE = ""


@dataclass(frozen=True)
class Directive:
    kind: DirectiveKind
    argument: Optional[str] = None
    split: Optional[str] = None

    def values(self, cell: str) -> List[str]:
        cell = cell.strip()
        if not cell:
            return []
        if self.split is None:
            return [cell]
        return [part.strip() for part in cell.split(self.split) if part.strip()]


def parse_directive(text: str, row: int = 2) -> Directive:
    """Parses one directive cell.

    Raises:
        TemplateError: Quoting the directive verbatim when it is unknown.
    """
    stripped = text.strip()
    if not stripped:
        return Directive(DirectiveKind.IGNORE)
    if stripped in ("ID", "LABEL", "TYPE"):
        return Directive(DirectiveKind(stripped))
    match = _VALUED_DIRECTIVE.match(stripped)
    if not match:
        raise TemplateError(f"unknown directive '{text}'", row)
    head, annotation, iri_annotation, split = match.groups()
    if head == "SC %":
        return Directive(DirectiveKind.SUBCLASS, split=split)
    if annotation is not None:
        return Directive(DirectiveKind.ANNOTATION, annotation, split)
    return Directive(DirectiveKind.IRI_ANNOTATION, iri_annotation, split)


@dataclass(frozen=True)
class TemplateSheet:
    name: str
    columns: Tuple[Tuple[str, str], ...]
    rows: Tuple[Tuple[str, ...], ...] = ()

    @property
    def directives(self) -> List[Directive]:
        return [parse_directive(directive) for _, directive in self.columns]

    @property
    def id_column(self) -> int:
        return [d.kind for d in self.directives].index(DirectiveKind.ID)


def parse_template(csv_text: str, name: str = "template") -> TemplateSheet:
    """Reads a template sheet: headers, then directives, then data rows.

    Short data rows are padded with empty cells; rows are numbered as in
    the CSV file, so the first data row is row 3.

    Raises:
        TemplateError: On a missing directive row, an unknown directive,
            zero or several ID columns, an over-long row or an empty ID.
    """
    if csv_text.startswith("\ufeff"):
        csv_text = csv_text[1:]
    lines = list(csv.reader(io.StringIO(csv_text, newline="")))
    if len(lines) < 2:
        raise TemplateError("a template needs a header row and a directive row")
    headers, directive_cells = lines[0], lines[1]
    if len(directive_cells) > len(headers):
        raise TemplateError("more directives than header columns", 2)
    directive_cells = directive_cells + [""] * (len(headers) - len(directive_cells))
    directives = [parse_directive(cell, 2) for cell in directive_cells]

    id_columns = [i for i, d in enumerate(directives) if d.kind == DirectiveKind.ID]
    if len(id_columns) != 1:
        raise TemplateError(
            f"expected exactly one ID column, found {len(id_columns)}", 2
        )
    id_column = id_columns[0]

    rows: List[Tuple[str, ...]] = []
    for row_number, cells in enumerate(lines[2:], start=3):
        if not any(cell.strip() for cell in cells):
            continue
        if len(cells) > len(headers):
            if any(cell.strip() for cell in cells[len(headers) :]):
                raise TemplateError(
                    f"{len(cells)} cells for {len(headers)} columns", row_number
                )
            cells = cells[: len(headers)]
        cells = cells + [""] * (len(headers) - len(cells))
        if not cells[id_column].strip():
            raise TemplateError("empty ID cell", row_number)
        rows.append(tuple(cells))

    return TemplateSheet(
        name,
        tuple((h.strip(), d.strip()) for h, d in zip(headers, directive_cells)),
        tuple(rows),
    )


def sheet_to_csv(sheet: TemplateSheet) -> str:
    """Writes a sheet back in the layout `parse_template` reads."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([header for header, _ in sheet.columns])
    writer.writerow([directive for _, directive in sheet.columns])
    writer.writerows(sheet.rows)
    return buffer.getvalue()


def expand_template(sheet: TemplateSheet, prefixes: PrefixMap) -> OwlDocument:
    """Expands every data row into axioms.

    One ClassDeclaration per row; LABEL gives a Label; each SC value a
    SubClassOf; each A value an Annotation; each AI value a Relation.
    Empty cells produce nothing.

    Raises:
        PrefixError: Naming the first unresolvable prefix.
        TemplateError: On a TYPE other than a class.
    """
    directives = sheet.directives
    axioms: Set[Axiom] = set()
    for offset, cells in enumerate(sheet.rows):
        row_number = offset + 3
        subject = prefixes.expand(cells[sheet.id_column])
        axioms.add(ClassDeclaration(subject))
        for directive, cell in zip(directives, cells):
            if directive.kind == DirectiveKind.LABEL and cell.strip():
                axioms.add(Label(subject, cell.strip()))
            elif directive.kind == DirectiveKind.TYPE:
                if cell.strip() not in CLASS_TYPES:
                    raise TemplateError(
                        f"unsupported TYPE '{cell.strip()}'", row_number
                    )
            elif directive.kind == DirectiveKind.SUBCLASS:
                for value in directive.values(cell):
                    axioms.add(SubClassOf(subject, prefixes.expand(value)))
            elif directive.kind == DirectiveKind.ANNOTATION:
                prop = prefixes.expand(directive.argument)
                for value in directive.values(cell):
                    axioms.add(Annotation(subject, prop, value))
            elif directive.kind == DirectiveKind.IRI_ANNOTATION:
                prop = prefixes.expand(directive.argument)
                for value in directive.values(cell):
                    axioms.add(Relation(subject, prop, prefixes.expand(value)))
    return OwlDocument(frozenset(axioms))


def build_ontology(sheets: Sequence[TemplateSheet], prefixes: PrefixMap) -> OwlDocument:
    """Expands every sheet and merges the results."""
    return merge_documents(expand_template(sheet, prefixes) for sheet in sheets)


def relation_name(edge_kind: str) -> str:
    """The local property name of an edge kind.

    Built-in kinds have fixed names; extension kinds are camelCased, and
    prefixed with `rel` when that leaves no capital letter.
    """
    if edge_kind in RELATION_NAMES:
        return RELATION_NAMES[edge_kind]
    words = [w for w in edge_kind.split("_") if w]
    camel = words[0].lower() + "".join(w.capitalize() for w in words[1:])
    if camel == camel.lower():
        return "rel" + "".join(w.capitalize() for w in words)
    return camel


def kind_root(kind: str) -> Tuple[str, str]:
    if kind in KIND_ROOTS:
        return KIND_ROOTS[kind]
    words = [w for w in kind.split("_") if w]
    return "".join(w.capitalize() for w in words), " ".join(words).capitalize()


@dataclass(frozen=True)
class LayeredTemplates:
    layer1: Tuple[TemplateSheet, ...]
    layer2: Tuple[TemplateSheet, ...]
    layer3: Tuple[TemplateSheet, ...]

    def sheets(self) -> List[TemplateSheet]:
        return [*self.layer1, *self.layer2, *self.layer3]


def graph_to_templates(
    graph: KnowledgeGraph,
    prefixes: Optional[PrefixMap] = None,
    namespace: str = DEFAULT_NAMESPACE,
    namespace_prefix: str = DEFAULT_NAMESPACE_PREFIX,
) -> LayeredTemplates:
    """Compiles the graph into layered template sheets.

    layer1 holds the vocabulary: a root sheet with the kind root classes
    and one ID+LABEL sheet per node kind. layer2 adds the hierarchy (SC %,
    falling back to the kind root), external identifiers as hasDbXref
    annotations and one AI column per outgoing relation. layer3 joins each
    food with its composition and the flavonoids that composition holds.
    Identifier nodes get no sheet of their own. Rows are sorted by IRI.
    """
    prefixes = prefixes or PrefixMap.default(namespace, namespace_prefix)

    def ref(iri: str) -> str:
        return prefixes.compact(iri) or iri

    def prop(local: str) -> str:
        return ref(namespace + local)

    kinds = sorted({str(node.kind) for node in graph.nodes()} - {NodeKind.IDENTIFIER})

    roots: Dict[str, Tuple[str, str]] = {}
    for kind in kinds:
        local, label = kind_root(kind)
        roots[namespace + local] = (local, label)
    layer1 = [
        TemplateSheet(
            "layer1_root",
            (("ID", "ID"), ("LABEL", "LABEL")),
            tuple((ref(iri), roots[iri][1]) for iri in sorted(roots)),
        )
    ]
    for kind in kinds:
        layer1.append(
            TemplateSheet(
                f"layer1_{kind}",
                (("ID", "ID"), ("LABEL", "LABEL")),
                tuple((ref(n.iri), n.display_label) for n in graph.nodes(kind)),
            )
        )

    asserted: Dict[str, Set[str]] = {}
    for edge in graph.edges():
        if edge.source in graph:
            asserted.setdefault(str(graph.node(edge.source).kind), set()).add(edge.kind)

    layer2 = []
    skipped = {EdgeKind.PARENT_OF, EdgeKind.HAS_ID, EdgeKind.HAS_COMPOSITION}
    for kind in kinds:
        out_kinds = set(graph.schema.out_edge_kinds(kind)) | asserted.get(kind, set())
        relation_kinds = sorted(k for k in out_kinds if k not in skipped)
        columns = [
            ("ID", "ID"),
            ("Parent", "SC % SPLIT=|"),
            ("Xref", f"A {ref(HAS_DB_XREF)} SPLIT=|"),
        ]
        columns.extend(
            (relation_name(edge_kind), f"AI {prop(relation_name(edge_kind))} SPLIT=|")
            for edge_kind in relation_kinds
        )
        with_disease_labels = EdgeKind.HAS_ASSOCIATED_DISEASE in relation_kinds
        if with_disease_labels:
            columns.append(
                (ASSOCIATED_DISEASE_LABEL, f"A {prop(ASSOCIATED_DISEASE_LABEL)} SPLIT=|")
            )

        root_iri = namespace + kind_root(kind)[0]
        rows = []
        for node in graph.nodes(kind):
            parents = [
                ref(p) for p in graph.adjacent_iris(node.iri, EdgeKind.PARENT_OF, Direction.IN)
            ] or [ref(root_iri)]
            xrefs = [
                graph.node(i).display_label
                for i in graph.adjacent_iris(node.iri, EdgeKind.HAS_ID, Direction.OUT)
                if i in graph
            ]
            row = ["|".join(sorted(parents)), "|".join(sorted(xrefs))]
            for edge_kind in relation_kinds:
                targets = graph.adjacent_iris(node.iri, edge_kind, Direction.OUT)
                row.append("|".join(sorted(ref(t) for t in targets)))
            if with_disease_labels:
                diseases = graph.neighbors(
                    node.iri, EdgeKind.HAS_ASSOCIATED_DISEASE, Direction.OUT
                )
                row.append("|".join(sorted(d.display_label for d in diseases)))
            rows.append((ref(node.iri), *row))
        layer2.append(TemplateSheet(f"layer2_{kind}", tuple(columns), tuple(rows)))

    contains: Dict[str, List[str]] = {}
    for food_iri, flavonoid_iri, _ in derived_contains(graph):
        contains.setdefault(food_iri, []).append(ref(flavonoid_iri))
    merge_rows = []
    for food in graph.nodes(NodeKind.FOOD):
        compositions = graph.adjacent_iris(food.iri, EdgeKind.HAS_COMPOSITION, Direction.OUT)
        merge_rows.append(
            (
                ref(food.iri),
                "|".join(sorted(ref(c) for c in compositions)),
                "|".join(sorted(set(contains.get(food.iri, [])))),
            )
        )
    layer3 = [
        TemplateSheet(
            "layer3_food_flavonoid",
            (
                ("ID", "ID"),
                ("Composition", f"AI {prop(RELATION_NAMES[EdgeKind.HAS_COMPOSITION])} SPLIT=|"),
                ("Flavonoids", f"AI {prop(CONTAINS_FLAVONOID)} SPLIT=|"),
            ),
            tuple(merge_rows),
        )
    ]

    logger.debug(
        f"compiled {len(layer1)} + {len(layer2)} + {len(layer3)} template sheets"
    )
    return LayeredTemplates(tuple(layer1), tuple(layer2), tuple(layer3))
