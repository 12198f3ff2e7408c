"""
Structural checks over the knowledge graph and the OWL document.

Findings are data, never exceptions. Each code has a fixed severity;
errors break the tree shape of the ontology, warnings are curation debt.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from .graph import Direction, EdgeKind, KnowledgeGraph, NodeKind
from .models import V1Finding, V1Findings
from .owl import Annotation, ClassDeclaration, OwlDocument, Relation, SubClassOf
from .recycle import MappingResult

logger = logging.getLogger(__name__)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


class FindingCode(str, Enum):
    CYCLE = "CYCLE"
    DANGLING_EDGE = "DANGLING_EDGE"
    DUPLICATE_ID = "DUPLICATE_ID"
    LABEL_CONFLICT = "LABEL_CONFLICT"
    MULTIPLE_PARENTS = "MULTIPLE_PARENTS"
    ORPHAN_NODE = "ORPHAN_NODE"
    REDUNDANT_EDGE = "REDUNDANT_EDGE"
    UNKNOWN_SUBCLASS = "UNKNOWN_SUBCLASS"
    UNMAPPED_TERM = "UNMAPPED_TERM"

    def __str__(self) -> str:
        return self.value

    @property
    def severity(self) -> Severity:
        return SEVERITIES[self]


SEVERITIES: Dict[FindingCode, Severity] = {
    FindingCode.CYCLE: Severity.ERROR,
    FindingCode.DANGLING_EDGE: Severity.ERROR,
    FindingCode.DUPLICATE_ID: Severity.ERROR,
    FindingCode.MULTIPLE_PARENTS: Severity.ERROR,
    FindingCode.LABEL_CONFLICT: Severity.ERROR,
    FindingCode.UNKNOWN_SUBCLASS: Severity.ERROR,
    FindingCode.ORPHAN_NODE: Severity.WARNING,
    FindingCode.REDUNDANT_EDGE: Severity.WARNING,
    FindingCode.UNMAPPED_TERM: Severity.WARNING,
}


@dataclass(frozen=True)
class Finding:
    code: FindingCode
    subject: Tuple[str, ...]
    message: str

    @property
    def severity(self) -> Severity:
        return self.code.severity

    @property
    def sort_key(self) -> Tuple[str, Tuple[str, ...], str]:
        return (str(self.code), self.subject, self.message)

    def to_v1(self) -> V1Finding:
        return V1Finding(
            code=str(self.code),
            severity=str(self.severity),
            subject=list(self.subject),
            message=self.message,
        )


# Kinds that must hang under exactly one parent_of parent.
HIERARCHY_KINDS = (NodeKind.FOOD, NodeKind.FLAVONOID)


def _cycles(graph: KnowledgeGraph) -> List[Tuple[str, ...]]:
    """parent_of cycles, each rotated to start at its smallest IRI."""
    found = set()
    for cycle in nx.simple_cycles(graph.to_networkx(EdgeKind.PARENT_OF)):
        start = cycle.index(min(cycle))
        found.add(tuple(cycle[start:] + cycle[:start]))
    return sorted(found)


def _redundant_edges(graph: KnowledgeGraph) -> List[Tuple[str, str]]:
    """parent_of edges implied by a path through the remaining edges."""
    hierarchy = graph.to_networkx(EdgeKind.PARENT_OF)
    redundant = []
    for source, target in sorted(hierarchy.edges()):
        # Another path into the target must arrive over a different in-edge.
        if hierarchy.in_degree(target) < 2:
            continue
        hierarchy.remove_edge(source, target)
        try:
            if nx.has_path(hierarchy, source, target):
                redundant.append((source, target))
        finally:
            hierarchy.add_edge(source, target)
    return redundant


def check_graph(
    graph: KnowledgeGraph,
    mappings: Sequence[MappingResult] = (),
    known_subclasses: Optional[Iterable[str]] = None,
) -> List[Finding]:
    """Runs every structural check over a graph.

    Args:
        graph (KnowledgeGraph): A built graph or one loaded from CSV.
        mappings (Sequence[MappingResult]): Minted mappings become
            UNMAPPED_TERM warnings.
        known_subclasses (Optional[Iterable[str]]): IRIs accepted as
            flavonoid subclasses; defaults to the graph's subclass nodes.

    Returns:
        List[Finding]: Sorted by (code, subject).
    """
    findings: List[Finding] = []

    for edge in graph.edges():
        missing = [iri for iri in (edge.source, edge.target) if iri not in graph]
        if missing:
            findings.append(
                Finding(
                    FindingCode.DANGLING_EDGE,
                    (edge.source, edge.target),
                    f"{edge.kind} edge points at missing node(s): " + ", ".join(missing),
                )
            )

    for iri in sorted(graph.duplicate_iris):
        findings.append(
            Finding(FindingCode.DUPLICATE_ID, (iri,), f"IRI {iri} is declared more than once")
        )

    subclasses: Set[str] = (
        set(known_subclasses)
        if known_subclasses is not None
        else {n.iri for n in graph.nodes(NodeKind.FLAVONOID_SUBCLASS)}
    )

    for cycle in _cycles(graph):
        findings.append(
            Finding(
                FindingCode.CYCLE,
                cycle,
                "parent_of cycle: " + " -> ".join(cycle + (cycle[0],)),
            )
        )

    for kind in HIERARCHY_KINDS:
        for node in graph.nodes(kind):
            parents = graph.adjacent_iris(node.iri, EdgeKind.PARENT_OF, Direction.IN)
            if not parents:
                findings.append(
                    Finding(
                        FindingCode.ORPHAN_NODE,
                        (node.iri,),
                        f"{kind} '{node.display_label}' has no parent",
                    )
                )
            elif len(parents) > 1:
                findings.append(
                    Finding(
                        FindingCode.MULTIPLE_PARENTS,
                        (node.iri,),
                        f"{kind} '{node.display_label}' has {len(parents)} parents: "
                        + ", ".join(parents),
                    )
                )
            if kind == NodeKind.FLAVONOID:
                for parent in parents:
                    if parent not in graph:
                        continue
                    parent_node = graph.node(parent)
                    if (
                        parent_node.kind != NodeKind.FLAVONOID_SUBCLASS
                        or parent not in subclasses
                    ):
                        findings.append(
                            Finding(
                                FindingCode.UNKNOWN_SUBCLASS,
                                (node.iri, parent),
                                f"flavonoid '{node.display_label}' is filed under "
                                f"'{parent_node.display_label}', which is not a known "
                                "flavonoid subclass",
                            )
                        )

    for source, target in _redundant_edges(graph):
        findings.append(
            Finding(
                FindingCode.REDUNDANT_EDGE,
                (source, target),
                f"parent_of {source} -> {target} is implied by other parent_of edges",
            )
        )

    for mapping in mappings:
        if mapping.is_minted:
            findings.append(
                Finding(
                    FindingCode.UNMAPPED_TERM,
                    (mapping.iri_or_curie,),
                    f"{mapping.kind} '{mapping.entity_key}' matched no vocabulary term",
                )
            )

    findings.sort(key=lambda f: f.sort_key)
    logger.debug(f"graph checks produced {len(findings)} findings")
    return findings


def check_ontology(doc: OwlDocument) -> List[Finding]:
    """Label conflicts and unconnected classes in an OWL document.

    A declared class is an orphan when it is neither sub nor super of any
    SubClassOf axiom and is the subject or object of no Annotation or
    Relation. Set semantics rule out duplicate axioms.
    """
    findings: List[Finding] = []
    for iri, texts in sorted(doc.labels().items()):
        if len(texts) > 1:
            findings.append(
                Finding(
                    FindingCode.LABEL_CONFLICT,
                    (iri,),
                    "conflicting labels: " + ", ".join(f'"{t}"' for t in sorted(texts)),
                )
            )

    connected: Set[str] = set()
    for axiom in doc.axioms:
        if isinstance(axiom, SubClassOf):
            connected.update((axiom.sub, axiom.sup))
        elif isinstance(axiom, Annotation):
            connected.add(axiom.iri)
        elif isinstance(axiom, Relation):
            connected.update((axiom.subject, axiom.object))
    for axiom in doc.of_type(ClassDeclaration):
        if axiom.iri not in connected:
            findings.append(
                Finding(
                    FindingCode.ORPHAN_NODE,
                    (axiom.iri,),
                    "class has no superclass, subclass or annotation",
                )
            )

    findings.sort(key=lambda f: f.sort_key)
    return findings


def has_errors(findings: Iterable[Finding]) -> bool:
    return any(f.severity == Severity.ERROR for f in findings)


def findings_tsv(findings: Iterable[Finding]) -> str:
    lines = ["code\tseverity\tsubject\tmessage"]
    for f in findings:
        lines.append(f"{f.code}\t{f.severity}\t{' '.join(f.subject)}\t{f.message}")
    return "\n".join(lines) + "\n"


def findings_to_v1(findings: Sequence[Finding]) -> V1Findings:
    counts = Counter(f.severity for f in findings)
    return V1Findings(
        findings=[f.to_v1() for f in findings],
        errors=counts[Severity.ERROR],
        warnings=counts[Severity.WARNING],
    )


@dataclass(frozen=True)
class CoverageStats:
    node_counts: Dict[str, int]
    edge_counts: Dict[str, int]
    mapped_fraction: Dict[str, float]
    association_count: int

    def to_tsv(self) -> str:
        lines = ["metric\tkind\tvalue"]
        lines.extend(f"nodes\t{k}\t{n}" for k, n in sorted(self.node_counts.items()))
        lines.extend(f"edges\t{k}\t{n}" for k, n in sorted(self.edge_counts.items()))
        lines.extend(
            f"mapped_fraction\t{k}\t{v:.4f}" for k, v in sorted(self.mapped_fraction.items())
        )
        lines.append(f"associations\t*\t{self.association_count}")
        return "\n".join(lines) + "\n"


def coverage_stats(
    graph: KnowledgeGraph, mappings: Sequence[MappingResult] = ()
) -> CoverageStats:
    """Node and edge counts per kind, mapped fraction per entity kind and
    the number of flavonoid to disease associations."""
    node_counts = Counter(str(n.kind) for n in graph.nodes())
    edge_counts = Counter(str(e.kind) for e in graph.edges())
    totals: Counter = Counter()
    mapped: Counter = Counter()
    for mapping in mappings:
        totals[str(mapping.kind)] += 1
        if not mapping.is_minted:
            mapped[str(mapping.kind)] += 1
    return CoverageStats(
        node_counts=dict(node_counts),
        edge_counts=dict(edge_counts),
        mapped_fraction={k: mapped[k] / totals[k] for k in totals},
        association_count=edge_counts.get(str(EdgeKind.HAS_ASSOCIATED_DISEASE), 0),
    )
