"""
The typed property graph: food groups, foods, compositions, flavonoid
subclasses, flavonoids, diseases, drugs, trials and identifiers.

A built graph is immutable. Readers can share it freely; the only way to
make one is `build_graph` (strict) or `load_graph_csv` (tolerant, for
hand-edited exports that validation should inspect).
"""

import csv
import hashlib
import io
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
)

import networkx as nx

from .config import DEFAULT_NAMESPACE
from .errors import GraphBuildError, IngestError, SchemaViolationError, UnknownNodeError
from .ingest import AssociationRecord, ContentRecord, DrugRecord, FoodRecord
from .normalize import CanonicalEntity, EntityKind, Normalizer
from .recycle import MappingResult, expand_curie, mint_local_iri

logger = logging.getLogger(__name__)


class NodeKind(str, Enum):
    FOOD_GROUP = "food_group"
    FOOD = "food"
    COMPOSITION = "composition"
    FLAVONOID_SUBCLASS = "flavonoid_subclass"
    FLAVONOID = "flavonoid"
    DISEASE = "disease"
    DRUG = "drug"
    CLINICAL_TRIAL = "clinical_trial"
    IDENTIFIER = "identifier"

    def __str__(self) -> str:
        return self.value


class EdgeKind(str, Enum):
    PARENT_OF = "parent_of"
    HAS_ID = "has_id"
    HAS_COMPOSITION = "has_composition"
    HAS_COMPONENT = "has_component"
    HAS_ASSOCIATED_DISEASE = "has_associated_disease"
    FORMULATED_FROM = "formulated_from"
    EVALUATED_IN = "evaluated_in"
    TARGETS = "targets"

    def __str__(self) -> str:
        return self.value


class Direction(str, Enum):
    OUT = "out"
    IN = "in"

    def __str__(self) -> str:
        return self.value


ANY_KIND = "*"

# Five subclasses seeded into every graph: (canonical key, display label).
SEED_SUBCLASSES: Tuple[Tuple[str, str], ...] = (
    ("anthocyanidins", "Anthocyanidins"),
    ("flavan-3-ols", "Flavan-3-ols"),
    ("flavanones", "Flavanones"),
    ("flavones", "Flavones"),
    ("flavonols", "Flavonols"),
)


class GraphSchema:
    """Allowed (source kind, edge kind, target kind) combinations."""

    def __init__(self, rules: Iterable[Tuple[str, str, str]] = ()) -> None:
        self._rules: Dict[str, Set[Tuple[str, str]]] = defaultdict(set)
        self._node_kinds: Set[str] = {str(kind) for kind in NodeKind}
        for edge_kind, source_kind, target_kind in rules:
            self.add_rule(edge_kind, source_kind, target_kind)

    @classmethod
    def default(cls) -> "GraphSchema":
        return cls(
            [
                (EdgeKind.PARENT_OF, NodeKind.FOOD_GROUP, NodeKind.FOOD),
                (EdgeKind.PARENT_OF, NodeKind.FLAVONOID_SUBCLASS, NodeKind.FLAVONOID),
                (EdgeKind.HAS_ID, ANY_KIND, NodeKind.IDENTIFIER),
                (EdgeKind.HAS_COMPOSITION, NodeKind.FOOD, NodeKind.COMPOSITION),
                (EdgeKind.HAS_COMPONENT, NodeKind.COMPOSITION, NodeKind.FLAVONOID),
                (
                    EdgeKind.HAS_ASSOCIATED_DISEASE,
                    NodeKind.FLAVONOID,
                    NodeKind.DISEASE,
                ),
                (EdgeKind.FORMULATED_FROM, NodeKind.DRUG, NodeKind.COMPOSITION),
                (EdgeKind.EVALUATED_IN, NodeKind.DRUG, NodeKind.CLINICAL_TRIAL),
                (EdgeKind.TARGETS, NodeKind.CLINICAL_TRIAL, NodeKind.DISEASE),
            ]
        )

    @classmethod
    def from_tsv(cls, tsv_text: str, base: Optional["GraphSchema"] = None) -> "GraphSchema":
        """Extends a schema with `edge_kind TAB source_kind TAB target_kind` rows."""
        schema = cls(base.rules() if base else cls.default().rules())
        for line_number, line in enumerate(tsv_text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("\t")]
            if len(parts) != 3 or not all(parts):
                raise GraphBuildError(
                    f"schema extension line {line_number}: expected "
                    "edge_kind, source_kind and target_kind"
                )
            schema.add_rule(*parts)
        return schema

    def add_rule(self, edge_kind: str, source_kind: str, target_kind: str) -> None:
        self._rules[str(edge_kind)].add((str(source_kind), str(target_kind)))
        for kind in (source_kind, target_kind):
            if str(kind) != ANY_KIND:
                self._node_kinds.add(str(kind))

    def rules(self) -> List[Tuple[str, str, str]]:
        return sorted(
            (edge, source, target)
            for edge, pairs in self._rules.items()
            for source, target in pairs
        )

    @property
    def edge_kinds(self) -> List[str]:
        return sorted(self._rules)

    @property
    def node_kinds(self) -> List[str]:
        return sorted(self._node_kinds)

    def allows(self, source_kind: str, edge_kind: str, target_kind: str) -> bool:
        pairs = self._rules.get(str(edge_kind), set())
        return any(
            s in (str(source_kind), ANY_KIND) and t in (str(target_kind), ANY_KIND)
            for s, t in pairs
        )

    def out_edge_kinds(self, source_kind: str) -> List[str]:
        return sorted(
            edge
            for edge, pairs in self._rules.items()
            if any(s in (str(source_kind), ANY_KIND) for s, _ in pairs)
        )

    def check(self, source_kind: str, edge_kind: str, target_kind: str) -> None:
        if not self.allows(source_kind, edge_kind, target_kind):
            raise SchemaViolationError(str(source_kind), str(edge_kind), str(target_kind))


@dataclass(frozen=True)
class Node:
    iri: str
    kind: str
    display_label: str
    props: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    kind: str
    props: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False)

    @property
    def key(self) -> Tuple[str, str, str]:
        return (self.source, self.kind, self.target)


class KnowledgeGraph:
    """Nodes and edges with adjacency indexes by (node, edge kind, direction).

    The constructor never rejects data: duplicate node IRIs keep the first
    node and are remembered in `duplicate_iris`, and edges whose endpoints
    are missing are kept so validation can report them.
    """

    def __init__(
        self,
        nodes: Iterable[Node] = (),
        edges: Iterable[Edge] = (),
        schema: Optional[GraphSchema] = None,
    ) -> None:
        self.schema = schema or GraphSchema.default()
        self._nodes: Dict[str, Node] = {}
        duplicates: Set[str] = set()
        for node in nodes:
            if node.iri in self._nodes:
                duplicates.add(node.iri)
                continue
            self._nodes[node.iri] = node
        self.duplicate_iris: FrozenSet[str] = frozenset(duplicates)

        self._edges: Dict[Tuple[str, str, str], Edge] = {}
        for edge in edges:
            self._edges.setdefault(edge.key, edge)

        adjacency: Dict[Tuple[str, str, Direction], List[str]] = defaultdict(list)
        for source, kind, target in sorted(self._edges):
            adjacency[(source, kind, Direction.OUT)].append(target)
            adjacency[(target, kind, Direction.IN)].append(source)
        self._adjacency = {key: tuple(value) for key, value in adjacency.items()}

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, iri: object) -> bool:
        return iri in self._nodes

    def node(self, iri: str) -> Node:
        try:
            return self._nodes[iri]
        except KeyError:
            raise UnknownNodeError(iri)

    def nodes(self, kind: Optional[str] = None) -> List[Node]:
        """Nodes sorted by IRI, optionally of one kind."""
        return [
            self._nodes[iri]
            for iri in sorted(self._nodes)
            if kind is None or self._nodes[iri].kind == str(kind)
        ]

    def edges(self, kind: Optional[str] = None) -> List[Edge]:
        """Edges sorted by (source, kind, target), optionally of one kind."""
        return [
            self._edges[key]
            for key in sorted(self._edges)
            if kind is None or key[1] == str(kind)
        ]

    def edge(self, source: str, kind: str, target: str) -> Optional[Edge]:
        return self._edges.get((source, str(kind), target))

    def adjacent_iris(
        self, iri: str, edge_kind: str, direction: Direction = Direction.OUT
    ) -> Tuple[str, ...]:
        return self._adjacency.get((iri, str(edge_kind), Direction(direction)), ())

    def neighbors(
        self, iri: str, edge_kind: str, direction: Direction = Direction.OUT
    ) -> List[Node]:
        """Adjacent nodes sorted by display label then IRI.

        Raises:
            UnknownNodeError: If `iri` is not a node of this graph.
        """
        if iri not in self._nodes:
            raise UnknownNodeError(iri)
        found = [
            self._nodes[other]
            for other in self.adjacent_iris(iri, edge_kind, direction)
            if other in self._nodes
        ]
        return sorted(found, key=lambda n: (n.display_label, n.iri))

    def fingerprint(self) -> str:
        """sha256 of the canonical CSV export."""
        nodes_csv, edges_csv = export_graph_csv(self)
        digest = hashlib.sha256()
        digest.update(nodes_csv.encode("utf-8"))
        digest.update(b"\0")
        digest.update(edges_csv.encode("utf-8"))
        return digest.hexdigest()

    def to_networkx(self, edge_kind: Optional[str] = None) -> "nx.DiGraph":
        digraph = nx.DiGraph()
        digraph.add_nodes_from(sorted(self._nodes))
        for source, kind, target in sorted(self._edges):
            if edge_kind is None or kind == str(edge_kind):
                digraph.add_edge(source, target)
        return digraph


def neighbors(
    graph: KnowledgeGraph, node_iri: str, edge_kind: str, direction: Direction
) -> List[Node]:
    return graph.neighbors(node_iri, edge_kind, direction)


def derived_contains(graph: KnowledgeGraph) -> List[Tuple[str, str, float]]:
    """The food to flavonoid view: has_composition followed by has_component.

    Returns:
        List[Tuple[str, str, float]]: (food IRI, flavonoid IRI, mean mg per
        100 g), sorted. Never stored as edges.
    """
    pairs = []
    for composition_edge in graph.edges(EdgeKind.HAS_COMPOSITION):
        for component in graph.adjacent_iris(
            composition_edge.target, EdgeKind.HAS_COMPONENT, Direction.OUT
        ):
            edge = graph.edge(composition_edge.target, EdgeKind.HAS_COMPONENT, component)
            mean = edge.props.get("mean_mg_per_100g") if edge else None
            pairs.append(
                (composition_edge.source, component, float(mean) if mean is not None else 0.0)
            )
    return sorted(pairs)


def transitive_closure(graph: KnowledgeGraph, edge_kind: str) -> Set[Tuple[str, str]]:
    """All (a, b) pairs connected by a non-empty path of one edge kind.

    Self pairs are excluded even when a cycle passes through a node.
    """
    closure = nx.transitive_closure(graph.to_networkx(edge_kind), reflexive=None)
    return {(a, b) for a, b in closure.edges() if a != b}


def _json_default(value: Any) -> Any:
    if isinstance(value, Decimal):
        return float(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _props_json(props: Mapping[str, Any]) -> str:
    return json.dumps(
        dict(props),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        default=_json_default,
    )


def export_graph_csv(graph: KnowledgeGraph) -> Tuple[str, str]:
    """Renders the bulk-import CSV pair `iri,kind,label` and
    `source,kind,target,props_json`, both sorted."""
    nodes_buffer = io.StringIO()
    writer = csv.writer(nodes_buffer, lineterminator="\n")
    writer.writerow(["iri", "kind", "label"])
    for node in graph.nodes():
        writer.writerow([node.iri, node.kind, node.display_label])

    edges_buffer = io.StringIO()
    writer = csv.writer(edges_buffer, lineterminator="\n")
    writer.writerow(["source", "kind", "target", "props_json"])
    for edge in graph.edges():
        writer.writerow([edge.source, edge.kind, edge.target, _props_json(edge.props)])
    return nodes_buffer.getvalue(), edges_buffer.getvalue()


def _export_rows(
    text: str, file_name: str, columns: Sequence[str]
) -> Iterator[Tuple[int, Dict[str, str]]]:
    reader = csv.DictReader(io.StringIO(text, newline=""))
    missing = [c for c in columns if c not in (reader.fieldnames or ())]
    if missing:
        raise IngestError(f"missing column(s): {', '.join(missing)}", file_name, 1)
    for row in reader:
        if any(row[c] is None for c in columns):
            raise IngestError(
                f"expected {len(reader.fieldnames)} cells", file_name, reader.line_num
            )
        yield reader.line_num, row


def load_graph_csv(
    nodes_csv: str,
    edges_csv: str,
    schema: Optional[GraphSchema] = None,
    nodes_name: str = "nodes.csv",
    edges_name: str = "edges.csv",
) -> KnowledgeGraph:
    """Reads an export back without enforcing build invariants.

    Dangling edges and repeated IRIs are kept for validation to report.

    Raises:
        IngestError: On a missing column, a short row or a `props_json`
            cell that is not a JSON object, with the file and line.
    """
    nodes = [
        Node(row["iri"], row["kind"], row["label"])
        for _, row in _export_rows(nodes_csv, nodes_name, ("iri", "kind", "label"))
    ]
    edges = []
    for line_number, row in _export_rows(edges_csv, edges_name, ("source", "kind", "target")):
        try:
            props = json.loads(row.get("props_json") or "{}")
        except json.JSONDecodeError as e:
            raise IngestError(f"malformed props_json: {e.msg}", edges_name, line_number)
        if not isinstance(props, dict):
            raise IngestError("props_json is not a JSON object", edges_name, line_number)
        edges.append(Edge(row["source"], row["target"], row["kind"], props))
    return KnowledgeGraph(nodes, edges, schema)


_NODE_KIND_OF_ENTITY = {
    EntityKind.FOOD: NodeKind.FOOD,
    EntityKind.FOOD_GROUP: NodeKind.FOOD_GROUP,
    EntityKind.FLAVONOID: NodeKind.FLAVONOID,
    EntityKind.FLAVONOID_SUBCLASS: NodeKind.FLAVONOID_SUBCLASS,
    EntityKind.DISEASE: NodeKind.DISEASE,
    EntityKind.DRUG: NodeKind.DRUG,
    EntityKind.CLINICAL_TRIAL: NodeKind.CLINICAL_TRIAL,
}


class _Builder:
    """Single-writer accumulator behind `build_graph`."""

    def __init__(self, schema: GraphSchema) -> None:
        self.schema = schema
        self.nodes: Dict[str, Node] = {}
        self.edges: Dict[Tuple[str, str, str], Edge] = {}

    def add_node(self, node: Node) -> Node:
        existing = self.nodes.get(node.iri)
        if existing is not None:
            if existing.kind != node.kind:
                raise GraphBuildError(
                    f"IRI {node.iri} minted for both a '{existing.kind}' and a "
                    f"'{node.kind}' node"
                )
            if existing.display_label != node.display_label:
                raise GraphBuildError(
                    f"IRI {node.iri} minted for both '{existing.display_label}' "
                    f"and '{node.display_label}'"
                )
            return existing
        self.nodes[node.iri] = node
        return node

    def add_edge(self, source: str, kind: str, target: str, **props: Any) -> None:
        self.schema.check(self.nodes[source].kind, kind, self.nodes[target].kind)
        key = (source, str(kind), target)
        if key not in self.edges:
            self.edges[key] = Edge(source, target, str(kind), props)


def build_graph(
    entities: Sequence[CanonicalEntity],
    mappings: Sequence[MappingResult],
    foods: Sequence[FoodRecord],
    contents: Sequence[ContentRecord],
    associations: Sequence[AssociationRecord],
    drugs: Sequence[DrugRecord] = (),
    namespace: str = DEFAULT_NAMESPACE,
    extra_subclasses: Sequence[str] = (),
    schema: Optional[GraphSchema] = None,
    prefixes: Optional[Mapping[str, str]] = None,
    normalizer: Optional[Normalizer] = None,
) -> KnowledgeGraph:
    """Materializes the knowledge graph from merged, mapped entities.

    Every food gets one composition node (`<food iri>/composition`) and one
    group parent; every flavonoid one subclass parent; every entity with a
    vocabulary mapping one has_id edge to an identifier node. The five
    flavonoid subclasses are always present; extra subclasses are keyed
    with the same normalizer that merged the entities.

    Raises:
        GraphBuildError: On an unknown food code, an unknown or conflicting
            subclass, a food in two groups, or a label that resolves to no
            entity.
        SchemaViolationError: On an edge the schema does not allow.
    """
    schema = schema or GraphSchema.default()
    normalizer = normalizer or Normalizer()
    builder = _Builder(schema)

    resolver: Dict[Tuple[EntityKind, str], CanonicalEntity] = {}
    for entity in entities:
        for raw in entity.raw_labels:
            resolver[(entity.kind, raw)] = entity

    def resolve(kind: EntityKind, raw: str) -> CanonicalEntity:
        entity = resolver.get((kind, raw.strip()))
        if entity is None:
            raise GraphBuildError(f"{kind} label '{raw}' resolves to no entity")
        return entity

    def iri_of(entity: CanonicalEntity) -> str:
        return mint_local_iri(entity.canonical_key, namespace)

    subclass_iris: Dict[str, str] = {}
    for key, label in SEED_SUBCLASSES:
        iri = mint_local_iri(key, namespace)
        builder.add_node(Node(iri, NodeKind.FLAVONOID_SUBCLASS, label))
        subclass_iris[key] = iri
    for label in extra_subclasses:
        key = normalizer.canonicalize(label, EntityKind.FLAVONOID_SUBCLASS)
        if key not in subclass_iris:
            iri = mint_local_iri(key, namespace)
            builder.add_node(Node(iri, NodeKind.FLAVONOID_SUBCLASS, label.strip()))
            subclass_iris[key] = iri

    entity_iris: Dict[Tuple[EntityKind, str], str] = {}
    for entity in sorted(entities, key=lambda e: (str(e.kind), e.canonical_key)):
        if entity.kind == EntityKind.FLAVONOID_SUBCLASS:
            if entity.canonical_key not in subclass_iris:
                raise GraphBuildError(
                    f"unknown flavonoid subclass '{entity.display_label}'; declare it "
                    "in extra_subclasses to accept it"
                )
            entity_iris[(entity.kind, entity.canonical_key)] = subclass_iris[
                entity.canonical_key
            ]
            continue
        node = builder.add_node(
            Node(iri_of(entity), _NODE_KIND_OF_ENTITY[entity.kind], entity.display_label)
        )
        entity_iris[(entity.kind, entity.canonical_key)] = node.iri

    def node_for(kind: EntityKind, raw: str) -> str:
        entity = resolve(kind, raw)
        return entity_iris[(entity.kind, entity.canonical_key)]

    # Foods, their group parent and their composition.
    food_by_code: Dict[str, str] = {}
    food_group: Dict[str, str] = {}
    food_codes: Dict[str, List[str]] = defaultdict(list)
    for food in sorted(foods, key=lambda f: f.food_code):
        food_iri = node_for(EntityKind.FOOD, food.description)
        group_iri = node_for(EntityKind.FOOD_GROUP, food.food_group)
        known = food_group.setdefault(food_iri, group_iri)
        if known != group_iri:
            raise GraphBuildError(
                f"food '{builder.nodes[food_iri].display_label}' is listed in groups "
                f"'{builder.nodes[known].display_label}' and "
                f"'{builder.nodes[group_iri].display_label}'"
            )
        food_by_code[food.food_code] = food_iri
        food_codes[food_iri].append(food.food_code)

    for food_iri in sorted(food_group):
        food = builder.nodes[food_iri]
        builder.nodes[food_iri] = Node(
            food.iri,
            food.kind,
            food.display_label,
            {"food_code": ";".join(sorted(food_codes[food_iri]))},
        )
        composition = builder.add_node(
            Node(
                f"{food_iri}/composition",
                NodeKind.COMPOSITION,
                f"{food.display_label} composition",
            )
        )
        builder.add_edge(food_group[food_iri], EdgeKind.PARENT_OF, food_iri)
        builder.add_edge(food_iri, EdgeKind.HAS_COMPOSITION, composition.iri)

    # Flavonoid contents and subclass parents.
    flavonoid_subclass: Dict[str, str] = {}
    ordered_contents = sorted(
        contents,
        key=lambda c: (
            c.food_code,
            c.flavonoid_name,
            c.mean_mg_per_100g,
            c.method,
            c.state,
            c.provenance,
        ),
    )
    for content in ordered_contents:
        food_iri = food_by_code.get(content.food_code)
        if food_iri is None:
            raise GraphBuildError(
                f"content row at {content.provenance} names unknown food code "
                f"'{content.food_code}'"
            )
        flavonoid_iri = node_for(EntityKind.FLAVONOID, content.flavonoid_name)
        if not content.subclass:
            raise GraphBuildError(
                f"content row at {content.provenance} has no subclass for "
                f"'{content.flavonoid_name}'"
            )
        subclass_iri = node_for(EntityKind.FLAVONOID_SUBCLASS, content.subclass)
        known = flavonoid_subclass.setdefault(flavonoid_iri, subclass_iri)
        if known != subclass_iri:
            raise GraphBuildError(
                f"flavonoid '{builder.nodes[flavonoid_iri].display_label}' is listed "
                f"under subclasses '{builder.nodes[known].display_label}' and "
                f"'{builder.nodes[subclass_iri].display_label}'"
            )
        builder.add_edge(
            f"{food_iri}/composition",
            EdgeKind.HAS_COMPONENT,
            flavonoid_iri,
            mean_mg_per_100g=float(content.mean_mg_per_100g),
            method=content.method,
            state=content.state,
        )
    for flavonoid_iri, subclass_iri in sorted(flavonoid_subclass.items()):
        builder.add_edge(subclass_iri, EdgeKind.PARENT_OF, flavonoid_iri)

    # Disease associations, with effects and citations merged per pair.
    effects: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
    citations: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
    for assoc in associations:
        flavonoid_iri = node_for(EntityKind.FLAVONOID, assoc.flavonoid_name)
        if flavonoid_iri not in flavonoid_subclass:
            raise GraphBuildError(
                f"association at {assoc.provenance} names flavonoid "
                f"'{assoc.flavonoid_name}', which has no content rows"
            )
        disease_iri = node_for(EntityKind.DISEASE, assoc.disease_label)
        pair = (flavonoid_iri, disease_iri)
        if assoc.effect:
            effects[pair].add(assoc.effect)
        if assoc.citation_key:
            citations[pair].add(assoc.citation_key)
        citations.setdefault(pair, set())
    for flavonoid_iri, disease_iri in sorted(citations):
        pair = (flavonoid_iri, disease_iri)
        builder.add_edge(
            flavonoid_iri,
            EdgeKind.HAS_ASSOCIATED_DISEASE,
            disease_iri,
            effect=";".join(sorted(effects[pair])),
            citation_key=";".join(sorted(citations[pair])),
        )

    # Drugs formulated from compositions and their trials.
    for drug in sorted(drugs, key=lambda d: (d.drug_name, d.provenance)):
        food_iri = food_by_code.get(drug.composition_of_food_code)
        if food_iri is None:
            raise GraphBuildError(
                f"drug row at {drug.provenance} names unknown food code "
                f"'{drug.composition_of_food_code}'"
            )
        drug_iri = node_for(EntityKind.DRUG, drug.drug_name)
        builder.add_edge(drug_iri, EdgeKind.FORMULATED_FROM, f"{food_iri}/composition")
        if drug.trial_id:
            trial_iri = node_for(EntityKind.CLINICAL_TRIAL, drug.trial_id)
            builder.add_edge(drug_iri, EdgeKind.EVALUATED_IN, trial_iri)
            if drug.disease_label:
                disease_iri = node_for(EntityKind.DISEASE, drug.disease_label)
                builder.add_edge(trial_iri, EdgeKind.TARGETS, disease_iri)

    # External identifiers for every vocabulary-mapped entity.
    for mapping in sorted(mappings, key=lambda m: (str(m.kind), m.entity_key)):
        if mapping.is_minted:
            continue
        subject = entity_iris.get((mapping.kind, mapping.entity_key))
        if subject is None:
            raise GraphBuildError(
                f"mapping for {mapping.kind} '{mapping.entity_key}' has no entity"
            )
        identifier = builder.add_node(
            Node(
                expand_curie(mapping.iri_or_curie, prefixes),
                NodeKind.IDENTIFIER,
                mapping.iri_or_curie,
            )
        )
        builder.add_edge(subject, EdgeKind.HAS_ID, identifier.iri)

    graph = KnowledgeGraph(builder.nodes.values(), builder.edges.values(), schema)
    hierarchy = graph.to_networkx(EdgeKind.PARENT_OF)
    if not nx.is_directed_acyclic_graph(hierarchy):
        cycle = nx.find_cycle(hierarchy)
        raise GraphBuildError(f"parent_of cycle: {cycle}")

    logger.debug(
        f"built graph with {len(graph)} nodes and {len(graph.edges())} edges"
    )
    return graph
