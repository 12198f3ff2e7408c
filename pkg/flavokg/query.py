"""
A fixed-form query language over the knowledge graph.

    FOODS IN GROUP "<label>"
    FLAVONOIDS OF FOOD "<label>"
    FOODS CONTAINING FLAVONOID "<label>"
    DISEASES OF FLAVONOID "<label>"
    FOODS FOR DISEASE "<label>"
    NEIGHBORS "<iri>" VIA <edge-kind> (IN|OUT)

Keywords are case-insensitive; labels and IRIs are double quoted with
backslash escapes for quotes and backslashes.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .errors import NormalizationError, QuerySyntaxError
from .graph import Direction, EdgeKind, KnowledgeGraph, Node, NodeKind
from .normalize import EntityKind, Normalizer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoodsInGroup:
    label: str


@dataclass(frozen=True)
class FlavonoidsOfFood:
    label: str


@dataclass(frozen=True)
class FoodsContainingFlavonoid:
    label: str


@dataclass(frozen=True)
class DiseasesOfFlavonoid:
    label: str


@dataclass(frozen=True)
class FoodsForDisease:
    label: str


@dataclass(frozen=True)
class Neighbors:
    iri: str
    edge_kind: str
    direction: Direction


QueryAst = Union[
    FoodsInGroup,
    FlavonoidsOfFood,
    FoodsContainingFlavonoid,
    DiseasesOfFlavonoid,
    FoodsForDisease,
    Neighbors,
]


@dataclass(frozen=True)
class Token:
    kind: str  # "word" or "string"
    text: str
    column: int


def tokenize(text: str) -> List[Token]:
    """Splits a query into words and quoted strings with 1-based columns."""
    tokens: List[Token] = []
    i = 0
    while i < len(text):
        char = text[i]
        if char.isspace():
            i += 1
        elif char == '"':
            start = i
            i += 1
            value = []
            while i < len(text) and text[i] != '"':
                if text[i] == "\\" and i + 1 < len(text):
                    i += 1
                value.append(text[i])
                i += 1
            if i >= len(text):
                raise QuerySyntaxError("unterminated string", start + 1)
            i += 1
            tokens.append(Token("string", "".join(value), start + 1))
        else:
            start = i
            while i < len(text) and not text[i].isspace() and text[i] != '"':
                i += 1
            tokens.append(Token("word", text[start:i], start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, edge_kinds: Sequence[str]) -> None:
        self.text = text
        self.tokens = tokenize(text)
        self.position = 0
        self.edge_kinds = sorted(edge_kinds)

    def _end_column(self) -> int:
        return len(self.text.rstrip()) + 1

    def peek(self) -> Optional[Token]:
        if self.position < len(self.tokens):
            return self.tokens[self.position]
        return None

    def keyword(self, *expected: str) -> str:
        token = self.peek()
        options = " or ".join(expected)
        if token is None:
            raise QuerySyntaxError(f"expected {options}, got end of query", self._end_column())
        if token.kind != "word" or token.text.upper() not in expected:
            raise QuerySyntaxError(f"expected {options}, got '{token.text}'", token.column)
        self.position += 1
        return token.text.upper()

    def string(self, what: str) -> str:
        token = self.peek()
        if token is None:
            raise QuerySyntaxError(
                f"expected a quoted {what}, got end of query", self._end_column()
            )
        if token.kind != "string":
            raise QuerySyntaxError(
                f"expected a quoted {what}, got '{token.text}'", token.column
            )
        if not token.text.strip():
            raise QuerySyntaxError(f"empty {what}", token.column)
        self.position += 1
        return token.text.strip()

    def edge_kind(self) -> str:
        token = self.peek()
        if token is None or token.kind != "word":
            column = token.column if token else self._end_column()
            raise QuerySyntaxError("expected an edge kind", column)
        if token.text not in self.edge_kinds:
            raise QuerySyntaxError(
                f"unknown edge kind '{token.text}'; valid kinds: "
                + ", ".join(self.edge_kinds),
                token.column,
            )
        self.position += 1
        return token.text

    def end(self) -> None:
        token = self.peek()
        if token is not None:
            raise QuerySyntaxError(f"unexpected '{token.text}'", token.column)

    def parse(self) -> QueryAst:
        head = self.keyword("FOODS", "FLAVONOIDS", "DISEASES", "NEIGHBORS")
        ast: QueryAst
        if head == "FOODS":
            form = self.keyword("IN", "CONTAINING", "FOR")
            if form == "IN":
                self.keyword("GROUP")
                ast = FoodsInGroup(self.string("label"))
            elif form == "CONTAINING":
                self.keyword("FLAVONOID")
                ast = FoodsContainingFlavonoid(self.string("label"))
            else:
                self.keyword("DISEASE")
                ast = FoodsForDisease(self.string("label"))
        elif head == "FLAVONOIDS":
            self.keyword("OF")
            self.keyword("FOOD")
            ast = FlavonoidsOfFood(self.string("label"))
        elif head == "DISEASES":
            self.keyword("OF")
            self.keyword("FLAVONOID")
            ast = DiseasesOfFlavonoid(self.string("label"))
        else:
            iri = self.string("IRI")
            self.keyword("VIA")
            edge_kind = self.edge_kind()
            direction = Direction(self.keyword("IN", "OUT").lower())
            ast = Neighbors(iri, edge_kind, direction)
        self.end()
        return ast


def parse_query(text: str, edge_kinds: Optional[Iterable[str]] = None) -> QueryAst:
    """Parses one query.

    Args:
        text (str): The query text.
        edge_kinds (Optional[Iterable[str]]): Edge kinds accepted by
            NEIGHBORS; defaults to the built-in kinds.

    Raises:
        QuerySyntaxError: With the 1-based column of the offending token.
    """
    kinds = list(edge_kinds) if edge_kinds is not None else [str(k) for k in EdgeKind]
    return _Parser(text, kinds).parse()


@dataclass
class ResultTable:
    columns: Tuple[str, ...]
    rows: List[Tuple[str, ...]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_tsv(self) -> str:
        def clean(value: str) -> str:
            return value.replace("\t", " ").replace("\n", " ")

        lines = ["\t".join(self.columns)]
        lines.extend("\t".join(clean(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def format_mean(value: object) -> str:
    return str(float(value)) if value is not None else ""


def _matching(
    graph: KnowledgeGraph, label: str, kind: NodeKind, normalizer: Normalizer
) -> List[Node]:
    entity_kind = EntityKind(str(kind))
    try:
        wanted = normalizer.canonicalize(label, entity_kind)
    except NormalizationError:
        return []
    found = []
    for node in graph.nodes(kind):
        try:
            if normalizer.canonicalize(node.display_label, entity_kind) == wanted:
                found.append(node)
        except NormalizationError:
            continue
    return found


def _contained_flavonoids(
    graph: KnowledgeGraph, food_iri: str
) -> List[Tuple[str, object]]:
    """(flavonoid IRI, mean) through the food's compositions."""
    pairs = []
    for composition in graph.adjacent_iris(food_iri, EdgeKind.HAS_COMPOSITION):
        for flavonoid in graph.adjacent_iris(composition, EdgeKind.HAS_COMPONENT):
            edge = graph.edge(composition, EdgeKind.HAS_COMPONENT, flavonoid)
            pairs.append((flavonoid, edge.props.get("mean_mg_per_100g") if edge else None))
    return pairs


def _containing_foods(
    graph: KnowledgeGraph, flavonoid_iri: str
) -> List[Tuple[str, object]]:
    """(food IRI, mean) for every composition holding the flavonoid."""
    pairs = []
    for composition in graph.adjacent_iris(
        flavonoid_iri, EdgeKind.HAS_COMPONENT, Direction.IN
    ):
        edge = graph.edge(composition, EdgeKind.HAS_COMPONENT, flavonoid_iri)
        mean = edge.props.get("mean_mg_per_100g") if edge else None
        for food in graph.adjacent_iris(composition, EdgeKind.HAS_COMPOSITION, Direction.IN):
            pairs.append((food, mean))
    return pairs


def _label(graph: KnowledgeGraph, iri: str) -> str:
    return graph.node(iri).display_label if iri in graph else iri


def execute(
    ast: QueryAst, graph: KnowledgeGraph, normalizer: Optional[Normalizer] = None
) -> ResultTable:
    """Runs a parsed query against a graph without modifying it.

    A label or IRI that matches no node yields an empty table carrying a
    warning rather than an error.
    """
    normalizer = normalizer or Normalizer()
    rows = set()

    def no_match(what: str, value: str, columns: Tuple[str, ...]) -> ResultTable:
        message = f"no {what} matches '{value}'"
        logger.warning(message)
        return ResultTable(columns, [], [message])

    if isinstance(ast, FoodsInGroup):
        columns: Tuple[str, ...] = ("food",)
        groups = _matching(graph, ast.label, NodeKind.FOOD_GROUP, normalizer)
        if not groups:
            return no_match("food group", ast.label, columns)
        for group in groups:
            for food in graph.neighbors(group.iri, EdgeKind.PARENT_OF, Direction.OUT):
                rows.add((food.display_label,))

    elif isinstance(ast, FlavonoidsOfFood):
        columns = ("flavonoid", "mean_mg_per_100g")
        foods = _matching(graph, ast.label, NodeKind.FOOD, normalizer)
        if not foods:
            return no_match("food", ast.label, columns)
        for food in foods:
            for flavonoid, mean in _contained_flavonoids(graph, food.iri):
                rows.add((_label(graph, flavonoid), format_mean(mean)))

    elif isinstance(ast, FoodsContainingFlavonoid):
        columns = ("food", "mean_mg_per_100g")
        flavonoids = _matching(graph, ast.label, NodeKind.FLAVONOID, normalizer)
        if not flavonoids:
            return no_match("flavonoid", ast.label, columns)
        for flavonoid in flavonoids:
            for food, mean in _containing_foods(graph, flavonoid.iri):
                rows.add((_label(graph, food), format_mean(mean)))

    elif isinstance(ast, DiseasesOfFlavonoid):
        columns = ("disease", "effect", "citation")
        flavonoids = _matching(graph, ast.label, NodeKind.FLAVONOID, normalizer)
        if not flavonoids:
            return no_match("flavonoid", ast.label, columns)
        for flavonoid in flavonoids:
            for disease in graph.adjacent_iris(
                flavonoid.iri, EdgeKind.HAS_ASSOCIATED_DISEASE
            ):
                edge = graph.edge(flavonoid.iri, EdgeKind.HAS_ASSOCIATED_DISEASE, disease)
                props = edge.props if edge else {}
                rows.add(
                    (
                        _label(graph, disease),
                        str(props.get("effect", "")),
                        str(props.get("citation_key", "")),
                    )
                )

    elif isinstance(ast, FoodsForDisease):
        columns = ("food", "flavonoid")
        diseases = _matching(graph, ast.label, NodeKind.DISEASE, normalizer)
        if not diseases:
            return no_match("disease", ast.label, columns)
        for disease in diseases:
            for flavonoid in graph.adjacent_iris(
                disease.iri, EdgeKind.HAS_ASSOCIATED_DISEASE, Direction.IN
            ):
                for food, _ in _containing_foods(graph, flavonoid):
                    rows.add((_label(graph, food), _label(graph, flavonoid)))

    elif isinstance(ast, Neighbors):
        columns = ("iri", "kind", "label")
        if ast.iri not in graph:
            return no_match("node", ast.iri, columns)
        for node in graph.neighbors(ast.iri, ast.edge_kind, ast.direction):
            rows.add((node.iri, str(node.kind), node.display_label))

    else:
        raise TypeError(f"not a query: {ast!r}")

    return ResultTable(columns, sorted(rows))


def run_query(
    text: str, graph: KnowledgeGraph, normalizer: Optional[Normalizer] = None
) -> ResultTable:
    return execute(parse_query(text, graph.schema.edge_kinds), graph, normalizer)


def query_lines(text: str) -> List[str]:
    """Queries of a script: one per line, skipping blanks and `#` comments."""
    return [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]
