"""
Pipeline configuration and stage orchestration.

A `Pipeline` recomputes everything from the files named in its config;
within one instance each stage result is computed once and reused by the
stages after it. Stage writers put their artifacts in the output
directory and return a `V1StageSummary`.
"""

import json
import logging
import os
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ValidationError, field_validator, model_validator

from .config import DEFAULT_NAMESPACE, DEFAULT_NAMESPACE_PREFIX, VERSION
from .errors import ConfigError, VocabularyError
from .graph import (
    SEED_SUBCLASSES,
    GraphSchema,
    KnowledgeGraph,
    build_graph,
    export_graph_csv,
)
from .ingest import (
    AssociationRecord,
    ContentRecord,
    DrugRecord,
    FoodRecord,
    SourceTables,
    parse_disease_associations,
    parse_drug_table,
    parse_flavonoid_table,
    parse_food_table,
    read_source,
    records_to_csv,
)
from .models import V1RunSummary, V1StageSummary
from .normalize import (
    CanonicalEntity,
    EntityKind,
    MergeReport,
    Normalizer,
    collect_labels,
    entities_tsv,
    load_curation_overrides,
    load_plural_exceptions,
    merge_report_tsv,
)
from .owl import OwlDocument, PrefixMap, load_prefixes, serialize_turtle
from .recycle import (
    MappingResult,
    Vocabulary,
    load_vocabulary,
    map_entities,
    mapping_report,
    mappings_tsv,
    mint_local_iri,
)
from .templater import (
    LayeredTemplates,
    TemplateSheet,
    build_ontology,
    expand_template,
    graph_to_templates,
    parse_template,
    sheet_to_csv,
)
from .validate import (
    Finding,
    check_graph,
    check_ontology,
    coverage_stats,
    findings_tsv,
)

logger = logging.getLogger(__name__)

TABLES = ("foods", "contents", "associations", "drugs")


class InputPaths(BaseModel):
    foods: str
    contents: str
    associations: str
    drugs: Optional[str] = None


class VocabularySource(BaseModel):
    name: str
    path: str


class PipelineConfig(BaseModel):
    """The single JSON manifest of one pipeline build."""

    inputs: InputPaths
    vocabularies: List[VocabularySource] = []
    vocabulary_order: Dict[str, List[str]] = {}
    namespace: str = DEFAULT_NAMESPACE
    namespace_prefix: str = DEFAULT_NAMESPACE_PREFIX
    prefixes: Optional[str] = None
    curation_overrides: Optional[str] = None
    plural_exceptions: Optional[str] = None
    schema_extension: Optional[str] = None
    column_map: Dict[str, Dict[str, str]] = {}
    extra_subclasses: List[str] = []
    review_max_distance: int = 1
    output_dir: str = "out"

    @field_validator("namespace")
    @classmethod
    def namespace_terminated(cls, value: str) -> str:
        if not value.endswith(("/", "#")):
            raise ValueError(f"namespace must end with '/' or '#': {value}")
        return value

    @field_validator("review_max_distance")
    @classmethod
    def distance_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("review_max_distance must be at least 1")
        return value

    @field_validator("column_map")
    @classmethod
    def known_tables(cls, value: Dict[str, Dict[str, str]]) -> Dict[str, Dict[str, str]]:
        unknown = sorted(set(value) - set(TABLES))
        if unknown:
            raise ValueError(f"column_map names unknown tables: {', '.join(unknown)}")
        return value

    @model_validator(mode="after")
    def vocabularies_consistent(self) -> "PipelineConfig":
        names = [v.name for v in self.vocabularies]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate vocabulary names: {', '.join(duplicates)}")
        kinds = {str(k) for k in EntityKind}
        for kind, order in self.vocabulary_order.items():
            if kind not in kinds:
                raise ValueError(f"vocabulary_order names unknown kind '{kind}'")
            missing = sorted(set(order) - set(names))
            if missing:
                raise ValueError(
                    f"vocabulary_order for '{kind}' names unloaded vocabularies: "
                    + ", ".join(missing)
                )
        return self

    @classmethod
    def load(cls, path: str) -> "PipelineConfig":
        """Reads a config file and resolves its paths against its directory.

        Raises:
            ConfigError: If the file is missing or does not validate.
        """
        if not os.path.isfile(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            config = cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except (ValidationError, UnicodeDecodeError) as e:
            raise ConfigError(f"invalid config {path}: {e}")
        return config.resolved(os.path.dirname(os.path.abspath(path)))

    def resolved(self, base_dir: str) -> "PipelineConfig":
        def resolve(p: Optional[str]) -> Optional[str]:
            if p is None:
                return None
            return os.path.normpath(os.path.join(base_dir, os.path.expanduser(p)))

        return self.model_copy(
            update={
                "inputs": InputPaths(
                    foods=resolve(self.inputs.foods),
                    contents=resolve(self.inputs.contents),
                    associations=resolve(self.inputs.associations),
                    drugs=resolve(self.inputs.drugs),
                ),
                "vocabularies": [
                    VocabularySource(name=v.name, path=resolve(v.path))
                    for v in self.vocabularies
                ],
                "prefixes": resolve(self.prefixes),
                "curation_overrides": resolve(self.curation_overrides),
                "plural_exceptions": resolve(self.plural_exceptions),
                "schema_extension": resolve(self.schema_extension),
                "output_dir": resolve(self.output_dir),
            }
        )

    def referenced_paths(self) -> List[str]:
        paths = [self.inputs.foods, self.inputs.contents, self.inputs.associations]
        paths.append(self.inputs.drugs)
        paths.extend(v.path for v in self.vocabularies)
        paths.extend(
            [
                self.prefixes,
                self.curation_overrides,
                self.plural_exceptions,
                self.schema_extension,
            ]
        )
        return [p for p in paths if p]

    def check_paths(self) -> None:
        """Raises ConfigError listing every referenced file that is missing."""
        missing = [p for p in self.referenced_paths() if not os.path.isfile(p)]
        if missing:
            raise ConfigError("missing input files: " + ", ".join(missing))


class Pipeline:
    """Every stage of one build, computed lazily from the config."""

    def __init__(self, config: PipelineConfig) -> None:
        config.check_paths()
        self.config = config
        self.output_dir = config.output_dir

    def _write(self, name: str, text: str) -> str:
        path = os.path.join(self.output_dir, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return name

    # Stage products

    @cached_property
    def tables(self) -> SourceTables:
        inputs = self.config.inputs
        column_map = self.config.column_map

        def parse(parser, path: str, table: str):
            return parser(read_source(path), os.path.basename(path), column_map.get(table))

        drugs: List[DrugRecord] = []
        if inputs.drugs:
            drugs = parse(parse_drug_table, inputs.drugs, "drugs")
        return SourceTables(
            foods=parse(parse_food_table, inputs.foods, "foods"),
            contents=parse(parse_flavonoid_table, inputs.contents, "contents"),
            associations=parse(
                parse_disease_associations, inputs.associations, "associations"
            ),
            drugs=drugs,
        )

    @cached_property
    def normalizer(self) -> Normalizer:
        overrides = {}
        if self.config.curation_overrides:
            overrides = load_curation_overrides(read_source(self.config.curation_overrides))
        exceptions = frozenset()
        if self.config.plural_exceptions:
            exceptions = load_plural_exceptions(read_source(self.config.plural_exceptions))
        return Normalizer(overrides, exceptions)

    @cached_property
    def merged(self) -> Tuple[List[CanonicalEntity], MergeReport]:
        return self.normalizer.merge(
            collect_labels(self.tables), self.config.review_max_distance
        )

    @property
    def entities(self) -> List[CanonicalEntity]:
        return self.merged[0]

    @cached_property
    def vocabularies(self) -> List[Vocabulary]:
        vocabs = []
        for source in self.config.vocabularies:
            try:
                vocabs.append(load_vocabulary(read_source(source.path), source.name))
            except VocabularyError as e:
                raise VocabularyError(f"{source.path}: {e}")
        return vocabs

    def pinned_identifiers(self) -> Dict[Tuple[EntityKind, str], str]:
        """Disease CURIEs declared in the association table."""
        declared: Dict[Tuple[EntityKind, str], set] = {}
        for assoc in self.tables.associations:
            if not assoc.external_disease_id:
                continue
            key = self.normalizer.canonicalize(assoc.disease_label, EntityKind.DISEASE)
            declared.setdefault((EntityKind.DISEASE, key), set()).add(
                assoc.external_disease_id
            )
        pinned = {}
        for entity, curies in sorted(declared.items(), key=lambda item: item[0][1]):
            if len(curies) > 1:
                logger.warning(
                    f"disease '{entity[1]}' is declared as {', '.join(sorted(curies))}; "
                    f"using {min(curies)}"
                )
            pinned[entity] = min(curies)
        return pinned

    @cached_property
    def mappings(self) -> List[MappingResult]:
        order = {EntityKind(k): v for k, v in self.config.vocabulary_order.items()}
        return map_entities(
            self.entities,
            self.vocabularies,
            self.config.namespace,
            order,
            self.pinned_identifiers(),
            self.normalizer.plural_exceptions,
        )

    @cached_property
    def prefix_map(self) -> PrefixMap:
        prefixes = PrefixMap.default(self.config.namespace, self.config.namespace_prefix)
        if self.config.prefixes:
            prefixes = prefixes.merged(load_prefixes(read_source(self.config.prefixes)))
        return prefixes

    @cached_property
    def schema(self) -> GraphSchema:
        if self.config.schema_extension:
            return GraphSchema.from_tsv(read_source(self.config.schema_extension))
        return GraphSchema.default()

    @cached_property
    def graph(self) -> KnowledgeGraph:
        tables = self.tables
        return build_graph(
            self.entities,
            self.mappings,
            tables.foods,
            tables.contents,
            tables.associations,
            tables.drugs,
            namespace=self.config.namespace,
            extra_subclasses=self.config.extra_subclasses,
            schema=self.schema,
            prefixes=self.prefix_map.as_dict(),
            normalizer=self.normalizer,
        )

    @cached_property
    def templates(self) -> LayeredTemplates:
        return graph_to_templates(
            self.graph,
            self.prefix_map,
            self.config.namespace,
            self.config.namespace_prefix,
        )

    def template_sheets(self) -> List[TemplateSheet]:
        """Sheets from `templates/` in the output directory when present,
        otherwise compiled from the graph."""
        directory = os.path.join(self.output_dir, "templates")
        if os.path.isdir(directory):
            names = sorted(n for n in os.listdir(directory) if n.endswith(".csv"))
            if names:
                logger.debug(f"reading {len(names)} template sheets from {directory}")
                return [
                    parse_template(read_source(os.path.join(directory, n)), n[: -len(".csv")])
                    for n in names
                ]
        return self.templates.sheets()

    @cached_property
    def ontology(self) -> OwlDocument:
        return build_ontology(self.template_sheets(), self.prefix_map)

    @cached_property
    def axiom_union(self) -> OwlDocument:
        """Every expanded axiom, label conflicts included, for validation."""
        doc = OwlDocument()
        for sheet in self.template_sheets():
            doc = doc | expand_template(sheet, self.prefix_map)
        return doc

    def known_subclasses(self) -> List[str]:
        iris = [mint_local_iri(key, self.config.namespace) for key, _ in SEED_SUBCLASSES]
        iris.extend(
            mint_local_iri(
                self.normalizer.canonicalize(label, EntityKind.FLAVONOID_SUBCLASS),
                self.config.namespace,
            )
            for label in self.config.extra_subclasses
        )
        return sorted(set(iris))

    @cached_property
    def findings(self) -> List[Finding]:
        findings = check_graph(self.graph, self.mappings, self.known_subclasses())
        findings.extend(check_ontology(self.axiom_union))
        findings.sort(key=lambda f: f.sort_key)
        return findings

    # Stage writers

    def run_ingest(self) -> V1StageSummary:
        tables = self.tables
        artifacts = [
            self._write("ingested_foods.csv", records_to_csv(tables.foods, FoodRecord)),
            self._write(
                "ingested_contents.csv", records_to_csv(tables.contents, ContentRecord)
            ),
            self._write(
                "ingested_associations.csv",
                records_to_csv(tables.associations, AssociationRecord),
            ),
            self._write("ingested_drugs.csv", records_to_csv(tables.drugs, DrugRecord)),
        ]
        return self._summary(
            "ingest",
            f"{len(tables.foods)} foods, {len(tables.contents)} contents, "
            f"{len(tables.associations)} associations, {len(tables.drugs)} drugs",
            artifacts,
        )

    def run_normalize(self) -> V1StageSummary:
        entities, report = self.merged
        artifacts = [
            self._write("entities.tsv", entities_tsv(entities)),
            self._write("merge_report.tsv", merge_report_tsv(report)),
        ]
        return self._summary(
            "normalize",
            f"{len(entities)} entities, {len(report.merges)} merges, "
            f"{len(report.review_queue)} review candidates",
            artifacts,
        )

    def run_map(self) -> V1StageSummary:
        coverage = mapping_report(self.mappings)
        artifacts = [
            self._write("mappings.tsv", mappings_tsv(self.mappings)),
            self._write("mapping_report.tsv", coverage.to_tsv()),
        ]
        return self._summary(
            "map",
            f"{len(self.mappings)} entities, mapped fraction "
            f"{coverage.mapped_fraction:.4f}",
            artifacts,
        )

    def export_graph(
        self, nodes_path: Optional[str] = None, edges_path: Optional[str] = None
    ) -> List[str]:
        nodes_csv, edges_csv = export_graph_csv(self.graph)
        if nodes_path is None and edges_path is None:
            return [
                self._write("graph_nodes.csv", nodes_csv),
                self._write("graph_edges.csv", edges_csv),
            ]
        written = []
        for path, text in ((nodes_path, nodes_csv), (edges_path, edges_csv)):
            if path:
                Path(path).write_text(text, encoding="utf-8")
                written.append(path)
        return written

    def run_graph(
        self, nodes_path: Optional[str] = None, edges_path: Optional[str] = None
    ) -> V1StageSummary:
        artifacts = self.export_graph(nodes_path, edges_path)
        return self._summary(
            "graph",
            f"{len(self.graph)} nodes, {len(self.graph.edges())} edges",
            artifacts,
        )

    def run_templates(self) -> V1StageSummary:
        sheets = self.templates.sheets()
        directory = os.path.join(self.output_dir, "templates")
        emitted = {f"{s.name}.csv" for s in sheets}
        if os.path.isdir(directory):
            for name in sorted(os.listdir(directory)):
                if name.endswith(".csv") and name not in emitted:
                    logger.info(f"removing stale template sheet {name}")
                    os.remove(os.path.join(directory, name))
        artifacts = [
            self._write(os.path.join("templates", f"{s.name}.csv"), sheet_to_csv(s))
            for s in sheets
        ]
        return self._summary("template", f"{len(sheets)} sheets", artifacts)

    def run_owl(self) -> V1StageSummary:
        text = serialize_turtle(self.ontology, self.prefix_map)
        artifacts = [self._write("ontology.ttl", text)]
        return self._summary("owl", f"{len(self.ontology)} axioms", artifacts)

    def run_validate(self) -> V1StageSummary:
        findings = self.findings
        stats = coverage_stats(self.graph, self.mappings)
        artifacts = [
            self._write("findings.tsv", findings_tsv(findings)),
            self._write("coverage.tsv", stats.to_tsv()),
        ]
        errors = sum(1 for f in findings if f.severity == "error")
        return self._summary(
            "validate",
            f"{errors} errors, {len(findings) - errors} warnings",
            artifacts,
        )

    def run_all(self) -> V1RunSummary:
        stages = [
            self.run_ingest(),
            self.run_normalize(),
            self.run_map(),
            self.run_graph(),
            self.run_templates(),
            self.run_owl(),
            self.run_validate(),
        ]
        stats = coverage_stats(self.graph, self.mappings)
        errors = sum(1 for f in self.findings if f.severity == "error")
        summary = V1RunSummary(
            version=VERSION,
            namespace=self.config.namespace,
            stages=stages,
            node_counts=dict(sorted(stats.node_counts.items())),
            edge_counts=dict(sorted(stats.edge_counts.items())),
            mapped_fraction=round(mapping_report(self.mappings).mapped_fraction, 4),
            errors=errors,
            warnings=len(self.findings) - errors,
        )
        self._write(
            "summary.json",
            json.dumps(summary.model_dump(), indent=2, sort_keys=True) + "\n",
        )
        return summary

    def _summary(self, stage: str, summary: str, artifacts: List[str]) -> V1StageSummary:
        logger.info(f"{stage}: {summary}")
        return V1StageSummary(stage=stage, summary=summary, artifacts=artifacts)
