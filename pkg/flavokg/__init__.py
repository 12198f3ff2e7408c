from .config import VERSION
from .graph import KnowledgeGraph, build_graph, export_graph_csv, load_graph_csv
from .ingest import (
    parse_disease_associations,
    parse_drug_table,
    parse_flavonoid_table,
    parse_food_table,
)
from .normalize import CanonicalEntity, EntityKind, Normalizer, canonicalize_label
from .owl import OwlDocument, PrefixMap, merge_documents, serialize_turtle
from .pipeline import Pipeline, PipelineConfig
from .query import execute, parse_query, run_query
from .recycle import map_term, mint_local_iri
from .templater import expand_template, graph_to_templates, parse_template
from .validate import check_graph, check_ontology

__version__ = VERSION

__all__ = [
    "CanonicalEntity",
    "EntityKind",
    "KnowledgeGraph",
    "Normalizer",
    "OwlDocument",
    "Pipeline",
    "PipelineConfig",
    "PrefixMap",
    "build_graph",
    "canonicalize_label",
    "check_graph",
    "check_ontology",
    "execute",
    "expand_template",
    "export_graph_csv",
    "graph_to_templates",
    "load_graph_csv",
    "map_term",
    "merge_documents",
    "mint_local_iri",
    "parse_disease_associations",
    "parse_drug_table",
    "parse_flavonoid_table",
    "parse_food_table",
    "parse_query",
    "parse_template",
    "run_query",
    "serialize_turtle",
]
