"""
Command line entry point.

    flavokg pipeline run -c config.json
    flavokg query -e 'FOODS IN GROUP "Dairy and Egg Products"'

Logs go to stderr; query results and findings go to stdout. Exit status
is 0 on success, 1 on error findings or a failed stage, 2 on usage or
config errors.
"""

import argparse
import logging
import logging.config
import os
import sys
from typing import List, Optional, Sequence

from .config import DEFAULT_CONFIG_PATH, LOG_LEVEL, LOGGING_CONF, VERSION
from .errors import ConfigError, FlavoKGError
from .graph import load_graph_csv
from .ingest import read_source
from .pipeline import Pipeline, PipelineConfig
from .query import query_lines, run_query
from .validate import check_graph, findings_to_v1, findings_tsv, has_errors

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-c",
        "--config",
        default=None,
        help=f"pipeline config JSON (default: {DEFAULT_CONFIG_PATH})",
    )
    common.add_argument("-o", "--output-dir", default=None, help="override output_dir")
    common.add_argument("--namespace", default=None, help="override the namespace IRI")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="flavokg",
        description="Build a food, flavonoid and disease knowledge graph and ontology.",
    )
    parser.add_argument("--version", action="version", version=f"flavokg {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("ingest", parents=[common], help="parse the source tables")
    commands.add_parser("normalize", parents=[common], help="merge entity labels")
    commands.add_parser("map", parents=[common], help="map entities to vocabularies")

    graph = commands.add_parser("graph", help="build or export the graph")
    graph_actions = graph.add_subparsers(dest="action", required=True)
    graph_actions.add_parser("build", parents=[common], help="write graph CSVs")
    export = graph_actions.add_parser(
        "export", parents=[common], help="write graph CSVs to chosen paths"
    )
    export.add_argument("--nodes", required=True, help="nodes CSV path")
    export.add_argument("--edges", required=True, help="edges CSV path")

    template = commands.add_parser("template", help="template sheets")
    template_actions = template.add_subparsers(dest="action", required=True)
    template_actions.add_parser("emit", parents=[common], help="write templates/*.csv")

    owl = commands.add_parser("owl", help="ontology output")
    owl_actions = owl.add_subparsers(dest="action", required=True)
    owl_actions.add_parser("build", parents=[common], help="write ontology.ttl")

    query = commands.add_parser(
        "query", parents=[common], help="run queries (from -e or stdin)"
    )
    query.add_argument(
        "-e", "--expression", action="append", default=[], help="a query to run"
    )

    validate = commands.add_parser("validate", parents=[common], help="check the graph")
    validate.add_argument("--nodes", default=None, help="exported nodes CSV to check")
    validate.add_argument("--edges", default=None, help="exported edges CSV to check")
    validate.add_argument("--format", choices=("tsv", "json"), default="tsv")

    pipeline = commands.add_parser("pipeline", help="all stages")
    pipeline_actions = pipeline.add_subparsers(dest="action", required=True)
    pipeline_actions.add_parser("run", parents=[common], help="run every stage")
    return parser


def configure_logging(verbose: bool) -> None:
    logging.config.fileConfig(LOGGING_CONF, disable_existing_loggers=False)
    logging.getLogger("flavokg").setLevel(logging.DEBUG if verbose else LOG_LEVEL)


def load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.load(args.config or DEFAULT_CONFIG_PATH)
    updates = {}
    if args.output_dir:
        updates["output_dir"] = os.path.abspath(args.output_dir)
    if args.namespace:
        updates["namespace"] = args.namespace
    if updates:
        try:
            config = PipelineConfig.model_validate({**config.model_dump(), **updates})
        except ValueError as e:
            raise ConfigError(str(e))
    return config


def _validate_export(args: argparse.Namespace) -> int:
    if not (args.nodes and args.edges):
        raise ConfigError("--nodes and --edges must be given together")
    graph = load_graph_csv(
        read_source(args.nodes),
        read_source(args.edges),
        nodes_name=os.path.basename(args.nodes),
        edges_name=os.path.basename(args.edges),
    )
    findings = check_graph(graph)
    _print_findings(findings, args.format)
    return EXIT_FAILURE if has_errors(findings) else EXIT_OK


def _print_findings(findings, output_format: str) -> None:
    if output_format == "json":
        sys.stdout.write(findings_to_v1(findings).model_dump_json(indent=2) + "\n")
    else:
        sys.stdout.write(findings_tsv(findings))


def _query(pipeline: Pipeline, expressions: Sequence[str]) -> int:
    queries = list(expressions) or query_lines(sys.stdin.read())
    for index, text in enumerate(queries):
        if index:
            sys.stdout.write("\n")
        sys.stdout.write(run_query(text, pipeline.graph, pipeline.normalizer).to_tsv())
    return EXIT_OK


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "validate" and (args.nodes or args.edges):
        return _validate_export(args)

    pipeline = Pipeline(load_config(args))
    command = (args.command, getattr(args, "action", None))
    if command == ("ingest", None):
        pipeline.run_ingest()
    elif command == ("normalize", None):
        pipeline.run_normalize()
    elif command == ("map", None):
        pipeline.run_map()
    elif command == ("graph", "build"):
        pipeline.run_graph()
    elif command == ("graph", "export"):
        pipeline.run_graph(args.nodes, args.edges)
    elif command == ("template", "emit"):
        pipeline.run_templates()
    elif command == ("owl", "build"):
        pipeline.run_owl()
    elif command == ("query", None):
        return _query(pipeline, args.expression)
    elif command == ("validate", None):
        pipeline.run_validate()
        _print_findings(pipeline.findings, args.format)
        return EXIT_FAILURE if has_errors(pipeline.findings) else EXIT_OK
    elif command == ("pipeline", "run"):
        summary = pipeline.run_all()
        return EXIT_FAILURE if summary.errors else EXIT_OK
    return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    """Runs one command and returns its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    configure_logging(getattr(args, "verbose", False))
    try:
        return dispatch(args)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except (FlavoKGError, OSError) as e:
        logger.error(str(e))
        return EXIT_FAILURE


def main() -> None:
    sys.exit(run(sys.argv[1:]))
