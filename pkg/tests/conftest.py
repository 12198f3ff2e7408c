import os
import random
from decimal import Decimal

import pytest
from hypothesis import HealthCheck, settings

from flavokg.graph import KnowledgeGraph, build_graph
from flavokg.ingest import (
    AssociationRecord,
    ContentRecord,
    FoodRecord,
    SourceProvenance,
    SourceTables,
    parse_disease_associations,
    parse_drug_table,
    parse_flavonoid_table,
    parse_food_table,
)
from flavokg.normalize import collect_labels, merge_entities
from flavokg.pipeline import Pipeline, PipelineConfig
from flavokg.recycle import load_vocabulary, map_entities

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
NAMESPACE = "http://example.org/ff/"
SUBCLASSES = ["Anthocyanidins", "Flavan-3-ols", "Flavanones", "Flavones", "Flavonols"]

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("quick", max_examples=20, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


def read_data(name: str) -> str:
    with open(os.path.join(DATA_DIR, name), encoding="utf-8") as f:
        return f.read()


def fixture_tables() -> SourceTables:
    return SourceTables(
        parse_food_table(read_data("foods.csv")),
        parse_flavonoid_table(read_data("contents.csv")),
        parse_disease_associations(read_data("associations.csv")),
        parse_drug_table(read_data("drugs.csv")),
    )


def fixture_vocabularies():
    return [
        load_vocabulary(read_data("chebi.tsv"), "chebi"),
        load_vocabulary(read_data("cdno.tsv"), "cdno"),
        load_vocabulary(read_data("doid.tsv"), "doid"),
    ]


def build_from_tables(tables: SourceTables, vocabs=(), **kwargs) -> KnowledgeGraph:
    entities, _ = merge_entities(collect_labels(tables))
    mappings = map_entities(entities, list(vocabs), NAMESPACE)
    return build_graph(
        entities,
        mappings,
        tables.foods,
        tables.contents,
        tables.associations,
        tables.drugs,
        namespace=NAMESPACE,
        **kwargs,
    )


def generate_random_tables(rng: random.Random, records: int = 50) -> SourceTables:
    food_count = max(1, records // 5)
    foods = [
        FoodRecord(
            f"{i:05d}",
            f"food {i}",
            f"group {rng.randint(0, 3)}",
            SourceProvenance("foods.csv", i + 2),
        )
        for i in range(food_count)
    ]
    flavonoid_subclass = {f"flavonoid {k}": rng.choice(SUBCLASSES) for k in range(10)}
    contents = []
    for line in range(records):
        name = rng.choice(sorted(flavonoid_subclass))
        contents.append(
            ContentRecord(
                rng.choice(foods).food_code,
                name,
                flavonoid_subclass[name],
                Decimal(rng.randint(0, 5000)) / 100,
                "HPLC",
                "raw",
                SourceProvenance("contents.csv", line + 2),
            )
        )
    present = sorted({c.flavonoid_name for c in contents})
    associations = [
        AssociationRecord(
            rng.choice(present),
            f"disease {rng.randint(0, 4)}",
            None,
            "anti-cancer",
            f"ref{line}",
            SourceProvenance("associations.csv", line + 2),
        )
        for line in range(records // 5)
    ]
    return SourceTables(foods, contents, associations, [])


@pytest.fixture
def fixture_config(tmp_path) -> PipelineConfig:
    config = PipelineConfig.load(os.path.join(DATA_DIR, "config.json"))
    return config.model_copy(update={"output_dir": str(tmp_path / "out")})


@pytest.fixture
def fixture_pipeline(fixture_config) -> Pipeline:
    return Pipeline(fixture_config)
