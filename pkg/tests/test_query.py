import random

import pytest

from flavokg.errors import QuerySyntaxError
from flavokg.graph import Direction, EdgeKind
from flavokg.query import (
    DiseasesOfFlavonoid,
    FlavonoidsOfFood,
    FoodsContainingFlavonoid,
    FoodsForDisease,
    FoodsInGroup,
    Neighbors,
    execute,
    parse_query,
    query_lines,
    run_query,
)
from flavokg.recycle import mint_local_iri
from tests.conftest import (
    NAMESPACE,
    build_from_tables,
    fixture_tables,
    fixture_vocabularies,
    generate_random_tables,
)

MILK = "Milk, chocolate, fluid, commercial, reduced fat, with added vitamin A and vitamin D"


def test_dairy_dialogue():
    graph = build_from_tables(fixture_tables(), fixture_vocabularies())

    foods = run_query('FOODS IN GROUP "Dairy and Egg Products"', graph)
    assert foods.rows == [(MILK,)]
    assert foods.to_tsv() == f"food\n{MILK}\n"

    flavonoids = run_query(f'FLAVONOIDS OF FOOD "{MILK}"', graph)
    assert flavonoids.columns == ("flavonoid", "mean_mg_per_100g")
    assert flavonoids.rows == [
        ("(+)-Catechin", "2.0"),
        ("(+)-Gallocatechin", "0.5"),
        ("(-)-Epicatechin", "1.1"),
    ]


def test_parse_every_form():
    assert parse_query('FOODS IN GROUP "Dairy and Egg Products"') == FoodsInGroup(
        "Dairy and Egg Products"
    )
    assert parse_query('FLAVONOIDS OF FOOD "Onions, raw"') == FlavonoidsOfFood("Onions, raw")
    assert parse_query('FOODS CONTAINING FLAVONOID "Quercetin"') == FoodsContainingFlavonoid(
        "Quercetin"
    )
    assert parse_query('DISEASES OF FLAVONOID "Quercetin"') == DiseasesOfFlavonoid("Quercetin")
    assert parse_query('FOODS FOR DISEASE "asthma"') == FoodsForDisease("asthma")
    assert parse_query('NEIGHBORS "ff:x" VIA has_id OUT') == Neighbors(
        "ff:x", "has_id", Direction.OUT
    )
    assert parse_query(r'FOODS IN GROUP "say \"hi\""') == FoodsInGroup('say "hi"')


def test_keywords_are_case_insensitive():
    assert parse_query('foods in group "X"') == parse_query('FOODS IN GROUP "X"')
    assert parse_query('neighbors "a" via parent_of in') == Neighbors(
        "a", "parent_of", Direction.IN
    )


@pytest.mark.parametrize(
    "text, column",
    [
        ('FOODS GROUP "X"', 7),
        ('FOODS IN GROUP X', 16),
        ('FOODS IN GROUP "X" extra', 20),
        ("FOODS IN GROUP", 15),
        ('FOODS IN GROUP "unterminated', 16),
        ('FOODS IN GROUP ""', 16),
        ('DRINKS IN GROUP "X"', 1),
    ],
)
def test_syntax_errors_report_columns(text, column):
    with pytest.raises(QuerySyntaxError) as e:
        parse_query(text)
    assert e.value.column == column


def test_unknown_edge_kind_lists_valid_kinds():
    with pytest.raises(QuerySyntaxError) as e:
        parse_query('NEIGHBORS "a" VIA contains OUT')
    assert e.value.column == 19
    assert "has_component" in str(e.value)
    assert "parent_of" in str(e.value)

    assert parse_query('NEIGHBORS "a" VIA treats OUT', ["treats"]).edge_kind == "treats"


def test_labels_match_after_normalization():
    graph = build_from_tables(fixture_tables())
    assert run_query('FOODS IN GROUP "dairy and egg product."', graph).rows == [(MILK,)]
    assert run_query('DISEASES OF FLAVONOID "QUERCETIN"', graph).rows == [
        ("asthma", "anti-inflammatory", "ref22"),
        ("colon cancer", "risk-reduction", "ref5"),
    ]


def test_unmatched_label_warns_with_empty_table():
    graph = build_from_tables(fixture_tables())
    result = run_query('FOODS IN GROUP "Sweets"', graph)

    assert result.rows == []
    assert result.warnings == ["no food group matches 'Sweets'"]
    assert result.to_tsv() == "food\n"


def test_neighbors_query():
    graph = build_from_tables(fixture_tables())
    dairy = mint_local_iri("dairy and egg product", NAMESPACE)
    milk = mint_local_iri(
        "milk, chocolate, fluid, commercial, reduced fat, with added vitamin a and vitamin d",
        NAMESPACE,
    )

    result = run_query(f'NEIGHBORS "{dairy}" VIA parent_of OUT', graph)
    assert result.columns == ("iri", "kind", "label")
    assert result.rows == [(milk, "food", MILK)]
    assert run_query(f'NEIGHBORS "{milk}" VIA parent_of OUT', graph).rows == []
    assert run_query(f'NEIGHBORS "{NAMESPACE}nope" VIA parent_of OUT', graph).warnings


def test_contains_queries_are_converses():
    graph = build_from_tables(fixture_tables())
    forward = set()
    for food in graph.nodes("food"):
        for flavonoid, mean in execute(FlavonoidsOfFood(food.display_label), graph).rows:
            forward.add((food.display_label, flavonoid, mean))
    backward = set()
    for flavonoid in graph.nodes("flavonoid"):
        for food, mean in execute(FoodsContainingFlavonoid(flavonoid.display_label), graph).rows:
            backward.add((food, flavonoid.display_label, mean))

    assert forward == backward
    assert len(forward) == 15


def test_foods_for_disease_matches_nested_join():
    rng = random.Random(29)
    for _ in range(100):
        graph = build_from_tables(generate_random_tables(rng, rng.randint(5, 40)))
        for disease in graph.nodes("disease"):
            expected = set()
            for association in graph.edges(EdgeKind.HAS_ASSOCIATED_DISEASE):
                if association.target != disease.iri:
                    continue
                for component in graph.edges(EdgeKind.HAS_COMPONENT):
                    if component.target != association.source:
                        continue
                    for composition in graph.edges(EdgeKind.HAS_COMPOSITION):
                        if composition.target == component.source:
                            expected.add(
                                (
                                    graph.node(composition.source).display_label,
                                    graph.node(association.source).display_label,
                                )
                            )
            result = execute(FoodsForDisease(disease.display_label), graph)
            assert set(result.rows) == expected


def test_queries_do_not_modify_the_graph():
    graph = build_from_tables(fixture_tables(), fixture_vocabularies())
    before = graph.fingerprint()
    for text in [
        'FOODS IN GROUP "Fruits and Fruit Juices"',
        'FLAVONOIDS OF FOOD "Onions, raw"',
        'FOODS CONTAINING FLAVONOID "Quercetin"',
        'DISEASES OF FLAVONOID "Apigenin"',
        'FOODS FOR DISEASE "colon cancer"',
    ]:
        assert run_query(text, graph).rows
    assert graph.fingerprint() == before


def test_query_lines_skip_blanks_and_comments():
    script = '# dairy\nFOODS IN GROUP "Dairy and Egg Products"\n\n  FOODS FOR DISEASE "asthma"  \n'
    assert query_lines(script) == [
        'FOODS IN GROUP "Dairy and Egg Products"',
        'FOODS FOR DISEASE "asthma"',
    ]
