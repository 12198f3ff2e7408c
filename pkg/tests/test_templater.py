import pytest

from flavokg.errors import PrefixError, TemplateError
from flavokg.graph import KnowledgeGraph, build_graph
from flavokg.owl import (
    Annotation,
    ClassDeclaration,
    Label,
    PrefixMap,
    Relation,
    SubClassOf,
    load_prefixes,
    parse_turtle,
    serialize_turtle,
)
from flavokg.recycle import mint_local_iri
from flavokg.templater import (
    Directive,
    DirectiveKind,
    build_ontology,
    expand_template,
    graph_to_templates,
    parse_directive,
    parse_template,
    relation_name,
    sheet_to_csv,
)
from flavokg.validate import FindingCode, check_ontology
from tests.conftest import (
    NAMESPACE,
    build_from_tables,
    fixture_tables,
    fixture_vocabularies,
    read_data,
)

APPLE_SHEET = "ID,Label,Parent\nID,LABEL,SC %\nff:apple,Apple,ff:Food\n"


def fixture_prefixes() -> PrefixMap:
    return load_prefixes(read_data("prefixes.tsv"))


def sheet_named(templates, name):
    return [s for s in templates.sheets() if s.name == name][0]


def test_apple_sheet_expands_to_three_axioms():
    doc = expand_template(parse_template(APPLE_SHEET), fixture_prefixes())
    apple = NAMESPACE + "apple"

    assert doc.axioms == {
        ClassDeclaration(apple),
        Label(apple, "Apple"),
        SubClassOf(apple, NAMESPACE + "Food"),
    }


def test_rows_expand_to_three_axioms_each():
    rows = "".join(f"ff:item{i},Item {i},ff:Group{i % 3}\n" for i in range(40))
    sheet = parse_template("ID,Label,Parent\nID,LABEL,SC %\n" + rows)
    assert len(expand_template(sheet, fixture_prefixes())) == 120


def test_directives_are_case_sensitive():
    with pytest.raises(TemplateError) as e:
        parse_template("ID,Label,Parent\nID,LABEL,sc %\nff:apple,Apple,ff:Food\n")
    assert e.value.row == 2
    assert "unknown directive 'sc %'" in str(e.value)


def test_parse_directive_variants():
    assert parse_directive("") == Directive(DirectiveKind.IGNORE)
    assert parse_directive("SC % SPLIT=|") == Directive(DirectiveKind.SUBCLASS, split="|")
    assert parse_directive("A rdfs:comment") == Directive(
        DirectiveKind.ANNOTATION, "rdfs:comment"
    )
    assert parse_directive("AI ff:hasComponent SPLIT=;") == Directive(
        DirectiveKind.IRI_ANNOTATION, "ff:hasComponent", ";"
    )
    with pytest.raises(TemplateError):
        parse_directive("C %")


def test_empty_id_reports_its_row():
    with pytest.raises(TemplateError) as e:
        parse_template("ID,Label\nID,LABEL\nff:a,A\n,B\n")
    assert e.value.row == 4


def test_exactly_one_id_column():
    with pytest.raises(TemplateError):
        parse_template("Label\nLABEL\nA\n")
    with pytest.raises(TemplateError):
        parse_template("ID,Other\nID,ID\nff:a,ff:b\n")


def test_over_long_row_is_rejected():
    with pytest.raises(TemplateError) as e:
        parse_template("ID,Label\nID,LABEL\nff:a,A,extra\n")
    assert e.value.row == 3


def test_short_rows_are_padded_and_empty_cells_add_nothing():
    sheet = parse_template("ID,Label,Parent\nID,LABEL,SC %\nff:a\n")
    assert sheet.rows == (("ff:a", "", ""),)
    assert expand_template(sheet, fixture_prefixes()).axioms == {
        ClassDeclaration(NAMESPACE + "a")
    }


def test_split_annotations_and_relations():
    sheet = parse_template(
        "ID,Xref,Parts,Type\n"
        "ID,A oboInOwl:hasDbXref SPLIT=|,AI ff:hasComponent SPLIT=|,TYPE\n"
        "ff:a,CHEBI:1|CHEBI:2,ff:b|ff:c,owl:Class\n"
    )
    doc = expand_template(sheet, fixture_prefixes())
    xref = "http://www.geneontology.org/formats/oboInOwl#hasDbXref"

    assert Annotation(NAMESPACE + "a", xref, "CHEBI:1") in doc.axioms
    assert Annotation(NAMESPACE + "a", xref, "CHEBI:2") in doc.axioms
    assert Relation(NAMESPACE + "a", NAMESPACE + "hasComponent", NAMESPACE + "c") in doc.axioms
    assert len(doc) == 5


def test_unsupported_type_and_unknown_prefix():
    with pytest.raises(TemplateError) as e:
        expand_template(
            parse_template("ID,Type\nID,TYPE\nff:a,owl:NamedIndividual\n"), fixture_prefixes()
        )
    assert e.value.row == 3

    with pytest.raises(PrefixError) as e:
        expand_template(parse_template("ID,Parent\nID,SC %\nff:a,NCIT:C1\n"), fixture_prefixes())
    assert e.value.prefix == "NCIT"


def test_sheet_csv_round_trip():
    templates = graph_to_templates(
        build_from_tables(fixture_tables(), fixture_vocabularies()), fixture_prefixes()
    )
    for sheet in templates.sheets():
        assert parse_template(sheet_to_csv(sheet), sheet.name) == sheet


def test_skeleton_graph_templates():
    graph = build_graph([], [], [], [], [], namespace=NAMESPACE)
    templates = graph_to_templates(graph, fixture_prefixes())

    subclasses = sheet_named(templates, "layer1_flavonoid_subclass")
    assert [row[1] for row in subclasses.rows] == [
        "Anthocyanidins",
        "Flavan-3-ols",
        "Flavanones",
        "Flavones",
        "Flavonols",
    ]
    assert sheet_named(templates, "layer1_root").rows == (("ff:Flavonoid", "Flavonoid"),)
    assert sheet_named(templates, "layer3_food_flavonoid").rows == ()


def test_empty_graph_gives_empty_sheets():
    templates = graph_to_templates(KnowledgeGraph(), fixture_prefixes())

    assert [s.name for s in templates.sheets()] == ["layer1_root", "layer3_food_flavonoid"]
    assert all(s.rows == () for s in templates.sheets())
    assert len(build_ontology(templates.sheets(), fixture_prefixes())) == 0


def test_milk_merge_row_lists_its_flavonoids():
    graph = build_from_tables(fixture_tables(), fixture_vocabularies())
    templates = graph_to_templates(graph, fixture_prefixes())
    milk = mint_local_iri(
        "milk, chocolate, fluid, commercial, reduced fat, with added vitamin a and vitamin d",
        NAMESPACE,
    )
    flavonoids = sorted(
        mint_local_iri(key, NAMESPACE)
        for key in ("(+)-catechin", "(+)-gallocatechin", "(-)-epicatechin")
    )

    rows = {row[0]: row for row in sheet_named(templates, "layer3_food_flavonoid").rows}
    assert rows[milk] == (milk, milk + "/composition", "|".join(flavonoids))


def test_flavonoid_axiom_row():
    graph = build_from_tables(fixture_tables(), fixture_vocabularies())
    sheet = sheet_named(graph_to_templates(graph, fixture_prefixes()), "layer2_flavonoid")

    assert [directive for _, directive in sheet.columns] == [
        "ID",
        "SC % SPLIT=|",
        "A oboInOwl:hasDbXref SPLIT=|",
        "AI ff:hasAssociatedDisease SPLIT=|",
        "A ff:associatedDisease SPLIT=|",
    ]
    rows = {row[0]: row for row in sheet.rows}
    assert rows["ff:quercetin"] == (
        "ff:quercetin",
        "ff:flavonols",
        "CHEBI:16243",
        "ff:asthma|ff:colon-cancer",
        "asthma|colon cancer",
    )


def test_identifiers_get_no_sheet():
    graph = build_from_tables(fixture_tables(), fixture_vocabularies())
    names = [s.name for s in graph_to_templates(graph, fixture_prefixes()).sheets()]
    assert not [name for name in names if "identifier" in name]


def test_fixture_ontology_is_consistent():
    graph = build_from_tables(fixture_tables(), fixture_vocabularies())
    prefixes = fixture_prefixes()
    doc = build_ontology(graph_to_templates(graph, prefixes).sheets(), prefixes)

    codes = {f.code for f in check_ontology(doc)}
    assert FindingCode.LABEL_CONFLICT not in codes
    assert FindingCode.ORPHAN_NODE not in codes
    assert parse_turtle(serialize_turtle(doc, prefixes)) == doc

    naringenin = mint_local_iri("naringenin", NAMESPACE)
    assert SubClassOf(naringenin, NAMESPACE + "flavanones") in doc.axioms
    assert Label(naringenin, "Naringenin") in doc.axioms


def test_relation_names():
    assert relation_name("has_component") == "hasComponent"
    assert relation_name("targets") == "targetsDisease"
    assert relation_name("treats") == "relTreats"
    assert relation_name("has_side_effect") == "hasSideEffect"
