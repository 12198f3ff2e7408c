import random

from hypothesis import given
from hypothesis import strategies as st

from flavokg.graph import (
    Edge,
    KnowledgeGraph,
    Node,
    build_graph,
    export_graph_csv,
    load_graph_csv,
    transitive_closure,
)
from flavokg.normalize import collect_labels, merge_entities
from flavokg.owl import (
    Annotation,
    ClassDeclaration,
    Label,
    OwlDocument,
    Relation,
    SubClassOf,
)
from flavokg.recycle import map_entities
from flavokg.validate import (
    Finding,
    FindingCode,
    Severity,
    check_graph,
    check_ontology,
    coverage_stats,
    findings_to_v1,
    findings_tsv,
    has_errors,
)
from tests.conftest import NAMESPACE, build_from_tables, fixture_tables, fixture_vocabularies


def fixture_graph_and_mappings():
    tables = fixture_tables()
    entities, _ = merge_entities(collect_labels(tables))
    mappings = map_entities(entities, fixture_vocabularies(), NAMESPACE)
    return build_from_tables(tables, fixture_vocabularies()), mappings


def generate_graph(nodes, edges) -> KnowledgeGraph:
    return KnowledgeGraph(
        [Node(iri, kind, iri.upper()) for iri, kind in nodes],
        [Edge(source, target, "parent_of") for source, target in edges],
    )


def codes(findings):
    return [f.code for f in findings]


def test_fixture_has_only_unmapped_terms():
    graph, mappings = fixture_graph_and_mappings()
    findings = check_graph(graph, mappings)

    assert set(codes(findings)) == {FindingCode.UNMAPPED_TERM}
    assert not has_errors(findings)
    assert (NAMESPACE + "%28%2B%29-gallocatechin",) in [f.subject for f in findings]


def test_fixture_without_mappings_is_clean():
    graph, _ = fixture_graph_and_mappings()
    assert check_graph(graph) == []


def test_cycle_is_reported_once_from_smallest_iri():
    graph = generate_graph(
        [("c", "food_group"), ("a", "food_group"), ("b", "food_group")],
        [("b", "c"), ("c", "a"), ("a", "b")],
    )
    findings = check_graph(graph)

    assert codes(findings) == [FindingCode.CYCLE]
    assert findings[0].subject == ("a", "b", "c")
    assert findings[0].message == "parent_of cycle: a -> b -> c -> a"
    assert findings[0].severity == Severity.ERROR


def test_redundant_edge_and_multiple_parents():
    graph = generate_graph(
        [("g", "food_group"), ("h", "food_group"), ("f", "food")],
        [("g", "h"), ("h", "f"), ("g", "f")],
    )
    findings = check_graph(graph)

    assert codes(findings) == [FindingCode.MULTIPLE_PARENTS, FindingCode.REDUNDANT_EDGE]
    assert findings[0].subject == ("f",)
    assert findings[1].subject == ("g", "f")
    assert findings[1].severity == Severity.WARNING


def test_hand_edited_export_with_dangling_edge():
    graph, _ = fixture_graph_and_mappings()
    nodes_csv, edges_csv = export_graph_csv(graph)
    edges_csv += f"{NAMESPACE}beverage,parent_of,{NAMESPACE}coffee,{{}}\n"

    findings = check_graph(load_graph_csv(nodes_csv, edges_csv))
    assert codes(findings) == [FindingCode.DANGLING_EDGE]
    assert findings[0].subject == (NAMESPACE + "beverage", NAMESPACE + "coffee")
    assert has_errors(findings)


def test_duplicate_ids_and_orphans():
    nodes_csv = "iri,kind,label\nf,food,F\nf,food,F\nv,flavonoid,V\n"
    findings = check_graph(load_graph_csv(nodes_csv, "source,kind,target,props_json\n"))

    assert codes(findings) == [
        FindingCode.DUPLICATE_ID,
        FindingCode.ORPHAN_NODE,
        FindingCode.ORPHAN_NODE,
    ]
    assert [f.subject for f in findings] == [("f",), ("f",), ("v",)]


def test_unknown_subclass():
    graph = generate_graph(
        [("s", "flavonoid_subclass"), ("g", "food_group"), ("v", "flavonoid"), ("w", "flavonoid")],
        [("s", "v"), ("g", "w")],
    )
    assert codes(check_graph(graph)) == [FindingCode.UNKNOWN_SUBCLASS]

    findings = check_graph(graph, known_subclasses=[])
    assert codes(findings) == [FindingCode.UNKNOWN_SUBCLASS, FindingCode.UNKNOWN_SUBCLASS]
    assert [f.subject for f in findings] == [("v", "s"), ("w", "g")]


def test_check_ontology():
    a, b, c = (NAMESPACE + local for local in "abc")
    doc = OwlDocument(
        frozenset(
            [
                ClassDeclaration(a),
                ClassDeclaration(b),
                ClassDeclaration(c),
                SubClassOf(a, b),
                Label(a, "A"),
                Label(a, "Alpha"),
                Label(c, "C"),
            ]
        )
    )
    findings = check_ontology(doc)

    assert codes(findings) == [FindingCode.LABEL_CONFLICT, FindingCode.ORPHAN_NODE]
    assert findings[0].subject == (a,)
    assert findings[0].message == 'conflicting labels: "A", "Alpha"'
    assert findings[1].subject == (c,)


def test_findings_reports():
    findings = [
        Finding(
            FindingCode.DANGLING_EDGE, ("a", "b"), "parent_of edge points at missing node(s): b"
        ),
        Finding(FindingCode.UNMAPPED_TERM, ("x",), "flavonoid 'x' matched no vocabulary term"),
    ]

    assert findings_tsv(findings) == (
        "code\tseverity\tsubject\tmessage\n"
        "DANGLING_EDGE\terror\ta b\tparent_of edge points at missing node(s): b\n"
        "UNMAPPED_TERM\twarning\tx\tflavonoid 'x' matched no vocabulary term\n"
    )
    report = findings_to_v1(findings)
    assert (report.errors, report.warnings) == (1, 1)
    assert report.findings[0].subject == ["a", "b"]
    assert findings_tsv([]) == "code\tseverity\tsubject\tmessage\n"


def test_coverage_stats():
    graph, mappings = fixture_graph_and_mappings()
    stats = coverage_stats(graph, mappings)

    assert stats.node_counts["food"] == 8
    assert stats.node_counts["identifier"] == 13
    assert stats.edge_counts["has_component"] == 15
    assert stats.association_count == 4
    assert stats.mapped_fraction["flavonoid"] == 0.9
    assert stats.mapped_fraction["disease"] == 1.0
    assert stats.mapped_fraction["food"] == 0.0

    tsv = stats.to_tsv()
    assert tsv.startswith("metric\tkind\tvalue\n")
    assert "mapped_fraction\tflavonoid\t0.9000\n" in tsv
    assert tsv.endswith("associations\t*\t4\n")


def test_skeleton_coverage():
    stats = coverage_stats(build_graph([], [], [], [], [], namespace=NAMESPACE))
    assert stats.node_counts == {"flavonoid_subclass": 5}
    assert stats.edge_counts == {}
    assert stats.association_count == 0


def test_removing_redundant_edges_keeps_closure():
    rng = random.Random(41)
    for _ in range(50):
        size = rng.randint(2, 12)
        names = [f"n{i:02d}" for i in range(size)]
        edges = [
            (names[i], names[j])
            for i in range(size)
            for j in range(i + 1, size)
            if rng.random() < 0.3
        ]
        graph = generate_graph([(n, "food_group") for n in names], edges)
        closure = transitive_closure(graph, "parent_of")
        for finding in check_graph(graph):
            assert finding.code == FindingCode.REDUNDANT_EDGE
            pruned = generate_graph(
                [(n, "food_group") for n in names],
                [e for e in edges if e != finding.subject],
            )
            assert transitive_closure(pruned, "parent_of") == closure


IRIS = st.sampled_from([NAMESPACE + local for local in "abcde"])
AXIOMS = st.one_of(
    st.builds(ClassDeclaration, IRIS),
    st.builds(Label, IRIS, st.sampled_from(["A", "B"])),
    st.builds(SubClassOf, IRIS, IRIS),
    st.builds(Annotation, IRIS, st.just(NAMESPACE + "note"), st.just("x")),
    st.builds(Relation, IRIS, st.just(NAMESPACE + "rel"), IRIS),
)


def naive_ontology_findings(doc: OwlDocument):
    axioms = list(doc.axioms)
    found = set()
    for a in axioms:
        if isinstance(a, Label):
            for b in axioms:
                if isinstance(b, Label) and b.iri == a.iri and b.text != a.text:
                    found.add((FindingCode.LABEL_CONFLICT, (a.iri,)))
        if isinstance(a, ClassDeclaration):
            touched = False
            for b in axioms:
                if isinstance(b, SubClassOf) and a.iri in (b.sub, b.sup):
                    touched = True
                elif isinstance(b, Annotation) and b.iri == a.iri:
                    touched = True
                elif isinstance(b, Relation) and a.iri in (b.subject, b.object):
                    touched = True
            if not touched:
                found.add((FindingCode.ORPHAN_NODE, (a.iri,)))
    return found


@given(st.frozensets(AXIOMS, max_size=12))
def test_check_ontology_matches_full_scan(axioms):
    doc = OwlDocument(axioms)
    findings = check_ontology(doc)

    assert {(f.code, f.subject) for f in findings} == naive_ontology_findings(doc)
    assert len(findings) == len({(f.code, f.subject) for f in findings})
    assert FindingCode.DUPLICATE_ID not in codes(findings)


def test_empty_ontology_has_no_findings():
    assert check_ontology(OwlDocument()) == []
