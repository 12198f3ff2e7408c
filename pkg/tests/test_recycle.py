import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flavokg.errors import FlavoKGError, VocabularyError
from flavokg.ingest import SourceProvenance
from flavokg.normalize import CanonicalEntity, EntityKind, Normalizer
from flavokg.recycle import (
    MatchOutcome,
    expand_curie,
    load_vocabulary,
    map_entities,
    map_term,
    mapping_report,
    mappings_tsv,
    mint_local_iri,
    vocabulary_order,
)
from tests.conftest import NAMESPACE, read_data

KEY_TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=20
)


def generate_random_entity(
    display: str, key: str = None, kind: EntityKind = EntityKind.FLAVONOID
) -> CanonicalEntity:
    key = key or display.lower()
    return CanonicalEntity(
        key, display, kind, ((display, SourceProvenance("contents.csv", 2)),)
    )


def generate_random_key(rng: random.Random) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789 -()+,'éü%αβ"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 16)))


def test_load_vocabulary_fixture():
    chebi = load_vocabulary(read_data("chebi.tsv"), "chebi")

    assert chebi.name == "chebi"
    assert "CHEBI:16243" in chebi
    assert "DOID:219" not in chebi
    quercetin = [t for t in chebi.terms if t.curie == "CHEBI:16243"][0]
    assert quercetin.synonyms == ("quercetol", "meletin")


@pytest.mark.parametrize(
    "text",
    [
        "notacurie\tlabel\n",
        "CHEBI:1\tone\nCHEBI:1\tagain\n",
        "CHEBI:1\t\n",
    ],
)
def test_malformed_vocabularies(text):
    with pytest.raises(VocabularyError) as e:
        load_vocabulary(text, "chebi")
    assert e.value.line_number is not None


def test_four_tiers_in_precedence_order():
    vocab = load_vocabulary(
        "X:1\tQuercetin\t\nX:2\tKaempferol.\t\nX:3\tsomething else\tLuteolol\n", "x"
    )

    exact = map_term(generate_random_entity("Quercetin"), [vocab], NAMESPACE)
    normalized = map_term(generate_random_entity("KAEMPFEROL"), [vocab], NAMESPACE)
    synonym = map_term(generate_random_entity("luteolol"), [vocab], NAMESPACE)
    minted = map_term(generate_random_entity("Gallocatechin"), [vocab], NAMESPACE)

    assert (exact.outcome, exact.iri_or_curie) == (MatchOutcome.EXACT_LABEL, "X:1")
    assert (normalized.outcome, normalized.iri_or_curie) == (
        MatchOutcome.NORMALIZED_LABEL,
        "X:2",
    )
    assert (synonym.outcome, synonym.iri_or_curie) == (MatchOutcome.SYNONYM, "X:3")
    assert minted.outcome == MatchOutcome.MINTED
    assert minted.iri_or_curie == NAMESPACE + "gallocatechin"
    assert minted.vocabulary is None
    assert [r.match_quality for r in (exact, normalized, synonym, minted)] == [1, 2, 3, 4]


def test_better_tier_beats_earlier_vocabulary():
    first = load_vocabulary("A:1\tunrelated\tquercetin\n", "first")
    second = load_vocabulary("B:1\tquercetin\t\n", "second")

    result = map_term(generate_random_entity("Quercetin"), [first, second], NAMESPACE)

    assert result.iri_or_curie == "B:1"
    assert result.vocabulary == "second"


def test_earlier_vocabulary_wins_within_tier():
    first = load_vocabulary("A:1\tquercetin\t\n", "first")
    second = load_vocabulary("B:1\tquercetin\t\n", "second")

    result = map_term(generate_random_entity("quercetin"), [second, first], NAMESPACE)
    assert result.iri_or_curie == "B:1"


def test_smallest_curie_wins_within_vocabulary():
    vocab = load_vocabulary("A:2\tquercetin\t\nA:1\tquercetin\t\n", "a")
    assert map_term(generate_random_entity("quercetin"), [vocab]).iri_or_curie == "A:1"


def test_pinned_curie_must_exist():
    doid = load_vocabulary(read_data("doid.tsv"), "doid")
    disease = generate_random_entity("colon cancer", kind=EntityKind.DISEASE)

    pinned = map_term(disease, [doid], NAMESPACE, pinned="DOID:219")
    assert (pinned.outcome, pinned.iri_or_curie) == (MatchOutcome.EXACT_LABEL, "DOID:219")

    with pytest.raises(VocabularyError):
        map_term(disease, [doid], NAMESPACE, pinned="DOID:999999")


def test_plural_exceptions_apply_to_vocabulary_terms():
    normalizer = Normalizer(plural_exceptions={"measles", "mumps"})
    doid = load_vocabulary("DOID:8622\tMeasles\t\nDOID:10264\tparotitis\tMumps\n", "doid")
    measles = generate_random_entity(
        "measles", normalizer.canonicalize("measles", EntityKind.DISEASE), EntityKind.DISEASE
    )
    mumps = generate_random_entity(
        "mumps", normalizer.canonicalize("mumps", EntityKind.DISEASE), EntityKind.DISEASE
    )

    normalized = map_term(
        measles, [doid], NAMESPACE, plural_exceptions=normalizer.plural_exceptions
    )
    assert (normalized.outcome, normalized.iri_or_curie) == (
        MatchOutcome.NORMALIZED_LABEL,
        "DOID:8622",
    )
    synonym = map_entities(
        [mumps], [doid], NAMESPACE, plural_exceptions=normalizer.plural_exceptions
    )[0]
    assert (synonym.outcome, synonym.iri_or_curie) == (MatchOutcome.SYNONYM, "DOID:10264")

    assert map_term(measles, [doid], NAMESPACE).outcome == MatchOutcome.MINTED


def test_never_returns_curie_outside_vocabularies():
    chebi = load_vocabulary(read_data("chebi.tsv"), "chebi")
    names = ["Luteolin", "Quercetin", "(+)-Gallocatechin", "Cyanidin", "catechin"]
    results = map_entities([generate_random_entity(n) for n in names], [chebi], NAMESPACE)

    for result in results:
        assert result.is_minted or result.iri_or_curie in chebi


def test_vocabulary_order_per_kind():
    chebi = load_vocabulary("CHEBI:1\tx\t\n", "chebi")
    doid = load_vocabulary("DOID:1\tx\t\n", "doid")

    assert [v.name for v in vocabulary_order(EntityKind.DISEASE, [chebi, doid])] == [
        "doid",
        "chebi",
    ]
    assert [
        v.name
        for v in vocabulary_order(
            EntityKind.DISEASE, [chebi, doid], {EntityKind.DISEASE: ["chebi"]}
        )
    ] == ["chebi", "doid"]


def test_mint_local_iri_escapes():
    assert mint_local_iri("(+)-catechin", NAMESPACE) == NAMESPACE + "%28%2B%29-catechin"
    assert mint_local_iri("colon cancer", NAMESPACE) == NAMESPACE + "colon-cancer"
    assert mint_local_iri("café", NAMESPACE) == NAMESPACE + "caf%C3%A9"

    with pytest.raises(FlavoKGError):
        mint_local_iri("x", "http://example.org/ff")
    with pytest.raises(FlavoKGError):
        mint_local_iri("", NAMESPACE)


def test_minted_iris_are_injective_over_random_keys():
    rng = random.Random(20240417)
    keys = {generate_random_key(rng) for _ in range(10_000)}

    slugs = {k.replace(" ", "-") for k in keys}
    iris = {mint_local_iri(k, NAMESPACE) for k in keys}
    assert len(iris) == len(slugs)


@given(KEY_TEXT, KEY_TEXT)
def test_minting_only_merges_space_and_hyphen(a, b):
    same_slug = a.replace(" ", "-") == b.replace(" ", "-")
    assert (mint_local_iri(a, NAMESPACE) == mint_local_iri(b, NAMESPACE)) == same_slug


def test_expand_curie():
    assert expand_curie("DOID:219") == "http://purl.obolibrary.org/obo/DOID_219"
    assert expand_curie("ff:apple", {"ff": NAMESPACE}) == NAMESPACE + "apple"
    with pytest.raises(VocabularyError):
        expand_curie("not a curie")


def test_mapping_report_counts_every_tier():
    vocab = load_vocabulary("X:1\tquercetin\t\n", "x")
    results = map_entities(
        [generate_random_entity("quercetin"), generate_random_entity("Rutin")],
        [vocab],
        NAMESPACE,
    )
    summary = mapping_report(results)

    assert summary.mapped_fraction == 0.5
    assert summary.kind_fraction("flavonoid") == 0.5
    assert ("flavonoid", MatchOutcome.SYNONYM, 0) in summary.counts
    assert len(summary.counts) == 4
    assert summary.to_tsv().splitlines()[-1] == "*\tmapped_fraction\t0.5000"

    assert mapping_report([]).mapped_fraction == 0.0


def test_mappings_tsv_and_wire_schema():
    vocab = load_vocabulary("X:1\tquercetin\t\n", "x")
    results = map_entities([generate_random_entity("quercetin")], [vocab], NAMESPACE)

    assert mappings_tsv(results).splitlines()[1] == (
        "flavonoid\tquercetin\texact_label\tX:1\tx"
    )
    wire = results[0].to_v1()
    assert wire.match_quality == 1
    assert wire.outcome == "exact_label"
