"""Taxonomy parsing, invariants, distances, and the shipped label sets."""

import itertools
import json

import pytest

from emord.taxonomy import (
    BUILTIN_TAXONOMIES,
    EmotionTaxonomy,
    TaxonomyError,
    builtin_taxonomy,
    grid_chebyshev_distance,
    grid_distance,
    label_distance,
    load_taxonomy,
    max_distance,
    ordinal_distance,
    parse_taxonomy,
    save_taxonomy,
    taxonomy_to_document,
)


def doc_1d(names_ranks):
    return {"mode": "1d", "labels": [{"name": n, "rank": r} for n, r in names_ranks]}


def doc_2d(names_cells, grid_size=5):
    return {
        "mode": "2d",
        "grid_size": grid_size,
        "labels": [
            {"name": n, "valence": v, "arousal": a} for n, (v, a) in names_cells
        ],
    }


def test_parse_1d_basic():
    tax = parse_taxonomy(doc_1d([("low", 0), ("mid", 1), ("high", 2)]))
    assert tax.mode == "1d"
    assert tax.labels == ("low", "mid", "high")
    assert tax.rank("mid") == 1
    assert tax.num_labels == 3


def test_parse_1d_ranks_must_be_bijection():
    with pytest.raises(TaxonomyError, match="duplicate rank"):
        parse_taxonomy(doc_1d([("a", 0), ("b", 0), ("c", 2)]))
    with pytest.raises(TaxonomyError, match="cover 0"):
        parse_taxonomy(doc_1d([("a", 0), ("b", 2), ("c", 3)]))


def test_parse_rejects_unknown_fields():
    bad = doc_1d([("a", 0), ("b", 1)])
    bad["color"] = "red"
    with pytest.raises(TaxonomyError, match="unknown document fields"):
        parse_taxonomy(bad)
    bad2 = doc_1d([("a", 0), ("b", 1)])
    bad2["labels"][0]["color"] = "red"
    with pytest.raises(TaxonomyError, match="unknown or mixed fields"):
        parse_taxonomy(bad2)


def test_parse_rejects_mixed_mode_fields():
    mixed = {
        "mode": "1d",
        "labels": [{"name": "a", "rank": 0}, {"name": "b", "valence": 1, "arousal": 1}],
    }
    with pytest.raises(TaxonomyError):
        parse_taxonomy(mixed)
    with pytest.raises(TaxonomyError, match="grid_size"):
        parse_taxonomy({**doc_1d([("a", 0), ("b", 1)]), "grid_size": 5})


def test_parse_rejects_duplicates_and_bad_values():
    with pytest.raises(TaxonomyError, match="duplicate label"):
        parse_taxonomy(doc_1d([("a", 0), ("a", 1)]))
    with pytest.raises(TaxonomyError, match="duplicate cell"):
        parse_taxonomy(doc_2d([("a", (0, 0)), ("b", (0, 0))]))
    with pytest.raises(TaxonomyError, match="outside"):
        parse_taxonomy(doc_2d([("a", (0, 0)), ("b", (5, 0))], grid_size=5))
    with pytest.raises(TaxonomyError, match="must be an integer"):
        parse_taxonomy(doc_1d([("a", 0), ("b", True)]))
    with pytest.raises(TaxonomyError, match="at least 2"):
        parse_taxonomy(doc_1d([("solo", 0)]))
    with pytest.raises(TaxonomyError, match="grid_size"):
        parse_taxonomy(doc_2d([("a", (0, 0)), ("b", (0, 1))], grid_size=1))


def test_parse_rejects_bad_mode_and_format():
    with pytest.raises(TaxonomyError, match="mode"):
        parse_taxonomy({"mode": "3d", "labels": []})
    with pytest.raises(TaxonomyError, match="format"):
        parse_taxonomy({**doc_1d([("a", 0), ("b", 1)]), "format": "nope/9"})


def test_document_round_trip_1d_and_2d(tmp_path):
    for doc in (
        doc_1d([("a", 2), ("b", 0), ("c", 1)]),
        doc_2d([("a", (0, 0)), ("b", (3, 4)), ("c", (2, 2))]),
    ):
        tax = parse_taxonomy(doc)
        again = parse_taxonomy(taxonomy_to_document(tax))
        assert again == tax
        path = tmp_path / "tax.json"
        save_taxonomy(tax, path)
        assert load_taxonomy(path) == tax


def test_load_rejects_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(TaxonomyError, match="not valid JSON"):
        load_taxonomy(path)


def test_builtin_names():
    assert set(BUILTIN_TAXONOMIES) == {"isear-valence", "goemotions-grid-5x5"}
    with pytest.raises(TaxonomyError, match="no builtin"):
        builtin_taxonomy("unknown-set")


def test_isear_taxonomy_shape_and_distances():
    tax = builtin_taxonomy("isear-valence")
    assert tax.mode == "1d"
    assert tax.num_labels == 7
    assert sorted(tax.ranks.values()) == list(range(7))
    # pinned ordering facts for the shipped valence scale
    assert ordinal_distance(tax, "sadness", "anger") == 2
    assert ordinal_distance(tax, "sadness", "fear") == 5
    assert tax.rank("sadness") == 0
    assert tax.rank("joy") == 6
    assert max_distance(tax) == 6


def test_grid_taxonomy_shape_and_distances():
    tax = builtin_taxonomy("goemotions-grid-5x5")
    assert tax.mode == "2d"
    assert tax.num_labels == 23
    assert tax.grid_size == 5
    cells = list(tax.cells.values())
    assert len(set(cells)) == 23  # injective
    assert all(0 <= v < 5 and 0 <= a < 5 for v, a in cells)
    assert tax.cell("grief") == (0, 0)
    assert tax.cell("pride") == (3, 2)
    assert grid_distance(tax, "grief", "pride") == 5
    assert grid_chebyshev_distance(tax, "grief", "pride") == 3
    assert max_distance(tax) == 8
    # joy must sit among close neighbors for the holdout experiments
    near_joy = [
        lab for lab in tax.labels if lab != "joy" and grid_distance(tax, "joy", lab) == 1
    ]
    assert len(near_joy) >= 2


def test_label_at_cell():
    tax = builtin_taxonomy("goemotions-grid-5x5")
    assert tax.label_at_cell(tax.cell("joy")) == "joy"
    empty = [
        (v, a)
        for v in range(5)
        for a in range(5)
        if (v, a) not in tax.cells.values()
    ]
    assert len(empty) == 2
    for cell in empty:
        assert tax.label_at_cell(cell) is None


def metric_axioms(tax, dist):
    labels = tax.labels
    for a in labels:
        assert dist(tax, a, a) == 0
    for a, b in itertools.combinations(labels, 2):
        assert dist(tax, a, b) == dist(tax, b, a) > 0
    for a, b, c in itertools.product(labels, repeat=3):
        assert dist(tax, a, c) <= dist(tax, a, b) + dist(tax, b, c)


def test_metric_axioms_by_enumeration():
    metric_axioms(builtin_taxonomy("isear-valence"), ordinal_distance)
    grid = builtin_taxonomy("goemotions-grid-5x5")
    metric_axioms(grid, grid_distance)
    metric_axioms(grid, grid_chebyshev_distance)


def test_label_distance_dispatch():
    t1 = builtin_taxonomy("isear-valence")
    t2 = builtin_taxonomy("goemotions-grid-5x5")
    assert label_distance(t1, "sadness", "fear") == ordinal_distance(t1, "sadness", "fear")
    assert label_distance(t2, "grief", "pride") == grid_distance(t2, "grief", "pride")
    with pytest.raises(TaxonomyError, match="unknown label"):
        label_distance(t1, "sadness", "zeal")


def test_mode_mismatch_accessors():
    t1 = builtin_taxonomy("isear-valence")
    t2 = builtin_taxonomy("goemotions-grid-5x5")
    with pytest.raises(TaxonomyError):
        t1.cell("sadness")
    with pytest.raises(TaxonomyError):
        t2.rank("joy")


def test_shipped_documents_parse_strictly():
    # the files on disk must themselves satisfy the strict parser
    import emord

    for name in BUILTIN_TAXONOMIES:
        tax = builtin_taxonomy(name)
        assert isinstance(tax, EmotionTaxonomy)
        doc = taxonomy_to_document(tax)
        assert json.dumps(doc)  # JSON-serializable
