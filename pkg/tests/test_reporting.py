from pathlib import Path

import pytest

from inkfatigue.errors import FormatError, RangeError
from inkfatigue.features import DEFAULT_CATALOG, feature_table
from inkfatigue.model import SetId
from inkfatigue.protocol import canonical_set_pairs, summarize_recovery
from inkfatigue.reporting import (
    PER_SECOND_SCALE,
    features_to_json,
    features_to_markdown,
    features_to_tsv,
    load_matrix_tsv,
    mask_to_tsv,
    matrix_from_json,
    matrix_to_json,
    matrix_to_markdown,
    matrix_to_tsv,
    recovery_to_json,
    recovery_to_text,
)
from inkfatigue.stats import build_matrix, default_rows
from inkfatigue.synth import SynthProfile, generate_corpus

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="module")
def small_matrix():
    corpus = generate_corpus(SynthProfile(seed=40, n_subjects=4))
    rows = default_rows(tasks=(1, 6), catalog=("mean_speed", "time_in_air"))
    return build_matrix(corpus, rows, canonical_set_pairs())


@pytest.fixture(scope="module")
def reference_matrix():
    return load_matrix_tsv((DATA / "reference_matrix.tsv").read_text())


def test_matrix_tsv_layout(small_matrix):
    lines = matrix_to_tsv(small_matrix).splitlines()
    header = lines[0].split("\t")
    assert header[:3] == ["task_type", "task", "feature"]
    assert header[3:] == [
        "S1-S2", "S1-S3", "S1-S4", "S1-S5", "S2-S3",
        "S2-S4", "S2-S5", "S3-S4", "S3-S5", "S4-S5",
    ]
    assert len(lines) == 1 + 4
    first = lines[1].split("\t")
    assert first[:3] == ["Cognitive", "1", "mean_speed"]


def test_matrix_tsv_round_trip(small_matrix):
    text = matrix_to_tsv(small_matrix)
    loaded = load_matrix_tsv(text, alpha=small_matrix.alpha)
    assert [(r.task, r.feature) for r in loaded.rows] == [
        (r.task, r.feature) for r in small_matrix.rows
    ]
    for loaded_row, original_row in zip(loaded.cells, small_matrix.cells):
        for lc, oc in zip(loaded_row, original_row):
            assert lc.p == oc.p


def test_matrix_json_round_trip(small_matrix):
    text = matrix_to_json(small_matrix)
    loaded = matrix_from_json(text)
    assert loaded == small_matrix
    assert matrix_to_json(loaded) == text


def test_matrix_json_rejects_garbage():
    with pytest.raises(FormatError):
        matrix_from_json("{not json")
    with pytest.raises(FormatError):
        matrix_from_json('{"alpha": 0.05}')


def test_mask_tsv_matches_mask(small_matrix):
    lines = mask_to_tsv(small_matrix).splitlines()[1:]
    parsed = [line.split("\t")[3:] for line in lines]
    expected = small_matrix.mask()
    assert parsed == [
        ["true" if b else "false" for b in row] for row in expected
    ]


def test_markdown_renders_canonical_columns_and_bold(reference_matrix):
    text = matrix_to_markdown(reference_matrix)
    lines = text.splitlines()
    assert lines[0].startswith(
        "| Task type | Task | Feature | S1-S2 | S1-S3 | S1-S4 | S1-S5 "
        "| S2-S3 | S2-S4 | S2-S5 | S3-S4 | S3-S5 | S4-S5 |"
    )
    assert len(lines) == 2 + 29
    # spot-check one significant and one non-significant cell on the first row
    first = lines[2]
    assert "**0.0412**" in first
    assert "**0.863**" not in first and "0.863" in first


def test_markdown_na_cells():
    corpus = generate_corpus(SynthProfile(seed=41, n_subjects=2), sets=(SetId.S1, SetId.S2))
    matrix = build_matrix(
        corpus, [(1, "mean_speed")], [(SetId.S1, SetId.S2), (SetId.S4, SetId.S5)]
    )
    text = matrix_to_markdown(matrix)
    assert "NA" in text.splitlines()[2]


def test_load_matrix_tsv_diagnostics():
    with pytest.raises(FormatError):
        load_matrix_tsv("")
    with pytest.raises(FormatError):
        load_matrix_tsv("wrong\theader\nrow")
    good_header = "task_type\ttask\tfeature\tS1-S2\n"
    with pytest.raises(FormatError, match="line 2"):
        load_matrix_tsv(good_header + "Cognitive\t1\tmean_speed\n")
    with pytest.raises(FormatError):
        load_matrix_tsv(good_header + "Mechanical\t1\tmean_speed\t0.5\n")  # wrong category
    with pytest.raises(RangeError):
        load_matrix_tsv(good_header + "Cognitive\t1\tmean_speed\t1.5\n")
    loaded = load_matrix_tsv(good_header + "Cognitive\t1\tmean_speed\tNA\n")
    assert loaded.cells[0][0] is None


# --- feature tables ----------------------------------------------------------


@pytest.fixture(scope="module")
def table():
    corpus = generate_corpus(SynthProfile(seed=42, n_subjects=2), sets=(SetId.S1,))
    return feature_table(corpus)


def test_features_tsv_layout(table):
    lines = features_to_tsv(table, DEFAULT_CATALOG).splitlines()
    assert lines[0].split("\t") == ["subject", "set", "task", *DEFAULT_CATALOG, "degenerate"]
    assert len(lines) == 1 + 18
    first = lines[1].split("\t")
    assert first[:3] == ["U01", "S1", "1"]
    # counts serialize as plain integers
    air_index = 3 + DEFAULT_CATALOG.index("time_in_air")
    assert "." not in first[air_index]


def test_features_tsv_deterministic(table):
    assert features_to_tsv(table, DEFAULT_CATALOG) == features_to_tsv(table, DEFAULT_CATALOG)


def test_features_json_contains_values(table):
    import json

    rows = json.loads(features_to_json(table, DEFAULT_CATALOG))
    assert len(rows) == 18
    assert rows[0]["subject"] == "U01"
    assert set(rows[0]["values"]) == set(DEFAULT_CATALOG)


def test_features_markdown_converts_to_per_second(table):
    key = ("U01", SetId.S1, 1)
    vector = table[key]
    text = features_to_markdown({key: vector}, ("mean_speed", "time_in_air"))
    lines = text.splitlines()
    assert "mean_speed (units/s)" in lines[0]
    value_line = lines[2].split("|")
    shown = float(value_line[4].strip())
    # cell text carries 6 significant digits
    assert shown == pytest.approx(vector["mean_speed"] * 100.0, rel=1e-4)
    assert PER_SECOND_SCALE["mean_acceleration"] == 10000.0


# --- recovery rendering -------------------------------------------------------


def test_recovery_rendering(reference_matrix):
    summary = summarize_recovery(reference_matrix, alpha=0.05)
    js = recovery_to_json(summary)
    assert '"scope": "catalog-subset"' in js
    import json

    payload = json.loads(js)
    assert payload["columns"]["S1-S5"]["Cognitive"]["count"] == 8
    assert payload["no_recovery"]["count"] == 0
    text = recovery_to_text(summary)
    assert "alpha = 0.05" in text
    assert "catalog-subset" in text
    assert "S1-S5" in text
    assert "S4-S5" in text
