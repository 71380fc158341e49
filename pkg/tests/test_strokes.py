"""Stroke resampling and rule-based classification."""

from __future__ import annotations

import math

import numpy as np
import pytest

from modelsync.errors import TooFewPoints
from modelsync.model import ModelDocument, Rect, Stroke
from modelsync.strokes import (
    CORPUS_SCENE,
    ClassShape,
    InformalSketch,
    MaterializeResult,
    RecognizerConfig,
    RelationshipLine,
    bounding_box,
    classify_stroke,
    corpus_accuracy,
    generate_corpus,
    load_corpus,
    materialize,
    resample_stroke,
    save_corpus,
    topmost_class_at,
)


def test_decimation_hand_trace():
    points = [(0, 0), (0.5, 0), (1.0, 0), (3.0, 0)]
    assert resample_stroke(points, RecognizerConfig(min_point_dist=2.0)) == [
        [0.0, 0.0],
        [3.0, 0.0],
    ]


def test_densification_splits_long_gap():
    config = RecognizerConfig(min_point_dist=2.0, max_gap=4.0)
    out = resample_stroke([(0, 0), (10, 0)], config)
    xs = [p[0] for p in out]
    assert xs == pytest.approx([0.0, 10 / 3, 20 / 3, 10.0])
    gaps = [b - a for a, b in zip(xs, xs[1:])]
    assert all(g <= 4.0 + 1e-9 for g in gaps)


def test_exactly_spaced_points_are_a_fixpoint():
    config = RecognizerConfig(min_point_dist=2.0, max_gap=10.0)
    points = [[float(i * 2), 0.0] for i in range(10)]
    assert resample_stroke(points, config) == points


def test_resample_preserves_endpoints_exactly():
    points = [(0.123, 9.87), (50.5, 3.25), (100.75, 44.5)]
    out = resample_stroke(points)
    assert out[0] == [0.123, 9.87]
    assert out[-1] == [100.75, 44.5]


def test_resample_rejects_too_few_points():
    with pytest.raises(TooFewPoints):
        resample_stroke([(1, 1)])


def test_output_spacing_bounds():
    config = RecognizerConfig(min_point_dist=2.0, max_gap=10.0)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 400, (200, 2))
    out = np.asarray(resample_stroke(pts, config))
    gaps = np.hypot(*(np.diff(out, axis=0).T))
    assert np.all(gaps <= config.max_gap + 1e-9)
    # lower bound holds everywhere except possibly the final segment
    assert np.all(gaps[:-1] >= config.min_point_dist - 1e-9)


def test_resample_idempotent_fuzz_10000():
    config = RecognizerConfig()
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        n = int(rng.integers(2, 40))
        scale = float(rng.uniform(1, 300))
        pts = rng.uniform(0, scale, (n, 2))
        once = resample_stroke(pts, config)
        twice = resample_stroke(once, config)
        assert twice == once


# -- classification ---------------------------------------------------------------


def test_closed_square_becomes_class_shape():
    points = [(0, 0), (100, 0), (100, 80), (0, 80), (2, 1)]
    result = classify_stroke(points, [], RecognizerConfig())
    assert isinstance(result, ClassShape)
    assert result.bounds.to_list() == [0, 0, 100, 80]
    assert math.dist((0, 0), (2, 1)) <= 5.0  # endpoint gap sqrt(5) under the floor


def test_stroke_between_classes_is_relationship():
    view = [("A", Rect(0, 0, 100, 100)), ("B", Rect(300, 0, 100, 100))]
    points = [(50.0, 50.0), (175.0, 50.0), (350.0, 50.0)]
    result = classify_stroke(points, view, RecognizerConfig())
    assert isinstance(result, RelationshipLine)
    assert (result.source, result.target) == ("A", "B")
    assert result.waypoints == [[175.0, 50.0]]


def test_open_stroke_from_class_is_informal():
    view = [("A", Rect(0, 0, 100, 100))]
    points = [(50, 50), (150, 80), (260, 40)]
    assert isinstance(classify_stroke(points, view, RecognizerConfig()), InformalSketch)


def test_closed_loop_inside_one_class_is_class_shape():
    view = [("A", Rect(0, 0, 500, 500))]
    points = [(100, 100), (200, 100), (200, 200), (100, 200), (100, 100)]
    result = classify_stroke(points, view, RecognizerConfig())
    assert isinstance(result, ClassShape)


def test_tiny_closed_loop_is_informal():
    points = [(0, 0), (10, 0), (10, 10), (0, 10), (0, 0)]
    assert isinstance(classify_stroke(points, [], RecognizerConfig()), InformalSketch)


def test_topmost_class_wins_on_overlap():
    view = [("old", Rect(0, 0, 100, 100)), ("new", Rect(50, 50, 100, 100))]
    assert topmost_class_at(75, 75, view) == "new"
    assert topmost_class_at(10, 10, view) == "old"
    assert topmost_class_at(500, 500, view) is None


def test_classification_fuzz_never_raises_and_bounds_match():
    config = RecognizerConfig()
    view = CORPUS_SCENE
    rng = np.random.default_rng(21)
    for _ in range(10_000):
        n = int(rng.integers(2, 30))
        pts = rng.uniform(0, 1000, (n, 2))
        resampled = resample_stroke(pts, config)
        result = classify_stroke(resampled, view, config)
        if isinstance(result, ClassShape):
            assert result.bounds.to_list() == bounding_box(resampled).to_list()


# -- materialize -------------------------------------------------------------------


def _stroke(points):
    return Stroke("s1", "b1", [list(map(float, p)) for p in points], "a1", 0, 10)


def test_materialize_class_shape():
    doc = ModelDocument("d1")
    board = next(iter(doc.whiteboards))
    stroke = Stroke("s1", board, [[0, 0], [100, 0], [100, 80], [0, 80], [0, 0]], "a1", 0, 10)
    result = classify_stroke(stroke.points, [], RecognizerConfig())
    mat = materialize(result, stroke, "a1", 10)
    assert mat.body["op"] == "create_class"
    assert not mat.needs_kind_choice
    from modelsync.ops import apply_body

    cid = apply_body(doc, mat.body, "a1", 10)
    assert doc.elements[cid].bounds.to_list() == [0, 0, 100, 80]


def test_materialize_relationship_flags_kind_picker():
    result = RelationshipLine("A", "B", [[1, 2]])
    mat = materialize(result, _stroke([(0, 0), (1, 1)]), "a1", 10)
    assert mat.needs_kind_choice
    assert mat.body["kind"] == "association"
    assert mat.body["source"] == "A" and mat.body["target"] == "B"


def test_materialize_informal_stores_stroke_verbatim():
    doc = ModelDocument("d1")
    board = next(iter(doc.whiteboards))
    stroke = Stroke("s1", board, [[0.0, 0.0], [30.0, 40.0]], "a1", 0, 10)
    mat = materialize(InformalSketch(), stroke, "a1", 10)
    from modelsync.ops import apply_body

    before = len(doc.elements)
    sid = apply_body(doc, mat.body, "a1", 10)
    assert doc.strokes[sid].points == stroke.points
    assert len(doc.elements) == before


# -- corpus -----------------------------------------------------------------------


def test_corpus_noiseless_accuracy_is_perfect():
    corpus = generate_corpus(per_label=70, seed=7, noise_sigma=0.0)
    assert len(corpus) == 210
    assert corpus_accuracy(corpus) == 1.0


def test_corpus_noisy_accuracy_meets_bar():
    corpus = generate_corpus(per_label=70, seed=7, noise_sigma=1.0)
    assert corpus_accuracy(corpus) >= 0.95


def test_corpus_ndjson_round_trip(tmp_path):
    corpus = generate_corpus(per_label=3, seed=1)
    path = tmp_path / "corpus.ndjson"
    save_corpus(corpus, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 9
    import json

    first = json.loads(lines[0])
    assert set(first) == {"label", "points"}
    loaded = load_corpus(path)
    assert [s.label for s in loaded] == [s.label for s in corpus]
    assert corpus_accuracy(loaded) == corpus_accuracy(corpus)
