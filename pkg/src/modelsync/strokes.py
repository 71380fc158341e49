"""Sketch recognition: point-stream resampling and rule-based classification.

Strokes are collected as point lists. Resampling first decimates points that
crowd together when the hand moves slowly, then densifies long jumps from
fast movement, so points travel the network at near-uniform spacing. The
classifier is deliberately simple: a drawing that starts and ends inside two
different classes is a relationship line, a closed path is a class shape,
everything else is kept as an informal sketch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import TooFewPoints
from .model import MIN_CLASS_SIZE, Rect, Stroke


@dataclass
class RecognizerConfig:
    min_point_dist: float = 2.0
    max_gap: float = 10.0
    closure_tolerance_fraction: float = 0.05
    closure_tolerance_floor: float = 5.0

    def __post_init__(self):
        if self.min_point_dist <= 0:
            raise ValueError("min_point_dist must be positive")
        if self.max_gap <= self.min_point_dist:
            raise ValueError("max_gap must exceed min_point_dist")
        if self.closure_tolerance_fraction <= 0 or self.closure_tolerance_floor <= 0:
            raise ValueError("closure tolerance must be positive")

    def closure_tolerance(self, bbox_diagonal: float) -> float:
        return max(self.closure_tolerance_fraction * bbox_diagonal, self.closure_tolerance_floor)


@dataclass
class ClassShape:
    bounds: Rect


@dataclass
class RelationshipLine:
    source: str
    target: str
    waypoints: list[list[float]] = field(default_factory=list)


@dataclass
class InformalSketch:
    pass


RecognitionResult = ClassShape | RelationshipLine | InformalSketch


def _as_array(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise TooFewPoints(f"need >= 2 points, got shape {arr.shape}")
    return arr


def resample_stroke(points, config: RecognizerConfig | None = None) -> list[list[float]]:
    """Resample to near-uniform spacing.

    Pass 1 keeps a point only once it is ``min_point_dist`` away from the
    last kept point (the final raw point is always kept); pass 2 splits any
    remaining gap wider than ``max_gap`` into equal parts. First and last raw
    points survive exactly, and the whole transform is idempotent.
    """
    config = config or RecognizerConfig()
    arr = _as_array(points)
    xs = np.ascontiguousarray(arr[:, 0])
    ys = np.ascontiguousarray(arr[:, 1])
    keep = kernels.decimate_mask(xs, ys, config.min_point_dist)
    dense = kernels.densify(xs[keep], ys[keep], config.max_gap)
    return dense.tolist()


def bounding_box(points) -> Rect:
    arr = np.asarray(points, dtype=np.float64)
    x0, y0 = arr.min(axis=0)
    x1, y1 = arr.max(axis=0)
    return Rect(float(x0), float(y0), float(x1 - x0), float(y1 - y0))


def topmost_class_at(x: float, y: float, model_view) -> str | None:
    """Id of the topmost class containing the point.

    ``model_view`` lists ``(element_id, Rect)`` in creation order; when
    several overlapping classes contain the point, the most recently created
    one wins.
    """
    if not model_view:
        return None
    rx = np.fromiter((r.x for _, r in model_view), dtype=np.float64, count=len(model_view))
    ry = np.fromiter((r.y for _, r in model_view), dtype=np.float64, count=len(model_view))
    rw = np.fromiter((r.w for _, r in model_view), dtype=np.float64, count=len(model_view))
    rh = np.fromiter((r.h for _, r in model_view), dtype=np.float64, count=len(model_view))
    hit = kernels.topmost_hit(float(x), float(y), rx, ry, rw, rh)
    return model_view[hit][0] if hit >= 0 else None


def classify_stroke(points, model_view, config: RecognizerConfig | None = None) -> RecognitionResult:
    """Classify a resampled stroke; total, never raises on geometry.

    Rule order: (1) endpoints inside two distinct classes make a
    relationship line; (2) a closed path with a big enough bounding box makes
    a class shape; (3) everything else is an informal sketch.
    """
    config = config or RecognizerConfig()
    arr = _as_array(points)
    first = arr[0]
    last = arr[-1]
    source = topmost_class_at(first[0], first[1], model_view)
    target = topmost_class_at(last[0], last[1], model_view)
    if source is not None and target is not None and source != target:
        return RelationshipLine(source, target, [list(p) for p in arr[1:-1].tolist()])
    bbox = bounding_box(arr)
    gap = math.hypot(last[0] - first[0], last[1] - first[1])
    if gap <= config.closure_tolerance(math.hypot(bbox.w, bbox.h)):
        if bbox.w >= MIN_CLASS_SIZE and bbox.h >= MIN_CLASS_SIZE:
            return ClassShape(bbox)
    return InformalSketch()


@dataclass
class MaterializeResult:
    """Operation body derived from a recognition, ready to submit."""

    body: dict
    needs_kind_choice: bool = False


def materialize(result: RecognitionResult, stroke: Stroke, actor: str, now: int) -> MaterializeResult:
    """Turn a recognition result into the operation body it implies.

    Recognized relationship lines default to ``association`` and flag that
    the UI's kind/cardinality picker still owes the user a choice. Informal
    sketches keep the raw stroke verbatim.
    """
    if isinstance(result, ClassShape):
        return MaterializeResult(
            {"op": "create_class", "board": stroke.board, "bounds": result.bounds.to_list()}
        )
    if isinstance(result, RelationshipLine):
        return MaterializeResult(
            {
                "op": "create_relationship",
                "kind": "association",
                "source": result.source,
                "target": result.target,
                "source_card": "",
                "target_card": "",
                "label": "",
                "waypoints": result.waypoints,
            },
            needs_kind_choice=True,
        )
    return MaterializeResult(
        {
            "op": "add_stroke",
            "board": stroke.board,
            "points": [list(p) for p in stroke.points],
            "t_start": stroke.t_start,
            "t_end": stroke.t_end,
        }
    )


# -- synthetic corpus ---------------------------------------------------------


@dataclass
class LabeledStroke:
    label: str
    points: list[list[float]]

    def to_dict(self) -> dict:
        return {"label": self.label, "points": [list(p) for p in self.points]}


CORPUS_LABELS = ("class", "relationship", "informal")

# Fixed scene the corpus strokes are drawn against: disjoint classes with
# generous gaps so sigma=1 noise cannot move an endpoint across a boundary.
CORPUS_SCENE: list[tuple[str, Rect]] = [
    ("k1", Rect(40, 40, 160, 120)),
    ("k2", Rect(420, 60, 160, 120)),
    ("k3", Rect(780, 40, 170, 130)),
    ("k4", Rect(60, 420, 150, 140)),
    ("k5", Rect(440, 460, 170, 120)),
    ("k6", Rect(800, 430, 160, 140)),
]


def _rect_stroke(rng: np.random.Generator) -> list[list[float]]:
    x = rng.uniform(20, 700)
    y = rng.uniform(20, 450)
    w = rng.uniform(40, 240)
    h = rng.uniform(40, 200)
    corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h), (x, y)]
    points: list[list[float]] = []
    for (ax, ay), (bx, by) in zip(corners, corners[1:]):
        steps = 8
        for s in range(steps):
            t = s / steps
            points.append([ax + t * (bx - ax), ay + t * (by - ay)])
    points.append([x, y])
    return points


def _line_stroke(rng: np.random.Generator, scene) -> list[list[float]]:
    i, j = rng.choice(len(scene), size=2, replace=False)
    margin = 12.0
    (ax, ay), (bx, by) = [
        (
            rng.uniform(r.x + margin, r.x + r.w - margin),
            rng.uniform(r.y + margin, r.y + r.h - margin),
        )
        for _, r in (scene[i], scene[j])
    ]
    steps = 24
    return [
        [ax + s / steps * (bx - ax), ay + s / steps * (by - ay)]
        for s in range(steps + 1)
    ]


def _scribble_stroke(rng: np.random.Generator, scene) -> list[list[float]]:
    # Open zigzag in empty space: endpoints far apart, clear of every class.
    def clear(px, py):
        return all(
            not (r.x - 15 <= px <= r.x + r.w + 15 and r.y - 15 <= py <= r.y + r.h + 15)
            for _, r in scene
        )

    while True:
        x0 = rng.uniform(30, 900)
        y0 = rng.uniform(620, 720)
        x1 = x0 + rng.uniform(60, 90) * rng.choice([-1.0, 1.0])
        y1 = y0 + rng.uniform(-25, 25)
        if 0 < x1 < 1000 and clear(x0, y0) and clear(x1, y1):
            break
    steps = 20
    points = []
    for s in range(steps + 1):
        t = s / steps
        wiggle = 14.0 * math.sin(t * math.tau * 2)
        points.append([x0 + t * (x1 - x0), y0 + t * (y1 - y0) + wiggle])
    return points


def generate_corpus(
    per_label: int = 70, seed: int = 7, noise_sigma: float = 0.0
) -> list[LabeledStroke]:
    """Noiseless or Gaussian-jittered strokes over :data:`CORPUS_SCENE`."""
    rng = np.random.default_rng(seed)
    strokes = []
    for label in CORPUS_LABELS:
        for _ in range(per_label):
            if label == "class":
                points = _rect_stroke(rng)
            elif label == "relationship":
                points = _line_stroke(rng, CORPUS_SCENE)
            else:
                points = _scribble_stroke(rng, CORPUS_SCENE)
            if noise_sigma > 0:
                arr = np.asarray(points) + rng.normal(0.0, noise_sigma, (len(points), 2))
                points = arr.tolist()
            strokes.append(LabeledStroke(label, points))
    return strokes


def classify_label(points, scene=None, config: RecognizerConfig | None = None) -> str:
    resampled = resample_stroke(points, config)
    result = classify_stroke(resampled, CORPUS_SCENE if scene is None else scene, config)
    if isinstance(result, ClassShape):
        return "class"
    if isinstance(result, RelationshipLine):
        return "relationship"
    return "informal"


def corpus_accuracy(corpus, scene=None, config: RecognizerConfig | None = None) -> float:
    hits = sum(1 for s in corpus if classify_label(s.points, scene, config) == s.label)
    return hits / len(corpus)


def save_corpus(corpus, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for stroke in corpus:
            fh.write(json.dumps(stroke.to_dict()) + "\n")


def load_corpus(path) -> list[LabeledStroke]:
    corpus = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                corpus.append(LabeledStroke(d["label"], [list(p) for p in d["points"]]))
    return corpus
