"""Per-user colored authorship traces that fade to black.

Each collaborator holds a unique palette color; an element's border shows its
last editor's color, linearly interpolated to black over ``FADE_DURATION_MS``.
Fading is evaluated lazily from timestamps, so replicas never diverge from
timer callbacks.
"""

from __future__ import annotations

import colorsys

from .errors import PaletteExhausted
from .model import ClassElement, HistoryEntry, ModelDocument

FADE_DURATION_MS = 300_000
PALETTE_SIZE = 16

BLACK = (0, 0, 0)


def _build_palette() -> list[tuple[int, int, int]]:
    colors = []
    for k in range(PALETTE_SIZE):
        r, g, b = colorsys.hsv_to_rgb(k / PALETTE_SIZE, 0.85, 1.0)
        colors.append((int(round(r * 255)), int(round(g * 255)), int(round(b * 255))))
    return colors


#: 16 evenly spaced hues; index = join order. Black is reserved for "faded".
DEFAULT_PALETTE: list[tuple[int, int, int]] = _build_palette()


def parse_palette(spec: str) -> list[tuple[int, int, int]]:
    """Parse a comma-separated list of hex colors (``#rrggbb`` or ``rrggbb``)."""
    colors = []
    for token in spec.split(","):
        token = token.strip().lstrip("#")
        if len(token) != 6:
            raise ValueError(f"bad hex color {token!r}")
        rgb = (int(token[0:2], 16), int(token[2:4], 16), int(token[4:6], 16))
        if rgb == BLACK:
            raise ValueError("black is reserved for faded elements")
        colors.append(rgb)
    if not colors:
        raise ValueError("empty palette")
    return colors


class ColorAssigner:
    """Hands out palette colors in join order, injectively."""

    def __init__(self, palette: list[tuple[int, int, int]] | None = None):
        self.palette = list(palette or DEFAULT_PALETTE)
        self.assigned: dict[str, tuple[int, int, int]] = {}

    def assign(self, actor: str) -> tuple[int, int, int]:
        if actor in self.assigned:
            return self.assigned[actor]
        index = len(self.assigned)
        if index >= len(self.palette):
            raise PaletteExhausted(f"palette holds {len(self.palette)} actors")
        color = self.palette[index]
        self.assigned[actor] = color
        return color


def fade(color: tuple[int, int, int], elapsed_ms: float, duration_ms: float = FADE_DURATION_MS) -> tuple[int, int, int]:
    """Interpolate ``color`` toward black; fully black from ``duration_ms`` on.

    Channels round half-up so the fade is monotone non-increasing per channel.
    """
    u = elapsed_ms / duration_ms
    if u <= 0:
        return color
    if u >= 1:
        return BLACK
    keep = 1.0 - u
    return tuple(int(c * keep + 0.5) for c in color)


def trace_color(
    element: ClassElement,
    now: int,
    colors: dict[str, tuple[int, int, int]],
    duration_ms: float = FADE_DURATION_MS,
) -> tuple[int, int, int]:
    """Border color of an element at time ``now``; never-edited renders black."""
    if element.last_editor is None or element.last_edit_time is None:
        return BLACK
    base = colors.get(element.last_editor)
    if base is None:
        return BLACK
    return fade(base, now - element.last_edit_time, duration_ms)


def history_query(
    doc: ModelDocument,
    actor: str | None = None,
    element_id: str | None = None,
    t_min: int | None = None,
    t_max: int | None = None,
) -> list[HistoryEntry]:
    """Filtered history entries in timestamp order (stable for ties)."""
    entries = [
        h
        for h in doc.history
        if (actor is None or h.actor == actor)
        and (element_id is None or h.element_id == element_id)
        and (t_min is None or h.timestamp >= t_min)
        and (t_max is None or h.timestamp <= t_max)
    ]
    return sorted(entries, key=lambda h: h.timestamp)
