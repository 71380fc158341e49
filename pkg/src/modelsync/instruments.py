"""Evaluation instruments: SUS, raw NASA TLX, and session statistics."""

from __future__ import annotations

import statistics

from .errors import EmptyInput, OutOfRange, WrongLength


def sus_score(answers) -> float:
    """System Usability Scale: ten 1..5 answers scored to 0..100.

    Odd items (1-based) contribute ``answer - 1``, even items ``5 - answer``;
    the sum is scaled by 2.5.
    """
    answers = list(answers)
    if len(answers) != 10:
        raise WrongLength(f"SUS takes 10 answers, got {len(answers)}")
    total = 0
    for position, answer in enumerate(answers, start=1):
        if not 1 <= answer <= 5:
            raise OutOfRange(f"answer {answer} at item {position} not in 1..5")
        total += (answer - 1) if position % 2 == 1 else (5 - answer)
    return total * 2.5


def tlx_raw(subscales) -> float:
    """Raw (unweighted) NASA TLX: mean of six 0..100 subscale ratings."""
    values = list(subscales)
    if len(values) != 6:
        raise WrongLength(f"TLX takes 6 subscales, got {len(values)}")
    for value in values:
        if not 0 <= value <= 100:
            raise OutOfRange(f"subscale {value} not in 0..100")
    return sum(values) / 6


def session_stats(reports: list[dict]) -> dict:
    """Mean/median task duration and mean syntactic errors over run reports.

    Each report needs ``duration_ms`` and ``syntactic_errors``.
    """
    if not reports:
        raise EmptyInput("no reports")
    durations = [r["duration_ms"] for r in reports]
    errors = [r["syntactic_errors"] for r in reports]
    return {
        "mean_duration_ms": sum(durations) / len(durations),
        "median_duration_ms": statistics.median(durations),
        "mean_errors": sum(errors) / len(errors),
    }
