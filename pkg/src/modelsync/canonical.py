"""Canonical JSON serialization and document digests.

Replicas prove convergence by comparing SHA-256 digests of their documents,
and the browser client recomputes the same digest in TypeScript, so the text
form has to be reproducible across languages:

- object keys sorted, separators ``,`` and ``:``, no whitespace
- floats with an integral value serialize as integers (``1.0`` -> ``1``),
  everything else uses the shortest round-trip decimal form, which Python's
  ``repr`` and JavaScript's ``Number#toString`` agree on for the magnitudes
  that occur in documents
- NaN / infinity are rejected
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any


def _canonize(value: Any) -> Any:
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            raise ValueError("non-finite number in canonical document")
        if value.is_integer():
            return int(value)
        return value
    if isinstance(value, dict):
        return {str(k): _canonize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonize(v) for v in value]
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    raise TypeError(f"unsupported type in canonical document: {type(value).__name__}")


def canonical_json(value: Any) -> str:
    """Serialize ``value`` to the canonical text form."""
    return json.dumps(_canonize(value), sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(value: Any) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()
