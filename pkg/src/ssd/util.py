"""Small shared helpers: canonical JSON, hashing, seeded RNG streams, tables."""

from __future__ import annotations

import hashlib
import json
from typing import Any, Iterable, Sequence

import numpy as np


def canonical_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, no whitespace drift."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def sha256_hex(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def fingerprint(obj: Any) -> str:
    """Stable hex digest of a JSON-serializable object."""
    return sha256_hex(canonical_json(obj))


def _entropy(part: int | str) -> int:
    if isinstance(part, str):
        return int.from_bytes(hashlib.sha256(part.encode("utf-8")).digest()[:8], "big")
    return int(part) & 0xFFFFFFFFFFFFFFFF


def derive_rng(seed: int, *path: int | str) -> np.random.Generator:
    """Independent RNG stream for (seed, unit path), schedule-invariant.

    Every seeded component (fold, one-vs-rest class, forest tree, ...) draws
    from its own stream so concurrent execution cannot reorder randomness.
    """
    entropy = [_entropy(seed)] + [_entropy(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *path: int | str) -> int:
    """Scalar seed for a (seed, unit path) pair, for APIs that take an int."""
    return int(derive_rng(seed, *path).integers(0, 2**63))


def format_table(headers: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    """Aligned plain-text table with a header separator line."""
    materialized = [list(map(str, headers))] + [list(map(str, r)) for r in rows]
    widths = [max(len(row[i]) for row in materialized) for i in range(len(headers))]
    lines = []
    for n, row in enumerate(materialized):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def format_markdown_table(headers: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    body = ["| " + " | ".join(map(str, headers)) + " |",
            "|" + "|".join("---" for _ in headers) + "|"]
    for row in rows:
        body.append("| " + " | ".join(map(str, row)) + " |")
    return "\n".join(body)
