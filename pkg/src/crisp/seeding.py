"""Stable seed derivation.

Python's builtin hash() is salted per process, so anything feeding a seeded
RNG stream goes through a digest instead. Per-question streams are derived as
stable_seed(run_seed, question_id), which is what makes question-level
parallelism output-invariant.
"""

from __future__ import annotations

import hashlib


def stable_seed(*parts) -> int:
    """Derive a 64-bit seed from the given parts, stable across processes."""
    payload = "\x1f".join(str(p) for p in parts).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")
