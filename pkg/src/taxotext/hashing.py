"""Deterministic hashing helpers used for cache keys, fingerprints, and features."""

from __future__ import annotations

import hashlib
import json


def canonical_json(obj) -> str:
    """Serialize to a canonical JSON string (sorted keys, no whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(data: str | bytes) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def fingerprint(obj) -> str:
    """Stable hex fingerprint of any JSON-serializable object."""
    return sha256_hex(canonical_json(obj))


def token_hash64(token: str) -> int:
    """Stable 64-bit hash of a token; identical across runs and platforms."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")
