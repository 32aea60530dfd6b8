"""Hashed bag-of-ngrams featurization of instance text."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .hashing import fingerprint, token_hash64

N_BUCKETS = 1 << 18

# Unicode alphanumeric runs; underscore separates tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

FEATURIZER_CONFIG = {
    "buckets": N_BUCKETS,
    "ngrams": [1, 2],
    "hash": "blake2b-64",
    "lowercase": True,
    "norm": "l2",
}
FEATURIZER_HASH = fingerprint(FEATURIZER_CONFIG)


@dataclass(eq=False)
class FeatureVector:
    """Sparse unit-norm vector: strictly increasing indices, positive values."""

    indices: np.ndarray
    values: np.ndarray

    @property
    def nnz(self) -> int:
        return int(self.indices.size)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def featurize(text: str) -> FeatureVector:
    """Hash unigrams and adjacent bigrams into 2^18 buckets, L2-normalized.

    Colliding ngrams accumulate into the same bucket. Empty or
    punctuation-only text yields an empty vector.
    """
    tokens = tokenize(text)
    counts: dict[int, float] = {}
    for tok in tokens:
        bucket = token_hash64(tok) % N_BUCKETS
        counts[bucket] = counts.get(bucket, 0.0) + 1.0
    for left, right in zip(tokens, tokens[1:]):
        bucket = token_hash64(f"{left} {right}") % N_BUCKETS
        counts[bucket] = counts.get(bucket, 0.0) + 1.0
    if not counts:
        return FeatureVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    values /= np.linalg.norm(values)
    return FeatureVector(indices, values)
