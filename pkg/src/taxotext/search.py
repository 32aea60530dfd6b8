"""Search-engine snippet acquisition and aggregation."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError, MalformedResponse
from .http import RetryPolicy, TokenBucket, request_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchResult:
    rank: int
    title: str
    url: str
    snippet: str


class SearchClient:
    """Client for a JSON search endpoint returning ``organic_results``."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        *,
        policy: RetryPolicy = RetryPolicy(),
        rate_limit: TokenBucket | None = None,
        session=None,
        sleep=time.sleep,
    ):
        key = api_key if api_key is not None else os.environ.get("SEARCH_API_KEY")
        if not key:
            raise ConfigError("SEARCH_API_KEY is not set and no api_key was given")
        self.base_url = base_url
        self._key = key
        self._policy = policy
        self._rate_limit = rate_limit
        self._session = session
        self._sleep = sleep

    def search_entity(self, name: str, k: int) -> list[SearchResult]:
        """Fetch the top-k organic results for an entity name."""
        if not name:
            raise ValueError("entity name must be non-empty")
        if k < 1:
            raise ValueError("k must be >= 1")
        if self._rate_limit is not None:
            self._rate_limit.acquire()
        payload = request_json(
            "GET",
            self.base_url,
            params={"q": name, "num": k, "api_key": self._key},
            policy=self._policy,
            session=self._session,
            sleep=self._sleep,
        )
        organic = payload.get("organic_results")
        if not isinstance(organic, list):
            raise MalformedResponse(f"{self.base_url}: missing organic_results array")
        results = []
        for i, item in enumerate(organic[:k]):
            if not isinstance(item, dict):
                raise MalformedResponse(f"{self.base_url}: organic_results[{i}] is not an object")
            results.append(
                SearchResult(
                    rank=i + 1,
                    title=str(item.get("title", "")),
                    url=str(item.get("link", "")),
                    snippet=str(item.get("snippet", "")),
                )
            )
        return results


def aggregate_snippets(results: Sequence[SearchResult], k: int) -> str:
    """Join the snippets of the first k results into one text block.

    Empty snippets are dropped so the output never carries doubled spaces;
    output is trimmed. Deterministic in the result order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    snippets = [r.snippet.strip() for r in results[:k]]
    return " ".join(s for s in snippets if s)
