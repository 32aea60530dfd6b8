"""Provider-hosted backends: zero/with-context prompting and chat fine-tunes."""

from __future__ import annotations

import logging
import os
import re
import time
from pathlib import Path
from typing import Sequence

from .corpus import ClassificationInstance, chat_messages
from .errors import ConfigError, JobFailed, MalformedResponse
from .http import RetryPolicy, request_json
from .softmax import Prediction
from .summarize import LlmClient
from .taxonomy import CategoryLabel, EntityRecord, TaskId, TaxonomyScheme

logger = logging.getLogger(__name__)

INVALID = "__invalid__"
INVALID_LABEL = CategoryLabel(id=INVALID, display_name="unparseable response")

# Tokens are alphanumeric runs, optionally hyphen-joined; a hyphen never
# starts or ends a token, so "20-" still yields "20" but "2024" stays whole.
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:-[A-Za-z0-9]+)*")

_CLASSIFY_TEMPLATE = (
    "You are a classification assistant for [TASK_NAME]. Given the "
    "[ENTITY_NAME] below, predict the [CODE_TYPE] that best represents its "
    "[CATEGORY_DESCRIPTION]. Choose ONLY one code from the provided options: "
    "[CODE_LIST]. Return ONLY the code. Do not include explanations or extra "
    "text."
)

_TASK_FILLS = {
    TaskId.SIC: {
        "[TASK_NAME]": "SIC code classification",
        "[ENTITY_NAME]": "organization name",
        "[CODE_TYPE]": "two-digit SIC code",
        "[CATEGORY_DESCRIPTION]": "primary business activities",
    },
    TaskId.HEALTHCARE: {
        "[TASK_NAME]": "healthcare provider taxonomy code classification",
        "[ENTITY_NAME]": "provider name",
        "[CODE_TYPE]": "healthcare provider taxonomy category",
        "[CATEGORY_DESCRIPTION]": "medical specialty and area of practice",
    },
}


def parse_code_response(
    text: str, valid_ids: Sequence[str], scheme: TaxonomyScheme | None = None
) -> str:
    """Extract a category id from a completion, or INVALID.

    Tries an exact trimmed match, then scans left to right for the first
    maximal token that is a valid id. For healthcare, a ten-character raw
    taxonomy code also counts when the scheme maps it to a valid category.
    Never returns anything outside valid_ids plus INVALID.
    """
    valid = set(valid_ids)
    trimmed = text.strip()
    if trimmed in valid:
        return trimmed
    map_codes = scheme is not None and scheme.task_id is TaskId.HEALTHCARE
    for token in _TOKEN_RE.findall(text):
        if token in valid:
            return token
        if map_codes and len(token) == 10 and token.isalnum():
            label = scheme.code_map.get(token)
            if label is not None and label.id in valid:
                return label.id
    return INVALID


def build_classify_prompt(scheme: TaxonomyScheme, name: str, context: str | None = None) -> str:
    """Assemble the single-shot classification prompt for one entity."""
    prompt = _CLASSIFY_TEMPLATE
    for placeholder, value in _TASK_FILLS[scheme.task_id].items():
        prompt = prompt.replace(placeholder, value)
    prompt = prompt.replace("[CODE_LIST]", ", ".join(scheme.ids))
    body = f"{prompt}\n\n{name}"
    if context:
        body += f"\n\n{context}"
    return body


def prompt_baseline(
    records: Sequence[EntityRecord],
    scheme: TaxonomyScheme,
    client: LlmClient,
    *,
    model_id: str,
    contexts: dict[str, str] | None = None,
    max_tokens: int = 16,
) -> list[Prediction]:
    """Classify records by prompting a hosted model directly.

    Unparseable completions predict the reserved invalid label, which
    evaluation always counts as wrong. Remote predictions carry no
    confidence, so threshold sweeps reject them.
    """
    predictions: list[Prediction] = []
    by_id = scheme.by_id
    for record in sorted(records, key=lambda r: r.entity_id):
        context = contexts.get(record.entity_id) if contexts else None
        prompt = build_classify_prompt(scheme, record.name, context)
        completion = client.complete(prompt, model=model_id, max_tokens=max_tokens)
        parsed = parse_code_response(completion, scheme.ids, scheme)
        label = by_id.get(parsed, INVALID_LABEL)
        predictions.append(
            Prediction(entity_id=record.entity_id, label=label, confidence=None)
        )
    return predictions


class FineTuneClient:
    """Adapter for a provider's file-upload and fine-tune job endpoints."""

    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        *,
        policy: RetryPolicy = RetryPolicy(),
        session=None,
        sleep=time.sleep,
    ):
        key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        if not key:
            raise ConfigError("LLM_API_KEY is not set and no api_key was given")
        self.base_url = base_url.rstrip("/")
        self._key = key
        self._policy = policy
        self._session = session
        self._sleep = sleep

    def _headers(self) -> dict:
        return {"Authorization": f"Bearer {self._key}"}

    def upload_file(self, path: str | Path) -> str:
        with open(path, "rb") as fh:
            payload = request_json(
                "POST",
                f"{self.base_url}/files",
                headers=self._headers(),
                data={"purpose": "fine-tune"},
                files={"file": (Path(path).name, fh)},
                policy=self._policy,
                session=self._session,
                sleep=self._sleep,
            )
        file_id = payload.get("id")
        if not isinstance(file_id, str):
            raise MalformedResponse(f"{self.base_url}/files: response missing id")
        return file_id

    def submit(
        self,
        train_path: str | Path,
        *,
        model_id: str,
        dev_path: str | Path | None = None,
    ) -> str:
        """Upload corpus files and create a fine-tune job; returns the job id."""
        body: dict = {"model": model_id, "training_file": self.upload_file(train_path)}
        if dev_path is not None:
            body["validation_file"] = self.upload_file(dev_path)
        payload = request_json(
            "POST",
            f"{self.base_url}/fine_tuning/jobs",
            headers=self._headers(),
            json=body,
            policy=self._policy,
            session=self._session,
            sleep=self._sleep,
        )
        job_id = payload.get("id")
        if not isinstance(job_id, str):
            raise MalformedResponse(f"{self.base_url}/fine_tuning/jobs: response missing id")
        return job_id

    def status(self, job_id: str) -> dict:
        return request_json(
            "GET",
            f"{self.base_url}/fine_tuning/jobs/{job_id}",
            headers=self._headers(),
            policy=self._policy,
            session=self._session,
            sleep=self._sleep,
        )

    def wait(self, job_id: str, *, poll_seconds: float = 5.0, max_polls: int = 720) -> str:
        """Poll until the job succeeds; returns the fine-tuned model id."""
        for _ in range(max_polls):
            payload = self.status(job_id)
            state = payload.get("status")
            if state == "succeeded":
                model = payload.get("fine_tuned_model")
                if not isinstance(model, str):
                    raise MalformedResponse("job succeeded without a fine_tuned_model")
                return model
            if state in ("failed", "cancelled"):
                raise JobFailed(f"fine-tune job {job_id} ended as {state}", provider_status=state)
            self._sleep(poll_seconds)
        raise JobFailed(f"fine-tune job {job_id} did not finish", provider_status="timeout")


def remote_infer(
    instances: Sequence[ClassificationInstance],
    scheme: TaxonomyScheme,
    client: LlmClient,
    *,
    model_id: str,
    max_tokens: int = 16,
) -> list[Prediction]:
    """Run inference-form chat requests against a fine-tuned model."""
    by_id = scheme.by_id
    predictions = []
    for inst in instances:
        messages = chat_messages(inst, scheme, with_labels=False)
        completion = client.chat(messages, model=model_id, max_tokens=max_tokens)
        parsed = parse_code_response(completion, scheme.ids, scheme)
        predictions.append(
            Prediction(entity_id=inst.entity_id, label=by_id.get(parsed, INVALID_LABEL), confidence=None)
        )
    return predictions
