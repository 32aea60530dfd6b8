"""Snippet-depth ablation: retrain the native backend at several depths.

Re-aggregates snippet text from cached search provenance (no re-fetch),
rebuilds the corpus, trains, and evaluates on the test split for each k.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .acquire import SourceSpec, TextAcquirer
from .cache import TextCache
from .corpus import build_instances
from .errors import InsufficientSnippets, MissingText
from .metrics import MacroReport, confusion, macro_report
from .search import SearchResult, aggregate_snippets
from .softmax import TrainConfig, predict_instances, train
from .taxonomy import Dataset, Split
from .texts import AcquiredText, Source

logger = logging.getLogger(__name__)

DEFAULT_KS = (1, 5, 10, 15, 20)


@dataclass(frozen=True)
class AblationPoint:
    k: int
    report: MacroReport


def _cached_results(cache: TextCache, dataset: Dataset, depth: int) -> dict[str, AcquiredText]:
    spec = SourceSpec(Source.GSNIP, {"k": depth})
    acquirer = TextAcquirer(dataset.scheme.task_id, cache)
    texts = {}
    for record in dataset.records:
        if record.split not in (Split.TRAIN, Split.TEST):
            continue
        entry = acquirer.acquire_cached(record, spec)
        if entry is None:
            raise InsufficientSnippets(
                f"no cached snippets at depth {depth} for entity {record.entity_id!r}"
            )
        texts[record.entity_id] = entry
    return texts


def ablate_snippets(
    dataset: Dataset,
    cache: TextCache,
    ks: Sequence[int] = DEFAULT_KS,
    *,
    cached_depth: int,
    train_config: TrainConfig | None = None,
) -> list[AblationPoint]:
    """Evaluate test macro scores while varying the snippet count.

    cached_depth is the k the cache was populated at; it must cover
    max(ks). Points come back in ascending k.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks:
        raise ValueError("ks must be non-empty")
    if ks[0] < 1:
        raise ValueError("ks must be positive")
    if max(ks) > cached_depth:
        raise InsufficientSnippets(
            f"cache holds snippets at depth {cached_depth}, but k={max(ks)} was requested"
        )
    full = _cached_results(cache, dataset, cached_depth)

    train_records = dataset.by_split(Split.TRAIN)
    test_records = sorted(dataset.by_split(Split.TEST), key=lambda r: r.entity_id)
    points = []
    for k in ks:
        texts = {}
        for entity_id, entry in full.items():
            results = [
                SearchResult(p["rank"], p["title"], p["url"], p["snippet"])
                for p in entry.provenance
            ]
            texts[entity_id] = AcquiredText(
                entity_id=entity_id,
                source=Source.GSNIP,
                params={"k": k},
                text=aggregate_snippets(results, k),
                retrieved_at=entry.retrieved_at,
                provenance=entry.provenance[:k],
            )
        signature = f"gsnip{k}"
        train_build = build_instances(train_records, texts, signature)
        test_build = build_instances(test_records, texts, signature)
        model = train(train_build.instances, dataset.scheme, train_config)
        preds = predict_instances(model, test_build.instances)
        matrix = confusion([r.label for r in test_records], [p.label for p in preds], dataset.scheme)
        points.append(AblationPoint(k=k, report=macro_report(matrix)))
        logger.info("ablation k=%d: macro F1 %.3f", k, points[-1].report.macro_f1)
    return points


def write_ablation_csv(points: Sequence[AblationPoint], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,macro_p,macro_r,macro_f1\n")
        for point in points:
            r = point.report
            fh.write(f"{point.k},{r.macro_p!r},{r.macro_r!r},{r.macro_f1!r}\n")
    return path
