"""Command-line pipeline: acquire, build, train, predict, eval, sweep, ablate, baseline.

Every invocation works inside a run directory (runs/<run-id>/ by default)
holding the cache, corpora, model, predictions, and reports for one
experiment. A manifest is written before any artifact, and report files are
byte-identical across reruns with the same run id, seed, and cache.

Exit codes: 0 success, 2 configuration problems, 3 provider/network
failures, 4 data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .ablation import DEFAULT_KS, ablate_snippets, write_ablation_csv
from .acquire import SourceSpec, TextAcquirer, parse_source_signature
from .cache import TextCache
from .config import PipelineConfig, load_config, snapshot
from .corpus import build_instances, emit_chat_finetune, emit_tabular, load_tabular
from .errors import (
    AuthError,
    ConfigError,
    EmptyCompletion,
    HttpError,
    JobFailed,
    LengthMismatch,
    MalformedResponse,
    MissingText,
    TaxotextError,
)
from .hashing import fingerprint
from .http import RetryPolicy, TokenBucket
from .manifest import RunManifest, load_manifest, save_manifest
from .metrics import (
    confusion,
    load_report,
    macro_report,
    per_category_table,
    threshold_sweep,
    write_class_scores_csv,
    write_per_category_csv,
    write_report,
    write_sweep_csv,
)
from .remote import INVALID, INVALID_LABEL, prompt_baseline
from .search import SearchClient
from .softmax import Prediction, load_model, predict_instances, save_model, train
from .summarize import LlmClient
from .taxonomy import CategoryLabel, Dataset, Split, load_dataset, load_scheme, split_dataset
from .texts import Source

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NETWORK = 3
EXIT_DATA = 4

_NETWORK_ERRORS = (HttpError, AuthError, MalformedResponse, EmptyCompletion, JobFailed)


@dataclass
class RunContext:
    config: PipelineConfig
    run_id: str
    run_dir: Path
    cache: TextCache


# --- plumbing ---------------------------------------------------------------


def _generate_run_id() -> str:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
    return f"run-{stamp}-{uuid.uuid4().hex[:6]}"


def _parse_signature(ctx: RunContext, signature: str) -> SourceSpec:
    cfg = ctx.config
    try:
        return parse_source_signature(
            signature,
            cfg.task,
            top_k=cfg.top_k,
            gpt_model=cfg.gpt_model,
            llama_model=cfg.llama_model,
            summary_max_tokens=cfg.summary_max_tokens,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_split(raw: str) -> Split:
    try:
        return Split(raw.lower())
    except ValueError as exc:
        raise ConfigError(f"unknown split {raw!r}; expected train, dev, or test") from exc


def _load_split_dataset(ctx: RunContext, args) -> Dataset:
    path = getattr(args, "dataset", None) or ctx.config.dataset
    if not path:
        raise ConfigError("no dataset given; pass --dataset or set [task] dataset in the config")
    scheme = load_scheme(ctx.config.task)
    dataset = load_dataset(path, scheme)
    return split_dataset(dataset, ctx.config.ratios, seed=ctx.config.split_seed)


def _write_manifest(ctx: RunContext, command: str, options: dict, *, dataset: Dataset | None = None, signature: str | None = None):
    """Record the invocation before any artifact it produces exists."""
    manifest = load_manifest(ctx.run_dir)
    if manifest is None:
        manifest = RunManifest.new(ctx.run_id, snapshot(ctx.config))
    else:
        manifest.config = snapshot(ctx.config)
        manifest.config_fingerprint = fingerprint(manifest.config)
    if dataset is not None:
        manifest.dataset_fingerprint = dataset.fingerprint
    if signature is not None:
        manifest.note_signature(signature)
    manifest.record_command(command, options)
    save_manifest(manifest, ctx.run_dir)


def _tree_sources(spec: SourceSpec) -> set[Source]:
    found = {spec.source}
    for component in spec.components:
        found |= _tree_sources(component)
    return found


def _retry_policy(ctx: RunContext) -> RetryPolicy:
    return RetryPolicy(max_attempts=ctx.config.max_attempts, base_backoff=ctx.config.base_backoff)


def _rate_limit(ctx: RunContext) -> TokenBucket | None:
    rate = ctx.config.rate_per_second
    return TokenBucket(rate) if rate and rate > 0 else None


def _make_acquirer(ctx: RunContext, specs: list[SourceSpec]) -> TextAcquirer:
    sources = set()
    for spec in specs:
        sources |= _tree_sources(spec)
    cfg = ctx.config
    search_client = None
    llm_client = None
    if Source.GSNIP in sources:
        if not cfg.search_base_url:
            raise ConfigError("search_base_url is not configured")
        search_client = SearchClient(
            cfg.search_base_url, policy=_retry_policy(ctx), rate_limit=_rate_limit(ctx)
        )
    if sources & {Source.GPTSUM, Source.LLAMASUM}:
        if not cfg.llm_base_url:
            raise ConfigError("llm_base_url is not configured")
        llm_client = LlmClient(
            cfg.llm_base_url, policy=_retry_policy(ctx), rate_limit=_rate_limit(ctx)
        )
    return TextAcquirer(
        cfg.task,
        ctx.cache,
        search_client=search_client,
        llm_client=llm_client,
        max_parallel=cfg.max_parallel,
    )


def _cached_texts(ctx: RunContext, dataset: Dataset, spec: SourceSpec) -> dict:
    acquirer = TextAcquirer(ctx.config.task, ctx.cache)
    texts = {}
    for record in dataset.records:
        hit = acquirer.acquire_cached(record, spec)
        if hit is not None:
            texts[record.entity_id] = hit
    return texts


def write_predictions(predictions, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in predictions:
            row = {"entity_id": p.entity_id, "label": p.label.id, "confidence": p.confidence}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


def load_predictions(path: str | Path, scheme) -> list[Prediction]:
    by_id = scheme.by_id
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            label_id = row["label"]
            if label_id in by_id:
                label = by_id[label_id]
            elif label_id == INVALID:
                label = INVALID_LABEL
            else:
                label = CategoryLabel(label_id, label_id)
            out.append(
                Prediction(
                    entity_id=row["entity_id"], label=label, confidence=row.get("confidence")
                )
            )
    return out


def _aligned_golds(predictions, dataset: Dataset, split: Split):
    """Gold labels in prediction order; ids must match the split exactly."""
    by_id = {r.entity_id: r.label for r in dataset.by_split(split)}
    pred_ids = [p.entity_id for p in predictions]
    if set(pred_ids) != set(by_id) or len(pred_ids) != len(by_id):
        raise LengthMismatch(
            f"predictions cover {len(set(pred_ids))} entities, split {split.value} has {len(by_id)}"
        )
    return [by_id[i] for i in pred_ids]


def _corpus_path(ctx: RunContext, signature: str, split: Split) -> Path:
    return ctx.run_dir / "corpus" / signature / f"{split.value}.jsonl"


def _predictions_path(ctx: RunContext, signature: str, split: Split) -> Path:
    return ctx.run_dir / "predictions" / f"{signature}-{split.value}.jsonl"


# --- commands ---------------------------------------------------------------


def cmd_acquire(ctx: RunContext, args) -> int:
    dataset = _load_split_dataset(ctx, args)
    specs = [_parse_signature(ctx, s) for s in args.sources.split(",") if s.strip()]
    if not specs:
        raise ConfigError("no source signatures given")
    acquirer = _make_acquirer(ctx, specs)
    _write_manifest(
        ctx,
        "acquire",
        {"sources": [s.signature for s in specs], "refresh": bool(args.refresh)},
        dataset=dataset,
    )
    all_errors: dict[str, Exception] = {}
    for spec in specs:
        _, errors = acquirer.acquire_all(dataset.records, spec, refresh=args.refresh)
        all_errors.update(errors)
    stats = acquirer.stats
    print(
        f"acquired: fetched={stats['fetched']} cache_hits={stats['hits']} "
        f"refusals={stats['refusals']} failures={stats['failures']}"
    )
    if all_errors:
        for entity_id, exc in sorted(all_errors.items())[:5]:
            print(f"error: {entity_id}: {exc}", file=sys.stderr)
        first = next(iter(sorted(all_errors.items())))[1]
        return EXIT_NETWORK if isinstance(first, _NETWORK_ERRORS) else EXIT_DATA
    return EXIT_OK


def cmd_build(ctx: RunContext, args) -> int:
    dataset = _load_split_dataset(ctx, args)
    spec = _parse_signature(ctx, args.sources)
    signature = spec.signature
    scheme = dataset.scheme
    texts = _cached_texts(ctx, dataset, spec)
    _write_manifest(
        ctx,
        "build",
        {"sources": signature, "strict": bool(args.strict)},
        dataset=dataset,
        signature=signature,
    )
    for split in Split:
        records = dataset.by_split(split)
        result = build_instances(records, texts, signature, strict=args.strict)
        tab_path = emit_tabular(result.instances, _corpus_path(ctx, signature, split))
        chat_path = emit_chat_finetune(
            result.instances,
            scheme,
            ctx.run_dir / "finetune" / signature / f"{split.value}.jsonl",
            with_labels=split is not Split.TEST,
        )
        print(
            f"built {split.value}: {len(result.instances)} instances "
            f"({result.empty_count} empty) -> {tab_path} and {chat_path}"
        )
    return EXIT_OK


def cmd_train(ctx: RunContext, args) -> int:
    spec = _parse_signature(ctx, args.sources)
    signature = spec.signature
    scheme = load_scheme(ctx.config.task)
    corpus_path = Path(args.corpus) if args.corpus else _corpus_path(ctx, signature, Split.TRAIN)
    if not corpus_path.exists():
        raise ConfigError(f"training corpus not found: {corpus_path}; run 'build' first")
    instances = load_tabular(corpus_path, scheme)
    _write_manifest(
        ctx, "train", {"sources": signature, "corpus": str(corpus_path)}, signature=signature
    )
    model = train(instances, scheme, ctx.config.training)
    model_path = save_model(model, ctx.run_dir / "model" / f"{signature}.model")
    print(f"trained on {len(instances)} instances -> {model_path}")
    return EXIT_OK


def cmd_predict(ctx: RunContext, args) -> int:
    spec = _parse_signature(ctx, args.sources)
    signature = spec.signature
    split = _parse_split(args.split)
    scheme = load_scheme(ctx.config.task)
    corpus_path = Path(args.corpus) if args.corpus else _corpus_path(ctx, signature, split)
    if not corpus_path.exists():
        raise ConfigError(f"corpus not found: {corpus_path}; run 'build' first")
    model_path = Path(args.model) if args.model else ctx.run_dir / "model" / f"{signature}.model"
    if not model_path.exists():
        raise ConfigError(f"model not found: {model_path}; run 'train' first")
    instances = load_tabular(corpus_path, scheme)
    model = load_model(model_path, scheme)
    _write_manifest(
        ctx,
        "predict",
        {"sources": signature, "split": split.value, "model": str(model_path)},
        signature=signature,
    )
    predictions = predict_instances(
        model, instances, batch_size=ctx.config.training.eval_batch_size
    )
    out_path = write_predictions(predictions, _predictions_path(ctx, signature, split))
    print(f"predicted {len(predictions)} instances -> {out_path}")
    return EXIT_OK


def cmd_eval(ctx: RunContext, args) -> int:
    dataset = _load_split_dataset(ctx, args)
    spec = _parse_signature(ctx, args.sources)
    signature = spec.signature
    split = _parse_split(args.split)
    scheme = dataset.scheme
    pred_path = (
        Path(args.predictions) if args.predictions else _predictions_path(ctx, signature, split)
    )
    if not pred_path.exists():
        raise ConfigError(f"predictions not found: {pred_path}; run 'predict' first")
    predictions = load_predictions(pred_path, scheme)
    golds = _aligned_golds(predictions, dataset, split)
    _write_manifest(
        ctx,
        "eval",
        {"sources": signature, "split": split.value, "predictions": str(pred_path)},
        dataset=dataset,
        signature=signature,
    )
    matrix = confusion(golds, [p.label for p in predictions], scheme)
    report = macro_report(
        matrix,
        config_fingerprint=fingerprint(snapshot(ctx.config)),
        run_id=ctx.run_id,
    )
    reports_dir = ctx.run_dir / "reports"
    report_path = write_report(report, reports_dir / f"{signature}-{split.value}-eval.json")
    write_class_scores_csv(report, reports_dir / f"{signature}-{split.value}-class_scores.csv")
    print(
        f"macro_p={report.macro_p:.4f} macro_r={report.macro_r:.4f} "
        f"macro_f1={report.macro_f1:.4f} -> {report_path}"
    )
    if args.compare:
        other = load_report(args.compare, scheme)
        rows = per_category_table(other, report)
        cmp_path = write_per_category_csv(
            rows, reports_dir / f"{signature}-{split.value}-compare.csv"
        )
        print(f"per-category comparison -> {cmp_path}")
    return EXIT_OK


def cmd_sweep(ctx: RunContext, args) -> int:
    dataset = _load_split_dataset(ctx, args)
    spec = _parse_signature(ctx, args.sources)
    signature = spec.signature
    split = _parse_split(args.split)
    pred_path = (
        Path(args.predictions) if args.predictions else _predictions_path(ctx, signature, split)
    )
    if not pred_path.exists():
        raise ConfigError(f"predictions not found: {pred_path}; run 'predict' first")
    predictions = load_predictions(pred_path, dataset.scheme)
    golds = _aligned_golds(predictions, dataset, split)
    thresholds = ctx.config.thresholds
    if args.thresholds:
        try:
            thresholds = tuple(float(part) for part in args.thresholds.split(",") if part.strip())
        except ValueError as exc:
            raise ConfigError(f"bad threshold list: {args.thresholds!r}") from exc
    inclusive = bool(args.inclusive) or ctx.config.inclusive_thresholds
    _write_manifest(
        ctx,
        "sweep",
        {
            "sources": signature,
            "split": split.value,
            "thresholds": list(thresholds),
            "inclusive": inclusive,
        },
        dataset=dataset,
        signature=signature,
    )
    points = threshold_sweep(
        predictions, golds, dataset.scheme, thresholds, inclusive=inclusive
    )
    out_path = write_sweep_csv(
        points, ctx.run_dir / "reports" / f"{signature}-{split.value}-sweep.csv"
    )
    for p in points:
        print(
            f"t={p.threshold:.2f} precision={p.precision:.4f} recall={p.recall:.4f} "
            f"coverage={p.coverage:.4f} n={p.n_labeled}"
        )
    print(f"sweep -> {out_path}")
    return EXIT_OK


def cmd_ablate(ctx: RunContext, args) -> int:
    dataset = _load_split_dataset(ctx, args)
    if args.ks:
        try:
            ks = tuple(int(part) for part in args.ks.split(",") if part.strip())
        except ValueError as exc:
            raise ConfigError(f"bad k list: {args.ks!r}") from exc
    else:
        ks = DEFAULT_KS
    cached_depth = args.cached_depth if args.cached_depth else ctx.config.top_k
    _write_manifest(
        ctx, "ablate", {"ks": list(ks), "cached_depth": cached_depth}, dataset=dataset
    )
    points = ablate_snippets(
        dataset, ctx.cache, ks, cached_depth=cached_depth, train_config=ctx.config.training
    )
    out_path = write_ablation_csv(points, ctx.run_dir / "reports" / "ablation.csv")
    for point in points:
        r = point.report
        print(f"k={point.k} macro_p={r.macro_p:.4f} macro_r={r.macro_r:.4f} macro_f1={r.macro_f1:.4f}")
    print(f"ablation -> {out_path}")
    return EXIT_OK


def cmd_baseline(ctx: RunContext, args) -> int:
    dataset = _load_split_dataset(ctx, args)
    split = _parse_split(args.split)
    if not ctx.config.llm_base_url:
        raise ConfigError("llm_base_url is not configured")
    records = dataset.by_split(split)
    contexts = None
    if args.context_sources:
        spec = _parse_signature(ctx, args.context_sources)
        texts = _cached_texts(ctx, dataset, spec)
        missing = [r.entity_id for r in records if r.entity_id not in texts]
        if missing and args.strict:
            raise MissingText(f"no cached text for {len(missing)} entities (first: {missing[0]})")
        contexts = {
            r.entity_id: texts[r.entity_id].text
            for r in records
            if r.entity_id in texts and texts[r.entity_id].text
        }
    model_id = args.model or ctx.config.gpt_model
    _write_manifest(
        ctx,
        "baseline",
        {
            "split": split.value,
            "model": model_id,
            "context_sources": args.context_sources,
        },
        dataset=dataset,
    )
    client = LlmClient(
        ctx.config.llm_base_url, policy=_retry_policy(ctx), rate_limit=_rate_limit(ctx)
    )
    predictions = prompt_baseline(
        records, dataset.scheme, client, model_id=model_id, contexts=contexts
    )
    out_path = write_predictions(
        predictions, ctx.run_dir / "predictions" / f"baseline-{split.value}.jsonl"
    )
    invalid = sum(1 for p in predictions if p.label.id == INVALID)
    print(f"baseline predicted {len(predictions)} entities ({invalid} unparseable) -> {out_path}")
    return EXIT_OK


_COMMANDS = {
    "acquire": cmd_acquire,
    "build": cmd_build,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "ablate": cmd_ablate,
    "baseline": cmd_baseline,
}


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxotext",
        description="Classify entities into industry and provider taxonomies from web text.",
    )
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--run-id", help="run directory name; generated when omitted")
    parser.add_argument("--runs-dir", default="runs", help="parent directory for runs")
    parser.add_argument("--refresh", action="store_true", help="re-fetch even on cache hits")
    parser.add_argument("--strict", action="store_true", help="fail on missing texts")
    parser.add_argument("--seed", type=int, default=None, help="override split and training seeds")

    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--dataset", help="entity CSV (overrides the config)")
        return p

    p = add("acquire", "fetch entity texts into the cache")
    p.add_argument("--sources", default="gsnip", help="comma-separated source signatures")

    p = add("build", "emit corpus files from cached texts")
    p.add_argument("--sources", default="gsnip", help="source signature (use + to combine)")

    p = add("train", "fit the hashed-feature softmax classifier")
    p.add_argument("--sources", default="gsnip")
    p.add_argument("--corpus", help="explicit training corpus path")

    p = add("predict", "classify a corpus split with a trained model")
    p.add_argument("--sources", default="gsnip")
    p.add_argument("--split", default="test")
    p.add_argument("--corpus", help="explicit corpus path")
    p.add_argument("--model", help="explicit model path")

    p = add("eval", "score predictions against gold labels")
    p.add_argument("--sources", default="gsnip")
    p.add_argument("--split", default="test")
    p.add_argument("--predictions", help="explicit predictions path")
    p.add_argument("--compare", help="earlier report JSON to diff per-category F1 against")

    p = add("sweep", "precision/coverage tradeoff across confidence thresholds")
    p.add_argument("--sources", default="gsnip")
    p.add_argument("--split", default="test")
    p.add_argument("--predictions", help="explicit predictions path")
    p.add_argument("--thresholds", help="comma-separated thresholds")
    p.add_argument("--inclusive", action="store_true", help="keep predictions at the threshold")

    p = add("ablate", "retrain and score at several snippet depths")
    p.add_argument("--ks", help="comma-separated snippet counts")
    p.add_argument("--cached-depth", type=int, default=None, help="depth the cache was filled at")

    p = add("baseline", "zero-shot classification by prompting a hosted model")
    p.add_argument("--split", default="test")
    p.add_argument("--model", help="hosted model id")
    p.add_argument(
        "--context-sources", help="signature of cached texts to include in the prompt"
    )

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = replace(
                config,
                split_seed=args.seed,
                training=replace(config.training, seed=args.seed),
            )
        run_id = args.run_id or _generate_run_id()
        run_dir = Path(args.runs_dir) / run_id
        cache_root = Path(config.cache_dir) if config.cache_dir else run_dir / "cache"
        ctx = RunContext(config=config, run_id=run_id, run_dir=run_dir, cache=TextCache(cache_root))
        return _COMMANDS[args.command](ctx, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NETWORK_ERRORS as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except TaxotextError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
