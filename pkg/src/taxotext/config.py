"""INI-file configuration for the pipeline.

Sections: [task], [acquisition], [training], [eval]. Every key has a
default, so an empty (or absent) file yields a usable configuration;
unknown sections or keys are rejected rather than silently ignored.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .metrics import DEFAULT_THRESHOLDS
from .softmax import TrainConfig
from .taxonomy import DEFAULT_RATIOS, TaskId


@dataclass(frozen=True)
class PipelineConfig:
    task: TaskId = TaskId.SIC
    dataset: str | None = None
    split_seed: int = 0
    ratios: tuple[float, float, float] = DEFAULT_RATIOS

    top_k: int = 10
    max_parallel: int = 4
    max_attempts: int = 3
    base_backoff: float = 1.0
    rate_per_second: float = 0.0  # 0 disables client-side rate limiting
    cache_dir: str | None = None
    summary_max_tokens: int = 400
    search_base_url: str | None = None
    llm_base_url: str | None = None
    gpt_model: str = "gpt-4o-mini-2024-07-18"
    llama_model: str = "llama-3.1-8b-instruct"

    training: TrainConfig = field(default_factory=TrainConfig)

    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    inclusive_thresholds: bool = False


def snapshot(config: PipelineConfig) -> dict:
    """Plain-dict view of the config, stable across runs, for the manifest."""
    t = config.training
    return {
        "task": config.task.value,
        "dataset": config.dataset,
        "split_seed": config.split_seed,
        "ratios": list(config.ratios),
        "acquisition": {
            "top_k": config.top_k,
            "max_parallel": config.max_parallel,
            "max_attempts": config.max_attempts,
            "base_backoff": config.base_backoff,
            "rate_per_second": config.rate_per_second,
            "cache_dir": config.cache_dir,
            "summary_max_tokens": config.summary_max_tokens,
            "search_base_url": config.search_base_url,
            "llm_base_url": config.llm_base_url,
            "gpt_model": config.gpt_model,
            "llama_model": config.llama_model,
        },
        "training": {
            "epochs": t.epochs,
            "batch_size": t.batch_size,
            "eval_batch_size": t.eval_batch_size,
            "learning_rate": t.learning_rate,
            "warmup_steps": t.warmup_steps,
            "weight_decay": t.weight_decay,
            "seed": t.seed,
        },
        "eval": {
            "thresholds": list(config.thresholds),
            "inclusive_thresholds": config.inclusive_thresholds,
        },
    }


_TASK_KEYS = {"name", "dataset", "split_seed", "ratios"}
_ACQ_KEYS = {
    "top_k",
    "max_parallel",
    "max_attempts",
    "base_backoff",
    "rate_per_second",
    "cache_dir",
    "summary_max_tokens",
    "search_base_url",
    "llm_base_url",
    "gpt_model",
    "llama_model",
}
_TRAIN_KEYS = {
    "epochs",
    "batch_size",
    "eval_batch_size",
    "learning_rate",
    "warmup_steps",
    "weight_decay",
    "seed",
}
_EVAL_KEYS = {"thresholds", "inclusive"}
_SECTIONS = {"task": _TASK_KEYS, "acquisition": _ACQ_KEYS, "training": _TRAIN_KEYS, "eval": _EVAL_KEYS}


def _check_keys(parser: configparser.ConfigParser, path: Path):
    for section in parser.sections():
        allowed = _SECTIONS.get(section)
        if allowed is None:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in allowed:
                raise ConfigError(f"{path}: unknown key '{key}' in [{section}]")


def _floats(raw: str, path: Path, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{path}: bad float list for '{key}': {raw!r}") from exc


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    _check_keys(parser, path)

    config = PipelineConfig()
    try:
        if parser.has_section("task"):
            sec = parser["task"]
            if "name" in sec:
                raw = sec["name"].strip().upper()
                try:
                    config = replace(config, task=TaskId(raw))
                except ValueError as exc:
                    raise ConfigError(f"{path}: unknown task name {sec['name']!r}") from exc
            if "dataset" in sec:
                config = replace(config, dataset=sec["dataset"].strip() or None)
            if "split_seed" in sec:
                config = replace(config, split_seed=sec.getint("split_seed"))
            if "ratios" in sec:
                parts = _floats(sec["ratios"], path, "ratios")
                if len(parts) != 3:
                    raise ConfigError(f"{path}: ratios needs exactly three values")
                config = replace(config, ratios=parts)

        if parser.has_section("acquisition"):
            sec = parser["acquisition"]
            updates = {}
            for key in ("top_k", "max_parallel", "max_attempts", "summary_max_tokens"):
                if key in sec:
                    updates[key] = sec.getint(key)
            for key in ("base_backoff", "rate_per_second"):
                if key in sec:
                    updates[key] = sec.getfloat(key)
            for key in ("cache_dir", "search_base_url", "llm_base_url", "gpt_model", "llama_model"):
                if key in sec:
                    updates[key] = sec[key].strip() or None
            if updates.get("gpt_model") is None and "gpt_model" in updates:
                raise ConfigError(f"{path}: gpt_model must not be empty")
            if updates.get("llama_model") is None and "llama_model" in updates:
                raise ConfigError(f"{path}: llama_model must not be empty")
            config = replace(config, **updates)

        if parser.has_section("training"):
            sec = parser["training"]
            tr = config.training
            kwargs = {}
            for key in ("epochs", "batch_size", "eval_batch_size", "warmup_steps", "seed"):
                if key in sec:
                    kwargs[key] = sec.getint(key)
            for key in ("learning_rate", "weight_decay"):
                if key in sec:
                    kwargs[key] = sec.getfloat(key)
            config = replace(config, training=replace(tr, **kwargs))

        if parser.has_section("eval"):
            sec = parser["eval"]
            if "thresholds" in sec:
                config = replace(config, thresholds=_floats(sec["thresholds"], path, "thresholds"))
            if "inclusive" in sec:
                config = replace(config, inclusive_thresholds=sec.getboolean("inclusive"))
    except ValueError as exc:
        # configparser get* conversion failures land here
        raise ConfigError(f"{path}: {exc}") from exc

    return config
