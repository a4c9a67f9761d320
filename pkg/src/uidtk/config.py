"""Experiment configuration: a versioned JSON schema, command-line
overrides, validation, and the content hash stamped into every report."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = 1

DEFAULT_K_GRID = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    seed: int | None = None
    corpus_tokens: str | None = None  # pre-tokenized TSV
    corpus_raw: str | None = None  # raw text, blank-line document delimiter
    readings: str | None = None
    acceptability: str | None = None
    surprisal_mode: str = "ngram"  # "ngram" | "external"
    lm_order: int = 5
    lm_unk_threshold: int = 1
    external_surprisals: str | None = None
    reference_corpus: str | None = None  # tokens TSV scored under the same model
    k_grid: tuple[float, ...] = DEFAULT_K_GRID
    windows: tuple[int, ...] = (1, 2, 3, 4)
    folds: int = 10
    baseline_variant: str = "main"  # "main" | "extended"
    raw_probabilities: bool = False
    correlation_method: str = "pearson"
    workers: int = 1
    output_dir: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.seed is None:
            raise ConfigError("a seed is mandatory")
        if (self.corpus_tokens is None) == (self.corpus_raw is None):
            raise ConfigError("exactly one corpus source (tokens TSV or raw text) is required")
        if self.surprisal_mode == "ngram":
            if self.external_surprisals is not None:
                raise ConfigError(
                    "exactly one surprisal source: drop external_surprisals or switch "
                    "surprisal_mode to 'external'"
                )
            if not 1 <= self.lm_order <= 5:
                raise ConfigError("lm_order must be in [1, 5]")
        elif self.surprisal_mode == "external":
            if self.external_surprisals is None:
                raise ConfigError("external surprisal mode needs external_surprisals")
            if self.reference_corpus is not None:
                raise ConfigError(
                    "a reference corpus needs a model to score it; it is only "
                    "supported in ngram mode"
                )
        else:
            raise ConfigError(f"unknown surprisal_mode {self.surprisal_mode!r}")
        if not self.k_grid:
            raise ConfigError("k grid must be nonempty")
        if any(k <= 0 for k in self.k_grid):
            raise ConfigError("every k must be > 0")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.baseline_variant not in ("main", "extended"):
            raise ConfigError(f"unknown baseline_variant {self.baseline_variant!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def to_dict(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["k_grid"] = list(self.k_grid)
        payload["windows"] = list(self.windows)
        payload["schema_version"] = SCHEMA_VERSION
        return payload

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """Content hash identifying the analysis.  Where the reports land
        and how many workers ran are execution details, not analysis
        identity, so they do not enter the hash."""
        payload = self.to_dict()
        payload.pop("output_dir", None)
        payload.pop("workers", None)
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        version = payload.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema_version {version}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "k_grid" in payload and payload["k_grid"] is not None:
            payload["k_grid"] = tuple(float(k) for k in payload["k_grid"])
        if "windows" in payload and payload["windows"] is not None:
            payload["windows"] = tuple(int(w) for w in payload["windows"])
        return cls(**payload)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def override(self, **kwargs) -> "ExperimentConfig":
        """Apply command-line overrides (None means 'not given')."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        if "k_grid" in updates:
            updates["k_grid"] = tuple(float(k) for k in updates["k_grid"])
        if "windows" in updates:
            updates["windows"] = tuple(int(w) for w in updates["windows"])
        return dataclasses.replace(self, **updates)
