"""Deterministic report emission: TSV and JSON writers whose bytes are a
pure function of their inputs, plus the output-directory manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from typing import Iterable, Sequence


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_tsv(path: str, columns: Sequence[str], rows: Iterable[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(c)) for c in columns])


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def with_provenance(rows: Iterable[dict], config_hash: str, source_tag: str, seed: int) -> list[dict]:
    """Stamp every report row with where it came from."""
    out = []
    for row in rows:
        stamped = dict(row)
        stamped["config_hash"] = config_hash
        stamped["source_tag"] = source_tag
        stamped["seed"] = seed
        out.append(stamped)
    return out


class Manifest:
    """Tracks artifacts written under one output directory and persists
    their hashes to MANIFEST.json (merging with an existing manifest so
    subcommands can be run one at a time)."""

    def __init__(self, out_dir: str, config_hash: str = "") -> None:
        self.out_dir = out_dir
        self.config_hash = config_hash
        self.paths: list[str] = []

    def add(self, path: str) -> str:
        self.paths.append(path)
        return path

    def path(self, name: str) -> str:
        os.makedirs(self.out_dir, exist_ok=True)
        return self.add(os.path.join(self.out_dir, name))

    def write(self) -> str:
        manifest_path = os.path.join(self.out_dir, "MANIFEST.json")
        entries: dict[str, dict] = {}
        if os.path.exists(manifest_path):
            with open(manifest_path, encoding="utf-8") as fh:
                for entry in json.load(fh).get("artifacts", []):
                    entries[entry["path"]] = entry
        for path in self.paths:
            rel = os.path.relpath(path, self.out_dir)
            entries[rel] = {
                "path": rel,
                "sha256": sha256_file(path),
                "bytes": os.path.getsize(path),
            }
        payload = {
            "tool": "uidtk",
            "config_hash": self.config_hash,
            "artifacts": [entries[k] for k in sorted(entries)],
        }
        write_json(manifest_path, payload)
        return manifest_path


SWEEP_COLUMNS = [
    "dataset",
    "predictor",
    "kind",
    "k",
    "scope",
    "window",
    "delta_loglik_nats",
    "delta_loglik_se_nats",
    "delta_loglik_1e2_nats",
    "delta_loglik_se_1e2_nats",
    "n",
    "n_excluded",
    "status",
    "error",
    "config_hash",
    "source_tag",
    "seed",
]

CORRELATION_COLUMNS = [
    "k",
    "method",
    "r",
    "n",
    "status",
    "error",
    "config_hash",
    "source_tag",
    "seed",
]

METRIC_COLUMNS = [
    "doc_id",
    "sent_idx",
    "tok_idx",
    "metric_kind",
    "k",
    "mu_scope",
    "delta",
    "value",
    "excluded",
]

FOLD_COLUMNS = ["row", "fold"]


def write_fold_assignments(path: str, fold_ids) -> None:
    write_tsv(path, FOLD_COLUMNS, ({"row": i, "fold": int(f)} for i, f in enumerate(fold_ids)))
