"""Verifiable on-disk dataset manifests.

A manifest names one dataset's shard files with per-shard record counts
and SHA-256 digests. Reading records re-verifies the digest; standalone
verification itemizes every mismatch instead of aborting on the first.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from .errors import ParseError, ValidationError

MANIFEST_HEADER = "#manifest-v1"
LINES_FORMAT = "lines"


@dataclass(frozen=True)
class ShardInfo:
    path: str
    record_count: int
    digest: str  # sha256 hex


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    shards: tuple[ShardInfo, ...]
    format: str = LINES_FORMAT

    def __post_init__(self):
        if self.format != LINES_FORMAT:
            raise ValidationError(f"unsupported shard format {self.format!r}")

    @property
    def record_count(self) -> int:
        return sum(s.record_count for s in self.shards)


def synthetic_manifest(name: str, record_count: int) -> DatasetManifest:
    """Manifest with declared counts but no backing files (planning only)."""
    return DatasetManifest(
        name=name,
        shards=(ShardInfo(path=f"{name}.jsonl", record_count=record_count, digest="0" * 64),),
    )


def _digest_and_count(path: Path) -> tuple[str, int]:
    h = hashlib.sha256()
    count = 0
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
            count += chunk.count(b"\n")
    return h.hexdigest(), count


def build_manifest(
    name: str, shard_paths: Sequence[str | os.PathLike], base_dir: str | os.PathLike | None = None
) -> DatasetManifest:
    """Scan shard files and record their counts and digests."""
    root = Path(base_dir) if base_dir is not None else None
    shards = []
    for p in shard_paths:
        full = (root / p) if root is not None else Path(p)
        digest, count = _digest_and_count(full)
        shards.append(ShardInfo(path=str(p), record_count=count, digest=digest))
    return DatasetManifest(name=name, shards=tuple(shards))


def save_manifest(path: str | os.PathLike, manifest: DatasetManifest) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{MANIFEST_HEADER}\t{manifest.name}\t{manifest.format}\n")
        for s in manifest.shards:
            f.write(f"{s.path}\t{s.record_count}\t{s.digest}\n")


def load_manifest(path: str | os.PathLike) -> DatasetManifest:
    name = str(path)
    ds_name = ""
    fmt = LINES_FORMAT
    shards: list[ShardInfo] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if lineno == 1:
                fields = line.split("\t")
                if fields[0] != MANIFEST_HEADER:
                    raise ParseError(f"expected {MANIFEST_HEADER} header", name, lineno)
                if len(fields) > 1:
                    ds_name = fields[1]
                if len(fields) > 2:
                    fmt = fields[2]
                continue
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    f"expected <path>\\t<count>\\t<digest>, got {len(fields)} fields",
                    name,
                    lineno,
                )
            try:
                count = int(fields[1])
            except ValueError:
                raise ParseError(f"bad record count {fields[1]!r}", name, lineno) from None
            shards.append(ShardInfo(path=fields[0], record_count=count, digest=fields[2]))
    return DatasetManifest(name=ds_name, shards=tuple(shards), format=fmt)


# -- verification ------------------------------------------------------------


@dataclass(frozen=True)
class ShardCheck:
    path: str
    ok: bool
    failure: str | None = None  # "digest", "count", "unreadable"
    detail: str = ""


@dataclass(frozen=True)
class VerifyReport:
    manifest_name: str
    checks: tuple[ShardCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> tuple[ShardCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def _check_shard(shard: ShardInfo, root: Path | None) -> ShardCheck:
    full = (root / shard.path) if root is not None else Path(shard.path)
    try:
        digest, count = _digest_and_count(full)
    except OSError as exc:
        return ShardCheck(shard.path, ok=False, failure="unreadable", detail=str(exc))
    if digest != shard.digest:
        return ShardCheck(
            shard.path, ok=False, failure="digest",
            detail=f"expected {shard.digest}, got {digest}",
        )
    if count != shard.record_count:
        return ShardCheck(
            shard.path, ok=False, failure="count",
            detail=f"expected {shard.record_count}, got {count}",
        )
    return ShardCheck(shard.path, ok=True)


def thread_budget() -> int:
    """Parallelism cap from FORGE_THREADS (default: number of CPUs)."""
    raw = os.environ.get("FORGE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def verify_manifest(
    manifest: DatasetManifest, base_dir: str | os.PathLike | None = None
) -> VerifyReport:
    """Recompute digests and counts for every shard, in manifest order.

    Shards are hashed in parallel (bounded by FORGE_THREADS) but the
    report order is the manifest order, so output is deterministic.
    """
    root = Path(base_dir) if base_dir is not None else None
    workers = min(thread_budget(), max(len(manifest.shards), 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        checks = list(pool.map(lambda s: _check_shard(s, root), manifest.shards))
    return VerifyReport(manifest_name=manifest.name, checks=tuple(checks))


def iter_records(
    manifest: DatasetManifest, base_dir: str | os.PathLike | None = None
) -> Iterator[str]:
    """Stream records across shards, verifying each digest on open."""
    root = Path(base_dir) if base_dir is not None else None
    for shard in manifest.shards:
        full = (root / shard.path) if root is not None else Path(shard.path)
        digest, count = _digest_and_count(full)
        if digest != shard.digest:
            raise ValidationError(
                f"shard {shard.path}: digest mismatch (expected {shard.digest}, got {digest})"
            )
        if count != shard.record_count:
            raise ValidationError(
                f"shard {shard.path}: count mismatch (expected {shard.record_count}, got {count})"
            )
        with open(full, "r", encoding="utf-8") as f:
            for line in f:
                yield line.rstrip("\n")
