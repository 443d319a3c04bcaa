"""Two-stage training-mixture assembly with declared-count auditing.

Count disagreements are reported as structured warnings, never silently
fixed: the bundled instruct-stage source list itself sums to 610K against
a declared 665K total, and a strict validator could never load it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ParseError, ValidationError
from .manifest import DatasetManifest

STAGE_IDS = ("captioning", "instruct")
STAGES_HEADER = "#stages-v1"


@dataclass(frozen=True)
class StageSpec:
    stage: str
    sources: tuple[tuple[str, int], ...]  # (dataset name, declared count)
    declared_total: int

    def __post_init__(self):
        if self.stage not in STAGE_IDS:
            raise ValidationError(
                f"stage id must be one of {STAGE_IDS}, got {self.stage!r}"
            )
        if not self.sources:
            raise ValidationError(f"stage {self.stage!r} has no sources")

    @property
    def source_sum(self) -> int:
        return sum(count for _, count in self.sources)


# the LLaVA-v1.5 two-stage mixture this pipeline reproduces
LLAVA_CAPTIONING_STAGE = StageSpec(
    stage="captioning",
    sources=(("captioning-mix", 558_000),),
    declared_total=558_000,
)
LLAVA_INSTRUCT_STAGE = StageSpec(
    stage="instruct",
    sources=(
        ("llava-synthetic", 158_000),
        ("standard-vqa", 224_000),
        ("multiple-choice-vqa", 50_000),
        ("textcaps-captioning", 22_000),
        ("referring-expression", 116_000),
        ("sharegpt-language", 40_000),
    ),
    declared_total=665_000,
)


@dataclass(frozen=True)
class StageWarning:
    stage: str
    kind: str  # "stage-total-mismatch" | "source-count-mismatch"
    subject: str
    declared: int
    actual: int

    @property
    def delta(self) -> int:
        return abs(self.declared - self.actual)


@dataclass(frozen=True)
class ResolvedStage:
    spec: StageSpec
    manifests: tuple[DatasetManifest, ...]


@dataclass(frozen=True)
class StagedPlan:
    stages: tuple[ResolvedStage, ...]
    warnings: tuple[StageWarning, ...]


def assemble_staged_mixture(
    stages: Sequence[StageSpec], manifests: Mapping[str, DatasetManifest]
) -> StagedPlan:
    """Resolve every stage source against its manifest and audit counts.

    Raises:
        ValidationError: no stages, or a source without a manifest.
    """
    if not stages:
        raise ValidationError("no stages to assemble")
    resolved: list[ResolvedStage] = []
    warnings: list[StageWarning] = []
    for stage in stages:
        stage_manifests: list[DatasetManifest] = []
        for name, declared in stage.sources:
            manifest = manifests.get(name)
            if manifest is None:
                raise ValidationError(
                    f"stage {stage.stage!r}: no manifest for source {name!r}"
                )
            stage_manifests.append(manifest)
            if manifest.record_count != declared:
                warnings.append(
                    StageWarning(
                        stage=stage.stage,
                        kind="source-count-mismatch",
                        subject=name,
                        declared=declared,
                        actual=manifest.record_count,
                    )
                )
        if stage.source_sum != stage.declared_total:
            warnings.append(
                StageWarning(
                    stage=stage.stage,
                    kind="stage-total-mismatch",
                    subject=stage.stage,
                    declared=stage.declared_total,
                    actual=stage.source_sum,
                )
            )
        resolved.append(ResolvedStage(spec=stage, manifests=tuple(stage_manifests)))
    return StagedPlan(stages=tuple(resolved), warnings=tuple(warnings))


def load_stage_specs(path: str | os.PathLike) -> list[StageSpec]:
    """Stage file: `stage\\t<id>\\t<declared_total>` then `source\\t<id>\\t<name>\\t<count>`."""
    name = str(path)
    totals: dict[str, int] = {}
    order: list[str] = []
    sources: dict[str, list[tuple[str, int]]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if lineno == 1:
                if line.split("\t")[0] != STAGES_HEADER:
                    raise ParseError(f"expected {STAGES_HEADER} header", name, lineno)
                continue
            if not line:
                continue
            fields = line.split("\t")
            try:
                if fields[0] == "stage" and len(fields) == 3:
                    totals[fields[1]] = int(fields[2])
                    order.append(fields[1])
                    sources.setdefault(fields[1], [])
                elif fields[0] == "source" and len(fields) == 4:
                    sources.setdefault(fields[1], []).append((fields[2], int(fields[3])))
                else:
                    raise ParseError(f"unrecognized record {fields[0]!r}", name, lineno)
            except ValueError:
                raise ParseError("bad integer field", name, lineno) from None
    specs = []
    for stage_id in order:
        specs.append(
            StageSpec(
                stage=stage_id,
                sources=tuple(sources.get(stage_id, ())),
                declared_total=totals[stage_id],
            )
        )
    return specs


def save_stage_specs(path: str | os.PathLike, stages: Sequence[StageSpec]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{STAGES_HEADER}\n")
        for stage in stages:
            f.write(f"stage\t{stage.stage}\t{stage.declared_total}\n")
            for src, count in stage.sources:
                f.write(f"source\t{stage.stage}\t{src}\t{count}\n")
