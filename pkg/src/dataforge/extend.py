"""Vocabulary extension: merge curated token tables into a trained base.

Base ids are frozen; surviving extension tokens are appended in extension
order then source-id order, first occurrence winning across sources.
Extension merge rules whose operands and result survive are appended
after the base rules. The companion ExtensionPlan tells an external
trainer how to initialize embeddings for each appended token.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

from .bpe.codec import Tokenizer
from .bpe.pretoken import WORD_MARK, piece_to_text
from .bpe.vocab import MergeRule, Vocabulary
from .errors import ParseError, ValidationError

# codepoint ranges for the scripts this pipeline filters on; anything not
# listed classifies as "Unknown" and only passes an empty script filter
_SCRIPT_RANGES: tuple[tuple[int, int, str], ...] = (
    (0x0041, 0x005A, "Latin"),
    (0x0061, 0x007A, "Latin"),
    (0x00C0, 0x024F, "Latin"),
    (0x0370, 0x03FF, "Greek"),
    (0x0400, 0x04FF, "Cyrillic"),
    (0x0530, 0x058F, "Armenian"),
    (0x0590, 0x05FF, "Hebrew"),
    (0x0600, 0x06FF, "Arabic"),
    (0x0900, 0x097F, "Devanagari"),
    (0x0E00, 0x0E7F, "Thai"),
    (0x1100, 0x11FF, "Hangul"),
    (0x3040, 0x309F, "Hiragana"),
    (0x30A0, 0x30FF, "Katakana"),
    (0x3400, 0x4DBF, "Han"),
    (0x4E00, 0x9FFF, "Han"),
    (0xA000, 0xA48F, "Yi"),
    (0xAC00, 0xD7AF, "Hangul"),
    (0xF900, 0xFAFF, "Han"),
    (0x20000, 0x2A6DF, "Han"),
)


def char_script(ch: str) -> str:
    cp = ord(ch)
    if cp < 0x41 or ch == WORD_MARK:
        return "Common"
    for lo, hi, name in _SCRIPT_RANGES:
        if lo <= cp <= hi:
            return name
    if cp < 0xA1:
        return "Common"
    import unicodedata

    if unicodedata.category(ch)[0] in ("P", "S", "Z", "N", "C"):
        return "Common"
    return "Unknown"


@dataclass(frozen=True)
class FilterRules:
    """Mechanized stand-in for manual vocabulary review.

    min_frequency is a floor in occurrences per million symbols, checked
    against exp(score) of the extension entry (scores are ln relative
    frequencies); 0 disables it. allow_list entries bypass the frequency
    and script checks; deny_list entries always lose.
    """

    min_frequency: int = 0
    allowed_scripts: frozenset[str] = frozenset()
    allow_list: frozenset[str] = frozenset()
    deny_list: frozenset[str] = frozenset()

    def __post_init__(self):
        overlap = self.allow_list & self.deny_list
        if overlap:
            raise ValidationError(f"allow/deny lists overlap: {sorted(overlap)[:5]}")

    def admits(self, piece: str, score: float) -> bool:
        if piece in self.deny_list:
            return False
        if piece in self.allow_list:
            return True
        if self.min_frequency > 0 and math.exp(score) * 1e6 < self.min_frequency:
            return False
        if self.allowed_scripts:
            scripts = {char_script(c) for c in piece}
            scripts.discard("Common")
            if not scripts <= self.allowed_scripts:
                return False
        return True


EMPTY_FILTERS = FilterRules()


@dataclass
class SourceBreakdown:
    name: str
    entries: int = 0
    added: int = 0
    duplicates: int = 0
    filtered: int = 0


@dataclass
class MergeReport:
    base_size: int
    added: int
    duplicates_skipped: int
    filtered_out: int
    final_size: int
    sources: list[SourceBreakdown] = field(default_factory=list)
    target_size: int | None = None
    target_tolerance: float = 0.05

    @property
    def within_target(self) -> bool | None:
        if self.target_size is None:
            return None
        return abs(self.final_size - self.target_size) <= self.target_tolerance * self.target_size

    def to_items(self) -> list[tuple[str, object]]:
        items: list[tuple[str, object]] = [
            ("base_size", self.base_size),
            ("added", self.added),
            ("duplicates_skipped", self.duplicates_skipped),
            ("filtered_out", self.filtered_out),
            ("final_size", self.final_size),
        ]
        if self.target_size is not None:
            items += [
                ("target_size", self.target_size),
                ("target_tolerance", self.target_tolerance),
                ("within_target", self.within_target),
            ]
        for i, s in enumerate(self.sources):
            prefix = f"source.{i}"
            items += [
                (f"{prefix}.name", s.name),
                (f"{prefix}.entries", s.entries),
                (f"{prefix}.added", s.added),
                (f"{prefix}.duplicates", s.duplicates),
                (f"{prefix}.filtered", s.filtered),
            ]
        return items


def merge_vocabularies(
    base: Tokenizer,
    extensions: Sequence[Tokenizer | Vocabulary],
    filters: FilterRules = EMPTY_FILTERS,
    *,
    source_names: Sequence[str] | None = None,
    target_size: int | None = None,
    target_tolerance: float = 0.05,
) -> tuple[Tokenizer, MergeReport]:
    """Append filter-passing extension tokens (and rules) to the base.

    Returns the merged tokenizer plus an audit report. Every base token
    keeps its id; duplicates resolve to the first occurrence in extension
    order then source-id order.
    """
    entries: list[tuple[bytes, float]] = [
        (base.vocab.token_bytes(i), base.vocab.score(i)) for i in range(len(base.vocab))
    ]
    seen: set[bytes] = set(base.vocab.tokens)
    report = MergeReport(
        base_size=len(base.vocab),
        added=0,
        duplicates_skipped=0,
        filtered_out=0,
        final_size=len(base.vocab),
        target_size=target_size,
        target_tolerance=target_tolerance,
    )

    ext_rules: list[MergeRule] = []
    for src_idx, ext in enumerate(extensions):
        vocab = ext.vocab if isinstance(ext, Tokenizer) else ext
        name = (
            source_names[src_idx]
            if source_names is not None
            else f"extension-{src_idx}"
        )
        breakdown = SourceBreakdown(name=name, entries=len(vocab))
        for tid in range(len(vocab)):
            token = vocab.token_bytes(tid)
            if token in seen:
                breakdown.duplicates += 1
                continue
            if vocab.is_special_id(tid) or vocab.is_byte_id(tid):
                # foreign specials never graduate into the merged table
                breakdown.filtered += 1
                continue
            piece = token.decode("utf-8")
            if not filters.admits(piece, vocab.score(tid)):
                breakdown.filtered += 1
                continue
            entries.append((token, vocab.score(tid)))
            seen.add(token)
            breakdown.added += 1
        if isinstance(ext, Tokenizer):
            ext_rules.extend(ext.merges)
        report.sources.append(breakdown)
        report.added += breakdown.added
        report.duplicates_skipped += breakdown.duplicates
        report.filtered_out += breakdown.filtered

    report.final_size = len(entries)
    merged_vocab = Vocabulary(entries, num_specials=base.vocab.num_specials)

    rules = list(base.merges)
    have = set(rules)
    for rule in ext_rules:
        if rule in have:
            continue
        if (
            rule.left in merged_vocab
            and rule.right in merged_vocab
            and rule.result in merged_vocab
        ):
            rules.append(rule)
            have.add(rule)

    return Tokenizer(merged_vocab, rules), report


def load_tokenizer_or_vocab(
    vocab_path: str | os.PathLike, merges_path: str | os.PathLike | None
) -> Tokenizer | Vocabulary:
    """Load an extension: a bare vocabulary, or a tokenizer when rules ship too."""
    from .bpe.store import load_merges, load_vocab

    vocab = load_vocab(vocab_path)
    if merges_path is None:
        return vocab
    return Tokenizer(vocab, load_merges(merges_path))


# -- embedding extension plan -----------------------------------------------

SUBTOKEN_MEAN = "subtoken-mean"
GLOBAL_MEAN = "global-mean"


@dataclass(frozen=True)
class PlanEntry:
    new_token_id: int
    strategy: str
    source_ids: tuple[int, ...]
    weights: tuple[float, ...]


@dataclass(frozen=True)
class ExtensionPlan:
    base_size: int
    entries: tuple[PlanEntry, ...]


def plan_embedding_extension(
    base: Tokenizer, merged: Tokenizer | Vocabulary
) -> ExtensionPlan:
    """Per-new-token initialization recipe for an external trainer.

    New tokens whose surface re-encodes under the base tokenizer without
    byte fallback average their sub-token embeddings (uniform weights);
    anything touching fallback gets the global-mean strategy.
    """
    vocab = merged.vocab if isinstance(merged, Tokenizer) else merged
    base_size = len(base.vocab)
    if len(vocab) < base_size:
        raise ValidationError("merged vocabulary is smaller than the base")
    for tid in range(base_size):
        if vocab.token_bytes(tid) != base.vocab.token_bytes(tid):
            raise ValidationError(
                f"merged vocabulary does not preserve base id {tid}"
            )

    fallback = set(base.vocab.byte_fallback_ids)
    entries: list[PlanEntry] = []
    for tid in range(base_size, len(vocab)):
        surface = piece_to_text(vocab.token_bytes(tid).decode("utf-8"))
        ids = base.encode(surface)
        if ids and not any(i in fallback for i in ids):
            w = 1.0 / len(ids)
            entries.append(
                PlanEntry(tid, SUBTOKEN_MEAN, tuple(ids), tuple(w for _ in ids))
            )
        else:
            entries.append(PlanEntry(tid, GLOBAL_MEAN, (), ()))
    return ExtensionPlan(base_size=base_size, entries=tuple(entries))


PLAN_HEADER = "#extplan-v1"


def save_plan(path: str | os.PathLike, plan: ExtensionPlan) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{PLAN_HEADER}\tbase_size={plan.base_size}\n")
        for e in plan.entries:
            parts = [str(e.new_token_id), e.strategy]
            parts += [str(i) for i in e.source_ids]
            parts += [repr(w) for w in e.weights]
            f.write(" ".join(parts) + "\n")


def load_plan(path: str | os.PathLike) -> ExtensionPlan:
    name = str(path)
    base_size = 0
    entries: list[PlanEntry] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if lineno == 1:
                fields = line.split("\t")
                if fields[0] != PLAN_HEADER:
                    raise ParseError(f"expected {PLAN_HEADER} header", name, lineno)
                for fld in fields[1:]:
                    if fld.startswith("base_size="):
                        base_size = int(fld.removeprefix("base_size="))
                continue
            fields = line.split(" ")
            if len(fields) < 2 or len(fields) % 2 != 0:
                raise ParseError("malformed plan record", name, lineno)
            k = (len(fields) - 2) // 2
            try:
                entries.append(
                    PlanEntry(
                        int(fields[0]),
                        fields[1],
                        tuple(int(x) for x in fields[2 : 2 + k]),
                        tuple(float(x) for x in fields[2 + k :]),
                    )
                )
            except ValueError:
                raise ParseError("malformed plan record", name, lineno) from None
    return ExtensionPlan(base_size=base_size, entries=tuple(entries))
