"""Encoding-efficiency measurement and base-vs-extended comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .bpe.codec import Tokenizer
from .errors import ValidationError


@dataclass(frozen=True)
class EfficiencyReport:
    tokens_per_char: float
    chars_per_token: float
    fallback_fraction: float
    corpus_chars: int
    total_tokens: int

    def to_items(self) -> list[tuple[str, object]]:
        return [
            ("tokens_per_char", self.tokens_per_char),
            ("chars_per_token", self.chars_per_token),
            ("fallback_fraction", self.fallback_fraction),
            ("corpus_chars", self.corpus_chars),
            ("total_tokens", self.total_tokens),
        ]


class EfficiencyComparison(NamedTuple):
    base: EfficiencyReport
    extended: EfficiencyReport
    improvement_ratio: float


def encoding_efficiency(tok: Tokenizer, corpus: Iterable[str]) -> EfficiencyReport:
    """Token counts per unicode character over a document stream.

    Raises:
        ValidationError: the corpus contains no characters.
    """
    fallback_ids = set(tok.vocab.byte_fallback_ids)
    chars = 0
    tokens = 0
    fallback = 0
    for doc in corpus:
        chars += len(doc)
        ids = tok.encode(doc)
        tokens += len(ids)
        fallback += sum(1 for i in ids if i in fallback_ids)
    if chars == 0:
        raise ValidationError("empty corpus: nothing to measure")
    return EfficiencyReport(
        tokens_per_char=tokens / chars,
        chars_per_token=chars / tokens if tokens else float("inf"),
        fallback_fraction=fallback / tokens if tokens else 0.0,
        corpus_chars=chars,
        total_tokens=tokens,
    )


def compare_efficiency(
    base: Tokenizer, extended: Tokenizer, corpus: Sequence[str]
) -> EfficiencyComparison:
    """Paired reports plus tokens_per_char(base) / tokens_per_char(extended)."""
    base_report = encoding_efficiency(base, corpus)
    ext_report = encoding_efficiency(extended, corpus)
    return EfficiencyComparison(
        base=base_report,
        extended=ext_report,
        improvement_ratio=base_report.tokens_per_char / ext_report.tokens_per_char,
    )
