"""Encoding and decoding against a trained vocabulary + merge list.

encode applies the lowest-rank applicable merge repeatedly until none
applies, then emits ids; symbols absent from the vocabulary fall back to
the raw UTF-8 bytes of the original character, which makes encoding total
and decoding lossless.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

from ..errors import ValidationError
from .pretoken import WORD_MARK, BytePiece, CharPiece, piece_to_text, split_pieces
from .vocab import MergeRule, Vocabulary


class DecodeResult(NamedTuple):
    text: str
    lossy: bool


class Tokenizer:
    """Immutable vocabulary + ranked merges; encode/decode are pure."""

    def __init__(self, vocab: Vocabulary, merges: Sequence[MergeRule]):
        self.vocab = vocab
        self.merges = tuple(merges)
        self._ranks: dict[tuple[str, str], int] = {}
        for rank, rule in enumerate(self.merges):
            if rule.result not in vocab:
                raise ValidationError(
                    f"merge rank {rank}: result {rule.result!r} missing from vocabulary"
                )
            key = (rule.left.decode("utf-8"), rule.right.decode("utf-8"))
            # first (lowest) rank wins if a pair is listed twice
            self._ranks.setdefault(key, rank)

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for piece in split_pieces(text):
            if isinstance(piece, BytePiece):
                for b in piece.data:
                    ids.append(self.vocab.byte_id(b))
            else:
                self._encode_chars(piece, ids)
        return ids

    def _encode_chars(self, piece: CharPiece, out: list[int]) -> None:
        symbols = self._apply_merges(list(piece.symbols))
        for sym in symbols:
            tid = self.vocab.piece_id(sym)
            if tid is not None:
                out.append(tid)
                continue
            # unknown symbols are always single characters: merge results
            # are vocabulary members by invariant
            raw = " " if sym == WORD_MARK else sym
            for b in raw.encode("utf-8"):
                out.append(self.vocab.byte_id(b))

    def _apply_merges(self, symbols: list[str]) -> list[str]:
        ranks = self._ranks
        while len(symbols) >= 2:
            best_rank = None
            best_pair = None
            for i in range(len(symbols) - 1):
                r = ranks.get((symbols[i], symbols[i + 1]))
                if r is not None and (best_rank is None or r < best_rank):
                    best_rank = r
                    best_pair = (symbols[i], symbols[i + 1])
            if best_pair is None:
                break
            symbols = merge_adjacent(symbols, best_pair)
        return symbols

    def decode(self, ids: Sequence[int]) -> DecodeResult:
        vocab = self.vocab
        size = len(vocab)
        parts: list[str] = []
        pending = bytearray()
        lossy = False

        def flush() -> None:
            nonlocal lossy
            if not pending:
                return
            try:
                parts.append(pending.decode("utf-8"))
            except UnicodeDecodeError:
                parts.append(pending.decode("utf-8", errors="replace"))
                lossy = True
            pending.clear()

        for tid in ids:
            if not 0 <= tid < size:
                raise ValidationError(
                    f"token id {tid} out of range for vocabulary of size {size}"
                )
            if vocab.is_byte_id(tid):
                pending.append(tid - vocab.num_specials)
            elif vocab.is_special_id(tid):
                flush()
                parts.append(vocab.token_bytes(tid).decode("utf-8"))
            else:
                flush()
                parts.append(piece_to_text(vocab.token_bytes(tid).decode("utf-8")))
        flush()
        return DecodeResult("".join(parts), lossy)


def merge_adjacent(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    """Replace all occurrences of pair left-to-right, non-overlapping."""
    left, right = pair
    merged = left + right
    out: list[str] = []
    i = 0
    n = len(symbols)
    while i < n:
        if i + 1 < n and symbols[i] == left and symbols[i + 1] == right:
            out.append(merged)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out
