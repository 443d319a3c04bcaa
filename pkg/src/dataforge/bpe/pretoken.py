"""Text-to-symbol preparation shared by the trainer and the codec.

Spaces are marked with U+2581 and the stream is cut into pieces at word
boundaries, sentencepiece style, so merges never cross words. The marking
must stay bijective for lossless decoding, which forces two rules:

* only training normalizes (NFKC); the encode path never rewrites text,
* a literal U+2581 in the input is carried as its raw UTF-8 bytes and
  splits the surrounding text, so it can never be confused with a marked
  space and never participates in a merge.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

WORD_MARK = "▁"
_WORD_MARK_BYTES = WORD_MARK.encode("utf-8")


@dataclass(frozen=True)
class CharPiece:
    """A run of unicode symbols that merges may operate on."""

    symbols: tuple[str, ...]


@dataclass(frozen=True)
class BytePiece:
    """Raw bytes emitted through byte fallback, opaque to merges."""

    data: bytes


Piece = CharPiece | BytePiece


def nfkc(text: str) -> str:
    return unicodedata.normalize("NFKC", text)


def split_pieces(text: str) -> list[Piece]:
    """Cut text into merge units.

    Each space becomes a WORD_MARK symbol that starts a new piece; literal
    WORD_MARK characters become standalone BytePieces.
    """
    pieces: list[Piece] = []
    current: list[str] = []

    def flush() -> None:
        if current:
            pieces.append(CharPiece(tuple(current)))
            current.clear()

    for ch in text:
        if ch == WORD_MARK:
            flush()
            pieces.append(BytePiece(_WORD_MARK_BYTES))
        elif ch == " ":
            flush()
            current.append(WORD_MARK)
        else:
            current.append(ch)
    flush()
    return pieces


def piece_to_text(piece: str) -> str:
    """Surface form of a vocabulary piece (marks back to spaces)."""
    return piece.replace(WORD_MARK, " ")
