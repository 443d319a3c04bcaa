"""Token table and merge-rule list with invariant enforcement.

Layout produced by the trainer and expected everywhere else:
ids [0, S) are the special tokens, [S, S+256) the byte-fallback pieces
"<0x00>".."<0xFF>", and everything above is alphabet characters followed
by merge results. All byte sequences in the table are unique.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from ..errors import ValidationError

BYTE_PIECES: tuple[bytes, ...] = tuple(
    f"<0x{b:02X}>".encode("ascii") for b in range(256)
)


class MergeRule(NamedTuple):
    left: bytes
    right: bytes

    @property
    def result(self) -> bytes:
        return self.left + self.right


class Vocabulary:
    """Immutable ordered token table.

    Args:
        tokens: (bytes, score) per id, id = position, dense 0..N-1.
        num_specials: count of reserved leading ids.

    Raises:
        ValidationError: duplicate byte sequences, missing byte pieces,
            or specials overlapping the byte-piece block.
    """

    def __init__(self, tokens: Sequence[tuple[bytes, float]], num_specials: int):
        if num_specials < 0 or num_specials + 256 > len(tokens):
            raise ValidationError(
                f"vocabulary of size {len(tokens)} cannot hold {num_specials} "
                "specials plus 256 byte-fallback pieces"
            )
        self._bytes: tuple[bytes, ...] = tuple(b for b, _ in tokens)
        self._scores: tuple[float, ...] = tuple(float(s) for _, s in tokens)
        self.num_specials = num_specials

        self._id_of: dict[bytes, int] = {}
        for i, b in enumerate(self._bytes):
            if not isinstance(b, bytes):
                raise ValidationError(f"token {i} is not a byte sequence")
            if b in self._id_of:
                raise ValidationError(
                    f"duplicate token bytes {b!r} at ids {self._id_of[b]} and {i}"
                )
            self._id_of[b] = i

        for off, piece in enumerate(BYTE_PIECES):
            i = num_specials + off
            if self._bytes[i] != piece:
                raise ValidationError(
                    f"id {i} must be byte piece {piece!r}, found {self._bytes[i]!r}"
                )

        # piece string -> id for every token that is valid UTF-8 and not a
        # byte piece; this is the symbol table the codec matches against.
        self._piece_ids: dict[str, int] = {}
        fb_start = num_specials
        for i, b in enumerate(self._bytes):
            if fb_start <= i < fb_start + 256 or i < num_specials:
                continue
            try:
                self._piece_ids[b.decode("utf-8")] = i
            except UnicodeDecodeError as exc:
                raise ValidationError(
                    f"non-special token {i} is not valid UTF-8: {b!r}"
                ) from exc

    @classmethod
    def from_numbered(
        cls,
        entries: Iterable[tuple[int, bytes, float]],
        num_specials: int,
    ) -> "Vocabulary":
        """Build from explicit (id, bytes, score) triples.

        Raises:
            ValidationError: ids are not exactly 0..N-1 in order.
        """
        tokens: list[tuple[bytes, float]] = []
        for expected, (tid, b, score) in enumerate(entries):
            if tid != expected:
                raise ValidationError(
                    f"ids must be dense 0..N-1: expected {expected}, got {tid}"
                )
            tokens.append((b, score))
        return cls(tokens, num_specials=num_specials)

    # -- basics ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self._bytes)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self._bytes == other._bytes
            and self._scores == other._scores
            and self.num_specials == other.num_specials
        )

    def token_bytes(self, token_id: int) -> bytes:
        return self._bytes[token_id]

    def score(self, token_id: int) -> float:
        return self._scores[token_id]

    def id_of(self, token: bytes) -> int | None:
        return self._id_of.get(token)

    def piece_id(self, piece: str) -> int | None:
        """Id of a char-sequence token, never a special or byte piece."""
        return self._piece_ids.get(piece)

    def __contains__(self, token: bytes) -> bool:
        return token in self._id_of

    @property
    def tokens(self) -> tuple[bytes, ...]:
        return self._bytes

    @property
    def scores(self) -> tuple[float, ...]:
        return self._scores

    @property
    def specials(self) -> tuple[int, ...]:
        return tuple(range(self.num_specials))

    @property
    def byte_fallback_ids(self) -> tuple[int, ...]:
        return tuple(range(self.num_specials, self.num_specials + 256))

    def byte_id(self, byte: int) -> int:
        return self.num_specials + byte

    def is_byte_id(self, token_id: int) -> bool:
        return self.num_specials <= token_id < self.num_specials + 256

    def is_special_id(self, token_id: int) -> bool:
        return token_id < self.num_specials


def build_vocabulary(
    pieces: Iterable[str | bytes],
    specials: Sequence[str] = (),
    scores: Sequence[float] | None = None,
) -> Vocabulary:
    """Assemble a Vocabulary from specials + byte block + payload pieces.

    Convenience for constructing extension vocabularies without training.
    """
    payload = [p.encode("utf-8") if isinstance(p, str) else bytes(p) for p in pieces]
    if scores is not None and len(scores) != len(payload):
        raise ValidationError("scores length must match pieces length")
    entries: list[tuple[bytes, float]] = [(s.encode("utf-8"), 0.0) for s in specials]
    entries.extend((b, 0.0) for b in BYTE_PIECES)
    for i, b in enumerate(payload):
        entries.append((b, scores[i] if scores is not None else 0.0))
    return Vocabulary(entries, num_specials=len(specials))


def validate_merges(vocab: Vocabulary, merges: Sequence[MergeRule]) -> None:
    """Check that every merge result exists in the companion vocabulary."""
    for rank, rule in enumerate(merges):
        if rule.result not in vocab:
            raise ValidationError(
                f"merge rank {rank}: result {rule.result!r} missing from vocabulary"
            )
