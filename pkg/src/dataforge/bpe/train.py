"""BPE training.

Greedy pair merging over NFKC-normalized, word-marked unicode symbols.
Selection is deterministic: highest adjacent-pair frequency, ties broken
by lexicographically smallest (left, right). Counting is incremental with
a lazy max-heap; the recount-from-scratch reference lives in the test
suite and must agree merge for merge.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter
from typing import Iterable, Sequence

from ..errors import ValidationError
from .codec import Tokenizer, merge_adjacent
from .pretoken import CharPiece, nfkc, split_pieces
from .vocab import BYTE_PIECES, MergeRule, Vocabulary

DEFAULT_SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")

Pair = tuple[str, str]


def corpus_pieces(corpus: Iterable[str], normalize: bool = True) -> Counter:
    """Weighted multiset of symbol tuples for a document stream."""
    pieces: Counter = Counter()
    for doc in corpus:
        text = nfkc(doc) if normalize else doc
        for piece in split_pieces(text):
            if isinstance(piece, CharPiece):
                pieces[piece.symbols] += 1
    return pieces


def train_bpe(
    corpus: Iterable[str],
    target_vocab_size: int,
    specials: Sequence[str] = DEFAULT_SPECIALS,
    *,
    min_pair_frequency: int = 2,
) -> Tokenizer:
    """Train a tokenizer on a stream of documents.

    Args:
        corpus: text documents; consumed once.
        target_vocab_size: upper bound on the final vocabulary size; must
            be at least |specials| + 256 + initial alphabet size.
        specials: reserved tokens placed at ids 0..len(specials)-1.
        min_pair_frequency: stop merging below this pair frequency.

    Returns:
        Tokenizer whose vocabulary has size <= target_vocab_size and whose
        merge list is in selection order.

    Raises:
        ValidationError: empty corpus or target below the floor.
    """
    piece_weights = corpus_pieces(corpus)
    if not piece_weights:
        raise ValidationError("empty corpus: no text to train on")

    alphabet = sorted({sym for piece in piece_weights for sym in piece})
    floor = len(specials) + 256 + len(alphabet)
    if target_vocab_size < floor:
        raise ValidationError(
            f"target_vocab_size {target_vocab_size} below floor {floor} "
            f"({len(specials)} specials + 256 byte pieces + "
            f"{len(alphabet)} alphabet symbols)"
        )

    pieces: list[list[str]] = []
    weights: list[int] = []
    for symbols, weight in piece_weights.items():
        pieces.append(list(symbols))
        weights.append(weight)

    char_counts: Counter = Counter()
    for symbols, w in zip(pieces, weights):
        for sym in symbols:
            char_counts[sym] += w
    total_symbols = sum(char_counts.values())

    pair_counts: dict[Pair, int] = {}
    pair_pieces: dict[Pair, set[int]] = {}
    for idx, (symbols, w) in enumerate(zip(pieces, weights)):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] = pair_counts.get(pair, 0) + w
            pair_pieces.setdefault(pair, set()).add(idx)

    heap: list[tuple[int, str, str]] = [
        (-c, left, right) for (left, right), c in pair_counts.items()
    ]
    heapq.heapify(heap)

    # results that must never become merge outputs: their byte sequences
    # already mean something else in the id space
    forbidden = {s for s in specials} | {b.decode("ascii") for b in BYTE_PIECES}

    known_pieces = set(alphabet)
    merges: list[MergeRule] = []
    new_entries: list[tuple[str, float]] = []
    vocab_size = floor
    live_symbols = total_symbols

    while vocab_size < target_vocab_size and heap:
        neg_count, left, right = heapq.heappop(heap)
        count = -neg_count
        if pair_counts.get((left, right)) != count:
            continue  # stale heap entry
        if count < min_pair_frequency:
            break
        result = left + right
        if result in forbidden:
            continue

        merges.append(MergeRule(left.encode("utf-8"), right.encode("utf-8")))
        if result not in known_pieces:
            known_pieces.add(result)
            new_entries.append((result, math.log(count / live_symbols)))
            vocab_size += 1

        pair = (left, right)
        touched = sorted(pair_pieces.pop(pair, ()))
        for idx in touched:
            symbols = pieces[idx]
            w = weights[idx]
            rewritten = merge_adjacent(symbols, pair)
            if len(rewritten) == len(symbols):
                continue
            live_symbols -= (len(symbols) - len(rewritten)) * w
            old_pairs = Counter(zip(symbols, symbols[1:]))
            new_pairs = Counter(zip(rewritten, rewritten[1:]))
            pieces[idx] = rewritten
            for q in old_pairs.keys() | new_pairs.keys():
                delta = (new_pairs.get(q, 0) - old_pairs.get(q, 0)) * w
                if delta == 0:
                    continue
                updated = pair_counts.get(q, 0) + delta
                if updated > 0:
                    pair_counts[q] = updated
                    heapq.heappush(heap, (-updated, q[0], q[1]))
                else:
                    pair_counts.pop(q, None)
                if new_pairs.get(q, 0):
                    pair_pieces.setdefault(q, set()).add(idx)
        pair_counts.pop(pair, None)

    entries: list[tuple[bytes, float]] = [(s.encode("utf-8"), 0.0) for s in specials]
    entries.extend((b, 0.0) for b in BYTE_PIECES)
    for sym in alphabet:
        entries.append(
            (sym.encode("utf-8"), math.log(char_counts[sym] / total_symbols))
        )
    for piece_str, score in new_entries:
        entries.append((piece_str.encode("utf-8"), score))

    vocab = Vocabulary(entries, num_specials=len(specials))
    return Tokenizer(vocab, merges)
