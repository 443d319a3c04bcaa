from .codec import DecodeResult, Tokenizer
from .pretoken import WORD_MARK, nfkc, split_pieces
from .store import (
    load_merges,
    load_tokenizer,
    load_vocab,
    save_merges,
    save_tokenizer,
    save_vocab,
)
from .train import DEFAULT_SPECIALS, train_bpe
from .vocab import BYTE_PIECES, MergeRule, Vocabulary, build_vocabulary, validate_merges

__all__ = [
    "BYTE_PIECES",
    "DEFAULT_SPECIALS",
    "DecodeResult",
    "MergeRule",
    "Tokenizer",
    "Vocabulary",
    "WORD_MARK",
    "build_vocabulary",
    "load_merges",
    "load_tokenizer",
    "load_vocab",
    "nfkc",
    "save_merges",
    "save_tokenizer",
    "save_vocab",
    "split_pieces",
    "train_bpe",
    "validate_merges",
]
