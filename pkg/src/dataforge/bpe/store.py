"""On-disk formats for vocabularies and merge lists.

Vocabulary file: one-line header `#bpe-v1\tspecials=<n>`, then one
`<escaped-token>\t<score>` line per id (line order = id). Merge file:
`#bpe-v1` header, then `<left> <right>` per rank. Bytes outside printable
ASCII are \\xHH-escaped; backslash always, and space too inside merge
operands so the space delimiter stays unambiguous.
"""

from __future__ import annotations

import os
from typing import Sequence

from ..errors import ParseError
from .codec import Tokenizer
from .vocab import MergeRule, Vocabulary

HEADER = "#bpe-v1"

_HEX = "0123456789abcdefABCDEF"


def escape_token(data: bytes, escape_space: bool = False) -> str:
    out: list[str] = []
    for b in data:
        printable = 0x20 <= b <= 0x7E and b != 0x5C
        if printable and not (escape_space and b == 0x20):
            out.append(chr(b))
        else:
            out.append(f"\\x{b:02x}")
    return "".join(out)


def unescape_token(text: str, path: str, line: int) -> bytes:
    out = bytearray()
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 3 >= n or text[i + 1] != "x" or text[i + 2] not in _HEX or text[i + 3] not in _HEX:
                raise ParseError(f"bad escape sequence at column {i + 1}", path, line)
            out.append(int(text[i + 2 : i + 4], 16))
            i += 4
        else:
            out.extend(ch.encode("utf-8"))
            i += 1
    return bytes(out)


def save_vocab(path: str | os.PathLike, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{HEADER}\tspecials={vocab.num_specials}\n")
        for tid in range(len(vocab)):
            f.write(f"{escape_token(vocab.token_bytes(tid))}\t{vocab.score(tid)!r}\n")


def load_vocab(path: str | os.PathLike) -> Vocabulary:
    name = str(path)
    entries: list[tuple[bytes, float]] = []
    num_specials = 0
    with open(path, "r", encoding="utf-8", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if lineno == 1:
                fields = line.split("\t")
                if fields[0] != HEADER:
                    raise ParseError(f"expected {HEADER} header", name, lineno)
                for field in fields[1:]:
                    if field.startswith("specials="):
                        try:
                            num_specials = int(field.removeprefix("specials="))
                        except ValueError:
                            raise ParseError("bad specials count", name, lineno) from None
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(
                    f"expected <token>\\t<score>, got {len(fields)} fields", name, lineno
                )
            token = unescape_token(fields[0], name, lineno)
            try:
                score = float(fields[1])
            except ValueError:
                raise ParseError(f"bad score {fields[1]!r}", name, lineno) from None
            entries.append((token, score))
    return Vocabulary(entries, num_specials=num_specials)


def save_merges(path: str | os.PathLike, merges: Sequence[MergeRule]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{HEADER}\n")
        for rule in merges:
            left = escape_token(rule.left, escape_space=True)
            right = escape_token(rule.right, escape_space=True)
            f.write(f"{left} {right}\n")


def load_merges(path: str | os.PathLike) -> list[MergeRule]:
    name = str(path)
    merges: list[MergeRule] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if lineno == 1:
                if line.split("\t")[0] != HEADER:
                    raise ParseError(f"expected {HEADER} header", name, lineno)
                continue
            fields = line.split(" ")
            if len(fields) != 2:
                raise ParseError(
                    f"expected <left> <right>, got {len(fields)} fields", name, lineno
                )
            merges.append(
                MergeRule(
                    unescape_token(fields[0], name, lineno),
                    unescape_token(fields[1], name, lineno),
                )
            )
    return merges


def save_tokenizer(tok: Tokenizer, vocab_path: str | os.PathLike, merges_path: str | os.PathLike) -> None:
    save_vocab(vocab_path, tok.vocab)
    save_merges(merges_path, tok.merges)


def load_tokenizer(vocab_path: str | os.PathLike, merges_path: str | os.PathLike) -> Tokenizer:
    return Tokenizer(load_vocab(vocab_path), load_merges(merges_path))
