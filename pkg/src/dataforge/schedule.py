"""Deterministic epoch scheduling and record-stream composition."""

from __future__ import annotations

import os
from typing import Iterator, Mapping

import numpy as np

from .errors import ValidationError
from .mixture import MixtureSampler, MixtureSpec


def epoch_permutation(record_count: int, epoch: int, seed: int) -> np.ndarray:
    """Uniform permutation of 0..record_count-1 seeded by (seed, epoch)."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, epoch])))
    return rng.permutation(record_count).astype(np.int64)


def epoch_plan(record_count: int, epochs: int, seed: int) -> np.ndarray:
    """Concatenated per-epoch permutations; every index appears `epochs` times.

    Raises:
        ValidationError: record_count < 1 or epochs < 1.
    """
    if record_count < 1:
        raise ValidationError("record_count must be >= 1")
    if epochs < 1:
        raise ValidationError("epochs must be >= 1")
    return np.concatenate(
        [epoch_permutation(record_count, e, seed) for e in range(epochs)]
    )


def write_index_stream(path: str | os.PathLike, indices: np.ndarray) -> None:
    """Little-endian int64 on disk."""
    np.asarray(indices, dtype=np.int64).astype("<i8").tofile(path)


def read_index_stream(path: str | os.PathLike) -> np.ndarray:
    return np.fromfile(path, dtype="<i8").astype(np.int64)


def mixture_stream(
    spec: MixtureSpec,
    record_counts: Mapping[str, int],
    seed: int,
) -> Iterator[tuple[str, int]]:
    """(dataset, record index) pairs: alias draw picks the dataset, the
    record comes from that dataset's own epoch stream (fresh permutation
    per exhausted epoch)."""
    for name in spec.names:
        if name not in record_counts:
            raise ValidationError(f"no record count for dataset {name!r}")
        if record_counts[name] < 1:
            raise ValidationError(f"dataset {name!r} has no records")
    sampler = MixtureSampler(spec, seed)
    cursors: dict[str, tuple[int, np.ndarray, int]] = {}  # name -> (epoch, perm, pos)
    while True:
        name = sampler.next()
        epoch, perm, pos = cursors.get(name, (0, None, 0))
        if perm is None or pos >= len(perm):
            if perm is not None:
                epoch += 1
            perm = epoch_permutation(record_counts[name], epoch, seed)
            pos = 0
        cursors[name] = (epoch, perm, pos + 1)
        yield name, int(perm[pos])
