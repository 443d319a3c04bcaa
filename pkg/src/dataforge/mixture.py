"""Weighted dataset-mixture specs and O(1) alias-method sampling.

Weights are percentages as published (their raw sum is preserved for
auditing, e.g. 99.98 for the bundled robot-manipulation mixture) and are
renormalized to a proper distribution before the Vose alias table is
built. Draws consume exactly two doubles from a PCG64 stream, so a
sampler restores mid-stream from (seed, draw_count) via advance().
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from typing import Iterator, Sequence

import numpy as np

from .errors import ParseError, ValidationError

SPEC_HEADER = "#mixture-v1"


@dataclass(frozen=True)
class MixtureSpec:
    names: tuple[str, ...]
    raw_weights: tuple[float, ...]
    declared_total: int | None = None

    def __post_init__(self):
        if not self.names:
            raise ValidationError("mixture spec has no entries")
        if len(self.names) != len(set(self.names)):
            dup = sorted({n for n in self.names if self.names.count(n) > 1})
            raise ValidationError(f"duplicate dataset names: {dup}")
        if any(w <= 0 for w in self.raw_weights):
            raise ValidationError("mixture weights must be positive")

    @property
    def raw_sum(self) -> float:
        return float(sum(self.raw_weights))

    @property
    def normalized_weights(self) -> tuple[float, ...]:
        total = self.raw_sum
        return tuple(w / total for w in self.raw_weights)

    def weight_of(self, name: str) -> float:
        return self.normalized_weights[self.names.index(name)]

    def __len__(self) -> int:
        return len(self.names)


def load_mixture_spec(path: str | os.PathLike) -> MixtureSpec:
    name = str(path)
    names: list[str] = []
    weights: list[float] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if lineno == 1:
                if line.split("\t")[0] != SPEC_HEADER:
                    raise ParseError(f"expected {SPEC_HEADER} header", name, lineno)
                continue
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(
                    f"expected <name>\\t<weight>, got {len(fields)} fields", name, lineno
                )
            try:
                weight = float(fields[1])
            except ValueError:
                raise ParseError(f"bad weight {fields[1]!r}", name, lineno) from None
            names.append(fields[0])
            weights.append(weight)
    return MixtureSpec(tuple(names), tuple(weights))


def save_mixture_spec(path: str | os.PathLike, spec: MixtureSpec) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{SPEC_HEADER}\n")
        for name, w in zip(spec.names, spec.raw_weights):
            f.write(f"{name}\t{w!r}\n")


def builtin_oxe_mixture() -> MixtureSpec:
    """The bundled 23-dataset robot-manipulation training mixture."""
    ref = resources.files("dataforge").joinpath("data/oxe_vla_mixture.tsv")
    with resources.as_file(ref) as path:
        return load_mixture_spec(path)


# -- alias table -------------------------------------------------------------


def build_alias_table(weights: Sequence[float]) -> tuple[list[float], list[int]]:
    """Vose's algorithm; returns (acceptance probabilities, alias indices)."""
    n = len(weights)
    total = float(sum(weights))
    scaled = [w * n / total for w in weights]
    prob = [0.0] * n
    alias = list(range(n))
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    for leftover in (large, small):
        while leftover:
            i = leftover.pop()
            prob[i] = 1.0
            alias[i] = i
    return prob, alias


def alias_reconstructed_weights(prob: Sequence[float], alias: Sequence[int]) -> list[float]:
    """Per-entry probability implied by an alias table (for verification)."""
    n = len(prob)
    out = [p / n for p in prob]
    for i, (p, a) in enumerate(zip(prob, alias)):
        if a != i:
            out[a] += (1.0 - p) / n
    return out


@dataclass
class SamplerState:
    """Serializable sampler position: (seed, draw_count) plus the table."""

    seed: int
    draw_count: int
    prob: tuple[float, ...]
    alias: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "draw_count": self.draw_count,
            "prob": list(self.prob),
            "alias": list(self.alias),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplerState":
        return cls(
            seed=int(d["seed"]),
            draw_count=int(d["draw_count"]),
            prob=tuple(float(p) for p in d["prob"]),
            alias=tuple(int(a) for a in d["alias"]),
        )


class MixtureSampler:
    """Deterministic with-replacement dataset sampler.

    Not thread-safe: each consumer owns its own sampler (derive one per
    stream from a distinct seed).
    """

    def __init__(self, spec: MixtureSpec, seed: int):
        self.spec = spec
        prob, alias = build_alias_table(spec.raw_weights)
        self._state = SamplerState(seed, 0, tuple(prob), tuple(alias))
        self._prob = np.array(prob, dtype=np.float64)
        self._alias = np.array(alias, dtype=np.int64)
        self._rng = np.random.Generator(np.random.PCG64(seed))

    @classmethod
    def restore(cls, spec: MixtureSpec, state: SamplerState) -> "MixtureSampler":
        sampler = cls(spec, state.seed)
        if state.prob != sampler._state.prob or state.alias != sampler._state.alias:
            raise ValidationError("sampler state does not match this mixture spec")
        sampler.skip(state.draw_count)
        return sampler

    @property
    def state(self) -> SamplerState:
        return SamplerState(
            self._state.seed,
            self._state.draw_count,
            self._state.prob,
            self._state.alias,
        )

    def skip(self, draws: int) -> None:
        """Advance past `draws` draws in O(1) without generating them."""
        if draws < 0:
            raise ValidationError("cannot skip a negative number of draws")
        bg = np.random.PCG64(self._state.seed)
        bg.advance(2 * (self._state.draw_count + draws))
        self._rng = np.random.Generator(bg)
        self._state.draw_count += draws

    def next(self) -> str:
        return self.spec.names[self.draw_indices(1)[0]]

    def draw(self, n: int) -> list[str]:
        return [self.spec.names[i] for i in self.draw_indices(n)]

    def draw_indices(self, n: int) -> np.ndarray:
        """Vectorized draws; consumes exactly 2n doubles from the stream."""
        u = self._rng.random(2 * n).reshape(n, 2)
        idx = np.minimum((u[:, 0] * len(self.spec)).astype(np.int64), len(self.spec) - 1)
        take_alias = u[:, 1] >= self._prob[idx]
        idx = np.where(take_alias, self._alias[idx], idx)
        self._state.draw_count += n
        return idx

    def __iter__(self) -> Iterator[str]:
        while True:
            yield self.next()
