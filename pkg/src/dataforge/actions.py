"""Action-trajectory utilities for chunked parallel decoding.

Covers the data-side semantics of chunked policy fine-tuning: percentile
normalization into [-1, 1], trajectory chunking and reassembly, a
second-difference jitter metric, and a transparent latency model
contrasting one-pass chunk decoding with per-token autoregression.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParseError, ValidationError

TRAJ_MAGIC = b"#traj-v1"

PAD_REPEAT_LAST = "repeat-last"
PAD_ZERO = "zero"
PADDING_POLICIES = (PAD_REPEAT_LAST, PAD_ZERO)


@dataclass(frozen=True)
class Trajectory:
    actions: np.ndarray  # (T, D) float64
    dt: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.actions, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"actions must be a T x D matrix, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("actions contain non-finite values")
        if self.dt <= 0:
            raise ValidationError("timestep duration must be positive")
        object.__setattr__(self, "actions", arr)

    @property
    def length(self) -> int:
        return self.actions.shape[0]

    @property
    def dims(self) -> int:
        return self.actions.shape[1]


@dataclass(frozen=True)
class ActionChunk:
    chunk: np.ndarray  # (K, D)
    origin: int

    def __post_init__(self):
        arr = np.asarray(self.chunk, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValidationError(f"chunk must be a K x D matrix, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("chunk contains non-finite values")
        object.__setattr__(self, "chunk", arr)


def save_trajectory(path: str | os.PathLike, traj: Trajectory) -> None:
    """Binary layout: magic, u64 T, u64 D, f64 dt, then row-major f64."""
    with open(path, "wb") as f:
        f.write(TRAJ_MAGIC)
        f.write(struct.pack("<QQd", traj.length, traj.dims, traj.dt))
        f.write(traj.actions.astype("<f8").tobytes(order="C"))


def load_trajectory(path: str | os.PathLike) -> Trajectory:
    name = str(path)
    with open(path, "rb") as f:
        magic = f.read(len(TRAJ_MAGIC))
        if magic != TRAJ_MAGIC:
            raise ParseError(f"expected {TRAJ_MAGIC!r} magic", name, 1)
        header = f.read(24)
        if len(header) != 24:
            raise ParseError("truncated header", name, 1)
        t, d, dt = struct.unpack("<QQd", header)
        payload = f.read()
    expected = t * d * 8
    if len(payload) != expected:
        raise ParseError(
            f"expected {expected} payload bytes, got {len(payload)}", name, 1
        )
    actions = np.frombuffer(payload, dtype="<f8").reshape(t, d).astype(np.float64)
    return Trajectory(actions=actions, dt=dt)


# -- normalization -----------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Per-dimension 1st/99th percentile bounds for affine normalization."""

    q_low: np.ndarray
    q_high: np.ndarray
    count: int

    @property
    def degenerate(self) -> np.ndarray:
        return ~(self.q_low < self.q_high)

    def to_lines(self) -> list[str]:
        return [
            f"{lo!r}\t{hi!r}" for lo, hi in zip(self.q_low.tolist(), self.q_high.tolist())
        ]


def fit_norm_stats(
    trajectories: Sequence[Trajectory] | Sequence[np.ndarray],
) -> NormStats:
    """Empirical 1st/99th percentiles per action dimension.

    Degenerate dimensions (no spread between the percentiles) are kept
    but flagged; using them in normalize() is an error.
    """
    arrays = [
        t.actions if isinstance(t, Trajectory) else np.asarray(t, dtype=np.float64)
        for t in trajectories
    ]
    if not arrays:
        raise ValidationError("no trajectories to fit")
    stacked = np.concatenate(arrays, axis=0)
    if stacked.size == 0:
        raise ValidationError("no samples to fit")
    q_low = np.percentile(stacked, 1, axis=0)
    q_high = np.percentile(stacked, 99, axis=0)
    return NormStats(q_low=q_low, q_high=q_high, count=stacked.shape[0])


def normalize(actions: np.ndarray, stats: NormStats) -> np.ndarray:
    """Affine map sending q_low to -1 and q_high to +1, clipped to [-1, 1]."""
    arr = np.asarray(actions, dtype=np.float64)
    if np.any(stats.degenerate):
        bad = np.flatnonzero(stats.degenerate).tolist()
        raise ValidationError(f"degenerate dimensions cannot be normalized: {bad}")
    scaled = 2.0 * (arr - stats.q_low) / (stats.q_high - stats.q_low) - 1.0
    return np.clip(scaled, -1.0, 1.0)


def denormalize(actions: np.ndarray, stats: NormStats) -> np.ndarray:
    arr = np.asarray(actions, dtype=np.float64)
    if np.any(stats.degenerate):
        bad = np.flatnonzero(stats.degenerate).tolist()
        raise ValidationError(f"degenerate dimensions cannot be denormalized: {bad}")
    return stats.q_low + (arr + 1.0) * (stats.q_high - stats.q_low) / 2.0


# -- chunking ----------------------------------------------------------------


def chunk_trajectory(
    traj: Trajectory,
    k: int,
    stride: int | None = None,
    padding: str = PAD_REPEAT_LAST,
) -> list[ActionChunk]:
    """Cut a trajectory into K-step chunks every `stride` steps.

    stride defaults to k (non-overlapping). Chunks reaching past the end
    are padded per policy: repeat-last copies the final action, zero pads
    with zeros.
    """
    if k < 1:
        raise ValidationError("chunk size k must be >= 1")
    stride = k if stride is None else stride
    if stride < 1:
        raise ValidationError("stride must be >= 1")
    if stride > k:
        raise ValidationError(f"stride {stride} > chunk size {k} would drop steps")
    if padding not in PADDING_POLICIES:
        raise ValidationError(f"unknown padding policy {padding!r}")

    actions = traj.actions
    t = traj.length
    chunks: list[ActionChunk] = []
    for origin in range(0, t, stride):
        window = actions[origin : origin + k]
        short = k - window.shape[0]
        if short > 0:
            if padding == PAD_REPEAT_LAST:
                pad = np.repeat(actions[-1:], short, axis=0)
            else:
                pad = np.zeros((short, traj.dims))
            window = np.concatenate([window, pad], axis=0)
        chunks.append(ActionChunk(chunk=window, origin=origin))
    return chunks


def reassemble(
    chunks: Sequence[ActionChunk], k: int, stride: int | None = None, dt: float = 1.0
) -> Trajectory:
    """Inverse of chunk_trajectory up to tail padding.

    With stride == k the chunks tile the timeline and concatenation is
    exact; overlapping chunks (stride < k) average their contributions.
    """
    if not chunks:
        raise ValidationError("no chunks to reassemble")
    stride = k if stride is None else stride
    if stride > k:
        raise ValidationError(f"stride {stride} > chunk size {k}")
    for c in chunks:
        if c.chunk.shape[0] != k:
            raise ValidationError(
                f"chunk at origin {c.origin} has {c.chunk.shape[0]} rows, expected {k}"
            )
    total = max(c.origin for c in chunks) + k
    dims = chunks[0].chunk.shape[1]
    acc = np.zeros((total, dims))
    hits = np.zeros(total)
    for c in chunks:
        acc[c.origin : c.origin + k] += c.chunk
        hits[c.origin : c.origin + k] += 1.0
    if np.any(hits == 0):
        raise ValidationError("chunks do not cover the timeline")
    return Trajectory(actions=acc / hits[:, None], dt=dt)


# -- jitter ------------------------------------------------------------------


def jitter(traj: Trajectory) -> float:
    """Mean Euclidean norm of the discrete second difference.

    Zero for constant and linear trajectories; scales with |a| under
    affine maps a*x + b.
    """
    if traj.length < 3:
        raise ValidationError(f"jitter needs T >= 3, got T={traj.length}")
    a = traj.actions
    second = a[2:] - 2.0 * a[1:-1] + a[:-2]
    return float(np.mean(np.linalg.norm(second, axis=1)))


# -- latency model -----------------------------------------------------------

AUTOREGRESSIVE = "autoregressive"
PARALLEL = "parallel"
DECODE_MODES = (AUTOREGRESSIVE, PARALLEL)


@dataclass(frozen=True)
class LatencyModel:
    """Per-token decode cost; a parallel pass emits a whole chunk at once."""

    cost_per_token: float
    parallel_overhead: float = 1.0
    mode: str = AUTOREGRESSIVE

    def __post_init__(self):
        if self.cost_per_token <= 0:
            raise ValidationError("cost_per_token must be positive")
        if self.parallel_overhead < 1.0:
            raise ValidationError("parallel_overhead must be >= 1")
        if self.mode not in DECODE_MODES:
            raise ValidationError(f"mode must be one of {DECODE_MODES}, got {self.mode!r}")


def decode_latency(
    model: LatencyModel,
    k: int,
    dims: int,
    mode: str | None = None,
    per_step: bool = False,
) -> float:
    """Seconds to decode one K x D action chunk (or per control step).

    mode overrides the model's own when given.
    """
    if k < 1 or dims < 1:
        raise ValidationError("k and dims must be >= 1")
    mode = model.mode if mode is None else mode
    if mode == AUTOREGRESSIVE:
        total = k * dims * model.cost_per_token
    elif mode == PARALLEL:
        total = model.parallel_overhead * model.cost_per_token
    else:
        raise ValidationError(f"unknown decode mode {mode!r}")
    return total / k if per_step else total
