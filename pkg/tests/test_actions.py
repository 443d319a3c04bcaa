import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dataforge.actions import (
    AUTOREGRESSIVE,
    PARALLEL,
    ActionChunk,
    LatencyModel,
    NormStats,
    Trajectory,
    chunk_trajectory,
    decode_latency,
    denormalize,
    fit_norm_stats,
    jitter,
    load_trajectory,
    normalize,
    reassemble,
    save_trajectory,
)
from dataforge.errors import ParseError, ValidationError


def traj(rows, dt=1.0):
    return Trajectory(actions=np.asarray(rows, dtype=float), dt=dt)


# -- Trajectory validation ----------------------------------------------------


def test_trajectory_rejects_bad_shapes_and_values():
    with pytest.raises(ValidationError):
        Trajectory(actions=np.zeros((0, 3)))
    with pytest.raises(ValidationError):
        Trajectory(actions=np.zeros(5))
    with pytest.raises(ValidationError):
        traj([[np.nan, 1.0]])
    with pytest.raises(ValidationError):
        traj([[1.0]], dt=0.0)


def test_trajectory_binary_round_trip(tmp_path):
    t = traj(np.arange(12.0).reshape(4, 3), dt=0.05)
    p = tmp_path / "t.traj"
    save_trajectory(p, t)
    loaded = load_trajectory(p)
    assert np.array_equal(loaded.actions, t.actions)
    assert loaded.dt == t.dt


def test_trajectory_file_rejects_bad_magic(tmp_path):
    p = tmp_path / "bad.traj"
    p.write_bytes(b"not-traj" + b"\x00" * 24)
    with pytest.raises(ParseError):
        load_trajectory(p)


# -- normalization ------------------------------------------------------------


def test_percentiles_match_sorting_oracle():
    values = np.arange(101.0).reshape(-1, 1)  # 0..100 evenly spaced
    stats = fit_norm_stats([values])
    assert stats.q_low[0] == 1.0
    assert stats.q_high[0] == 99.0


def test_constant_dimension_flagged_degenerate():
    stats = fit_norm_stats([np.ones((10, 1))])
    assert stats.degenerate.tolist() == [True]
    with pytest.raises(ValidationError):
        normalize(np.ones((2, 1)), stats)


def test_dimensions_fit_independently():
    rng = np.random.default_rng(0)
    a = rng.uniform(-5, 5, size=(500, 1))
    b = rng.uniform(100, 200, size=(500, 1))
    stats = fit_norm_stats([np.hstack([a, b])])
    assert stats.q_low[0] == pytest.approx(np.percentile(a, 1))
    assert stats.q_high[1] == pytest.approx(np.percentile(b, 99))
    assert not stats.degenerate.any()


def test_empty_fit_rejected():
    with pytest.raises(ValidationError):
        fit_norm_stats([])


def symmetric_stats():
    return NormStats(q_low=np.array([-2.0]), q_high=np.array([2.0]), count=100)


def test_normalize_symmetry_and_clipping():
    stats = symmetric_stats()
    assert normalize(np.array([[0.0]]), stats)[0, 0] == 0.0
    assert normalize(np.array([[2.0]]), stats)[0, 0] == 1.0
    assert normalize(np.array([[3.0]]), stats)[0, 0] == 1.0  # clipped
    assert normalize(np.array([[-3.0]]), stats)[0, 0] == -1.0


def test_round_trip_in_range_values():
    stats = symmetric_stats()
    values = np.linspace(-2.0, 2.0, 41).reshape(-1, 1)
    back = denormalize(normalize(values, stats), stats)
    assert np.max(np.abs(back - values)) <= 1e-12


def test_clipped_values_idempotent_under_renormalization():
    stats = symmetric_stats()
    once = normalize(np.array([[5.0]]), stats)
    # re-normalizing the denormalized clipped value changes nothing
    again = normalize(denormalize(once, stats), stats)
    assert np.array_equal(once, again)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-2.0, max_value=2.0, allow_nan=False))
def test_round_trip_property(x):
    stats = symmetric_stats()
    back = denormalize(normalize(np.array([[x]]), stats), stats)
    assert abs(back[0, 0] - x) <= 1e-12


# -- chunking -----------------------------------------------------------------


def test_single_chunk_when_t_equals_k():
    t = traj(np.arange(8.0).reshape(4, 2))
    chunks = chunk_trajectory(t, k=4)
    assert len(chunks) == 1
    assert chunks[0].origin == 0
    assert np.array_equal(chunks[0].chunk, t.actions)


def test_pad_with_last_policy():
    t = traj(np.arange(20.0).reshape(10, 2))
    chunks = chunk_trajectory(t, k=4, stride=4)
    assert len(chunks) == 3
    last = chunks[2].chunk
    assert np.array_equal(last[:2], t.actions[8:])
    assert np.array_equal(last[2], t.actions[-1])
    assert np.array_equal(last[3], t.actions[-1])


def test_zero_padding_policy():
    t = traj(np.ones((3, 2)))
    chunks = chunk_trajectory(t, k=2, stride=2, padding="zero")
    assert np.array_equal(chunks[-1].chunk[-1], np.zeros(2))


def test_stride_greater_than_k_rejected():
    t = traj(np.ones((6, 1)))
    with pytest.raises(ValidationError):
        chunk_trajectory(t, k=2, stride=3)


def test_reassemble_exact_inverse_when_k_divides_t():
    rng = np.random.default_rng(1)
    t = traj(rng.normal(size=(12, 3)), dt=0.1)
    chunks = chunk_trajectory(t, k=4)
    back = reassemble(chunks, k=4, dt=t.dt)
    assert np.array_equal(back.actions, t.actions)
    assert back.dt == t.dt


def test_reassemble_reproduces_padded_trajectory():
    t = traj(np.arange(10.0).reshape(10, 1))
    chunks = chunk_trajectory(t, k=4, stride=4)
    back = reassemble(chunks, k=4)
    assert back.length == 12
    assert np.array_equal(back.actions[:10], t.actions)
    assert np.array_equal(back.actions[10:], np.full((2, 1), 9.0))


def test_reassemble_averages_overlaps():
    c0 = ActionChunk(chunk=np.zeros((2, 1)), origin=0)
    c1 = ActionChunk(chunk=np.ones((2, 1)), origin=1)
    back = reassemble([c0, c1], k=2, stride=1)
    assert back.actions[1, 0] == 0.5


def test_random_chunk_reassemble_inverses():
    rng = np.random.default_rng(7)
    for _ in range(50):
        k = int(rng.integers(1, 9))
        t_len = k * int(rng.integers(1, 7))
        d = int(rng.integers(1, 5))
        t = traj(rng.normal(size=(t_len, d)))
        back = reassemble(chunk_trajectory(t, k=k), k=k)
        assert np.array_equal(back.actions, t.actions)


# -- jitter --------------------------------------------------------------------


def test_jitter_zero_for_constant_and_linear():
    assert jitter(traj(np.ones((10, 3)))) == 0.0
    ramp = np.linspace(0, 9, 10).reshape(-1, 1) @ np.ones((1, 2))
    assert jitter(traj(ramp)) == 0.0


def test_jitter_alternating_sequence():
    assert jitter(traj([[0.0], [1.0], [0.0], [1.0]])) == 2.0


def test_jitter_requires_three_steps():
    with pytest.raises(ValidationError):
        jitter(traj([[0.0], [1.0]]))


def test_jitter_affine_invariance():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(40, 2))
    base = jitter(traj(x))
    assert jitter(traj(3.5 * x + 7.0)) == pytest.approx(3.5 * base)
    assert jitter(traj(-2.0 * x - 1.0)) == pytest.approx(2.0 * base)


def test_noise_increases_jitter():
    steps = np.linspace(0, 2 * np.pi, 200)
    clean = np.sin(steps).reshape(-1, 1)
    base = jitter(traj(clean))
    rng = np.random.default_rng(11)
    for _ in range(20):
        noisy = clean + 0.1 * rng.normal(size=clean.shape)
        assert jitter(traj(noisy)) > base


# -- latency -------------------------------------------------------------------


def test_latency_equal_when_single_token():
    model = LatencyModel(cost_per_token=0.01, parallel_overhead=1.0)
    assert decode_latency(model, 1, 1, AUTOREGRESSIVE) == decode_latency(
        model, 1, 1, PARALLEL
    )


def test_latency_example_values():
    model = LatencyModel(cost_per_token=0.010, parallel_overhead=1.2)
    assert decode_latency(model, 8, 7, AUTOREGRESSIVE) == pytest.approx(0.560)
    assert decode_latency(model, 8, 7, PARALLEL) == pytest.approx(0.012)


def test_parallel_beats_autoregressive_beyond_overhead():
    model = LatencyModel(cost_per_token=0.002, parallel_overhead=1.5)
    for k in range(1, 12):
        for d in range(1, 9):
            ar = decode_latency(model, k, d, AUTOREGRESSIVE)
            par = decode_latency(model, k, d, PARALLEL)
            if k * d > model.parallel_overhead:
                assert par < ar


def test_latency_monotone_in_k_and_d():
    model = LatencyModel(cost_per_token=0.01)
    ar = [decode_latency(model, k, 7, AUTOREGRESSIVE) for k in range(1, 10)]
    assert all(a < b for a, b in zip(ar, ar[1:]))
    par = [decode_latency(model, k, 7, PARALLEL) for k in range(1, 10)]
    assert len(set(par)) == 1


def test_per_step_latency():
    model = LatencyModel(cost_per_token=0.01, parallel_overhead=2.0)
    assert decode_latency(model, 8, 7, PARALLEL, per_step=True) == pytest.approx(
        0.02 / 8
    )


def test_latency_model_validation():
    with pytest.raises(ValidationError):
        LatencyModel(cost_per_token=0.0)
    with pytest.raises(ValidationError):
        LatencyModel(cost_per_token=0.01, parallel_overhead=0.5)
    model = LatencyModel(cost_per_token=0.01)
    with pytest.raises(ValidationError):
        decode_latency(model, 0, 1, AUTOREGRESSIVE)
    with pytest.raises(ValidationError):
        decode_latency(model, 1, 1, "speculative")


def test_latency_mode_lives_on_the_model_too():
    model = LatencyModel(cost_per_token=0.01, parallel_overhead=2.0, mode=PARALLEL)
    assert decode_latency(model, 8, 7) == decode_latency(model, 8, 7, PARALLEL)
    with pytest.raises(ValidationError):
        LatencyModel(cost_per_token=0.01, mode="speculative")
