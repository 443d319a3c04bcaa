import math

import numpy as np
import pytest
from scipy import stats

from dataforge.errors import ParseError, ValidationError
from dataforge.mixture import (
    MixtureSampler,
    MixtureSpec,
    SamplerState,
    alias_reconstructed_weights,
    build_alias_table,
    builtin_oxe_mixture,
    load_mixture_spec,
    save_mixture_spec,
)


def test_builtin_mixture_matches_published_table():
    spec = builtin_oxe_mixture()
    assert len(spec) == 23
    assert spec.names[0] == "CMU Franka Exploration"
    assert spec.raw_weights[0] == 12.35
    assert spec.names[-1] == "FurnitureBench"
    assert spec.raw_weights[-1] == 0.25
    assert spec.raw_sum == pytest.approx(99.98, abs=1e-9)
    assert spec.weight_of("CMU Franka Exploration") == pytest.approx(
        12.35 / 99.98, abs=1e-12
    )
    assert sum(spec.normalized_weights) == pytest.approx(1.0, abs=1e-12)


def test_single_entry_normalizes_to_one():
    spec = MixtureSpec(("only",), (100.0,))
    assert spec.normalized_weights == (1.0,)


def test_two_even_entries():
    spec = MixtureSpec(("a", "b"), (50.0, 50.0))
    assert spec.normalized_weights == (0.5, 0.5)


def test_duplicate_names_rejected():
    with pytest.raises(ValidationError, match="duplicate"):
        MixtureSpec(("a", "a"), (1.0, 2.0))


def test_non_positive_weight_rejected():
    with pytest.raises(ValidationError):
        MixtureSpec(("a", "b"), (1.0, 0.0))
    with pytest.raises(ValidationError):
        MixtureSpec(("a",), (-2.0,))


def test_spec_file_round_trip(tmp_path):
    spec = builtin_oxe_mixture()
    p = tmp_path / "mix.tsv"
    save_mixture_spec(p, spec)
    loaded = load_mixture_spec(p)
    assert loaded.names == spec.names
    assert loaded.raw_weights == spec.raw_weights


def test_spec_file_requires_header(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\t1.0\n")
    with pytest.raises(ParseError):
        load_mixture_spec(p)


# -- alias table -------------------------------------------------------------


def test_alias_table_reconstructs_weights_exactly():
    spec = builtin_oxe_mixture()
    prob, alias = build_alias_table(spec.raw_weights)
    rebuilt = alias_reconstructed_weights(prob, alias)
    for got, want in zip(rebuilt, spec.normalized_weights):
        assert abs(got - want) < 1e-12


def test_alias_table_handles_uniform_and_skewed():
    for weights in [(1.0, 1.0, 1.0, 1.0), (1e6, 1.0), (0.25,), (3.0, 1.0, 2.0)]:
        prob, alias = build_alias_table(weights)
        total = sum(weights)
        rebuilt = alias_reconstructed_weights(prob, alias)
        for got, w in zip(rebuilt, weights):
            assert abs(got - w / total) < 1e-12


# -- sampling ----------------------------------------------------------------


def test_single_dataset_always_drawn():
    sampler = MixtureSampler(MixtureSpec(("solo",), (100.0,)), seed=3)
    assert sampler.draw(50) == ["solo"] * 50


def test_same_seed_same_sequence():
    spec = builtin_oxe_mixture()
    a = MixtureSampler(spec, seed=42).draw(5000)
    b = MixtureSampler(spec, seed=42).draw(5000)
    assert a == b


def test_different_seeds_differ():
    spec = builtin_oxe_mixture()
    assert MixtureSampler(spec, seed=1).draw(100) != MixtureSampler(spec, seed=2).draw(100)


def test_batched_and_single_draws_agree():
    spec = builtin_oxe_mixture()
    batched = MixtureSampler(spec, seed=9).draw(200)
    s = MixtureSampler(spec, seed=9)
    one_by_one = [s.next() for _ in range(200)]
    assert batched == one_by_one


def test_state_round_trip_continues_stream():
    spec = builtin_oxe_mixture()
    full = MixtureSampler(spec, seed=7).draw(1000)

    s = MixtureSampler(spec, seed=7)
    s.draw(400)
    state = SamplerState.from_dict(s.state.to_dict())
    resumed = MixtureSampler.restore(spec, state)
    assert resumed.draw(600) == full[400:]


def test_skip_matches_generated_prefix():
    spec = builtin_oxe_mixture()
    full = MixtureSampler(spec, seed=11).draw(500)
    s = MixtureSampler(spec, seed=11)
    s.skip(250)
    assert s.draw(250) == full[250:]


def test_restore_rejects_wrong_spec():
    state = MixtureSampler(builtin_oxe_mixture(), seed=0).state
    with pytest.raises(ValidationError):
        MixtureSampler.restore(MixtureSpec(("a", "b"), (1.0, 1.0)), state)


def test_empirical_frequencies_within_three_sigma():
    spec = builtin_oxe_mixture()
    n = 200_000
    idx = MixtureSampler(spec, seed=1).draw_indices(n)
    counts = np.bincount(idx, minlength=len(spec))
    for i, p in enumerate(spec.normalized_weights):
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(counts[i] / n - p) <= 3 * sigma, spec.names[i]


def test_chi_squared_goodness_of_fit():
    spec = builtin_oxe_mixture()
    n = 1_000_000
    idx = MixtureSampler(spec, seed=5).draw_indices(n)
    counts = np.bincount(idx, minlength=len(spec))
    expected = np.array(spec.normalized_weights) * n
    _, p_value = stats.chisquare(counts, expected)
    assert p_value >= 0.001
