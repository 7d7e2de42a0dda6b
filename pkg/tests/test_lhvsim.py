import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wigner.lhvsim_functions import (
    SymbolDistribution,
    adversarial_hvm,
    balanced_adversarial_hvm,
    coincidence_probability,
    distribution_from_json,
    distribution_to_json,
    efa_mixture,
    efa_mixture_biased,
    extended_inequality,
    merge_montecarlo,
    montecarlo_shard,
    random_distribution,
    random_distributions,
    raw_bound_check,
    singles_profile,
    substituted_residual_weights,
)
from wigner.symbolcore_functions import SettingPair, one_step_neighbors, parse_symbol, perfect_symbols
from wigner.utils import ValidationError

UNIFORM_BASE = np.full(8, 1 / 8)

weight_vectors = st.lists(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_subnormal=False),
    min_size=64, max_size=64,
).filter(lambda w: sum(w) > 1e-3)

base_vectors = st.lists(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_subnormal=False),
    min_size=8, max_size=8,
).filter(lambda w: sum(w) > 1e-3)

epsilons = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def normalized(values):
    w = np.asarray(values)
    return w / w.sum()


def test_distribution_rejects_bad_weights():
    with pytest.raises(ValidationError):
        SymbolDistribution(np.full(64, 0.5))
    with pytest.raises(ValidationError):
        SymbolDistribution(np.full(32, 1 / 32))
    w = np.zeros(64)
    w[0], w[1] = 1.5, -0.5
    with pytest.raises(ValidationError):
        SymbolDistribution(w)


def test_distribution_weights_are_read_only():
    d = SymbolDistribution.uniform(perfect_symbols())
    with pytest.raises(ValueError):
        d.weights[0] = 1.0


def test_uniform_perfect_mixture_satisfies_inequality():
    d = SymbolDistribution.uniform(perfect_symbols())
    ev = extended_inequality(d)
    assert ev.p13 == pytest.approx(0.25, abs=1e-12)
    assert ev.p12 == pytest.approx(0.25, abs=1e-12)
    assert ev.p23 == pytest.approx(0.25, abs=1e-12)
    assert ev.p11 == 0.0
    assert ev.satisfied
    assert singles_profile(d) == pytest.approx((0.5,) * 6, abs=1e-12)


def test_point_mass_on_residual_symbol_violates():
    d = SymbolDistribution.point(parse_symbol("(+--,--+)"))
    ev = extended_inequality(d)
    assert (ev.p13, ev.p12, ev.p23, ev.p11) == (1.0, 0.0, 0.0, 0.0)
    assert not ev.satisfied
    assert ev.margin == 1.0


@settings(max_examples=200)
@given(weight_vectors)
def test_raw_bound_holds_for_any_distribution(values):
    assert raw_bound_check(SymbolDistribution(normalized(values))).holds


@settings(max_examples=200)
@given(base_vectors, epsilons)
def test_efa_mixtures_never_violate(values, epsilon):
    d = efa_mixture(normalized(values), epsilon)
    ev = extended_inequality(d)
    assert ev.satisfied
    assert ev.margin <= 1e-12


def test_efa_mixture_with_uniform_base_has_flat_singles():
    d = efa_mixture(UNIFORM_BASE, 0.3)
    assert singles_profile(d) == pytest.approx((0.5,) * 6, abs=1e-12)


def test_efa_mixture_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        efa_mixture(UNIFORM_BASE, 1.5)
    with pytest.raises(ValidationError):
        efa_mixture(np.full(8, 0.2), 0.1)
    with pytest.raises(ValidationError):
        efa_mixture(np.full(7, 1 / 7), 0.1)


@given(base_vectors, epsilons)
def test_balanced_biased_mixture_is_the_plain_mixture(values, epsilon):
    base = normalized(values)
    plain = efa_mixture(base, epsilon)
    biased = efa_mixture_biased(base, epsilon, 0.5)
    np.testing.assert_allclose(biased.weights, plain.weights, atol=1e-15)


def test_biased_mixture_rejects_bad_loss_fraction():
    with pytest.raises(ValidationError):
        efa_mixture_biased(UNIFORM_BASE, 0.1, 1.2)


def test_substituted_forms_agree_under_uniform_efa():
    weights = substituted_residual_weights(efa_mixture(UNIFORM_BASE, 0.4))
    assert weights["S"] == pytest.approx(2 * 0.4 / 48, abs=1e-15)
    assert weights["form_1"] == pytest.approx(weights["S"], abs=1e-15)
    assert weights["form_2"] == pytest.approx(weights["S"], abs=1e-15)


@given(weight_vectors)
def test_substituted_forms_are_bounded_by_p11(values):
    weights = substituted_residual_weights(SymbolDistribution(normalized(values)))
    assert weights["form_1"] <= weights["p11"] + 1e-12
    assert weights["form_2"] <= weights["p11"] + 1e-12


def test_adversarial_hvm_spikes_alice_one_and_bob_three():
    d, profile = adversarial_hvm(0.2)
    assert profile == pytest.approx((0.6, 0.4, 0.4, 0.4, 0.4, 0.6), abs=1e-12)
    a1, b3 = profile[0], profile[5]
    others = profile[1:5]
    assert all(a1 > p and b3 > p for p in others)
    assert extended_inequality(d).margin == pytest.approx(0.0, abs=1e-12)


def test_adversarial_hvm_violates_for_large_extra():
    d, _ = adversarial_hvm(0.5)
    ev = extended_inequality(d)
    assert ev.margin == pytest.approx(0.375, abs=1e-12)
    assert not ev.satisfied


def test_balancing_act_flattens_singles_but_shows_in_p22():
    result = balanced_adversarial_hvm(0.2)
    assert result["singles_profile"] == pytest.approx((0.4,) * 6, abs=1e-12)
    assert result["same_setting"] == pytest.approx((0.0, 0.2, 0.0), abs=1e-12)
    assert result["evaluation"].margin == pytest.approx(-0.25 + 1.75 * 0.2, abs=1e-12)
    assert not result["evaluation"].satisfied


def test_balancing_act_below_threshold_is_satisfied():
    assert balanced_adversarial_hvm(0.1)["evaluation"].satisfied
    with pytest.raises(ValidationError):
        balanced_adversarial_hvm(0.5)


def test_distribution_json_round_trip_keeps_weights():
    d = efa_mixture(UNIFORM_BASE, 0.25)
    data = distribution_to_json(d)
    assert len(data) == 32
    np.testing.assert_array_equal(distribution_from_json(data).weights, d.weights)


def test_random_distribution_is_reproducible():
    a = random_distribution(7, index=3)
    b = random_distribution(7, index=3)
    np.testing.assert_array_equal(a.weights, b.weights)
    assert not np.array_equal(a.weights, random_distribution(8, index=3).weights)


def test_random_draws_do_not_depend_on_batch_start():
    full = random_distributions(11, 0, 10)
    tail = random_distributions(11, 5, 5)
    np.testing.assert_allclose(full[5:], tail, rtol=0, atol=1e-15)


def test_random_seed_must_fit_in_64_bits():
    with pytest.raises(ValidationError):
        random_distributions(-1, 0, 1)


def test_coincidence_probability_of_uniform_over_all_symbols():
    d = SymbolDistribution(np.full(64, 1 / 64))
    assert coincidence_probability(d, SettingPair(2, 2)) == pytest.approx(0.25, abs=1e-12)


def test_montecarlo_has_no_failures():
    summary = merge_montecarlo([montecarlo_shard(20140101, start, 25_000) for start in range(0, 100_000, 25_000)])
    assert summary["samples"] == 100_000
    assert summary["raw_failures"] == 0
    assert summary["efa_failures"] == 0
    assert summary["efa_max_margin"] <= 1e-12


def test_montecarlo_shards_merge_to_the_unsharded_run():
    whole = merge_montecarlo([montecarlo_shard(3, 0, 1000)])
    parts = merge_montecarlo([montecarlo_shard(3, 500, 500), montecarlo_shard(3, 0, 500)])
    assert parts["samples"] == whole["samples"]
    assert parts["raw_failures"] == whole["raw_failures"]
    assert parts["efa_failures"] == whole["efa_failures"]
    assert parts["raw_max_slack"] == pytest.approx(whole["raw_max_slack"], abs=1e-15)
    assert parts["efa_max_margin"] == pytest.approx(whole["efa_max_margin"], abs=1e-15)


def test_merge_rejects_overlapping_shards():
    with pytest.raises(ValidationError):
        merge_montecarlo([montecarlo_shard(3, 0, 10), montecarlo_shard(3, 5, 10)])


def test_efa_mixture_spreads_epsilon_over_the_six_neighbors():
    base_symbol = parse_symbol("(+--,-++)")
    base = np.zeros(8)
    base[perfect_symbols().index(base_symbol)] = 1.0
    d = efa_mixture(base, 0.6)
    neighbors = one_step_neighbors(base_symbol)
    assert len(neighbors) == 6
    for s in neighbors:
        assert d.weights[s.code] == pytest.approx(0.1, abs=1e-15)
    assert d.weights[base_symbol.code] == pytest.approx(0.4, abs=1e-15)


def test_distinct_seeds_give_distinct_distributions():
    for seed in range(100):
        a = random_distribution(seed).weights
        b = random_distribution(seed + 100).weights
        assert not np.array_equal(a, b)
