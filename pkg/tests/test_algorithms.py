import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagsplit import (
    AlgorithmConfig,
    Combinatorial,
    ParameterError,
    Probabilistic,
    derive_seed,
    evaluate_pool,
    generate_instance,
    run,
    run_bsa,
    run_dsa,
    run_hgbsa,
    run_hybrid,
)
from diagsplit.tree import tree_depth
from conftest import all_instances, instance_with_infected


def stage_trace(ledger):
    return [[(pool.members, outcome) for pool, outcome in stage] for stage in ledger.stages]


# --- diagonal splitting ---------------------------------------------------

def test_dsa_no_infections():
    result = run_dsa(instance_with_infected(8, set()))
    assert result.diagnosis.infected() == ()
    assert (result.ledger.tests_total, result.ledger.stages_total) == (4, 1)


def test_dsa_single_leftmost_infection_full_trace():
    result = run_dsa(instance_with_infected(8, {1}))
    assert stage_trace(result.ledger) == [
        [((1, 2, 3, 4), True), ((5, 6), False), ((7,), False), ((8,), False)],
        [((1, 2), True), ((3,), False), ((4,), False)],
        [((1,), True), ((2,), False)],
    ]
    assert (result.ledger.tests_total, result.ledger.stages_total) == (9, 3)
    assert result.diagnosis.infected() == (1,)


def test_dsa_all_infected():
    result = run_dsa(instance_with_infected(8, set(range(1, 9))))
    assert (result.ledger.tests_total, result.ledger.stages_total) == (11, 3)
    assert result.diagnosis.infected() == tuple(range(1, 9))


@pytest.mark.parametrize("n", [8, 16, 64])
def test_dsa_stage_bound_and_worst_case(n):
    d = tree_depth(n)
    worst = run_dsa(instance_with_infected(n, {1}))
    assert worst.ledger.stages_total == d
    for seed in range(40):
        inst = generate_instance(Combinatorial(seed % (n + 1)), n, seed)
        assert run_dsa(inst).ledger.stages_total <= d


def test_dsa_rejects_non_power_of_two():
    with pytest.raises(ParameterError):
        run_dsa(instance_with_infected(12, {1}))
    with pytest.raises(ParameterError):
        run_dsa(instance_with_infected(1, {1}))


def test_dsa_test_count_law():
    # total tests = (d+1) + sum over positive non-singleton pools of (log2(size)+1)
    for seed in range(25):
        inst = generate_instance(Combinatorial(seed % 17), 16, seed)
        ledger = run_dsa(inst).ledger
        d = tree_depth(16)
        triggered = sum(
            pool.size.bit_length()  # log2(size) + 1
            for pool, outcome in ledger.all_tests()
            if outcome and pool.size >= 2
        )
        assert ledger.tests_total == (d + 1) + triggered


def test_dsa_sibling_property():
    # whenever a leaf is tested individually, its sibling sits in the same stage
    for seed in range(25):
        inst = generate_instance(Combinatorial(seed % 17), 16, seed)
        for stage in run_dsa(inst).ledger.stages:
            singles = {pool.members[0] for pool, _ in stage if pool.size == 1}
            for leaf in singles:
                sibling = leaf + 1 if leaf % 2 == 1 else leaf - 1
                assert sibling in singles, (seed, leaf, sorted(singles))


def test_dsa_initial_screen():
    clean = run_dsa(instance_with_infected(8, set()), initial_screen=True)
    assert (clean.ledger.tests_total, clean.ledger.stages_total) == (1, 1)
    dirty = run_dsa(instance_with_infected(8, {3}), initial_screen=True)
    base = run_dsa(instance_with_infected(8, {3}))
    assert dirty.ledger.tests_total == base.ledger.tests_total + 1
    assert dirty.ledger.stages_total == base.ledger.stages_total + 1
    assert dirty.diagnosis.infected() == (3,)


# --- sequential binary splitting -------------------------------------------

def test_bsa_no_infections():
    result = run_bsa(instance_with_infected(8, set()))
    assert (result.ledger.tests_total, result.ledger.stages_total) == (1, 1)


def test_bsa_rightmost_infection_trace():
    result = run_bsa(instance_with_infected(8, {8}))
    assert stage_trace(result.ledger) == [
        [((1, 2, 3, 4, 5, 6, 7, 8), True)],
        [((1, 2, 3, 4), False)],
        [((5, 6), False)],
        [((7,), False)],
    ]
    assert result.diagnosis.infected() == (8,)


def test_bsa_leftmost_infection_trace():
    result = run_bsa(instance_with_infected(8, {1}))
    assert stage_trace(result.ledger) == [
        [((1, 2, 3, 4, 5, 6, 7, 8), True)],
        [((1, 2, 3, 4), True)],
        [((1, 2), True)],
        [((1,), True)],
        [((2, 3, 4, 5, 6, 7, 8), False)],
    ]
    assert result.ledger.tests_total == 5


def test_bsa_one_test_per_stage():
    for seed in range(20):
        inst = generate_instance(Combinatorial(seed % 9), 8, seed)
        ledger = run_bsa(inst).ledger
        assert ledger.stages_total == ledger.tests_total


@pytest.mark.parametrize("n", [8, 16, 31])
def test_bsa_guarantee_with_final_clearing_test(n):
    # worst case is exactly k*ceil(log2 n) + k + 1, reached on boundary instances
    for seed in range(60):
        k = 1 + seed % n
        inst = generate_instance(Combinatorial(k), n, seed)
        tests = run_bsa(inst).ledger.tests_total
        assert tests <= k * math.ceil(math.log2(n)) + k + 1


def test_bsa_boundary_instance_meets_budget_exactly():
    result = run_bsa(instance_with_infected(16, {1}))
    assert result.ledger.tests_total == 1 * 4 + 1 + 1


# --- generalized binary splitting ------------------------------------------

def test_hgbsa_dense_individual_fallback():
    result = run_hgbsa(instance_with_infected(8, set(range(1, 9))), 8)
    assert (result.ledger.tests_total, result.ledger.stages_total) == (8, 1)
    assert result.diagnosis.infected() == tuple(range(1, 9))


def test_hgbsa_single_defective_trace():
    result = run_hgbsa(instance_with_infected(8, {5}), 1)
    assert stage_trace(result.ledger) == [
        [((1, 2, 3, 4, 5, 6, 7, 8), True)],
        [((1, 2, 3, 4), False)],
        [((5, 6), True)],
        [((5,), True)],
    ]
    assert result.ledger.tests_total == 4  # meets log2 C(8,1) + 1 with equality
    assert result.diagnosis.infected() == (5,)


def test_hgbsa_zero_believed_count_costs_nothing():
    result = run_hgbsa(instance_with_infected(8, set()), 0)
    assert (result.ledger.tests_total, result.ledger.stages_total) == (0, 0)
    assert result.diagnosis.infected() == ()


def test_hgbsa_k_input_validated():
    inst = instance_with_infected(8, {1})
    with pytest.raises(ParameterError):
        run_hgbsa(inst, -1)
    with pytest.raises(ParameterError):
        run_hgbsa(inst, 9)


@pytest.mark.parametrize("n", [12, 16])
def test_hgbsa_guarantee_bound_with_true_k(n):
    for seed in range(80):
        k = 1 + seed % n
        inst = generate_instance(Combinatorial(k), n, seed)
        tests = run_hgbsa(inst, k).ledger.tests_total
        assert tests <= math.ceil(math.log2(math.comb(n, k))) + k


def test_hgbsa_untrusted_input_stays_exact_for_every_wrong_count():
    # the believed count is only a sizing hint; recovery must not depend on it
    for inst in all_instances(8):
        for k_input in range(9):
            result = run_hgbsa(inst, k_input, trust_input=False)
            assert result.diagnosis.matches(inst), (inst.positives, k_input)


def test_hgbsa_trusted_input_exact_when_count_is_true():
    for inst in all_instances(8):
        result = run_hgbsa(inst, inst.infected_count)
        assert result.diagnosis.matches(inst)


# --- hybrid -----------------------------------------------------------------

def test_hybrid_no_infections():
    result = run_hybrid(instance_with_infected(8, set()))
    assert (result.ledger.tests_total, result.ledger.stages_total) == (4, 1)
    assert result.k_estimate == 0


def test_hybrid_all_infected():
    result = run_hybrid(instance_with_infected(8, set(range(1, 9))))
    assert (result.ledger.tests_total, result.ledger.stages_total) == (10, 2)
    assert result.k_estimate == 8
    # stage two: both subtrees resolved individually in one merged batch
    second = [pool.members for pool, _ in result.ledger.stages[1]]
    assert second == [(1,), (2,), (3,), (4,), (5,), (6,)]


def test_hybrid_only_certified_singleton():
    result = run_hybrid(instance_with_infected(8, {7}))
    assert (result.ledger.tests_total, result.ledger.stages_total) == (4, 1)
    assert result.k_estimate == 1
    assert result.diagnosis.infected() == (7,)


def test_hybrid_rejects_non_power_of_two():
    with pytest.raises(ParameterError):
        run_hybrid(instance_with_infected(6, {1}))


def test_hybrid_merges_concurrent_rounds():
    # two positive subtrees must share stages, not run one after the other
    result = run_hybrid(instance_with_infected(16, {1, 9}))
    second = result.ledger.stages[1]
    touched_left = any(pool.max_index <= 8 for pool, _ in second)
    touched_right = any(pool.member_set <= set(range(9, 13)) for pool, _ in second)
    assert touched_left and touched_right, stage_trace(result.ledger)
    assert result.diagnosis.infected() == (1, 9)


# --- cross-cutting properties ----------------------------------------------

def every_result(inst):
    yield "bsa", run_bsa(inst)
    yield "dsa", run_dsa(inst)
    yield "hybrid", run_hybrid(inst)
    yield "hgbsa", run_hgbsa(inst, inst.infected_count)


def test_zero_error_exhaustive_n4():
    for inst in all_instances(4):
        for name, result in every_result(inst):
            assert result.diagnosis.matches(inst), (name, inst.positives)


@given(st.integers(0, 2**32), st.sampled_from([2, 4, 16, 32]), st.integers(0, 32))
@settings(max_examples=60, deadline=None)
def test_zero_error_randomized(seed, n, k_raw):
    inst = generate_instance(Combinatorial(k_raw % (n + 1)), n, seed)
    for name, result in every_result(inst):
        assert result.diagnosis.matches(inst), (name, n, seed)


@given(st.integers(0, 2**32), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_zero_error_probabilistic_model(seed, p):
    inst = generate_instance(Probabilistic(p), 16, seed)
    for name, result in every_result(inst):
        assert result.diagnosis.matches(inst), (name, p, seed)


def test_baselines_accept_any_population_size():
    for n in (1, 3, 5, 7, 11):
        for infected in (set(), {1}, {n}):
            inst = instance_with_infected(n, infected)
            assert run_bsa(inst).diagnosis.matches(inst)
            assert run_hgbsa(inst, len(infected)).diagnosis.matches(inst)


def test_runs_are_deterministic():
    inst = generate_instance(Combinatorial(5), 16, seed=11)
    for name, first in every_result(inst):
        again = dict(every_result(inst))[name]
        assert stage_trace(first.ledger) == stage_trace(again.ledger)


def test_ledger_replay_consistency_all_algorithms():
    inst = generate_instance(Combinatorial(4), 16, seed=3)
    for name, result in every_result(inst):
        for pool, outcome in result.ledger.all_tests():
            assert evaluate_pool(inst, pool) == outcome, name


def test_initial_screen_on_baselines():
    inst = instance_with_infected(8, set())
    screened = run_bsa(inst, initial_screen=True)
    assert (screened.ledger.tests_total, screened.ledger.stages_total) == (1, 1)
    screened = run_hgbsa(inst, 0, initial_screen=True)
    assert (screened.ledger.tests_total, screened.ledger.stages_total) == (1, 1)


def test_config_validation():
    with pytest.raises(ParameterError):
        AlgorithmConfig("hgbsa").validate_for(8)
    with pytest.raises(ParameterError):
        AlgorithmConfig("dsa", k_input=2).validate_for(8)
    with pytest.raises(ParameterError):
        AlgorithmConfig("nope").validate_for(8)
    with pytest.raises(ParameterError):
        run(instance_with_infected(8, set()), AlgorithmConfig("hybrid", k_input=1))
