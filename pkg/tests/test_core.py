import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagsplit import (
    Combinatorial,
    InfectionInstance,
    ParameterError,
    Pool,
    Probabilistic,
    TestLedger,
    derive_seed,
    evaluate_pool,
    generate_instance,
    run_dsa,
    submit_batch,
)
from conftest import instance_with_infected


# --- instance generation -------------------------------------------------

def test_combinatorial_k0_all_healthy():
    inst = generate_instance(Combinatorial(0), 8, seed=123)
    assert inst.statuses == (False,) * 8


def test_combinatorial_kn_all_infected():
    inst = generate_instance(Combinatorial(8), 8, seed=99)
    assert inst.statuses == (True,) * 8


def test_probabilistic_p1_all_infected():
    inst = generate_instance(Probabilistic(1.0), 16, seed=5)
    assert inst.statuses == (True,) * 16


def test_probabilistic_p0_all_healthy():
    inst = generate_instance(Probabilistic(0.0), 16, seed=5)
    assert inst.statuses == (False,) * 16


@given(st.integers(0, 12), st.integers(0, 2**40))
def test_combinatorial_exact_count(k, seed):
    inst = generate_instance(Combinatorial(k), 12, seed)
    assert inst.infected_count == k


@given(st.integers(0, 2**60))
@settings(max_examples=30)
def test_regeneration_is_bit_identical(seed):
    a = generate_instance(Combinatorial(3), 32, seed)
    b = generate_instance(Combinatorial(3), 32, seed)
    assert a.statuses == b.statuses
    c = generate_instance(Probabilistic(0.3), 32, seed)
    d = generate_instance(Probabilistic(0.3), 32, seed)
    assert c.statuses == d.statuses


def test_distinct_seeds_differ_somewhere():
    vectors = {
        generate_instance(Combinatorial(4), 32, seed).statuses
        for seed in range(20)
    }
    assert len(vectors) > 1


@pytest.mark.parametrize(
    "model,n",
    [
        (Combinatorial(-1), 8),
        (Combinatorial(9), 8),
        (Probabilistic(-0.1), 8),
        (Probabilistic(1.5), 8),
    ],
)
def test_invalid_model_parameters(model, n):
    with pytest.raises(ParameterError):
        generate_instance(model, n, seed=0)


def test_invalid_population_size():
    with pytest.raises(ParameterError):
        generate_instance(Combinatorial(0), 0, seed=0)


def test_combinatorial_frequency_is_uniform():
    # each of the 8 individuals should be infected ~k/n of the time
    n, k, trials = 8, 2, 600
    counts = [0] * n
    for seed in range(trials):
        inst = generate_instance(Combinatorial(k), n, seed)
        for i, s in enumerate(inst.statuses):
            counts[i] += s
    expected = trials * k / n
    chi2 = sum((c - expected) ** 2 / expected for c in counts)
    # df = 7; 24.3 is the 0.999 quantile
    assert chi2 < 25.0, (counts, chi2)


# --- pools and the oracle ------------------------------------------------

def test_pool_validation():
    with pytest.raises(ParameterError):
        Pool(())
    with pytest.raises(ParameterError):
        Pool((1, 2, 2))
    with pytest.raises(ParameterError):
        Pool((0, 1))


def test_pool_describe():
    assert Pool((1, 2, 3, 4)).describe() == "1-4"
    assert Pool((7,)).describe() == "7"
    assert Pool((1, 2, 5, 7, 8)).describe() == "1-2,5,7-8"


def test_evaluate_pool_truth_table():
    inst = instance_with_infected(8, {3})
    assert evaluate_pool(inst, Pool((3,))) is True
    assert evaluate_pool(inst, Pool((1, 2, 3))) is True
    assert evaluate_pool(inst, Pool((5, 6))) is False
    all_healthy = instance_with_infected(8, set())
    assert evaluate_pool(all_healthy, Pool.over(1, 8)) is False


def test_evaluate_pool_rejects_out_of_range():
    inst = instance_with_infected(4, {1})
    with pytest.raises(ParameterError):
        evaluate_pool(inst, Pool((5,)))


# --- ledger accounting ---------------------------------------------------

def test_submit_batch_accounting():
    inst = instance_with_infected(8, {1})
    ledger = TestLedger()
    assert ledger.tests_total == 0 and ledger.stages_total == 0
    submit_batch(ledger, inst, [Pool.over(1, 4), Pool.over(5, 8), Pool((1,)), Pool((2,))])
    assert (ledger.tests_total, ledger.stages_total) == (4, 1)
    submit_batch(ledger, inst, [Pool((i,)) for i in range(1, 6)])
    assert (ledger.tests_total, ledger.stages_total) == (9, 2)


def test_submit_batch_returns_outcomes_in_order():
    inst = instance_with_infected(4, {2})
    ledger = TestLedger()
    outcomes = submit_batch(ledger, inst, [Pool((1,)), Pool((2,)), Pool((3, 4))])
    assert outcomes == [False, True, False]


def test_empty_batch_rejected():
    ledger = TestLedger()
    with pytest.raises(ParameterError):
        submit_batch(ledger, instance_with_infected(4, set()), [])


def test_ledger_replay_matches_recorded_outcomes():
    # replaying every recorded pool must reproduce the recorded outcome
    inst = generate_instance(Combinatorial(3), 16, seed=7)
    ledger = run_dsa(inst).ledger
    for pool, outcome in ledger.all_tests():
        assert evaluate_pool(inst, pool) == outcome


def test_derive_seed_is_stable_and_splits():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)
    assert derive_seed(1, 2, 3) != derive_seed(2, 2, 3)


def test_explicit_instance_roundtrip():
    inst = InfectionInstance.explicit([True, False, True, False])
    assert inst.n == 4
    assert inst.positives == {1, 3}
    assert isinstance(inst.model, Combinatorial) and inst.model.k == 2
