import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grover_qa import grover, qsim
from grover_qa.grover import QAInstance
from grover_qa.qsim import PureState, WireSystem
from grover_qa.semantics import WordTensor

from oracles import grover_dense, random_complex, same_up_to_phase


def canonical(truth):
    return QAInstance.canonical([f"a{k}" for k in range(len(truth))], truth)


def index_truth_state(P, amps):
    return PureState(WireSystem.of([("3", P), ("4", 2)]), amps)


# -- building blocks ----------------------------------------------------------------------


def test_who_state_p1():
    psi = grover.build_who_state(1, 2)
    assert psi.labels == ["1", "2", "3", "4", "5", "6"]
    assert psi.system.dims == (2, 2, 2, 2, 2, 2)
    # one term per (a, i, l): 2 * 2 * 2
    assert np.count_nonzero(psi.amplitudes) == 8
    assert set(psi.amplitudes[psi.amplitudes != 0]) == {1}
    for idx in np.ndindex(psi.system.dims):
        a, i, a2, l, i2, l2 = idx
        assert psi.amplitudes[idx] == (1 if (a == a2 and i == i2 and l == l2) else 0)


def test_who_state_reduced_on_index_pair():
    psi = grover.build_who_state(2, 3).normalized()
    rho = qsim.partial_trace(qsim.DensityMatrix.from_pure(psi), ["1", "3"]).entries
    # wires 1 and 3 carry the pairing sum_a |a>|a>, each wire alone is maximally mixed
    pairing = np.eye(4).reshape(16) / 2
    assert np.allclose(rho, np.outer(pairing, pairing), atol=1e-12)
    single = qsim.partial_trace(qsim.DensityMatrix.from_pure(psi), ["1"]).entries
    assert np.allclose(single, np.eye(4) / 4, atol=1e-12)


def test_answers_state():
    psi = grover.build_answers_state(np.eye(4))
    assert psi.labels == ["9", "10"] and np.count_nonzero(psi.amplitudes) == 4
    assert np.allclose(np.diag(psi.amplitudes), 1)
    single = grover.build_answers_state(np.array([[0.3, 0.4]]))
    assert single.system.dims == (2, 1)
    rng = np.random.default_rng(0)
    W = random_complex(rng, 4, 3)
    psi = grover.build_answers_state(W)
    for b in range(4):
        for q in range(3):
            assert psi.amplitudes[q, b] == W[b, q]
    with pytest.raises(ValueError):
        grover.build_answers_state(np.ones(4))
    with pytest.raises(ValueError):
        grover.build_answers_state(np.ones((3, 3)))


def test_instance_validation():
    with pytest.raises(ValueError):
        canonical([True, False, False])
    inst = canonical([True, False, False, False])
    assert (inst.P, inst.Q, inst.p, inst.dim_N) == (4, 1, 2, 4)
    with pytest.raises(ValueError):
        QAInstance(["a", "b"], [True, False], 2, inst.verb_tensor, np.eye(2))


def test_question_plan_wiring():
    plan = grover.question_plan(canonical([True, False, False, False]))
    assert plan.steps == ((("5", "7"), ("6", "8")), (("2", "9"), ("1", "10")))
    assert plan.result_wires == ("3", "4")
    assert plan.dump() == "P(5,7)\nP(6,8)\nP(2,9)\nP(1,10)\n"


# -- input preparation ---------------------------------------------------------------------


def test_prepare_alice_only():
    psi = grover.prepare_initial(canonical([True, False, False, False]))
    expected = np.zeros((4, 2))
    expected[0, 1] = expected[1, 0] = expected[2, 0] = expected[3, 0] = 0.5
    assert psi.labels == ["3", "4"]
    assert np.allclose(psi.amplitudes, expected, atol=1e-12)


def test_prepare_small_cases():
    psi = grover.prepare_initial(canonical([True, True]))
    assert np.allclose(psi.amplitudes, [[0, 1 / math.sqrt(2)], [0, 1 / math.sqrt(2)]], atol=1e-12)
    for t in (True, False):
        psi = grover.prepare_initial(canonical([t]))
        assert np.allclose(psi.amplitudes, [[0, 1]] if t else [[1, 0]], atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4).flatmap(lambda p: st.lists(st.booleans(), min_size=2**p, max_size=2**p)))
def test_prepare_is_equal_superposition(truth):
    psi = grover.prepare_initial(canonical(truth))
    P = len(truth)
    for i, ok in enumerate(truth):
        assert psi.amplitudes[i, int(ok)] == pytest.approx(1 / math.sqrt(P), abs=1e-12)
        assert abs(psi.amplitudes[i, 1 - int(ok)]) < 1e-12


def test_contracted_input_matches_index_sum():
    # sum_{a,i,l} conj(W[a,i]) conj(t[i,l]) |a>|l>, up to the contraction phase
    rng = np.random.default_rng(1)
    base = canonical([True, False, False, False])
    W = random_complex(rng, 4, 3)
    t = random_complex(rng, 3, 2)
    verb = WordTensor(grover.interpret_type(grover.VERB_TYPE, grover.SemanticConfig(dim_N=3, dim_S=2, p=2)), t)
    inst = QAInstance(base.answers, base.truth, 3, verb, W)
    out = grover.contracted_input(inst)
    expected = np.zeros((4, 2), dtype=complex)
    for a in range(4):
        for i in range(3):
            for l in range(2):
                expected[a, l] += np.conj(W[a, i]) * np.conj(t[i, l])
    assert same_up_to_phase(out.amplitudes, expected, 1e-10)
    with pytest.raises(grover.NonUniformInput) as info:
        grover.prepare_initial(inst)
    assert info.value.spectrum.shape == (4, 2)


# -- oracle, state preparation, diffusion -----------------------------------------------------


def test_oracle_signs():
    flipped = grover.oracle(index_truth_state(2, [[0, 1], [0, 0]]))
    assert np.allclose(flipped.amplitudes, [[0, -1], [0, 0]])
    kept = grover.oracle(index_truth_state(2, [[1, 0], [0, 0]]))
    assert np.allclose(kept.amplitudes, [[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        grover.oracle(PureState(WireSystem.of([("3", 2)]), [1, 0]))
    with pytest.raises(ValueError):
        grover.oracle(index_truth_state(2, np.ones(4)), "magic")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 4, 8]))
def test_kickback_equals_direct(seed, P):
    rng = np.random.default_rng(seed)
    psi = index_truth_state(P, random_complex(rng, P, 2))
    direct = grover.oracle(psi, "direct")
    kick = grover.oracle(psi, "kickback")
    assert same_up_to_phase(direct.flat(), kick.flat(), 1e-12)
    assert np.allclose(grover.oracle(direct).amplitudes, psi.amplitudes)


def test_oracle_counts_sign_flips():
    for truth in ([True, False, False, False], [True, True, False, True], [False] * 7 + [True]):
        psi = grover.prepare_initial(canonical(truth))
        support = np.abs(psi.flat()) > 1e-9
        ratio = grover.oracle(psi).flat()[support] / psi.flat()[support]
        assert int(np.sum(np.isclose(ratio, -1))) == sum(truth)
        assert int(np.sum(np.isclose(ratio, 1))) == len(truth) - sum(truth)


def test_state_prep_unitary():
    rng = np.random.default_rng(2)
    for dim in (2, 4, 8, 32):
        target = PureState(WireSystem.of([("3", dim // 2), ("4", 2)]), random_complex(rng, dim)).normalized()
        U = grover.state_prep_unitary(target)
        m = np.asarray(U.matrix)
        assert np.allclose(m.conj().T @ m, np.eye(dim), atol=1e-12)
        assert np.allclose(m[:, 0], target.flat(), atol=1e-12)
    zero = PureState(WireSystem.of([("3", 2), ("4", 2)]), [1, 0, 0, 0])
    assert np.allclose(grover.state_prep_unitary(zero).matrix, np.eye(4))
    with pytest.raises(qsim.ZeroNormState):
        grover.state_prep_unitary(PureState(zero.system, np.zeros(4)))
    with pytest.raises(ValueError):
        grover.state_prep_unitary(PureState(zero.system, [2, 0, 0, 0]))


def test_state_prep_on_tiny_first_amplitude():
    target = PureState(WireSystem.of([("3", 2), ("4", 2)]), [0, 0, 0.6, 0.8j])
    m = np.asarray(grover.state_prep_unitary(target).matrix)
    assert np.allclose(m[:, 0], target.flat()) and np.allclose(m.conj().T @ m, np.eye(4))


def test_diffusion_reflects_about_initial_state():
    inst = canonical([True, False, False, False, False, True, False, False])
    psi = grover.prepare_initial(inst)
    U = grover.state_prep_unitary(psi)
    assert np.allclose(grover.diffusion(psi, U).flat(), psi.flat(), atol=1e-12)
    rng = np.random.default_rng(3)
    v = random_complex(rng, 16)
    v = v - np.vdot(psi.flat(), v) * psi.flat()
    orth = PureState(psi.system, v)
    assert np.allclose(grover.diffusion(orth, U).flat(), -v, atol=1e-12)
    # entrywise against 2|psi><psi| - 1, column by column
    D = np.array([grover.diffusion(PureState(psi.system, e), U).flat() for e in np.eye(16)]).T
    assert np.allclose(D, 2 * np.outer(psi.flat(), psi.flat().conj()) - np.eye(16), atol=1e-12)


# -- the search ------------------------------------------------------------------------


def test_angle_decomposition():
    for truth in ([True, False, False, False], [True, True, False, False, False, False, False, True]):
        P, Q = len(truth), sum(truth)
        theta, alpha, beta = grover.angle_decomposition(grover.prepare_initial(canonical(truth)))
        assert math.cos(theta / 2) == pytest.approx(math.sqrt(Q / P), abs=1e-10)
        assert np.allclose(alpha, [0 if t else 1 / math.sqrt(P - Q) for t in truth])
        assert np.allclose(beta, [1 / math.sqrt(Q) if t else 0 for t in truth])


def test_first_iteration_identity():
    for truth in ([True, False, False, False], [False, True, True, False, False, False, False, False]):
        psi = grover.prepare_initial(canonical(truth))
        theta, alpha, beta = grover.angle_decomposition(psi)
        out = grover.grover_iteration(psi, grover.state_prep_unitary(psi))
        stated = np.stack([math.sin(3 * theta / 2) * alpha, math.cos(3 * theta / 2) * beta], axis=1)
        # equal up to the global sign -1
        assert np.allclose(out.amplitudes, -stated, atol=1e-10)


def test_false_branch_amplitudes():
    truth = [False, True, False, False, False, False, False, False]
    P, Q = 8, 1
    half = grover.half_angle(P, Q)
    states = grover._run(canonical(truth), 6, "direct")
    for k, s in enumerate(states):
        false_amps = s.amplitudes[[i for i, t in enumerate(truth) if not t], 0]
        expected = (-1) ** k * math.sin((2 * k + 1) * half) / math.sqrt(P - Q)
        assert np.allclose(false_amps, expected, atol=1e-10)


@pytest.mark.parametrize("P, Q, k, expected", [(4, 1, 1, 1.0), (8, 1, 2, 0.9453125), (4, 2, 1, 0.5), (4, 4, 0, 1.0)])
def test_search_examples(P, Q, k, expected):
    report = grover.grover_search(canonical([i < Q for i in range(P)]), rng_seed=0)
    assert report.iterations == k
    assert report.success_probability == pytest.approx(expected, abs=1e-9)
    assert report.sampled_index < P


def test_search_alice():
    inst = QAInstance.canonical(["Alice", "Bob", "Carol", "Dave"], [True, False, False, False])
    report = grover.grover_search(inst, rng_seed=42, shots=50)
    assert report.sampled_answer == "Alice" and report.shot_success_frequency == 1.0
    assert report.theta == pytest.approx(2 * math.pi / 3)


def test_search_errors():
    with pytest.raises(grover.NoSolutions):
        grover.grover_search(canonical([False, False]))
    with pytest.raises(grover.NoSolutions):
        grover.success_curve(canonical([False, False]), 3)
    with pytest.raises(ValueError):
        grover.grover_search(canonical([True, False]), shots=0)
    with pytest.raises(ValueError):
        grover.success_curve(canonical([True, False]), -1)


def test_search_is_deterministic_under_seed():
    inst = canonical([True, False, True, False, False, False, False, False])
    a = grover.grover_search(inst, rng_seed=9, shots=20).to_json()
    b = grover.grover_search(inst, rng_seed=9, shots=20).to_json()
    assert a == b


def test_kickback_search_agrees():
    inst = canonical([False, False, True, False, False, False, False, False])
    a = grover.grover_search(inst, rng_seed=1, oracle_kind="direct")
    b = grover.grover_search(inst, rng_seed=1, oracle_kind="kickback")
    assert a.success_probability == pytest.approx(b.success_probability, abs=1e-12)


@pytest.mark.parametrize("P", [4, 8, 16])
@pytest.mark.parametrize("Q", [1, 2])
def test_success_curve_matches_formula_and_dense(P, Q):
    truth = [i % (P // Q) == 0 for i in range(P)]
    curve = grover.success_curve(canonical(truth), 10)
    for k, prob in curve:
        assert prob == pytest.approx(grover.predicted_success(P, Q, k), abs=1e-9)
        dense = grover_dense(truth, k).reshape(P, 2)
        assert prob == pytest.approx(float(np.sum(np.abs(dense[:, 1]) ** 2)), abs=1e-9)


def test_success_curve_small_examples():
    curve = dict(grover.success_curve(canonical([True, False, False, False]), 2))
    assert curve[0] == pytest.approx(0.25) and curve[1] == pytest.approx(1.0) and curve[2] == pytest.approx(0.25)


def test_optimal_iterations_table():
    table = {(4, 1): 1, (8, 1): 2, (16, 1): 3, (4, 2): 1, (8, 2): 1, (16, 2): 2, (4, 4): 0, (2, 2): 0}
    for (P, Q), k in table.items():
        assert grover.optimal_iterations(P, Q) == k
    with pytest.raises(grover.NoSolutions):
        grover.optimal_iterations(4, 0)


@pytest.mark.parametrize("P", [2, 4, 8, 16])
def test_planted_solution_recovered(P):
    # the planted index must be the single most likely outcome
    for pos in range(P):
        truth = [i == pos for i in range(P)]
        report = grover.grover_search(canonical(truth), rng_seed=pos)
        final = PureState(WireSystem.of([("3", P), ("4", 2)]), report.amplitude_table[-1])
        probs = np.asarray(qsim.outcome_probabilities(final, ["3"]))
        assert probs[pos] > np.delete(probs, pos).max() + 1e-9


def test_two_answers_is_a_coin_flip():
    # one solution out of two: every iteration leaves probability 1/2
    for pos in (0, 1):
        curve = grover.success_curve(canonical([i == pos for i in range(2)]), 4)
        assert all(prob == pytest.approx(0.5, abs=1e-12) for _, prob in curve)
