"""Question answering with Grover search.

The input state is produced by contracting ``who`` (type ``w/(n\\s)``) with an
intransitive verb and then with an ``answers`` state that ties each answer
index to its noun vector.  What remains lives on the answer-index wire (3)
and the truth qubit (4).  The oracle is the same for every question (a sign
flip on truth = 1); the question enters through the diffusion operator,
which reflects about the prepared state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import compiler, qsim
from .qsim import GateOp, PureState, Wire, WireSystem
from .semantics import SemanticConfig, WordTensor, interpret_type
from .typelogic import derive, parse_type

WHO_TYPE = parse_type("w/(n\\s)")
VERB_TYPE = parse_type("n\\s")
INDEX_WIRE = "3"
TRUTH_WIRE = "4"
ANCILLA_WIRE = "11"


class NoSolutions(ValueError):
    pass


class NonUniformInput(ArithmeticError):
    """The contracted input is not an equal superposition of index/truth pairs."""

    def __init__(self, message: str, spectrum: np.ndarray):
        super().__init__(message)
        self.spectrum = spectrum


class InvariantViolation(ArithmeticError):
    pass


def _bits(P: int) -> int:
    if P < 1 or P & (P - 1):
        raise ValueError(f"number of answers must be a power of two, got {P}")
    return P.bit_length() - 1


@dataclass
class QAInstance:
    answers: list[str]
    truth: list[bool]
    dim_N: int
    verb_tensor: WordTensor
    W: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.p = _bits(len(self.answers))
        if len(self.truth) != len(self.answers):
            raise ValueError("truth assignment must have one entry per answer")
        self.W = np.asarray(self.W, dtype=complex)
        if self.W.shape != (self.P, self.dim_N):
            raise ValueError(f"W has shape {self.W.shape}, expected {(self.P, self.dim_N)}")
        if self.verb_tensor.dims != (self.dim_N, 2):
            raise ValueError(f"verb tensor dims {self.verb_tensor.dims}, expected {(self.dim_N, 2)}")

    @property
    def P(self) -> int:
        return len(self.answers)

    @property
    def Q(self) -> int:
        return sum(bool(t) for t in self.truth)

    @property
    def config(self) -> SemanticConfig:
        return SemanticConfig(dim_N=self.dim_N, dim_S=2, p=self.p)

    @classmethod
    def canonical(cls, answers: Sequence[str], truth: Sequence[bool]) -> "QAInstance":
        """Orthonormal answer nouns, ``W = identity`` and verb ``t[i, l] = [l == truth(i)]``."""
        P = len(answers)
        _bits(P)
        t = np.zeros((P, 2))
        for i, ok in enumerate(truth):
            t[i, int(bool(ok))] = 1
        cfg = SemanticConfig(dim_N=P, dim_S=2, p=_bits(P))
        verb = WordTensor(interpret_type(VERB_TYPE, cfg), t)
        return cls(list(answers), [bool(x) for x in truth], P, verb, np.eye(P))


def _pair_state(labels: tuple[str, str], d: int) -> PureState:
    return PureState(WireSystem.of([(labels[0], d), (labels[1], d)]), np.eye(d))


def who_factors(p: int, dim_N: int) -> list[PureState]:
    """The ``who`` state as three unnormalized pairings: wires (1,3), (2,5), (4,6)."""
    return [_pair_state(("1", "3"), 2**p), _pair_state(("2", "5"), dim_N), _pair_state(("4", "6"), 2)]


def build_who_state(p: int, dim_N: int) -> PureState:
    """``sum_{a,i,l} |a>_1 |n_i>_2 |a>_3 |s_l>_4 |n_i>_5 |s_l>_6`` (unnormalized)."""
    return qsim.kron_states(who_factors(p, dim_N)).reorder(["1", "2", "3", "4", "5", "6"])


def build_answers_state(W: np.ndarray, labels: tuple[str, str] = ("9", "10")) -> PureState:
    """``sum_{b,q} W[b, q] |n_q>_9 |b>_10`` for a (P x dim_N) matrix ``W``."""
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2:
        raise ValueError(f"W must be a matrix, got shape {W.shape}")
    P = W.shape[0]
    _bits(P)
    return PureState(WireSystem.of([(labels[0], W.shape[1]), (labels[1], P)]), W.T)


def question_plan(instance: QAInstance) -> compiler.ContractionPlan:
    """Measurements that turn who (x) talks (x) answers into the search input.

    The who/verb pairs come from the derivation of ``w/(n\\s) , n\\s => w``;
    the answers are then matched to the noun and index wires of the question.
    """
    cfg = instance.config
    (d,) = derive([WHO_TYPE, VERB_TYPE], parse_type("w"))
    alloc = compiler.allocate_wires([WHO_TYPE, VERB_TYPE], cfg)
    grammar = compiler.plan_contractions(d, alloc)
    answers_step = (("2", "9"), ("1", "10"))
    wires = alloc.word_wires + (("9", "10"),)
    dims = grammar.wire_dims + (("9", instance.dim_N), ("10", instance.P))
    return compiler.ContractionPlan(wires, grammar.steps + (answers_step,), (INDEX_WIRE, TRUTH_WIRE), dims)


def contracted_input(instance: QAInstance) -> PureState:
    """Unnormalized ``sum_{a,i,l} conj(W[a,i]) conj(t[i,l]) |a>_3 |s_l>_4``."""
    verb = PureState(WireSystem.of([("7", instance.dim_N), ("8", 2)]), instance.verb_tensor.amplitudes)
    factors = who_factors(instance.p, instance.dim_N) + [verb, build_answers_state(instance.W)]
    return compiler.execute_plan(factors, question_plan(instance))


def check_equal_superposition(state: PureState, tol: float = 1e-10) -> None:
    """Each index must carry exactly one truth value, all with equal magnitude."""
    amps = state.amplitudes
    mags = np.abs(amps)
    top = mags.max() if mags.size else 0.0
    if top == 0:
        raise NonUniformInput("contracted input vanishes", mags)
    support = mags > tol * top
    per_index = support.sum(axis=1)
    if np.any(per_index != 1) or np.max(np.abs(mags[support] - top)) > tol * top:
        raise NonUniformInput(
            "contracted input is not an equal superposition of one truth value per answer; "
            f"amplitude magnitudes {np.round(mags / top, 12).tolist()}",
            mags / top,
        )


def prepare_initial(instance: QAInstance, check: bool = True) -> PureState:
    """Normalized search input on wires 3 (answer index) and 4 (truth)."""
    raw = contracted_input(instance)
    if check:
        check_equal_superposition(raw)
    return raw.normalized()


def half_angle(P: int, Q: int) -> float:
    """``theta/2`` with ``cos(theta/2) = sqrt(Q/P)``."""
    return math.acos(math.sqrt(Q / P))


def optimal_iterations(P: int, Q: int) -> int:
    if Q <= 0:
        raise NoSolutions("no correct answers; search is undefined")
    # standard angle phi with sin(phi) = sqrt(Q/P) is pi/2 - theta/2
    phi = math.pi / 2 - half_angle(P, Q)
    if Q == P:
        return 0
    return int(math.floor((math.pi / 2 - phi) / (2 * phi) + 0.5 + 1e-12))


def predicted_success(P: int, Q: int, k: int) -> float:
    return math.cos((2 * k + 1) * half_angle(P, Q)) ** 2


def angle_decomposition(psi: PureState, truth_wire: str = TRUTH_WIRE):
    """Split into ``sin(theta/2)|alpha>|0> + cos(theta/2)|beta>|1>``.

    Returns ``(theta, alpha, beta)`` with ``alpha``/``beta`` normalized
    vectors on the index wire (``None`` when the branch is empty).
    """
    psi = psi.normalized()
    false_branch = psi.project(truth_wire, 0).flat()
    true_branch = psi.project(truth_wire, 1).flat()
    s, c = np.linalg.norm(false_branch), np.linalg.norm(true_branch)
    theta = 2 * math.atan2(s, c)
    alpha = false_branch / s if s > 0 else None
    beta = true_branch / c if c > 0 else None
    return theta, alpha, beta


def oracle(state: PureState, kind: str = "direct") -> PureState:
    """Flip the sign of every component whose truth qubit is |1>."""
    if TRUTH_WIRE not in state.system:
        raise ValueError(f"state has no truth qubit (wire {TRUTH_WIRE})")
    if kind == "direct":
        return qsim.apply_gate(state, GateOp("Z", (TRUTH_WIRE,)))
    if kind == "kickback":
        minus = PureState(WireSystem.of([(ANCILLA_WIRE, 2)]), np.array([1, -1]) / math.sqrt(2))
        joint = qsim.apply_gate(qsim.kron_states([state, minus]), GateOp("CNOT", (TRUTH_WIRE, ANCILLA_WIRE)))
        # ancilla stays in |->; read it back out with <-|
        out = (joint.project(ANCILLA_WIRE, 0).amplitudes - joint.project(ANCILLA_WIRE, 1).amplitudes) / math.sqrt(2)
        return PureState(state.system, out)
    raise ValueError(f"unknown oracle kind {kind!r}")


def state_prep_unitary(target: PureState) -> GateOp:
    """A unitary whose first column is ``target`` (Householder completion)."""
    v = target.flat()
    n = np.linalg.norm(v)
    if n == 0:
        raise qsim.ZeroNormState("cannot prepare a zero state")
    if abs(n - 1) > 1e-12:
        raise ValueError(f"target must be normalized, has norm {n}")
    dim = v.size
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0
    e0 = np.zeros(dim, dtype=complex)
    e0[0] = phase
    w = v - e0
    if np.linalg.norm(w) < 1e-15:
        u = np.eye(dim, dtype=complex)
    else:
        w = w / np.linalg.norm(w)
        u = np.eye(dim, dtype=complex) - 2 * np.outer(w, w.conj())
    u[:, 0] *= phase
    # the reflection sends phase*e0 to v; rescaling column 0 makes U e0 = v
    return GateOp("Unitary", tuple(target.labels), u)


def diffusion(state: PureState, U: GateOp) -> PureState:
    """``U (2|0><0| - 1) U^dagger``, i.e. reflection about ``U|0>``."""
    m = np.asarray(U.matrix)
    out = qsim.apply_matrix(state, m.conj().T, U.targets)
    flat = -out.flat()
    flat[0] = -flat[0]
    out = PureState(out.system, flat)
    return qsim.apply_matrix(out, m, U.targets)


def grover_iteration(state: PureState, U: GateOp, oracle_kind: str = "direct") -> PureState:
    return diffusion(oracle(state, oracle_kind), U)


def true_index_probability(state: PureState, truth: Sequence[bool]) -> float:
    probs = qsim.outcome_probabilities(state, [INDEX_WIRE])
    return float(sum(p for p, ok in zip(probs, truth) if ok))


@dataclass
class GroverReport:
    p: int
    P: int
    Q: int
    theta: float
    iterations: int
    success_probability: float
    sampled_index: int
    sampled_answer: str
    shots: int
    shot_success_frequency: float
    oracle: str
    curve: list[tuple[int, float]]
    amplitude_table: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "P": self.P,
            "Q": self.Q,
            "theta": self.theta,
            "iterations": self.iterations,
            "success_probability": self.success_probability,
            "sampled_index": self.sampled_index,
            "sampled_answer": self.sampled_answer,
            "shots": self.shots,
            "shot_success_frequency": self.shot_success_frequency,
            "oracle": self.oracle,
            "curve": [[k, prob] for k, prob in self.curve],
            # one row per iteration, index-major over (index, truth)
            "amplitudes": [[[float(a.real), float(a.imag)] for a in row] for row in self.amplitude_table],
        }


def _run(instance: QAInstance, k: int, oracle_kind: str):
    psi0 = prepare_initial(instance)
    U = state_prep_unitary(psi0)
    states = [psi0]
    for _ in range(k):
        states.append(grover_iteration(states[-1], U, oracle_kind))
    return states


def success_curve(instance: QAInstance, k_max: int, oracle_kind: str = "direct") -> list[tuple[int, float]]:
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if instance.Q == 0:
        raise NoSolutions("no correct answers; search is undefined")
    states = _run(instance, k_max, oracle_kind)
    return [(k, true_index_probability(s, instance.truth)) for k, s in enumerate(states)]


def grover_search(
    instance: QAInstance,
    k: int | None = None,
    rng_seed=None,
    shots: int = 1,
    oracle_kind: str = "direct",
    tol: float = 1e-9,
) -> GroverReport:
    P, Q = instance.P, instance.Q
    if Q == 0:
        raise NoSolutions("no correct answers; search is undefined")
    if shots < 1:
        raise ValueError("shots must be at least 1")
    if k is None:
        k = optimal_iterations(P, Q)
    states = _run(instance, k, oracle_kind)
    final = states[-1]
    curve = [(j, true_index_probability(s, instance.truth)) for j, s in enumerate(states)]
    success = curve[-1][1]
    predicted = predicted_success(P, Q, k)
    if abs(success - predicted) > tol:
        raise InvariantViolation(f"simulated success {success} differs from cos^2((2k+1)theta/2) = {predicted}")

    rng = np.random.default_rng(rng_seed)
    first = qsim.measure_wires(final, [INDEX_WIRE], rng)
    probs = qsim.outcome_probabilities(final, [INDEX_WIRE])
    draws = [first.outcome[0]]
    if shots > 1:
        draws += list(rng.choice(P, size=shots - 1, p=probs / probs.sum()))
    hits = sum(bool(instance.truth[int(x)]) for x in draws)
    index = int(first.outcome[0])
    return GroverReport(
        p=instance.p,
        P=P,
        Q=Q,
        theta=2 * half_angle(P, Q),
        iterations=k,
        success_probability=success,
        sampled_index=index,
        sampled_answer=instance.answers[index],
        shots=shots,
        shot_success_frequency=hits / shots,
        oracle=oracle_kind,
        curve=curve,
        amplitude_table=np.array([s.flat() for s in states]),
    )
