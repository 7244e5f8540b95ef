"""From derivations to circuits: wire allocation, contraction plans and
controlled-swap superpositions of readings."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qsim
from .qsim import GateOp, PureState, Wire, WireSystem
from .semantics import SemanticConfig, SemanticSpace, WordTensor, interpret_type, split_functor
from .typelogic import ApplyLeft, ApplyRight, Derivation, Leaf, SyntacticType

Pair = tuple[str, str]
Step = tuple[Pair, ...]


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class WireAllocation:
    """Wires per word occurrence, numbered left to right from ``start``."""

    system: WireSystem
    word_wires: tuple[tuple[str, ...], ...]
    word_spaces: tuple[SemanticSpace, ...]
    config: SemanticConfig
    state: PureState | None = None

    def parts(self, tensors: Sequence[WordTensor]) -> list[PureState]:
        """One state per word on its own wires, for factored execution."""
        return [
            PureState(WireSystem(tuple(self.system.wires[self.system.index(l)] for l in labels)), t.amplitudes)
            for labels, t in zip(self.word_wires, tensors)
        ]


def allocate_wires(
    types: Sequence[SyntacticType],
    cfg: SemanticConfig,
    tensors: Sequence[WordTensor] | None = None,
    start: int = 1,
) -> WireAllocation:
    """Number wires per word and per factor; build the product input when tensors are given."""
    spaces = [interpret_type(t, cfg) for t in types]
    word_wires = []
    wires = []
    label = start
    for space in spaces:
        labels = []
        for f in space.factors:
            labels.append(str(label))
            wires.append(Wire(str(label), f.dim))
            label += 1
        word_wires.append(tuple(labels))
    system = WireSystem(tuple(wires))
    state = None
    if tensors is not None:
        for k, (space, t) in enumerate(zip(spaces, tensors)):
            if t.dims != space.dims:
                raise PlanError(f"word {k}: tensor dims {list(t.dims)} do not match {space}")
        state = qsim.product_state(list(tensors), labels=system.labels)
    return WireAllocation(system, tuple(word_wires), tuple(spaces), cfg, state)


@dataclass(frozen=True)
class ContractionPlan:
    wire_alloc: tuple[tuple[str, ...], ...]
    steps: tuple[Step, ...]
    result_wires: tuple[str, ...]
    wire_dims: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        used = [w for step in self.steps for pair in step for w in pair]
        if len(set(used)) != len(used):
            raise PlanError(f"a wire is contracted twice in {self.steps}")
        every = [w for ws in self.wire_alloc for w in ws]
        if every:
            expected = tuple(w for w in every if w not in set(used))
            if set(expected) != set(self.result_wires) or len(expected) != len(self.result_wires):
                raise PlanError(f"result wires {self.result_wires} do not match uncontracted {expected}")

    @property
    def pairs(self) -> list[Pair]:
        return [pair for step in self.steps for pair in step]

    def dump(self) -> str:
        return "".join(f"P({i},{j})\n" for i, j in self.pairs)


def plan_contractions(d: Derivation, alloc: WireAllocation) -> ContractionPlan:
    """One permutation measurement per rule application, in post-order.

    Each pair is (wire from the left subtree, wire from the right subtree),
    matching the functor's argument factors with the argument's remaining
    factors in order.
    """
    steps: list[Step] = []
    cfg = alloc.config

    def walk(node: Derivation) -> list[str]:
        if isinstance(node, Leaf):
            if node.index >= len(alloc.word_wires):
                raise PlanError(f"leaf {node.index} has no allocated wires")
            return list(alloc.word_wires[node.index])
        left = walk(node.left)
        right = walk(node.right)
        fw, xw = (left, right) if isinstance(node, ApplyRight) else (right, left)
        arg_pos, res_pos = split_functor(node.functor.type, cfg)
        if len(arg_pos) != len(xw):
            raise PlanError(f"functor {node.functor.type} expects {len(arg_pos)} factors, argument has {len(xw)}")
        step = []
        for k, x in zip(arg_pos, xw):
            f = fw[k]
            if alloc.system.dim(f) != alloc.system.dim(x):
                raise PlanError(f"wire {f} (dim {alloc.system.dim(f)}) cannot pair with wire {x} (dim {alloc.system.dim(x)})")
            step.append((f, x) if isinstance(node, ApplyRight) else (x, f))
        steps.append(tuple(step))
        return [fw[k] for k in res_pos]

    result = walk(d)
    dims = tuple((w.label, w.dim) for w in alloc.system.wires)
    return ContractionPlan(alloc.word_wires, tuple(steps), tuple(result), dims)


def _step_order(pending: list[Step], factors: list[PureState]) -> list[Step]:
    """Pending steps, those that use up every wire of some factor first."""

    def consumes(step: Step) -> bool:
        touched = {w for pair in step for w in pair}
        return any(set(f.labels) <= touched for f in factors if touched & set(f.labels))

    return [s for s in pending if consumes(s)] + [s for s in pending if not consumes(s)]


def execute_plan(state: PureState | Sequence[PureState], plan: ContractionPlan) -> PureState:
    """Fold permutation measurements over the plan's steps.

    ``state`` may be a single state or a list of factor states on disjoint
    wires; with factors, each step only materializes the factors it touches.

    The measurements of a plan commute, but the effective state after one of
    them is pure only when the wires it leaves behind are not still
    entangled through it, e.g. when one side is used up entirely.  Steps are
    therefore taken in plan order with such steps preferred, and a step whose
    reduced operator is not a positive rank-one operator is postponed.
    """
    factors = [state] if isinstance(state, PureState) else list(state)
    if not plan.steps and isinstance(state, PureState):
        return state
    pending = list(plan.steps)
    while pending:
        failure = None
        for step in _step_order(pending, factors):
            touched = {w for pair in step for w in pair}
            hit = [f for f in factors if touched & set(f.labels)]
            if not hit:
                raise PlanError(f"step {step} touches no wire of the state")
            merged = hit[0] if len(hit) == 1 else qsim.kron_states(hit)
            try:
                out = qsim.contract_pairs(merged, step)
            except qsim.ImpurityError as exc:
                failure = failure or exc
                continue
            factors = [f for f in factors if not any(f is h for h in hit)] + [out]
            pending.remove(step)
            break
        else:
            raise failure
    merged = factors[0] if len(factors) == 1 else qsim.kron_states(factors)
    extras = [l for l in merged.labels if l not in plan.result_wires]
    return merged.reorder(list(plan.result_wires) + extras)


# -- swap schedules ------------------------------------------------------------------------


@dataclass(frozen=True)
class SwapSchedule:
    swaps: tuple[Pair, ...]
    control: str | None = None
    control_amplitudes: tuple[complex, complex] | None = None

    def __post_init__(self):
        if self.control is not None:
            if self.control_amplitudes is None:
                raise ValueError("a controlled schedule needs control amplitudes")
            c1, c2 = self.control_amplitudes
            if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1) > 1e-12:
                raise ValueError(f"|c1|^2 + |c2|^2 = {abs(c1) ** 2 + abs(c2) ** 2}, expected 1")

    def with_control(self, label: str, c1: complex, c2: complex) -> "SwapSchedule":
        return SwapSchedule(self.swaps, str(label), (complex(c1), complex(c2)))

    def gates(self) -> list[GateOp]:
        if self.control is None:
            return [GateOp("SWAP", pair) for pair in self.swaps]
        return [GateOp("CSWAP", (self.control,) + tuple(pair)) for pair in self.swaps]

    def dump(self) -> str:
        if self.control is None:
            return "".join(f"SWAP({i},{j})\n" for i, j in self.swaps)
        return "".join(f"CSWAP({self.control};{i},{j})\n" for i, j in self.swaps)


def reading_swap_schedule(
    from_plan: ContractionPlan,
    to_plan: ContractionPlan,
) -> SwapSchedule:
    """Fewest swaps after which ``from_plan`` measures what ``to_plan`` measures.

    Finds a wire permutation ``pi`` (wire ``w`` ends up holding the original
    content of ``pi(w)``) taking every step and result wire of ``from_plan``
    onto ``to_plan``, with as many cycles as possible, and writes each cycle
    ``x1 -> x2 -> ... -> xm`` as the swaps ``(x1,x2), (x2,x3), ...``.
    """
    if len(from_plan.steps) != len(to_plan.steps) or len(from_plan.result_wires) != len(to_plan.result_wires):
        raise PlanError("plans differ in shape; no swap schedule exists")
    wires = [w for ws in from_plan.wire_alloc for w in ws]
    if sorted(wires) != sorted(w for ws in to_plan.wire_alloc for w in ws):
        raise PlanError("plans are over different wire sets")
    dims = dict(from_plan.wire_dims)
    if dict(to_plan.wire_dims) != dims:
        raise PlanError("plans disagree on wire dimensions")

    def compatible(a: str, b: str) -> bool:
        return dims.get(a, 0) == dims.get(b, 0)

    base: dict[str, str] = {}
    for a, b in zip(from_plan.result_wires, to_plan.result_wires):
        if base.get(a, b) != b or not compatible(a, b):
            raise PlanError("result wires cannot be matched")
        base[a] = b

    def extend(mapping: dict[str, str], src: Sequence[str], dst: Sequence[str]) -> dict[str, str] | None:
        out = dict(mapping)
        taken = set(out.values())
        for a, b in zip(src, dst):
            if a in out:
                if out[a] != b:
                    return None
                continue
            if b in taken or not compatible(a, b):
                return None
            out[a] = b
            taken.add(b)
        return out

    solutions: list[dict[str, str]] = []

    def search(k: int, mapping: dict[str, str], free: list[int]) -> None:
        if k == len(from_plan.steps):
            solutions.append(mapping)
            return
        src_step = from_plan.steps[k]
        for pos, t in enumerate(free):
            dst_step = to_plan.steps[t]
            if len(dst_step) != len(src_step):
                continue
            for order in itertools.permutations(dst_step):
                for flips in itertools.product((False, True), repeat=len(src_step)):
                    src = [w for pair in src_step for w in pair]
                    dst = [w for pair, flip in zip(order, flips) for w in (pair[::-1] if flip else pair)]
                    nxt = extend(mapping, src, dst)
                    if nxt is not None:
                        search(k + 1, nxt, free[:pos] + free[pos + 1:])

    search(0, base, list(range(len(to_plan.steps))))
    if not solutions:
        raise PlanError("plans are not related by any wire permutation")

    def complete(mapping: dict[str, str]) -> dict[str, str]:
        full = dict(mapping)
        dom = [w for w in wires if w not in full]
        cod = [w for w in wires if w not in set(full.values())]
        for w in [w for w in dom if w in cod]:
            full[w] = w
        rest_d = [w for w in dom if w not in full]
        rest_c = [w for w in cod if w not in set(full.values())]
        for a, b in zip(rest_d, rest_c):
            full[a] = b
        return full

    def cycles(pi: dict[str, str]) -> list[list[str]]:
        order = [w for step in from_plan.steps for pair in step for w in pair]
        order += list(from_plan.result_wires) + wires
        seen: set[str] = set()
        out = []
        for start in order:
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            nxt = pi[start]
            while nxt != start:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = pi[nxt]
            if len(cyc) > 1:
                out.append(cyc)
        return out

    target_pairs = set(to_plan.pairs)

    def flips(pi: dict[str, str]) -> int:
        return sum((pi[a], pi[b]) not in target_pairs for a, b in from_plan.pairs)

    best = None
    for sol in solutions:
        pi = complete(sol)
        if any(not compatible(a, b) for a, b in pi.items()):
            continue
        cyc = cycles(pi)
        # fewest swaps first, then keep each measured pair's orientation
        cost = (sum(len(c) - 1 for c in cyc), flips(pi))
        if best is None or cost < best[0]:
            best = (cost, cyc)
    if best is None:
        raise PlanError("no dimension-preserving wire permutation relates the plans")
    swaps = tuple((c[k], c[k + 1]) for c in best[1] for k in range(len(c) - 1))
    return SwapSchedule(swaps)


def apply_schedule(state: PureState, schedule: SwapSchedule) -> PureState:
    for g in schedule.gates():
        state = qsim.apply_gate(state, g)
    return state


def controlled_input(state: PureState, schedule: SwapSchedule) -> PureState:
    """Append the control qubit ``c1|1> + c2|0>`` and apply the controlled swaps."""
    if schedule.control is None:
        raise ValueError("schedule has no control")
    c1, c2 = schedule.control_amplitudes
    control = PureState(WireSystem.of([(schedule.control, 2)]), [c2, c1])
    return apply_schedule(qsim.kron_states([state, control]), schedule)


def superpose_readings(state: PureState, base_plan: ContractionPlan, schedule: SwapSchedule) -> PureState:
    """Both readings at once, on the control wire followed by the result wires.

    The control-|1> branch carries the swapped (converted) reading and the
    control-|0> branch the base reading.  Each branch is contracted on its
    own, since a permutation measurement on the entangled whole is not pure;
    branch ``b`` keeps the phase of its control amplitude.
    """
    prepared = controlled_input(state, schedule)
    c1, c2 = schedule.control_amplitudes
    branches = []
    for value, c in ((0, c2), (1, c1)):
        branch = prepared.project(schedule.control, value)
        if c == 0:
            dims = [branch.system.dim(w) for w in base_plan.result_wires]
            branches.append(np.zeros(dims, dtype=complex))
            continue
        out = execute_plan(branch, base_plan)
        branches.append(out.amplitudes * (c / abs(c)))
    result_system = WireSystem(
        (Wire(schedule.control, 2),) + tuple(state.system.wires[state.system.index(w)] for w in base_plan.result_wires)
    )
    return PureState(result_system, np.stack(branches))


def superpose_many(
    state: PureState,
    base_plan: ContractionPlan,
    schedules: Sequence[SwapSchedule],
    amplitudes: Sequence[complex],
    control_prefix: str = "c",
) -> PureState:
    """Experimental: n readings on a register of ceil(log2 n) control qubits.

    Register value ``k`` selects ``schedules[k]``; unused register values
    carry zero amplitude.
    """
    n = len(schedules)
    if n != len(amplitudes) or n == 0:
        raise ValueError("need one amplitude per schedule")
    amps = np.asarray(amplitudes, dtype=complex)
    if abs(np.vdot(amps, amps).real - 1) > 1e-12:
        raise ValueError("register amplitudes must be normalized")
    nbits = max(1, (n - 1).bit_length())
    dims = [state.system.dim(w) for w in base_plan.result_wires]
    out = np.zeros([2] * nbits + dims, dtype=complex)
    for k, (sched, a) in enumerate(zip(schedules, amps)):
        if a == 0:
            continue
        branch = apply_schedule(state, SwapSchedule(sched.swaps))
        res = execute_plan(branch, base_plan)
        bits = tuple(int(b) for b in format(k, f"0{nbits}b"))
        out[bits] = res.amplitudes * a
    labels = [(f"{control_prefix}{b}", 2) for b in range(nbits)]
    labels += [(w, state.system.dim(w)) for w in base_plan.result_wires]
    return PureState(WireSystem.of(labels), out)


def branch_weights(state: PureState, control: str) -> tuple[float, float]:
    """(weight of control |1>, weight of control |0>), normalized to sum to one."""
    w0 = state.project(control, 0).norm_squared()
    w1 = state.project(control, 1).norm_squared()
    total = w0 + w1
    if total == 0:
        raise qsim.ZeroNormState("both branches vanish")
    return w1 / total, w0 / total
