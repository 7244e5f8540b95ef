"""Dense statevector and density-matrix simulation over labelled qudit wires.

States are immutable: every operation returns a new object.  Amplitudes are
kept as an n-dimensional array with one axis per wire, in wire order.

The central operation is :func:`contract_pairs`, which measures a permutation
operator on pairs of wires and returns the pure state left on the remaining
wires, i.e. the state whose projector equals ``Tr_pairs(P rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence, Union

import numpy as np

from .semantics import WordTensor

MAX_DIMENSION = 2**22
ALGEBRAIC_TOL = 1e-10
SOLVER_TOL = 1e-8


class DimensionMismatch(ValueError):
    pass


class DimensionCapExceeded(ValueError):
    pass


class UnknownWire(KeyError):
    pass


class ImpurityError(ArithmeticError):
    """A permutation measurement left a mixed (or non-positive) state behind."""

    def __init__(self, message: str, purity_gap: float, trace: float):
        super().__init__(message)
        self.purity_gap = purity_gap
        self.trace = trace


class ZeroNormState(ArithmeticError):
    pass


@dataclass(frozen=True)
class Wire:
    label: str
    dim: int


@dataclass(frozen=True)
class WireSystem:
    wires: tuple[Wire, ...]

    def __post_init__(self):
        labels = [w.label for w in self.wires]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate wire labels in {labels}")
        for w in self.wires:
            if w.dim < 1:
                raise ValueError(f"wire {w.label} has dimension {w.dim}")

    @classmethod
    def of(cls, spec: Iterable[tuple[object, int]]) -> "WireSystem":
        return cls(tuple(Wire(str(label), int(dim)) for label, dim in spec))

    @property
    def labels(self) -> list[str]:
        return [w.label for w in self.wires]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(w.dim for w in self.wires)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def index(self, label) -> int:
        label = str(label)
        for k, w in enumerate(self.wires):
            if w.label == label:
                return k
        raise UnknownWire(label)

    def dim(self, label) -> int:
        return self.wires[self.index(label)].dim

    def __contains__(self, label) -> bool:
        return str(label) in self.labels

    def header(self) -> str:
        return "wires: " + ",".join(f"{w.label}:{w.dim}" for w in self.wires)


def _check_cap(total: int) -> None:
    if total > MAX_DIMENSION:
        raise DimensionCapExceeded(f"dense state of dimension {total} exceeds cap {MAX_DIMENSION}")


@dataclass(frozen=True)
class PureState:
    system: WireSystem
    amplitudes: np.ndarray = field(repr=False)
    norm_tracked: float = -1.0

    def __post_init__(self):
        _check_cap(self.system.total_dim)
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.size != self.system.total_dim:
            raise DimensionMismatch(f"{amps.size} amplitudes for {self.system.header()}")
        amps = amps.reshape(self.system.dims)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.norm_tracked < 0:
            object.__setattr__(self, "norm_tracked", float(np.vdot(amps, amps).real))

    @classmethod
    def basis(cls, system: WireSystem, index: Sequence[int]) -> "PureState":
        amps = np.zeros(system.dims, dtype=complex)
        amps[tuple(index)] = 1.0
        return cls(system, amps)

    @property
    def labels(self) -> list[str]:
        return self.system.labels

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalized(self) -> "PureState":
        n2 = self.norm_squared()
        if n2 == 0:
            raise ZeroNormState("cannot normalize a zero state")
        return PureState(self.system, self.amplitudes / math.sqrt(n2), 1.0)

    def relabel(self, mapping: dict) -> "PureState":
        mapping = {str(k): str(v) for k, v in mapping.items()}
        system = WireSystem(tuple(Wire(mapping.get(w.label, w.label), w.dim) for w in self.system.wires))
        return PureState(system, self.amplitudes, self.norm_tracked)

    def reorder(self, labels: Sequence) -> "PureState":
        """Same state with its axes permuted into ``labels`` order."""
        axes = [self.system.index(l) for l in labels]
        if sorted(axes) != list(range(len(self.system.wires))):
            raise ValueError(f"{list(labels)} is not a permutation of {self.labels}")
        system = WireSystem(tuple(self.system.wires[a] for a in axes))
        return PureState(system, np.transpose(self.amplitudes, axes), self.norm_tracked)

    def project(self, label, value: int) -> "PureState":
        """Unnormalized branch with wire ``label`` fixed to ``value``; the wire is removed."""
        k = self.system.index(label)
        system = WireSystem(self.system.wires[:k] + self.system.wires[k + 1:])
        return PureState(system, np.take(self.amplitudes, value, axis=k))

    def dump(self, cutoff: float = 1e-14) -> str:
        lines = [self.system.header()]
        for idx, a in enumerate(self.flat()):
            if abs(a) > cutoff:
                lines.append(f"{idx} {a.real:.17g} {a.imag:.17g}")
        return "\n".join(lines) + "\n"


def parse_dump(text: str) -> PureState:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or not lines[0].startswith("wires:"):
        raise ValueError("state dump must start with a 'wires:' header")
    spec = []
    body = lines[0][len("wires:"):].strip()
    for item in body.split(",") if body else []:
        label, dim = item.rsplit(":", 1)
        spec.append((label, int(dim)))
    system = WireSystem.of(spec)
    amps = np.zeros(system.total_dim, dtype=complex)
    for line in lines[1:]:
        idx, re, im = line.split()
        amps[int(idx)] = complex(float(re), float(im))
    return PureState(system, amps)


@dataclass(frozen=True)
class DensityMatrix:
    system: WireSystem
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.system.total_dim
        _check_cap(d * d)
        m = np.array(self.entries, dtype=complex).reshape(d, d)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        v = state.flat()
        return cls(state.system, np.outer(v, v.conj()))

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def is_hermitian(self, tol: float = ALGEBRAIC_TOL) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, atol=tol, rtol=0))

    def purity_gap(self) -> float:
        """``|Tr rho^2 - (Tr rho)^2|``; zero for (unnormalized) pure states."""
        tr = self.trace()
        return abs(np.trace(self.entries @ self.entries) - tr * tr)


# -- gates ---------------------------------------------------------------------

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

_ARITY = {"H": 1, "X": 1, "Z": 1, "CNOT": 2, "SWAP": 2, "CSWAP": 3}


def swap_matrix(d: int) -> np.ndarray:
    m = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            m[b * d + a, a * d + b] = 1
    return m


def is_unitary(m: np.ndarray, tol: float = ALGEBRAIC_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(
        m.conj().T @ m, np.eye(m.shape[0]), atol=tol, rtol=0
    )


@dataclass(frozen=True)
class GateOp:
    """A gate on named wires.  ``CSWAP`` takes (control, a, b)."""

    kind: str
    targets: tuple[str, ...]
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(str(t) for t in self.targets))
        if self.kind == "Unitary":
            if self.matrix is None or not is_unitary(self.matrix):
                raise ValueError("Unitary gate needs a unitary matrix")
            if not self.targets:
                raise ValueError("Unitary gate needs at least one target")
        elif self.kind in _ARITY:
            if len(self.targets) != _ARITY[self.kind]:
                raise ValueError(f"{self.kind} acts on {_ARITY[self.kind]} wires, got {self.targets}")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"repeated target in {self.targets}")

    def matrix_for(self, dims: Sequence[int]) -> np.ndarray:
        dims = tuple(dims)
        if self.kind in ("H", "X", "Z", "CNOT"):
            if any(d != 2 for d in dims):
                raise DimensionMismatch(f"{self.kind} needs qubit wires, got dims {dims}")
            return {"H": _H, "X": _X, "Z": _Z, "CNOT": _CNOT}[self.kind]
        if self.kind == "SWAP":
            if dims[0] != dims[1]:
                raise DimensionMismatch(f"SWAP between wires of dims {dims}")
            return swap_matrix(dims[0])
        if self.kind == "CSWAP":
            if dims[0] != 2:
                raise DimensionMismatch(f"CSWAP control must be a qubit, got dim {dims[0]}")
            if dims[1] != dims[2]:
                raise DimensionMismatch(f"CSWAP between wires of dims {dims[1:]}")
            d2 = dims[1] ** 2
            m = np.eye(2 * d2, dtype=complex)
            m[d2:, d2:] = swap_matrix(dims[1])
            return m
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape[0] != prod(dims):
            raise DimensionMismatch(f"{m.shape[0]}x{m.shape[0]} unitary on wires of dims {dims}")
        return m


def apply_matrix(state: PureState, matrix: np.ndarray, targets: Sequence) -> PureState:
    axes = [state.system.index(t) for t in targets]
    dims = [state.system.wires[a].dim for a in axes]
    op = np.asarray(matrix, dtype=complex).reshape(dims + dims)
    k = len(axes)
    out = np.tensordot(op, state.amplitudes, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return PureState(state.system, out, state.norm_tracked)


def apply_gate(state: PureState, g: GateOp) -> PureState:
    dims = [state.system.dim(t) for t in g.targets]
    return apply_matrix(state, g.matrix_for(dims), g.targets)


# -- construction ----------------------------------------------------------------

Part = Union[WordTensor, PureState]


def product_state(parts: Sequence[Part], labels: Sequence | None = None, start: int = 1) -> PureState:
    """Tensor product of the parts in order, on freshly numbered wires.

    Wires are labelled ``start, start+1, ...`` unless ``labels`` is given.
    """
    dims: list[int] = []
    for part in parts:
        dims.extend(part.dims if isinstance(part, WordTensor) else part.system.dims)
    if labels is None:
        labels = [str(start + k) for k in range(len(dims))]
    if len(labels) != len(dims):
        raise ValueError(f"{len(labels)} labels for {len(dims)} wires")
    _check_cap(prod(dims))
    amps = np.ones((), dtype=complex)
    norm = 1.0
    for part in parts:
        a = part.amplitudes
        amps = np.multiply.outer(amps, a)
        norm *= float(np.vdot(a, a).real)
    return PureState(WireSystem.of(zip(labels, dims)), amps, norm)


def kron_states(parts: Sequence[PureState]) -> PureState:
    """Product of states that keep their own wire labels."""
    labels = [l for p in parts for l in p.labels]
    return product_state(parts, labels=labels)


# -- permutation measurement ------------------------------------------------------


def _pair_axes(state: PureState, pairs: Sequence[tuple]) -> tuple[list[int], list[int]]:
    left, right = [], []
    for i, j in pairs:
        a, b = state.system.index(i), state.system.index(j)
        da, db = state.system.wires[a].dim, state.system.wires[b].dim
        if da != db:
            raise DimensionMismatch(f"cannot pair wire {i} (dim {da}) with wire {j} (dim {db})")
        left.append(a)
        right.append(b)
    used = left + right
    if len(set(used)) != len(used):
        raise ValueError(f"a wire appears twice in {list(pairs)}")
    return left, right


def apply_permutation(state: PureState, i, j) -> PureState:
    """Exchange the contents of wires ``i`` and ``j`` (the operator P_ij)."""
    (a,), (b,) = _pair_axes(state, [(i, j)])
    return PureState(state.system, np.swapaxes(state.amplitudes, a, b), state.norm_tracked)


def permutation_expectation(state: PureState, i, j) -> float:
    """``<psi|P_ij|psi> / <psi|psi>``."""
    n2 = state.norm_squared()
    if n2 == 0:
        raise ZeroNormState("expectation on a zero state")
    swapped = apply_permutation(state, i, j)
    value = np.vdot(state.amplitudes, swapped.amplitudes) / n2
    if abs(value.imag) > ALGEBRAIC_TOL:
        raise ArithmeticError(f"permutation expectation has imaginary part {value.imag}")
    return float(value.real)


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive."""
    flat = v.reshape(-1)
    if flat.size == 0:
        return v
    k = int(np.argmax(np.abs(flat)))
    if flat[k] == 0:
        return v
    return v * (abs(flat[k]) / flat[k])


def contract_pairs(state: PureState, pairs: Sequence[tuple], tol: float = ALGEBRAIC_TOL) -> PureState:
    """Jointly measure ``P_i1j1 (x) P_i2j2 (x) ...`` and return the effective state.

    Writing the input as ``sum_abr psi[a,b,r] |a>|b>|r>`` with ``a`` on the
    left wires and ``b`` on the right wires, the reduced operator is
    ``M = sum_xy u[y,x] u[x,y]^dagger`` with ``u[a,b] = psi[a,b,:]``.  ``M`` is
    only ever formed in a factored basis of rank at most
    ``min(dim rest, dim pairs)``.  It must be pure and positive; the result is
    its generating vector, unnormalized, with the phase fixed by
    :func:`canonical_phase`.
    """
    if not pairs:
        return state
    left, right = _pair_axes(state, pairs)
    rest = [k for k in range(len(state.system.wires)) if k not in left and k not in right]
    wires = state.system.wires
    dl = prod(wires[a].dim for a in left)
    dr = prod(wires[k].dim for k in rest)
    psi = np.transpose(state.amplitudes, left + right + rest).reshape(dl, dl, dr)
    m = dl * dl
    c = psi.reshape(m, dr).T                       # columns u[a,b]
    perm = np.arange(m).reshape(dl, dl).T.reshape(-1)  # (x,y) -> (y,x)

    if dr <= m:
        basis = None
        k_mat = c[:, perm] @ c.conj().T
    else:
        basis, r = np.linalg.qr(c)
        k_mat = r[:, perm] @ r.conj().T
    k_mat = (k_mat + k_mat.conj().T) / 2

    scale = state.norm_squared()
    evals, evecs = np.linalg.eigh(k_mat)
    trace = float(evals.sum())
    gap = abs(float((evals**2).sum()) - trace * trace)
    bound = tol * max(scale * scale, np.finfo(float).tiny)
    # the purity identity alone also holds for swap-like operators with
    # negative eigenvalues, so positivity is checked separately
    lowest = float(evals.min())
    if gap > bound or lowest < -tol * max(scale, np.finfo(float).tiny):
        raise ImpurityError(
            f"measuring P on {list(pairs)} does not leave a pure state "
            f"(|Tr M^2 - (Tr M)^2| = {gap:.3e}, Tr M = {trace:.3e}, lowest eigenvalue {lowest:.3e})",
            gap,
            trace,
        )
    top = int(np.argmax(evals))
    lam = max(float(evals[top]), 0.0)
    vec = evecs[:, top] if basis is None else basis @ evecs[:, top]
    phi = canonical_phase(math.sqrt(lam) * vec)
    system = WireSystem(tuple(wires[k] for k in rest))
    return PureState(system, phi.reshape(system.dims))


def contract_wires(state: PureState, i, j, tol: float = ALGEBRAIC_TOL) -> PureState:
    return contract_pairs(state, [(i, j)], tol)


def swap_partial_trace(rho: DensityMatrix, pairs: Sequence[tuple]) -> DensityMatrix:
    """``Tr_pairs(P rho)`` with ``P`` built as an explicit permutation matrix."""
    system = rho.system
    perm_op = np.eye(system.total_dim, dtype=complex)
    for i, j in pairs:
        cols = [apply_permutation(PureState(system, e), i, j).flat() for e in np.eye(system.total_dim)]
        perm_op = np.array(cols).T @ perm_op
    touched = {str(l) for pair in pairs for l in pair}
    keep = [l for l in system.labels if l not in touched]
    return partial_trace(DensityMatrix(system, perm_op @ rho.entries), keep)


def operator_probes(d: int) -> list[np.ndarray]:
    """``d*d`` Hermitian operators spanning all d x d matrices."""
    probes = []
    for k in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[k, k] = 1
        probes.append(e)
    for k in range(d):
        for l in range(k + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[k, l] = sym[l, k] = 1
            asym = np.zeros((d, d), dtype=complex)
            asym[k, l], asym[l, k] = 1j, -1j
            probes.extend([sym, asym])
    return probes


@dataclass(frozen=True)
class ProbeResult:
    state: PureState
    condition_number: float
    expectations: np.ndarray = field(repr=False)


def operator_probe_reconstruct(state: PureState, contracted: tuple, probe_wire) -> ProbeResult:
    """Recover the effective state on ``probe_wire`` from expectation values.

    Evaluates ``<Psi| P_ij (x) O^a |Psi>`` for an informationally complete
    set of Hermitian ``O^a`` on the probe wire, solves the linear system for
    the operator ``M`` with ``Tr(M O^a)`` matching, and takes its rank-one
    factor.
    """
    i, j = contracted
    touched = {str(i), str(j), str(probe_wire)}
    if set(state.labels) != touched:
        raise ValueError(f"probe reconstruction needs exactly wires {sorted(touched)}, got {state.labels}")
    d = state.system.dim(probe_wire)
    swapped = apply_permutation(state, i, j)
    probes = operator_probes(d)
    expect = np.array([
        np.vdot(state.amplitudes, apply_matrix(swapped, o, [probe_wire]).amplitudes) for o in probes
    ])
    # Tr(M O) = sum_kl M[k,l] O[l,k]  ->  row = O.T flattened
    design = np.array([o.T.reshape(-1) for o in probes])
    cond = float(np.linalg.cond(design))
    if not np.isfinite(cond) or cond > 1e8:
        raise np.linalg.LinAlgError(f"probe system ill-conditioned (condition number {cond:.3e})")
    m = np.linalg.solve(design, expect).reshape(d, d)
    m = (m + m.conj().T) / 2
    evals, evecs = np.linalg.eigh(m)
    top = int(np.argmax(evals))
    phi = canonical_phase(math.sqrt(max(float(evals[top]), 0.0)) * evecs[:, top])
    system = WireSystem((state.system.wires[state.system.index(probe_wire)],))
    return ProbeResult(PureState(system, phi), cond, expect)


def partial_trace(rho: DensityMatrix, keep: Sequence) -> DensityMatrix:
    keep = [str(k) for k in keep]
    system = rho.system
    for k in keep:
        system.index(k)
    n = len(system.wires)
    dims = list(system.dims)
    t = rho.entries.reshape(dims + dims)
    keep_axes = [system.index(k) for k in keep]
    drop = [a for a in range(n) if a not in keep_axes]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError("too many wires for partial_trace")
    row = [letters[a] for a in range(n)]
    col = [letters[a] if a in drop else letters[n + a] for a in range(n)]
    out = [letters[a] for a in keep_axes] + [letters[n + a] for a in keep_axes]
    reduced = np.einsum("".join(row + col) + "->" + "".join(out), t)
    kept = WireSystem(tuple(system.wires[a] for a in keep_axes))
    return DensityMatrix(kept, reduced.reshape(kept.total_dim, kept.total_dim))


# -- two-qubit Bell machinery ------------------------------------------------------

_SQ = 1 / math.sqrt(2)
# beta_11 is the singlet; the other three are triplets.
BELL_STATES = {
    (0, 0): np.array([_SQ, 0, 0, _SQ], dtype=complex),
    (0, 1): np.array([_SQ, 0, 0, -_SQ], dtype=complex),
    (1, 0): np.array([0, _SQ, _SQ, 0], dtype=complex),
    (1, 1): np.array([0, _SQ, -_SQ, 0], dtype=complex),
}
BELL_SIGNS = {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): -1}


def _require_qubits(state: PureState, *labels) -> None:
    for l in labels:
        if state.system.dim(l) != 2:
            raise DimensionMismatch(f"wire {l} has dim {state.system.dim(l)}; Bell operations need qubits")


def _pair_block(state: PureState, i, j) -> np.ndarray:
    a, b = state.system.index(i), state.system.index(j)
    rest = [k for k in range(len(state.system.wires)) if k not in (a, b)]
    return np.transpose(state.amplitudes, [a, b] + rest).reshape(4, -1)


def bell_expectation(state: PureState, i, j) -> float:
    """Swap expectation from Bell-basis probabilities (+,+,+,-)."""
    _require_qubits(state, i, j)
    block = _pair_block(state, i, j)
    n2 = state.norm_squared()
    if n2 == 0:
        raise ZeroNormState("expectation on a zero state")
    total = 0.0
    for key, beta in BELL_STATES.items():
        # sum/difference of two amplitudes, halved once at the end, so that
        # Bell states themselves give exactly +1 or -1
        amp = np.rint(beta.conj() * math.sqrt(2)) @ block
        total += BELL_SIGNS[key] * float(np.vdot(amp, amp).real)
    return total / 2 / n2


def bell_basis_change(state: PureState, i, j) -> PureState:
    """Undo the Bell preparation ``CNOT(i->j) . H(i)``: apply CNOT then H."""
    _require_qubits(state, i, j)
    out = apply_gate(state, GateOp("CNOT", (i, j)))
    return apply_gate(out, GateOp("H", (i,)))


def bell_prepare(state: PureState, i, j) -> PureState:
    _require_qubits(state, i, j)
    out = apply_gate(state, GateOp("H", (i,)))
    return apply_gate(out, GateOp("CNOT", (i, j)))


def bell_effect_contract(state: PureState, i, j) -> PureState:
    """Apply the effect ``<beta_00|`` to wires ``i, j``; result is unnormalized."""
    _require_qubits(state, i, j)
    a, b = state.system.index(i), state.system.index(j)
    rest = [k for k in range(len(state.system.wires)) if k not in (a, b)]
    block = np.transpose(state.amplitudes, [a, b] + rest)
    out = (block[0, 0] + block[1, 1]) * _SQ
    system = WireSystem(tuple(state.system.wires[k] for k in rest))
    return PureState(system, out)


# -- measurement ---------------------------------------------------------------------


@dataclass(frozen=True)
class Measurement:
    outcome: tuple[int, ...]
    collapsed: PureState
    probability: float


def outcome_probabilities(state: PureState, wires: Sequence) -> np.ndarray:
    n2 = state.norm_squared()
    if n2 == 0:
        raise ZeroNormState("cannot measure a zero state")
    axes = [state.system.index(w) for w in wires]
    others = tuple(k for k in range(len(state.system.wires)) if k not in axes)
    probs = np.sum(np.abs(state.amplitudes) ** 2, axis=others) / n2
    # surviving axes come out ascending; reorder to match ``wires``
    ascending = sorted(axes)
    return np.transpose(probs, [ascending.index(a) for a in axes])


def measure_wires(state: PureState, wires: Sequence, rng_seed=None) -> Measurement:
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    probs = outcome_probabilities(state, wires)
    flat = probs.reshape(-1)
    flat = flat / flat.sum()
    k = int(rng.choice(flat.size, p=flat))
    outcome = tuple(int(x) for x in np.unravel_index(k, probs.shape))
    mask = np.zeros(state.system.dims, dtype=bool)
    index: list = [slice(None)] * len(state.system.wires)
    for w, v in zip(wires, outcome):
        index[state.system.index(w)] = v
    mask[tuple(index)] = True
    collapsed = PureState(state.system, np.where(mask, state.amplitudes, 0)).normalized()
    return Measurement(outcome, collapsed, float(flat[k]))


# -- comparisons --------------------------------------------------------------------


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_phase || e^{i phase} a - b ||``."""
    a, b = np.asarray(a).reshape(-1), np.asarray(b).reshape(-1)
    overlap = np.vdot(a, b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(a * phase - b))


def direction_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between the normalized vectors, ignoring global phase and scale."""
    a, b = np.asarray(a).reshape(-1), np.asarray(b).reshape(-1)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0 if na == nb else 1.0
    return phase_distance(a / na, b / nb)
