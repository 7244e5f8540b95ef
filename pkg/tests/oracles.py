"""Brute-force reference computations.

Everything here is written with explicit index loops or dense matrices and
shares no code with the package beyond the type objects themselves.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from grover_qa.typelogic import Over, Under


# -- grammar -------------------------------------------------------------------------


def all_bracketings(lo: int, hi: int):
    """Every binary bracketing of word indices lo..hi-1, as nested tuples."""
    if hi - lo == 1:
        yield lo
        return
    for m in range(lo + 1, hi):
        for left in all_bracketings(lo, m):
            for right in all_bracketings(m, hi):
                yield (left, right)


def _types_of(tree, types):
    """All types a bracketing can produce (a set, since both rules may fire)."""
    if isinstance(tree, int):
        return {types[tree]}
    out = set()
    for lt in _types_of(tree[0], types):
        for rt in _types_of(tree[1], types):
            if isinstance(lt, Over) and lt.argument == rt:
                out.add(lt.result)
            if isinstance(rt, Under) and rt.argument == lt:
                out.add(rt.result)
    return out


def _signature(tree) -> str:
    if isinstance(tree, int):
        return str(tree)
    return f"({_signature(tree[0])} {_signature(tree[1])})"


def brute_signatures(types, goal) -> set[str]:
    return {_signature(t) for t in all_bracketings(0, len(types)) if goal in _types_of(t, types)}


# -- tensor contractions ---------------------------------------------------------------


def alice_talks_quantum(A: np.ndarray, t: np.ndarray) -> np.ndarray:
    """sum_{q} conj(A[q]) t[q, r]"""
    out = np.zeros(t.shape[1], dtype=complex)
    for q in range(t.shape[0]):
        for r in range(t.shape[1]):
            out[r] += np.conj(A[q]) * t[q, r]
    return out


def alice_talks_classical(A: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape[1], dtype=complex)
    for q in range(t.shape[0]):
        for r in range(t.shape[1]):
            out[r] += A[q] * t[q, r]
    return out


def reading_one(r, m, a, p, conj: bool) -> np.ndarray:
    """rigorous (mathematicians (and physicists)); ``a[i, j, k]`` has factors
    (left argument, result, right argument)."""
    c = np.conj if conj else (lambda x: x)
    d = r.shape[0]
    out = np.zeros(d, dtype=complex)
    for o in range(d):
        for x in range(d):
            for i in range(d):
                for k in range(d):
                    # and.phys -> Z[i,x]; math -> Y[x]; rigorous -> out[o]
                    out[o] += r[o, x] * c(c(m[i]) * a[i, x, k] * c(p[k]))
    return out


def reading_two(r, m, a, p, conj: bool) -> np.ndarray:
    """(rigorous mathematicians) (and physicists)"""
    c = np.conj if conj else (lambda x: x)
    d = r.shape[0]
    out = np.zeros(d, dtype=complex)
    for y in range(d):
        for i in range(d):
            for b in range(d):
                for k in range(d):
                    out[y] += c(r[i, b] * c(m[b])) * a[i, y, k] * c(p[k])
    return out


# -- dense operators ---------------------------------------------------------------------


def swap_operator(dims: list[int], i: int, j: int) -> np.ndarray:
    """Permutation matrix exchanging tensor factors i and j (by position)."""
    total = math.prod(dims)
    op = np.zeros((total, total))
    for idx in itertools.product(*[range(d) for d in dims]):
        swapped = list(idx)
        swapped[i], swapped[j] = idx[j], idx[i]
        op[np.ravel_multi_index(swapped, dims), np.ravel_multi_index(idx, dims)] = 1
    return op


def partial_trace_loops(rho: np.ndarray, dims: list[int], keep: list[int]) -> np.ndarray:
    """Partial trace by summing matrix entries over the traced indices."""
    kd = [dims[k] for k in keep]
    out = np.zeros((math.prod(kd), math.prod(kd)), dtype=complex)
    for row in itertools.product(*[range(d) for d in dims]):
        for col in itertools.product(*[range(d) for d in dims]):
            if any(row[k] != col[k] for k in range(len(dims)) if k not in keep):
                continue
            r = np.ravel_multi_index([row[k] for k in keep], kd)
            c = np.ravel_multi_index([col[k] for k in keep], kd)
            out[r, c] += rho[np.ravel_multi_index(row, dims), np.ravel_multi_index(col, dims)]
    return out


def grover_dense(truth: list[bool], k: int) -> np.ndarray:
    """Index/truth amplitudes after k iterations with dense 2P x 2P matrices."""
    P = len(truth)
    psi = np.zeros(2 * P, dtype=complex)
    for i, ok in enumerate(truth):
        psi[2 * i + int(ok)] = 1 / math.sqrt(P)
    oracle = np.diag([(-1) ** (x % 2) for x in range(2 * P)]).astype(complex)
    diffusion = 2 * np.outer(psi, psi.conj()) - np.eye(2 * P)
    state = psi.copy()
    for _ in range(k):
        state = diffusion @ (oracle @ state)
    return state


def same_up_to_phase(a, b, tol) -> bool:
    a, b = np.ravel(a), np.ravel(b)
    overlap = np.vdot(a, b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1
    return np.linalg.norm(a * phase - b) <= tol * max(1.0, np.linalg.norm(b))


def same_direction(a, b, tol) -> bool:
    a, b = np.ravel(a), np.ravel(b)
    return same_up_to_phase(a / np.linalg.norm(a), b / np.linalg.norm(b), tol)


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)
