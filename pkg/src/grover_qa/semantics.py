"""Tensor semantics for categorial types.

Every type is sent to an ordered list of factor spaces: ``n`` to N, ``s`` to
S, ``w`` to I (x) N (x) I (x) S, and every compound type to the concatenation
of its parts' factors.  Each factor keeps a record of which type leaf it
came from, so contraction partners are found by structure rather than by
counting positions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .typelogic import (
    ApplyLeft,
    ApplyRight,
    Derivation,
    Leaf,
    Over,
    Primitive,
    Product,
    SyntacticType,
    Under,
)


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SemanticConfig:
    dim_N: int = 2
    dim_S: int = 2
    p: int = 1

    def __post_init__(self):
        if self.dim_N < 1 or self.dim_S < 1 or self.p < 0:
            raise ValueError(f"invalid semantic dimensions {self}")

    @property
    def dim_I(self) -> int:
        return 2**self.p


@dataclass(frozen=True)
class FactorSpace:
    role: str  # "N", "S" or "I"
    dim: int
    origin: tuple[str, ...] = ()  # path from the type root to the producing leaf

    def __str__(self) -> str:
        return f"{self.role}({self.dim})"


@dataclass(frozen=True)
class SemanticSpace:
    factors: tuple[FactorSpace, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def __len__(self) -> int:
        return len(self.factors)

    def __str__(self) -> str:
        return " (x) ".join(str(f) for f in self.factors)


def interpret_type(t: SyntacticType, cfg: SemanticConfig) -> SemanticSpace:
    return SemanticSpace(tuple(_factors(t, cfg, ())))


def _factors(t: SyntacticType, cfg: SemanticConfig, path: tuple[str, ...]) -> list[FactorSpace]:
    if isinstance(t, Primitive):
        if t.name == "n":
            return [FactorSpace("N", cfg.dim_N, path)]
        if t.name == "s":
            return [FactorSpace("S", cfg.dim_S, path)]
        slots = (("I", cfg.dim_I), ("N", cfg.dim_N), ("I", cfg.dim_I), ("S", cfg.dim_S))
        return [FactorSpace(role, dim, path + (f"w{k}",)) for k, (role, dim) in enumerate(slots)]
    if isinstance(t, Over):
        return _factors(t.result, cfg, path + ("result",)) + _factors(t.argument, cfg, path + ("argument",))
    if isinstance(t, Under):
        return _factors(t.argument, cfg, path + ("argument",)) + _factors(t.result, cfg, path + ("result",))
    if isinstance(t, Product):
        return _factors(t.left, cfg, path + ("left",)) + _factors(t.right, cfg, path + ("right",))
    raise TypeError(f"not a syntactic type: {t!r}")


def split_functor(t: SyntacticType, cfg: SemanticConfig) -> tuple[list[int], list[int]]:
    """Factor positions of a division type: (argument positions, result positions)."""
    space = interpret_type(t, cfg)
    if not isinstance(t, (Over, Under)):
        raise TypeError(f"{t} is not a functor type")
    arg = [k for k, f in enumerate(space.factors) if f.origin[0] == "argument"]
    res = [k for k, f in enumerate(space.factors) if f.origin[0] == "result"]
    return arg, res


@dataclass(frozen=True)
class WordTensor:
    space: SemanticSpace
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.size != self.space.total_dim:
            raise ShapeMismatch(
                f"{amps.size} amplitudes for space {self.space} of dimension {self.space.total_dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("tensor has non-finite entries")
        amps = amps.reshape(self.space.dims)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def of_type(cls, t: SyntacticType, cfg: SemanticConfig, amplitudes) -> "WordTensor":
        return cls(interpret_type(t, cfg), amplitudes)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)


def conjugate(w: WordTensor) -> WordTensor:
    return WordTensor(w.space, np.conj(w.amplitudes))


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    syn_type: SyntacticType
    tensor_ref: str


@dataclass
class Lexicon:
    config: SemanticConfig
    entries: dict[str, LexiconEntry]
    tensors: dict[str, WordTensor]

    def __post_init__(self):
        for entry in self.entries.values():
            expected = interpret_type(entry.syn_type, self.config).dims
            got = self.tensors[entry.tensor_ref].dims
            if expected != got:
                raise ShapeMismatch(
                    f"{entry.word!r}: tensor dims {list(got)} but type {entry.syn_type} needs {list(expected)}"
                )

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def types(self, words: Sequence[str]) -> list[SyntacticType]:
        return [self.entries[w].syn_type for w in words]

    def tensors_for(self, words: Sequence[str]) -> list[WordTensor]:
        return [self.tensors[self.entries[w].tensor_ref] for w in words]


def contract_classical(
    d: Derivation,
    tensors: Sequence[WordTensor],
    cfg: SemanticConfig,
    conjugate_arguments: bool = False,
) -> WordTensor:
    """Index-contraction meaning of a derivation.

    ``tensors`` holds one tensor per word position.  With
    ``conjugate_arguments`` the argument side of every application is
    complex-conjugated, which is what the permutation-measurement circuit
    computes; the default is the plain real-field contraction.
    """
    if isinstance(d, Leaf):
        w = tensors[d.index]
        expected = interpret_type(d.type, cfg).dims
        if w.dims != expected:
            raise ShapeMismatch(f"word {d.index}: tensor dims {list(w.dims)}, type {d.type} needs {list(expected)}")
        return w
    f = contract_classical(d.functor, tensors, cfg, conjugate_arguments)
    x = contract_classical(d.argument, tensors, cfg, conjugate_arguments)
    xa = np.conj(x.amplitudes) if conjugate_arguments else x.amplitudes
    arg_pos, _ = split_functor(d.functor.type, cfg)
    out = np.tensordot(f.amplitudes, xa, axes=(arg_pos, list(range(xa.ndim))))
    return WordTensor(interpret_type(d.type, cfg), out)


def random_tensor(t: SyntacticType, cfg: SemanticConfig, rng: np.random.Generator, complex_: bool = True) -> WordTensor:
    space = interpret_type(t, cfg)
    amps = rng.normal(size=space.dims)
    if complex_:
        amps = amps + 1j * rng.normal(size=space.dims)
    return WordTensor(space, amps)
