"""Batch command-line front end.

Exit codes: 0 success, 1 negative result (no derivation, wrong sample,
nothing to search for), 2 usage or input error, 3 numeric invariant
violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import compiler, grover, qsim
from .semantics import (
    Lexicon,
    LexiconEntry,
    SemanticConfig,
    ShapeMismatch,
    WordTensor,
    contract_classical,
    interpret_type,
)
from .typelogic import TypeSyntaxError, derivation_signature, derive, parse_type

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
CONTROL_WIRE = "c"


class UsageError(Exception):
    pass


# -- file formats ------------------------------------------------------------------


def lexicon_from_json(data: dict) -> Lexicon:
    try:
        cfg = SemanticConfig(**{k: int(v) for k, v in data["config"].items()})
        entries, tensors = {}, {}
        for raw in data["entries"]:
            word = raw["word"]
            if word in entries:
                raise UsageError(f"duplicate lexicon entry {word!r}")
            t = parse_type(raw["type"])
            dims = tuple(int(d) for d in raw["dims"])
            space = interpret_type(t, cfg)
            if dims != space.dims:
                raise UsageError(f"{word!r}: dims {list(dims)} but type {t} needs {list(space.dims)}")
            amps = np.array([complex(re, im) for re, im in raw["amplitudes"]])
            if amps.size != math.prod(dims):
                raise UsageError(f"{word!r}: {amps.size} amplitudes for dims {list(dims)}")
            entries[word] = LexiconEntry(word, t, word)
            tensors[word] = WordTensor(space, amps)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (UsageError, TypeSyntaxError, ShapeMismatch)):
            raise
        raise UsageError(f"malformed lexicon: {exc!r}") from exc
    return Lexicon(cfg, entries, tensors)


def lexicon_to_json(lex: Lexicon) -> dict:
    cfg = lex.config
    return {
        "config": {"dim_N": cfg.dim_N, "dim_S": cfg.dim_S, "p": cfg.p},
        "entries": [
            {
                "word": e.word,
                "type": str(e.syn_type),
                "dims": list(lex.tensors[e.tensor_ref].dims),
                "amplitudes": [[a.real, a.imag] for a in lex.tensors[e.tensor_ref].flat()],
            }
            for e in lex.entries.values()
        ],
    }


def _read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def load_lexicon(path: str | Path) -> Lexicon:
    return lexicon_from_json(_read_json(path))


def load_instance(path: str | Path) -> grover.QAInstance:
    data = _read_json(path)
    try:
        answers, truth = list(data["answers"]), [bool(t) for t in data["truth"]]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed instance: {exc!r}") from exc
    P = len(answers)
    if P < 1 or P & (P - 1):
        raise UsageError(f"number of answers must be a power of two, got {P}")
    if "p" in data and 2 ** int(data["p"]) != P:
        raise UsageError(f"p = {data['p']} but {P} answers given")
    if len(truth) != P:
        raise UsageError(f"{len(truth)} truth values for {P} answers")
    return grover.QAInstance.canonical(answers, truth)


# -- shared pieces -------------------------------------------------------------------


def _phrase(lex: Lexicon, phrase: str) -> list[str]:
    words = phrase.split()
    if not words:
        raise UsageError("empty phrase")
    unknown = [w for w in words if w not in lex]
    if unknown:
        raise UsageError(f"unknown word(s): {', '.join(unknown)}")
    return words


def _need_lexicon(args) -> Lexicon:
    if not args.lexicon:
        raise UsageError("--lexicon is required for this command")
    return load_lexicon(args.lexicon)


def _select(derivations: list, selector: str | None):
    if not derivations:
        return None
    if selector is None:
        if len(derivations) > 1:
            raise UsageError(f"ambiguous reading selector: {len(derivations)} derivations, pass --reading")
        return derivations[0]
    if selector.isdigit():
        k = int(selector)
        if k >= len(derivations):
            raise UsageError(f"reading {k} out of range (0..{len(derivations) - 1})")
        return derivations[k]
    matches = [d for d in derivations if derivation_signature(d) == selector.strip()]
    if not matches:
        raise UsageError(f"no derivation with signature {selector!r}")
    return matches[0]


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _relative_residual(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(b)), np.finfo(float).tiny)
    return qsim.phase_distance(a, b) / scale


def _emit(args, report: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(lines))


def _complex_list(v: np.ndarray) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in np.asarray(v).reshape(-1)]


# -- subcommands --------------------------------------------------------------------


def cmd_parse(args) -> int:
    lex = _need_lexicon(args)
    words = _phrase(lex, args.phrase)
    goal = parse_type(args.goal)
    derivations = derive(lex.types(words), goal)
    sigs = [derivation_signature(d) for d in derivations]
    report = {
        "phrase": args.phrase,
        "goal": str(goal),
        "types": [str(t) for t in lex.types(words)],
        "count": len(derivations),
        "derivations": sigs,
    }
    lines = [f"phrase: {args.phrase}", f"goal: {goal}", f"derivations: {len(sigs)}"]
    lines += [f"  [{k}] {s}" for k, s in enumerate(sigs)]
    _emit(args, report, lines)
    return EXIT_OK if derivations else EXIT_NEGATIVE


def _bell_execute(state: qsim.PureState, plan: compiler.ContractionPlan) -> qsim.PureState:
    for step in plan.steps:
        for i, j in step:
            state = qsim.bell_effect_contract(state, i, j)
    return state.reorder(list(plan.result_wires))


def cmd_contract(args) -> int:
    lex = _need_lexicon(args)
    words = _phrase(lex, args.phrase)
    goal = parse_type(args.goal)
    types, tensors = lex.types(words), lex.tensors_for(words)
    d = _select(derive(types, goal), args.reading)
    if d is None:
        print(f"no derivation of {goal} for {args.phrase!r}", file=sys.stderr)
        return EXIT_NEGATIVE
    alloc = compiler.allocate_wires(types, lex.config)
    plan = compiler.plan_contractions(d, alloc)
    _write(args.dump_plan, plan.dump())
    result_system = qsim.WireSystem(tuple(alloc.system.wires[alloc.system.index(w)] for w in plan.result_wires))

    residual = None
    if args.mode == "quantum":
        out = compiler.execute_plan(alloc.parts(tensors), plan)
        expected = contract_classical(d, tensors, lex.config, conjugate_arguments=True).amplitudes
        residual = _relative_residual(out.flat(), expected.reshape(-1))
    elif args.mode == "classical":
        value = contract_classical(d, tensors, lex.config)
        out = qsim.PureState(result_system, value.amplitudes)
    else:
        full = qsim.kron_states(alloc.parts(tensors))
        out = _bell_execute(full, plan)

    _write(args.dump_state, out.dump())
    report = {
        "phrase": args.phrase,
        "reading": derivation_signature(d),
        "mode": args.mode,
        "plan": [list(p) for p in plan.pairs],
        "result_wires": list(plan.result_wires),
        "amplitudes": _complex_list(out.flat()),
        "norm_tracked": out.norm_tracked,
        "residual": residual,
    }
    lines = [f"reading: {report['reading']}", f"mode: {args.mode}", "plan: " + " ".join(f"P({i},{j})" for i, j in plan.pairs)]
    lines += [out.dump().rstrip("\n"), f"norm_tracked: {out.norm_tracked:.12g}"]
    if residual is not None:
        lines.append(f"residual vs classical: {residual:.3e}")
    _emit(args, report, lines)
    if residual is not None and residual > args.tolerance:
        print(f"quantum and classical contraction disagree (residual {residual:.3e})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _parse_control(text: str) -> tuple[complex, complex]:
    try:
        c1, c2 = (complex(part.strip().replace(" ", "")) for part in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--control expects two numbers 'c1,c2', got {text!r}") from exc
    n2 = abs(c1) ** 2 + abs(c2) ** 2
    # four-digit decimals such as 0.7071 are accepted and renormalized
    if abs(n2 - 1) > 1e-3:
        raise UsageError(f"|c1|^2 + |c2|^2 = {n2:.6g}, expected 1")
    return c1 / math.sqrt(n2), c2 / math.sqrt(n2)


def cmd_ambiguity(args) -> int:
    lex = _need_lexicon(args)
    words = _phrase(lex, args.phrase)
    goal = parse_type(args.goal)
    types, tensors = lex.types(words), lex.tensors_for(words)
    derivations = derive(types, goal)
    if len(derivations) != 2:
        raise UsageError(f"ambiguity needs exactly 2 derivations, found {len(derivations)}")
    c1, c2 = _parse_control(args.control)
    alloc = compiler.allocate_wires(types, lex.config, tensors)
    plans = [compiler.plan_contractions(d, alloc) for d in derivations]
    base = plans[1]
    schedule = compiler.reading_swap_schedule(base, plans[0]).with_control(CONTROL_WIRE, c1, c2)
    _write(args.dump_plan, schedule.dump() + base.dump())

    prepared = compiler.controlled_input(alloc.state, schedule)
    pre = compiler.branch_weights(prepared, CONTROL_WIRE)
    out = compiler.superpose_readings(alloc.state, base, schedule)
    post = compiler.branch_weights(out, CONTROL_WIRE)
    _write(args.dump_state, out.dump())

    branches, residuals = [], []
    for reading, (value, c) in enumerate(((1, c1), (0, c2))):
        amps = out.project(CONTROL_WIRE, value).flat()
        oracle = contract_classical(derivations[reading], tensors, lex.config, conjugate_arguments=True)
        branches.append(amps)
        if c == 0:
            residuals.append(None)
        else:
            residuals.append(_relative_residual(amps / c, oracle.flat()))

    report = {
        "phrase": args.phrase,
        "readings": [derivation_signature(d) for d in derivations],
        "control": _complex_list(np.array([c1, c2])),
        "swaps": [list(s) for s in schedule.swaps],
        "base_plan": [list(p) for p in base.pairs],
        "weights_pre": list(pre),
        "weights_post": list(post),
        "branches": [_complex_list(b) for b in branches],
        "residuals": residuals,
    }
    lines = [f"readings: 1 = {report['readings'][0]}, 2 = {report['readings'][1]}"]
    lines.append("schedule: " + " ".join(f"CSWAP({CONTROL_WIRE};{i},{j})" for i, j in schedule.swaps))
    lines.append("plan: " + " ".join(f"P({i},{j})" for i, j in base.pairs))
    lines.append(f"weights before contraction: reading 1 {pre[0]:.12g}, reading 2 {pre[1]:.12g}")
    lines.append(f"weights after contraction: reading 1 {post[0]:.12g}, reading 2 {post[1]:.12g}")
    for k, (b, r) in enumerate(zip(branches, residuals), start=1):
        amps = " ".join(f"{a.real:.12g}{a.imag:+.12g}j" for a in b)
        lines.append(f"reading {k}: {amps}")
        lines.append(f"reading {k} residual: " + ("n/a" if r is None else f"{r:.3e}"))
    _emit(args, report, lines)
    if any(r is not None and r > args.tolerance for r in residuals):
        print("a branch disagrees with its reading", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_grover(args) -> int:
    instance = load_instance(args.instance)
    if args.shots < 1:
        raise UsageError("--shots must be at least 1")
    _write(args.dump_plan, grover.question_plan(instance).dump())
    try:
        report = grover.grover_search(
            instance,
            k=args.iterations,
            rng_seed=args.seed,
            shots=args.shots,
            oracle_kind=args.oracle,
        )
    except grover.NoSolutions as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_NEGATIVE
    if args.dump_state:
        state = grover.prepare_initial(instance)
        amps = report.amplitude_table[-1]
        _write(args.dump_state, qsim.PureState(state.system, amps).dump())
    print(json.dumps(report.to_json(), indent=2))
    return EXIT_OK if instance.truth[report.sampled_index] else EXIT_NEGATIVE


# -- argument parsing ---------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--lexicon", metavar="PATH", default=default(None), help="lexicon JSON file")
    parser.add_argument("--tolerance", type=float, default=default(1e-10), help="numeric tolerance")
    parser.add_argument("--seed", type=int, default=default(None), help="random seed")
    parser.add_argument("--dump-state", metavar="PATH", default=default(None), help="write the result state")
    parser.add_argument("--dump-plan", metavar="PATH", default=default(None), help="write the contraction plan")
    parser.add_argument("--json", action="store_true", default=default(False), help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grover-qa", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="count and list derivations")
    p.add_argument("phrase")
    p.add_argument("--goal", default="s")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("contract", parents=[common], help="compute the meaning of one reading")
    p.add_argument("phrase")
    p.add_argument("--goal", default="s")
    p.add_argument("--reading", help="derivation index or signature")
    p.add_argument("--mode", choices=["quantum", "classical", "bell-effect"], default="quantum")
    p.set_defaults(func=cmd_contract)

    p = sub.add_parser("ambiguity", parents=[common], help="superpose the two readings of a phrase")
    p.add_argument("phrase")
    p.add_argument("--goal", default="n")
    p.add_argument("--control", default="0.7071067811865476,0.7071067811865476", help="c1,c2")
    p.set_defaults(func=cmd_ambiguity)

    p = sub.add_parser("grover", parents=[common], help="answer a wh-question by Grover search")
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--oracle", choices=["direct", "kickback"], default="direct")
    p.set_defaults(func=cmd_grover)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.tolerance <= 0:
        print("error: --tolerance must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, TypeSyntaxError, ShapeMismatch, compiler.PlanError, qsim.DimensionMismatch,
            qsim.DimensionCapExceeded, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (qsim.ImpurityError, grover.InvariantViolation, grover.NonUniformInput, ArithmeticError) as exc:
        print(f"numeric invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
