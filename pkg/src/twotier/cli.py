"""Command-line front end.

Subcommands: verify, explain, fuzz, check, parse.  Exit codes are the
machine contract: 0 success, 1 verification failure or open proof,
2 parse/usage error, 3 internal or budget error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .errors import BudgetExceeded, NoExplanation, ParseError, VerifierError
from .domainlogic import KnowledgeBase, constants_of_formulas, signature_of
from .lifting import SpecLifting
from .kernel import CandidatePool, alpha_abduce, informative_kernel
from .status import ObligationStatus
from .calculus import (
    Judgement,
    ProofTree,
    VerifCtx,
    check_proof,
    validate_judgement_empirically,
)
from .strategy import verify_procedure
from . import parsing, serialize

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_INTERNAL = 3


@dataclass
class RunConfig:
    closure: Optional[bool] = None  # None: keep the kb file's setting
    unroll_depth: int = 8
    var_domain: Optional[tuple[int, ...]] = None
    fresh_witnesses: int = 2
    fuel: int = 1000
    jobs: int = 1
    seed: int = 0
    output: str = "text"
    proof_out: Optional[str] = None


def add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--closure", choices=["on", "off"])
    p.add_argument("--unroll", type=int, default=8, metavar="N")
    p.add_argument("--domain", metavar="LIST", help='integer list, e.g. "0,2,4"')
    p.add_argument("--fresh", type=int, default=2, metavar="N")
    p.add_argument("--fuel", type=int, default=1000, metavar="N")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--proof-out", metavar="FILE")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    domain = None
    if getattr(args, "domain", None):
        domain = tuple(sorted({int(x) for x in args.domain.split(",") if x.strip()}))
    closure = None
    if getattr(args, "closure", None):
        closure = args.closure == "on"
    return RunConfig(
        closure=closure,
        unroll_depth=args.unroll,
        var_domain=domain,
        fresh_witnesses=args.fresh,
        fuel=args.fuel,
        jobs=max(1, args.jobs),
        seed=args.seed,
        output=args.format,
        proof_out=getattr(args, "proof_out", None),
    )


def load_kb(path: str, config: RunConfig) -> KnowledgeBase:
    kb = parsing.parse_kb(Path(path).read_text(encoding="utf-8"))
    if config.closure is not None:
        kb = kb.with_closure(config.closure)
    return kb


def load_program(path: str, kb: KnowledgeBase):
    return parsing.parse_program(Path(path).read_text(encoding="utf-8"), kb)


def build_ctx(program, kb: KnowledgeBase, config: RunConfig) -> VerifCtx:
    ctx = VerifCtx.build(
        program,
        kb,
        unroll_depth=config.unroll_depth,
        fresh_witnesses=config.fresh_witnesses,
        state_bound=config.var_domain or (),
    )
    return ctx


def default_domain(program, kb: KnowledgeBase) -> tuple[int, ...]:
    values = set(program.constants()) | set(constants_of_formulas(kb.axioms)) | {0}
    return tuple(sorted(values))


def print_tree_verdicts(name: str, tree: ProofTree, out) -> None:
    verdict = "Closed" if tree.closed else "Open"
    print(f"procedure {name}: {verdict}", file=out)
    print(f"  spine: [{', '.join(tree.spine())}]", file=out)
    if not tree.closed:
        for path, node in tree.walk():
            for ob in node.obligations:
                if ob.status != ObligationStatus.PROVED:
                    print(
                        f"  at {path} ({node.rule}) {ob.kind} {ob.status.value}: "
                        f"{ob.payload}",
                        file=out,
                    )
                    if ob.note:
                        for line in ob.note.splitlines():
                            print(f"    {line}", file=out)


def structured_record(name: str, tree: ProofTree) -> str:
    record = {
        "procedure": name,
        "verdict": "Closed" if tree.closed else "Open",
        "tree": serialize.tree_to_dict(tree),
    }
    return json.dumps(record, sort_keys=True)


def run_verification(ctx: VerifCtx, config: RunConfig) -> list[tuple[str, ProofTree]]:
    procs = ctx.program.procedures
    if config.jobs > 1 and len(procs) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.jobs) as pool:
            trees = list(pool.map(lambda p: verify_procedure(ctx, p), procs))
    else:
        trees = [verify_procedure(ctx, p) for p in procs]
    return [(p.name, t) for p, t in zip(procs, trees)]


def write_proofs(results: Sequence[tuple[str, ProofTree]], path: str) -> None:
    doc = {
        "format": serialize.FORMAT,
        "version": serialize.VERSION,
        "procedures": {name: serialize.tree_to_dict(t) for name, t in results},
    }
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def cmd_verify(args: argparse.Namespace, out=None) -> int:
    out = out if out is not None else sys.stdout
    config = config_from_args(args)
    kb = load_kb(args.kb, config)
    program = load_program(args.program, kb)
    ctx = build_ctx(program, kb, config)
    results = run_verification(ctx, config)
    for name, tree in results:
        if config.output == "structured":
            print(structured_record(name, tree), file=out)
        else:
            print_tree_verdicts(name, tree, out)
    if config.proof_out:
        write_proofs(results, config.proof_out)
    return EXIT_OK if all(t.closed for _, t in results) else EXIT_FAILED


def cmd_explain(args: argparse.Namespace, out=None) -> int:
    out = out if out is not None else sys.stdout
    config = config_from_args(args)
    kb = load_kb(args.kb, config)
    sig = kb.signature.union(signature_of(kb.axioms))
    goal = parsing.parse_domain_formula(args.goal, sig)
    variables = tuple(s.variable for s in kb.stubs)
    lifting = SpecLifting.direct(kb, variables)
    pool = CandidatePool.build(kb, lifting, variables=variables)
    deduced = informative_kernel((goal,), kb, pool)
    rendered = ", ".join(str(a) for a in deduced)
    print(f"deduced kernel: {{{rendered}}}", file=out)
    try:
        explanations = alpha_abduce((goal,), kb, pool)
    except NoExplanation as exc:
        print(f"abduction: no explanation ({exc})", file=out)
        return EXIT_OK
    for result in explanations:
        rendered = ", ".join(str(a) for a in result.atoms)
        print(
            f"abduced {{{rendered}}}"
            f" [atoms entail goal: {result.backward_obligation.value};"
            f" goal entails atoms: {result.forward_obligation.value}]",
            file=out,
        )
    return EXIT_OK


def cmd_fuzz(args: argparse.Namespace, out=None) -> int:
    out = out if out is not None else sys.stdout
    config = config_from_args(args)
    kb = load_kb(args.kb, config)
    program = load_program(args.program, kb)
    ctx = build_ctx(program, kb, config)
    domain = config.var_domain or default_domain(program, kb)
    print(f"seed: {config.seed}; domain: {list(domain)}", file=out)
    results = run_verification(ctx, config)
    closed = [(name, t) for name, t in results if t.closed]
    if not closed:
        print("nothing Closed to test", file=out)
        return EXIT_OK
    exit_code = EXIT_OK
    for name, tree in closed:
        report = validate_judgement_empirically(
            ctx,
            tree.conclusion,
            domain,
            seed=config.seed,
            fuel=config.fuel,
        )
        print(
            f"procedure {name}: tested {report.tested} states, "
            f"{len(report.counterexamples)} counterexamples, "
            f"{report.fuel_issues} fuel exhaustions",
            file=out,
        )
        for cx in report.counterexamples:
            print(
                f"  sigma={dict(cx.sigma)} sigma'="
                f"{dict(cx.sigma_prime) if cx.sigma_prime else None} "
                f"violates: {cx.detail}",
                file=out,
            )
            exit_code = EXIT_FAILED
    return exit_code


def cmd_check(args: argparse.Namespace, out=None) -> int:
    out = out if out is not None else sys.stdout
    config = config_from_args(args)
    kb = load_kb(args.kb, config)
    program = load_program(args.program, kb)
    ctx = build_ctx(program, kb, config)
    doc = json.loads(Path(args.proof).read_text(encoding="utf-8"))
    if doc.get("format") != serialize.FORMAT:
        print(f"unrecognized proof format: {doc.get('format')!r}", file=sys.stderr)
        return EXIT_PARSE
    if "tree" in doc:
        named = [("proof", serialize.tree_from_dict(doc["tree"], kb, program))]
    else:
        named = [
            (name, serialize.tree_from_dict(t, kb, program))
            for name, t in sorted(doc.get("procedures", {}).items())
        ]
    exit_code = EXIT_OK
    for name, tree in named:
        report = check_proof(ctx, tree)
        print(f"{name}: {report.describe()}", file=out)
        if not report.closed:
            exit_code = EXIT_FAILED
    return exit_code


def cmd_parse(args: argparse.Namespace, out=None) -> int:
    out = out if out is not None else sys.stdout
    path = Path(args.file)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".kb":
        kb = parsing.parse_kb(text)
        pretty = parsing.kb_to_text(kb)
        again = parsing.kb_to_text(parsing.parse_kb(pretty))
    else:
        kb_path = Path(args.kb) if args.kb else path.with_suffix(".kb")
        if not kb_path.exists():
            print(f"no knowledge base found at {kb_path}", file=sys.stderr)
            return EXIT_PARSE
        kb = parsing.parse_kb(kb_path.read_text(encoding="utf-8"))
        program = parsing.parse_program(text, kb)
        pretty = parsing.program_to_text(program)
        again = parsing.program_to_text(parsing.parse_program(pretty, kb))
    if pretty != again:
        print("round-trip mismatch", file=sys.stderr)
        return EXIT_INTERNAL
    print(pretty, end="", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twotier",
        description="Two-tier contract verification over an imperative "
        "language with description-logic domain specifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="verify every procedure contract")
    p.add_argument("program")
    p.add_argument("kb")
    add_common_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("explain", help="deduce and abduce kernel atoms for a goal")
    p.add_argument("kb")
    p.add_argument("--goal", required=True)
    add_common_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("fuzz", help="empirically validate closed judgements")
    p.add_argument("program")
    p.add_argument("kb")
    add_common_flags(p)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("check", help="replay a serialized proof tree")
    p.add_argument("proof")
    p.add_argument("program")
    p.add_argument("kb")
    add_common_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("parse", help="parse and pretty-print a program or kb file")
    p.add_argument("file")
    p.add_argument("--kb")
    add_common_flags(p)
    p.set_defaults(func=cmd_parse)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except VerifierError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
