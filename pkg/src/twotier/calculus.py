"""Proof calculus over two-tier Hoare judgements.

A judgement relates a precondition assertion, a statement, and a
postcondition assertion.  Rules are applied through `apply_rule`, which
returns the premise judgements and discharged side obligations for one
inference step; `check_proof` replays a stored tree node by node through
the same code path, so a tree is only accepted if every step re-derives.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    MissingArgument,
    OutsideLiftableFragment,
    RuleShapeMismatch,
)
from .statelogic import (
    And,
    Eq,
    Lit,
    Not,
    State,
    StateFormula,
    TRUE,
    strip_true,
    substitute,
)
from .domainlogic import DomainFormula, KnowledgeBase
from .lifting import SpecLifting
from .kernel import CandidatePool
from .status import ObligationStatus, status_of_verdict
from .assertions import (
    ImplicationResult,
    TwoTierAssertion,
    assertion,
    assertion_holds,
    assertion_implies,
    same_assertion,
)
from .lang import (
    Assign,
    Call,
    If,
    Program,
    RunContext,
    Seq,
    Skip,
    Statement,
    While,
    contract_post,
    contract_pre,
    interpret,
)
from . import reasoning


# ---------------------------------------------------------------------------
# Core data


@dataclass(frozen=True)
class Judgement:
    pre: TwoTierAssertion
    stmt: Statement
    post: TwoTierAssertion

    def __str__(self) -> str:
        from .parsing import statement_to_line

        return f"{self.pre} {statement_to_line(self.stmt)} {self.post}"


@dataclass(frozen=True)
class Obligation:
    kind: str  # dl-entailment | state-implication | assertion-implication | signature-check
    payload: str
    status: ObligationStatus
    note: str = ""


RULE_NAMES = {
    "pre-lift",
    "post-lift",
    "pre-core",
    "post-core",
    "pre-inv",
    "post-inv",
    "cons",
    "var",
    "skip",
    "branch",
    "loop",
    "contract",
    "seq",
    "lift-var",
    "total",
}

OPEN_RULE = "open"

# rule-name drift in the source material; aliases accepted in stored proofs
RULE_ALIASES = {
    "post-abd": "post-core",
    "post-abs": "post-core",
    "pre-abd": "pre-core",
    "pre-abs": "pre-core",
    "new-var": "var",
    "inv": "loop",
}


def canonical_rule(name: str) -> str:
    return RULE_ALIASES.get(name, name)


@dataclass(frozen=True)
class ProofTree:
    conclusion: Judgement
    rule: str
    premises: tuple["ProofTree", ...] = ()
    obligations: tuple[Obligation, ...] = ()
    args: tuple[tuple[str, str], ...] = ()  # rendered rule arguments

    @property
    def closed(self) -> bool:
        if canonical_rule(self.rule) not in RULE_NAMES:
            return False
        return all(
            o.status == ObligationStatus.PROVED for o in self.obligations
        ) and all(p.closed for p in self.premises)

    def spine(self) -> tuple[str, ...]:
        """Rule names along the single-premise chain from the root."""
        out = [self.rule]
        node = self
        while len(node.premises) == 1:
            node = node.premises[0]
            out.append(node.rule)
        return tuple(out)

    def rules_used(self) -> frozenset[str]:
        acc = {self.rule}
        for p in self.premises:
            acc |= p.rules_used()
        return frozenset(acc)

    def walk(self, path: str = "root") -> Iterator[tuple[str, "ProofTree"]]:
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.walk(f"{path}.{i}")

    def arg(self, name: str) -> Optional[str]:
        for k, v in self.args:
            if k == name:
                return v
        return None


# ---------------------------------------------------------------------------
# Verification context


@dataclass
class VerifCtx:
    program: Program
    kb: KnowledgeBase
    lifting: SpecLifting
    pool: CandidatePool
    state_bound: tuple[int, ...] = ()
    unroll_depth: int = 8
    fresh_witnesses: int = 2

    @staticmethod
    def build(
        program: Program,
        kb: KnowledgeBase,
        *,
        unroll_depth: int = 8,
        fresh_witnesses: int = 2,
        state_bound: tuple[int, ...] = (),
    ) -> "VerifCtx":
        lifting = SpecLifting.direct(kb, program.variables)
        pool = CandidatePool.build(
            kb,
            lifting,
            extra_constants=program.constants(),
            variables=program.variables,
        )
        return VerifCtx(
            program=program,
            kb=kb,
            lifting=lifting,
            pool=pool,
            state_bound=state_bound,
            unroll_depth=unroll_depth,
            fresh_witnesses=fresh_witnesses,
        )

    # -- obligation discharge ------------------------------------------------

    def entails(self, premises, conclusion) -> reasoning.EntailmentVerdict:
        return reasoning.entails(
            premises, conclusion, self.kb, fresh_witnesses=self.fresh_witnesses
        )

    def dl_obligation(
        self,
        premises: Iterable[DomainFormula],
        conclusion: Iterable[DomainFormula],
    ) -> Obligation:
        premises = tuple(premises)
        conclusion = tuple(conclusion)
        verdict = self.entails(premises, conclusion)
        status = status_of_verdict(verdict)
        note = ""
        if isinstance(verdict, reasoning.NotEntailed):
            note = (
                f"not entailed: {verdict.violated}; countermodel:\n"
                + verdict.countermodel.describe()
            )
        elif isinstance(verdict, reasoning.Unknown):
            note = f"undecided at bound: {verdict.bound}"
        return Obligation(
            kind="dl-entailment",
            payload=f"{render_set(premises)} |= {render_set(conclusion)}",
            status=status,
            note=note,
        )

    def implication_obligation(
        self, a1: TwoTierAssertion, a2: TwoTierAssertion
    ) -> tuple[Obligation, ImplicationResult]:
        result = assertion_implies(
            a1, a2, self.kb, self.lifting, bound=self.state_bound
        )
        note = result.detail
        if result.counter_state is not None:
            note += f"; counter-state {dict(result.counter_state)}"
        if result.counter_model is not None:
            note += "; countermodel:\n" + result.counter_model.describe()
        return (
            Obligation(
                kind="assertion-implication",
                payload=f"{a1} ==> {a2}",
                status=result.status,
                note=note,
            ),
            result,
        )

    def signature_obligation(self, atoms: Iterable[DomainFormula]) -> Obligation:
        atoms = tuple(atoms)
        from .domainlogic import signature_of

        missing = signature_of(atoms).missing_from(self.lifting.kernel_signature)
        return Obligation(
            kind="signature-check",
            payload=f"sig({render_set(atoms)}) within kernel",
            status=ObligationStatus.PROVED if not missing else ObligationStatus.FAILED,
            note="" if not missing else f"outside kernel: {', '.join(missing)}",
        )


def render_set(formulas: Iterable) -> str:
    items = sorted(str(f) for f in formulas)
    return "{" + ", ".join(items) + "}"


# ---------------------------------------------------------------------------
# Rule application


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise RuleShapeMismatch(message)


def _same_state(a: StateFormula, b: StateFormula) -> bool:
    return strip_true(a) == strip_true(b)


def apply_rule(
    ctx: VerifCtx,
    rule: str,
    target: Judgement,
    *,
    kernel: Optional[tuple[DomainFormula, ...]] = None,
    delta_prime: Optional[tuple[DomainFormula, ...]] = None,
    mid: Optional[TwoTierAssertion] = None,
    inner_pre: Optional[TwoTierAssertion] = None,
    inner_post: Optional[TwoTierAssertion] = None,
) -> tuple[tuple[Judgement, ...], tuple[Obligation, ...]]:
    rule = canonical_rule(rule)
    pre, stmt, post = target.pre, target.stmt, target.post
    lifting = ctx.lifting

    if rule == "skip":
        _require(isinstance(stmt, Skip), "skip rule requires a skip statement")
        _require(
            same_assertion(pre, post), "skip rule requires pre equal to post"
        )
        return (), ()

    if rule == "var":
        _require(isinstance(stmt, Assign), "var rule requires an assignment")
        _require(not pre.domain, "var rule requires an empty domain precondition")
        needed = substitute(post.state, stmt.var, stmt.expr)
        _require(
            _same_state(pre.state, needed),
            "var rule requires the precondition state to be the substituted "
            "postcondition state",
        )
        lifted, _residue = lifting.lift_partial(post.state)
        return (), (ctx.dl_obligation(lifted, post.domain),)

    if rule == "contract":
        _require(isinstance(stmt, Call), "contract rule requires a call")
        cpre = contract_pre(ctx.program, stmt.proc, stmt.arg)
        cpost = contract_post(ctx.program, stmt.proc, stmt.arg)
        _require(
            same_assertion(pre, cpre),
            "contract rule requires the declared precondition "
            f"(expected {cpre})",
        )
        _require(
            same_assertion(post, cpost),
            "contract rule requires the declared postcondition "
            f"(expected {cpost})",
        )
        return (), ()

    if rule == "seq":
        _require(isinstance(stmt, Seq), "seq rule requires a sequence")
        if mid is None:
            raise MissingArgument("seq rule needs the intermediate assertion")
        return (
            (
                Judgement(pre, stmt.first, mid),
                Judgement(mid, stmt.second, post),
            ),
            (),
        )

    if rule == "branch":
        _require(isinstance(stmt, If), "branch rule requires a conditional")
        _require(not pre.domain, "branch rule requires an empty domain precondition")
        then_pre = assertion((), And(pre.state, Not(Eq(stmt.cond, Lit(0)))))
        else_pre = assertion((), And(pre.state, Eq(stmt.cond, Lit(0))))
        return (
            (
                Judgement(then_pre, stmt.then, post),
                Judgement(else_pre, stmt.orelse, post),
            ),
            (),
        )

    if rule == "loop":
        _require(isinstance(stmt, While), "loop rule requires a while statement")
        unrolled = If(stmt.cond, Seq(stmt.body, stmt), Skip())
        return ((Judgement(pre, unrolled, post),), ())

    if rule == "cons":
        if inner_pre is None or inner_post is None:
            raise MissingArgument("cons rule needs the inner pre and post")
        ob1, _ = ctx.implication_obligation(pre, inner_pre)
        ob2, _ = ctx.implication_obligation(inner_post, post)
        return ((Judgement(inner_pre, stmt, inner_post),), (ob1, ob2))

    if rule == "pre-lift":
        lifted = lifting.lift_spec(pre.state)
        enriched = assertion(tuple(pre.domain) + tuple(sorted(lifted, key=str)), pre.state)
        return ((Judgement(enriched, stmt, post),), ())

    if rule == "post-lift":
        lifted = lifting.lift_spec(post.state)
        enriched = assertion(
            tuple(post.domain) + tuple(sorted(lifted, key=str)), post.state
        )
        return ((Judgement(pre, stmt, enriched),), ())

    if rule == "pre-core":
        if kernel is None:
            raise MissingArgument("pre-core rule needs the kernel atoms")
        enriched = assertion(tuple(pre.domain) + tuple(kernel), pre.state)
        return (
            (Judgement(enriched, stmt, post),),
            (ctx.dl_obligation(pre.domain, kernel),),
        )

    if rule == "post-core":
        if kernel is None:
            raise MissingArgument("post-core rule needs the kernel atoms")
        enriched = assertion(tuple(post.domain) + tuple(kernel), post.state)
        return (
            (Judgement(pre, stmt, enriched),),
            (ctx.dl_obligation(post.domain, kernel),),
        )

    if rule == "pre-inv":
        if delta_prime is None:
            raise MissingArgument("pre-inv rule needs the recovered atoms")
        _require(
            set(delta_prime) <= set(pre.domain),
            "pre-inv rule requires the recovered atoms to come from the "
            "domain precondition",
        )
        recovered = lifting.delift(delta_prime)
        enriched = assertion(pre.domain, And(pre.state, recovered))
        return (
            (Judgement(enriched, stmt, post),),
            (ctx.signature_obligation(delta_prime),),
        )

    if rule == "post-inv":
        if delta_prime is None:
            raise MissingArgument("post-inv rule needs the recovered atoms")
        _require(
            set(delta_prime) <= set(post.domain),
            "post-inv rule requires the recovered atoms to come from the "
            "domain postcondition",
        )
        recovered = lifting.delift(delta_prime)
        enriched = assertion(post.domain, And(post.state, recovered))
        return (
            (Judgement(pre, stmt, enriched),),
            (ctx.signature_obligation(delta_prime),),
        )

    if rule == "lift-var":
        _require(isinstance(stmt, Assign), "lift-var rule requires an assignment")
        try:
            lifted_post = lifting.lift_spec(post.state)
            needed = substitute(post.state, stmt.var, stmt.expr)
            lifted_pre = lifting.lift_spec(needed)
        except OutsideLiftableFragment as exc:
            raise RuleShapeMismatch(f"lift-var rule needs liftable tiers: {exc}")
        _require(
            _same_state(pre.state, needed),
            "lift-var rule requires the substituted postcondition state",
        )
        _require(
            set(pre.domain) == set(lifted_pre),
            "lift-var rule requires the lifted precondition domain tier",
        )
        _require(
            set(post.domain) == set(lifted_post),
            "lift-var rule requires the lifted postcondition domain tier",
        )
        return (), (ctx.dl_obligation(lifted_post, post.domain),)

    if rule == "total":
        _require(isinstance(stmt, Assign), "total rule requires an assignment")
        if kernel is None:
            raise MissingArgument("total rule needs the kernel atoms")
        try:
            recovered = lifting.delift(kernel)
            hat = And(post.state, recovered)
            needed = substitute(hat, stmt.var, stmt.expr)
            lifted_needed = lifting.lift_spec(needed)
            lifted_post = lifting.lift_spec(post.state)
        except OutsideLiftableFragment as exc:
            raise RuleShapeMismatch(f"total rule needs liftable tiers: {exc}")
        _require(
            _same_state(pre.state, needed),
            "total rule requires the substituted enriched postcondition state",
        )
        _require(
            set(pre.domain) == set(lifted_needed),
            "total rule requires the derived precondition domain tier",
        )
        return (), (
            ctx.dl_obligation(post.domain, kernel),
            ctx.dl_obligation(lifted_post, post.domain),
        )

    raise RuleShapeMismatch(f"unknown rule: {rule}")


# ---------------------------------------------------------------------------
# Derived-rule expansions (used by the soundness property tests)


def _node(
    ctx: VerifCtx,
    rule: str,
    target: Judgement,
    premises: Sequence[ProofTree] = (),
    **kwargs,
) -> ProofTree:
    """Build one tree node by applying the rule and attaching subtrees."""
    premise_judgements, obligations = apply_rule(ctx, rule, target, **kwargs)
    subtrees = tuple(premises)
    assert len(subtrees) == len(premise_judgements)
    for sub, expected in zip(subtrees, premise_judgements):
        assert same_assertion(sub.conclusion.pre, expected.pre)
        assert same_assertion(sub.conclusion.post, expected.post)
    return ProofTree(
        conclusion=target,
        rule=rule,
        premises=subtrees,
        obligations=obligations,
        args=render_args(kwargs),
    )


def render_args(kwargs: dict) -> tuple[tuple[str, str], ...]:
    out = []
    for key in ("kernel", "delta_prime", "mid", "inner_pre", "inner_post"):
        value = kwargs.get(key)
        if value is None:
            continue
        if key in ("kernel", "delta_prime"):
            out.append((key, "; ".join(str(f) for f in value)))
        else:
            out.append((key, str(value)))
    return tuple(out)


def expand_lift_var(ctx: VerifCtx, target: Judgement) -> ProofTree:
    """The primitive derivation behind rule lift-var: cons over var."""
    stmt = target.stmt
    assert isinstance(stmt, Assign)
    inner_pre = assertion((), target.pre.state)
    var_leaf = _node(ctx, "var", Judgement(inner_pre, stmt, target.post))
    return _node(
        ctx,
        "cons",
        target,
        premises=(var_leaf,),
        inner_pre=inner_pre,
        inner_post=target.post,
    )


def expand_total(
    ctx: VerifCtx, target: Judgement, kernel: tuple[DomainFormula, ...]
) -> ProofTree:
    """The primitive derivation behind rule total: cons, post-core,
    post-inv, cons, var."""
    stmt = target.stmt
    assert isinstance(stmt, Assign)
    delta = target.post.domain
    phi = target.post.state
    hat = And(phi, ctx.lifting.delift(kernel))
    needed = substitute(hat, stmt.var, stmt.expr)
    bare_pre = assertion((), needed)
    enlarged = assertion(tuple(delta) + tuple(kernel), hat)
    var_leaf = _node(ctx, "var", Judgement(bare_pre, stmt, enlarged))
    inner_cons = _node(
        ctx,
        "cons",
        Judgement(bare_pre, stmt, assertion(enlarged.domain, hat)),
        premises=(var_leaf,),
        inner_pre=bare_pre,
        inner_post=enlarged,
    )
    post_inv = _node(
        ctx,
        "post-inv",
        Judgement(bare_pre, stmt, assertion(enlarged.domain, phi)),
        premises=(inner_cons,),
        delta_prime=tuple(kernel),
    )
    post_core = _node(
        ctx,
        "post-core",
        Judgement(bare_pre, stmt, assertion(delta, phi)),
        premises=(post_inv,),
        kernel=tuple(kernel),
    )
    return _node(
        ctx,
        "cons",
        target,
        premises=(post_core,),
        inner_pre=bare_pre,
        inner_post=assertion(delta, phi),
    )


# ---------------------------------------------------------------------------
# Proof checking


@dataclass(frozen=True)
class CheckFailure:
    path: str
    reason: str


@dataclass(frozen=True)
class VerificationReport:
    closed: bool
    failures: tuple[CheckFailure, ...]

    def describe(self) -> str:
        if self.closed:
            return "Closed"
        lines = ["Open"]
        for f in self.failures:
            lines.append(f"  at {f.path}: {f.reason}")
        return "\n".join(lines)


def _parse_args(ctx: VerifCtx, node: ProofTree) -> dict:
    from .parsing import parse_assertion, parse_domain_formula
    from .domainlogic import signature_of

    sig = ctx.kb.signature.union(signature_of(ctx.kb.axioms))
    out: dict = {}
    for key, value in node.args:
        if key in ("kernel", "delta_prime"):
            parts = [p.strip() for p in value.split(";") if p.strip()]
            out[key] = tuple(parse_domain_formula(p, sig) for p in parts)
        elif key in ("mid", "inner_pre", "inner_post"):
            out[key] = parse_assertion(value, sig)
    return out


def check_proof(ctx: VerifCtx, tree: ProofTree) -> VerificationReport:
    failures: list[CheckFailure] = []
    for path, node in tree.walk():
        rule = canonical_rule(node.rule)
        if rule == OPEN_RULE:
            reasons = "; ".join(o.note or o.payload for o in node.obligations)
            failures.append(CheckFailure(path, f"open leaf: {reasons}"))
            continue
        if rule not in RULE_NAMES:
            failures.append(CheckFailure(path, f"unknown rule {node.rule!r}"))
            continue
        try:
            kwargs = _parse_args(ctx, node)
            premise_judgements, obligations = apply_rule(
                ctx, rule, node.conclusion, **kwargs
            )
        except (RuleShapeMismatch, MissingArgument, Exception) as exc:
            failures.append(CheckFailure(path, f"{type(exc).__name__}: {exc}"))
            continue
        if len(premise_judgements) != len(node.premises):
            failures.append(
                CheckFailure(
                    path,
                    f"rule {rule} requires {len(premise_judgements)} premises, "
                    f"tree stores {len(node.premises)}",
                )
            )
            continue
        for i, (expected, sub) in enumerate(zip(premise_judgements, node.premises)):
            actual = sub.conclusion
            if (
                not same_assertion(expected.pre, actual.pre)
                or not same_assertion(expected.post, actual.post)
                or expected.stmt != actual.stmt
            ):
                failures.append(
                    CheckFailure(
                        f"{path}.{i}",
                        f"premise mismatch: rule {rule} requires "
                        f"{expected} but the tree stores {actual}",
                    )
                )
        expected_obs = {(o.kind, o.payload): o for o in obligations}
        stored_obs = {(o.kind, o.payload) for o in node.obligations}
        for key, ob in expected_obs.items():
            if key not in stored_obs:
                failures.append(
                    CheckFailure(path, f"missing obligation {key[0]}: {key[1]}")
                )
            elif ob.status != ObligationStatus.PROVED:
                failures.append(
                    CheckFailure(
                        path,
                        f"obligation not proved ({ob.status.value}) "
                        f"{ob.kind}: {ob.payload}"
                        + (f" [{ob.note}]" if ob.note else ""),
                    )
                )
        for key in stored_obs:
            if key not in expected_obs:
                failures.append(
                    CheckFailure(path, f"extraneous obligation {key[0]}: {key[1]}")
                )
    return VerificationReport(closed=not failures, failures=tuple(failures))


# ---------------------------------------------------------------------------
# Empirical validation (executable semantics versus the calculus)


@dataclass(frozen=True)
class FuzzCounterexample:
    sigma: tuple[tuple[str, int], ...]
    sigma_prime: Optional[tuple[tuple[str, int], ...]]
    detail: str


@dataclass(frozen=True)
class FuzzReport:
    tested: int
    counterexamples: tuple[FuzzCounterexample, ...]
    fuel_issues: int

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def validate_judgement_empirically(
    ctx: VerifCtx,
    j: Judgement,
    var_domain: Sequence[int],
    samples: int = 10_000,
    seed: int = 0,
    fuel: int = 1000,
) -> FuzzReport:
    """Run the statement from every precondition-satisfying state over
    the bounded domain and check the postcondition on every outcome."""
    run = RunContext(
        program=ctx.program,
        kb=ctx.kb,
        lifting=ctx.lifting,
        var_domain=tuple(sorted(set(var_domain))),
        fuel=fuel,
    )
    states = run.all_states()
    if len(states) > samples:
        rng = random.Random(seed)
        states = tuple(rng.sample(states, samples))
    counterexamples: list[FuzzCounterexample] = []
    fuel_issues = 0
    tested = 0
    for sigma in states:
        if not assertion_holds(sigma, j.pre, ctx.kb, ctx.lifting):
            continue
        tested += 1
        outcome = interpret(j.stmt, sigma, run)
        if outcome.fuel_exhausted:
            fuel_issues += 1
        for sigma2 in outcome.states:
            if not assertion_holds(sigma2, j.post, ctx.kb, ctx.lifting):
                counterexamples.append(
                    FuzzCounterexample(
                        sigma=tuple(sorted(sigma.items())),
                        sigma_prime=tuple(sorted(sigma2.items())),
                        detail="postcondition violated",
                    )
                )
    return FuzzReport(tested, tuple(counterexamples), fuel_issues)
