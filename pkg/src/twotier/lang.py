"""AST, contracts, and relational interpreter for the imperative
language: integer globals, single-parameter procedures with two-tier
contracts, assignment, sequencing, branching, loops, and calls.

The interpreter is relational.  Calls are interpreted purely through the
callee's contract: from a state satisfying the precondition the call may
reach any state over the bounded variable domain satisfying the
postcondition; from a state violating the precondition the relation is
empty (flagged for diagnostics).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import UnknownProcedure
from .statelogic import Lit, ProgramState, State, Term, Var, eval_term, substitute
from .domainlogic import KnowledgeBase
from .lifting import SpecLifting
from .assertions import TwoTierAssertion, assertion, assertion_holds

Expr = Term  # expr ::= n | v  (literals and variables; no operators)


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Seq:
    first: "Statement"
    second: "Statement"


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Statement"
    orelse: "Statement"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Statement"


@dataclass(frozen=True)
class Call:
    proc: str
    arg: Expr


@dataclass(frozen=True)
class Skip:
    pass


Statement = Assign | Seq | If | While | Call | Skip


def statements_of(s: Statement) -> list[Statement]:
    """Flatten a left-associated sequence into its statement list."""
    if isinstance(s, Seq):
        return statements_of(s.first) + statements_of(s.second)
    return [s]


def sequence(stmts: Iterable[Statement]) -> Statement:
    out: Optional[Statement] = None
    for s in stmts:
        out = s if out is None else Seq(out, s)
    return Skip() if out is None else out


# ---------------------------------------------------------------------------
# Procedures and programs


@dataclass(frozen=True)
class Contract:
    pre: TwoTierAssertion
    post: TwoTierAssertion


@dataclass(frozen=True)
class Procedure:
    name: str
    parameter: str
    contract: Contract
    body: Statement


@dataclass(frozen=True)
class Program:
    globals: tuple[tuple[str, Expr], ...]
    procedures: tuple[Procedure, ...]

    def procedure(self, name: str) -> Procedure:
        for p in self.procedures:
            if p.name == name:
                return p
        raise UnknownProcedure(name)

    @property
    def variables(self) -> tuple[str, ...]:
        """All declared variables: globals then procedure parameters."""
        names = [v for v, _ in self.globals]
        for p in self.procedures:
            if p.parameter not in names:
                names.append(p.parameter)
        return tuple(names)

    def constants(self) -> frozenset[int]:
        acc: set[int] = set()
        for _, e in self.globals:
            if isinstance(e, Lit):
                acc.add(e.value)

        def walk(s: Statement) -> None:
            if isinstance(s, Assign):
                if isinstance(s.expr, Lit):
                    acc.add(s.expr.value)
            elif isinstance(s, Seq):
                walk(s.first)
                walk(s.second)
            elif isinstance(s, If):
                if isinstance(s.cond, Lit):
                    acc.add(s.cond.value)
                walk(s.then)
                walk(s.orelse)
            elif isinstance(s, While):
                if isinstance(s.cond, Lit):
                    acc.add(s.cond.value)
                walk(s.body)
            elif isinstance(s, Call):
                if isinstance(s.arg, Lit):
                    acc.add(s.arg.value)

        for p in self.procedures:
            walk(p.body)
            from .statelogic import constants_of

            acc |= constants_of(p.contract.pre.state)
            acc |= constants_of(p.contract.post.state)
        return frozenset(acc)

    def initial_state(self) -> State:
        sigma: dict[str, int] = {}
        for v, e in self.globals:
            sigma[v] = eval_term(e, sigma)
        for p in self.procedures:
            sigma.setdefault(p.parameter, 0)
        return State(sigma)


# ---------------------------------------------------------------------------
# Contract instantiation


def contract_pre(program: Program, proc: str, arg: Expr) -> TwoTierAssertion:
    p = program.procedure(proc)
    return assertion(
        p.contract.pre.domain, substitute(p.contract.pre.state, p.parameter, arg)
    )


def contract_post(program: Program, proc: str, arg: Expr) -> TwoTierAssertion:
    p = program.procedure(proc)
    return assertion(
        p.contract.post.domain, substitute(p.contract.post.state, p.parameter, arg)
    )


# ---------------------------------------------------------------------------
# Interpreter


def truthy(n: int) -> bool:
    return n != 0


def eval_expr(e: Expr, sigma: ProgramState) -> int:
    return eval_term(e, sigma)


@dataclass
class RunContext:
    program: Program
    kb: KnowledgeBase
    lifting: SpecLifting
    var_domain: tuple[int, ...]
    fuel: int = 1000
    _havoc_cache: dict = field(default_factory=dict)
    _states_cache: dict = field(default_factory=dict)

    def all_states(self) -> tuple[State, ...]:
        key = (self.program.variables, self.var_domain)
        cached = self._states_cache.get(key)
        if cached is None:
            import itertools

            names = self.program.variables
            cached = tuple(
                State(zip(names, combo))
                for combo in itertools.product(
                    sorted(self.var_domain), repeat=len(names)
                )
            )
            self._states_cache[key] = cached
        return cached

    def post_states(self, proc: str, arg_value: int) -> frozenset[State]:
        key = (proc, arg_value)
        cached = self._havoc_cache.get(key)
        if cached is None:
            post = contract_post(self.program, proc, Lit(arg_value))
            cached = frozenset(
                s
                for s in self.all_states()
                if assertion_holds(s, post, self.kb, self.lifting)
            )
            self._havoc_cache[key] = cached
        return cached


@dataclass(frozen=True)
class InterpOutcome:
    states: frozenset[State]
    pre_violated: bool = False
    fuel_exhausted: bool = False


def interpret(s: Statement, sigma: ProgramState, ctx: RunContext) -> InterpOutcome:
    sigma = sigma if isinstance(sigma, State) else State(sigma)
    if isinstance(s, Skip):
        return InterpOutcome(frozenset({sigma}))
    if isinstance(s, Assign):
        return InterpOutcome(frozenset({sigma.set(s.var, eval_expr(s.expr, sigma))}))
    if isinstance(s, Seq):
        first = interpret(s.first, sigma, ctx)
        states: set[State] = set()
        pre_v = first.pre_violated
        fuel_x = first.fuel_exhausted
        for mid in first.states:
            out = interpret(s.second, mid, ctx)
            states |= out.states
            pre_v = pre_v or out.pre_violated
            fuel_x = fuel_x or out.fuel_exhausted
        return InterpOutcome(frozenset(states), pre_v, fuel_x)
    if isinstance(s, If):
        branch = s.then if truthy(eval_expr(s.cond, sigma)) else s.orelse
        return interpret(branch, sigma, ctx)
    if isinstance(s, While):
        results: set[State] = set()
        visited: set[State] = {sigma}
        frontier: set[State] = {sigma}
        pre_v = False
        steps = 0
        while frontier:
            steps += 1
            if steps > ctx.fuel:
                return InterpOutcome(frozenset(results), pre_v, True)
            nxt: set[State] = set()
            for st in frontier:
                if not truthy(eval_expr(s.cond, st)):
                    results.add(st)
                    continue
                out = interpret(s.body, st, ctx)
                pre_v = pre_v or out.pre_violated
                if out.fuel_exhausted:
                    return InterpOutcome(frozenset(results), pre_v, True)
                for st2 in out.states:
                    if st2 not in visited:
                        visited.add(st2)
                        nxt.add(st2)
            frontier = nxt
        return InterpOutcome(frozenset(results), pre_v, False)
    if isinstance(s, Call):
        n = eval_expr(s.arg, sigma)
        pre = contract_pre(ctx.program, s.proc, Lit(n))
        if not assertion_holds(sigma, pre, ctx.kb, ctx.lifting):
            return InterpOutcome(frozenset(), pre_violated=True)
        return InterpOutcome(ctx.post_states(s.proc, n))
    raise TypeError(f"not a statement: {s!r}")
