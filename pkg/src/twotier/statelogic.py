"""Quantifier-free state logic over program variables.

Terms are program variables, integer literals, and applications of
interpreted function symbols.  Formulas are built from equalities and
interpreted predicates with conjunction and negation; disjunction,
implication, disequality, and the constant true are parse-time
abbreviations.  Evaluation follows the standard recursive semantics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .errors import (
    EmptyState,
    FragmentUnsupported,
    UnboundVariable,
    UndefinedSymbol,
)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Lit:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class FunApp:
    symbol: str
    args: tuple["Term", ...]

    def __str__(self) -> str:
        return f"{self.symbol}({', '.join(map(str, self.args))})"


Term = Var | Lit | FunApp


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        if self.lhs == Lit(0) and self.rhs == Lit(0):
            return "true"
        return f"{self.lhs} == {self.rhs}"


@dataclass(frozen=True)
class Pred:
    symbol: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.symbol}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Not:
    arg: "StateFormula"

    def __str__(self) -> str:
        inner = self.arg
        # v != n renders with the dedicated operator
        if isinstance(inner, Eq):
            return f"{inner.lhs} != {inner.rhs}"
        return f"!({inner})"


@dataclass(frozen=True)
class And:
    lhs: "StateFormula"
    rhs: "StateFormula"

    def __str__(self) -> str:
        parts = []
        for side in (self.lhs, self.rhs):
            if isinstance(side, And):
                parts.append(str(side))
            elif isinstance(side, (Eq, Pred, Not)):
                parts.append(str(side))
            else:
                parts.append(f"({side})")
        return " && ".join(parts)


StateFormula = Eq | Pred | Not | And

TRUE: StateFormula = Eq(Lit(0), Lit(0))


def neq(lhs: Term, rhs: Term) -> StateFormula:
    return Not(Eq(lhs, rhs))


def disj(lhs: StateFormula, rhs: StateFormula) -> StateFormula:
    return Not(And(Not(lhs), Not(rhs)))


def conj(parts: Iterable[StateFormula]) -> StateFormula:
    """Left-associated conjunction; the empty conjunction is true."""
    out: Optional[StateFormula] = None
    for p in parts:
        out = p if out is None else And(out, p)
    return TRUE if out is None else out


def conjuncts(phi: StateFormula) -> Iterator[StateFormula]:
    """Top-level conjuncts in left-to-right order."""
    if isinstance(phi, And):
        yield from conjuncts(phi.lhs)
        yield from conjuncts(phi.rhs)
    else:
        yield phi


def strip_true(phi: StateFormula) -> StateFormula:
    """Drop trivially-true conjuncts (the literal 0 == 0) from the
    top-level conjunction spine.  Used by rule-shape checks so that
    bookkeeping conjuncts introduced by inverting empty tiers do not
    block axiom rules."""
    kept = [c for c in conjuncts(phi) if c != TRUE]
    return conj(kept)


def variables_of(phi: StateFormula | Term) -> frozenset[str]:
    acc: set[str] = set()

    def walk_term(t: Term) -> None:
        if isinstance(t, Var):
            acc.add(t.name)
        elif isinstance(t, FunApp):
            for a in t.args:
                walk_term(a)

    def walk(f: StateFormula) -> None:
        if isinstance(f, Eq):
            walk_term(f.lhs)
            walk_term(f.rhs)
        elif isinstance(f, Pred):
            for a in f.args:
                walk_term(a)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, And):
            walk(f.lhs)
            walk(f.rhs)

    if isinstance(phi, (Var, Lit, FunApp)):
        walk_term(phi)
    else:
        walk(phi)
    return frozenset(acc)


def constants_of(phi: StateFormula | Term) -> frozenset[int]:
    acc: set[int] = set()

    def walk_term(t: Term) -> None:
        if isinstance(t, Lit):
            acc.add(t.value)
        elif isinstance(t, FunApp):
            for a in t.args:
                walk_term(a)

    def walk(f: StateFormula) -> None:
        if isinstance(f, Eq):
            walk_term(f.lhs)
            walk_term(f.rhs)
        elif isinstance(f, Pred):
            for a in f.args:
                walk_term(a)
        elif isinstance(f, Not):
            walk(f.arg)
        elif isinstance(f, And):
            walk(f.lhs)
            walk(f.rhs)

    if isinstance(phi, (Var, Lit, FunApp)):
        walk_term(phi)
    else:
        walk(phi)
    return frozenset(acc)


def uses_uninterpreted(phi: StateFormula) -> bool:
    if isinstance(phi, Eq):
        return any(isinstance(t, FunApp) for t in (phi.lhs, phi.rhs)) or any(
            uses_uninterpreted_term(t) for t in (phi.lhs, phi.rhs)
        )
    if isinstance(phi, Pred):
        return True
    if isinstance(phi, Not):
        return uses_uninterpreted(phi.arg)
    if isinstance(phi, And):
        return uses_uninterpreted(phi.lhs) or uses_uninterpreted(phi.rhs)
    return False


def uses_uninterpreted_term(t: Term) -> bool:
    if isinstance(t, FunApp):
        return True
    return False


# ---------------------------------------------------------------------------
# Program states


class State(Mapping[str, int]):
    """Immutable, hashable finite map from variable names to integers."""

    __slots__ = ("_items", "_dict")

    def __init__(self, bindings: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        d = dict(bindings)
        self._dict = d
        self._items = tuple(sorted(d.items()))

    def __getitem__(self, key: str) -> int:
        return self._dict[key]

    def __iter__(self):
        return iter(self._dict)

    def __len__(self) -> int:
        return len(self._dict)

    def __hash__(self) -> int:
        return hash(self._items)

    def __eq__(self, other) -> bool:
        if isinstance(other, State):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._dict == dict(other)
        return NotImplemented

    def set(self, var: str, value: int) -> "State":
        d = dict(self._dict)
        d[var] = value
        return State(d)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self._items)
        return f"State({inner})"


ProgramState = Mapping[str, int]


@dataclass(frozen=True)
class StateInterpretation:
    """Definitions for interpreted function and predicate symbols."""

    fun_defs: Mapping[str, Callable[..., int]] = field(default_factory=dict)
    pred_defs: Mapping[str, Callable[..., bool]] = field(default_factory=dict)


EMPTY_INTERP = StateInterpretation()


# ---------------------------------------------------------------------------
# Semantics


def eval_term(t: Term, sigma: ProgramState, interp: StateInterpretation = EMPTY_INTERP) -> int:
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, Var):
        try:
            return sigma[t.name]
        except KeyError:
            raise UnboundVariable(t.name) from None
    if isinstance(t, FunApp):
        try:
            fn = interp.fun_defs[t.symbol]
        except KeyError:
            raise UndefinedSymbol(t.symbol) from None
        return int(fn(*(eval_term(a, sigma, interp) for a in t.args)))
    raise TypeError(f"not a term: {t!r}")


def holds(phi: StateFormula, sigma: ProgramState, interp: StateInterpretation = EMPTY_INTERP) -> bool:
    if isinstance(phi, Eq):
        return eval_term(phi.lhs, sigma, interp) == eval_term(phi.rhs, sigma, interp)
    if isinstance(phi, Pred):
        try:
            pred = interp.pred_defs[phi.symbol]
        except KeyError:
            raise UndefinedSymbol(phi.symbol) from None
        return bool(pred(*(eval_term(a, sigma, interp) for a in phi.args)))
    if isinstance(phi, Not):
        return not holds(phi.arg, sigma, interp)
    if isinstance(phi, And):
        return holds(phi.lhs, sigma, interp) and holds(phi.rhs, sigma, interp)
    raise TypeError(f"not a state formula: {phi!r}")


def substitute(phi: StateFormula, v: str, e: Term) -> StateFormula:
    def sub_term(t: Term) -> Term:
        if isinstance(t, Var):
            return e if t.name == v else t
        if isinstance(t, FunApp):
            return FunApp(t.symbol, tuple(sub_term(a) for a in t.args))
        return t

    if isinstance(phi, Eq):
        return Eq(sub_term(phi.lhs), sub_term(phi.rhs))
    if isinstance(phi, Pred):
        return Pred(phi.symbol, tuple(sub_term(a) for a in phi.args))
    if isinstance(phi, Not):
        return Not(substitute(phi.arg, v, e))
    if isinstance(phi, And):
        return And(substitute(phi.lhs, v, e), substitute(phi.rhs, v, e))
    raise TypeError(f"not a state formula: {phi!r}")


def characteristic_formula(sigma: ProgramState) -> StateFormula:
    """Conjunction of v == sigma(v) in lexicographic variable order."""
    if not sigma:
        raise EmptyState("characteristic formula of the empty state")
    return conj(Eq(Var(v), Lit(sigma[v])) for v in sorted(sigma))


def check_domain(
    phi1: StateFormula, phi2: StateFormula, extra: Optional[Iterable[int]] = None
) -> tuple[tuple[str, ...], frozenset[int]]:
    """Variables and the small-model value domain for implication checks:
    constants of either formula, 0, the caller-supplied extras, and one
    fresh value per distinct variable."""
    variables = tuple(sorted(variables_of(phi1) | variables_of(phi2)))
    values = set(constants_of(phi1) | constants_of(phi2))
    values.add(0)
    if extra is not None:
        values.update(extra)
    fresh = max((abs(v) for v in values), default=0) + 1
    for _ in range(max(1, len(variables))):
        values.add(fresh)
        fresh += 1
    return variables, frozenset(values)


def state_implies(
    phi1: StateFormula, phi2: StateFormula, domain_bound: Optional[Iterable[int]] = None
) -> bool:
    """Bounded-exhaustive implication check for the equality fragment."""
    cex = state_implies_counterexample(phi1, phi2, domain_bound)
    return cex is None


def state_implies_counterexample(
    phi1: StateFormula, phi2: StateFormula, domain_bound: Optional[Iterable[int]] = None
) -> Optional[State]:
    """A state over the check domain satisfying phi1 but not phi2, or None."""
    if uses_uninterpreted(phi1) or uses_uninterpreted(phi2):
        raise FragmentUnsupported(
            "implication checking requires the pure equality fragment"
        )
    variables, values = check_domain(phi1, phi2, domain_bound)
    ordered = sorted(values)
    for combo in itertools.product(ordered, repeat=len(variables)):
        sigma = State(zip(variables, combo))
        if holds(phi1, sigma) and not holds(phi2, sigma):
            return sigma
    return None
