"""Two-tier assertions and their semantic checks.

An assertion pairs a set of domain formulas with a state formula.  A
state satisfies it when the state formula holds and the lifted state
(together with the lifted liftable part of the state formula) entails
the domain tier under the knowledge base.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .statelogic import (
    ProgramState,
    State,
    StateFormula,
    TRUE,
    holds,
    state_implies_counterexample,
    strip_true,
)
from .domainlogic import DomainFormula, DomainInterpretation, KnowledgeBase
from .errors import FragmentUnsupported
from .lifting import SpecLifting
from .status import ObligationStatus, status_of_verdict
from . import reasoning


@dataclass(frozen=True)
class TwoTierAssertion:
    domain: tuple[DomainFormula, ...]
    state: StateFormula

    def __str__(self) -> str:
        dom = ", ".join(str(d) for d in self.domain) if self.domain else "-"
        st = "-" if self.state == TRUE else str(self.state)
        return f"[ {dom} | {st} ]"


def assertion(
    domain: Iterable[DomainFormula] = (), state: StateFormula = TRUE
) -> TwoTierAssertion:
    return TwoTierAssertion(tuple(dict.fromkeys(domain)), state)


TRIVIAL = assertion()


def same_assertion(a: TwoTierAssertion, b: TwoTierAssertion) -> bool:
    """Syntactic equality up to domain-tier set order and trivially-true
    state conjuncts."""
    return set(a.domain) == set(b.domain) and strip_true(a.state) == strip_true(
        b.state
    )


def assertion_holds(
    sigma: ProgramState,
    a: TwoTierAssertion,
    kb: KnowledgeBase,
    lifting: SpecLifting,
) -> bool:
    if not holds(a.state, sigma):
        return False
    if not a.domain:
        return True
    lifted_phi, _residue = lifting.lift_partial(a.state)
    premises = lifting.lift_state(sigma) | lifted_phi
    return reasoning.entails(premises, a.domain, kb).is_entailed


def strongly_consistent(
    a: TwoTierAssertion, kb: KnowledgeBase, lifting: SpecLifting
) -> bool:
    return reasoning.entails(lifting.lift_spec(a.state), a.domain, kb).is_entailed


@dataclass(frozen=True)
class ImplicationResult:
    status: ObligationStatus
    detail: str
    counter_state: Optional[State] = None
    counter_model: Optional[DomainInterpretation] = None

    @property
    def proved(self) -> bool:
        return self.status == ObligationStatus.PROVED


def assertion_implies(
    a1: TwoTierAssertion,
    a2: TwoTierAssertion,
    kb: KnowledgeBase,
    lifting: SpecLifting,
    bound: Optional[Iterable[int]] = None,
) -> ImplicationResult:
    """Sound sufficient check: the state tiers must stand in bounded
    implication and the first domain tier plus the lifted first state
    must entail the second domain tier."""
    try:
        cex = state_implies_counterexample(a1.state, a2.state, bound)
    except FragmentUnsupported as exc:
        return ImplicationResult(ObligationStatus.UNKNOWN, f"state tier: {exc}")
    if cex is not None:
        return ImplicationResult(
            ObligationStatus.FAILED,
            "state tier refuted by counter-state",
            counter_state=cex,
        )
    if a2.domain:
        lifted_phi, _residue = lifting.lift_partial(a1.state)
        premises = frozenset(a1.domain) | lifted_phi
        verdict = reasoning.entails(premises, a2.domain, kb)
        status = status_of_verdict(verdict)
        if status == ObligationStatus.FAILED:
            return ImplicationResult(
                status,
                f"domain tier not entailed: {verdict.violated}",
                counter_model=verdict.countermodel,
            )
        if status == ObligationStatus.UNKNOWN:
            return ImplicationResult(status, f"domain tier undecided: {verdict.bound}")
    return ImplicationResult(ObligationStatus.PROVED, "")
