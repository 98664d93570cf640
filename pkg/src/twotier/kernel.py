"""Kernel generation: deriving kernel-signature atoms from a domain
specification by deduction, or explaining it by abduction over a finite
candidate pool of hasValue/NonZero atoms."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import NoExplanation
from .domainlogic import (
    Atomic,
    ConceptAssertion,
    DataAssertion,
    DomainFormula,
    KnowledgeBase,
    constants_of_formulas,
)
from .lifting import NONZERO_CONCEPT, VALUE_ROLE, SpecLifting
from .status import ObligationStatus, status_of_verdict as _status
from . import reasoning


class KernelMode(str, Enum):
    DEDUCED = "Deduced"
    ABDUCED = "Abduced"


@dataclass(frozen=True)
class CandidatePool:
    atoms: tuple[DomainFormula, ...]

    @staticmethod
    def build(
        kb: KnowledgeBase,
        lifting: SpecLifting,
        extra_constants: Iterable[int] = (),
        variables: Iterable[str] = (),
    ) -> "CandidatePool":
        """hasValue(stub, n) and NonZero(stub) atoms over the declared
        stubs (plus stubs of any extra variables), with n drawn from the
        constants of kb and the caller, plus zero."""
        stubs = sorted(
            {s.stub for s in kb.stubs}
            | {lifting.stub_for(v) for v in variables}
        )
        values = sorted(
            set(constants_of_formulas(kb.axioms)) | set(extra_constants) | {0}
        )
        atoms: list[DomainFormula] = []
        for stub in stubs:
            atoms.append(ConceptAssertion(Atomic(NONZERO_CONCEPT), stub))
            for n in values:
                atoms.append(DataAssertion(VALUE_ROLE, stub, n))
        atoms.sort(key=str)
        return CandidatePool(tuple(atoms))


@dataclass(frozen=True)
class KernelResult:
    atoms: tuple[DomainFormula, ...]
    mode: KernelMode
    forward_obligation: ObligationStatus  # delta entails atoms
    backward_obligation: ObligationStatus  # atoms entail delta


def alpha_deduce(
    delta: Iterable[DomainFormula],
    kb: KnowledgeBase,
    pool: CandidatePool,
) -> KernelResult:
    """Every pool atom entailed by delta under kb."""
    delta = tuple(dict.fromkeys(delta))
    atoms = tuple(
        a
        for a in pool.atoms
        if reasoning.entails(delta, (a,), kb).is_entailed
    )
    backward = _status(reasoning.entails(atoms, delta, kb))
    return KernelResult(
        atoms=atoms,
        mode=KernelMode.DEDUCED,
        forward_obligation=ObligationStatus.PROVED,
        backward_obligation=backward,
    )


def alpha_abduce(
    delta: Iterable[DomainFormula],
    kb: KnowledgeBase,
    pool: CandidatePool,
    max_size: int = 3,
    max_results: int = 16,
) -> list[KernelResult]:
    """All subset-minimal consistent pool subsets entailing delta, in
    increasing size then lexicographic atom order."""
    delta = tuple(dict.fromkeys(delta))
    found: list[tuple[DomainFormula, ...]] = []
    for size in range(0, max_size + 1):
        for combo in itertools.combinations(pool.atoms, size):
            if any(set(prev) <= set(combo) for prev in found):
                continue
            if not reasoning.consistent(combo, kb):
                continue
            if reasoning.entails(combo, delta, kb).is_entailed:
                found.append(combo)
                if len(found) >= max_results:
                    break
        if len(found) >= max_results:
            break
    if not found:
        raise NoExplanation(
            f"no pool subset of size <= {max_size} explains the goal"
        )
    results = []
    for atoms in found:
        forward = _status(reasoning.entails(delta, atoms, kb))
        results.append(
            KernelResult(
                atoms=atoms,
                mode=KernelMode.ABDUCED,
                forward_obligation=forward,
                backward_obligation=ObligationStatus.PROVED,
            )
        )
    return results


def informative_kernel(
    delta: Iterable[DomainFormula],
    kb: KnowledgeBase,
    pool: CandidatePool,
) -> tuple[DomainFormula, ...]:
    """Deduced pool atoms that are consequences of delta beyond what kb
    alone already forces.  Any subset of the deduced atoms keeps the
    forward obligation valid, so dropping background-forced atoms is a
    sound way to keep derivations small."""
    delta = tuple(dict.fromkeys(delta))
    deltaset = set(delta)
    out = []
    for a in pool.atoms:
        if a in deltaset:
            continue
        if not reasoning.entails(delta, (a,), kb).is_entailed:
            continue
        if reasoning.entails((), (a,), kb).is_entailed:
            continue
        out.append(a)
    return tuple(out)
