import pytest

from twotier.errors import NoExplanation
from twotier.domainlogic import Atomic, ConceptAssertion, DataAssertion
from twotier.kernel import (
    CandidatePool,
    KernelMode,
    alpha_abduce,
    alpha_deduce,
    informative_kernel,
)
from twotier.lifting import SpecLifting
from twotier.status import ObligationStatus

NZ = lambda s: ConceptAssertion(Atomic("NonZero"), s)
hv = lambda s, n: DataAssertion("hasValue", s, n)


@pytest.fixture(scope="module")
def corrected_pool(corrected):
    kb = corrected[1]
    return kb, CandidatePool.build(kb, SpecLifting.direct(kb))


@pytest.fixture(scope="module")
def verbatim_pool(verbatim):
    kb = verbatim[1]
    return kb, CandidatePool.build(kb, SpecLifting.direct(kb))


def test_pool_contents(corrected_pool):
    _, pool = corrected_pool
    atoms = set(pool.atoms)
    # three declared stubs, values {0, 2, 4}, plus NonZero per stub
    assert atoms == {
        a
        for s in ("bodyVar", "doorsVar", "wheelsVar")
        for a in (NZ(s), hv(s, 0), hv(s, 2), hv(s, 4))
    }
    assert list(pool.atoms) == sorted(pool.atoms, key=str)


def test_pool_extra_variables_and_constants(corrected_pool):
    kb, _ = corrected_pool
    pool = CandidatePool.build(
        kb, SpecLifting.direct(kb), extra_constants=(7,), variables=("x",)
    )
    assert hv("var_x", 7) in pool.atoms
    assert NZ("var_x") in pool.atoms


def test_deduce_smallcar(corrected_pool):
    kb, pool = corrected_pool
    result = alpha_deduce((ConceptAssertion(Atomic("SmallCar"), "c"),), kb, pool)
    assert result.mode is KernelMode.DEDUCED
    assert set(result.atoms) == {hv("doorsVar", 2), hv("wheelsVar", 4), NZ("bodyVar")}
    assert result.forward_obligation is ObligationStatus.PROVED
    # the asserted HasChassis(c) supplies Car, so the atoms give SmallCar back
    assert result.backward_obligation is ObligationStatus.PROVED


def test_deduce_four_wheels_invertible(corrected_pool):
    kb, pool = corrected_pool
    result = alpha_deduce(
        (ConceptAssertion(Atomic("HasFourWheels"), "c"),), kb, pool
    )
    assert hv("wheelsVar", 4) in result.atoms
    # no asserted data triple for wheelsVar in the premises, so a model may
    # still attach an extra zero value: NonZero is not deduced here
    assert NZ("wheelsVar") not in result.atoms
    assert result.backward_obligation is ObligationStatus.PROVED


def test_deduce_empty_spec(corrected_pool):
    kb, pool = corrected_pool
    result = alpha_deduce((), kb, pool)
    # only what the kb forces on its own: the asserted chassis gives a body
    assert result.atoms == (NZ("bodyVar"),)
    assert informative_kernel((), kb, pool) == ()
    assert result.backward_obligation is ObligationStatus.PROVED


def test_informative_kernel_prunes(corrected_pool):
    kb, pool = corrected_pool
    delta = (ConceptAssertion(Atomic("HasFourWheels"), "c"),)
    full = alpha_deduce(delta, kb, pool).atoms
    pruned = informative_kernel(delta, kb, pool)
    assert set(pruned) <= set(full)
    assert hv("wheelsVar", 4) in pruned
    # NonZero(wheelsVar) follows from hasValue 4, so it survives too,
    # but nothing kb-forced or already in delta may appear
    assert not any(a in delta for a in pruned)


def test_abduce_has_body(verbatim_pool):
    kb, pool = verbatim_pool
    results = alpha_abduce((ConceptAssertion(Atomic("HasBody"), "c"),), kb, pool)
    first = results[0]
    assert first.mode is KernelMode.ABDUCED
    assert set(first.atoms) == {NZ("bodyVar")}
    assert first.backward_obligation is ObligationStatus.PROVED
    # any nonzero body value also explains, but does not entail back
    larger = [r for r in results if set(r.atoms) == {hv("bodyVar", 2)}]
    assert larger and larger[0].forward_obligation is ObligationStatus.FAILED
    sizes = [len(r.atoms) for r in results]
    assert sizes == sorted(sizes)


def test_abduce_smallcar(verbatim_pool):
    kb, pool = verbatim_pool
    results = alpha_abduce(
        (ConceptAssertion(Atomic("SmallCar"), "c"),), kb, pool
    )
    assert set(results[0].atoms) == {hv("doorsVar", 2), hv("wheelsVar", 4)}


def test_abduce_minimality(verbatim_pool):
    kb, pool = verbatim_pool
    results = alpha_abduce((ConceptAssertion(Atomic("HasBody"), "c"),), kb, pool)
    minimal = {frozenset(r.atoms) for r in results}
    for s in minimal:
        assert not any(t < s for t in minimal)


def test_abduce_no_explanation(corrected_pool):
    kb, pool = corrected_pool
    with pytest.raises(NoExplanation):
        # 7 is outside every pool atom's value set
        alpha_abduce((hv("doorsVar", 7),), kb, pool, max_size=2)
