import itertools

import pytest
from hypothesis import given, settings, strategies as st

from twotier.errors import OutsideLiftableFragment, SignatureViolation
from twotier.statelogic import And, Eq, Lit, Not, State, TRUE, Var, conj, holds
from twotier.domainlogic import (
    Atomic,
    ConceptAssertion,
    DataAssertion,
    signature_of,
)
from twotier.lifting import (
    SpecLifting,
    check_compatibility,
    default_stub_name,
    liftable_formula_pool,
)


def test_default_stub_names():
    assert default_stub_name("nrWheels") == "var_nrWheels"


def test_stub_declarations_override_defaults(corrected):
    lift = SpecLifting.direct(corrected[1], ("wheels", "nrWheels"))
    assert lift.stub_for("wheels") == "wheelsVar"
    assert lift.stub_for("nrWheels") == "var_nrWheels"
    assert lift.variable_for("wheelsVar") == "wheels"
    assert lift.variable_for("var_nrWheels") == "nrWheels"


def test_lift_atoms(corrected):
    lift = SpecLifting.direct(corrected[1], ("wheels",))
    assert lift.lift_atom(Eq(Var("wheels"), Lit(4))) == DataAssertion(
        "hasValue", "wheelsVar", 4
    )
    assert lift.lift_atom(Not(Eq(Var("bodyId"), Lit(0)))) == ConceptAssertion(
        Atomic("NonZero"), "bodyVar"
    )
    assert lift.lift_atom(Eq(Var("a"), Var("b"))) is None
    assert lift.lift_atom(Not(Eq(Var("a"), Lit(3)))) is None


def test_lift_spec_and_partial(corrected):
    lift = SpecLifting.direct(corrected[1], ("wheels",))
    phi = And(Eq(Var("wheels"), Lit(4)), Not(Eq(Var("bodyId"), Lit(0))))
    assert lift.lift_spec(phi) == {
        DataAssertion("hasValue", "wheelsVar", 4),
        ConceptAssertion(Atomic("NonZero"), "bodyVar"),
    }
    with pytest.raises(OutsideLiftableFragment):
        lift.lift_spec(And(phi, Eq(Var("a"), Var("b"))))
    lifted, residue = lift.lift_partial(And(phi, Eq(Var("a"), Var("b"))))
    assert lifted == lift.lift_spec(phi)
    assert residue == (Eq(Var("a"), Var("b")),)


def test_lift_state(corrected):
    lift = SpecLifting.direct(corrected[1])
    lifted = lift.lift_state(State({"bodyId": 1, "doors": 2, "wheels": 4}))
    assert lifted == {
        DataAssertion("hasValue", "bodyVar", 1),
        DataAssertion("hasValue", "doorsVar", 2),
        DataAssertion("hasValue", "wheelsVar", 4),
    }


def test_kernel_signature_contains_lift_images(corrected):
    lift = SpecLifting.direct(corrected[1], ("wheels", "nrWheels"))
    pool = liftable_formula_pool(("wheels", "nrWheels"), (0, 2, 4))
    for phi in pool:
        assert signature_of(lift.lift_spec(phi)).subsumed_by(
            lift.kernel_signature
        )


def test_delift_examples(corrected):
    lift = SpecLifting.direct(corrected[1])
    assert lift.delift((DataAssertion("hasValue", "wheelsVar", 4),)) == Eq(
        Var("wheels"), Lit(4)
    )
    assert lift.delift(()) == TRUE
    # non-invertible kernel formulas drop to true
    assert lift.delift(
        (
            DataAssertion("hasValue", "wheelsVar", 4),
            ConceptAssertion(Atomic("HasChassis"), "c"),
        )
    ) == Eq(Var("wheels"), Lit(4))
    with pytest.raises(SignatureViolation):
        lift.delift((ConceptAssertion(Atomic("Mystery"), "c"),))


@given(
    st.lists(
        st.tuples(st.sampled_from(("wheels", "doors", "bodyId")), st.sampled_from((0, 2, 4))),
        min_size=1,
        max_size=3,
        unique_by=lambda p: p[0],
    )
)
@settings(max_examples=60)
def test_delift_round_trip_on_invertible_fragment(pairs):
    from tests.conftest import load_corpus

    _, kb = load_corpus("assembly_corrected")
    lift = SpecLifting.direct(kb)
    atoms = []
    for v, n in pairs:
        atoms.append(Eq(Var(v), Lit(n)) if n else Not(Eq(Var(v), Lit(0))))
    phi = conj(atoms)
    back = lift.delift(sorted(lift.lift_spec(phi), key=str))
    # logical equivalence over enumerated states
    names = ("wheels", "doors", "bodyId")
    for combo in itertools.product((0, 2, 4), repeat=3):
        sigma = State(zip(names, combo))
        assert holds(phi, sigma) == holds(back, sigma)


def test_compatibility_zero_violations(corrected):
    kb = corrected[1]
    lift = SpecLifting.direct(kb, ("wheels", "doors", "bodyId"))
    report = check_compatibility(lift, kb, (0, 1, 2, 4), ("wheels", "doors", "bodyId"))
    assert report.ok
    assert report.states_checked == 4 ** 3


def test_compatibility_vacuous_over_empty_variables(corrected):
    kb = corrected[1]
    lift = SpecLifting.direct(kb, ())
    report = check_compatibility(lift, kb, (0, 2), (), formulas=())
    assert report.ok


class _CorruptedLifting:
    """Formula lifting shifted by one (v == n becomes hasValue(s, n+1))
    while the state lifting stays honest."""

    def __init__(self, base):
        self._base = base

    def lift_state(self, sigma):
        return self._base.lift_state(sigma)

    def lift_spec(self, phi):
        out = set()
        for d in self._base.lift_spec(phi):
            if isinstance(d, DataAssertion):
                d = DataAssertion(d.role, d.subject, d.value + 1)
            out.add(d)
        return frozenset(out)


def test_compatibility_catches_corrupted_lifting(corrected):
    kb = corrected[1]
    base = SpecLifting.direct(kb, ("wheels",))
    bad = _CorruptedLifting(base)
    atoms = [Eq(Var("wheels"), Lit(n)) for n in (0, 2, 4)]
    report = check_compatibility(bad, kb, (0, 2, 4), ("wheels",), formulas=atoms)
    # every satisfied equality atom is flagged
    assert len(report.violations) == 3
