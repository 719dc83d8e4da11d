"""Mutation sensitivity spot checks (the full catalog sweep runs in the
acceptance suite)."""

from hydroham import catalog
from hydroham.mutation import Mutation, first_proven_failure, scan


def test_sign_flip_detected():
    op, ws = catalog.instantiate("T2.2/2")
    res = scan(op)
    # 2 nonzero b entries: 2 flips + 2 scalings + 1 swap
    assert res.total == 5
    assert res.caught == 5 and not res.survivors


def test_rank0_swap_survives_as_negated_part():
    op, ws = catalog.instantiate("T2.3/rank0")
    res = scan(op)
    assert res.total == 5 and res.caught == 4
    (mutation, report), = res.survivors
    assert mutation.kind == "swap"
    # the survivor is a genuine Hamiltonian operator (the negated pair)
    assert report.overall == "proven_pass"


def test_identity_mutations_skipped():
    op, ws = catalog.instantiate("T2.2/1")  # b = 0: nothing to mutate
    assert scan(op).total == 0


def test_first_proven_failure_none_for_valid():
    op, ws = catalog.instantiate("P_gas")
    assert first_proven_failure(op) is None


def test_mutation_description():
    m = Mutation("flip", (0, 1, 2, 2))
    assert "b^{12,x}_2" in m.describe()
