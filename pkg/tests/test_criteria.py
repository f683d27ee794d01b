from fractions import Fraction
from itertools import combinations

import pytest

from crninject import bundled_network
from crninject.criteria import (
    BudgetExceeded,
    Method,
    VerdictKind,
    WSDKind,
    analyze,
    coefficient_closed,
    degeneracy_check,
    det_extended_jacobian,
    det_fully_open_relation,
    enumeration_size,
    fully_open_determinant,
    injectivity_verdict,
    open_closed_relation,
    sigma,
    subset_products,
    verdict_from_determinant,
    wsd_check,
)
from crninject.linalg import reduced_conservation_basis
from crninject.network import classify_openness, fully_open_closure, parse_network, reorder_network
from crninject.poly import VarKind

from conftest import P
from test_poly import EQ2


def test_sigma_example_network():
    net = bundled_network("unique_not_injective")
    A, D, C, F = (net.species_index(x) for x in "ADCF")
    r = {f"r{j + 1}": j for j in range(8)}
    assert sigma(net, [r["r2"], r["r4"], r["r7"], r["r8"]], [A, D]) == 1
    assert sigma(net, [r["r1"], r["r3"], r["r5"], r["r6"]], [C, F]) == -1


def test_sigma_open_network():
    net = fully_open_closure(parse_network("A + B -> C\nC -> A"))
    outflows = [net.outflow_reaction(i) for i in range(net.n)]
    assert sigma(net, outflows) == (-1) ** net.n
    assert sigma(net, [0, 0, outflows[0]]) == 0
    with pytest.raises(ValueError):
        sigma(net, [0])
    with pytest.raises(ValueError):
        sigma(parse_network("A -> B"), [0, 0])


def test_coefficient_closed_futile(futile):
    b = reduced_conservation_basis(futile)
    coeff, contrib = coefficient_closed(futile, b, [0, 2, 3])
    assert -coeff == P(futile, "c_S1*c_S2 + c_S1*c_S4")
    assert [I for I, _ in contrib] == [(0, 1, 5), (0, 3, 5)]
    dependent, _ = coefficient_closed(futile, b, [0, 1, 2])
    assert dependent.is_zero()
    with pytest.raises(ValueError):
        coefficient_closed(futile, b, [0, 1])


def test_coefficient_closed_two_site(twosite):
    b = reduced_conservation_basis(twosite)
    first, _ = coefficient_closed(twosite, b, [0, 2, 3, 6, 8, 11])
    second, _ = coefficient_closed(twosite, b, [1, 3, 5, 6, 9, 11])
    assert P(twosite, "c_S1*c_S2*c_S3").terms.keys() <= first.terms.keys()
    assert P(twosite, "c_S1*c_S2*c_S4").terms.keys() <= second.terms.keys()
    (kp,) = P(twosite, "c_S1*c_S2*c_S3").terms
    (kn,) = P(twosite, "c_S1*c_S2*c_S4").terms
    assert first.terms[kp] * second.terms[kn] < 0


@pytest.mark.parametrize("method", list(Method))
def test_det_extended_jacobian_methods(futile, method):
    assert -det_extended_jacobian(futile, method=method) == P(futile, EQ2)


def test_det_extended_jacobian_small():
    net = bundled_network("degenerate")
    assert det_extended_jacobian(net).is_zero()
    net = parse_network("A -> B")
    assert det_extended_jacobian(net) == P(net, "-k1")


def test_budget_is_enforced(twosite):
    assert enumeration_size(twosite) == 924 * 84
    with pytest.raises(BudgetExceeded):
        det_extended_jacobian(twosite, method=Method.SUBSET, budget=1000)
    # elimination ignores the budget
    assert len(det_extended_jacobian(twosite, method=Method.ELIMINATION, budget=1000)) == 50
    report = analyze(twosite, budget=1000)
    assert report.method == Method.ELIMINATION
    assert report.verdict.kind == VerdictKind.NOT_INJECTIVE
    with pytest.raises(BudgetExceeded):
        analyze(twosite, method="subset", budget=1000)


def test_fully_open_relation_futile(futile):
    lhs, rhs = det_fully_open_relation(futile)
    assert lhs == rhs
    assert lhs.homogeneous_part(VarKind.RATE, 3) * (-1) ** 3 == det_extended_jacobian(futile)
    with pytest.raises(ValueError):
        det_fully_open_relation(fully_open_closure(futile))


@pytest.mark.parametrize("name", ["futile_cycle", "two_site", "unique_not_injective", "single", "closed_injective"])
def test_fully_open_relation_bundled(name):
    net = bundled_network(name)
    lhs, rhs = det_fully_open_relation(net)
    assert lhs == rhs
    o = classify_openness(net)
    s, d = o.s, o.d
    trunc = lhs.homogeneous_part(VarKind.RATE, s)
    assert (trunc if d % 2 == 0 else -trunc) == det_extended_jacobian(net)


def test_verdicts_of_bundled_networks(futile, twosite):
    v = injectivity_verdict(futile)
    assert v.kind == VerdictKind.INJECTIVE and v.det_sign == -1
    v = injectivity_verdict(twosite)
    assert v.kind == VerdictKind.NOT_INJECTIVE
    assert v.positive_witness.coefficient() > 0 > v.negative_witness.coefficient()
    assert injectivity_verdict(bundled_network("open_degenerate")).kind == VerdictKind.ALL_DEGENERATE
    assert injectivity_verdict(bundled_network("unique_not_injective")).kind == VerdictKind.NOT_INJECTIVE


def test_witnesses_are_determinant_monomials(twosite):
    det = det_extended_jacobian(twosite)
    v = injectivity_verdict(twosite)
    for w in (v.positive_witness, v.negative_witness):
        mono = w.monomial(twosite)
        (key, coeff), = mono.terms.items()
        assert det.terms[key] == coeff


def test_verdict_from_determinant_recovers_witnesses(twosite):
    det = det_extended_jacobian(twosite, method="elimination")
    v = verdict_from_determinant(twosite, det)
    for w in (v.positive_witness, v.negative_witness):
        (key, coeff), = w.monomial(twosite).terms.items()
        assert det.terms[key] == coeff
    assert (v.positive_witness, v.negative_witness) != (None, None)


def test_every_product_is_a_coefficient(futile):
    det = det_extended_jacobian(futile)
    products = list(subset_products(futile))
    assert len(products) == len(det)
    for w in products:
        (key, coeff), = w.monomial(futile).terms.items()
        assert det.terms[key] == coeff


def test_degeneracy_check(futile):
    res = degeneracy_check(bundled_network("degenerate"))
    assert res.all_degenerate and "1 < s = 2" in res.certificate
    assert degeneracy_check(bundled_network("open_degenerate")).all_degenerate
    res = degeneracy_check(futile)
    assert not res.all_degenerate
    assert (res.witness.reactions, res.witness.removed_species) == ((0, 2, 3), (0, 1, 5))
    closed = fully_open_closure(futile)
    res = degeneracy_check(closed)
    assert res.witness.reactions == tuple(range(6, 12)) and res.witness.value == 1


def test_degeneracy_witness_projects_to_independent_reactions(futile):
    from crninject.linalg import ExactMatrix, rank
    from crninject.network import project_network, reactant_matrix, stoichiometric_matrix

    w = degeneracy_check(futile).witness
    proj = project_network(futile, w.removed_species)
    labels = [futile.reactions[r].rate_label for r in w.reactions]
    cols = [proj.reaction_index(lab) for lab in labels]
    rendered = {proj.reactions[j].render(proj.species_names) for j in cols}
    assert rendered == {"S3 -> S5", "S5 -> S4", "S4 -> 0"}
    assert rank(stoichiometric_matrix(proj).select_columns(cols)) == 3
    assert rank(reactant_matrix(proj).select_columns(cols)) == 3


def test_open_closed_relation_examples():
    rep = open_closed_relation(bundled_network("closure_injective_degenerate"))
    assert rep.theorem_applies and rep.consistent
    assert rep.declared_degree_s_monomials == 0
    assert rep.closed_verdict.kind == VerdictKind.ALL_DEGENERATE

    rep = open_closed_relation(bundled_network("open_injective"))
    assert rep.fully_open_verdict.kind == VerdictKind.NOT_INJECTIVE
    assert rep.closed_verdict.kind == VerdictKind.INJECTIVE
    assert rep.declared_degree_s_monomials == 1

    rep = open_closed_relation(bundled_network("closed_injective"))
    assert rep.fully_open_verdict.kind == VerdictKind.NOT_INJECTIVE
    assert rep.closed_verdict.kind == VerdictKind.INJECTIVE


def test_fully_open_determinants_of_small_examples():
    net = bundled_network("closure_injective_degenerate")
    assert fully_open_determinant(net) == P(
        net, "1 + k2 + k3 + k1*c_A + k1*c_B + k2*k3 + k1*k2*c_A + k1*k3*c_B")


def test_wsd_check(futile):
    assert wsd_check(parse_network("A -> B")).kind == WSDKind.PASS
    res = wsd_check(futile)
    assert res.kind == WSDKind.PASS and res.sigma == 0
    res = wsd_check(parse_network("A + B -> A"))
    assert res.kind == WSDKind.NOT_NAC and res.offending_reaction == 0
    res = wsd_check(bundled_network("two_site"))
    assert res.kind == WSDKind.FAIL and res.positive_witness is not None
    assert wsd_check(bundled_network("degenerate")).kind == WSDKind.FAIL


def test_analyze_report(futile):
    rep = analyze(futile, want_det=True, degeneracy=True, open_closed=True, wsd=True)
    assert rep.method == Method.BOTH
    assert rep.monomial_count == 8
    assert rep.enumeration.nonzero == 8
    assert rep.open_closed.consistent
    assert set(rep.timings) == {"basis", "verdict", "degeneracy", "open_closed", "wsd"}


def test_verdict_ignores_species_and_reaction_order(futile):
    base = injectivity_verdict(futile)
    names = list(reversed(futile.species_names))
    labels = ["k4", "k2", "k6", "k1", "k5", "k3"]
    other = injectivity_verdict(reorder_network(futile, names, labels))
    assert other == base
