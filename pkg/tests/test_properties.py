"""Seeded random-network properties; every check runs over the same 200 networks."""

from collections import Counter
from fractions import Fraction

import pytest

from crninject.criteria import (
    Method,
    VerdictKind,
    WSDKind,
    coefficient_closed,
    det_extended_jacobian,
    injectivity_verdict,
    open_closed_relation,
    verdict_from_determinant,
    wsd_check,
)
from crninject.linalg import reduced_conservation_basis
from crninject.network import (
    Complex,
    Network,
    Reaction,
    classify_openness,
    reorder_network,
)
from crninject.oracle import SplitMix64, bruteforce_coefficient, pointwise_rank_test, random_network, random_point
from crninject.poly import SignClass, Variable, VarKind, jacobian, ring_for, sign_report, species_rate_function

N_NETWORKS = 200
SEEDS = range(1000, 1000 + N_NETWORKS)


@pytest.fixture(scope="module")
def nets():
    return [(seed, random_network(SplitMix64(seed))) for seed in SEEDS]


@pytest.fixture(scope="module")
def dets(nets):
    return {seed: det_extended_jacobian(net, method=Method.ELIMINATION) for seed, net in nets}


def test_corpus_is_varied(nets, dets):
    kinds = Counter(verdict_from_determinant(net, dets[seed]).kind for seed, net in nets)
    assert len(nets) == N_NETWORKS
    assert all(kinds[k] >= 10 for k in VerdictKind), kinds
    closed = sum(classify_openness(net).d > 0 for _, net in nets)
    assert 20 <= closed <= N_NETWORKS - 20


def test_subset_expansion_equals_elimination(nets, dets):
    for seed, net in nets:
        assert det_extended_jacobian(net, method=Method.SUBSET) == dets[seed], seed


def test_conservation_rows_annihilate_jacobian(nets):
    for seed, net in nets:
        ring = ring_for(net)
        J = jacobian(species_rate_function(net, ring), [Variable.conc(i) for i in range(net.n)])
        b = reduced_conservation_basis(net)
        for i in range(b.d):
            w = b.omega_original(i)
            for col in range(net.n):
                acc = ring.zero()
                for row in range(net.n):
                    acc = acc + J[row][col].scale(w[row])
                assert acc.is_zero(), seed


def test_determinant_homogeneous_and_multilinear_in_rates(nets, dets):
    for seed, net in nets:
        det = dets[seed]
        if det.is_zero():
            continue
        s = classify_openness(net).s
        assert det.degree_in(VarKind.RATE) == {s}, seed
        for mono in det.monomials():
            assert all(e == 1 for v, e in mono.exponents if v.kind == VarKind.RATE), seed


def _with_inflows(net: Network) -> Network:
    present = {r.product for r in net.reactions if r.reactant.is_zero}
    extra = [Reaction(Complex(), Complex(((i, 1),)), f"in{i}") for i in range(net.n)
             if Complex(((i, 1),)) not in present]
    return Network(net.species, net.reactions + tuple(extra))


def test_jacobian_invariant_under_inflows(nets):
    for seed, net in nets:
        bigger = _with_inflows(net)
        ring = ring_for(bigger)
        over = [Variable.conc(i) for i in range(net.n)]
        J_small = jacobian(species_rate_function(net), over)
        J_big = jacobian(species_rate_function(bigger, ring), over)
        assert [[ring.embed(p) for p in row] for row in J_small] == J_big, seed


def _relabel(net: Network, rng: SplitMix64) -> Network:
    species = list(net.species_names)
    labels = list(net.rate_labels)
    for lst in (species, labels):
        for i in range(len(lst) - 1, 0, -1):
            j = rng.below(i + 1)
            lst[i], lst[j] = lst[j], lst[i]
    shuffled = reorder_network(net, species, labels)
    renamed = Network.from_names([f"Z{nm}" for nm in shuffled.species_names],
                                 [Reaction(r.reactant, r.product, "q" + r.rate_label) for r in shuffled.reactions])
    return renamed


def test_relabeling_preserves_verdict(nets, dets):
    rng = SplitMix64(77)
    for seed, net in nets:
        base = verdict_from_determinant(net, dets[seed])
        other_net = _relabel(net, rng)
        other = injectivity_verdict(other_net)
        assert other.kind == base.kind, seed
        assert other.det_sign == base.det_sign, seed
        other_det = det_extended_jacobian(other_net, method=Method.ELIMINATION)
        assert len(other_det) == len(dets[seed]), seed
        assert sorted(other_det.terms.values()) == sorted(dets[seed].terms.values()), seed


def test_injective_closure_forbids_non_injective_network(nets):
    applied = 0
    for seed, net in nets:
        rep = open_closed_relation(net)
        assert rep.consistent, seed
        if rep.theorem_applies:
            applied += 1
            assert rep.closed_verdict.kind != VerdictKind.NOT_INJECTIVE, seed
    assert applied >= 20


def test_sign_determined_implies_injective(nets):
    passed = 0
    for seed, net in nets:
        res = wsd_check(net)
        if res.kind == WSDKind.PASS:
            passed += 1
            assert injectivity_verdict(net).kind == VerdictKind.INJECTIVE, seed
    assert passed >= 10


def test_rank_test_agrees_with_determinant(nets, dets):
    for seed, net in nets[:80]:
        rng = SplitMix64(seed)
        full = [pointwise_rank_test(net, random_point(net, rng)) for _ in range(5)]
        for r in full:
            assert r.stacked_rank == net.n - r.kernel_dimension, seed
        assert any(r.full_rank for r in full) == (not dets[seed].is_zero()), seed


def test_bruteforce_matches_closed_formula(nets):
    from itertools import combinations

    for seed, net in nets[:60]:
        s = classify_openness(net).s
        b = reduced_conservation_basis(net)
        for R in combinations(range(net.m), s):
            assert bruteforce_coefficient(net, R) == coefficient_closed(net, b, R)[0], (seed, R)


def test_open_networks_coefficients_survive_unit_concentrations(nets, dets):
    for seed, net in nets:
        if classify_openness(net).d:
            continue
        det = dets[seed]
        at_one = det.substitute({Variable.conc(i): 1 for i in range(net.n)})
        assert sorted(det.terms.values()) == sorted(at_one.terms.values()), seed


def test_outflow_normalization_keeps_verdict(nets, dets):
    for seed, net in nets:
        outflows = [j for j in range(net.m) if any(net.reactions[j].is_outflow_of(i) for i in range(net.n))]
        if classify_openness(net).d or not outflows:
            continue
        det = dets[seed]
        normalized = det.substitute({Variable.rate(j): 1 for j in outflows})
        assert sign_report(normalized).kind == sign_report(det).kind, seed
