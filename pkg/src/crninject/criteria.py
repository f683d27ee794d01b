"""Injectivity, degeneracy and related decision procedures for mass-action networks.

Most procedures rest on one combinatorial fact.  For a set ``R`` of ``s``
reactions and a set ``I`` of ``d`` species lacking an outflow reaction, the
product ``det(Y(R)_I) * det(G(R)_I)`` (``Y`` the reactant matrix, ``G`` the
reactant-minus-product matrix, ``_I`` meaning rows in ``I`` deleted) times
``(-1)^s`` is the coefficient of exactly one monomial of the extended
Jacobian determinant, namely ``prod_R k_r * c^(sum_R y - 1) * prod_I c_i``.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterator, Sequence

from .linalg import ExactMatrix, ReducedBasis, int_det, rank, reduced_conservation_basis
from .network import (
    Network,
    Openness,
    OpennessClass,
    classify_openness,
    fully_open_closure,
    reactant_matrix,
)
from .poly import (
    Polynomial,
    Ring,
    SignClass,
    Variable,
    VarKind,
    det_fraction_free,
    extended_rate_function,
    jacobian,
    ring_for,
    sign_report,
    species_rate_function,
)

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceeded",
    "MethodMismatch",
    "Method",
    "SubsetWitness",
    "VerdictKind",
    "Verdict",
    "DegeneracyResult",
    "OpenClosedReport",
    "WSDKind",
    "WSDResult",
    "EnumerationStats",
    "AnalysisReport",
    "enumeration_size",
    "subset_products",
    "sigma",
    "coefficient_closed",
    "det_extended_jacobian",
    "fully_open_determinant",
    "det_fully_open_relation",
    "injectivity_verdict",
    "degeneracy_check",
    "open_closed_relation",
    "wsd_check",
    "analyze",
]

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"subset enumeration needs {size} (R, I) pairs, budget is {budget}")
        self.size = size
        self.budget = budget


class MethodMismatch(AssertionError):
    """Two determinant methods disagreed; always a bug."""


class Method(enum.Enum):
    SUBSET = "subset"
    ELIMINATION = "elimination"
    BOTH = "both"


@dataclass(frozen=True)
class SubsetWitness:
    reactions: tuple[int, ...]
    removed_species: tuple[int, ...]
    value: Fraction

    def coefficient(self) -> Fraction:
        """Coefficient of the matching determinant monomial."""
        return self.value if len(self.reactions) % 2 == 0 else -self.value

    def exponents(self, net: Network) -> dict[Variable, int]:
        exps = {Variable.rate(r): 1 for r in self.reactions}
        removed = set(self.removed_species)
        for i in range(net.n):
            e = sum(net.reactions[r].reactant.get(i) for r in self.reactions) - 1 + (i in removed)
            if e < 0:
                raise ValueError("witness does not correspond to a determinant monomial")
            if e:
                exps[Variable.conc(i)] = e
        return exps

    def monomial(self, net: Network, ring: Ring | None = None) -> Polynomial:
        ring = ring or ring_for(net)
        return ring.monomial(self.coefficient(), self.exponents(net))

    def describe(self, net: Network) -> dict:
        return {
            "reactions": [net.reactions[r].rate_label for r in self.reactions],
            "removed_species": [net.species[i].name for i in self.removed_species],
            "value": str(self.value),
            "monomial": self.monomial(net).render(),
        }


class VerdictKind(enum.Enum):
    INJECTIVE = "injective"
    NOT_INJECTIVE = "not_injective"
    ALL_DEGENERATE = "all_degenerate"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    det_sign: int | None = None
    positive_witness: SubsetWitness | None = None
    negative_witness: SubsetWitness | None = None

    @classmethod
    def injective(cls, sign: int) -> "Verdict":
        return cls(VerdictKind.INJECTIVE, det_sign=sign)

    @classmethod
    def not_injective(cls, pos: SubsetWitness, neg: SubsetWitness) -> "Verdict":
        return cls(VerdictKind.NOT_INJECTIVE, positive_witness=pos, negative_witness=neg)

    @classmethod
    def all_degenerate(cls) -> "Verdict":
        return cls(VerdictKind.ALL_DEGENERATE)

    @property
    def is_injective(self) -> bool:
        return self.kind == VerdictKind.INJECTIVE


@dataclass
class EnumerationStats:
    total: int = 0
    reaction_sets: int = 0
    pairs_examined: int = 0
    nonzero: int = 0


# ------------------------------------------------------------- enumeration

class _Tables:
    """Integer reactant and reactant-minus-product columns, one per reaction."""

    def __init__(self, net: Network):
        n = net.n
        self.n = n
        self.m = net.m
        self.y = [r.reactant.vector(n) for r in net.reactions]
        self.g = [[a - b for a, b in zip(r.reactant.vector(n), r.product.vector(n))] for r in net.reactions]
        self.s = rank(ExactMatrix.from_columns(self.g, n)) if net.m else 0
        self.d = n - self.s

    def minor(self, table, R: Sequence[int], keep: Sequence[int]) -> int:
        return int_det([[table[r][i] for r in R] for i in keep])

    def full_rank(self, table, R: Sequence[int]) -> bool:
        return rank(ExactMatrix.from_columns([table[r] for r in R], self.n)) == len(R)


def enumeration_size(net: Network, all_species: bool = False) -> int:
    s = classify_openness(net).s
    allowed = net.n if all_species else len(net.missing_outflows())
    return comb(net.m, s) * comb(allowed, net.n - s)


def subset_products(
    net: Network,
    *,
    budget: int | None = DEFAULT_BUDGET,
    all_species: bool = False,
    stats: EnumerationStats | None = None,
) -> Iterator[SubsetWitness]:
    """Yield every nonzero ``(R, I)`` product in ascending (R, I) order.

    ``I`` ranges over the species without outflow, or over all species when
    ``all_species`` is set.
    """
    t = _Tables(net)
    s, d, n = t.s, t.d, t.n
    allowed = tuple(range(n)) if all_species else net.missing_outflows()
    total = comb(t.m, s) * comb(len(allowed), d)
    if stats is not None:
        stats.total = total
    if budget is not None and total > budget:
        raise BudgetExceeded(total, budget)
    allowed_set = set(allowed)
    for R in combinations(range(t.m), s):
        if stats is not None:
            stats.reaction_sets += 1
        # a zero row of Y(R) must be deleted, so it is forced into I
        forced = [i for i in range(n) if all(t.y[r][i] == 0 for r in R)]
        if len(forced) > d or not allowed_set.issuperset(forced):
            continue
        # with d > 0 many I share one R, so a rank test pays off
        if d and (not t.full_rank(t.g, R) or not t.full_rank(t.y, R)):
            continue
        free = [i for i in allowed if i not in forced]
        for extra in combinations(free, d - len(forced)):
            I = tuple(sorted((*forced, *extra)))
            if stats is not None:
                stats.pairs_examined += 1
            removed = set(I)
            keep = [i for i in range(n) if i not in removed]
            dy = t.minor(t.y, R, keep)
            if not dy:
                continue
            dg = t.minor(t.g, R, keep)
            if not dg:
                continue
            if stats is not None:
                stats.nonzero += 1
            yield SubsetWitness(R, I, Fraction(dy * dg))


def sigma(net: Network, reactions: Sequence[int], outflow_species: Sequence[int] | None = None) -> Fraction:
    """``(-1)^n det(Y(R')) det(G(R'))`` for ``R'`` = reactions plus outflows of ``outflow_species``.

    With no outflow species the network must be open and ``reactions`` must
    have ``n`` entries.  Otherwise the outflows ``S_i -> 0`` are taken from the
    fully open closure (they need not be declared).
    """
    n = net.n
    outflow_species = tuple(outflow_species or ())
    if not outflow_species and classify_openness(net).kind == OpennessClass.CLOSED:
        raise ValueError("sigma requires an open network (or explicit outflow species)")
    if len(reactions) + len(outflow_species) != n:
        raise ValueError(f"need {n} reactions in total, got {len(reactions) + len(outflow_species)}")
    if len(set(reactions)) != len(reactions) or len(set(outflow_species)) != len(outflow_species):
        return Fraction(0)
    cols_y, cols_g = [], []
    for r in reactions:
        rx = net.reactions[r]
        y = rx.reactant.vector(n)
        cols_y.append(y)
        cols_g.append([a - b for a, b in zip(y, rx.product.vector(n))])
    for i in outflow_species:
        e = [int(j == i) for j in range(n)]
        cols_y.append(e)
        cols_g.append(e)
    dy = int_det([[c[i] for c in cols_y] for i in range(n)])
    if not dy:
        return Fraction(0)
    dg = int_det([[c[i] for c in cols_g] for i in range(n)])
    return Fraction((-1) ** n * dy * dg)


def coefficient_closed(
    net: Network, basis: ReducedBasis | None, R: Sequence[int], ring: Ring | None = None
) -> tuple[Polynomial, list[tuple[tuple[int, ...], Fraction]]]:
    """Coefficient (a polynomial in c) of ``prod_{r in R} k_r`` in the extended determinant.

    Also returns the contributing ``(I, product)`` pairs.
    """
    ring = ring or ring_for(net)
    t = _Tables(net)
    if basis is not None and basis.d != t.d:
        raise ValueError("basis does not belong to this network")
    R = tuple(R)
    if len(R) != t.s:
        raise ValueError(f"need {t.s} reactions, got {len(R)}")
    zero = ring.zero()
    if len(set(R)) != len(R):
        return zero, []
    n, d = t.n, t.d
    base = [sum(t.y[r][i] for r in R) - 1 for i in range(n)]
    result = zero
    contributions = []
    for I in combinations(net.missing_outflows(), d):
        removed = set(I)
        keep = [i for i in range(n) if i not in removed]
        dy = t.minor(t.y, R, keep)
        if not dy:
            continue
        dg = t.minor(t.g, R, keep)
        if not dg:
            continue
        value = Fraction(dy * dg)
        contributions.append((I, value))
        exps = {Variable.conc(i): base[i] + (i in removed) for i in range(n) if base[i] + (i in removed)}
        result = result + ring.monomial(value if t.s % 2 == 0 else -value, exps)
    return result, contributions


def _det_by_subsets(net: Network, ring: Ring, budget: int | None) -> Polynomial:
    terms: dict[int, object] = {}
    for w in subset_products(net, budget=budget):
        terms[ring.pack(w.exponents(net))] = w.coefficient()
    return Polynomial(ring, {k: (c.numerator if c.denominator == 1 else c) for k, c in terms.items()})


def _det_by_elimination(net: Network, basis: ReducedBasis, ring: Ring) -> Polynomial:
    F = extended_rate_function(net, basis, ring)
    J = jacobian(F, [Variable.conc(basis.permutation[j]) for j in range(net.n)])
    return det_fraction_free(J, ring)


def det_extended_jacobian(
    net: Network,
    basis: ReducedBasis | None = None,
    method: Method | str = Method.BOTH,
    *,
    budget: int | None = DEFAULT_BUDGET,
    ring: Ring | None = None,
) -> Polynomial:
    """Determinant of the Jacobian of the extended rate function."""
    method = Method(method)
    basis = basis or reduced_conservation_basis(net)
    ring = ring or ring_for(net)
    if method == Method.SUBSET:
        return _det_by_subsets(net, ring, budget)
    elim = _det_by_elimination(net, basis, ring)
    if method == Method.BOTH:
        sub = _det_by_subsets(net, ring, budget)
        if sub != elim:
            raise MethodMismatch("subset expansion and elimination disagree")
    return elim


def fully_open_determinant(net: Network, *, normalize: bool = True, evaluate_at_one: bool = False) -> Polynomial:
    """Jacobian determinant of the fully open closure, in original species order.

    With ``normalize`` the added outflow constants are set to 1 and the result
    lives in the ring of ``net``; otherwise it lives in the closure's ring.
    ``evaluate_at_one`` sets every concentration to 1.
    """
    closed = fully_open_closure(net)
    cring = ring_for(closed)
    g = species_rate_function(closed, cring)
    J = jacobian(g, [Variable.conc(i) for i in range(closed.n)])
    det = det_fraction_free(J, cring)
    if evaluate_at_one:
        det = det.substitute({Variable.conc(i): 1 for i in range(closed.n)})
    if not normalize:
        return det
    det = det.substitute({Variable.rate(j): 1 for j in range(net.m, closed.m)})
    return ring_for(net).embed(det)


def det_fully_open_relation(net: Network) -> tuple[Polynomial, Polynomial]:
    """Both sides of the identity relating the fully open and extended determinants.

    The left side is the normalized fully open determinant; the right side is
    ``(-1)^d det(J - E)`` where ``E`` subtracts 1 on the diagonal of each
    non-conservation row whose species lacks an outflow.
    """
    openness = classify_openness(net)
    if openness.kind != OpennessClass.CLOSED:
        raise ValueError("the relation is stated for closed networks")
    ring = ring_for(net)
    lhs = fully_open_determinant(net)
    basis = reduced_conservation_basis(net)
    perm = basis.permutation
    F = extended_rate_function(net, basis, ring)
    J = jacobian(F, [Variable.conc(perm[j]) for j in range(net.n)])
    missing = set(net.missing_outflows())
    for pos in range(basis.d, net.n):
        if perm[pos] in missing:
            J[pos][pos] = J[pos][pos] - 1
    rhs = det_fraction_free(J, ring)
    if basis.d % 2:
        rhs = -rhs
    return lhs, rhs


# ----------------------------------------------------------------- verdicts

def _sign(x) -> int:
    return (x > 0) - (x < 0)


def injectivity_verdict(
    net: Network, *, budget: int | None = DEFAULT_BUDGET, stats: EnumerationStats | None = None
) -> Verdict:
    """Verdict from the signs of determinant coefficients, by subset enumeration.

    Stops at the first pair of coefficients with opposite signs.
    """
    first: dict[int, SubsetWitness] = {}
    for w in subset_products(net, budget=budget, stats=stats):
        sg = _sign(w.coefficient())
        first.setdefault(sg, w)
        if len(first) == 2:
            return Verdict.not_injective(first[1], first[-1])
    if not first:
        return Verdict.all_degenerate()
    (sg,) = first
    return Verdict.injective(sg)


def _witness_from_term(net: Network, ring: Ring, key: int, coefficient) -> SubsetWitness:
    s = classify_openness(net).s
    R = []
    for v, e in ring.unpack(key):
        if v.kind == VarKind.RATE:
            R.append(v.index)
    sums = [sum(net.reactions[r].reactant.get(i) for r in R) for i in range(net.n)]
    I = tuple(i for i in range(net.n) if ring.exponent(key, Variable.conc(i)) - sums[i] + 1 == 1)
    value = Fraction(coefficient) * (-1) ** s
    return SubsetWitness(tuple(R), I, value)


def verdict_from_determinant(net: Network, det: Polynomial) -> Verdict:
    """Verdict read off a determinant polynomial; mixed-sign witnesses are grlex-smallest."""
    rep = sign_report(det)
    if rep.kind == SignClass.ALL_ZERO:
        return Verdict.all_degenerate()
    if rep.kind == SignClass.ALL_POSITIVE:
        return Verdict.injective(1)
    if rep.kind == SignClass.ALL_NEGATIVE:
        return Verdict.injective(-1)
    ring = det.ring
    pos = min(k for k, c in det.terms.items() if c > 0)
    neg = min(k for k, c in det.terms.items() if c < 0)
    return Verdict.not_injective(
        _witness_from_term(net, ring, pos, det.terms[pos]),
        _witness_from_term(net, ring, neg, det.terms[neg]),
    )


@dataclass(frozen=True)
class DegeneracyResult:
    all_degenerate: bool
    certificate: str | None = None
    witness: SubsetWitness | None = None


def degeneracy_check(net: Network, *, budget: int | None = DEFAULT_BUDGET) -> DegeneracyResult:
    """Decide whether every positive steady state is degenerate for every rate vector."""
    openness = classify_openness(net)
    dim_y = rank(reactant_matrix(net))
    if dim_y < openness.s:
        return DegeneracyResult(True, certificate=f"reactant complexes span dimension {dim_y} < s = {openness.s}")
    if net.is_fully_open():
        outflows = tuple(sorted(net.outflow_reaction(i) for i in range(net.n)))
        return DegeneracyResult(False, witness=SubsetWitness(outflows, (), Fraction(1)))
    for w in subset_products(net, budget=budget):
        return DegeneracyResult(False, witness=w)
    return DegeneracyResult(True, certificate="every (R, I) product vanishes")


@dataclass(frozen=True)
class OpenClosedReport:
    fully_open_verdict: Verdict
    closed_verdict: Verdict
    theorem_applies: bool
    declared_degree_s_monomials: int
    consistent: bool
    fully_open_determinant: Polynomial
    closure: Network


def open_closed_relation(net: Network, *, budget: int | None = DEFAULT_BUDGET) -> OpenClosedReport:
    """Compare the verdicts of a network and of its fully open closure.

    When the closure is injective, the network is injective exactly when the
    closure's determinant at c = 1 has a monomial built from ``s`` declared
    rate constants, and all degenerate otherwise.
    """
    s = classify_openness(net).s
    closure = fully_open_closure(net)
    open_verdict = injectivity_verdict(closure, budget=budget)
    closed_verdict = injectivity_verdict(net, budget=budget)
    det1 = fully_open_determinant(net, normalize=False, evaluate_at_one=True)
    ring = det1.ring
    count = 0
    for key in det1.terms:
        declared = sum(e for v, e in ring.unpack(key) if v.kind == VarKind.RATE and v.index < net.m)
        count += declared == s
    applies = open_verdict.is_injective
    if applies:
        expected = VerdictKind.INJECTIVE if count else VerdictKind.ALL_DEGENERATE
        consistent = closed_verdict.kind == expected
    else:
        consistent = True
    return OpenClosedReport(open_verdict, closed_verdict, applies, count, consistent, det1, closure)


class WSDKind(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_NAC = "not_nac"


@dataclass(frozen=True)
class WSDResult:
    kind: WSDKind
    sigma: int | None = None
    positive_witness: SubsetWitness | None = None
    negative_witness: SubsetWitness | None = None
    offending_reaction: int | None = None


def is_nac(net: Network) -> int | None:
    """Index of the first reaction with a species on both sides, or None."""
    for j, r in enumerate(net.reactions):
        if r.reactant.support & r.product.support:
            return j
    return None


def wsd_check(net: Network, *, budget: int | None = DEFAULT_BUDGET) -> WSDResult:
    """Sign-determinacy of all ``(R, I)`` products over every ``I`` of size d.

    Passing also requires a nonzero product with ``I`` among species without
    outflow, which is what keeps the determinant from vanishing.
    """
    bad = is_nac(net)
    if bad is not None:
        return WSDResult(WSDKind.NOT_NAC, offending_reaction=bad)
    missing = set(net.missing_outflows())
    first: dict[int, SubsetWitness] = {}
    effective = False
    for w in subset_products(net, budget=budget, all_species=True):
        sg = _sign(w.value)
        first.setdefault(sg, w)
        if len(first) == 2:
            return WSDResult(WSDKind.FAIL, positive_witness=first[1], negative_witness=first[-1])
        effective = effective or missing.issuperset(w.removed_species)
    if not first or not effective:
        return WSDResult(WSDKind.FAIL)
    (sg,) = first
    return WSDResult(WSDKind.PASS, sigma=0 if sg > 0 else 1)


# ------------------------------------------------------------------ report

@dataclass
class AnalysisReport:
    network: Network
    openness: Openness
    basis: ReducedBasis
    verdict: Verdict
    method: Method
    determinant: Polynomial | None = None
    enumeration: EnumerationStats | None = None
    degeneracy: DegeneracyResult | None = None
    open_closed: OpenClosedReport | None = None
    wsd: WSDResult | None = None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def monomial_count(self) -> int | None:
        return None if self.determinant is None else len(self.determinant)


def analyze(
    net: Network,
    *,
    method: Method | str | None = None,
    budget: int = DEFAULT_BUDGET,
    want_det: bool = False,
    degeneracy: bool = False,
    open_closed: bool = False,
    wsd: bool = False,
) -> AnalysisReport:
    """Full pipeline.  ``method=None`` picks ``both`` within budget, else elimination."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    openness = classify_openness(net)
    basis = reduced_conservation_basis(net)
    timings["basis"] = time.perf_counter() - t0

    size = enumeration_size(net)
    if method is None:
        method = Method.BOTH if size <= budget else Method.ELIMINATION
    method = Method(method)
    if method != Method.ELIMINATION and size > budget:
        raise BudgetExceeded(size, budget)

    ring = ring_for(net)
    t0 = time.perf_counter()
    det = None
    stats = None
    if method == Method.ELIMINATION:
        det = _det_by_elimination(net, basis, ring)
        verdict = verdict_from_determinant(net, det)
    else:
        stats = EnumerationStats()
        verdict = injectivity_verdict(net, budget=budget, stats=stats)
        if method == Method.BOTH or want_det:
            det = det_extended_jacobian(net, basis, method, budget=budget, ring=ring)
            if verdict_from_determinant(net, det).kind != verdict.kind:
                raise MethodMismatch("enumerated verdict disagrees with the determinant")
    timings["verdict"] = time.perf_counter() - t0

    report = AnalysisReport(net, openness, basis, verdict, method, det if want_det else None, stats, timings=timings)
    if degeneracy:
        t0 = time.perf_counter()
        report.degeneracy = degeneracy_check(net, budget=budget)
        timings["degeneracy"] = time.perf_counter() - t0
    if open_closed:
        t0 = time.perf_counter()
        report.open_closed = open_closed_relation(net, budget=budget)
        timings["open_closed"] = time.perf_counter() - t0
    if wsd:
        t0 = time.perf_counter()
        report.wsd = wsd_check(net, budget=budget)
        timings["wsd"] = time.perf_counter() - t0
    return report
