"""Independent checks of the symbolic results at exact random rational points."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .criteria import DEFAULT_BUDGET, Method, det_extended_jacobian, enumeration_size
from .linalg import ExactMatrix, determinant, rank, reduced_conservation_basis
from .network import Network, parse_network
from .poly import (
    Polynomial,
    Variable,
    VarKind,
    evaluate,
    extended_rate_function,
    jacobian,
    ring_for,
    species_rate_function,
)

__all__ = [
    "SplitMix64",
    "random_rational",
    "random_point",
    "random_network",
    "CrosscheckReport",
    "random_eval_crosscheck",
    "RankResult",
    "pointwise_rank_test",
    "bruteforce_coefficient",
]

_MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64: state += 0x9E3779B97F4A7C15, then two xor-shift-multiply rounds."""

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next() % bound


def random_rational(rng: SplitMix64) -> Fraction:
    """A rational p/q in (0, 10] with 1 <= q <= 16."""
    q = 1 + rng.below(16)
    p = 1 + rng.below(10 * q)
    return Fraction(p, q)


def random_point(net: Network, rng: SplitMix64) -> dict[Variable, Fraction]:
    """Values for every rate constant (reaction order), then every concentration."""
    point = {Variable.rate(j): random_rational(rng) for j in range(net.m)}
    point.update({Variable.conc(i): random_rational(rng) for i in range(net.n)})
    return point


def random_network(rng: SplitMix64, max_species: int = 6, max_reactions: int = 8) -> Network:
    """A small random network; complexes have coefficients in {0, 1, 2}.

    About half of the draws avoid the zero complex altogether, which makes
    conservation laws (closed networks) common.
    """
    while True:
        n = 2 + rng.below(max(1, max_species - 1))
        m = 2 + rng.below(max(1, max_reactions - 1))
        closed = rng.below(2) == 0
        names = [f"X{i + 1}" for i in range(n)]

        def cplx():
            roll = rng.below(12)
            if roll == 0 and not closed:
                return ()
            if roll <= 3:
                return ((rng.below(n), 1),)
            out = {}
            for _ in range(1 + rng.below(2)):
                i = rng.below(n)
                out[i] = min(2, out.get(i, 0) + 1)
            return tuple(sorted(out.items()))

        seen = set()
        lines = []
        for _ in range(m):
            if not closed and rng.below(8) == 0:
                pair = (((rng.below(n), 1),), ())
            else:
                pair = (cplx(), cplx())
            if pair[0] == pair[1] or pair in seen:
                continue
            seen.add(pair)
            sides = [" + ".join(f"{a} {names[i]}" if a > 1 else names[i] for i, a in c) or "0" for c in pair]
            lines.append(f"{sides[0]} -> {sides[1]}")
        if lines:
            return parse_network("\n".join(lines))


# ----------------------------------------------------------------- checks

@dataclass
class CrosscheckReport:
    trials: int
    passed: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.trials


def _evaluate_matrix(M: Sequence[Sequence[Polynomial]], point: Mapping[Variable, Fraction]) -> ExactMatrix:
    return ExactMatrix.from_rows([[evaluate(p, point) for p in row] for row in M])


def _extended_jacobian(net: Network):
    basis = reduced_conservation_basis(net)
    ring = ring_for(net)
    F = extended_rate_function(net, basis, ring)
    return basis, ring, jacobian(F, [Variable.conc(basis.permutation[j]) for j in range(net.n)])


def random_eval_crosscheck(net: Network, trials: int, seed: int, *, budget: int = DEFAULT_BUDGET) -> CrosscheckReport:
    """Compare the symbolic determinant with the determinant of the evaluated Jacobian."""
    if trials < 1:
        raise ValueError("trials must be positive")
    basis, ring, J = _extended_jacobian(net)
    method = Method.BOTH if enumeration_size(net) <= budget else Method.ELIMINATION
    det = det_extended_jacobian(net, basis, method, budget=budget, ring=ring)
    rng = SplitMix64(seed)
    report = CrosscheckReport(trials)
    for t in range(trials):
        point = random_point(net, rng)
        symbolic = evaluate(det, point)
        numeric = determinant(_evaluate_matrix(J, point))
        if symbolic == numeric:
            report.passed += 1
        else:
            report.failures.append({
                "trial": t,
                "point": {ring.variable_name(v): str(x) for v, x in sorted(point.items())},
                "symbolic": str(symbolic),
                "numeric": str(numeric),
            })
    return report


@dataclass(frozen=True)
class RankResult:
    full_rank: bool
    kernel_dimension: int
    stacked_rank: int


def pointwise_rank_test(net: Network, point: Mapping[Variable, Fraction]) -> RankResult:
    """Rank of the evaluated extended Jacobian at a positive point.

    Also reports the rank of the conservation rows stacked on ``J(f)``,
    which must agree.
    """
    for v, x in point.items():
        if x <= 0:
            raise ValueError("point must be positive")
    basis, ring, J = _extended_jacobian(net)
    missing = [v for v in (*(Variable.rate(j) for j in range(net.m)), *(Variable.conc(i) for i in range(net.n)))
               if v not in point]
    if missing:
        raise KeyError(f"no value for {ring.variable_name(missing[0])}")
    r = rank(_evaluate_matrix(J, point))
    f = species_rate_function(net, ring)
    Jf = jacobian(f, [Variable.conc(i) for i in range(net.n)])
    rows = [basis.omega_original(i) for i in range(basis.d)]
    rows += [[evaluate(p, point) for p in row] for row in Jf]
    stacked = rank(ExactMatrix.from_rows(rows, net.n))
    return RankResult(r == net.n, net.n - r, stacked)


def bruteforce_coefficient(net: Network, R: Sequence[int], *, max_species: int = 8) -> Polynomial:
    """Coefficient of ``prod_{r in R} k_r`` in the extended determinant, by the Leibniz formula."""
    if net.n > max_species:
        raise ValueError(f"brute force limited to {max_species} species")
    basis, ring, J = _extended_jacobian(net)
    R = tuple(R)
    if len(set(R)) != len(R):
        return ring.zero()
    keep = set(R)
    zero_out = {Variable.rate(j): 0 for j in range(net.m) if j not in keep}
    M = [[p.substitute(zero_out) for p in row] for row in J]
    n = net.n

    total = ring.zero()

    def expand(i: int, used: int, acc: Polynomial, sign: int):
        nonlocal total
        if i == n:
            total = total + (acc if sign > 0 else -acc)
            return
        for j in range(n):
            if used >> j & 1 or M[i][j].is_zero():
                continue
            flips = bin(used >> j).count("1")
            expand(i + 1, used | (1 << j), acc * M[i][j], -sign if flips % 2 else sign)

    expand(0, 0, ring.const(1), 1)
    target = {Variable.rate(r): 1 for r in R}
    out = ring.zero()
    for mono in total.monomials():
        ks = {v: e for v, e in mono.exponents if v.kind == VarKind.RATE}
        if ks == target:
            cs = {v: e for v, e in mono.exponents if v.kind == VarKind.CONC}
            out = out + ring.monomial(mono.coefficient, cs)
    return out

