"""Sparse multivariate polynomials over Q in rate constants and concentrations.

Monomials are packed into a single Python int.  Each variable owns a 16-bit
field; an extra top field holds the total degree.  With rate constants laid
out above concentrations (``k1`` most significant, ``c_n`` least), integer
comparison of packed monomials is the graded lexicographic order and
multiplication of monomials is integer addition.
"""

from __future__ import annotations

import enum
import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Mapping, Sequence

if TYPE_CHECKING:
    from .linalg import ReducedBasis
    from .network import Network

__all__ = [
    "VarKind",
    "Variable",
    "Monomial",
    "Ring",
    "Polynomial",
    "SignClass",
    "SignReport",
    "ExactDivisionError",
    "poly_arith",
    "species_rate_function",
    "extended_rate_function",
    "jacobian",
    "det_fraction_free",
    "evaluate",
    "sign_report",
    "ring_for",
]

_W = 16
_FMASK = (1 << _W) - 1
_MAX_DEGREE = 1 << (_W - 1)
_TOKEN = re.compile(r"\s*(k\[[^\]]*\]|[A-Za-z_][A-Za-z0-9_]*|\d+(?:/\d+)?|[-+*^])?\s*")


class ExactDivisionError(ArithmeticError):
    """A division that must be exact left a remainder."""


class VarKind(enum.IntEnum):
    RATE = 0
    CONC = 1


@dataclass(frozen=True, order=True)
class Variable:
    kind: VarKind
    index: int

    @classmethod
    def rate(cls, j: int) -> "Variable":
        return cls(VarKind.RATE, j)

    @classmethod
    def conc(cls, i: int) -> "Variable":
        return cls(VarKind.CONC, i)


@dataclass(frozen=True)
class Monomial:
    coefficient: Fraction
    exponents: tuple[tuple[Variable, int], ...]

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.exponents)

    def degree_in(self, kind: VarKind) -> int:
        return sum(e for v, e in self.exponents if v.kind == kind)


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r == 0:
            return q
    return _norm(Fraction(a) / b)


class Ring:
    """Variable layout shared by all polynomials of one network."""

    def __init__(self, rate_labels: Sequence[str], species_names: Sequence[str]):
        self.rate_labels = tuple(rate_labels)
        self.species_names = tuple(species_names)
        self.m = len(self.rate_labels)
        self.n = len(self.species_names)
        self.nvars = self.m + self.n
        self._deg_shift = _W * self.nvars
        self._guard = sum(1 << (_W * f + _W - 1) for f in range(self.nvars + 1))

    def __eq__(self, other):
        return (isinstance(other, Ring) and self.rate_labels == other.rate_labels
                and self.species_names == other.species_names)

    def __hash__(self):
        return hash((self.rate_labels, self.species_names))

    def __repr__(self):
        return f"Ring(m={self.m}, n={self.n})"

    # layout
    def _position(self, v: Variable) -> int:
        if v.kind == VarKind.RATE:
            if not 0 <= v.index < self.m:
                raise IndexError(f"rate constant {v.index} out of range")
            return v.index
        if not 0 <= v.index < self.n:
            raise IndexError(f"concentration {v.index} out of range")
        return self.m + v.index

    def _shift(self, pos: int) -> int:
        return _W * (self.nvars - 1 - pos)

    def _unit(self, v: Variable) -> int:
        return (1 << self._deg_shift) + (1 << self._shift(self._position(v)))

    def variable_at(self, pos: int) -> Variable:
        return Variable.rate(pos) if pos < self.m else Variable.conc(pos - self.m)

    def pack(self, exponents: Mapping[Variable, int]) -> int:
        key = 0
        for v, e in exponents.items():
            if e < 0:
                raise ValueError("negative exponent")
            key += e * self._unit(v)
        return key

    def unpack(self, key: int) -> list[tuple[Variable, int]]:
        out = []
        for pos in range(self.nvars):
            e = (key >> self._shift(pos)) & _FMASK
            if e:
                out.append((self.variable_at(pos), e))
        return out

    def exponent(self, key: int, v: Variable) -> int:
        return (key >> self._shift(self._position(v))) & _FMASK

    def key_degree(self, key: int) -> int:
        return key >> self._deg_shift

    def divides(self, a: int, b: int) -> bool:
        """True when monomial ``a`` divides monomial ``b``."""
        return ((b + self._guard) - a) & self._guard == self._guard

    # constructors
    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def const(self, value) -> "Polynomial":
        return Polynomial(self, {0: _norm(value)} if value else {})

    def var(self, v: Variable) -> "Polynomial":
        return Polynomial(self, {self._unit(v): 1})

    def k(self, j: int) -> "Polynomial":
        return self.var(Variable.rate(j))

    def c(self, i: int) -> "Polynomial":
        return self.var(Variable.conc(i))

    def monomial(self, coefficient, exponents: Mapping[Variable, int]) -> "Polynomial":
        return Polynomial(self, {self.pack(exponents): _norm(coefficient)} if coefficient else {})

    def variable_name(self, v: Variable) -> str:
        if v.kind == VarKind.RATE:
            return self.rate_labels[v.index]
        return f"c_{self.species_names[v.index]}"

    def lookup(self, name: str) -> Variable:
        """Variable by rendered name (rate label or ``c_<species>``)."""
        if name in self.rate_labels:
            return Variable.rate(self.rate_labels.index(name))
        if name.startswith("c_") and name[2:] in self.species_names:
            return Variable.conc(self.species_names.index(name[2:]))
        raise KeyError(name)

    def parse(self, text: str) -> "Polynomial":
        """Read a polynomial written as in :meth:`Polynomial.render`."""
        pos = 0
        toks = []
        text = text.strip()
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if mt is None or mt.end() == pos:
                raise ValueError(f"cannot parse polynomial at {text[pos:]!r}")
            if mt.group(1):
                toks.append(mt.group(1))
            pos = mt.end()
        result = self.zero()
        i = 0
        while i < len(toks):
            sign = 1
            while i < len(toks) and toks[i] in "+-":
                sign = -sign if toks[i] == "-" else sign
                i += 1
            coeff = Fraction(sign)
            exps: dict[Variable, int] = {}
            while True:
                if i >= len(toks):
                    raise ValueError("unexpected end of polynomial")
                base = toks[i]
                power = 1
                if i + 2 < len(toks) and toks[i + 1] == "^":
                    power = int(toks[i + 2])
                    i += 2
                i += 1
                if base[0].isdigit():
                    coeff *= Fraction(base) ** power
                else:
                    v = self.lookup(base)
                    exps[v] = exps.get(v, 0) + power
                if i < len(toks) and toks[i] == "*":
                    i += 1
                    continue
                break
            result = result + self.monomial(coeff, exps)
        return result

    def embed(self, p: "Polynomial", rate_map: Sequence[int] | None = None) -> "Polynomial":
        """Re-express ``p`` (from another ring with the same species) in this ring.

        ``rate_map[j]`` is the index in this ring of the source ring's rate
        constant ``j``; the identity by default.
        """
        src = p.ring
        if src.species_names != self.species_names:
            raise ValueError("rings have different species")
        rate_map = list(range(src.m)) if rate_map is None else list(rate_map)
        out: dict[int, object] = {}
        for key, coeff in p.terms.items():
            exps = {}
            for v, e in src.unpack(key):
                exps[Variable.rate(rate_map[v.index]) if v.kind == VarKind.RATE else v] = e
            out[self.pack(exps)] = coeff
        return Polynomial(self, out)


class Polynomial:
    """Immutable polynomial; ``terms`` maps packed monomials to nonzero coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: dict[int, object]):
        self.ring = ring
        self.terms = terms

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self.terms.get(0, 0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.terms.get(0, 0) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ValueError("polynomials belong to different rings")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    # arithmetic
    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = _norm(v)
            else:
                out.pop(k, None)
        return Polynomial(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if not self.terms or not other.terms:
            return self.ring.zero()
        if self.degree() + other.degree() >= _MAX_DEGREE:
            raise OverflowError("total degree exceeds packed-monomial capacity")
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, object] = {}
        get = out.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return Polynomial(self.ring, {k: _norm(c) for k, c in out.items() if c})

    __rmul__ = __mul__

    def scale(self, factor) -> "Polynomial":
        if not factor:
            return self.ring.zero()
        return Polynomial(self.ring, {k: _norm(c * factor) for k, c in self.terms.items()})

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        """Quotient of an exact division; raises :class:`ExactDivisionError` otherwise."""
        other = self._coerce(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        ring = self.ring
        if len(other.terms) == 1:
            (kb, cb), = other.terms.items()
            out = {}
            for ka, ca in self.terms.items():
                if not ring.divides(kb, ka):
                    raise ExactDivisionError("monomial does not divide")
                out[ka - kb] = _div(ca, cb)
            return Polynomial(ring, out)
        lead = max(other.terms)
        lc = other.terms[lead]
        rest = [(k, c) for k, c in other.terms.items() if k != lead]
        rem = dict(self.terms)
        heap = [-k for k in rem]
        heapq.heapify(heap)
        quot: dict[int, object] = {}
        while heap:
            k = -heapq.heappop(heap)
            c = rem.pop(k, 0)
            if not c:
                continue
            while heap and heap[0] == -k:
                heapq.heappop(heap)
            if not ring.divides(lead, k):
                raise ExactDivisionError("division leaves a remainder")
            t = k - lead
            q = _div(c, lc)
            quot[t] = q
            for kb, cb in rest:
                kk = kb + t
                v = rem.get(kk, 0) - q * cb
                if v:
                    if kk not in rem:
                        heapq.heappush(heap, -kk)
                    rem[kk] = _norm(v)
                else:
                    rem.pop(kk, None)
        return Polynomial(ring, quot)

    # queries
    def degree(self) -> int:
        return max((self.ring.key_degree(k) for k in self.terms), default=0)

    def degree_in(self, kind: VarKind) -> set[int]:
        """Set of degrees, over all monomials, in the given variable family."""
        return {sum(e for v, e in self.ring.unpack(k) if v.kind == kind) for k in self.terms}

    def variables(self) -> set[Variable]:
        out = set()
        for k in self.terms:
            out.update(v for v, _ in self.ring.unpack(k))
        return out

    def monomials(self) -> list[Monomial]:
        """Terms in ascending graded lexicographic order."""
        return [Monomial(Fraction(self.terms[k]), tuple(self.ring.unpack(k))) for k in sorted(self.terms)]

    def coefficient_of(self, exponents: Mapping[Variable, int]):
        return self.terms.get(self.ring.pack(exponents), 0)

    def diff(self, v: Variable) -> "Polynomial":
        ring = self.ring
        unit = ring._unit(v)
        out = {}
        for k, c in self.terms.items():
            e = ring.exponent(k, v)
            if e:
                out[k - unit] = _norm(c * e)
        return Polynomial(ring, out)

    def substitute(self, assignment: Mapping[Variable, object]) -> "Polynomial":
        """Replace some variables by rational values."""
        ring = self.ring
        out: dict[int, object] = {}
        for k, c in self.terms.items():
            for v, val in assignment.items():
                e = ring.exponent(k, v)
                if e:
                    c = c * Fraction(val) ** e
                    k -= e * ring._unit(v)
            if c:
                v2 = out.get(k, 0) + c
                if v2:
                    out[k] = v2
                else:
                    out.pop(k, None)
        return Polynomial(ring, {k: _norm(c) for k, c in out.items() if c})

    def homogeneous_part(self, kind: VarKind, degree: int) -> "Polynomial":
        return Polynomial(self.ring, {
            k: c for k, c in self.terms.items()
            if sum(e for v, e in self.ring.unpack(k) if v.kind == kind) == degree
        })

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, mono in enumerate(self.monomials()):
            c = mono.coefficient
            names = [self.ring.variable_name(v) + (f"^{e}" if e > 1 else "") for v, e in mono.exponents]
            mag = abs(c)
            body = "*".join(([str(mag)] if mag != 1 or not names else []) + names)
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({self.render()!r})"

    __str__ = render


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def evaluate(p: Polynomial, assignment: Mapping[Variable, object]) -> Fraction:
    """Exact value of ``p`` at a point covering all of its variables."""
    ring = p.ring
    total = Fraction(0)
    for k, c in p.terms.items():
        term = Fraction(c)
        for v, e in ring.unpack(k):
            if v not in assignment:
                raise KeyError(f"no value for {ring.variable_name(v)}")
            term *= Fraction(assignment[v]) ** e
        total += term
    return total


# ---------------------------------------------------------------- networks

def ring_for(net: "Network") -> Ring:
    return Ring(net.rate_labels, net.species_names)


def species_rate_function(net: "Network", ring: Ring | None = None) -> list[Polynomial]:
    """Mass-action right-hand side, symbolic in rate constants and concentrations."""
    ring = ring or ring_for(net)
    n = net.n
    comps: list[dict[int, object]] = [{} for _ in range(n)]
    for j, r in enumerate(net.reactions):
        exps = {Variable.rate(j): 1}
        for i, a in r.reactant.coefficients:
            exps[Variable.conc(i)] = a
        key = ring.pack(exps)
        y, yp = r.reactant.as_dict(), r.product.as_dict()
        for i in set(y) | set(yp):
            delta = yp.get(i, 0) - y.get(i, 0)
            if delta:
                v = comps[i].get(key, 0) + delta
                if v:
                    comps[i][key] = v
                else:
                    comps[i].pop(key, None)
    return [Polynomial(ring, c) for c in comps]


def extended_rate_function(net: "Network", basis: "ReducedBasis", ring: Ring | None = None) -> list[Polynomial]:
    """Conservation forms followed by the remaining rate components, in permuted order."""
    ring = ring or ring_for(net)
    f = species_rate_function(net, ring)
    perm = basis.permutation
    out = []
    for omega in basis.omegas:
        p = ring.zero()
        for pos, coeff in enumerate(omega):
            if coeff:
                p = p + ring.c(perm[pos]).scale(coeff)
        out.append(p)
    out.extend(f[perm[pos]] for pos in range(basis.d, net.n))
    return out


def jacobian(F: Sequence[Polynomial], over: Sequence[Variable]) -> list[list[Polynomial]]:
    return [[p.diff(v) for v in over] for p in F]


def _cofactor_det(M: list[list[Polynomial]], ring: Ring) -> Polynomial:
    n = len(M)
    # memoized Laplace expansion along rows, keyed by the set of used columns
    level = {0: ring.const(1)}
    for i in range(n):
        nxt: dict[int, Polynomial] = {}
        for used, val in level.items():
            if val.is_zero():
                continue
            for j in range(n):
                if used >> j & 1 or M[i][j].is_zero():
                    continue
                # sign of placing column j after the columns already used
                inv = bin(used >> j).count("1")
                term = val * M[i][j]
                if inv % 2:
                    term = -term
                key = used | (1 << j)
                nxt[key] = nxt[key] + term if key in nxt else term
        level = nxt
    return level.get((1 << n) - 1, ring.zero())


def det_fraction_free(M: Sequence[Sequence[Polynomial]], ring: Ring | None = None) -> Polynomial:
    """Determinant by Bareiss elimination with exact polynomial division.

    Matrices of size four or less use cofactor expansion.  Pivots are chosen
    among the remaining entries preferring constants, then fewest terms.
    """
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix is not square")
    if ring is None:
        if n == 0:
            raise ValueError("ring required for an empty matrix")
        ring = M[0][0].ring
    if n == 0:
        return ring.const(1)
    if n <= 4:
        return _cofactor_det([list(r) for r in M], ring)
    a = [list(r) for r in M]
    sign = 1
    prev = ring.const(1)
    for k in range(n - 1):
        best = None
        for i in range(k, n):
            for j in range(k, n):
                e = a[i][j]
                if e.terms:
                    score = (0 if e.is_constant() else 1, len(e.terms), i, j)
                    if best is None or score < best:
                        best = score
        if best is None:
            return ring.zero()
        _, _, pi, pj = best
        if pi != k:
            a[k], a[pi] = a[pi], a[k]
            sign = -sign
        if pj != k:
            for row in a:
                row[k], row[pj] = row[pj], row[k]
            sign = -sign
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                if aik.terms:
                    v = ri[j] * akk - aik * rk[j]
                else:
                    v = ri[j] * akk
                ri[j] = v.exact_div(prev) if not prev.is_constant() or prev.constant_value() != 1 else v
            ri[k] = ring.zero()
        prev = akk
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


class SignClass(enum.Enum):
    ALL_ZERO = "all_zero"
    ALL_POSITIVE = "all_positive"
    ALL_NEGATIVE = "all_negative"
    MIXED = "mixed"


@dataclass(frozen=True)
class SignReport:
    kind: SignClass
    positive: Monomial | None = None
    negative: Monomial | None = None


def sign_report(p: Polynomial) -> SignReport:
    """Classify coefficient signs; for mixed signs return the grlex-smallest witnesses."""
    if p.is_zero():
        return SignReport(SignClass.ALL_ZERO)
    pos = [k for k, c in p.terms.items() if c > 0]
    neg = [k for k, c in p.terms.items() if c < 0]
    if not neg:
        return SignReport(SignClass.ALL_POSITIVE)
    if not pos:
        return SignReport(SignClass.ALL_NEGATIVE)
    ring = p.ring
    kp, kn = min(pos), min(neg)
    return SignReport(
        SignClass.MIXED,
        Monomial(Fraction(p.terms[kp]), tuple(ring.unpack(kp))),
        Monomial(Fraction(p.terms[kn]), tuple(ring.unpack(kn))),
    )
