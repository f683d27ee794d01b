"""Reaction networks: data model, text parser and structural transforms."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .linalg import ExactMatrix, rank

__all__ = [
    "Species",
    "Complex",
    "Origin",
    "Reaction",
    "Network",
    "NetworkError",
    "NetworkParseError",
    "Openness",
    "OpennessClass",
    "parse_network",
    "stoichiometric_matrix",
    "reactant_matrix",
    "fully_open_closure",
    "project_network",
    "reorder_network",
    "classify_openness",
    "outflow_label",
]


class NetworkError(ValueError):
    """Structurally invalid network."""


class NetworkParseError(NetworkError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Species:
    index: int
    name: str


@dataclass(frozen=True)
class Complex:
    """Non-negative integer combination of species, stored sparsely.

    ``coefficients`` is a sorted tuple of ``(species_index, coefficient)``
    pairs with every coefficient positive; the zero complex is ``()``.
    """

    coefficients: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = tuple(sorted(self.coefficients))
        for (i, a), (j, _) in zip(items, items[1:]):
            if i == j:
                raise NetworkError(f"species index {i} repeated in complex")
        for i, a in items:
            if a <= 0:
                raise NetworkError("stoichiometric coefficients must be positive")
        object.__setattr__(self, "coefficients", items)

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "Complex":
        return cls(tuple((i, a) for i, a in mapping.items() if a != 0))

    def get(self, index: int) -> int:
        for i, a in self.coefficients:
            if i == index:
                return a
        return 0

    def as_dict(self) -> dict[int, int]:
        return dict(self.coefficients)

    def vector(self, n: int) -> list[int]:
        v = [0] * n
        for i, a in self.coefficients:
            v[i] = a
        return v

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.coefficients)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def size(self) -> int:
        return sum(a for _, a in self.coefficients)

    def restrict(self, keep: Mapping[int, int]) -> "Complex":
        """Drop species not in ``keep`` and reindex the rest via ``keep``."""
        return Complex(tuple((keep[i], a) for i, a in self.coefficients if i in keep))

    def render(self, names: Sequence[str]) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for i, a in self.coefficients:
            parts.append(names[i] if a == 1 else f"{a} {names[i]}")
        return " + ".join(parts)


class Origin(enum.Enum):
    DECLARED = "declared"
    ADDED_OUTFLOW = "added_outflow"


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    rate_label: str
    origin: Origin = Origin.DECLARED

    def __post_init__(self):
        if self.reactant == self.product:
            raise NetworkError(f"reaction {self.rate_label} has equal reactant and product")

    def is_outflow_of(self, index: int) -> bool:
        return self.product.is_zero and self.reactant.coefficients == ((index, 1),)

    def render(self, names: Sequence[str]) -> str:
        return f"{self.reactant.render(names)} -> {self.product.render(names)}"


def outflow_label(name: str) -> str:
    # brackets cannot occur in parsed identifiers, so these never collide
    return f"k[{name}->0]"


@dataclass(frozen=True)
class Network:
    """Ordered species and reactions.

    Parsed networks always mention every species in some complex.  Networks
    built by :func:`project_network` keep the full retained species list even
    when a species ends up in no surviving reaction.
    """

    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise NetworkError("species names must be unique")
        for pos, sp in enumerate(self.species):
            if sp.index != pos:
                raise NetworkError(f"species {sp.name} has index {sp.index}, expected {pos}")
        n = len(self.species)
        labels: set[str] = set()
        pairs: set[tuple[Complex, Complex]] = set()
        for r in self.reactions:
            for i, _ in r.reactant.coefficients + r.product.coefficients:
                if not 0 <= i < n:
                    raise NetworkError(f"reaction {r.rate_label} refers to unknown species {i}")
            if r.rate_label in labels:
                raise NetworkError(f"duplicate rate label {r.rate_label}")
            labels.add(r.rate_label)
            key = (r.reactant, r.product)
            if key in pairs:
                raise NetworkError(f"duplicate reaction {r.render(names)}")
            pairs.add(key)

    @classmethod
    def from_names(cls, names: Iterable[str], reactions: Iterable[Reaction]) -> "Network":
        return cls(tuple(Species(i, nm) for i, nm in enumerate(names)), tuple(reactions))

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def m(self) -> int:
        return len(self.reactions)

    @property
    def species_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.species)

    @property
    def rate_labels(self) -> tuple[str, ...]:
        return tuple(r.rate_label for r in self.reactions)

    def species_index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise KeyError(name)

    def reaction_index(self, label: str) -> int:
        for j, r in enumerate(self.reactions):
            if r.rate_label == label:
                return j
        raise KeyError(label)

    def has_outflow(self, index: int) -> bool:
        return any(r.is_outflow_of(index) for r in self.reactions)

    def outflow_reaction(self, index: int) -> int | None:
        for j, r in enumerate(self.reactions):
            if r.is_outflow_of(index):
                return j
        return None

    def missing_outflows(self) -> tuple[int, ...]:
        """Indices of species without a declared outflow ``S -> 0``."""
        return tuple(i for i in range(self.n) if not self.has_outflow(i))

    def is_fully_open(self) -> bool:
        return not self.missing_outflows()

    def render(self) -> str:
        names = self.species_names
        return "\n".join(f"{r.render(names)} ; {r.rate_label}" for r in self.reactions)


# ---------------------------------------------------------------- parsing

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_WS = re.compile(r"[ \t\r\f\v]*")


class _LineParser:
    """Recursive-descent parser for a single reaction statement."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.pos = 0
        self.lineno = lineno

    def error(self, message: str, pos: int | None = None) -> NetworkParseError:
        return NetworkParseError(message, self.lineno, (self.pos if pos is None else pos) + 1)

    def skip(self) -> None:
        self.pos = _WS.match(self.text, self.pos).end()

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str) -> None:
        if not self.peek(s):
            raise self.error(f"expected {s!r}")
        self.pos += len(s)

    def reaction(self):
        lhs = self.complex()
        if self.peek("<->"):
            self.pos += 3
            reversible = True
        elif self.peek("->"):
            self.pos += 2
            reversible = False
        else:
            raise self.error("expected '->' or '<->'")
        rhs = self.complex()
        label = None
        if self.peek(";"):
            self.pos += 1
            self.skip()
            m = _IDENT.match(self.text, self.pos)
            if not m:
                raise self.error("expected rate label after ';'")
            label = m.group()
            self.pos = m.end()
        if not self.at_end():
            raise self.error(f"unexpected {self.text[self.pos]!r}")
        return lhs, rhs, reversible, label

    def complex(self) -> list[tuple[str, int, int]]:
        self.skip()
        start = self.pos
        m = _INT.match(self.text, self.pos)
        if m and m.group() == "0":
            after = m.end()
            rest = self.text[after:].lstrip(" \t")
            if not rest[:1] or not (rest[0].isalnum() or rest[0] in "_*"):
                self.pos = after
                return []
        terms = [self.term()]
        while self.peek("+"):
            self.pos += 1
            terms.append(self.term())
        if not terms:
            raise self.error("empty complex", start)
        return terms

    def term(self) -> tuple[str, int, int]:
        self.skip()
        start = self.pos
        coeff = 1
        m = _INT.match(self.text, self.pos)
        if m:
            coeff = int(m.group())
            self.pos = m.end()
            self.skip()
            if self.peek("*"):
                self.pos += 1
                self.skip()
            if coeff <= 0:
                raise self.error("stoichiometric coefficient must be positive", start)
        m = _IDENT.match(self.text, self.pos)
        if not m:
            if self.text.startswith("-", self.pos):
                raise self.error("stoichiometric coefficient must be positive")
            raise self.error("expected species name")
        self.pos = m.end()
        return m.group(), coeff, start


def parse_network(text: str) -> Network:
    """Parse the line-oriented network format.

    Species are numbered in order of first appearance; ``<->`` yields a
    forward and a reverse reaction.  Unlabelled reactions get ``k<j>`` where
    ``j`` is the 1-based position in the final reaction list.
    """
    names: dict[str, int] = {}
    raw: list[tuple[dict[int, int], dict[int, int], str | None, int, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        p = _LineParser(body, lineno)
        lhs, rhs, reversible, label = p.reaction()
        sides = []
        for terms in (lhs, rhs):
            comp: dict[int, int] = {}
            for nm, coeff, _ in terms:
                idx = names.setdefault(nm, len(names))
                comp[idx] = comp.get(idx, 0) + coeff
            sides.append(comp)
        col = len(body) - len(body.lstrip()) + 1
        if reversible:
            raw.append((sides[0], sides[1], label and f"{label}_f", lineno, col))
            raw.append((sides[1], sides[0], label and f"{label}_r", lineno, col))
        else:
            raw.append((sides[0], sides[1], label, lineno, col))
    if not raw:
        raise NetworkParseError("network has no reactions", max(1, len(text.splitlines())), 1)

    species_names = sorted(names, key=names.get)
    explicit = {lab for _, _, lab, _, _ in raw if lab is not None}
    seen_labels: dict[str, int] = {}
    seen_pairs: dict[tuple[Complex, Complex], int] = {}
    reactions = []
    for j, (lhs, rhs, label, lineno, col) in enumerate(raw, start=1):
        reactant, product = Complex.from_mapping(lhs), Complex.from_mapping(rhs)
        if reactant == product:
            raise NetworkParseError("self-loop reaction (reactant equals product)", lineno, col)
        if label is None:
            label = f"k{j}"
            if label in explicit:
                raise NetworkParseError(
                    f"automatic label {label} collides with an explicit label", lineno, col)
        if label in seen_labels:
            raise NetworkParseError(
                f"duplicate rate label {label} (first used on line {seen_labels[label]})", lineno, col)
        seen_labels[label] = lineno
        key = (reactant, product)
        if key in seen_pairs:
            raise NetworkParseError(
                f"duplicate reaction (first declared on line {seen_pairs[key]})", lineno, col)
        seen_pairs[key] = lineno
        reactions.append(Reaction(reactant, product, label))
    return Network.from_names(species_names, reactions)


# ---------------------------------------------------------------- matrices

def stoichiometric_matrix(net: Network) -> ExactMatrix:
    """n x m matrix whose column j is product_j - reactant_j."""
    n = net.n
    cols = []
    for r in net.reactions:
        y, yp = r.reactant.vector(n), r.product.vector(n)
        cols.append([b - a for a, b in zip(y, yp)])
    return ExactMatrix.from_columns(cols, n)


def reactant_matrix(net: Network) -> ExactMatrix:
    n = net.n
    return ExactMatrix.from_columns([r.reactant.vector(n) for r in net.reactions], n)


# ---------------------------------------------------------------- transforms

def fully_open_closure(net: Network) -> Network:
    """Append ``S_i -> 0`` for every species lacking an outflow."""
    added = [
        Reaction(Complex(((i, 1),)), Complex(), outflow_label(net.species[i].name), Origin.ADDED_OUTFLOW)
        for i in net.missing_outflows()
    ]
    if not added:
        return net
    return Network(net.species, net.reactions + tuple(added))


def project_network(net: Network, removed: Iterable[int]) -> Network:
    """Delete the species in ``removed`` from every complex.

    Reactions that become trivial are dropped; of several reactions that
    project to the same pair, the first keeps its label.
    """
    removed = set(removed)
    for i in removed:
        if not 0 <= i < net.n:
            raise NetworkError(f"species index {i} out of range")
    kept = [s for s in net.species if s.index not in removed]
    reindex = {s.index: pos for pos, s in enumerate(kept)}
    seen: set[tuple[Complex, Complex]] = set()
    reactions = []
    for r in net.reactions:
        y, yp = r.reactant.restrict(reindex), r.product.restrict(reindex)
        if y == yp or (y, yp) in seen:
            continue
        seen.add((y, yp))
        reactions.append(Reaction(y, yp, r.rate_label, r.origin))
    return Network(tuple(Species(pos, s.name) for pos, s in enumerate(kept)), tuple(reactions))


def reorder_network(
    net: Network,
    species_order: Sequence[str] | None = None,
    reaction_order: Sequence[str] | None = None,
) -> Network:
    """Same network with species and/or reactions listed in another order (by name/label)."""
    names = list(species_order) if species_order is not None else list(net.species_names)
    labels = list(reaction_order) if reaction_order is not None else list(net.rate_labels)
    if sorted(names) != sorted(net.species_names) or sorted(labels) != sorted(net.rate_labels):
        raise NetworkError("new order must be a permutation of the old one")
    new_index = {net.species_index(nm): pos for pos, nm in enumerate(names)}
    reactions = []
    for lab in labels:
        r = net.reactions[net.reaction_index(lab)]
        reactions.append(Reaction(r.reactant.restrict(new_index), r.product.restrict(new_index), r.rate_label, r.origin))
    return Network.from_names(names, reactions)


class OpennessClass(enum.Enum):
    FULLY_OPEN = "fully_open"
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True)
class Openness:
    kind: OpennessClass
    s: int
    d: int

    @property
    def is_open(self) -> bool:
        return self.kind is not OpennessClass.CLOSED


def classify_openness(net: Network) -> Openness:
    s = rank(stoichiometric_matrix(net))
    d = net.n - s
    if net.is_fully_open():
        kind = OpennessClass.FULLY_OPEN
    elif d == 0:
        kind = OpennessClass.OPEN
    else:
        kind = OpennessClass.CLOSED
    return Openness(kind, s, d)
