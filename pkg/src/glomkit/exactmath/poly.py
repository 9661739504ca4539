"""Exact sparse multivariate polynomials over the rationals.

A polynomial is a map from exponent tuples to Fraction coefficients.
Exponent tuples run over the variables of a VarTable, which fixes the
variable ordering once per model: state variables first (x1..xM), then
the parameter symbols of each gyrostat in a, b, c, p, q, r order, then
any extra shared symbols.

Zero coefficients are never stored, so equal polynomials always hold
identical maps.  The monomial order used for display, pivot selection
and exact division is graded lexicographic with state variables ranked
before parameters.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Iterator, Mapping

from ..errors import ContractViolation

Monomial = tuple[int, ...]

GYROSTAT_PARAM_LETTERS = ("a", "b", "c", "p", "q", "r")


def grlex_key(mono: Monomial) -> tuple[int, Monomial]:
    """Sort key for graded lexicographic order (larger key = larger monomial)."""
    return (sum(mono), mono)


class VarTable:
    """Ordered registry of state variables and parameter symbols.

    The index assignment is deterministic for a given model: x1..xM first,
    then for each gyrostat k the symbols a_k, b_k, c_k, p_k, q_k, r_k, then
    extra shared symbols in the order given.
    """

    __slots__ = ("names", "state_count", "_index", "_hash")

    def __init__(self, names: Iterable[str], state_count: int):
        self.names = tuple(names)
        self.state_count = state_count
        if len(set(self.names)) != len(self.names):
            raise ContractViolation("variable names must be unique")
        self._index = {name: i for i, name in enumerate(self.names)}
        self._hash = hash((self.names, self.state_count))

    @classmethod
    def for_model(cls, modes: int, gyrostats: int, extra: Iterable[str] = ()) -> "VarTable":
        names = [f"x{i}" for i in range(1, modes + 1)]
        for k in range(1, gyrostats + 1):
            names.extend(f"{letter}{k}" for letter in GYROSTAT_PARAM_LETTERS)
        for name in extra:
            if name not in names:
                names.append(name)
        return cls(names, modes)

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, VarTable)
            and self.names == other.names
            and self.state_count == other.state_count
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"VarTable({self.state_count} state vars, {len(self.names)} total)"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ContractViolation(f"unknown variable {name!r}") from None

    def is_state(self, index: int) -> bool:
        return index < self.state_count

    def param_names(self) -> tuple[str, ...]:
        return self.names[self.state_count:]

    # -- polynomial constructors -------------------------------------------

    def zero(self) -> "Poly":
        return Poly(self, {})

    def const(self, value) -> "Poly":
        c = Fraction(value)
        if c == 0:
            return Poly(self, {})
        return Poly(self, {(0,) * len(self.names): c})

    def var(self, name: str) -> "Poly":
        i = self.index(name)
        exp = [0] * len(self.names)
        exp[i] = 1
        return Poly(self, {tuple(exp): Fraction(1)})

    def x(self, i: int) -> "Poly":
        """State variable x_i (1-based)."""
        if not 1 <= i <= self.state_count:
            raise ContractViolation(f"state index {i} out of range 1..{self.state_count}")
        return self.var(f"x{i}")


class Poly:
    """Immutable sparse polynomial with exact rational coefficients."""

    __slots__ = ("table", "terms")

    def __init__(self, table: VarTable, terms: Mapping[Monomial, Fraction]):
        self.table = table
        self.terms = {m: c for m, c in terms.items() if c != 0}

    # -- basic structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    def __hash__(self):
        return hash((self.table, frozenset(self.terms.items())))

    def key(self) -> tuple:
        """Canonical hashable form (used for deduplication)."""
        return tuple(sorted(self.terms.items()))

    def _check(self, other: "Poly") -> None:
        if self.table is not other.table and self.table != other.table:
            raise ContractViolation("operands use different variable tables")

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly(self.table, out)

    def __neg__(self) -> "Poly":
        return Poly(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = -c
            else:
                s = s - c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Poly(self.table, out)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        if not self.terms or not other.terms:
            return Poly(self.table, {})
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                s = out.get(m)
                out[m] = ca * cb if s is None else s + ca * cb
        return Poly(self.table, out)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ContractViolation("negative powers are not defined for polynomials")
        result = self.table.const(1)
        for _ in range(n):
            result = result * self
        return result

    def scale(self, value) -> "Poly":
        c = Fraction(value)
        if c == 0:
            return Poly(self.table, {})
        return Poly(self.table, {m: c * v for m, v in self.terms.items()})

    # -- calculus ------------------------------------------------------------

    def diff(self, var: int | str) -> "Poly":
        """Formal partial derivative with respect to one variable."""
        i = self.table.index(var) if isinstance(var, str) else var
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                nm = m[:i] + (e - 1,) + m[i + 1:]
                s = out.get(nm)
                v = c * e
                out[nm] = v if s is None else s + v
        return Poly(self.table, out)

    def subs(self, values: Mapping[str, "Poly | Fraction | int"]) -> "Poly":
        """Replace the named variables by rational values or polynomials."""
        idx_vals: dict[int, Poly | Fraction] = {}
        for name, v in values.items():
            i = self.table.index(name)
            if isinstance(v, Poly):
                self._check(v)
                idx_vals[i] = v
            else:
                idx_vals[i] = Fraction(v)
        result = self.table.zero()
        for m, c in self.terms.items():
            piece = None  # lazily built Poly factor for substituted variables
            coeff = c
            rest = list(m)
            for i, v in idx_vals.items():
                e = m[i]
                if not e:
                    continue
                rest[i] = 0
                if isinstance(v, Fraction):
                    coeff *= v ** e
                else:
                    piece = v ** e if piece is None else piece * (v ** e)
            term = Poly(self.table, {tuple(rest): coeff}) if coeff else self.table.zero()
            if piece is not None and coeff:
                term = term * piece
            result = result + term
        return result

    def eval(self, values: Mapping[int, Fraction]) -> Fraction:
        """Exact evaluation; every variable that occurs must be assigned."""
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for i, e in enumerate(m):
                if e:
                    v *= values[i] ** e
            total += v
        return total

    # -- structure queries ----------------------------------------------------

    def variables(self) -> set[int]:
        out: set[int] = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    out.add(i)
        return out

    def parameter_names(self) -> set[str]:
        M = self.table.state_count
        return {self.table.names[i] for i in self.variables() if i >= M}

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def state_degree(self) -> int:
        M = self.table.state_count
        return max((sum(m[:M]) for m in self.terms), default=0)

    def leading_monomial(self) -> Monomial:
        if not self.terms:
            raise ContractViolation("zero polynomial has no leading monomial")
        return max(self.terms, key=grlex_key)

    def leading_coefficient(self) -> Fraction:
        return self.terms[self.leading_monomial()]

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, Fraction(0))

    def split_by_state(self) -> dict[Monomial, "Poly"]:
        """Group terms by their state-variable part.

        Keys are length-M exponent tuples; values are polynomials in the
        parameters only (state exponents zeroed).
        """
        M = self.table.state_count
        pad = (0,) * M
        groups: dict[Monomial, dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            state = m[:M]
            rest = pad + m[M:]
            groups.setdefault(state, {})[rest] = c
        return {s: Poly(self.table, t) for s, t in groups.items()}

    def state_homogeneous_part(self, degree: int) -> "Poly":
        M = self.table.state_count
        return Poly(self.table, {m: c for m, c in self.terms.items() if sum(m[:M]) == degree})

    # -- normalization ---------------------------------------------------------

    def content(self) -> Fraction:
        """Positive rational g such that self/g has coprime integer coefficients."""
        if not self.terms:
            return Fraction(1)
        num = reduce(gcd, (abs(c.numerator) for c in self.terms.values()))
        den = reduce(_lcm, (c.denominator for c in self.terms.values()))
        return Fraction(num, den)

    def monomial_content(self) -> Monomial:
        """Componentwise minimum exponent over all terms."""
        it = iter(self.terms)
        first = next(it)
        mins = list(first)
        for m in it:
            for i, e in enumerate(m):
                if e < mins[i]:
                    mins[i] = e
        return tuple(mins)

    def primitive(self) -> "Poly":
        """Remove rational content and common monomial factor; make the
        leading coefficient positive."""
        if not self.terms:
            return self
        g = self.content()
        shift = self.monomial_content()
        if any(shift):
            terms = {tuple(e - s for e, s in zip(m, shift)): c / g for m, c in self.terms.items()}
        else:
            terms = {m: c / g for m, c in self.terms.items()}
        p = Poly(self.table, terms)
        if p.leading_coefficient() < 0:
            p = -p
        return p

    def remapped(self, table: VarTable, name_map: Mapping[str, str] | None = None) -> "Poly":
        """Re-express this polynomial over another table, optionally renaming
        variables.  Raises if a needed variable is missing in the target."""
        name_map = name_map or {}
        index_map: dict[int, int] = {}
        for i in self.variables():
            name = self.table.names[i]
            index_map[i] = table.index(name_map.get(name, name))
        width = len(table.names)
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            exp = [0] * width
            for i, e in enumerate(m):
                if e:
                    exp[index_map[i]] = e
            out[tuple(exp)] = c
        return Poly(table, out)

    # -- display ----------------------------------------------------------------

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=grlex_key, reverse=True):
            c = self.terms[m]
            mono = monomial_str(self.table, m)
            if mono == "1":
                piece = str(c)
            elif c == 1:
                piece = mono
            elif c == -1:
                piece = f"-{mono}"
            else:
                piece = f"{c}*{mono}"
            parts.append(piece)
        out = parts[0]
        for piece in parts[1:]:
            out += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
        return out


def monomial_str(table: VarTable, mono: Monomial) -> str:
    factors = []
    for i, e in enumerate(mono):
        if e == 1:
            factors.append(table.names[i])
        elif e > 1:
            factors.append(f"{table.names[i]}^{e}")
    return "*".join(factors) if factors else "1"


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class PolyMatrix:
    """Dense matrix of polynomials sharing one variable table."""

    __slots__ = ("table", "rows", "cols", "entries")

    def __init__(self, table: VarTable, entries: Iterable[Iterable[Poly]]):
        self.table = table
        self.entries = tuple(tuple(row) for row in entries)
        self.rows = len(self.entries)
        self.cols = len(self.entries[0]) if self.entries else 0
        for row in self.entries:
            if len(row) != self.cols:
                raise ContractViolation("ragged matrix")

    @classmethod
    def zero(cls, table: VarTable, rows: int, cols: int) -> "PolyMatrix":
        z = table.zero()
        return cls(table, [[z] * cols for _ in range(rows)])

    def __getitem__(self, rc: tuple[int, int]) -> Poly:
        return self.entries[rc[0]][rc[1]]

    def __iter__(self) -> Iterator[tuple[Poly, ...]]:
        return iter(self.entries)

    def is_constant(self) -> bool:
        return all(e.total_degree() == 0 for row in self.entries for e in row)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(self.table, zip(*self.entries)) if self.entries else self

    def add(self, other: "PolyMatrix") -> "PolyMatrix":
        return PolyMatrix(
            self.table,
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.entries, other.entries)],
        )

    def mul_vector(self, vec: Iterable[Poly]) -> list[Poly]:
        v = list(vec)
        if len(v) != self.cols:
            raise ContractViolation("vector length does not match column count")
        out = []
        for row in self.entries:
            acc = self.table.zero()
            for e, x in zip(row, v):
                if e and x:
                    acc = acc + e * x
            out.append(acc)
        return out

    def parameter_names(self) -> set[str]:
        names: set[str] = set()
        for row in self.entries:
            for e in row:
                names |= e.parameter_names()
        return names
