"""Shared test utilities: a small polynomial expression parser, the
closed-form invariants of the sparse feedback-free family, and independent
brute-force oracles."""

from __future__ import annotations

import random
import re
from fractions import Fraction

from glomkit.exactmath import Poly, VarTable
from glomkit.exactmath.linalg import rank_rational
from glomkit.invariants import QuadraticForm
from glomkit.models import Glom, assemble_field

_TOKEN = re.compile(r"\s*(\d+/\d+|\d+|[A-Za-z_][A-Za-z0-9_]*|\*\*|[-+*^()])")


def tokenize(text: str) -> list[str]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad token at {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse(table: VarTable, text: str) -> Poly:
    """Parse expressions like 'p1*x2*x3 + b1*x3 - 1/2*c1*x2^2'."""
    tokens = tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_expr() -> Poly:
        node = parse_term()
        while peek() in ("+", "-"):
            op = take()
            rhs = parse_term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def parse_term() -> Poly:
        node = parse_factor()
        while peek() == "*":
            take()
            node = node * parse_factor()
        return node

    def parse_factor() -> Poly:
        if peek() == "-":
            take()
            return -parse_factor()
        atom = parse_atom()
        if peek() in ("^", "**"):
            take()
            exp = take()
            return atom ** int(exp)
        return atom

    def parse_atom() -> Poly:
        tok = take()
        if tok == "(":
            inner = parse_expr()
            if take() != ")":
                raise ValueError("unbalanced parentheses")
            return inner
        if re.fullmatch(r"\d+/\d+|\d+", tok):
            return table.const(Fraction(tok))
        return table.var(tok)

    result = parse_expr()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens: {tokens[pos:]}")
    return result


def parse_vector(table: VarTable, exprs: list[str]) -> list[Poly]:
    return [parse(table, e) for e in exprs]


def parse_matrix(table: VarTable, rows: list[list[str]]) -> list[list[Poly]]:
    return [[parse(table, e) for e in row] for row in rows]


# ---------------------------------------------------------------------------
# closed-form invariants of the sparse feedback-free family
#
# With triples (2k-1, 2k, 2k+1), no linear feedback and r_k = -p_k - q_k,
# the family has K+1 invariants whose normal forms are
#
#   C_m     = x_{2m}^2  + sum_{j<=m} (-1)^{m-j+1} q_m r_j..r_{m-1} / (p_j..p_m) x_{2j-1}^2
#   C_{K+1} = x_{2K+1}^2 + sum_{j<=K} (-1)^{K-j+1} r_j..r_K / (p_j..p_K)     x_{2j-1}^2
#
# and the unit-weight sum telescopes to sum_i x_i^2.


def sparse_normal_form_numeric(
    K: int, m: int, p: list[Fraction], q: list[Fraction], table: VarTable
) -> QuadraticForm:
    """C_{K,m} at exact parameter values (1-based m up to K+1)."""
    r = [-(pi + qi) for pi, qi in zip(p, q)]
    M = 2 * K + 1
    d = [Fraction(0)] * M
    if m <= K:
        d[2 * m - 1] = Fraction(2)  # x_{2m}^2
        for j in range(1, m + 1):
            num = q[m - 1]
            for t in range(j, m):
                num *= r[t - 1]
            den = Fraction(1)
            for t in range(j, m + 1):
                den *= p[t - 1]
            d[2 * j - 2] = 2 * Fraction(-1) ** (m - j + 1) * num / den
    else:
        d[2 * K] = Fraction(2)  # x_{2K+1}^2
        for j in range(1, K + 1):
            num = Fraction(1)
            for t in range(j, K + 1):
                num *= r[t - 1]
            den = Fraction(1)
            for t in range(j, K + 1):
                den *= p[t - 1]
            d[2 * j - 2] = 2 * Fraction(-1) ** (K - j + 1) * num / den
    return QuadraticForm.from_numeric(table, d)


def sparse_normal_form_scaled(K: int, m: int, table: VarTable) -> Poly:
    """(p_1 ... p_K) * C_{K,m} as a polynomial (denominators cleared)."""
    p = [table.var(f"p{k}") for k in range(1, K + 1)]
    q = [table.var(f"q{k}") for k in range(1, K + 1)]
    r = [-(pk + qk) for pk, qk in zip(p, q)]

    def prod(factors):
        acc = table.const(1)
        for f in factors:
            acc = acc * f
        return acc

    acc = table.zero()
    if m <= K:
        acc = acc + prod(p) * table.x(2 * m) ** 2
        for j in range(1, m + 1):
            coeff = q[m - 1]
            coeff = coeff * prod(r[j - 1 : m - 1])
            coeff = coeff * prod(p[: j - 1]) * prod(p[m:])
            acc = acc + coeff.scale(Fraction(-1) ** (m - j + 1)) * table.x(2 * j - 1) ** 2
    else:
        acc = acc + prod(p) * table.x(2 * K + 1) ** 2
        for j in range(1, K + 1):
            coeff = prod(r[j - 1 : K]) * prod(p[: j - 1])
            acc = acc + coeff.scale(Fraction(-1) ** (K - j + 1)) * table.x(2 * j - 1) ** 2
    return acc


# ---------------------------------------------------------------------------
# brute-force oracles


def oracle_raw_count(g: Glom, n_points: int = 40, seed: int = 0) -> int:
    """Invariant count for a fully numeric model, independent of the
    monomial-collection path: evaluate the dC/dt contribution of every
    candidate coefficient at random state points and take the nullspace
    dimension of the resulting exact linear system."""
    table = g.var_table
    M = g.modes
    field = assemble_field(g)
    columns = []
    for i in range(1, M + 1):
        columns.append(table.x(i) * field[i - 1])
    for i in range(1, M + 1):
        for j in range(i + 1, M + 1):
            columns.append(table.x(j) * field[i - 1] + table.x(i) * field[j - 1])
    for i in range(1, M + 1):
        columns.append(field[i - 1])
    rng = random.Random(seed)
    rows = []
    for _ in range(n_points):
        point = {
            table.index(f"x{i}"): Fraction(rng.randrange(1, 10**6))
            for i in range(1, M + 1)
        }
        rows.append([col.eval(point) if col else Fraction(0) for col in columns])
    return len(columns) - rank_rational(rows)


def determinant_by_permutations(rows: list[list[Fraction]]) -> Fraction:
    """Leibniz-formula determinant; an elimination-free oracle."""
    import itertools

    n = len(rows)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = Fraction(sign)
        for i in range(n):
            term *= rows[i][perm[i]]
        total += term
    return total
