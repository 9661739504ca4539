"""Fraction-free linear algebra over the rationals and over polynomial entries.

Numeric matrices are reduced by integer Bareiss elimination (one-step,
divide by the previous pivot), which keeps every intermediate entry equal
to a minor of the input and therefore bounded.  The pivot rule is fixed
for reproducibility: scan columns left to right, take the first row with
a nonzero entry.

Polynomial matrices use the same Bareiss scheme with exact multivariate
division; there the pivot rule is lowest total degree, ties broken by
column then row order, which keeps degree growth down and reproduces the
textbook nullspace bases for the matrices this package builds.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from ..errors import ContractViolation
from .poly import Poly, PolyMatrix, grlex_key

# Range for random integer substitutions used by generic-rank probing.
# Large enough that hitting a parameter choice of non-maximal rank is
# vanishingly unlikely (Schwartz-Zippel), small enough to keep the
# integer arithmetic cheap.
GENERIC_LOW = 1 << 20
GENERIC_HIGH = 1 << 31


# ---------------------------------------------------------------------------
# integer core


def _int_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Scale each row to coprime integers (row scaling preserves nullspace)."""
    out = []
    for row in rows:
        den = reduce(_lcm, (c.denominator for c in row), 1)
        ints = [int(c * den) for c in row]
        g = reduce(gcd, (abs(v) for v in ints), 0)
        if g > 1:
            ints = [v // g for v in ints]
        out.append(ints)
    return out


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def echelon_int(rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Forward Bareiss elimination in place; returns (rows, pivot columns).

    After the call, row i (for i < len(pivots)) has its first nonzero entry
    in column pivots[i], and all rows below the pivot rows are zero in the
    pivot columns.
    """
    if not rows:
        return rows, []
    n_rows = len(rows)
    n_cols = len(rows[0])
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        for i in range(r, n_rows):
            if rows[i][c]:
                break
        else:
            continue
        if i != r:
            rows[r], rows[i] = rows[i], rows[r]
        piv = rows[r][c]
        for i in range(r + 1, n_rows):
            fac = rows[i][c]
            row_i = rows[i]
            row_r = rows[r]
            rows[i] = [(piv * row_i[j] - fac * row_r[j]) // prev for j in range(n_cols)]
        prev = piv
        pivots.append(c)
        r += 1
    return rows, pivots


def rank_rational(rows: Sequence[Sequence[Fraction]]) -> int:
    ints = _int_rows(rows)
    _, pivots = echelon_int(ints)
    return len(pivots)


def nullspace_rational(rows: Sequence[Sequence[Fraction]], n_cols: int) -> list[list[int]]:
    """Right nullspace basis with coprime integer entries.

    One basis vector per free column, in column order; the free-column
    entry of each vector is positive.
    """
    ints = _int_rows(rows)
    ech, pivots = echelon_int(ints)
    pivot_set = set(pivots)
    free = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    for fc in free:
        v: list[Fraction] = [Fraction(0)] * n_cols
        v[fc] = Fraction(1)
        for i in range(len(pivots) - 1, -1, -1):
            c = pivots[i]
            row = ech[i]
            s = Fraction(0)
            for j in range(c + 1, n_cols):
                if row[j] and v[j]:
                    s += Fraction(row[j]) * v[j]
            v[c] = -s / row[c]
        den = reduce(_lcm, (x.denominator for x in v), 1)
        ints_v = [int(x * den) for x in v]
        g = reduce(gcd, (abs(x) for x in ints_v), 0)
        basis.append([x // g for x in ints_v])
    return basis


# ---------------------------------------------------------------------------
# public numeric operations


def _fraction_rows(m: PolyMatrix) -> list[list[Fraction]]:
    zero_mono = (0,) * len(m.table.names)
    rows = []
    for row in m.entries:
        out = []
        for e in row:
            if e.total_degree() > 0:
                raise ContractViolation("matrix entries must be constant")
            out.append(e.coefficient(zero_mono))
        rows.append(out)
    return rows


def nullspace_exact(m: PolyMatrix) -> list[list[int]]:
    """Nullspace basis of an all-rational matrix, integer entries, content 1."""
    return nullspace_rational(_fraction_rows(m), m.cols)


def rank_exact(m: PolyMatrix) -> int:
    return rank_rational(_fraction_rows(m))


def generic_rank(
    m: PolyMatrix,
    generic_params: Iterable[str] | None = None,
    trials: int = 3,
    seed: int = 0,
) -> int:
    """Rank of a parameter-dependent matrix at random integer parameter values.

    Substitutes independent integers from [2^20, 2^31) for each generic
    parameter, computes the exact rank, and returns the maximum over
    `trials` repetitions.  By Schwartz-Zippel this equals the rank at
    generic (all-nonzero, algebraically independent) parameter values
    except with negligible probability.
    """
    if trials < 1:
        raise ContractViolation("trials must be at least 1")
    present = m.parameter_names()
    if generic_params is not None:
        allowed = set(generic_params)
        stray = present - allowed
        if stray:
            raise ContractViolation(f"matrix contains non-generic variables: {sorted(stray)}")
    names = sorted(present)
    if not names:
        return rank_exact(m)
    rng = random.Random(seed)
    table = m.table
    best = 0
    for _ in range(trials):
        values = {table.index(n): Fraction(rng.randrange(GENERIC_LOW, GENERIC_HIGH)) for n in names}
        rows = [[e.eval(values) if e else Fraction(0) for e in row] for row in m.entries]
        best = max(best, rank_rational(rows))
    return best


# ---------------------------------------------------------------------------
# polynomial elimination


def divide_exact(a: Poly, b: Poly) -> Poly:
    """Exact polynomial division a / b; raises if b does not divide a."""
    if b.is_zero():
        raise ContractViolation("division by the zero polynomial")
    if a.is_zero():
        return a
    table = a.table
    b_lead = b.leading_monomial()
    b_coeff = b.terms[b_lead]
    quotient: dict[tuple[int, ...], Fraction] = {}
    rest = dict(a.terms)
    while rest:
        lead = max(rest, key=grlex_key)
        q_mono = tuple(e - f for e, f in zip(lead, b_lead))
        if any(e < 0 for e in q_mono):
            raise ContractViolation("polynomial division is not exact")
        q_coeff = rest[lead] / b_coeff
        quotient[q_mono] = q_coeff
        for m, c in b.terms.items():
            t = tuple(x + y for x, y in zip(q_mono, m))
            s = rest.get(t, Fraction(0)) - q_coeff * c
            if s:
                rest[t] = s
            else:
                rest.pop(t, None)
    return Poly(table, quotient)


def _echelon_poly(m: PolyMatrix) -> tuple[list[list[Poly]], list[tuple[int, Poly]]]:
    """Forward Bareiss elimination over polynomial entries.

    Returns the processed pivot rows (in elimination order) and the list of
    (pivot column, pivot value) pairs.  Pivot choice: among all remaining
    nonzero entries, lowest total degree, ties by column then row.
    """
    table = m.table
    remaining = [list(row) for row in m.entries]
    done_rows: list[list[Poly]] = []
    pivots: list[tuple[int, Poly]] = []
    used_cols: set[int] = set()
    prev = table.const(1)
    while remaining:
        best = None
        for ri, row in enumerate(remaining):
            for ci in range(m.cols):
                if ci in used_cols:
                    continue
                e = row[ci]
                if e:
                    k = (e.total_degree(), ci, ri)
                    if best is None or k < best[0]:
                        best = (k, ri, ci)
        if best is None:
            break
        _, ri, ci = best
        pivot_row = remaining.pop(ri)
        piv = pivot_row[ci]
        new_remaining = []
        for row in remaining:
            fac = row[ci]
            new_row = []
            for j in range(m.cols):
                t = piv * row[j]
                if fac and pivot_row[j]:
                    t = t - fac * pivot_row[j]
                new_row.append(divide_exact(t, prev) if t else t)
            new_remaining.append(new_row)
        remaining = new_remaining
        done_rows.append(pivot_row)
        pivots.append((ci, piv))
        used_cols.add(ci)
        prev = piv
    return done_rows, pivots


def nullspace_symbolic(m: PolyMatrix) -> list[list[Poly]]:
    """Nullspace basis over the fraction field, returned as polynomial vectors.

    Denominators are cleared during back substitution; each vector is then
    stripped of rational content, common monomial factors, and any leftover
    pivot-polynomial factors introduced by the clearing, and is sign-fixed
    so its first nonzero component has positive leading coefficient.
    """
    table = m.table
    rows, pivots = _echelon_poly(m)
    pivot_cols = {c for c, _ in pivots}
    free = [c for c in range(m.cols) if c not in pivot_cols]
    one = table.const(1)
    # factors that denominator clearing can smuggle into a vector: pivot
    # values and the matrix entries themselves
    factor_pool = [p for _, p in pivots]
    factor_pool.extend(e for row in m.entries for e in row if e)
    basis: list[list[Poly]] = []
    for fc in free:
        w = [table.zero()] * m.cols
        w[fc] = one
        for i in range(len(pivots) - 1, -1, -1):
            c, piv = pivots[i]
            row = rows[i]
            s = table.zero()
            for j in range(m.cols):
                if j != c and row[j] and w[j]:
                    s = s + row[j] * w[j]
            w = [piv * w[j] if j != c else w[j] for j in range(m.cols)]
            w[c] = -s
        basis.append(_normalize_vector(w, factor_pool))
    for v in basis:
        check = m.mul_vector(v)
        if any(not e.is_zero() for e in check):
            raise ContractViolation("internal error: nullspace vector fails m*v = 0")
    return basis


def _strip_content(vec: list[Poly]) -> list[Poly]:
    """Remove rational content and the common monomial factor of a vector."""
    table = vec[0].table
    nonzero = [v for v in vec if v]
    if not nonzero:
        return vec
    g = reduce(gcd, (v.content().numerator for v in nonzero))
    den = reduce(_lcm, (v.content().denominator for v in nonzero))
    vec = [v.scale(Fraction(den, g)) for v in vec]
    mins = None
    for v in vec:
        if v:
            mc = v.monomial_content()
            mins = mc if mins is None else tuple(min(a, b) for a, b in zip(mins, mc))
    if mins and any(mins):
        vec = [
            Poly(table, {tuple(e - s for e, s in zip(m, mins)): c for m, c in v.terms.items()})
            if v
            else v
            for v in vec
        ]
    return vec


def _normalize_vector(vec: list[Poly], pivot_polys: list[Poly]) -> list[Poly]:
    if all(v.is_zero() for v in vec):
        return vec
    # Denominator clearing can leave a pivot polynomial as a common factor;
    # try dividing the whole vector by each multi-term pivot until nothing
    # divides (pure-monomial pivots are covered by the content stripping).
    candidates = {}
    for p in pivot_polys:
        norm = p.scale(Fraction(1) / p.content())
        if norm.leading_coefficient() < 0:
            norm = -norm
        if norm.total_degree() > 0 and len(norm.terms) > 1:
            candidates[norm.key()] = norm
    changed = True
    while changed:
        vec = _strip_content(vec)
        changed = False
        for cand in candidates.values():
            try:
                divided = [divide_exact(v, cand) if v else v for v in vec]
            except ContractViolation:
                continue
            vec = divided
            changed = True
            break
    for v in vec:
        if v:
            if v.leading_coefficient() < 0:
                vec = [-u for u in vec]
            break
    return vec


def proportional(v1: Sequence[Poly], v2: Sequence[Poly]) -> bool:
    """True iff two polynomial vectors are parallel.

    Checked by cross-product vanishing (v1_i * v2_j == v1_j * v2_i for all
    i < j) plus agreement of the zero patterns.  Two all-zero vectors count
    as proportional by convention.
    """
    if len(v1) != len(v2):
        raise ContractViolation("vectors must have equal length")
    for a, b in zip(v1, v2):
        if a.is_zero() != b.is_zero():
            return False
    n = len(v1)
    for i in range(n):
        for j in range(i + 1, n):
            if not (v1[i] * v2[j] - v1[j] * v2[i]).is_zero():
                return False
    return True


def poly_proportional(a: Poly, b: Poly) -> bool:
    """True iff a = c*b for some nonzero rational c (or both are zero)."""
    if a.is_zero() or b.is_zero():
        return a.is_zero() and b.is_zero()
    return a.scale(b.leading_coefficient()) == b.scale(a.leading_coefficient())
