"""Quadratic invariants by the linear-system approach.

A candidate invariant C = (1/2) sum d_i x_i^2 + sum_{i<j} e_ij x_i x_j
+ sum f_i x_i is conserved iff dC/dt vanishes identically along the
vector field.  dC/dt is linear in the unknown coefficients, so collecting
the coefficient of each state monomial yields a homogeneous linear system
whose nullspace dimension is the number of (raw) quadratic invariants.

All e_ij unknowns are always retained; the vanishing of mixed terms for
particular model structures emerges from the algebra instead of being
imposed per configuration.  Constant terms are excluded from candidates
because constants are invariants of any flow.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ContractViolation
from .exactmath import Poly, PolyMatrix, VarTable, grlex_key, monomial_str
from .exactmath.linalg import (
    GENERIC_HIGH,
    GENERIC_LOW,
    generic_rank,
    nullspace_rational,
    rank_rational,
)
from .models import Glom, VectorField, assemble_field

SUBCLASS_VARY_LIMIT = 20


@dataclass(frozen=True)
class QuadraticForm:
    """C = (1/2) sum d_i x_i^2 + sum_{i<j} e_ij x_i x_j + sum f_i x_i.

    Coefficients are polynomials in the parameters (constants for numeric
    forms).  There is no constant term.
    """

    table: VarTable
    d: tuple[Poly, ...]
    e: tuple[tuple[Poly, ...], ...]  # strictly upper triangular, e[i][j] for i<j (0-based)
    f: tuple[Poly, ...]

    @classmethod
    def from_numeric(
        cls,
        table: VarTable,
        d: Sequence[Fraction],
        e: Mapping[tuple[int, int], Fraction] | None = None,
        f: Sequence[Fraction] | None = None,
    ) -> "QuadraticForm":
        M = table.state_count
        e = e or {}
        f = f if f is not None else [Fraction(0)] * M
        dd = tuple(table.const(v) for v in d)
        ee = tuple(
            tuple(table.const(e.get((i + 1, j + 1), 0)) for j in range(M)) for i in range(M)
        )
        ff = tuple(table.const(v) for v in f)
        return cls(table, dd, ee, ff)

    @classmethod
    def from_coeff_vector(cls, table: VarTable, vec: Sequence) -> "QuadraticForm":
        """Unpack a vector ordered d_1..d_M, e_12..e_{M-1,M}, f_1..f_M."""
        M = table.state_count
        if len(vec) != M * (M + 3) // 2:
            raise ContractViolation("coefficient vector has wrong length")
        as_poly = [v if isinstance(v, Poly) else table.const(v) for v in vec]
        d = tuple(as_poly[:M])
        e_rows = [[table.zero()] * M for _ in range(M)]
        idx = M
        for i in range(M):
            for j in range(i + 1, M):
                e_rows[i][j] = as_poly[idx]
                idx += 1
        f = tuple(as_poly[idx:])
        return cls(table, d, tuple(tuple(r) for r in e_rows), f)

    @classmethod
    def energy(cls, table: VarTable) -> "QuadraticForm":
        M = table.state_count
        return cls.from_numeric(table, [Fraction(1)] * M)

    @property
    def M(self) -> int:
        return len(self.d)

    def coeff_vector(self) -> list[Poly]:
        out = list(self.d)
        for i in range(self.M):
            for j in range(i + 1, self.M):
                out.append(self.e[i][j])
        out.extend(self.f)
        return out

    def e_coeff(self, i: int, j: int) -> Poly:
        """e coefficient for 1-based indices i < j."""
        return self.e[i - 1][j - 1]

    def value_poly(self) -> Poly:
        table = self.table
        half = Fraction(1, 2)
        acc = table.zero()
        for i in range(self.M):
            xi = table.x(i + 1)
            if self.d[i]:
                acc = acc + (self.d[i] * xi * xi).scale(half)
            for j in range(i + 1, self.M):
                if self.e[i][j]:
                    acc = acc + self.e[i][j] * xi * table.x(j + 1)
            if self.f[i]:
                acc = acc + self.f[i] * xi
        return acc

    def gradient(self) -> list[Poly]:
        table = self.table
        out = []
        for i in range(self.M):
            gi = self.d[i] * table.x(i + 1)
            for j in range(self.M):
                if j < i and self.e[j][i]:
                    gi = gi + self.e[j][i] * table.x(j + 1)
                elif j > i and self.e[i][j]:
                    gi = gi + self.e[i][j] * table.x(j + 1)
            gi = gi + self.f[i]
            out.append(gi)
        return out

    def time_derivative(self, field: VectorField) -> Poly:
        acc = self.table.zero()
        for gi, comp in zip(self.gradient(), field.components):
            if gi and comp:
                acc = acc + gi * comp
        return acc

    def is_numeric(self) -> bool:
        return all(c.total_degree() == 0 for c in self.coeff_vector())

    def numeric_coeffs(self) -> list[Fraction]:
        zero_mono = (0,) * len(self.table.names)
        if not self.is_numeric():
            raise ContractViolation("form has symbolic coefficients")
        return [c.coefficient(zero_mono) for c in self.coeff_vector()]

    def instantiate(self, values: Mapping[str, Fraction]) -> "QuadraticForm":
        vec = [c.subs(values) for c in self.coeff_vector()]
        return QuadraticForm.from_coeff_vector(self.table, vec)

    def map_signs(self, signs: Sequence[int]) -> "QuadraticForm":
        """The form x -> C(Sx) for a diagonal sign transformation S."""
        d = self.d
        e = tuple(
            tuple(self.e[i][j].scale(signs[i] * signs[j]) for j in range(self.M))
            for i in range(self.M)
        )
        f = tuple(self.f[i].scale(signs[i]) for i in range(self.M))
        return QuadraticForm(self.table, d, e, f)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeff_vector())

    def __str__(self) -> str:
        return str(self.value_poly())


# ---------------------------------------------------------------------------
# linear system assembly


@dataclass(frozen=True)
class InvariantSystem:
    """The homogeneous system forcing dC/dt = 0.

    Rows are indexed by the state monomials that occur; columns by the
    unknowns d_1..d_M, e_12..e_{M-1,M}, f_1..f_M.  Entries are linear
    polynomials in the parameters.
    """

    matrix: PolyMatrix
    row_labels: tuple[str, ...]
    row_monomials: tuple[tuple[int, ...], ...]
    col_labels: tuple[str, ...]

    @property
    def rows(self) -> int:
        return self.matrix.rows

    @property
    def cols(self) -> int:
        return len(self.col_labels)

    def restricted(self, keep: Iterable[str]) -> "InvariantSystem":
        """Sub-system on the named columns, with all-zero rows dropped."""
        keep_set = set(keep)
        col_idx = [i for i, lbl in enumerate(self.col_labels) if lbl in keep_set]
        entries = []
        labels = []
        monos = []
        for label, mono, row in zip(self.row_labels, self.row_monomials, self.matrix.entries):
            sub = [row[i] for i in col_idx]
            if any(sub):
                entries.append(sub)
                labels.append(label)
                monos.append(mono)
        return InvariantSystem(
            PolyMatrix(self.matrix.table, entries),
            tuple(labels),
            tuple(monos),
            tuple(self.col_labels[i] for i in col_idx),
        )

    def row_by_label(self, label: str) -> tuple[Poly, ...]:
        return self.matrix.entries[self.row_labels.index(label)]


def unknown_labels(M: int) -> list[str]:
    labels = [f"d{i}" for i in range(1, M + 1)]
    labels += [f"e{i}_{j}" for i in range(1, M + 1) for j in range(i + 1, M + 1)]
    labels += [f"f{i}" for i in range(1, M + 1)]
    return labels


def build_system(g: Glom) -> InvariantSystem:
    """Collect the coefficient of every state monomial in dC/dt."""
    table = g.var_table
    M = g.modes
    field = assemble_field(g)
    columns: list[Poly] = []
    # contribution of each unknown to dC/dt
    for i in range(1, M + 1):
        columns.append(table.x(i) * field[i - 1])
    for i in range(1, M + 1):
        for j in range(i + 1, M + 1):
            columns.append(table.x(j) * field[i - 1] + table.x(i) * field[j - 1])
    for i in range(1, M + 1):
        columns.append(field[i - 1])
    rows: dict[tuple[int, ...], list[Poly]] = {}
    zero = table.zero()
    n_cols = len(columns)
    for ci, contribution in enumerate(columns):
        for state_mono, coeff in contribution.split_by_state().items():
            row = rows.get(state_mono)
            if row is None:
                row = [zero] * n_cols
                rows[state_mono] = row
            row[ci] = row[ci] + coeff
    ordered = sorted(
        (mono for mono, row in rows.items() if any(row)), key=grlex_key, reverse=True
    )
    entries = [rows[mono] for mono in ordered]
    pad = (0,) * (len(table.names) - M)
    labels = tuple(monomial_str(table, mono + pad) for mono in ordered)
    return InvariantSystem(
        PolyMatrix(table, entries) if entries else PolyMatrix.zero(table, 0, n_cols),
        labels,
        tuple(ordered),
        tuple(unknown_labels(M)),
    )


# ---------------------------------------------------------------------------
# counting and reconstruction


@dataclass(frozen=True)
class InvariantReport:
    raw_count: int
    independent_count: int
    basis: tuple[QuadraticForm, ...]
    energy_included: bool
    generic: bool
    param_point: dict[str, Fraction] | None
    seed: int


def count_invariants(g: Glom, seed: int = 0, trials: int = 3) -> InvariantReport:
    """Count quadratic invariants and reconstruct a basis.

    The raw count is cols - generic rank of the system.  Under generic
    parameters the basis is reconstructed at one recorded random rational
    parameter point (coefficients are instance-specific, counts are
    generic); fully numeric models are solved exactly.  The functionally
    independent count is the rank of the basis gradients at random state
    points (best of `trials`).
    """
    rng = random.Random(seed)
    system = build_system(g)
    table = g.var_table
    n_cols = system.cols
    params = sorted(system.matrix.parameter_names())
    zero_mono = (0,) * len(table.names)

    if not params:
        rows = [[e.coefficient(zero_mono) for e in row] for row in system.matrix.entries]
        raw = n_cols - rank_rational(rows)
        vectors = nullspace_rational(rows, n_cols)
        param_point = None
        generic = False
    else:
        raw = n_cols - generic_rank(system.matrix, trials=trials, seed=rng.randrange(1 << 30))
        for _ in range(8):
            point = {
                name: Fraction(rng.randrange(GENERIC_LOW, GENERIC_HIGH)) for name in params
            }
            values = {table.index(n): v for n, v in point.items()}
            rows = [
                [e.eval(values) if e else Fraction(0) for e in row]
                for row in system.matrix.entries
            ]
            if n_cols - rank_rational(rows) == raw:
                break
        else:
            raise ContractViolation("could not find a parameter point of generic rank")
        vectors = nullspace_rational(rows, n_cols)
        param_point = point
        generic = True

    basis = tuple(
        QuadraticForm.from_coeff_vector(table, [Fraction(v) for v in vec]) for vec in vectors
    )
    independent = _independent_count(basis, rng, trials)
    energy_included = basis_contains(basis, QuadraticForm.energy(table))
    return InvariantReport(raw, independent, basis, energy_included, generic, param_point, seed)


def _independent_count(basis: Sequence[QuadraticForm], rng: random.Random, trials: int) -> int:
    """Rank of the gradient matrix at random generic state points (max of trials)."""
    if not basis:
        return 0
    M = basis[0].M
    table = basis[0].table
    best = 0
    for _ in range(trials):
        values = {
            table.index(f"x{i}"): Fraction(rng.randrange(GENERIC_LOW, GENERIC_HIGH))
            for i in range(1, M + 1)
        }
        rows = []
        for form in basis:
            rows.append([gi.eval(values) if gi else Fraction(0) for gi in form.gradient()])
        best = max(best, rank_rational(rows))
        if best == len(basis):
            break
    return best


def basis_contains(basis: Sequence[QuadraticForm], candidate: QuadraticForm) -> bool:
    """Exact span membership via coefficient-vector rank comparison."""
    if candidate.is_zero():
        return True
    rows = [form.numeric_coeffs() for form in basis]
    base_rank = rank_rational(rows) if rows else 0
    rows.append(candidate.numeric_coeffs())
    return rank_rational(rows) == base_rank


def span_rank(forms: Sequence[QuadraticForm]) -> int:
    rows = [form.numeric_coeffs() for form in forms]
    return rank_rational(rows) if rows else 0


# ---------------------------------------------------------------------------
# derived analyses


def sparse_feedback_free(K: int) -> Glom:
    """The sparse model with K gyrostats and no linear feedback terms."""
    if K < 1:
        raise ContractViolation("K must be at least 1")
    from .models import builtin_model, no_linear_feedback

    return no_linear_feedback(builtin_model("sparse", K))


def sparse_invariants(K: int, seed: int = 0) -> tuple[QuadraticForm, ...]:
    """Invariant basis of the sparse no-linear-feedback model (K+1 members)."""
    return count_invariants(sparse_feedback_free(K), seed=seed).basis


@dataclass(frozen=True)
class SubclassTable:
    vary: tuple[str, ...]
    rows: tuple[tuple[str, int, int], ...]  # (mask, raw_count, independent_count)

    def by_mask(self) -> dict[str, tuple[int, int]]:
        return {mask: (raw, ind) for mask, raw, ind in self.rows}


def enumerate_subclasses(g: Glom, vary: Sequence[str], seed: int = 0) -> SubclassTable:
    """Counts for every on/off pattern of the varied parameters.

    Mask bit 1 keeps the parameter as specified, bit 0 sets it to zero;
    the first name in `vary` is the most significant bit.  Rows are ordered
    by mask value.
    """
    vary = tuple(vary)
    if len(vary) > SUBCLASS_VARY_LIMIT:
        raise ContractViolation(f"at most {SUBCLASS_VARY_LIMIT} parameters can vary")
    name_map = g.param_name_map()
    for name in vary:
        if name not in name_map:
            raise ContractViolation(f"unknown parameter {name!r}")
    rows = []
    n = len(vary)
    for mask in range(1 << n):
        bits = format(mask, f"0{n}b") if n else ""
        zeroed = [vary[i] for i in range(n) if bits[i] == "0"]
        report = count_invariants(g.zeroed(zeroed), seed=seed)
        rows.append((bits, report.raw_count, report.independent_count))
    return SubclassTable(vary, tuple(rows))


def monotonicity_check(g: Glom, extra_zeros: Sequence[str], seed: int = 0) -> bool:
    """Setting more parameters to zero can only keep or grow the raw count."""
    generic_names = set(g.generic_param_names())
    stray = set(extra_zeros) - generic_names
    if stray:
        raise ContractViolation(f"parameters not currently generic: {sorted(stray)}")
    base = count_invariants(g, seed=seed).raw_count
    specialized = count_invariants(g.zeroed(extra_zeros), seed=seed).raw_count
    return specialized >= base


def verify_conserved(g: Glom, form: QuadraticForm) -> bool:
    """Symbolic check that dC/dt vanishes identically along the field."""
    return form.time_derivative(assemble_field(g)).is_zero()
