"""Non-canonical Hamiltonian analysis: the skew matrix J, the Jacobi
condition, and Casimirs from the nullspace of J.

With H = (1/2) sum x_i^2 the vector field is recovered as dx/dt = J x,
where J superposes one skew block per gyrostat.  Each block embeds

    [[0, -c, p*x_{m2} + b], [c, 0, q*x_{m1} - a], [skew]]

at the gyrostat's mode triple; the energy constraint eliminates r.

Two Jacobi residual notions are computed.  The per-triple cyclic sums

    R_ijk = sum_m [J_im dJ_jk/dx_m + J_jm dJ_ki/dx_m + J_km dJ_ij/dx_m]

are the exact Poisson-bracket condition.  Their signed total over all
triples (the contraction with the alternating symbol, halved) is the
aggregate criterion used throughout the gyrostat-superposition analysis
and by the hierarchy machinery; it is weaker for M > 3.  Reports carry
both, and flag the models where the aggregate vanishes while some triple
residual does not.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import ContractViolation, EnergyViolation
from .exactmath import Poly, PolyMatrix, VarTable, nullspace_symbolic
from .invariants import QuadraticForm
from .models import Glom, Gyrostat, assemble_field, check_energy


@dataclass(frozen=True)
class SkewPolyMatrix:
    """M x M skew matrix whose entries are affine in the state variables."""

    matrix: PolyMatrix

    def __post_init__(self):
        m = self.matrix
        if m.rows != m.cols:
            raise ContractViolation("J must be square")
        for i in range(m.rows):
            for j in range(m.rows):
                if not (m[i, j] + m[j, i]).is_zero():
                    raise ContractViolation("J must be skew-symmetric")
                if m[i, j].state_degree() > 1:
                    raise ContractViolation("J entries must be affine in the state")

    @property
    def size(self) -> int:
        return self.matrix.rows

    @property
    def table(self) -> VarTable:
        return self.matrix.table


def gyrostat_block(table: VarTable, gyro: Gyrostat, size: int) -> PolyMatrix:
    """The single-gyrostat contribution to J, embedded at its mode triple."""
    m1, m2, m3 = gyro.modes
    a = gyro.a.to_poly(table)
    b = gyro.b.to_poly(table)
    c = gyro.c.to_poly(table)
    p = gyro.p.to_poly(table)
    q = gyro.q.to_poly(table)
    upper = p * table.x(m2) + b
    lower = q * table.x(m1) - a
    entries = [[table.zero() for _ in range(size)] for _ in range(size)]
    entries[m1 - 1][m2 - 1] = -c
    entries[m2 - 1][m1 - 1] = c
    entries[m1 - 1][m3 - 1] = upper
    entries[m3 - 1][m1 - 1] = -upper
    entries[m2 - 1][m3 - 1] = lower
    entries[m3 - 1][m2 - 1] = -lower
    return PolyMatrix(table, entries)


def build_J(g: Glom) -> SkewPolyMatrix:
    """Superpose the per-gyrostat blocks; refuses energy-violating models."""
    report = check_energy(g)
    if not report.ok:
        raise EnergyViolation("; ".join(report.diagnostics))
    table = g.var_table
    total = PolyMatrix.zero(table, g.modes, g.modes)
    for gyro in g.gyrostats:
        total = total.add(gyrostat_block(table, gyro, g.modes))
    jx = total.mul_vector([table.x(i) for i in range(1, g.modes + 1)])
    field = assemble_field(g)
    for got, want in zip(jx, field.components):
        if got != want:
            raise ContractViolation("internal error: J*x does not reproduce the field")
    return SkewPolyMatrix(total)


def triple_residual(a: PolyMatrix, b: PolyMatrix, triple: tuple[int, int, int]) -> Poly:
    """sum_m of A against the state-gradient of B, cyclically over the triple.

    For A = B = J this is the per-triple Jacobi residual.
    """
    table = a.table
    M = a.rows
    i, j, k = triple
    acc = table.zero()
    for first, second, third in ((i, j, k), (j, k, i), (k, i, j)):
        entry = b[second, third]
        if entry.is_zero():
            continue
        for m in range(M):
            d = entry.diff(m)
            if d and a[first, m]:
                acc = acc + a[first, m] * d
    return acc


@dataclass(frozen=True)
class JacobiReport:
    """Per-triple residuals plus the aggregate criterion.

    is_hamiltonian reflects the aggregate (signed-sum) condition; a model
    can pass it while failing some individual triple, in which case
    strict_jacobi is False and strict_divergence is True.
    """

    residuals: dict[tuple[int, int, int], Poly]
    aggregate: Poly
    is_hamiltonian: bool
    strict_jacobi: bool
    constraint_polys: tuple[Poly, ...]

    @property
    def strict_divergence(self) -> bool:
        return self.is_hamiltonian and not self.strict_jacobi


def _constraint_polys(poly: Poly) -> tuple[Poly, ...]:
    """State-monomial coefficients, deduplicated up to rational scaling."""
    seen = {}
    for coeff in poly.split_by_state().values():
        if coeff.is_zero():
            continue
        norm = coeff.scale(Fraction(1) / coeff.content())
        if norm.leading_coefficient() < 0:
            norm = -norm
        seen[norm.key()] = norm
    return tuple(seen[k] for k in sorted(seen))


def jacobi(J: SkewPolyMatrix | PolyMatrix) -> JacobiReport:
    m = J.matrix if isinstance(J, SkewPolyMatrix) else J
    M = m.rows
    residuals: dict[tuple[int, int, int], Poly] = {}
    aggregate = m.table.zero()
    for triple in itertools.combinations(range(1, M + 1), 3):
        r = triple_residual(m, m, tuple(t - 1 for t in triple))
        if r:
            residuals[triple] = r
            aggregate = aggregate + r
    return JacobiReport(
        residuals=residuals,
        aggregate=aggregate,
        is_hamiltonian=aggregate.is_zero(),
        strict_jacobi=not residuals,
        constraint_polys=_constraint_polys(aggregate),
    )


# ---------------------------------------------------------------------------
# Casimirs


@dataclass(frozen=True)
class CasimirSet:
    """Nullspace vectors of J, their gradient status, and the potentials.

    Vectors annihilated by J are conserved by skew-symmetry alone, so when
    the Jacobi condition fails the results are still valid conserved
    quantities; `advisory` records that the Hamiltonian interpretation is
    not available.
    """

    nullspace_basis: tuple[tuple[Poly, ...], ...]
    gradient_flags: tuple[bool, ...]
    casimirs: tuple[QuadraticForm, ...]
    advisory: bool
    jacobi_report: JacobiReport

    @property
    def count(self) -> int:
        return len(self.casimirs)

    def gradients(self) -> list[list[Poly]]:
        """Gradients of the reported potentials (the gradient nullspace vectors)."""
        return [list(v) for v, ok in zip(self.nullspace_basis, self.gradient_flags) if ok]


def is_gradient(vector: list[Poly]) -> bool:
    """Jacobian-symmetry test dv_i/dx_j == dv_j/dx_i over the state variables."""
    n = len(vector)
    for i in range(n):
        for j in range(i + 1, n):
            if vector[i].diff(j) != vector[j].diff(i):
                return False
    return True


def potential_of(vector: list[Poly]) -> QuadraticForm:
    """Potential C with grad C = vector, via the homogeneous-degree formula
    C = sum_d 1/(d+1) sum_i x_i v_i^(d)."""
    table = vector[0].table
    M = len(vector)
    acc = table.zero()
    max_deg = max((v.state_degree() for v in vector), default=0)
    for d in range(max_deg + 1):
        part = table.zero()
        for i, v in enumerate(vector, start=1):
            h = v.state_homogeneous_part(d)
            if h:
                part = part + table.x(i) * h
        if part:
            acc = acc + part.scale(Fraction(1, d + 1))
    return _form_from_value(table, M, acc)


def _form_from_value(table: VarTable, M: int, value: Poly) -> QuadraticForm:
    d = [table.zero()] * M
    e = [[table.zero()] * M for _ in range(M)]
    f = [table.zero()] * M
    for state_mono, coeff in value.split_by_state().items():
        nz = [(i, exp) for i, exp in enumerate(state_mono) if exp]
        if not nz:
            raise ContractViolation("potential has a constant term")
        if len(nz) == 1 and nz[0][1] == 1:
            f[nz[0][0]] = f[nz[0][0]] + coeff
        elif len(nz) == 1 and nz[0][1] == 2:
            d[nz[0][0]] = d[nz[0][0]] + coeff.scale(2)
        elif len(nz) == 2 and nz[0][1] == 1 and nz[1][1] == 1:
            i, j = nz[0][0], nz[1][0]
            e[i][j] = e[i][j] + coeff
        else:
            raise ContractViolation("potential is not quadratic")
    return QuadraticForm(table, tuple(d), tuple(tuple(r) for r in e), tuple(f))


def _normalize_form(form: QuadraticForm) -> QuadraticForm:
    """Scale a potential to content 1 with a positive leading coefficient."""
    vec = form.coeff_vector()
    contents = [c.content() for c in vec if c]
    if not contents:
        return form
    num = 0
    den = 1
    for c in contents:
        num = gcd(num, c.numerator)
        den = den * c.denominator // gcd(den, c.denominator)
    scaled = [c.scale(Fraction(den, num)) for c in vec]
    lead = next(c for c in scaled if c)
    if lead.leading_coefficient() < 0:
        scaled = [-c for c in scaled]
    return QuadraticForm.from_coeff_vector(form.table, scaled)


def casimirs(g: Glom) -> CasimirSet:
    """Extract Casimirs from NULL(J): gradient vectors integrate to potentials."""
    J = build_J(g)
    report = jacobi(J)
    basis = nullspace_symbolic(J.matrix)
    flags = tuple(is_gradient(v) for v in basis)
    potentials = tuple(
        _normalize_form(potential_of(v)) for v, ok in zip(basis, flags) if ok
    )
    return CasimirSet(
        nullspace_basis=tuple(tuple(v) for v in basis),
        gradient_flags=flags,
        casimirs=potentials,
        advisory=not report.is_hamiltonian,
        jacobi_report=report,
    )
