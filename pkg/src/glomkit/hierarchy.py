"""Hamiltonian model hierarchies: nested (sparse/dense) and coupled families.

Nested families grow by one gyrostat per step, adding two modes (sparse,
triples (2k-1, 2k, 2k+1)) or one mode (dense, triples (k, k+1, k+2)).
Coupled families reuse existing modes (the two convection-core models).

Each family carries the parameter constraints under which every member
satisfies the Jacobi condition:

  sparse   q_k = 0 for k >= 2
  dense1   q_k = 0 for k >= 2; p and b zero on even-numbered gyrostats
  dense2   q_k = 0 for k >= 2; p and b zero on odd-numbered gyrostats
  model4   p_k = q_k = 0 and c_k = b_k for k >= 2
  model5   q1 = q2 = 0; p3 = 0; q4 = 0, b4 = a4, c4 = -a4, c2 = -a2,
           b1 = a1; p5 = 0, b5 = c5 = a5, b2 = -a2, c1 = a1

The model5 schedule constrains earlier gyrostats when later ones arrive,
so members are materialized with the whole schedule (restricted to the
gyrostats present); that is the parameterization whose Casimir gradients
project consistently down the hierarchy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal

from .errors import ContractViolation
from .exactmath import Poly, PolyMatrix, poly_proportional, proportional
from .hamiltonian import (
    CasimirSet,
    JacobiReport,
    build_J,
    casimirs,
    gyrostat_block,
    jacobi,
    triple_residual,
)
from .models import (
    MODEL4_TRIPLES,
    MODEL5_TRIPLES,
    Glom,
    Gyrostat,
    ParamSpec,
    dense_triples,
    sparse_triples,
)

Family = Literal["sparse", "dense1", "dense2", "model4", "model5"]

FAMILY_MAX_K = {"model4": 3, "model5": 5}
FAMILY_STRIDE = {"sparse": 2, "dense1": 1, "dense2": 1, "model4": 2, "model5": 0}


@dataclass(frozen=True)
class HierarchySpec:
    family: Family
    k_max: int
    constrained: bool = True

    def __post_init__(self):
        if self.k_max < 1:
            raise ContractViolation("k_max must be at least 1")
        cap = FAMILY_MAX_K.get(self.family)
        if cap is not None and self.k_max > cap:
            raise ContractViolation(f"family {self.family} has at most {cap} gyrostats")
        if self.family not in FAMILY_STRIDE:
            raise ContractViolation(f"unknown family {self.family!r}")


def family_triples(family: Family, K: int) -> tuple[tuple[int, int, int], ...]:
    if family == "sparse":
        return sparse_triples(K)
    if family in ("dense1", "dense2"):
        return dense_triples(K)
    if family == "model4":
        return MODEL4_TRIPLES[:K]
    if family == "model5":
        return MODEL5_TRIPLES[:K]
    raise ContractViolation(f"unknown family {family!r}")


def family_constraints(family: Family, K: int) -> dict[str, ParamSpec]:
    """The parameter substitutions applied to the K-gyrostat member."""
    zero = ParamSpec.zero()
    out: dict[str, ParamSpec] = {}
    if family == "sparse":
        for k in range(2, K + 1):
            out[f"q{k}"] = zero
    elif family in ("dense1", "dense2"):
        for k in range(2, K + 1):
            out[f"q{k}"] = zero
        parity = 0 if family == "dense1" else 1
        for k in range(1, K + 1):
            if k % 2 == parity:
                out[f"p{k}"] = zero
                out[f"b{k}"] = zero
    elif family == "model4":
        for k in range(2, K + 1):
            out[f"p{k}"] = zero
            out[f"q{k}"] = zero
            out[f"c{k}"] = ParamSpec.scaled(f"b{k}", 1)
    elif family == "model5":
        schedule = {
            "q1": zero,
            "q2": zero,
            "p3": zero,
            "q4": zero,
            "b4": ParamSpec.scaled("a4", 1),
            "c4": ParamSpec.scaled("a4", -1),
            "c2": ParamSpec.scaled("a2", -1),
            "b1": ParamSpec.scaled("a1", 1),
            "p5": zero,
            "b5": ParamSpec.scaled("a5", 1),
            "c5": ParamSpec.scaled("a5", 1),
            "b2": ParamSpec.scaled("a2", -1),
            "c1": ParamSpec.scaled("a1", 1),
        }
        out = {name: spec for name, spec in schedule.items() if int(name[1:]) <= K}
    else:
        raise ContractViolation(f"unknown family {family!r}")
    return out


def member(family: Family, K: int, constrained: bool = True) -> Glom:
    """The K-gyrostat member of a family."""
    triples = family_triples(family, K)
    modes = max(m for t in triples for m in t)
    base = Glom(modes, tuple(Gyrostat(t, *(ParamSpec.generic() for _ in range(5))) for t in triples))
    if not constrained:
        return base
    return base.with_params(family_constraints(family, K))


def generate(spec: HierarchySpec) -> list[Glom]:
    """Members K = 1..k_max of the family."""
    return [member(spec.family, K, spec.constrained) for K in range(1, spec.k_max + 1)]


# ---------------------------------------------------------------------------
# incremental Jacobi conditions


@dataclass(frozen=True)
class IncrementalJacobi:
    """Cross terms of the newest gyrostat against the earlier ones.

    `triples` maps each index triple to its nonzero cross-term cyclic sum;
    `condition` is their signed total, the quantity whose vanishing is the
    printed incremental requirement at each hierarchy step.
    """

    triples: dict[tuple[int, int, int], Poly]
    condition: Poly

    def conditions(self) -> list[Poly]:
        return list(self.triples.values())


def _is_extension(g_big: Glom, g_small: Glom) -> bool:
    if g_big.K != g_small.K + 1 or g_big.modes < g_small.modes:
        return False
    for a, b in zip(g_big.gyrostats[:-1], g_small.gyrostats):
        if a.modes != b.modes:
            return False
        for letter in ("a", "b", "c", "p", "q"):
            if a.param(letter) != b.param(letter):
                return False
    return True


def incremental_jacobi(g_K: Glom, g_K_minus_1: Glom) -> IncrementalJacobi:
    """Jacobi cross terms introduced by the newest gyrostat.

    Equals the difference of the full per-triple residuals of the two
    members (single-gyrostat self terms vanish identically); this identity
    is checked internally.
    """
    if not _is_extension(g_K, g_K_minus_1):
        raise ContractViolation("second model must be the first minus its last gyrostat")
    table = g_K.var_table
    M = g_K.modes
    blocks = [gyrostat_block(table, gyro, M) for gyro in g_K.gyrostats]
    j_prev = PolyMatrix.zero(table, M, M)
    for b in blocks[:-1]:
        j_prev = j_prev.add(b)
    j_new = blocks[-1]
    j_full = j_prev.add(j_new)
    cross: dict[tuple[int, int, int], Poly] = {}
    condition = table.zero()
    for triple in itertools.combinations(range(M), 3):
        t = triple_residual(j_prev, j_new, triple) + triple_residual(j_new, j_prev, triple)
        full = triple_residual(j_full, j_full, triple)
        prev = triple_residual(j_prev, j_prev, triple)
        if t != full - prev:
            raise ContractViolation("internal error: cross terms do not telescope")
        if t:
            cross[tuple(i + 1 for i in triple)] = t
            condition = condition + t
    return IncrementalJacobi(cross, condition)


def incremental_condition(family: Family, K: int, constrained: bool = False) -> Poly:
    """The aggregate incremental condition at step K of a family (K >= 2)."""
    if K < 2:
        raise ContractViolation("incremental conditions start at K = 2")
    return incremental_jacobi(
        member(family, K, constrained), member(family, K - 1, constrained)
    ).condition


def check_recurrence(family: Family, k_max: int) -> bool:
    """Do successive incremental conditions repeat under the family's shift?

    The shift renames gyrostat k to k+1 and moves modes up by the family's
    stride.  Consecutive steps are compared from K = 3 on (the step from
    one to two gyrostats has no earlier coupling and its condition has a
    different shape even in the nested families).  Conditions are computed
    on the unconstrained family, where they are nontrivial.
    """
    if k_max < 3:
        raise ContractViolation("recurrence checking needs k_max >= 3")
    stride = FAMILY_STRIDE[family]
    conditions = {K: incremental_condition(family, K) for K in range(2, k_max + 1)}
    for K in range(3, k_max):
        cur = conditions[K]
        nxt = conditions[K + 1]
        big = member(family, K + 1).var_table
        name_map = _shift_name_map(cur, stride)
        try:
            shifted = cur.remapped(big, name_map)
        except ContractViolation:
            return False
        if not poly_proportional(shifted, nxt):
            return False
    return True


def _shift_name_map(poly: Poly, stride: int) -> dict[str, str]:
    table = poly.table
    out = {}
    for i in sorted(poly.variables()):
        name = table.names[i]
        kind, index = name[0], int(name[1:])
        if kind == "x":
            out[name] = f"x{index + stride}"
        else:
            out[name] = f"{kind}{index + 1}"
    return out


# ---------------------------------------------------------------------------
# projection consistency and the full report


def projection_consistency(
    casimir_big: list[Poly],
    casimir_small: list[Poly],
    absent_params: set[str] | frozenset[str] = frozenset(),
) -> bool:
    """Is the big gradient, restricted to the small model's modes with the
    absent parameters zeroed, collinear with the small gradient?"""
    m_small = len(casimir_small)
    if m_small > len(casimir_big):
        raise ContractViolation("first vector must belong to the larger model")
    zeros = {name: 0 for name in absent_params}
    big_table = casimir_big[0].table
    restricted = [v.subs(zeros) if zeros else v for v in casimir_big[:m_small]]
    for v in restricted:
        if any(i < big_table.state_count and big_table.names[i] not in
               {f"x{j}" for j in range(1, m_small + 1)} for i in v.variables()):
            return False
    lifted = [v.remapped(big_table) for v in casimir_small]
    return proportional(restricted, lifted)


@dataclass(frozen=True)
class MemberReport:
    K: int
    modes: int
    jacobi: JacobiReport
    casimir_set: CasimirSet
    incremental: IncrementalJacobi | None
    projection_consistent: bool | None

    @property
    def casimir_count(self) -> int:
        return self.casimir_set.count


@dataclass(frozen=True)
class HierarchyReport:
    spec: HierarchySpec
    members: tuple[MemberReport, ...]

    def casimir_counts(self) -> list[int]:
        return [m.casimir_count for m in self.members]

    def all_hamiltonian(self) -> bool:
        return all(m.jacobi.is_hamiltonian for m in self.members)


def _projection_zero_set(slice_polys: list[Poly], absent: set[str]) -> set[str]:
    """The absent parameters worth zeroing before the collinearity test.

    An absent parameter that occurs in every nonzero component is a scalar
    prefactor (collinearity over the fraction field absorbs it); one that
    occurs in only some components genuinely obstructs collinearity and is
    the kind the projection rule sets to zero.
    """
    per_comp = [
        {v.table.names[i] for i in v.variables()} & absent for v in slice_polys if v
    ]
    if not per_comp:
        return set()
    everywhere = set.intersection(*per_comp)
    somewhere = set.union(*per_comp)
    return somewhere - everywhere


def _projects_onto(big: list[Poly], small: list[Poly], absent: set[str]) -> bool:
    if projection_consistency(big, small, frozenset()):
        return True
    zeros = _projection_zero_set(big[: len(small)], absent)
    return bool(zeros) and projection_consistency(big, small, zeros)


def hierarchy_report(spec: HierarchySpec) -> HierarchyReport:
    """Jacobi status, Casimirs, incremental conditions and projection
    consistency for every member of the family.

    Projection consistency compares each member with the latest earlier
    member owning Casimirs: every earlier gradient must be collinear with
    the restriction of some current gradient (zeroing the absent non-factor
    parameters where the plain restriction is not already collinear).
    """
    gloms = generate(spec)
    reports: list[MemberReport] = []
    last_with_casimirs: MemberReport | None = None
    last_glom_with_casimirs: Glom | None = None
    for K, g in enumerate(gloms, start=1):
        jac = jacobi(build_J(g))
        cas = casimirs(g)
        inc = incremental_jacobi(g, gloms[K - 2]) if K >= 2 else None
        consistent: bool | None = None
        if cas.count and last_with_casimirs is not None:
            small_params = set(last_glom_with_casimirs.var_table.param_names())
            absent = set(g.var_table.param_names()) - small_params
            consistent = all(
                any(_projects_onto(list(big), list(small), absent) for big in cas.gradients())
                for small in last_with_casimirs.casimir_set.gradients()
            )
        report = MemberReport(K, g.modes, jac, cas, inc, consistent)
        reports.append(report)
        if cas.count:
            last_with_casimirs = report
            last_glom_with_casimirs = g
    return HierarchyReport(spec, tuple(reports))
