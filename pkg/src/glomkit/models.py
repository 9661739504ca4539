"""Coupled Volterra-gyrostat models and their vector fields.

A single gyrostat on modes (m1, m2, m3) contributes the three rows

    dy1/dt = p*y2*y3 + b*y3 - c*y2
    dy2/dt = q*y3*y1 + c*y1 - a*y3
    dy3/dt = r*y1*y2 + a*y2 - b*y1

with the energy constraint p + q + r = 0.  A model couples K gyrostats
over M shared modes; each mode's equation is the sum of the gyrostat rows
mapped onto it.  The r coefficient is stored structurally as -p-q whenever
it is symbolic; explicitly supplied exact triples are validated instead of
silently repaired (see check_energy).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ContractViolation
from .exactmath import Poly, VarTable

SIGN_SYMMETRY_MODE_LIMIT = 24


@dataclass(frozen=True)
class ParamSpec:
    """One gyrostat coefficient: zero, an exact rational, or a (scaled) symbol."""

    coeff: Fraction
    symbol: str | None = None

    @classmethod
    def zero(cls) -> "ParamSpec":
        return cls(Fraction(0))

    @classmethod
    def exact(cls, value) -> "ParamSpec":
        return cls(Fraction(value))

    @classmethod
    def generic(cls, symbol: str | None = None) -> "ParamSpec":
        return cls(Fraction(1), symbol or "?")

    @classmethod
    def scaled(cls, symbol: str, coeff) -> "ParamSpec":
        c = Fraction(coeff)
        return cls(c, symbol if c else None)

    @property
    def is_zero(self) -> bool:
        return self.coeff == 0

    @property
    def is_symbolic(self) -> bool:
        return self.symbol is not None and self.coeff != 0

    def named(self, symbol: str) -> "ParamSpec":
        """Fill in the placeholder symbol name (used at model assembly)."""
        if self.symbol == "?":
            return ParamSpec(self.coeff, symbol)
        return self

    def to_poly(self, table: VarTable) -> Poly:
        if self.is_symbolic:
            return table.var(self.symbol).scale(self.coeff)
        return table.const(self.coeff)

    def __str__(self) -> str:
        if self.is_symbolic:
            if self.coeff == 1:
                return self.symbol
            return f"{self.coeff}*{self.symbol}"
        return str(self.coeff)


@dataclass(frozen=True)
class Gyrostat:
    """Mode triple plus the five stored coefficients (r is derived)."""

    modes: tuple[int, int, int]
    a: ParamSpec
    b: ParamSpec
    c: ParamSpec
    p: ParamSpec
    q: ParamSpec
    # Explicit r is kept only when supplied as an exact value; it may violate
    # p+q+r=0, which check_energy reports and build_J refuses.
    r_explicit: ParamSpec | None = None

    def __post_init__(self):
        m1, m2, m3 = self.modes
        if len({m1, m2, m3}) != 3:
            raise ContractViolation(f"gyrostat modes must be distinct, got {self.modes}")
        if any(m < 1 for m in self.modes):
            raise ContractViolation(f"gyrostat modes must be positive, got {self.modes}")
        if self.r_explicit is not None:
            if self.r_explicit.is_symbolic or self.p.is_symbolic or self.q.is_symbolic:
                raise ContractViolation(
                    "an explicit r is only allowed when p, q and r are all exact"
                )

    def param(self, letter: str) -> ParamSpec:
        return getattr(self, letter)

    def r_poly(self, table: VarTable) -> Poly:
        if self.r_explicit is not None:
            return self.r_explicit.to_poly(table)
        return -(self.p.to_poly(table) + self.q.to_poly(table))

    def energy_ok(self, table: VarTable) -> bool:
        total = self.p.to_poly(table) + self.q.to_poly(table) + self.r_poly(table)
        return total.is_zero()


@dataclass(frozen=True)
class Glom:
    """A coupled-gyrostat model over M modes."""

    modes: int
    gyrostats: tuple[Gyrostat, ...]
    extra_symbols: tuple[str, ...] = ()
    var_table: VarTable = field(init=False, compare=False, repr=False)
    warnings: tuple[str, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.modes < 3:
            raise ContractViolation("a model needs at least 3 modes")
        named = []
        extras: list[str] = list(self.extra_symbols)
        for k, g in enumerate(self.gyrostats, start=1):
            if any(m > self.modes for m in g.modes):
                raise ContractViolation(
                    f"gyrostat {k} references mode outside 1..{self.modes}: {g.modes}"
                )
            fixed = {}
            for letter in ("a", "b", "c", "p", "q"):
                spec = g.param(letter).named(f"{letter}{k}")
                if spec.is_symbolic and spec.symbol not in extras:
                    std = {f"{ltr}{k}" for ltr in ("a", "b", "c", "p", "q", "r")}
                    if spec.symbol not in std:
                        extras.append(spec.symbol)
                fixed[letter] = spec
            named.append(Gyrostat(g.modes, r_explicit=g.r_explicit, **fixed))
        object.__setattr__(self, "gyrostats", tuple(named))
        object.__setattr__(self, "extra_symbols", tuple(extras))
        table = VarTable.for_model(self.modes, len(self.gyrostats), extras)
        object.__setattr__(self, "var_table", table)
        covered = {m for g in self.gyrostats for m in g.modes}
        missing = [m for m in range(1, self.modes + 1) if m not in covered]
        warnings = tuple(f"mode {m} is not referenced by any gyrostat" for m in missing)
        object.__setattr__(self, "warnings", warnings)

    @property
    def K(self) -> int:
        return len(self.gyrostats)

    def param_name_map(self) -> dict[str, tuple[int, str]]:
        """Map standard parameter names like 'b2' to (gyrostat index, letter)."""
        out = {}
        for k in range(1, self.K + 1):
            for letter in ("a", "b", "c", "p", "q"):
                out[f"{letter}{k}"] = (k, letter)
        return out

    def with_params(self, assignments: Mapping[str, ParamSpec]) -> "Glom":
        """Return a copy with the named parameters replaced.

        Keys are standard names like 'q2'; values are ParamSpec replacements
        (Zero for subclass masking, scaled symbols for equality constraints).
        """
        name_map = self.param_name_map()
        per_gyro: dict[int, dict[str, ParamSpec]] = {}
        for name, spec in assignments.items():
            if name not in name_map:
                raise ContractViolation(f"unknown parameter {name!r}")
            k, letter = name_map[name]
            per_gyro.setdefault(k, {})[letter] = spec
        new_gyros = []
        for k, g in enumerate(self.gyrostats, start=1):
            repl = per_gyro.get(k)
            if not repl:
                new_gyros.append(g)
                continue
            kwargs = {letter: repl.get(letter, g.param(letter)) for letter in ("a", "b", "c", "p", "q")}
            new_gyros.append(Gyrostat(g.modes, r_explicit=g.r_explicit, **kwargs))
        return Glom(self.modes, tuple(new_gyros), self.extra_symbols)

    def zeroed(self, names: Iterable[str]) -> "Glom":
        return self.with_params({n: ParamSpec.zero() for n in names})

    def generic_param_names(self) -> list[str]:
        """Standard names of parameters that are (scaled) symbols."""
        out = []
        for k, g in enumerate(self.gyrostats, start=1):
            for letter in ("a", "b", "c", "p", "q"):
                if g.param(letter).is_symbolic:
                    out.append(f"{letter}{k}")
        return out

    def free_symbols(self) -> list[str]:
        """Distinct symbols the coefficients refer to (tied slots share one)."""
        out = set()
        for g in self.gyrostats:
            for letter in ("a", "b", "c", "p", "q"):
                spec = g.param(letter)
                if spec.is_symbolic:
                    out.add(spec.symbol)
        return sorted(out)


@dataclass(frozen=True)
class VectorField:
    """The M polynomial components of dx/dt."""

    table: VarTable
    components: tuple[Poly, ...]

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> Poly:
        return self.components[i]

    def energy_derivative(self) -> Poly:
        """d/dt of (1/2) sum x_i^2 along the field."""
        acc = self.table.zero()
        for i, comp in enumerate(self.components, start=1):
            acc = acc + self.table.x(i) * comp
        return acc

    def divergence(self) -> Poly:
        acc = self.table.zero()
        for i, comp in enumerate(self.components):
            acc = acc + comp.diff(i)
        return acc


@dataclass(frozen=True)
class SignSymmetry:
    """A diagonal +/-1 state transformation preserving the vector field."""

    signs: tuple[int, ...]

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ContractViolation("signs must be +1 or -1")

    @property
    def is_identity(self) -> bool:
        return all(s == 1 for s in self.signs)

    def compose(self, other: "SignSymmetry") -> "SignSymmetry":
        return SignSymmetry(tuple(a * b for a, b in zip(self.signs, other.signs)))


def apply_signs(poly: Poly, signs: Sequence[int]) -> Poly:
    """Substitute x_i -> s_i * x_i for the state variables."""
    M = poly.table.state_count
    out = {}
    for m, c in poly.terms.items():
        flip = 1
        for i in range(M):
            if m[i] % 2 and signs[i] < 0:
                flip = -flip
        out[m] = c if flip > 0 else -c
    return Poly(poly.table, out)


def assemble_field(g: Glom) -> VectorField:
    """Superpose the gyrostat rows into the M mode equations."""
    table = g.var_table
    comps = [table.zero() for _ in range(g.modes)]
    for gyro in g.gyrostats:
        m1, m2, m3 = gyro.modes
        x1, x2, x3 = table.x(m1), table.x(m2), table.x(m3)
        a = gyro.a.to_poly(table)
        b = gyro.b.to_poly(table)
        c = gyro.c.to_poly(table)
        p = gyro.p.to_poly(table)
        q = gyro.q.to_poly(table)
        r = gyro.r_poly(table)
        comps[m1 - 1] = comps[m1 - 1] + p * x2 * x3 + b * x3 - c * x2
        comps[m2 - 1] = comps[m2 - 1] + q * x3 * x1 + c * x1 - a * x3
        comps[m3 - 1] = comps[m3 - 1] + r * x1 * x2 + a * x2 - b * x1
    return VectorField(table, tuple(comps))


@dataclass(frozen=True)
class EnergyReport:
    ok: bool
    diagnostics: tuple[str, ...]


def check_energy(g: Glom) -> EnergyReport:
    """Verify p+q+r = 0 per gyrostat and that the field conserves (1/2) sum x_i^2."""
    table = g.var_table
    diagnostics = []
    for k, gyro in enumerate(g.gyrostats, start=1):
        if not gyro.energy_ok(table):
            diagnostics.append(f"gyrostat {k}: p + q + r != 0")
    deriv = assemble_field(g).energy_derivative()
    if not deriv.is_zero():
        diagnostics.append("d/dt of the energy is not identically zero")
    return EnergyReport(not diagnostics, tuple(diagnostics))


def find_sign_symmetries(g: Glom) -> list[SignSymmetry]:
    """All nontrivial sign vectors s with f(Sx) = S f(x) as polynomial identities.

    The condition is linear over GF(2) in the exponent parities, so the 2^M
    search space is cut down by solving that system first; every candidate is
    then verified against the field directly.
    """
    if g.modes > SIGN_SYMMETRY_MODE_LIMIT:
        raise ContractViolation(
            f"sign-symmetry enumeration is limited to {SIGN_SYMMETRY_MODE_LIMIT} modes"
        )
    M = g.modes
    field = assemble_field(g)
    # Each monomial in component i yields the GF(2) equation
    # sum_j exp_j * sigma_j + sigma_i = 0 over sign bits sigma.
    equations: set[int] = set()
    for i, comp in enumerate(field.components):
        for mono in comp.terms:
            bits = 1 << i
            for j in range(M):
                if mono[j] % 2:
                    bits ^= 1 << j
            if bits:
                equations.add(bits)
    basis = _gf2_nullspace(sorted(equations), M)
    symmetries = []
    for combo in range(1, 1 << len(basis)):
        vec = 0
        for t, b in enumerate(basis):
            if combo >> t & 1:
                vec ^= b
        if vec == 0:
            continue
        signs = tuple(-1 if vec >> j & 1 else 1 for j in range(M))
        if _is_symmetry(field, signs):
            symmetries.append(SignSymmetry(signs))
    symmetries.sort(key=lambda s: s.signs)
    return symmetries


def _is_symmetry(field: VectorField, signs: Sequence[int]) -> bool:
    for i, comp in enumerate(field.components):
        lhs = apply_signs(comp, signs)
        rhs = comp if signs[i] > 0 else -comp
        if lhs != rhs:
            return False
    return True


def _gf2_nullspace(equations: list[int], n_bits: int) -> list[int]:
    """Nullspace basis of a GF(2) system given as row bitmasks."""
    rows = list(equations)
    pivots: dict[int, int] = {}
    for row in rows:
        cur = row
        for col in range(n_bits):
            if not cur >> col & 1:
                continue
            if col in pivots:
                cur ^= pivots[col]
            else:
                pivots[col] = cur
                break
    basis = []
    free = [c for c in range(n_bits) if c not in pivots]
    for fc in free:
        vec = 1 << fc
        for col in sorted(pivots, reverse=True):
            row = pivots[col]
            parity = (row & vec).bit_count() & 1
            if parity:
                vec ^= 1 << col
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# built-in models


def _generic_gyrostat(modes: tuple[int, int, int], **overrides: ParamSpec) -> Gyrostat:
    params = {letter: ParamSpec.generic() for letter in ("a", "b", "c", "p", "q")}
    params.update(overrides)
    return Gyrostat(modes, **params)


MODEL4_TRIPLES = ((1, 2, 3), (1, 4, 5), (1, 6, 7))
MODEL5_TRIPLES = ((1, 2, 3), (1, 4, 5), (6, 7, 8), (3, 4, 7), (2, 5, 7))


def sparse_triples(K: int) -> tuple[tuple[int, int, int], ...]:
    return tuple((2 * k - 1, 2 * k, 2 * k + 1) for k in range(1, K + 1))


def dense_triples(K: int) -> tuple[tuple[int, int, int], ...]:
    return tuple((k, k + 1, k + 2) for k in range(1, K + 1))


def builtin_model(name: str, K: int | None = None) -> Glom:
    """Construct one of the bundled parametric models.

    Names: model1, model2, model3, model4, model5, euler, sparse, dense,
    model5_numeric.  sparse/dense require K >= 1.  All parameters are
    generic symbols except where the variant fixes them.
    """
    if name == "model1":
        return Glom(4, (_generic_gyrostat((1, 2, 3)), _generic_gyrostat((2, 3, 4))))
    if name == "model2":
        return Glom(5, (_generic_gyrostat((1, 2, 3)), _generic_gyrostat((3, 4, 5))))
    if name == "model3":
        return Glom(
            5,
            (
                _generic_gyrostat((1, 2, 3)),
                _generic_gyrostat((3, 4, 5)),
                _generic_gyrostat((1, 2, 4)),
            ),
        )
    if name == "model4":
        return Glom(7, tuple(_generic_gyrostat(t) for t in MODEL4_TRIPLES))
    if name == "model5":
        return Glom(8, tuple(_generic_gyrostat(t) for t in MODEL5_TRIPLES))
    if name == "model5_numeric":
        return model5_numeric()
    if name == "euler":
        zero = ParamSpec.zero()
        return Glom(3, (_generic_gyrostat((1, 2, 3), a=zero, b=zero, c=zero),))
    if name == "sparse":
        if K is None or K < 1:
            raise ContractViolation("sparse models need K >= 1")
        return Glom(2 * K + 1, tuple(_generic_gyrostat(t) for t in sparse_triples(K)))
    if name == "dense":
        if K is None or K < 1:
            raise ContractViolation("dense models need K >= 1")
        return Glom(K + 2, tuple(_generic_gyrostat(t) for t in dense_triples(K)))
    raise ContractViolation(f"unknown built-in model {name!r}")


def model5_numeric() -> Glom:
    """The 8-mode convection instance of model5: rational coefficients with
    one free symbol beta scaling the third gyrostat."""
    zero = ParamSpec.zero()
    one = ParamSpec.exact(1)
    g1 = Gyrostat((1, 2, 3), a=one, b=zero, c=zero, p=ParamSpec.exact(-1), q=one)
    g2 = Gyrostat((1, 4, 5), a=one, b=zero, c=zero, p=ParamSpec.exact(-1), q=one)
    g3 = Gyrostat(
        (6, 7, 8),
        a=ParamSpec.scaled("beta", 1),
        b=zero,
        c=zero,
        p=ParamSpec.scaled("beta", -2),
        q=ParamSpec.scaled("beta", 2),
    )
    g4 = Gyrostat((3, 4, 7), a=zero, b=zero, c=zero, p=zero, q=ParamSpec.exact(Fraction(-1, 2)))
    g5 = Gyrostat((2, 5, 7), a=zero, b=zero, c=zero, p=ParamSpec.exact(Fraction(-1, 2)), q=zero)
    return Glom(8, (g1, g2, g3, g4, g5), extra_symbols=("beta",))


def no_linear_feedback(g: Glom) -> Glom:
    """Zero every linear coefficient (a, b, c) of every gyrostat."""
    zero = ParamSpec.zero()
    assignments = {}
    for k in range(1, g.K + 1):
        for letter in ("a", "b", "c"):
            assignments[f"{letter}{k}"] = zero
    return g.with_params(assignments)


def instantiate(g: Glom, values: Mapping[str, Fraction]) -> Glom:
    """Replace every symbolic coefficient by the exact value of its symbol.

    Tied slots (e.g. two coefficients sharing one symbol) stay consistent
    because substitution happens per symbol, not per slot.
    """
    assignments = {}
    for k, gyro in enumerate(g.gyrostats, start=1):
        for letter in ("a", "b", "c", "p", "q"):
            spec = gyro.param(letter)
            if spec.is_symbolic:
                if spec.symbol not in values:
                    raise ContractViolation(f"no value for symbol {spec.symbol!r}")
                assignments[f"{letter}{k}"] = ParamSpec.exact(spec.coeff * values[spec.symbol])
    return g.with_params(assignments)
