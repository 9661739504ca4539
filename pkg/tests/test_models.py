import pytest

from glomkit.errors import ContractViolation
from glomkit.models import (
    Glom,
    Gyrostat,
    ParamSpec,
    apply_signs,
    assemble_field,
    builtin_model,
    check_energy,
    find_sign_symmetries,
    no_linear_feedback,
)

from helpers import parse_vector

MODEL1_COMPONENTS = [
    "p1*x2*x3 + b1*x3 - c1*x2",
    "q1*x3*x1 + c1*x1 - a1*x3 + p2*x3*x4 + b2*x4 - c2*x3",
    "-(p1+q1)*x1*x2 + a1*x2 - b1*x1 + q2*x4*x2 + c2*x2 - a2*x4",
    "-(p2+q2)*x2*x3 + a2*x3 - b2*x2",
]

SINGLE_COMPONENTS = [
    "p1*x2*x3 + b1*x3 - c1*x2",
    "q1*x3*x1 + c1*x1 - a1*x3",
    "-(p1+q1)*x1*x2 + a1*x2 - b1*x1",
]


def test_model1_field_components():
    g = builtin_model("model1")
    field = assemble_field(g)
    expected = parse_vector(g.var_table, MODEL1_COMPONENTS)
    assert list(field.components) == expected


def test_single_gyrostat_field():
    g = builtin_model("sparse", 1)
    field = assemble_field(g)
    assert list(field.components) == parse_vector(g.var_table, SINGLE_COMPONENTS)


def test_all_zero_params_gives_zero_field():
    zero = ParamSpec.zero()
    g = Glom(3, (Gyrostat((1, 2, 3), a=zero, b=zero, c=zero, p=zero, q=zero),))
    assert all(c.is_zero() for c in assemble_field(g).components)


def test_field_linear_in_gyrostats():
    g = builtin_model("model3")
    field = assemble_field(g)
    table = g.var_table
    parts = [
        assemble_field(Glom(g.modes, (gyro,), g.extra_symbols)) for gyro in g.gyrostats
    ]
    for i in range(g.modes):
        total = table.zero()
        for k, part in enumerate(parts):
            # single-gyrostat sub-models use gyrostat index 1; remap to k+1
            remap = {f"{letter}1": f"{letter}{k + 1}" for letter in "abcpqr"}
            total = total + part.components[i].remapped(table, remap)
        assert total == field.components[i]


def test_quadratic_part_is_divergence_free():
    for name in ("model1", "model2", "model3", "model4", "model5"):
        field = assemble_field(builtin_model(name))
        assert field.divergence().is_zero()


def test_components_are_at_most_quadratic_in_state():
    for name in ("model1", "model2", "model3", "model4", "model5"):
        field = assemble_field(builtin_model(name))
        assert all(c.state_degree() <= 2 for c in field.components)


def test_check_energy_model2():
    assert check_energy(builtin_model("model2")).ok


def test_check_energy_violating_exact_triple():
    one = ParamSpec.exact(1)
    g = Glom(3, (Gyrostat((1, 2, 3), a=one, b=one, c=one, p=one, q=one, r_explicit=one),))
    report = check_energy(g)
    assert not report.ok
    assert any("gyrostat 1" in msg for msg in report.diagnostics)


def test_energy_derivative_vanishes_for_builtins():
    for name in ("model1", "model2", "model3", "model4", "model5", "euler"):
        g = builtin_model(name)
        assert assemble_field(g).energy_derivative().is_zero()
    assert assemble_field(builtin_model("model5_numeric")).energy_derivative().is_zero()


def test_builtin_model3_structure():
    g = builtin_model("model3")
    assert g.modes == 5 and g.K == 3
    assert [gyro.modes for gyro in g.gyrostats] == [(1, 2, 3), (3, 4, 5), (1, 2, 4)]


def test_builtin_sparse_and_dense_triples():
    sparse = builtin_model("sparse", 3)
    assert sparse.modes == 7
    assert [gyro.modes for gyro in sparse.gyrostats] == [(1, 2, 3), (3, 4, 5), (5, 6, 7)]
    dense = builtin_model("dense", 3)
    assert dense.modes == 5
    assert [gyro.modes for gyro in dense.gyrostats] == [(1, 2, 3), (2, 3, 4), (3, 4, 5)]
    assert builtin_model("sparse", 1).modes == 3


def test_builtin_model4_model5_triples():
    assert [g.modes for g in builtin_model("model4").gyrostats] == [(1, 2, 3), (1, 4, 5), (1, 6, 7)]
    assert [g.modes for g in builtin_model("model5").gyrostats] == [
        (1, 2, 3), (1, 4, 5), (6, 7, 8), (3, 4, 7), (2, 5, 7),
    ]


def test_unknown_builtin_rejected():
    with pytest.raises(ContractViolation):
        builtin_model("model99")


MODEL5_NUMERIC_COMPONENTS = [
    "-x2*x3 - x4*x5",
    "x3*x1 - x3 - 1/2*x5*x7",
    "x2",
    "x5*x1 - x5 - 1/2*x3*x7",
    "x4",
    "-2*beta*x7*x8",
    "2*beta*x8*x6 - beta*x8 + 1/2*x3*x4 + 1/2*x5*x2",
    "beta*x7",
]


def test_model5_numeric_reproduces_convection_core():
    g = builtin_model("model5_numeric")
    field = assemble_field(g)
    expected = parse_vector(g.var_table, MODEL5_NUMERIC_COMPONENTS)
    assert list(field.components) == expected
    assert check_energy(g).ok


def test_unreferenced_mode_warns_not_errors():
    g = Glom(4, (Gyrostat((1, 2, 3), *(ParamSpec.generic() for _ in range(5))),))
    assert any("mode 4" in w for w in g.warnings)


# ---------------------------------------------------------------------------
# sign symmetries


def test_euler_has_exactly_three_symmetries():
    syms = find_sign_symmetries(builtin_model("euler"))
    assert sorted(s.signs for s in syms) == [(-1, -1, 1), (-1, 1, -1), (1, -1, -1)]


def test_feedback_free_model2_has_seven_symmetries():
    g = no_linear_feedback(builtin_model("model2"))
    syms = find_sign_symmetries(g)
    assert len(syms) == 7
    expected = {
        (-1, -1, 1, -1, -1),
        (-1, -1, 1, 1, 1),
        (-1, 1, -1, -1, 1),
        (-1, 1, -1, 1, -1),
        (1, -1, -1, -1, 1),
        (1, -1, -1, 1, -1),
        (1, 1, 1, -1, -1),
    }
    assert {s.signs for s in syms} == expected


def test_model1_generic_has_no_symmetries():
    assert find_sign_symmetries(builtin_model("model1")) == []


def test_symmetries_match_brute_force():
    g = no_linear_feedback(builtin_model("model1"))
    field = assemble_field(g)
    brute = []
    for mask in range(1, 1 << 4):
        signs = tuple(-1 if mask >> i & 1 else 1 for i in range(4))
        ok = all(
            apply_signs(comp, signs) == (comp if signs[i] > 0 else -comp)
            for i, comp in enumerate(field.components)
        )
        if ok:
            brute.append(signs)
    assert sorted(brute) == sorted(s.signs for s in find_sign_symmetries(g))


def test_symmetries_form_a_group():
    g = no_linear_feedback(builtin_model("model2"))
    syms = find_sign_symmetries(g)
    members = {s.signs for s in syms} | {(1,) * 5}
    for a in syms:
        for b in syms:
            assert a.compose(b).signs in members
