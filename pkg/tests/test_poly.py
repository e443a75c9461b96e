import numpy as np
import pytest

from hvsolve.errors import ProblemSyntaxError
from hvsolve.poly import (evaluate, format_system, hide_variable, parse_system,
                          reassemble, reassemble_exponent)

SYS_A_TEXT = "vars: x y; f1: c1*x^2+c2*y^2+c3; f2: c4*x*y+c5"


def test_parse_sys_a():
    system = parse_system(SYS_A_TEXT)
    assert system.n == 2 and system.m == 2
    assert [s.name for s in system.slots()] == ["c1", "c2", "c3", "c4", "c5"]
    assert system.polys[0].terms[(2, 0)].name == "c1"
    assert system.polys[1].terms[(1, 1)].name == "c4"


def test_parse_overdetermined_accepted():
    system = parse_system("vars: x y; f1: a1*x+a2; f2: a3*y+a4; f3: a5*x*y+a6")
    assert system.m == 3 and system.n == 2


def test_parse_rejects_unused_variable():
    with pytest.raises(ProblemSyntaxError):
        parse_system("vars: x; f1: c1")


def test_parse_rejects_unknown_variable():
    with pytest.raises(ProblemSyntaxError) as err:
        parse_system("vars: x\nf1: c1*z + c2*x")
    assert err.value.line == 2


def test_parse_rejects_duplicate_slot():
    with pytest.raises(ProblemSyntaxError, match="duplicate slot"):
        parse_system("vars: x y; f1: c1*x+c2*y; f2: c1*x*y+c3")


def test_parse_rejects_duplicate_monomial():
    with pytest.raises(ProblemSyntaxError, match="duplicate monomial"):
        parse_system("vars: x y; f1: c1*x+c2*x+c3*y")


def test_parse_rejects_underdetermined():
    with pytest.raises(ProblemSyntaxError):
        parse_system("vars: x y; f1: c1*x*y+c2")


def test_parse_rejects_missing_colon_and_empty_vars():
    with pytest.raises(ProblemSyntaxError):
        parse_system("vars x y")
    with pytest.raises(ProblemSyntaxError):
        parse_system("vars:\nf1: c1*x")


def test_poly_keyword_and_comment_lines():
    system = parse_system("# demo\nvars: x y\npoly 1: c1*x + c2*y\npoly 2: c3*x*y + c4\n")
    assert system.m == 2


def test_format_round_trip():
    first = parse_system(SYS_A_TEXT)
    text = format_system(first)
    second = parse_system(text)
    assert first == second
    assert format_system(second) == text


def test_hide_sys_a_projections():
    system = parse_system(SYS_A_TEXT)
    proj = hide_variable(system, 1)
    assert proj.hidden_degree == 2
    assert proj.base_vars == ("x",)
    f1 = proj.polys[0]
    assert set(f1) == {(0,), (2,)}
    assert sorted(deg for deg, _ in f1[(0,)]) == [0, 2]
    assert [deg for deg, _ in f1[(2,)]] == [0]
    f2 = proj.polys[1]
    assert set(f2) == {(0,), (1,)}
    assert [deg for deg, _ in f2[(1,)]] == [1]
    assert [deg for deg, _ in f2[(0,)]] == [0]


def test_hide_variable_absent_from_polynomial():
    system = parse_system("vars: x y; f1: c1*x^2+c2*x; f2: c3*y+c4")
    proj = hide_variable(system, 1)
    assert all(deg == 0 for pairs in proj.polys[0].values() for deg, _ in pairs)


def test_hide_out_of_range():
    system = parse_system(SYS_A_TEXT)
    with pytest.raises(IndexError):
        hide_variable(system, 2)


def test_projection_round_trip_every_hidden_variable():
    texts = [
        SYS_A_TEXT,
        "vars: x y z; f1: a1*x*y*z+a2*z^2+a3; f2: a4*x^2+a5*y; f3: a6*y*z+a7*x",
        "vars: u v; g1: b1*u^3+b2*v+b3; g2: b4*u*v^2+b5*u",
    ]
    for text in texts:
        system = parse_system(text)
        for h in range(system.n):
            proj = hide_variable(system, h)
            rebuilt = reassemble(proj)
            for poly, terms in zip(system.polys, rebuilt):
                assert dict(poly.terms) == terms


def test_degree_bookkeeping_matches_max_exponent():
    system = parse_system("vars: x y; f1: c1*x*y^3+c2*x; f2: c3*y+c4*x^2")
    assert hide_variable(system, 1).hidden_degree == 3
    assert hide_variable(system, 0).hidden_degree == 2


def test_evaluate_worked_values():
    system = parse_system(SYS_A_TEXT)
    values = {s: v for s, v in zip(system.slots(), [1.0, 1.0, -5.0, 1.0, -2.0])}
    assert np.allclose(evaluate(system, values, [1, 2]), [0.0, 0.0], atol=1e-14)
    assert np.allclose(evaluate(system, values, [0, 0]), [5.0, 2.0])
    zeros = {s: 0.0 for s in system.slots()}
    assert np.all(evaluate(system, zeros, [0.3, -0.7]) == 0.0)


def test_evaluate_missing_slot():
    system = parse_system(SYS_A_TEXT)
    values = {s: 1.0 for s in system.slots()[:-1]}
    with pytest.raises(KeyError, match="c5"):
        evaluate(system, values, [1, 1])


def test_evaluate_additive_in_slot_values():
    # |f| is additive for non-negative values at non-negative points, which
    # pins down the linear placement of every slot
    system = parse_system(SYS_A_TEXT)
    rng = np.random.default_rng(3)
    slots = system.slots()
    for _ in range(20):
        u = {s: rng.uniform(0, 1) for s in slots}
        v = {s: rng.uniform(0, 1) for s in slots}
        w = {s: u[s] + v[s] for s in slots}
        point = rng.uniform(0, 1, size=2)
        assert np.allclose(evaluate(system, w, point),
                           evaluate(system, u, point) + evaluate(system, v, point),
                           rtol=1e-12)


def test_reassemble_exponent():
    assert reassemble_exponent((2, 3), 5, 1) == (2, 5, 3)
    assert reassemble_exponent((), 4, 0) == (4,)
