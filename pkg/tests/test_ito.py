import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qfilterlab import ito
from qfilterlab.errors import DimensionMismatch, ItoSyntaxError, UnboundSymbol
from qfilterlab.ito import FUNDAMENTAL, Increment, ItoExpr, NU

# Independent oracle: the fundamental increments as 3x3 matrix units
# (dt = E02, dB = E01, dB* = E12, dL = E11); the table is matrix product.


def _unit(i, j):
    m = np.zeros((3, 3))
    m[i, j] = 1.0
    return m


MATRIX = {
    Increment.DT: _unit(0, 2),
    Increment.DB: _unit(0, 1),
    Increment.DB_DAG: _unit(1, 2),
    Increment.DLAMBDA: _unit(1, 1),
}


def to_matrix(expr: ItoExpr, nu=None) -> np.ndarray:
    out = np.zeros((3, 3), dtype=complex)
    for word, inc, w in expr:
        assert word == ()
        if nu is not None:
            w = w.subs(NU, nu)
        out += complex(w) * (np.eye(3) if inc is None else MATRIX[inc])
    return out


@pytest.mark.parametrize("a,b", list(itertools.product(FUNDAMENTAL, FUNDAMENTAL)))
def test_table_matches_matrix_oracle(a, b):
    got = to_matrix(ito.ito_table(a, b))
    np.testing.assert_array_equal(got, MATRIX[a] @ MATRIX[b])


def test_nonzero_entries():
    T = ito.ito_table
    D = Increment
    assert T(D.DB, D.DB_DAG) == ito.dt()
    assert T(D.DB, D.DLAMBDA) == ito.dB()
    assert T(D.DLAMBDA, D.DB_DAG) == ito.dB_dag()
    assert T(D.DLAMBDA, D.DLAMBDA) == ito.dLambda()
    assert T(D.DB_DAG, D.DB).is_zero
    assert sum(not T(a, b).is_zero for a in FUNDAMENTAL for b in FUNDAMENTAL) == 4


def test_table_rejects_alias():
    with pytest.raises(ValueError):
        ito.ito_table(Increment.DW, Increment.DT)


def test_classical_aliases():
    assert ito.dW() * ito.dW() == ito.dt()
    assert ito.dQ() * ito.dQ() == ito.dt()
    assert ito.dP() * ito.dP() == ito.dt()
    assert ito.dQ() * ito.dP() == ito.dt() * sympy.I
    assert ito.dP() * ito.dQ() == ito.dt() * (-sympy.I)
    chk = ito.quadrature_pair_commutator_check()
    assert chk["ok"] and chk["[dQ,dP]"] == ito.dt() * (2 * sympy.I)


@pytest.mark.parametrize("nu", [0.5, 2, 7.25])
def test_poisson_square_numeric(nu):
    dn = ito.dN(sympy.nsimplify(nu))
    assert dn * dn == dn
    np.testing.assert_allclose(to_matrix(ito.dN(), nu) @ to_matrix(ito.dN(), nu),
                               to_matrix(ito.dN(), nu), atol=1e-12)


def test_poisson_square_symbolic():
    assert ito.dN() * ito.dN() == ito.dN()
    assert ito.dN() * ito.dt() == ItoExpr.zero()


def test_compensated_poisson():
    # dN - nu dt has quadratic variation dN
    m = ito.dN() - ito.dt() * NU
    assert m * m == ito.dN()


_exprs = st.lists(
    st.tuples(st.sampled_from(FUNDAMENTAL + (None,)), st.integers(-3, 3), st.integers(-3, 3)),
    min_size=1, max_size=4,
).map(lambda ts: ItoExpr([((), inc, sympy.Integer(a) + sympy.I * b) for inc, a, b in ts]))


@settings(max_examples=64, deadline=None)
@given(_exprs, _exprs, _exprs)
def test_associativity(x, y, z):
    assert (x * y) * z == x * (y * z)
    np.testing.assert_allclose(to_matrix(x * y), to_matrix(x) @ to_matrix(y), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(_exprs, _exprs)
def test_adjoint_reverses_products(x, y):
    assert (x * y).adjoint() == y.adjoint() * x.adjoint()


def test_adjoint_of_increments():
    assert ito.dB().adjoint() == ito.dB_dag()
    assert ito.dLambda().adjoint() == ito.dLambda()


def test_noncommuting_words_keep_order():
    a = ito.dB().left_mul("A")
    b = ito.dB_dag().left_mul("B")
    ab = a * b
    assert ab == ito.dt().left_mul("A", "B")
    assert ab != ito.dt().left_mul("B", "A")


def test_product_rule_wick_order():
    # d(X X) for dX = dB + dB* picks up the Ito correction dt
    d = ito.product_rule("X", ito.dW(), "X", ito.dW())
    assert d.coefficient(Increment.DT) == ItoExpr.scalar(1)
    assert d.coefficient(Increment.DB) == ItoExpr.symbol("X") * 2


def test_parser_examples():
    p = ito.parse_ito_expr
    assert p("dB.dB*") == ito.dt()
    assert p("dB*.dB").is_zero
    assert p("dL.dL") == ito.dLambda()
    assert p("dQ.dP - dP.dQ") == ito.dt() * (2 * sympy.I)
    assert p("(1/2+3i) dt") == ito.dt() * (sympy.Rational(1, 2) + 3 * sympy.I)
    assert p("2.5 L.dB*") == ito.dB_dag().left_mul("L") * sympy.Rational(5, 2)
    assert p("L*.dB") == ito.dB().left_mul("L*")
    assert str(p("dQ.dP - dP.dQ")) == "(2i) dt"


@pytest.mark.parametrize("expr", ["dB.dB*", "dL + 2 dt", "(1-i) L.dB*", "-dB + A.B.dL"])
def test_print_parse_round_trip(expr):
    e = ito.parse_ito_expr(expr)
    assert ito.parse_ito_expr(str(e)) == e


@pytest.mark.parametrize("text,pos", [("dB +", 4), ("dt*", 2), ("(1+2i dt", 6), ("", 0), ("dB ..dt", 4)])
def test_parser_errors(text, pos):
    with pytest.raises(ItoSyntaxError) as exc:
        ito.parse_ito_expr(text)
    assert exc.value.pos == pos
    assert exc.value.expected


def test_parse_terms_is_syntactic():
    assert ito.parse_terms("dB.dB*") == [(1, ["dB", "dB*"])]


def test_format_table():
    rows = ito.table_rows()
    assert rows[1][2] == "dt" and rows[3][3] == "dL" and rows[0][0] == "0"
    assert "dB*" in ito.format_table()


def test_evaluate_numeric():
    L = np.array([[0, 1], [0, 0]], dtype=complex)
    e = ito.parse_ito_expr("L*.L.dt + L.dB*")
    out = ito.evaluate_numeric(e, {"L": L})
    np.testing.assert_array_equal(out[Increment.DT], L.conj().T @ L)
    np.testing.assert_array_equal(out[Increment.DB_DAG], L)
    with pytest.raises(UnboundSymbol):
        ito.evaluate_numeric(e, {"K": L})
    with pytest.raises(DimensionMismatch):
        ito.evaluate_numeric(ito.parse_ito_expr("A.B.dt"), {"A": np.eye(2), "B": np.eye(3)})
    with pytest.raises(UnboundSymbol):
        ito.evaluate_numeric(ito.dN(), {}, dim=1)
    num = ito.evaluate_numeric(ito.dN(), {}, nu=4.0, dim=1)
    assert num[Increment.DT][0, 0] == pytest.approx(4.0)
    assert num[Increment.DB][0, 0] == pytest.approx(2.0)


def test_parse_hp_structure_and_quadrature():
    e = ito.parse_ito_expr("L.dB* - L*.dB - (0.5+0i) L*.L.dt")
    assert len(e) == 3
    assert ito.parse_ito_expr("dQ") == ito.dB() + ito.dB_dag()


def test_evaluate_numeric_hp_drift_and_zero():
    r = np.random.default_rng(3)
    m = r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2))
    k = r.normal(size=(2, 2))
    k = k + k.T
    e = ito.parse_ito_expr("(-1/2) L*.L.dt + (-i) H.dt")
    out = ito.evaluate_numeric(e, {"L": m, "H": k})
    np.testing.assert_allclose(out[Increment.DT], -(0.5 * m.conj().T @ m + 1j * k), atol=1e-15)
    assert ito.evaluate_numeric(ItoExpr.zero(), {"L": m}) == {}
