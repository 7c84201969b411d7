"""Symbolic quantum Ito calculus.

An :class:`ItoExpr` is a finite sum ``sum_k w_k  C_k  dI_k`` where ``w_k`` is an
exact scalar (a sympy expression, possibly containing the Poisson rate
``nu``), ``C_k`` is an ordered word of noncommuting coefficient symbols and
``dI_k`` is one of the fundamental increments ``dt, dB, dB*, dLambda`` or
absent.  Products are resolved with the quantum Ito table::

    x        dt   dB   dB*   dL
    dt       0    0    0     0
    dB       0    0    dt    dB
    dB*      0    0    0     0
    dL       0    0    dB*   dL

read as ``row . column``.  The classical increments are aliases that are
expanded on construction::

    dW = dQ = dB + dB*
    dP      = -i dB + i dB*
    dN      = dL + sqrt(nu) dB* + sqrt(nu) dB + nu dt

Text syntax (see :func:`parse_ito_expr`)::

    expr    := ['+'|'-'] term (('+'|'-') term)*
    term    := scalar [['.'] factor ('.' factor)*]  |  factor ('.' factor)*
    factor  := 'dt' | 'dB' | 'dB*' | 'dL' | 'dW' | 'dN' | 'dQ' | 'dP'
             | IDENT ['*']
    scalar  := NUMBER | '(' complex ')'
    complex := [sign] part [sign part]      part := NUMBER ['i'] | 'i'
    NUMBER  := decimal or 'p/q' fraction

Factors inside a term are multiplied with :func:`ito_product`, so
``"dB.dB*"`` parses to ``dt``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .errors import DimensionMismatch, ItoSyntaxError, UnboundSymbol

NU = sympy.Symbol("nu", positive=True)


class Increment(enum.Enum):
    DT = ("dt", 0)
    DB = ("dB", 1)
    DB_DAG = ("dB*", 2)
    DLAMBDA = ("dL", 3)
    DW = ("dW", 4)
    DN = ("dN", 5)

    def __init__(self, label, rank):
        self.label = label
        self.rank = rank

    @property
    def fundamental(self) -> bool:
        return self.rank < 4

    def adjoint(self) -> "Increment":
        return {Increment.DB: Increment.DB_DAG, Increment.DB_DAG: Increment.DB}.get(self, self)

    def __str__(self):
        return self.label


FUNDAMENTAL = (Increment.DT, Increment.DB, Increment.DB_DAG, Increment.DLAMBDA)

_TABLE = {
    (Increment.DB, Increment.DB_DAG): Increment.DT,
    (Increment.DB, Increment.DLAMBDA): Increment.DB,
    (Increment.DLAMBDA, Increment.DB_DAG): Increment.DB_DAG,
    (Increment.DLAMBDA, Increment.DLAMBDA): Increment.DLAMBDA,
}


@dataclass(frozen=True, order=True)
class CoeffSymbol:
    name: str
    dagger: bool = False

    def adjoint(self) -> "CoeffSymbol":
        return CoeffSymbol(self.name, not self.dagger)

    def __str__(self):
        return self.name + ("*" if self.dagger else "")


def _canon_weight(w):
    return sympy.expand(sympy.sympify(w))


def _inc_rank(inc):
    return -1 if inc is None else inc.rank


class ItoExpr:
    """Canonical, immutable sum of weighted monomials."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        acc = {}
        for word, inc, w in terms:
            if inc is not None and not inc.fundamental:
                for w2, word2, inc2 in _expand_alias(inc):
                    key = (tuple(word) + tuple(word2), inc2)
                    acc[key] = acc.get(key, 0) + w * w2
                continue
            key = (tuple(word), inc)
            acc[key] = acc.get(key, 0) + w
        items = []
        for (word, inc), w in acc.items():
            w = _canon_weight(w)
            if w != 0:
                items.append((word, inc, w))
        items.sort(key=lambda t: (_inc_rank(t[1]), len(t[0]), t[0]))
        self._terms = tuple(items)

    # construction helpers -------------------------------------------------
    @classmethod
    def increment(cls, inc: Increment, weight=1) -> "ItoExpr":
        return cls([((), inc, sympy.sympify(weight))])

    @classmethod
    def scalar(cls, weight) -> "ItoExpr":
        return cls([((), None, sympy.sympify(weight))])

    @classmethod
    def symbol(cls, name: str, dagger=False) -> "ItoExpr":
        return cls([((CoeffSymbol(name, dagger),), None, sympy.Integer(1))])

    @classmethod
    def zero(cls) -> "ItoExpr":
        return cls()

    # inspection ----------------------------------------------------------
    @property
    def terms(self):
        """Tuple of ``(word, increment, weight)`` in canonical order."""
        return self._terms

    def __iter__(self):
        return iter(self._terms)

    def __len__(self):
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def increments(self):
        return sorted({inc for _, inc, _ in self._terms}, key=_inc_rank)

    def coefficient(self, inc):
        """Sub-expression (without the increment) multiplying ``inc``."""
        return ItoExpr([(word, None, w) for word, i, w in self._terms if i == inc])

    def free_scalars(self):
        out = set()
        for _, _, w in self._terms:
            out |= w.free_symbols
        return out

    # algebra -------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, complex, float)) and other == 0:
            return self.is_zero
        if not isinstance(other, ItoExpr):
            return NotImplemented
        if len(self._terms) != len(other._terms):
            return False
        return all(a[0] == b[0] and a[1] == b[1] and sympy.expand(a[2] - b[2]) == 0
                   for a, b in zip(self._terms, other._terms))

    def __hash__(self):
        return hash(tuple((w, i, sympy.srepr(c)) for w, i, c in self._terms))

    def __add__(self, other):
        other = _coerce(other)
        return ItoExpr(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return ItoExpr([(word, inc, -w) for word, inc, w in self._terms])

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ItoExpr):
            return ito_product(self, other)
        return ItoExpr([(word, inc, w * sympy.sympify(other)) for word, inc, w in self._terms])

    def __rmul__(self, other):
        if isinstance(other, ItoExpr):
            return ito_product(other, self)
        return self * other

    def left_mul(self, *symbols) -> "ItoExpr":
        """Prepend coefficient symbols: ``S1 S2 ... (self)``."""
        word = tuple(_as_symbol(s) for s in symbols)
        return ItoExpr([(word + w, inc, c) for w, inc, c in self._terms])

    def right_mul(self, *symbols) -> "ItoExpr":
        """Append coefficient symbols: ``(self) S1 S2 ...``; increments commute with adapted coefficients."""
        word = tuple(_as_symbol(s) for s in symbols)
        return ItoExpr([(w + word, inc, c) for w, inc, c in self._terms])

    def adjoint(self) -> "ItoExpr":
        return ItoExpr([
            (tuple(s.adjoint() for s in reversed(word)),
             None if inc is None else inc.adjoint(),
             sympy.conjugate(w))
            for word, inc, w in self._terms
        ])

    def subs(self, mapping) -> "ItoExpr":
        return ItoExpr([(word, inc, w.subs(mapping)) for word, inc, w in self._terms])

    # printing ------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for k, (word, inc, w) in enumerate(self._terms):
            sign, scal = _format_weight(w)
            factors = [str(s) for s in word]
            if inc is not None:
                factors.append(inc.label)
            body = ".".join(factors)
            if scal and body:
                text = f"{scal} {body}"
            else:
                text = scal or body or "1"
            if k == 0:
                parts.append(("-" if sign < 0 else "") + text)
            else:
                parts.append(("- " if sign < 0 else "+ ") + text)
        return " ".join(parts)

    def __repr__(self):
        return f"ItoExpr({str(self)!r})"


def _as_symbol(s):
    if isinstance(s, CoeffSymbol):
        return s
    if isinstance(s, str):
        if s.endswith("*"):
            return CoeffSymbol(s[:-1], True)
        return CoeffSymbol(s)
    raise TypeError(f"not a coefficient symbol: {s!r}")


def _coerce(x) -> ItoExpr:
    if isinstance(x, ItoExpr):
        return x
    return ItoExpr.scalar(x)


def _expand_alias(inc):
    if inc is Increment.DW:
        return [(1, (), Increment.DB), (1, (), Increment.DB_DAG)]
    if inc is Increment.DN:
        r = sympy.sqrt(NU)
        return [(1, (), Increment.DLAMBDA), (r, (), Increment.DB_DAG),
                (r, (), Increment.DB), (NU, (), Increment.DT)]
    raise ValueError(f"{inc} is not an alias")


def _fmt_rational(q):
    q = sympy.Rational(q)
    if q.q == 1:
        return str(q.p)
    return f"{q.p}/{q.q}"


def _format_weight(w):
    """Return ``(sign, text)``; text is empty for unit magnitude."""
    re_, im_ = w.as_real_imag()
    if re_.is_Rational and im_.is_Rational:
        if im_ == 0:
            sign = -1 if re_ < 0 else 1
            mag = abs(re_)
            if mag == 1:
                return sign, ""
            return sign, _fmt_rational(mag) if mag.q == 1 else f"({_fmt_rational(mag)})"
        if re_ == 0:
            sign = -1 if im_ < 0 else 1
            mag = abs(im_)
            return sign, "(i)" if mag == 1 else f"({_fmt_rational(mag)}i)"
        im_txt = _fmt_rational(abs(im_))
        return 1, f"({_fmt_rational(re_)}{'-' if im_ < 0 else '+'}{im_txt}i)"
    if w.could_extract_minus_sign():
        return -1, f"({sympy.sstr(-w)})"
    return 1, f"({sympy.sstr(w)})"


# ---------------------------------------------------------------------------
# the table and products
# ---------------------------------------------------------------------------

def ito_table(a: Increment, b: Increment) -> ItoExpr:
    """Product ``a . b`` of two fundamental increments."""
    if not (a.fundamental and b.fundamental):
        raise ValueError("ito_table takes fundamental increments; expand dW/dN first")
    res = _TABLE.get((a, b))
    return ItoExpr.zero() if res is None else ItoExpr.increment(res)


def ito_product(x: ItoExpr, y: ItoExpr) -> ItoExpr:
    """Product of two expressions; coefficient words keep left-right order."""
    out = []
    for wx, ix, cx in x:
        for wy, iy, cy in y:
            if ix is None:
                inc = iy
            elif iy is None:
                inc = ix
            else:
                inc = _TABLE.get((ix, iy))
                if inc is None:
                    continue
            out.append((wx + wy, inc, cx * cy))
    return ItoExpr(out)


def product_rule(x_name: str, dx: ItoExpr, y_name: str, dy: ItoExpr) -> ItoExpr:
    """``d(XY) = (dX) Y + X (dY) + (dX)(dY)`` for coefficient processes named ``x_name``, ``y_name``."""
    return dx.right_mul(y_name) + dy.left_mul(x_name) + ito_product(dx, dy)


def dt() -> ItoExpr:
    return ItoExpr.increment(Increment.DT)


def dB() -> ItoExpr:
    return ItoExpr.increment(Increment.DB)


def dB_dag() -> ItoExpr:
    return ItoExpr.increment(Increment.DB_DAG)


def dLambda() -> ItoExpr:
    return ItoExpr.increment(Increment.DLAMBDA)


def dW() -> ItoExpr:
    return ItoExpr.increment(Increment.DW)


def dQ() -> ItoExpr:
    return dB() + dB_dag()


def dP() -> ItoExpr:
    return dB() * (-sympy.I) + dB_dag() * sympy.I


def dN(nu=NU) -> ItoExpr:
    return ItoExpr.increment(Increment.DN).subs({NU: nu}) if nu is not NU else ItoExpr.increment(Increment.DN)


def quadrature_pair_commutator_check() -> dict:
    """Increment-level check of the canonical commutation of the quadratures."""
    q, p = dQ(), dP()
    qp, pq = q * p, p * q
    comm = qp - pq
    report = {
        "dQ.dQ": q * q,
        "dP.dP": p * p,
        "dQ.dP": qp,
        "dP.dQ": pq,
        "[dQ,dP]": comm,
    }
    report["ok"] = (comm == dt() * (2 * sympy.I) and report["dQ.dQ"] == dt()
                    and report["dP.dP"] == dt())
    return report


def table_rows():
    """The 4x4 table as nested lists of strings, row/column order dt, dB, dB*, dL."""
    return [[str(ito_table(a, b)) for b in FUNDAMENTAL] for a in FUNDAMENTAL]


def format_table() -> str:
    labels = [i.label for i in FUNDAMENTAL]
    width = 5
    lines = ["x".ljust(width) + "|" + "".join(l.ljust(width) for l in labels)]
    lines.append("-" * width + "+" + "-" * (width * len(labels)))
    for label, row in zip(labels, table_rows()):
        lines.append(label.ljust(width) + "|" + "".join(c.ljust(width) for c in row))
    return "\n".join(line.rstrip() for line in lines)


# ---------------------------------------------------------------------------
# numeric bridge
# ---------------------------------------------------------------------------

def evaluate_numeric(expr: ItoExpr, bindings: dict, nu=None, dim=None) -> dict:
    """Per-increment matrix coefficients of ``expr``.

    ``bindings`` maps symbol names to matrices; an adjoint symbol ``L*`` uses
    the conjugate transpose of the binding for ``L``.  Pure coefficient terms
    are reported under the key ``None``.
    """
    mats = {}
    for k, v in bindings.items():
        name = k.name if isinstance(k, CoeffSymbol) else str(k)
        mats[name] = np.asarray(v, dtype=complex)
    dims = {m.shape[0] for m in mats.values()}
    if any(m.ndim != 2 or m.shape[0] != m.shape[1] for m in mats.values()):
        raise DimensionMismatch("bindings must be square matrices")
    if dim is not None:
        dims.add(dim)
    if len(dims) > 1:
        raise DimensionMismatch(f"bound matrices have different dimensions {sorted(dims)}")
    out = {}
    for word, inc, w in expr:
        if w.free_symbols:
            if nu is None or w.free_symbols - {NU}:
                raise UnboundSymbol(", ".join(sorted(str(s) for s in w.free_symbols)))
            w = w.subs(NU, nu)
        scal = complex(sympy.N(w, 17))
        if not dims:
            raise DimensionMismatch("no bindings and no dim given")
        d = next(iter(dims))
        m = np.eye(d, dtype=complex)
        for s in word:
            if s.name not in mats:
                raise UnboundSymbol(s.name)
            b = mats[s.name]
            m = m @ (b.conj().T if s.dagger else b)
        out[inc] = out.get(inc, 0) + scal * m
    return out


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_ATOMS = {
    "dt": lambda: dt(),
    "dB": lambda: dB(),
    "dB*": lambda: dB_dag(),
    "dL": lambda: dLambda(),
    "dW": lambda: dW(),
    "dN": lambda: dN(),
    "dQ": lambda: dQ(),
    "dP": lambda: dP(),
}

_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _exact(text):
    if "/" in text:
        num, den = text.split("/")
        return sympy.Rational(Fraction(num)) / int(den)
    return sympy.Rational(Fraction(text))


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, msg, expected=()):
        raise ItoSyntaxError(msg, self.text, self.pos, expected)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self):
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        total = self.term() * sign
        while self.peek() in ("+", "-") and self.peek():
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
            total = total + self.term() * sign
        if self.peek():
            self.error(f"unexpected {self.peek()!r}", {"'+'", "'-'", "'.'", "end of input"})
        return total

    def term(self):
        c = self.peek()
        if c == "(" or c.isdigit() or c == ".":
            weight = self.scalar()
            nxt = self.peek()
            if nxt == ".":
                self.pos += 1
                return self.factors() * weight
            if nxt and (nxt.isalpha() or nxt == "_"):
                return self.factors() * weight
            return ItoExpr.scalar(weight)
        return self.factors()

    def factors(self):
        out = self.factor()
        while self.peek() == ".":
            self.pos += 1
            out = ito_product(out, self.factor())
        return out

    def factor(self):
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error("expected a factor", {"increment", "identifier"})
        name = m.group(0)
        self.pos = m.end()
        star = False
        if self.pos < len(self.text) and self.text[self.pos] == "*":
            star = True
            self.pos += 1
        if name in ("dt", "dL", "dW", "dN", "dQ", "dP") and star:
            self.pos -= 1
            self.error(f"'{name}' has no adjoint form", {"'.'", "'+'", "'-'", "end of input"})
        key = name + ("*" if star else "")
        if key in _ATOMS:
            return _ATOMS[key]()
        return ItoExpr.symbol(name, star)

    def number(self):
        self.skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("expected a number", {"number"})
        self.pos = m.end()
        return _exact(m.group(0))

    def scalar(self):
        if self.peek() != "(":
            return self.number()
        self.pos += 1
        value = self.complex_part(first=True)
        while self.peek() in ("+", "-") and self.peek():
            value += self.complex_part(first=False)
        if self.peek() != ")":
            self.error("unterminated scalar", {"')'", "'+'", "'-'"})
        self.pos += 1
        return value

    def complex_part(self, first):
        sign = 1
        c = self.peek()
        if c in ("+", "-") and c:
            sign = -1 if c == "-" else 1
            self.pos += 1
        elif not first:
            self.error("expected sign", {"'+'", "'-'"})
        c = self.peek()
        if c == "i":
            self.pos += 1
            return sign * sympy.I
        mag = self.number()
        if self.pos < len(self.text) and self.text[self.pos] == "i":
            self.pos += 1
            return sign * mag * sympy.I
        return sign * mag


def parse_ito_expr(text: str) -> ItoExpr:
    """Parse ``text`` into a canonical :class:`ItoExpr` (see module docstring for the grammar)."""
    p = _Parser(text)
    if not p.peek():
        p.error("empty expression", {"term"})
    return p.expr()


def parse_terms(text: str):
    """Syntactic split of ``text`` into signed terms, each a list of factor strings.

    Nothing is multiplied out, so ``"dB.dB*"`` stays ``[(1, ['dB', 'dB*'])]``;
    this is the shape the expression has before :func:`ito_product` resolves it.
    """
    parse_ito_expr(text)  # raises on bad input
    p = _Parser(text)
    out = []
    while p.peek():
        sign = 1
        if p.peek() in "+-":
            sign = -1 if p.text[p.pos] == "-" else 1
            p.pos += 1
        pieces = []
        c = p.peek()
        if c == "(" or c.isdigit() or c == ".":
            start = p.pos
            p.scalar()
            pieces.append(text[start:p.pos])
            if p.peek() == ".":
                p.pos += 1
        if p.peek() and p.peek() not in "+-":
            while True:
                p.skip()
                start = p.pos
                p.factor()
                pieces.append(text[start:p.pos])
                if p.peek() != ".":
                    break
                p.pos += 1
        out.append((sign, pieces))
    return out
