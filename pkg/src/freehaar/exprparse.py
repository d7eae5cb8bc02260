"""Surface syntax for non-commutative polynomials.

Grammar (EBNF, whitespace insignificant):

    expr    := [ '+' | '-' ] term (('+' | '-') term)*
    term    := factor ('*' factor)*
    factor  := scalar | atom
    atom    := ('U' int | 'Z' int | '(' expr ')') postfix*
    postfix := "'" | '^' int
    scalar  := number [ 'i' ]        e.g.  2, 1.5, 2i, 1e-3

U1..Up are unitary letters, Z1..Zq deterministic ones (mapped to indices
p+1..p+q).  Postfix operators apply left to right, so U1^2' = (U1^2)'.
A parenthesized complex literal like (0.5-0.5i) is simply an expr of
scalars and needs no special case.
"""

import re

from .polyalg import NCPolynomial

__all__ = ["ParseError", "parse", "format_poly"]


class ParseError(ValueError):
    """Syntax or range error; ``column`` is 1-based."""

    def __init__(self, message, column):
        super().__init__("%s (column %d)" % (message, column))
        self.column = column


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?i?)
  | (?P<letter>[UZ]\d+)
  | (?P<op>[-+*^()'])
""", re.VERBOSE)


def _lex(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("unexpected character %r" % text[pos], pos + 1)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            tokens.append((kind, m.group(), pos + 1))
        pos = m.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text, p, q):
        self.tokens = _lex(text)
        self.i = 0
        self.p = p
        self.q = q
        self.d = p + q

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, col = self.peek()
        if kind != "op" or val != op:
            raise ParseError("expected %r" % op, col)
        return self.take()

    # expr := [sign] term (('+'|'-') term)*
    def expr(self):
        kind, val, _col = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term().scale(sign)
        while True:
            kind, val, _col = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + (t if val == "+" else -t)
            else:
                return acc

    # term := factor ('*' factor)*
    def term(self):
        acc = self.factor()
        while True:
            kind, val, _col = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            else:
                return acc

    # factor := scalar | atom
    def factor(self):
        kind, val, col = self.peek()
        if kind == "number":
            self.take()
            if val.endswith("i"):
                return NCPolynomial.one(self.d, self.p, 1j * float(val[:-1]))
            return NCPolynomial.one(self.d, self.p, complex(float(val)))
        return self.atom()

    # atom := ('U'int | 'Z'int | '(' expr ')') postfix*
    def atom(self):
        kind, val, col = self.peek()
        if kind == "letter":
            self.take()
            idx = int(val[1:])
            if val[0] == "U":
                if not 1 <= idx <= self.p:
                    raise ParseError("unitary letter U%d outside 1..%d" % (idx, self.p), col)
                base = NCPolynomial.generator(self.d, self.p, idx)
            else:
                if not 1 <= idx <= self.q:
                    raise ParseError("deterministic letter Z%d outside 1..%d" % (idx, self.q), col)
                base = NCPolynomial.generator(self.d, self.p, self.p + idx)
        elif kind == "op" and val == "(":
            self.take()
            base = self.expr()
            self.expect_op(")")
        else:
            raise ParseError("expected scalar, letter or '('", col)
        return self.postfixes(base)

    def postfixes(self, base):
        while True:
            kind, val, col = self.peek()
            if kind == "op" and val == "'":
                self.take()
                base = base.adjoint()
            elif kind == "op" and val == "^":
                self.take()
                nk, nv, ncol = self.peek()
                if nk != "number" or nv.endswith("i") or "." in nv or "e" in nv or "E" in nv:
                    raise ParseError("exponent must be a positive integer", ncol)
                self.take()
                n = int(nv)
                if n <= 0:
                    raise ParseError("exponent must be a positive integer", ncol)
                base = base ** n
            else:
                return base


def parse(text, p, q):
    """Parse ``text`` into an NCPolynomial with d = p + q letters."""
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty input", 1)
    parser = _Parser(text, p, q)
    poly = parser.expr()
    kind, val, col = parser.peek()
    if kind != "end":
        raise ParseError("unexpected trailing input %r" % val, col)
    return poly


# ----------------------------------------------------------------------
# formatting
# ----------------------------------------------------------------------

def _fmt_real(x):
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_mono(mono, p):
    """Render a monomial with run-length collapsed powers."""
    parts = []
    k = 0
    while k < len(mono):
        i, s = mono[k]
        n = 1
        while k + n < len(mono) and mono[k + n] == (i, s):
            n += 1
        name = "U%d" % i if i <= p else "Z%d" % (i - p)
        if s:
            name += "'"
        if n > 1:
            name += "^%d" % n
        parts.append(name)
        k += n
    return "*".join(parts)


def format_poly(P):
    """Deterministic canonical rendering; parse(format_poly(P)) == P."""
    if not P.terms:
        return "0"
    pieces = []
    for mono, c in P.sorted_terms():
        c = complex(c)
        body = _fmt_mono(mono, P.p)
        if c.imag == 0.0:
            sign = "-" if c.real < 0 else "+"
            mag = abs(c.real)
            if mono and mag == 1.0:
                coeff = ""
            else:
                coeff = _fmt_real(mag)
        elif c.real == 0.0:
            sign = "-" if c.imag < 0 else "+"
            coeff = _fmt_real(abs(c.imag)) + "i"
        else:
            sign = "+"
            re_s = _fmt_real(c.real)
            im_s = _fmt_real(abs(c.imag)) + "i"
            coeff = "(%s%s%s)" % (re_s, "-" if c.imag < 0 else "+", im_s)
        if coeff and body:
            text = coeff + "*" + body
        else:
            text = coeff or body
        pieces.append((sign, text))
    out = []
    for k, (sign, text) in enumerate(pieces):
        if k == 0:
            out.append(("-" if sign == "-" else "") + text)
        else:
            out.append(" %s %s" % (sign, text))
    return "".join(out)
