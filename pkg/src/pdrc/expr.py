"""Guard expressions and variable updates.

Guard grammar::

    expr  := conj ('||' conj)*
    conj  := unary ('&&' unary)*
    unary := '!' unary | '(' expr ')' | 'true' | 'false' | atom
    atom  := IDENT op INT | IDENT '@' IDENT
    op    := '==' | '!=' | '<' | '<=' | '>' | '>='

Variables are only ever compared to integer constants.
"""

import re
from dataclasses import dataclass
from typing import Optional, Union

OPS = ("==", "!=", "<=", ">=", "<", ">")


class ExprSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Cmp:
    var: str
    op: str
    value: int


@dataclass(frozen=True)
class At:
    """Automaton ``automaton`` is currently in ``location``."""

    automaton: str
    location: str


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Expr = Union[Const, Cmp, At, Not, And, Or]

TRUE = Const(True)
FALSE = Const(False)


def conj(*args):
    flat = []
    for a in args:
        if a == TRUE:
            continue
        if a == FALSE:
            return FALSE
        flat.extend(a.args if isinstance(a, And) else (a,))
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*args):
    flat = []
    for a in args:
        if a == FALSE:
            continue
        if a == TRUE:
            return TRUE
        flat.extend(a.args if isinstance(a, Or) else (a,))
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


_NEG_OP = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}


def negate(e):
    """Negation pushed through one level where that stays readable."""
    if isinstance(e, Const):
        return Const(not e.value)
    if isinstance(e, Cmp):
        return Cmp(e.var, _NEG_OP[e.op], e.value)
    if isinstance(e, Not):
        return e.arg
    if isinstance(e, And):
        return disj(*(negate(a) for a in e.args))
    if isinstance(e, Or):
        return conj(*(negate(a) for a in e.args))
    return Not(e)


def compare(op, lhs, rhs):
    if op == "==":
        return lhs == rhs
    if op == "!=":
        return lhs != rhs
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    if op == ">":
        return lhs > rhs
    if op == ">=":
        return lhs >= rhs
    raise ValueError(op)


def evaluate(e, values, locations=None):
    """Evaluate under ``values`` (var -> int) and ``locations`` (automaton -> location)."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Cmp):
        return compare(e.op, values[e.var], e.value)
    if isinstance(e, At):
        if locations is None:
            raise ValueError(f"location atom {e.automaton}@{e.location} needs locations")
        return locations[e.automaton] == e.location
    if isinstance(e, Not):
        return not evaluate(e.arg, values, locations)
    if isinstance(e, And):
        return all(evaluate(a, values, locations) for a in e.args)
    if isinstance(e, Or):
        return any(evaluate(a, values, locations) for a in e.args)
    raise TypeError(e)


def atoms(e):
    if isinstance(e, (Cmp, At)):
        yield e
    elif isinstance(e, Not):
        yield from atoms(e.arg)
    elif isinstance(e, (And, Or)):
        for a in e.args:
            yield from atoms(a)


def variables(e):
    return {a.var for a in atoms(e) if isinstance(a, Cmp)}


def automata(e):
    return {a.automaton for a in atoms(e) if isinstance(a, At)}


# -- printing ---------------------------------------------------------------

def to_text(e, _prec=0):
    if isinstance(e, Const):
        return "true" if e.value else "false"
    if isinstance(e, Cmp):
        return f"{e.var} {e.op} {e.value}"
    if isinstance(e, At):
        return f"{e.automaton}@{e.location}"
    if isinstance(e, Not):
        return "!" + to_text(e.arg, 3)
    if isinstance(e, And):
        s = " && ".join(to_text(a, 2) for a in e.args)
        return f"({s})" if _prec > 2 else s
    if isinstance(e, Or):
        s = " || ".join(to_text(a, 1) for a in e.args)
        return f"({s})" if _prec > 1 else s
    raise TypeError(e)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<op>==|!=|<=|>=|<|>|&&|\|\||!|\(|\)|@)|(?P<int>-?\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_.]*))")


def _tokenize(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ExprSyntaxError(f"expected {value or 'token'} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        if self.i != len(self.toks):
            raise ExprSyntaxError(f"trailing input in {self.text!r}")
        return e

    def expr(self):
        parts = [self.conj()]
        while self.peek()[1] == "||":
            self.take()
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.peek()[1] == "&&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        kind, val = self.peek()
        if val == "!":
            self.take()
            return Not(self.unary())
        if val == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind != "id":
            raise ExprSyntaxError(f"expected atom in {self.text!r}")
        self.take()
        if val in ("true", "false"):
            return Const(val == "true")
        nkind, nval = self.peek()
        if nval == "@":
            self.take()
            k, loc = self.take()
            if k not in ("id", "int"):
                raise ExprSyntaxError(f"bad location name in {self.text!r}")
            return At(val, loc)
        if nval in OPS:
            self.take()
            k, num = self.take()
            if k != "int":
                raise ExprSyntaxError(f"variables compare to integer constants only: {self.text!r}")
            return Cmp(val, nval, int(num))
        raise ExprSyntaxError(f"dangling identifier {val!r} in {self.text!r}")


def parse_guard(text):
    if isinstance(text, bool):
        return Const(text)
    if text is None or str(text).strip() == "":
        return TRUE
    return _Parser(str(text)).parse()


# -- updates ----------------------------------------------------------------

@dataclass(frozen=True)
class Update:
    """``var' := source + offset``; a constant assignment has ``source=None``."""

    var: str
    source: Optional[str]
    offset: int

    def apply(self, values):
        base = 0 if self.source is None else values[self.source]
        return base + self.offset

    def to_text(self):
        if self.source is None:
            return str(self.offset)
        if self.offset == 0:
            return self.source
        sign = "+" if self.offset > 0 else "-"
        return f"{self.source}{sign}{abs(self.offset)}"


_UPDATE = re.compile(r"^\s*(?:(?P<const>-?\d+)|(?P<src>[A-Za-z_][A-Za-z0-9_.]*)\s*(?:(?P<sign>[+-])\s*(?P<off>\d+))?)\s*$")


def parse_update(var, text):
    m = _UPDATE.match(str(text))
    if not m:
        raise ExprSyntaxError(f"bad update {var} := {text!r}")
    if m.group("const") is not None:
        return Update(var, None, int(m.group("const")))
    off = int(m.group("off") or 0)
    if m.group("sign") == "-":
        off = -off
    return Update(var, m.group("src"), off)
