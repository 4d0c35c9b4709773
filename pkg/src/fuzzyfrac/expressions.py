"""Arithmetic expression language for configuration-defined integrands.

Supports + - * / ^ (right associative), unary minus, the functions
sin, cos, exp, ln, pow, gamma, numeric literals, and a fixed variable
vocabulary per context. Expressions differentiate symbolically; a node
without a derivative rule (gamma of a dependent argument) simply yields
no symbolic partial, and callers fall back to finite differences.
"""

import re

import numpy as np
from scipy.special import gamma as _gamma_fn

__all__ = [
    "ExpressionError",
    "Expression",
    "parse_expression",
    "lagrangian_variables",
    "lagrangian_from_expressions",
]

FUNCTIONS = {"sin": 1, "cos": 1, "exp": 1, "ln": 1, "pow": 2, "gamma": 1}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))")


class ExpressionError(ValueError):
    """Malformed or out-of-vocabulary expression text."""


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:].lstrip()
            if not rest:
                break
            raise ExpressionError("unexpected character %r at position %d"
                                  % (rest[0], pos))
        if m.group("num") is not None:
            out.append(("num", float(m.group("num")), m.start("num")))
        elif m.group("name") is not None:
            out.append(("name", m.group("name"), m.start("name")))
        else:
            out.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0
        self.variables = frozenset(variables)

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExpressionError("expected %r at position %d in %r"
                                  % (op, pos, self.text))

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError("trailing input at position %d in %r"
                                  % (pos, self.text))
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                node = ("add" if val == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.unary()
                node = ("mul" if val == "*" else "div", node, rhs)
            else:
                return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return ("pow", base, self.unary())
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return ("num", val)
        if kind == "name":
            nk, nv, _ = self.peek()
            if nk == "op" and nv == "(":
                if val not in FUNCTIONS:
                    raise ExpressionError("unknown function %r at position %d"
                                          % (val, pos))
                self.take()
                args = [self.expr()]
                while True:
                    ak, av, apos = self.peek()
                    if ak == "op" and av == ",":
                        self.take()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != FUNCTIONS[val]:
                    raise ExpressionError("%s takes %d argument(s)"
                                          % (val, FUNCTIONS[val]))
                return ("call", val, tuple(args))
            if val not in self.variables:
                raise ExpressionError(
                    "unknown variable %r at position %d (allowed: %s)"
                    % (val, pos, ", ".join(sorted(self.variables))))
            return ("var", val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError("unexpected token at position %d in %r"
                              % (pos, self.text))


def _used(node, acc):
    tag = node[0]
    if tag == "var":
        acc.add(node[1])
    elif tag == "call":
        for a in node[2]:
            _used(a, acc)
    elif tag in ("add", "sub", "mul", "div", "pow"):
        _used(node[1], acc)
        _used(node[2], acc)
    elif tag == "neg":
        _used(node[1], acc)
    return acc


def _depends(node, var):
    return var in _used(node, set())


class _NoRule(Exception):
    pass


def _num(v):
    return ("num", float(v))


def _is_num(node, value=None):
    return node[0] == "num" and (value is None or node[1] == value)


def _fold(node):
    tag = node[0]
    if tag in ("num", "var"):
        return node
    if tag == "neg":
        a = _fold(node[1])
        if _is_num(a):
            return _num(-a[1])
        return ("neg", a)
    if tag == "call":
        args = tuple(_fold(a) for a in node[2])
        if all(_is_num(a) for a in args):
            return _num(_eval_call(node[1], [a[1] for a in args]))
        return ("call", node[1], args)
    a = _fold(node[1])
    b = _fold(node[2])
    if _is_num(a) and _is_num(b):
        return _num(_eval_binary(tag, a[1], b[1]))
    if tag == "add":
        if _is_num(a, 0.0):
            return b
        if _is_num(b, 0.0):
            return a
    elif tag == "sub":
        if _is_num(b, 0.0):
            return a
        if _is_num(a, 0.0):
            return ("neg", b)
    elif tag == "mul":
        if _is_num(a, 0.0) or _is_num(b, 0.0):
            return _num(0.0)
        if _is_num(a, 1.0):
            return b
        if _is_num(b, 1.0):
            return a
    elif tag == "div":
        if _is_num(a, 0.0):
            return _num(0.0)
        if _is_num(b, 1.0):
            return a
    elif tag == "pow":
        if _is_num(b, 1.0):
            return a
        if _is_num(b, 0.0):
            return _num(1.0)
    return (tag, a, b)


def _diff(node, var):
    tag = node[0]
    if not _depends(node, var):
        return _num(0.0)
    if tag == "var":
        return _num(1.0)
    if tag == "neg":
        return ("neg", _diff(node[1], var))
    if tag == "add" or tag == "sub":
        return (tag, _diff(node[1], var), _diff(node[2], var))
    if tag == "mul":
        a, b = node[1], node[2]
        return ("add", ("mul", _diff(a, var), b), ("mul", a, _diff(b, var)))
    if tag == "div":
        a, b = node[1], node[2]
        return ("div",
                ("sub", ("mul", _diff(a, var), b), ("mul", a, _diff(b, var))),
                ("pow", b, _num(2.0)))
    if tag == "pow":
        a, b = node[1], node[2]
        if _is_num(b):
            return ("mul", ("mul", b, ("pow", a, _num(b[1] - 1.0))),
                    _diff(a, var))
        # variable exponent: a^b = exp(b ln a)
        inner = ("add",
                 ("mul", _diff(b, var), ("call", "ln", (a,))),
                 ("div", ("mul", b, _diff(a, var)), a))
        return ("mul", node, inner)
    if tag == "call":
        fname = node[1]
        arg = node[2][0]
        if fname == "pow":
            return _diff(("pow", node[2][0], node[2][1]), var)
        if fname == "sin":
            outer = ("call", "cos", (arg,))
        elif fname == "cos":
            outer = ("neg", ("call", "sin", (arg,)))
        elif fname == "exp":
            outer = node
        elif fname == "ln":
            return ("div", _diff(arg, var), arg)
        else:
            raise _NoRule(fname)
        return ("mul", outer, _diff(arg, var))
    raise _NoRule(tag)


def _eval_call(fname, args):
    if fname == "sin":
        return np.sin(args[0])
    if fname == "cos":
        return np.cos(args[0])
    if fname == "exp":
        return np.exp(args[0])
    if fname == "ln":
        return np.log(args[0])
    if fname == "pow":
        return np.power(args[0], args[1])
    if fname == "gamma":
        return _gamma_fn(args[0])
    raise ExpressionError("unknown function %r" % fname)


def _eval_binary(tag, a, b):
    if tag == "add":
        return a + b
    if tag == "sub":
        return a - b
    if tag == "mul":
        return a * b
    if tag == "div":
        return a / b
    return np.power(a, b)


def _eval(node, env):
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return env[node[1]]
    if tag == "neg":
        return -_eval(node[1], env)
    if tag == "call":
        return _eval_call(node[1], [_eval(a, env) for a in node[2]])
    return _eval_binary(tag, _eval(node[1], env), _eval(node[2], env))


class Expression:
    """Parsed expression over a fixed variable vocabulary."""

    def __init__(self, text, ast, variables):
        self.text = text
        self.ast = ast
        self.variables = frozenset(variables)
        self.used = frozenset(_used(ast, set()))

    def evaluate(self, env):
        missing = self.used - set(env)
        if missing:
            raise ExpressionError("missing values for %s"
                                  % ", ".join(sorted(missing)))
        return _eval(self.ast, env)

    def derivative(self, var):
        """Symbolic derivative, or None when no rule applies."""
        if var not in self.variables:
            raise ExpressionError("cannot differentiate with respect to %r" % var)
        try:
            d = _fold(_diff(_fold(self.ast), var))
        except _NoRule:
            return None
        return Expression("d(%s)/d(%s)" % (self.text, var), d, self.variables)


def parse_expression(text, variables):
    ast = _Parser(text, variables).parse()
    return Expression(text, _fold(ast), variables)


def lagrangian_variables(nargs):
    """Variable vocabulary for an integrand with the given argument count."""
    from .variational import _arg_names
    return tuple(n for n in _arg_names(nargs) if n) + ("r",)


def lagrangian_from_expressions(lower_text, upper_text, nargs=11,
                                fd_step=1e-6):
    """Compile a pair of integrand expressions into a Lagrangian.

    Partial derivatives come from symbolic differentiation, with the
    finite-difference fallback (and the construction-time cross check)
    of the Lagrangian class covering anything the rules cannot reach.
    """
    from .variational import Lagrangian, _arg_names
    names = lagrangian_variables(nargs)
    arg_names = _arg_names(nargs)
    exprs = {"lower": parse_expression(lower_text, names),
             "upper": parse_expression(upper_text, names)}

    def make_eval(expr):
        def fn(point):
            env = {}
            for nm in expr.used:
                v = getattr(point, nm, None)
                if v is None:
                    raise ExpressionError(
                        "variable %r is not available at this evaluation point" % nm)
                env[nm] = v
            return expr.evaluate(env)
        return fn

    tables = {}
    for which, expr in exprs.items():
        table = {}
        for i in range(2, nargs + 1):
            d = expr.derivative(arg_names[i])
            if d is not None:
                table[i] = make_eval(d)
        tables[which] = table
    return Lagrangian(make_eval(exprs["lower"]), make_eval(exprs["upper"]),
                      tables["lower"], tables["upper"], nargs=nargs,
                      fd_step=fd_step)
