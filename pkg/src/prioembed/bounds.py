"""Small arithmetic expressions over ``j, n, k, c`` for audit bounds and
priority functions, e.g. ``"2*ceil(k*log2(j)/log2(n))-1"``.

Rational operations stay exact (``Fraction``). Logarithms, roots and
fractional powers switch to 60-digit ``Decimal``; ``ceil`` and ``floor``
snap results lying within ``1e-40`` of an integer onto it, so boundary cases
like ``log2(16)/log2(256)`` round the way exact arithmetic would.
"""
import ast
import operator
from decimal import Decimal, localcontext
from fractions import Fraction
from math import ceil as _iceil, floor as _ifloor

from . import errors
from .metric import default_alpha, validate_priority_function

PREC = 60
_SNAP = Decimal("1e-40")
_NAMES = ("j", "n", "k", "c")


def _dec(x):
    if isinstance(x, Decimal):
        return x
    x = Fraction(x)
    return Decimal(x.numerator) / Decimal(x.denominator)


def _exact_log2(x):
    """``log2`` of a power of two (or its reciprocal) as an int, else None."""
    if not isinstance(x, Fraction) or x <= 0:
        return None
    a, b = x.numerator, x.denominator
    if b == 1 and a & (a - 1) == 0:
        return a.bit_length() - 1
    if a == 1 and b & (b - 1) == 0:
        return -(b.bit_length() - 1)
    return None


def _positive(x, name):
    if x <= 0:
        raise errors.InvalidParams(f"{name} of non-positive value {x}")


def _ln(x):
    _positive(x, "logarithm")
    if isinstance(x, Fraction) and x == 1:
        return Fraction(0)
    return _dec(x).ln()


def _log2(x):
    _positive(x, "logarithm")
    e = _exact_log2(x)
    if e is not None:
        return Fraction(e)
    return _dec(x).ln() / Decimal(2).ln()


def _log(x, base=None):
    if base is None:
        return _ln(x)
    num, den = _log2(x), _log2(base)
    if isinstance(num, Fraction) and isinstance(den, Fraction):
        return num / den
    return _dec(num) / _dec(den)


def _snap(x, fn):
    if isinstance(x, Fraction):
        return Fraction(fn(x))
    near = x.to_integral_value()
    if abs(x - near) <= _SNAP * max(1, abs(near)):
        return Fraction(int(near))
    return Fraction(fn(x))


def _sqrt(x):
    return _pow(x, Fraction(1, 2))


def _pow(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        if b.denominator == 1:
            if a == 0 and b < 0:
                raise errors.InvalidParams("zero to a negative power")
            return a ** b.numerator
        # exact roots of perfect powers stay rational
        root = _exact_root(a, b.denominator)
        if root is not None:
            return root ** b.numerator
    if a < 0:
        raise errors.InvalidParams("fractional power of a negative value")
    if a == 0:
        return Fraction(0)
    return _dec(a) ** _dec(b)


def _exact_root(a, q):
    if a < 0:
        return None
    out = []
    for part in (a.numerator, a.denominator):
        r = round(part ** (1.0 / q)) if part < 2 ** 1000 else None
        if r is None:
            return None
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** q == part:
                out.append(cand)
                break
        else:
            return None
    return Fraction(out[0], out[1])


def _num(x):
    return x if isinstance(x, (Fraction, Decimal)) else Fraction(x)


def _binop(op):
    def run(a, b):
        if isinstance(a, Decimal) or isinstance(b, Decimal):
            return op(_dec(a), _dec(b))
        return op(a, b)
    return run


def _minmax(fn):
    def run(*xs):
        if not xs:
            raise errors.InvalidParams("min/max need arguments")
        return fn(xs, key=lambda v: _dec(v))
    return run


_FUNCS = {
    "ceil": lambda x: _snap(x, _iceil),
    "floor": lambda x: _snap(x, _ifloor),
    "log2": _log2,
    "ln": _ln,
    "log": _log,
    "sqrt": _sqrt,
    "min": _minmax(min),
    "max": _minmax(max),
}

_BIN = {
    ast.Add: _binop(operator.add),
    ast.Sub: _binop(operator.sub),
    ast.Mult: _binop(operator.mul),
    ast.Div: _binop(operator.truediv),
    ast.Pow: _pow,
}

_CMP = {
    ast.Lt: operator.lt, ast.LtE: operator.le, ast.Gt: operator.gt,
    ast.GtE: operator.ge, ast.Eq: operator.eq, ast.NotEq: operator.ne,
}


class BoundSpec:
    """A parsed expression; call it with variable values.

    ``alpha(j)`` is available when a priority function is supplied.
    """

    def __init__(self, text):
        self.text = str(text).strip()
        try:
            self.tree = ast.parse(self.text, mode="eval").body
        except SyntaxError as e:
            raise errors.InvalidParams(f"cannot parse bound {self.text!r}: {e.msg}") from None
        self._check(self.tree)

    def _check(self, node):
        ok = (ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Call, ast.IfExp,
              ast.Compare, ast.BoolOp, ast.operator, ast.unaryop, ast.cmpop, ast.boolop,
              ast.Load)
        for sub in ast.walk(node):
            if not isinstance(sub, ok):
                raise errors.InvalidParams(f"unsupported syntax in {self.text!r}")
            if isinstance(sub, ast.Call):
                if not isinstance(sub.func, ast.Name) or sub.keywords:
                    raise errors.InvalidParams(f"unsupported call in {self.text!r}")
                if sub.func.id not in _FUNCS and sub.func.id != "alpha":
                    raise errors.InvalidParams(f"unknown function {sub.func.id!r}")
            if isinstance(sub, ast.Name) and sub.id not in _NAMES + tuple(_FUNCS) + ("alpha",):
                raise errors.InvalidParams(f"unknown name {sub.id!r}")
            if isinstance(sub, ast.Constant) and not isinstance(sub.value, (int, float)):
                raise errors.InvalidParams(f"unsupported constant {sub.value!r}")

    def __call__(self, j=None, n=None, k=None, c=None, alpha=None):
        env = {"j": j, "n": n, "k": k, "c": c}
        with localcontext() as ctx:
            ctx.prec = PREC
            return self._eval(self.tree, env, alpha)

    def _eval(self, node, env, alpha):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool):
                raise errors.InvalidParams("booleans are not numbers")
            return Fraction(repr(node.value)) if isinstance(node.value, float) else Fraction(node.value)
        if isinstance(node, ast.Name):
            v = env.get(node.id)
            if v is None:
                raise errors.InvalidParams(f"{node.id} is not set for bound {self.text!r}")
            return _num(v)
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env, alpha)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
            raise errors.InvalidParams("unsupported unary operator")
        if isinstance(node, ast.BinOp):
            op = _BIN.get(type(node.op))
            if op is None:
                raise errors.InvalidParams("unsupported operator")
            a, b = self._eval(node.left, env, alpha), self._eval(node.right, env, alpha)
            if isinstance(node.op, ast.Div) and b == 0:
                raise errors.InvalidParams(f"division by zero in {self.text!r}")
            return op(a, b)
        if isinstance(node, ast.Call):
            args = [self._eval(a, env, alpha) for a in node.args]
            if node.func.id == "alpha":
                if alpha is None:
                    raise errors.InvalidParams("alpha(...) used but no priority function given")
                (x,) = args
                if not (isinstance(x, Fraction) and x.denominator == 1):
                    raise errors.InvalidParams("alpha takes an integer rank")
                return Fraction(alpha(int(x)))
            return _FUNCS[node.func.id](*args)
        if isinstance(node, ast.IfExp):
            cond = self._eval(node.test, env, alpha)
            return self._eval(node.body if cond else node.orelse, env, alpha)
        if isinstance(node, ast.Compare):
            left = self._eval(node.left, env, alpha)
            for op, right in zip(node.ops, node.comparators):
                right = self._eval(right, env, alpha)
                if not _CMP[type(op)](_dec(left), _dec(right)):
                    return False
                left = right
            return True
        if isinstance(node, ast.BoolOp):
            vals = (self._eval(v, env, alpha) for v in node.values)
            return all(vals) if isinstance(node.op, ast.And) else any(vals)
        raise errors.InvalidParams(f"unsupported syntax in {self.text!r}")

    def __repr__(self):
        return f"BoundSpec({self.text!r})"


def at_most(value, bound):
    """``value <= bound`` with exact values compared exactly."""
    if value == float("inf"):
        return False
    if isinstance(bound, Fraction):
        return value <= bound
    with localcontext() as ctx:
        ctx.prec = PREC
        return _dec(value) <= bound


_GRID = 2 ** 64


def _round_up(x):
    if isinstance(x, Fraction):
        return x
    with localcontext() as ctx:
        ctx.prec = PREC
        v = int((x * _GRID).to_integral_value(rounding="ROUND_CEILING")) + 1
    return Fraction(v, _GRID)


def priority_function(spec, n):
    """A certified priority function for ranks ``1..n``.

    ``spec`` is ``"default"`` or an expression in ``j``; irrational values are
    rounded up onto a ``2^-64`` grid, which keeps monotonicity and only
    shrinks the certified sum.
    """
    if spec is None or str(spec).strip() == "default":
        return default_alpha(n)
    expr = BoundSpec(spec)

    def alpha(j):
        return _round_up(expr(j=j, n=n))

    return validate_priority_function(alpha, n, spec=str(spec))
