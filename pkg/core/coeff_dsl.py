"""
Coefficient Expression Module
Parses, prints and evaluates arithmetic expressions in t, x, y used for the
carrying capacity, growth rate and initial densities
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import numpy as np

from core.errors import (
    CoefficientError,
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from core.grid import Grid, ScalarField

logger = logging.getLogger(__name__)

VARIABLES = ("t", "x", "y")
CONSTANTS = {"pi": float(np.pi)}
FUNCTIONS = {"cos": np.cos, "sin": np.sin, "exp": np.exp}

# Integer exponents up to this size are expanded into repeated products
MAX_EXPANDED_POWER = 64

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPERATORS = "+-*/^()"

ATOM_START = frozenset({"number", "pi", "t", "x", "y", "cos", "sin", "exp", "(", "-"})


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Constant:
    name: str


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Negate:
    operand: "Node"


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Number, Constant, Variable, Negate, BinaryOp, Call]


@dataclass(frozen=True)
class Token:
    kind: str      # 'number', 'ident', an operator character, or 'end'
    text: str
    offset: int    # byte offset into the UTF-8 source


def tokenize(src: str) -> List[Token]:
    """Split expression text into tokens carrying UTF-8 byte offsets"""
    tokens = []
    pos = 0
    byte_pos = 0
    while pos < len(src):
        ch = src[pos]
        if ch.isspace():
            pos += 1
            byte_pos += len(ch.encode("utf-8"))
            continue

        number = _NUMBER.match(src, pos)
        ident = _IDENT.match(src, pos)
        if number:
            text = number.group()
            if np.isinf(float(text)):
                raise ExpressionSyntaxError(f"Number {text!r} overflows a double", byte_pos)
            tokens.append(Token("number", text, byte_pos))
        elif ident:
            text = ident.group()
            tokens.append(Token("ident", text, byte_pos))
        elif ch in _OPERATORS:
            text = ch
            tokens.append(Token(ch, ch, byte_pos))
        else:
            raise ExpressionSyntaxError(f"Unexpected character {ch!r}", byte_pos, ATOM_START)

        pos += len(text)
        byte_pos += len(text.encode("utf-8"))

    tokens.append(Token("end", "", byte_pos))
    return tokens


class _Parser:
    """
    Recursive descent over

        expr  := term (('+'|'-') term)*
        term  := unary (('*'|'/') unary)*
        unary := '-' unary | power
        power := atom ('^' unary)?
        atom  := number | 'pi' | 't' | 'x' | 'y' | func '(' expr ')' | '(' expr ')'

    '^' is right-associative and binds tighter than unary minus.
    """

    def __init__(self, src: str):
        self.tokens = tokenize(src)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str) -> Token:
        if self.current.kind != kind:
            self.fail(frozenset({kind}))
        return self.advance()

    def fail(self, expected: FrozenSet[str]):
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExpressionSyntaxError(f"Unexpected {found}", token.offset, expected)

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            self.fail(frozenset({"+", "-", "*", "/", "^", "end"}))
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.current.kind == "-":
            self.advance()
            return Negate(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.current.kind == "^":
            self.advance()
            return BinaryOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if token.kind == "ident":
            self.advance()
            name = token.text
            if name in VARIABLES:
                return Variable(name)
            if name in CONSTANTS:
                return Constant(name)
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            raise UnknownIdentifierError(name, token.offset)
        self.fail(ATOM_START - {"-"})


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _first_index(mask) -> Optional[int]:
    mask = np.asarray(mask)
    if mask.ndim == 0:
        return None
    return int(np.argmax(mask.ravel()))


def _integer_power(base, k: int):
    result = np.ones_like(base, dtype=float) if np.ndim(base) else 1.0
    for _ in range(abs(k)):
        result = result * base
    if k < 0:
        if np.any(result == 0):
            raise ExpressionDomainError("Negative power of zero", _first_index(result == 0))
        result = 1.0 / result
    return result


def _power(base, exponent):
    exponent_values = np.unique(np.asarray(exponent, dtype=float))
    if exponent_values.size == 1:
        k = float(exponent_values[0])
        if k.is_integer() and abs(k) <= MAX_EXPANDED_POWER:
            return _integer_power(base, int(k))

    integral = np.equal(np.mod(exponent, 1.0), 0.0)
    bad = np.logical_and(~integral, np.less_equal(base, 0.0))
    if np.any(bad):
        raise ExpressionDomainError("Non-integer power of a non-positive base", _first_index(bad))
    safe_base = np.where(np.greater(base, 0.0), base, 1.0)
    general = np.exp(exponent * np.log(safe_base))
    return np.where(integral, np.power(base, np.where(integral, exponent, 0.0)), general)


def _evaluate(node: Node, env: Dict[str, object]):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Constant):
        return CONSTANTS[node.name]
    if isinstance(node, Variable):
        return env[node.name]
    if isinstance(node, Negate):
        return -_evaluate(node.operand, env)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_evaluate(node.arg, env))

    left = _evaluate(node.left, env)
    right = _evaluate(node.right, env)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        zero = np.equal(right, 0.0)
        if np.any(zero):
            raise ExpressionDomainError("Division by zero", _first_index(zero))
        return left / right
    return _power(left, right)


def _to_source(node: Node) -> str:
    if isinstance(node, Number):
        return repr(node.value)
    if isinstance(node, (Constant, Variable)):
        return node.name
    if isinstance(node, Negate):
        return f"(-{_to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({_to_source(node.arg)})"
    return f"({_to_source(node.left)} {node.op} {_to_source(node.right)})"


def _variables(node: Node) -> FrozenSet[str]:
    if isinstance(node, Variable):
        return frozenset({node.name})
    if isinstance(node, Negate):
        return _variables(node.operand)
    if isinstance(node, Call):
        return _variables(node.arg)
    if isinstance(node, BinaryOp):
        return _variables(node.left) | _variables(node.right)
    return frozenset()


@dataclass(frozen=True)
class CoeffExpr:
    """Parsed coefficient expression; equality compares trees, not text"""
    root: Node
    source: str = field(default="", compare=False)

    @property
    def variables(self) -> FrozenSet[str]:
        return _variables(self.root)

    @property
    def is_time_dependent(self) -> bool:
        return "t" in self.variables

    def to_source(self) -> str:
        """Fully parenthesized text that parses back to the same tree"""
        return _to_source(self.root)

    def evaluate(self, t: float, x: float, y: float) -> float:
        with np.errstate(all="ignore"):
            value = float(_evaluate(self.root, {"t": float(t), "x": float(x), "y": float(y)}))
        if not np.isfinite(value):
            raise ExpressionDomainError(f"Non-finite value of '{self}'")
        return value

    def evaluate_array(self, t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            values = _evaluate(self.root, {"t": float(t), "x": x, "y": y})
        values = np.broadcast_to(np.asarray(values, dtype=float), np.shape(x))
        finite = np.isfinite(values)
        if not np.all(finite):
            raise ExpressionDomainError(f"Non-finite value of '{self}'", _first_index(~finite))
        return values

    def __str__(self) -> str:
        return self.source or self.to_source()


def parse(src: str) -> CoeffExpr:
    """
    Parse expression text

    Args:
        src: Expression such as "2.1 + cos(pi*x)*cos(pi*y)"

    Returns:
        CoeffExpr tree

    Raises:
        ExpressionSyntaxError: malformed text (byte offset and expected tokens)
        UnknownIdentifierError: identifier outside {t, x, y, pi, cos, sin, exp}
    """
    return CoeffExpr(_Parser(src).parse(), source=src)


def evaluate(e: CoeffExpr, t: float, x: float, y: float) -> float:
    """Evaluate an expression at a single point"""
    return e.evaluate(t, x, y)


def sample(e: CoeffExpr, g: Grid, t: float) -> ScalarField:
    """Field with values[i + j·n] = e(t, i·h, j·h)"""
    x, y = g.coordinates
    return ScalarField(g, e.evaluate_array(t, x, y))


@dataclass(frozen=True)
class CoefficientSet:
    """Carrying capacity, growth rate and initial densities of one system"""
    K: CoeffExpr
    r: CoeffExpr
    u0: CoeffExpr
    v0: CoeffExpr

    @classmethod
    def from_strings(cls, K: str, r: str, u0: str, v0: str) -> "CoefficientSet":
        return cls(K=parse(K), r=parse(r), u0=parse(u0), v0=parse(v0))

    def to_strings(self) -> Dict[str, str]:
        return {name: str(getattr(self, name)) for name in ("K", "r", "u0", "v0")}

    @property
    def is_stationary(self) -> bool:
        """True when neither K nor r depends on t"""
        return not (self.K.is_time_dependent or self.r.is_time_dependent)

    def sample_K(self, grid: Grid, t: float) -> ScalarField:
        K = sample(self.K, grid, t)
        if K.min() <= 0.0:
            index = int(np.argmin(K.values))
            raise CoefficientError(
                f"Carrying capacity K must be positive; K = {K.min():.6g} at vertex {index}, t = {t:.6g}"
            )
        return K

    def sample_r(self, grid: Grid, t: float) -> ScalarField:
        r = sample(self.r, grid, t)
        if r.min() < 0.0:
            index = int(np.argmin(r.values))
            raise CoefficientError(
                f"Growth rate r must be non-negative; r = {r.min():.6g} at vertex {index}, t = {t:.6g}"
            )
        return r

    def sample_initial(self, grid: Grid) -> Tuple[ScalarField, ScalarField]:
        fields = []
        for name in ("u0", "v0"):
            values = sample(getattr(self, name), grid, 0.0)
            if values.min() < 0.0:
                raise CoefficientError(f"Initial density {name} must be non-negative; min = {values.min():.6g}")
            fields.append(values)
        return fields[0], fields[1]

    def check(self, grid: Grid, t: float = 0.0) -> None:
        """Validate signs at time t and warn when r vanishes somewhere"""
        self.sample_K(grid, t)
        r = self.sample_r(grid, t)
        self.sample_initial(grid)
        if r.min() == 0.0:
            logger.warning(
                f"Growth rate r = {self.r} vanishes at {int(np.sum(r.values == 0.0))} vertices; "
                "strict positivity of r is not guaranteed"
            )
