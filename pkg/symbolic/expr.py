"""
    Expression trees of symbolic equations.

    Leaves are constants and symbols (an endpoint name tagged with a cycle,
    or an intermediate variable v_k). Bit operators work on 1-bit values,
    Word packs bits into an integer (bit 0 first), Bit extracts one bit and
    WordOp is an integer operation over words, masked to its output width.
"""

from dataclasses import dataclass
from typing      import Callable, Iterable, Mapping, Sequence

from analysis.models import (ArithmeticModel, ADDITION, COUNTER, SUBTRACTION, NEGATION,
                             CONST_MUL, COMPARATOR)
from logic.truthtable import int_to_table
from logic.words      import to_signed
from netlist.errors   import ParseError, TraceError


# Base of every node
class Expr:

    @property
    def width(self) -> int:
        return 1

    def __invert__(self):     return not_(self)
    def __and__(self, other): return and_(self, other)
    def __or__(self, other):  return or_(self, other)
    def __xor__(self, other): return xor(self, other)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value : int
    bits  : int = 1

    @property
    def width(self) -> int:
        return self.bits


@dataclass(frozen=True, eq=True)
class Sym(Expr):
    name : str
    bits : int = 1

    @property
    def width(self) -> int:
        return self.bits


@dataclass(frozen=True, eq=True)
class Not(Expr):
    a : Expr


@dataclass(frozen=True, eq=True)
class And(Expr):
    args : tuple[Expr, ...]


@dataclass(frozen=True, eq=True)
class Or(Expr):
    args : tuple[Expr, ...]


@dataclass(frozen=True, eq=True)
class Xor(Expr):
    args : tuple[Expr, ...]


@dataclass(frozen=True, eq=True)
class Ite(Expr):
    s : Expr
    t : Expr
    e : Expr


# Bits packed into an integer, bit 0 first
@dataclass(frozen=True, eq=True)
class Word(Expr):
    items : tuple[Expr, ...]

    @property
    def width(self) -> int:
        return len(self.items)


@dataclass(frozen=True, eq=True)
class Bit(Expr):
    word  : Expr
    index : int


# Integer operation masked to `out` bits, operands are `size` bits wide
@dataclass(frozen=True, eq=True)
class WordOp(Expr):
    op   : str
    args : tuple[Expr, ...]
    size : int
    out  : int

    @property
    def width(self) -> int:
        return self.out


WORD_OPS = ('add', 'sub', 'neg', 'mul', 'mac', 'eq', 'lt', 'le', 'slt', 'sle')

ZERO = Const(0)
ONE  = Const(1)


def _is(e: Expr, value: int) -> bool:
    return isinstance(e, Const) and e.bits == 1 and e.value == value


def not_(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(1 - a.value)
    if isinstance(a, Not):
        return a.a
    return Not(a)


def and_(*args: Expr) -> Expr:
    items = []
    for a in args:
        items += a.args if isinstance(a, And) else [a]
    if any(_is(a, 0) for a in items):
        return ZERO
    items = list(dict.fromkeys(a for a in items if not _is(a, 1)))
    if any(not_(a) in items for a in items):
        return ZERO
    if not items:
        return ONE
    return items[0] if len(items) == 1 else And(tuple(items))


def or_(*args: Expr) -> Expr:
    items = []
    for a in args:
        items += a.args if isinstance(a, Or) else [a]
    if any(_is(a, 1) for a in items):
        return ONE
    items = list(dict.fromkeys(a for a in items if not _is(a, 0)))
    if any(not_(a) in items for a in items):
        return ONE
    if not items:
        return ZERO
    return items[0] if len(items) == 1 else Or(tuple(items))


def xor(*args: Expr) -> Expr:
    flip = 0
    items: list[Expr] = []
    for a in args:
        for b in (a.args if isinstance(a, Xor) else [a]):
            if isinstance(b, Const):
                flip ^= b.value
            elif b in items:
                items.remove(b)
            else:
                items.append(b)
    if not items:
        return Const(flip)
    out = items[0] if len(items) == 1 else Xor(tuple(items))
    return not_(out) if flip else out


def ite(s: Expr, t: Expr, e: Expr) -> Expr:
    if isinstance(s, Const):
        return t if s.value else e
    if t == e:
        return t
    if _is(t, 1) and _is(e, 0):
        return s
    if _is(t, 0) and _is(e, 1):
        return not_(s)
    return Ite(s, t, e)


# Pack bits, a complete in-order slice of one word is the word itself
def word(items: Sequence[Expr]) -> Expr:
    items = tuple(items)
    if items and all(isinstance(b, Bit) for b in items):
        base = items[0].word
        if base.width == len(items) and all(b.word == base and b.index == i for i, b in enumerate(items)):
            return base
    if items and all(isinstance(b, Const) for b in items):
        return Const(sum(b.value << i for i, b in enumerate(items)), len(items))
    return Word(items)


def bit(w: Expr, index: int) -> Expr:
    if isinstance(w, Word):
        return w.items[index]
    if isinstance(w, Const):
        return Const((w.value >> index) & 1)
    if w.width == 1 and index == 0:
        return w
    return Bit(w, index)


def word_op(op: str, args: Sequence[Expr], size: int, out: int) -> Expr:
    if op not in WORD_OPS:
        raise ValueError(f"unknown word operation {op}")
    node = WordOp(op, tuple(args), size, out)
    if all(isinstance(a, Const) for a in args):
        return Const(_apply(op, [a.value for a in args], size, out), out)
    return node


# Word operation realizing an arithmetic model
def model_op(model: ArithmeticModel, operands: Sequence[Expr]) -> Expr:
    ident, w = model.identity, model.width
    out = model.output_width
    if ident in (COUNTER, ADDITION) and model.n is not None:
        return word_op('add', [operands[0], Const(model.n, w)], w, out)
    if ident == ADDITION:
        return word_op('add', operands, w, out)
    if ident == SUBTRACTION:
        return word_op('sub', operands, w, out)
    if ident == NEGATION:
        return word_op('neg', operands, w, out)
    if ident == CONST_MUL:
        return word_op('mul', [Const(model.c, w), operands[0]], w, out)
    if ident == COMPARATOR:
        op = model.relation if model.relation == 'eq' or not model.signed else 's' + model.relation
        return word_op(op, operands, w, 1)
    raise ValueError(f"model {ident} has no word operation")


def _apply(op: str, v: list[int], size: int, out: int) -> int:
    mask, full = (1 << size) - 1, (1 << out) - 1
    if op == 'add':
        return (v[0] + v[1]) & full
    if op == 'sub':
        return (v[0] + (v[1] ^ mask) + 1) & full
    if op == 'neg':
        return (-v[0]) & full
    if op == 'mul':
        return (v[0] * v[1]) & full
    if op == 'mac':
        return (v[0] + v[1] * v[2]) & full
    if op == 'eq':
        return int(v[0] == v[1])
    if op == 'lt':
        return int(v[0] < v[1])
    if op == 'le':
        return int(v[0] <= v[1])
    if op == 'slt':
        return int(to_signed(v[0], size) < to_signed(v[1], size))
    if op == 'sle':
        return int(to_signed(v[0], size) <= to_signed(v[1], size))
    raise ValueError(f"unknown word operation {op}")


# Algebra building expressions, used with netlist.semantics.evaluate_gate
class ExprAlgebra:

    def const(self, value):       return Const(int(value))
    def not_(self, a):            return not_(a)
    def and_(self, a, b):         return and_(a, b)
    def or_(self, a, b):          return or_(a, b)
    def xor(self, a, b):          return xor(a, b)
    def ite(self, s, t, e):       return ite(s, t, e)

    # Shannon expansion over the non-constant inputs, highest input first
    def lut(self, init, inputs):
        table = int_to_table(init, 1 << len(inputs))

        def expand(level: int, index: int) -> Expr:
            if level < 0:
                return Const(int(table[index]))
            v = inputs[level]
            if isinstance(v, Const):
                return expand(level - 1, index | (v.value << level))
            return ite(v, expand(level - 1, index | (1 << level)), expand(level - 1, index))

        return expand(len(inputs) - 1, 0)


# Nodes below a set of roots, children first, each once
def postorder(roots: Iterable[Expr]) -> list[Expr]:
    out, seen = [], set()
    for root in roots:
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                if node not in seen:
                    seen.add(node)
                    out.append(node)
                continue
            if node in seen:
                continue
            stack.append((node, True))
            for child in reversed(children(node)):
                if child not in seen:
                    stack.append((child, False))
    return out


def children(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, Not):
        return (node.a,)
    if isinstance(node, (And, Or, Xor, WordOp)):
        return node.args
    if isinstance(node, Ite):
        return (node.s, node.t, node.e)
    if isinstance(node, Word):
        return node.items
    if isinstance(node, Bit):
        return (node.word,)
    return ()


# Symbol names in first-use order
def symbols(roots: Iterable[Expr]) -> list[str]:
    return list(dict.fromkeys(n.name for n in postorder(roots) if isinstance(n, Sym)))


# Integer value of an expression
def evaluate(expr: Expr, env: Mapping[str, int]) -> int:
    """
    Evaluate an expression.

    @type  expr: Expr
    @param expr: The expression

    @type  env: dict( str -> int )
    @param env: Value of every symbol

    @rtype:   int
    @returns: The value, masked to the expression width

    @raise TraceError: a symbol has no value
    """
    values: dict[Expr, int] = {}
    for node in postorder([expr]):
        values[node] = _value(node, values, env)
    return values[expr]


def _value(node: Expr, values: dict, env: Mapping[str, int]) -> int:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Sym):
        v = env.get(node.name)
        if v is None:
            raise TraceError(f"no value for symbol {node.name}")
        return int(v) & ((1 << node.bits) - 1)
    if isinstance(node, Not):
        return 1 - values[node.a]
    if isinstance(node, And):
        return int(all(values[a] for a in node.args))
    if isinstance(node, Or):
        return int(any(values[a] for a in node.args))
    if isinstance(node, Xor):
        out = 0
        for a in node.args:
            out ^= values[a]
        return out
    if isinstance(node, Ite):
        return values[node.t] if values[node.s] else values[node.e]
    if isinstance(node, Word):
        return sum(values[b] << i for i, b in enumerate(node.items))
    if isinstance(node, Bit):
        return (values[node.word] >> node.index) & 1
    if isinstance(node, WordOp):
        return _apply(node.op, [values[a] for a in node.args], node.size, node.out)
    raise TypeError(f"unknown node {node!r}")


# Script text of an expression
def render(expr: Expr, name: Callable[[Sym], str], bit_of: Mapping[str, tuple[str, int]] | None = None,
           words: Mapping[tuple, str] | None = None) -> str:
    """
    Render an expression in the script dialect.

    @type  expr: Expr
    @param expr: The expression

    @type  name: callable( Sym -> str )
    @param name: Identifier of a symbol

    @type  bit_of: dict( str -> ( str, int ) )
    @param bit_of: Symbols declared as a bit of a word identifier

    @type  words: dict( tuple( str ) -> str )
    @param words: Word identifiers by their bit symbol names, bit 0 first

    @rtype:   str
    @returns: The expression text
    """
    bit_of = bit_of or {}
    words = words or {}
    memo: dict[Expr, str] = {}
    for node in postorder([expr]):
        memo[node] = _render(node, memo, name, bit_of, words)
    return memo[expr]


def _mask(text: str, bits: int) -> str:
    return f"({text} & {hex((1 << bits) - 1)})"


def _render(node: Expr, memo: dict, name, bit_of, words) -> str:
    if isinstance(node, Const):
        return str(node.value) if node.bits == 1 else hex(node.value)
    if isinstance(node, Sym):
        if node.name in bit_of:
            ident, index = bit_of[node.name]
            return f"bit({ident}, {index})"
        return name(node)
    if isinstance(node, Not):
        return f"(1 ^ {memo[node.a]})"
    if isinstance(node, (And, Or, Xor)):
        op = {And: ' & ', Or: ' | ', Xor: ' ^ '}[type(node)]
        return '(' + op.join(memo[a] for a in node.args) + ')'
    if isinstance(node, Ite):
        return f"ite({memo[node.s]}, {memo[node.t]}, {memo[node.e]})"
    if isinstance(node, Word):
        if all(isinstance(b, Sym) for b in node.items):
            key = tuple(b.name for b in node.items)
            if key in words:
                return words[key]
        return 'cat(' + ', '.join(memo[b] for b in node.items) + ')'
    if isinstance(node, Bit):
        return f"bit({memo[node.word]}, {node.index})"
    if isinstance(node, WordOp):
        a = [memo[x] for x in node.args]
        size, out = node.size, node.out
        if node.op == 'add':
            return _mask(f"{a[0]} + {a[1]}", out)
        if node.op == 'sub':
            return _mask(f"{a[0]} + ({a[1]} ^ {hex((1 << size) - 1)}) + 1", out)
        if node.op == 'neg':
            return _mask(f"0 - {a[0]}", out)
        if node.op == 'mul':
            return _mask(f"{a[0]} * {a[1]}", out)
        if node.op == 'mac':
            return _mask(f"{a[0]} + {a[1]} * {a[2]}", out)
        if node.op in ('eq', 'lt', 'le'):
            op = {'eq': '==', 'lt': '<', 'le': '<='}[node.op]
            return f"({a[0]} {op} {a[1]})"
        return f"{node.op}({a[0]}, {a[1]}, {size})"
    raise TypeError(f"unknown node {node!r}")


# JSON tree of an expression
def to_dict(expr: Expr) -> dict:
    memo: dict[Expr, dict] = {}
    for node in postorder([expr]):
        if isinstance(node, Const):
            memo[node] = {'op': 'const', 'value': node.value, 'width': node.bits}
        elif isinstance(node, Sym):
            memo[node] = {'op': 'sym', 'name': node.name, 'width': node.bits}
        elif isinstance(node, Not):
            memo[node] = {'op': 'not', 'args': [memo[node.a]]}
        elif isinstance(node, (And, Or, Xor)):
            memo[node] = {'op': type(node).__name__.lower(), 'args': [memo[a] for a in node.args]}
        elif isinstance(node, Ite):
            memo[node] = {'op': 'ite', 'args': [memo[node.s], memo[node.t], memo[node.e]]}
        elif isinstance(node, Word):
            memo[node] = {'op': 'word', 'args': [memo[b] for b in node.items]}
        elif isinstance(node, Bit):
            memo[node] = {'op': 'bit', 'index': node.index, 'args': [memo[node.word]]}
        else:
            memo[node] = {'op': node.op, 'size': node.size, 'width': node.out,
                          'args': [memo[a] for a in node.args]}
    return memo[expr]


def from_dict(doc: dict) -> Expr:
    op = doc.get('op')
    args = [from_dict(a) for a in doc.get('args', [])]
    if op == 'const':
        return Const(int(doc['value']), int(doc.get('width', 1)))
    if op == 'sym':
        return Sym(doc['name'], int(doc.get('width', 1)))
    if op == 'not':
        return Not(args[0])
    if op in ('and', 'or', 'xor'):
        return {'and': And, 'or': Or, 'xor': Xor}[op](tuple(args))
    if op == 'ite':
        return Ite(*args)
    if op == 'word':
        return Word(tuple(args))
    if op == 'bit':
        return Bit(args[0], int(doc['index']))
    if op in WORD_OPS:
        return WordOp(op, tuple(args), int(doc['size']), int(doc['width']))
    raise ParseError(f"unknown expression node {op!r}")
