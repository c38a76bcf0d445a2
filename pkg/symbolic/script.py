"""
    Interpreter of the equation script dialect.

    Lines are `sym`, `def` and `out` statements (see docs/script.md).
    Expressions are parsed with the ast module and only integer constants,
    declared names, + - * & | ^ << >> ~, comparisons and the functions
    bit, cat, ite, mask, slt and sle are accepted.
"""

import ast
import operator

from dataclasses import dataclass, field
from typing      import Mapping

from logic.words    import to_signed
from netlist.errors import ParseError, TraceError
from sim.waveform   import Waveform, X


_BINARY = {
    ast.Add    : operator.add,
    ast.Sub    : operator.sub,
    ast.Mult   : operator.mul,
    ast.BitAnd : operator.and_,
    ast.BitOr  : operator.or_,
    ast.BitXor : operator.xor,
    ast.LShift : operator.lshift,
    ast.RShift : operator.rshift,
}

_COMPARE = {
    ast.Eq    : operator.eq,
    ast.NotEq : operator.ne,
    ast.Lt    : operator.lt,
    ast.LtE   : operator.le,
    ast.Gt    : operator.gt,
    ast.GtE   : operator.ge,
}

_FUNCTIONS = {
    'bit'  : lambda x, i: (x >> i) & 1,
    'cat'  : lambda *bits: sum((b & 1) << i for i, b in enumerate(bits)),
    'ite'  : lambda s, t, e: t if s else e,
    'mask' : lambda x, w: x & ((1 << w) - 1),
    'slt'  : lambda a, b, w: int(to_signed(a, w) < to_signed(b, w)),
    'sle'  : lambda a, b, w: int(to_signed(a, w) <= to_signed(b, w)),
}


# Values computed by a script
@dataclass
class ScriptResult:
    words : dict[str, int] = field(default_factory=dict)
    bits  : dict[str, int] = field(default_factory=dict)


# Evaluate a parsed expression over named values
def _eval(node: ast.AST, names: Mapping[str, int], where: str) -> int:
    if isinstance(node, ast.Expression):
        return _eval(node.body, names, where)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in names:
            raise ParseError(f"{where}: undefined name {node.id}")
        return names[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
        return _BINARY[type(node.op)](_eval(node.left, names, where), _eval(node.right, names, where))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.Invert)):
        value = _eval(node.operand, names, where)
        return -value if isinstance(node.op, ast.USub) else ~value
    if isinstance(node, ast.Compare) and len(node.ops) == 1 and type(node.ops[0]) in _COMPARE:
        left = _eval(node.left, names, where)
        right = _eval(node.comparators[0], names, where)
        return int(_COMPARE[type(node.ops[0])](left, right))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        function = _FUNCTIONS.get(node.func.id)
        if function is None:
            raise ParseError(f"{where}: unknown function {node.func.id}")
        args = [_eval(a, names, where) for a in node.args]
        try:
            return int(function(*args))
        except TypeError as e:
            raise ParseError(f"{where}: {node.func.id}: {e}") from e
    raise ParseError(f"{where}: unsupported expression {ast.dump(node)[:60]}")


def _parse(text: str, where: str) -> ast.Expression:
    try:
        return ast.parse(text.strip(), mode='eval')
    except SyntaxError as e:
        raise ParseError(f"{where}: {e.msg}") from e


def _header(words: list[str], where: str, kind: str) -> tuple[str, int, list[str]]:
    if len(words) < 2 or not words[0].isidentifier() or not words[1].isdigit():
        raise ParseError(f"{where}: malformed {kind} statement")
    return words[0], int(words[1]), words[2:]


# Run a script
def run_script(text: str, env: Mapping[str, int]) -> ScriptResult:
    """
    Execute a script.

    @type  text: str
    @param text: The script

    @type  env: dict( str -> int )
    @param env: Value of every bit symbol net@cycle read by `sym` lines

    @rtype:   ScriptResult
    @returns: Word and bit values of the `out` lines

    @raise ParseError: malformed statement, undefined name or forbidden syntax
    """
    names: dict[str, int] = {}
    result = ScriptResult()
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        where = f"line {number}"
        keyword, _, rest = line.partition(' ')
        head, eq, body = rest.partition('=')
        if keyword == 'sym':
            ident, width, bits = _header(rest.split(), where, 'sym')
            if len(bits) != width:
                raise ParseError(f"{where}: {ident} declares {width} bits, lists {len(bits)}")
            value = 0
            for i, b in enumerate(bits):
                if b not in env:
                    raise ParseError(f"{where}: no value for {b}")
                value |= (int(env[b]) & 1) << i
            names[ident] = value
        elif keyword in ('def', 'out') and eq:
            ident, width, bits = _header(head.split(), where, keyword)
            value = _eval(_parse(body, where), names, where) & ((1 << width) - 1)
            names[ident] = value
            if keyword == 'out':
                if bits and len(bits) != width:
                    raise ParseError(f"{where}: {ident} declares {width} bits, lists {len(bits)}")
                result.words[ident] = value
                for i, b in enumerate(bits):
                    result.bits[b] = (value >> i) & 1
        else:
            raise ParseError(f"{where}: unknown statement {keyword!r}")
    return result


# Symbols read by the sym lines of a script
def script_symbols(text: str) -> list[str]:
    out = []
    for raw in text.splitlines():
        words = raw.split('#', 1)[0].split()
        if words and words[0] == 'sym':
            out += words[3:]
    return out


# Run a script with its symbols read from a waveform
def replay_script(text: str, waveform: Waveform) -> ScriptResult:
    env = {}
    for name in script_symbols(text):
        net, _, cycle = name.rpartition('@')
        value = waveform.value(net, int(cycle))
        if value == X:
            raise TraceError(f"symbol {name} is X in the waveform")
        env[name] = value
    return run_script(text, env)
