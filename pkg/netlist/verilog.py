"""
    Parser for structural Verilog netlists.

    Supported subset: one flattened module with port, input/output and wire
    declarations, cell instantiations with named port connections, inline
    `#(...)` parameters or `defparam`, and `assign` between nets (emitted as
    BUF gates). Behavioral code is rejected.
"""

import re
import logging

from netlist.errors  import ParseError
from netlist.ir      import Netlist, NetSpec, GateSpec, build_netlist, CONST0_NAME, CONST1_NAME
from netlist.library import GateLibrary, GateType


log = logging.getLogger(__name__)

# keywords of behavioral code
BEHAVIORAL = ('always', 'initial', 'reg', 'if', 'case', 'function', 'task', 'generate', 'for', 'while')


# Split a source text into tokens
class TokenReader:

    # construct regex parsers
    def __init__(self) -> None:
        self.pattern_comment = re.compile(r'//[^\n]*|/\*.*?\*/', re.S)
        self.pattern_attrs   = re.compile(r'\(\*.*?\*\)', re.S)
        self.pattern_token   = re.compile(r"""
            (?P<escaped>\\\S+)
          | (?P<literal>\d*\s*'\s*[sS]?[bBhHdDoO]\s*[0-9a-fA-FxXzZ_?]+)
          | (?P<number>\d+)
          | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*)
          | (?P<string>"[^"]*")
          | (?P<punct>[()\[\]{},.#:=;])
          | (?P<space>\s+)
          | (?P<other>.)
        """, re.X)

    # read a text and return the list of (kind, value) tokens
    def read(self, text: str) -> list[tuple[str, str]]:
        text = self.pattern_comment.sub(' ', text)
        text = self.pattern_attrs.sub(' ', text)
        tokens = []
        for found in self.pattern_token.finditer(text):
            kind = found.lastgroup
            if kind == 'space':
                continue
            value = found.group(0)
            if kind == 'escaped':
                kind, value = 'ident', value[1:]
            tokens.append((kind, value))
        return tokens


# Read a sized or unsized Verilog number into (value, width)
def parse_literal(text: str) -> tuple[int, int | None]:
    text = text.replace(' ', '').replace('_', '')
    if "'" not in text:
        return int(text), None
    size, rest = text.split("'")
    rest = rest.lstrip('sS')
    base = {'b': 2, 'h': 16, 'd': 10, 'o': 8}[rest[0].lower()]
    digits = rest[1:]
    if re.search(r'[xXzZ?]', digits):
        raise ParseError(f"unknown bits in literal {text}")
    value = int(digits, base)
    width = int(size) if size else None
    return value, width


# Recursive descent over the token list of one module
class _Parser:

    def __init__(self, tokens: list[tuple[str, str]], library: GateLibrary):
        self.tokens  = tokens
        self.pos     = 0
        self.library = library

        self.nets: dict[str, NetSpec] = {}
        self.buses: dict[str, list[int]] = {}
        self.gates: list[GateSpec] = []
        self.params: dict[str, dict[str, int]] = {}
        self.assigns = 0

    def peek(self, offset: int = 0) -> tuple[str, str] | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.next()
        if tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}")

    def accept(self, value: str) -> bool:
        tok = self.peek()
        if tok is not None and tok[1] == value:
            self.pos += 1
            return True
        return False

    def ident(self) -> str:
        kind, value = self.next()
        if kind != 'ident':
            raise ParseError(f"expected an identifier, found {value!r}")
        return value

    def number(self) -> int:
        kind, value = self.next()
        if kind not in ('number', 'literal'):
            raise ParseError(f"expected a number, found {value!r}")
        return parse_literal(value)[0]

    # Create or get a net
    def net(self, name: str) -> NetSpec:
        spec = self.nets.get(name)
        if spec is None:
            spec = NetSpec(len(self.nets), name)
            self.nets[name] = spec
        return spec

    # Declare a scalar or a bus
    def declare(self, kind: str):
        rng = None
        if self.accept('['):
            msb = self.number()
            self.expect(':')
            lsb = self.number()
            self.expect(']')
            rng = (msb, lsb)
        while True:
            name = self.ident()
            if rng is None:
                names = [name]
            else:
                msb, lsb = rng
                step = -1 if msb >= lsb else 1
                indices = list(range(msb, lsb + step, step))
                self.buses[name] = indices
                names = [f"{name}[{i}]" for i in indices]
            for n in names:
                spec = self.net(n)
                if kind == 'input':
                    spec.global_in = True
                elif kind == 'output':
                    spec.global_out = True
            if not self.accept(','):
                break
            # ANSI headers repeat the direction keyword
            tok = self.peek()
            if tok is not None and tok[1] in ('input', 'output', 'wire', 'inout'):
                break

    # Read a net expression, bits MSB first
    def expression(self) -> list[str | None]:
        kind, value = self.next()
        if value == '{':
            bits = []
            while True:
                bits += self.expression()
                if self.accept('}'):
                    return bits
                self.expect(',')
        if kind in ('literal', 'number'):
            number, width = parse_literal(value)
            width = width or 32
            return [CONST1_NAME if (number >> i) & 1 else CONST0_NAME for i in reversed(range(width))]
        if kind != 'ident':
            raise ParseError(f"unexpected {value!r} in a net expression")
        if self.accept('['):
            msb = self.number()
            if self.accept(':'):
                lsb = self.number()
                self.expect(']')
                step = -1 if msb >= lsb else 1
                return [f"{value}[{i}]" for i in range(msb, lsb + step, step)]
            self.expect(']')
            return [f"{value}[{msb}]"]
        if value in self.buses:
            return [f"{value}[{i}]" for i in self.buses[value]]
        return [value]

    # Read a parameter list #( .KEY(value), ... )
    def parameters(self) -> dict[str, int]:
        params = {}
        self.expect('(')
        while not self.accept(')'):
            self.expect('.')
            key = self.ident()
            self.expect('(')
            kind, value = self.next()
            if kind in ('literal', 'number'):
                params[key] = parse_literal(value)[0]
            self.expect(')')
            self.accept(',')
        return params

    # Read an instantiation
    def instance(self, type_name: str):
        gtype = self.library.type(type_name) if type_name in self.library else None
        if gtype is None:
            raise ParseError(f"unresolved instance type {type_name}")
        params = self.parameters() if self.accept('#') else {}
        name = self.ident()
        self.expect('(')
        pins: dict[str, int] = {}
        while not self.accept(')'):
            self.expect('.')
            port = self.ident()
            self.expect('(')
            bits = [] if self.peek() and self.peek()[1] == ')' else self.expression()
            self.expect(')')
            self.accept(',')
            self.bind(gtype, name, port, bits, pins)
        self.expect(';')
        self.params.setdefault(name, {}).update(params)
        self.gates.append(GateSpec(len(self.gates), name, gtype.name, pins))

    # Bind a port expression to pins of a gate type
    def bind(self, gtype: GateType, inst: str, port: str, bits: list, pins: dict):
        if not bits:
            return
        if gtype.has_pin(port):
            if len(bits) != 1:
                raise ParseError(f"{inst}: port {port} is one bit wide, got {len(bits)}")
            pins[port] = self.net(bits[0]).id
            return
        width = sum(1 for p in gtype.pins if p.name.startswith(port + '['))
        if width == 0:
            raise ParseError(f"{inst}: {gtype.name} has no port {port}")
        if len(bits) > width:
            raise ParseError(f"{inst}: port {port} is {width} bits wide, got {len(bits)}")
        for i, bit in enumerate(reversed(bits)):
            pins[f"{port}[{i}]"] = self.net(bit).id

    # Read `assign lhs = rhs;` as buffers
    def assign(self):
        lhs = self.expression()
        self.expect('=')
        rhs = self.expression()
        if not self.accept(';'):
            raise ParseError("behavioral construct: assign with an expression")
        if len(lhs) != len(rhs):
            rhs = ([CONST0_NAME] * (len(lhs) - len(rhs)) + rhs)[-len(lhs):]
        for dst, src in zip(lhs, rhs):
            pins = {'A': self.net(src).id, 'Y': self.net(dst).id}
            self.gates.append(GateSpec(len(self.gates), f"$assign{self.assigns}", 'BUF', pins))
            self.assigns += 1

    # Read `defparam inst.KEY = value;`
    def defparam(self):
        while True:
            inst = self.ident()
            self.expect('.')
            key = self.ident()
            self.expect('=')
            self.params.setdefault(inst, {})[key] = self.number()
            if not self.accept(','):
                break
        self.expect(';')

    # Read the whole module
    def module(self) -> None:
        self.expect('module')
        self.ident()
        if self.accept('#'):
            self.parameters()
        if self.accept('('):
            while not self.accept(')'):
                tok = self.peek()
                if tok[1] in ('input', 'output'):
                    self.next()
                    self.accept('wire')
                    self.declare(tok[1])
                elif tok[1] == 'inout':
                    raise ParseError("inout ports are not supported")
                else:
                    self.ident()
                    self.accept(',')
        self.expect(';')

        while True:
            kind, value = self.next()
            if value == 'endmodule':
                break
            if value in BEHAVIORAL:
                raise ParseError(f"behavioral construct: {value}")
            if value in ('input', 'output', 'wire'):
                self.accept('wire')
                self.declare(value)
                self.expect(';')
            elif value == 'inout':
                raise ParseError("inout ports are not supported")
            elif value == 'assign':
                self.assign()
            elif value == 'defparam':
                self.defparam()
            elif kind == 'ident':
                self.instance(value)
            else:
                raise ParseError(f"unexpected {value!r}")
        if self.peek() is not None:
            raise ParseError("only one flattened module is supported")


# Parse a structural Verilog netlist
def parse_structural_verilog(text: str, library: GateLibrary) -> Netlist:
    """
    Parse a flattened structural Verilog module.

    Instance and net names are kept as written (escaped identifiers lose
    their leading backslash), bus bits are named `name[i]`.

    @type  text: str
    @param text: The Verilog source

    @type  library: GateLibrary
    @param library: Library resolving the cell types

    @rtype:   Netlist
    @returns: The validated netlist

    @raise ParseError: behavioral construct, unresolved instance type or
                       malformed source
    """
    if library is None:
        raise ParseError("a gate library is required to read Verilog")
    parser = _Parser(TokenReader().read(text), library)
    parser.module()

    # attach parameters to their instances
    by_name = {g.name: g for g in parser.gates}
    for inst, params in parser.params.items():
        gate = by_name.get(inst)
        if gate is None:
            raise ParseError(f"defparam on unknown instance {inst}")
        gtype = library.type(gate.type)
        for key, value in params.items():
            width = gtype.config_keys.get(key)
            if width is None:
                log.debug("verilog.ignored_parameter instance=%s key=%s", inst, key)
                continue
            if value >> width:
                raise ParseError(f"{inst}: bad init width, expected {width}")
            gate.config[key] = value

    return build_netlist(library, parser.gates, list(parser.nets.values()))
