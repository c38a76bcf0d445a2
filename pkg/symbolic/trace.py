"""
    Guided symbolic execution.

    A net is traced back from a cycle through its combinational cone. Nets
    classified as control are replaced by their value in the waveform.
    Registers are crossed at the last clock edge where they captured a
    value (enable or reset active), which strictly decreases the cycle.
    Endpoints stop the walk: global inputs and marked registers become
    symbols `net@cycle`, block RAM read data becomes its recorded value
    (or a symbol), and loop-cut registers become intermediate variables
    v_k defined once per (register, update cycle). Inside a definition,
    loop-cut state is read from the waveform.
"""

import logging

from dataclasses import dataclass, field
from typing      import Callable, Iterable, Sequence

from analysis.arith    import ArithmeticStructure
from analysis.control  import ControlSet
from netlist.errors    import TraceError
from netlist.ir        import Gate, Netlist
from netlist.library   import FF, BRAM, DSP, ENABLE, RESET
from netlist.semantics import evaluate_gate
from sim.waveform      import Waveform, X
from symbolic.expr     import (Expr, Const, Sym, ExprAlgebra, bit, word, word_op, model_op,
                               evaluate, symbols, to_dict)
from symbolic.loops    import break_loops


log = logging.getLogger(__name__)

# endpoint kinds
GLOBAL_INPUT    = 'global-input'
CONSTANT_STORE  = 'constant-store'
MARKED_REGISTER = 'marked-register'
LOOP_CUT        = 'loop-cut'


# Where traces stop
@dataclass
class Endpoints:
    registers : frozenset[int] = frozenset()
    loop_cuts : frozenset[int] = frozenset()

    # Kind of endpoint a net's driver is, None when the trace goes through it
    def kind(self, netlist: Netlist, nid: int) -> str | None:
        net = netlist.nets[nid]
        if net.global_in:
            return GLOBAL_INPUT
        driver = netlist.driver(nid)
        if driver is None:
            return None
        gate = driver[0]
        if gate.id in self.registers:
            return MARKED_REGISTER
        if gate.category == BRAM:
            return CONSTANT_STORE
        if gate.id in self.loop_cuts or gate.category == DSP:
            return LOOP_CUT
        return None


# Intermediate variable of a loop-cut register at one update cycle
@dataclass
class Definition:
    name     : str
    register : int
    cycle    : int
    expr     : Expr

    def to_dict(self, netlist: Netlist) -> dict:
        return {'name': self.name, 'register': netlist.gates[self.register].name,
                'cycle': self.cycle, 'width': self.expr.width, 'expr': to_dict(self.expr)}


# Equation of one net at one cycle
@dataclass
class SymbolicEquation:
    net         : int
    cycle       : int
    expr        : Expr
    definitions : list[str] = field(default_factory=list)

    def target(self, netlist: Netlist) -> str:
        return f"{netlist.nets[self.net].name}@{self.cycle}"

    def to_dict(self, netlist: Netlist) -> dict:
        return {'target': self.target(netlist), 'definitions': self.definitions,
                'symbols': [s for s in symbols([self.expr]) if '@' in s], 'expr': to_dict(self.expr)}


# Equations of several targets with their shared definitions
@dataclass
class TraceResult:
    equations      : list[SymbolicEquation]
    definitions    : list[Definition]
    initial_states : list[str] = field(default_factory=list)

    def to_dict(self, netlist: Netlist) -> dict:
        return {
            'equations'      : [e.to_dict(netlist) for e in self.equations],
            'definitions'    : [d.to_dict(netlist) for d in self.definitions],
            'initial_states' : list(self.initial_states),
        }


# Plan of one (net, cycle, depth) node: keys it needs and how to build it
_Plan = tuple[list[tuple[int, int, int]], Callable[[], Expr]]


# Symbolic back-tracing guided by a waveform
class Tracer:
    """
    Trace nets into equations over endpoint symbols.

    @type  netlist: Netlist
    @param netlist: The netlist the waveform was recorded on

    @type  waveform: Waveform
    @param waveform: Recorded values, read for control nets and captures

    @type  control: ControlSet
    @param control: Nets substituted by their recorded value

    @type  endpoints: Endpoints | None
    @param endpoints: Marked and loop-cut registers, loop cuts found by
                      break_loops when None

    @type  structures: list( ArithmeticStructure )
    @param structures: Verified structures folded into word operations

    @type  symbolize_bram: bool
    @param symbolize_bram: Read data of block RAMs as symbols instead of
                           recorded constants

    @type  unroll: int
    @param unroll: Nesting depth of intermediate variables
    """

    def __init__(self, netlist: Netlist, waveform: Waveform, control: ControlSet,
                 endpoints: Endpoints | None = None,
                 structures: Iterable[ArithmeticStructure] = (),
                 symbolize_bram: bool = False, unroll: int = 1):
        self.netlist   = netlist
        self.waveform  = waveform
        self.control   = control
        if endpoints is None:
            endpoints = Endpoints(loop_cuts=break_loops(netlist))
        self.endpoints = endpoints
        self.symbolize_bram = symbolize_bram
        self.unroll    = max(1, unroll)
        self.algebra   = ExprAlgebra()

        # output net -> (structure, bit index)
        self.folded: dict[int, tuple[ArithmeticStructure, int]] = {}
        for s in structures:
            if s.verified:
                for i, n in enumerate(s.outputs):
                    self.folded.setdefault(n, (s, i))

        self.memo: dict[tuple[int, int, int], Expr] = {}
        self.names: dict[tuple[int, int], str] = {}
        self.definitions: dict[str, Definition] = {}
        self.initial_states: list[str] = []

    # Recorded value of a net
    def read(self, nid: int, t: int) -> int:
        return self.waveform.value(self.netlist.nets[nid].name, t)

    # Recorded value of a pin that steers a capture, X is an error
    def _steer(self, gate: Gate, pin: str, t: int) -> int:
        nid = gate.net(pin)
        c = self.netlist.constant(nid)
        if c is not None:
            return c
        v = self.read(nid, t)
        if v == X:
            raise TraceError(f"control {self.netlist.nets[nid].name} of {gate.name} is X at cycle {t}")
        return v

    def _symbol(self, nid: int, t: int) -> Sym:
        return Sym(f"{self.netlist.nets[nid].name}@{t}")

    # Last edge at or before t where a sequential gate captured, None if none
    def last_update(self, gate: Gate, t: int) -> int | None:
        for e in range(t, 0, -1):
            if self._captures(gate, e - 1):
                return e
        return None

    def _captures(self, gate: Gate, s: int) -> bool:
        if gate.category == FF:
            spec = gate.type.ff
            en = self._steer(gate, spec.enable, s) if spec.enable else 1
            if spec.clear and self._steer(gate, spec.clear, s) == 1:
                return en == 1 or not spec.gated
            return en == 1
        enables = gate.type.pins_with_role(ENABLE)
        if gate.category == BRAM:
            return self._steer(gate, enables[0], s) == 1
        resets = gate.type.pins_with_role(RESET)
        return self._steer(gate, enables[0], s) == 1 or self._steer(gate, resets[0], s) == 1

    # Name of the intermediate variable of a register update, allocated on first use
    def _variable(self, gate: Gate, e: int) -> str:
        key = (gate.id, e)
        if key not in self.names:
            self.names[key] = f"v{len(self.names) + 1}"
        return self.names[key]

    def _define(self, name: str, gate: Gate, e: int, expr: Expr):
        if name not in self.definitions:
            self.definitions[name] = Definition(name, gate.id, e, expr)

    # Work out what a node depends on
    def _plan(self, key: tuple[int, int, int]) -> _Plan:
        nid, t, depth = key
        netlist = self.netlist
        net = netlist.nets[nid]

        if net.constant is not None:
            return [], lambda: Const(net.constant)
        if nid in self.control:
            v = self.read(nid, t)
            if v == X:
                raise TraceError(f"control net {net.name} is X at cycle {t}")
            return [], lambda: Const(v)
        driver = netlist.driver(nid)
        if net.global_in or driver is None:
            return [], lambda: self._symbol(nid, t)

        gate, pin = driver
        if not gate.is_sequential:
            return self._plan_comb(gate, pin, t, depth)
        if gate.id in self.endpoints.registers:
            return [], lambda: self._symbol(nid, t)
        if gate.category == BRAM:
            return self._plan_bram(nid, t)
        if gate.category == DSP:
            return self._plan_mac(gate, pin, t, depth)
        return self._plan_ff(gate, nid, t, depth)

    def _plan_comb(self, gate: Gate, pin: str, t: int, depth: int) -> _Plan:
        out = gate.net(pin)
        fold = self.folded.get(out)
        if fold is not None:
            structure, index = fold
            values = {}
            for n in structure.controls:
                c = self.netlist.constant(n)
                values[n] = c if c is not None else self.read(n, t)
            if any(values == a for a in structure.assignments):
                keys = [[(n, t, depth) for n in op] for op in structure.operands]

                def build_word():
                    operands = [word([self.memo[k] for k in op]) for op in keys]
                    return bit(model_op(structure.model, operands), index)
                return [k for op in keys for k in op], build_word

        keys = {p: (n, t, depth) for p, n in gate.inputs()}

        def build_gate():
            outs = evaluate_gate(gate.type, gate.config, {p: self.memo[k] for p, k in keys.items()}, self.algebra)
            for p, n in gate.outputs():
                if p in outs:
                    self.memo.setdefault((n, t, depth), outs[p])
            return outs[pin]
        return list(keys.values()), build_gate

    def _plan_ff(self, gate: Gate, nid: int, t: int, depth: int) -> _Plan:
        spec = gate.type.ff
        cut = gate.id in self.endpoints.loop_cuts
        if cut and depth >= self.unroll:
            return [], lambda: self._symbol(nid, t)
        e = self.last_update(gate, t)
        if e is None:
            return [], lambda: self._initial(gate, nid)
        cleared = bool(spec.clear) and self._steer(gate, spec.clear, e - 1) == 1
        if cleared:
            value = Const(spec.clear_value)
            if not cut:
                return [], lambda: value
            name = self._variable(gate, e)
            self._define(name, gate, e, value)
            return [], lambda: Sym(name)
        d = (gate.net(spec.data), e - 1, depth + 1 if cut else depth)
        if not cut:
            return [d], lambda: self.memo[d]
        name = self._variable(gate, e)

        def build_variable():
            self._define(name, gate, e, self.memo[d])
            return Sym(name)
        return [d], build_variable

    # Value before the first capture
    def _initial(self, gate: Gate, nid: int) -> Expr:
        if 'INIT' in gate.config:
            return Const(gate.config['INIT'])
        symbol = self._symbol(nid, 0)
        if symbol.name not in self.initial_states:
            self.initial_states.append(symbol.name)
            log.info("trace.initial_state net=%s", self.netlist.nets[nid].name)
        return symbol

    def _plan_bram(self, nid: int, t: int) -> _Plan:
        if self.symbolize_bram:
            return [], lambda: self._symbol(nid, t)
        v = self.read(nid, t)
        if v == X:
            raise TraceError(f"block RAM data {self.netlist.nets[nid].name} is X at cycle {t}")
        return [], lambda: Const(v)

    def _plan_mac(self, gate: Gate, pin: str, t: int, depth: int) -> _Plan:
        a_group, b_group, out_group = gate.type.pin_groups
        index = out_group.pins.index(pin)
        if depth >= self.unroll:
            return [], lambda: self._symbol(gate.net(pin), t)
        e = self.last_update(gate, t)
        if e is None:
            return [], lambda: Const(0)
        name = self._variable(gate, e)
        width = len(out_group.pins)
        if self._steer(gate, gate.type.pins_with_role(RESET)[0], e - 1) == 1:
            self._define(name, gate, e, Const(0, width))
            return [], lambda: bit(Sym(name, width), index)

        s = e - 1
        acc = [(gate.net(p), s, depth + 1) for p in out_group.pins]
        a   = [(gate.net(p), s, depth + 1) for p in a_group.pins]
        b   = [(gate.net(p), s, depth + 1) for p in b_group.pins]

        def build_mac():
            expr = word_op('mac', [word([self.memo[k] for k in acc]), word([self.memo[k] for k in a]),
                                   word([self.memo[k] for k in b])], len(a_group.pins), width)
            self._define(name, gate, e, expr)
            return bit(Sym(name, width), index)
        return acc + a + b, build_mac

    # Expression of a net at a cycle
    def expression(self, nid: int, t: int, depth: int = 0) -> Expr:
        if not 0 <= t < self.waveform.samples:
            raise TraceError(f"cycle {t} outside the waveform (0..{self.waveform.samples - 1})")
        root = (nid, t, depth)
        memo = self.memo
        plans: dict[tuple[int, int, int], _Plan] = {}
        active: set[tuple[int, int, int]] = set()
        stack = [root]
        while stack:
            key = stack[-1]
            if key in memo:
                stack.pop()
                continue
            if key not in plans:
                plans[key] = self._plan(key)
            deps, build = plans[key]
            pending = [k for k in deps if k not in memo]
            if pending:
                if key in active:
                    raise TraceError(f"cycle while tracing {self.netlist.nets[key[0]].name}@{key[1]}")
                active.add(key)
                stack.extend(reversed(pending))
                continue
            memo[key] = build()
            active.discard(key)
            stack.pop()
        return memo[root]

    # Trace one net at one cycle
    def trace(self, net: int | str, cycle: int) -> SymbolicEquation:
        """
        Build the equation of a net at a cycle.

        @type  net: int | str
        @param net: Net id or name

        @type  cycle: int
        @param cycle: Sample index of the waveform

        @rtype:   SymbolicEquation
        @returns: The equation with the intermediate variables it uses

        @raise TraceError: X control value, unknown net or missing waveform net
        """
        nid = self._resolve(net)
        expr = self.expression(nid, cycle)
        return SymbolicEquation(nid, cycle, expr, self._closure([expr]))

    def _resolve(self, net: int | str) -> int:
        if isinstance(net, str):
            found = self.netlist.net_by_name(net)
            if found is None:
                raise TraceError(f"no net {net}")
            return found.id
        return net

    # Intermediate variables used by some expressions, in definition order
    def _closure(self, roots: Sequence[Expr]) -> list[str]:
        used: set[str] = set()
        todo = [s for s in symbols(roots) if s in self.definitions]
        while todo:
            name = todo.pop()
            if name in used:
                continue
            used.add(name)
            todo += [s for s in symbols([self.definitions[name].expr]) if s in self.definitions]
        return sorted(used, key=lambda n: int(n[1:]))

    # All definitions made so far, in numbering order
    def ordered_definitions(self) -> list[Definition]:
        return sorted(self.definitions.values(), key=lambda d: int(d.name[1:]))


# Parse "net@cycle"
def parse_target(text: str) -> tuple[str, int]:
    name, sep, cycle = text.rpartition('@')
    if not sep or not cycle.isdigit():
        raise TraceError(f"target {text!r} is not net@cycle")
    return name, int(cycle)


# Trace a list of targets
def trace_targets(netlist: Netlist, waveform: Waveform, control: ControlSet,
                  targets: Iterable[str] | None = None, endpoints: Endpoints | None = None,
                  structures: Iterable[ArithmeticStructure] = (),
                  symbolize_bram: bool = False, unroll: int = 1) -> TraceResult:
    """
    Trace targets given as net@cycle, every global output at the last
    sample when none are given.
    """
    tracer = Tracer(netlist, waveform, control, endpoints, structures, symbolize_bram, unroll)
    if targets is None:
        last = waveform.samples - 1
        pairs = [(n, last) for n in netlist.global_outputs]
    else:
        pairs = [(tracer._resolve(name), cycle) for name, cycle in map(parse_target, targets)]
    equations = [tracer.trace(n, t) for n, t in pairs]
    log.info("trace.done targets=%d definitions=%d", len(equations), len(tracer.definitions))
    return TraceResult(equations, tracer.ordered_definitions(), list(tracer.initial_states))


# Trace one net at one cycle
def trace(netlist: Netlist, net: int | str, cycle: int, waveform: Waveform, control: ControlSet,
          endpoints: Endpoints | None = None, **options) -> tuple[SymbolicEquation, list[Definition]]:
    tracer = Tracer(netlist, waveform, control, endpoints, **options)
    equation = tracer.trace(net, cycle)
    return equation, [tracer.definitions[n] for n in equation.definitions]


# Value of endpoint symbols net@cycle read from a waveform
def waveform_env(waveform: Waveform, names: Iterable[str]) -> dict[str, int]:
    env = {}
    for name in names:
        net, cycle = parse_target(name)
        env[name] = waveform.value(net, cycle)
    return env


# Evaluate an equation with its endpoints read from a waveform
def replay(equation: SymbolicEquation, definitions: Iterable[Definition], waveform: Waveform) -> int:
    """
    Replay an equation.

    @rtype:   int
    @returns: The traced value

    @raise TraceError: a needed symbol is X in the waveform
    """
    defs = {d.name: d for d in definitions}
    env: dict[str, int] = {}
    roots = [equation.expr] + [defs[n].expr for n in equation.definitions]
    for name, value in waveform_env(waveform, [s for s in symbols(roots) if '@' in s]).items():
        if value == X:
            raise TraceError(f"symbol {name} is X in the waveform")
        env[name] = value
    for d in definition_order([defs[n] for n in equation.definitions]):
        env[d.name] = evaluate(d.expr, env)
    return evaluate(equation.expr, env)


# Definitions ordered so that every variable is defined before its use
def definition_order(definitions: Iterable[Definition]) -> list[Definition]:
    defs = {d.name: d for d in definitions}
    order: list[Definition] = []
    done: set[str] = set()
    for root in sorted(defs, key=lambda n: int(n[1:])):
        stack = [(root, False)]
        while stack:
            name, expanded = stack.pop()
            if name in done:
                continue
            if expanded:
                done.add(name)
                order.append(defs[name])
                continue
            stack.append((name, True))
            uses = [s for s in symbols([defs[name].expr]) if s in defs and s not in done]
            stack += [(s, False) for s in reversed(uses)]
    return order
