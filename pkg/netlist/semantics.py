"""
    Boolean and three-valued semantics of the combinational gate types.

    The semantics of each gate function is written once against an algebra
    (const, not_, and_, or_, xor, ite, lut). logic.boolfunc.FuncAlgebra
    builds BoolFunc expressions, TernaryAlgebra evaluates over {0, 1, X}.
"""

import itertools

from typing import Callable, Hashable, Iterable, Mapping

from logic.boolfunc   import BoolFunc, FuncAlgebra, var, const
from logic.truthtable import int_to_table
from netlist.errors   import BuildError
from netlist.ir       import Netlist
from netlist.library  import GateType


# Unknown value of the three-valued domain
X = 2


# Algebra over {0, 1, X}
class TernaryAlgebra:

    def const(self, value):
        return value

    def not_(self, a):
        return X if a == X else 1 - a

    def and_(self, a, b):
        if a == 0 or b == 0:
            return 0
        if a == 1 and b == 1:
            return 1
        return X

    def or_(self, a, b):
        if a == 1 or b == 1:
            return 1
        if a == 0 and b == 0:
            return 0
        return X

    def xor(self, a, b):
        if a == X or b == X:
            return X
        return a ^ b

    def ite(self, s, t, e):
        if s == 1:
            return t
        if s == 0:
            return e
        return t if t == e else X

    def lut(self, init, inputs):
        bits = _lut_bits(init, len(inputs))
        unknown = [i for i, v in enumerate(inputs) if v == X]
        base = sum((v & 1) << i for i, v in enumerate(inputs) if v != X)
        if not unknown:
            return int(bits[base])
        seen = set()
        for combo in itertools.product((0, 1), repeat=len(unknown)):
            index = base
            for i, v in zip(unknown, combo):
                index |= v << i
            seen.add(int(bits[index]))
            if len(seen) > 1:
                return X
        return seen.pop()


_lut_cache: dict[tuple[int, int], object] = {}


def _lut_bits(init: int, k: int):
    key = (init, k)
    bits = _lut_cache.get(key)
    if bits is None:
        bits = int_to_table(init, 1 << k)
        _lut_cache[key] = bits
    return bits


def _maj(algebra, a, b, c):
    return algebra.or_(algebra.and_(a, b), algebra.and_(c, algebra.xor(a, b)))


# Evaluate the outputs of a combinational gate
def evaluate_gate(gtype: GateType, config: Mapping[str, int], inputs: Mapping[str, object],
                  algebra) -> dict[str, object]:
    """
    Compute the output pins of a combinational gate.

    @type  gtype: GateType
    @param gtype: The gate type

    @type  config: dict( str -> int )
    @param config: The gate configuration (LUT init)

    @type  inputs: dict( str -> value )
    @param inputs: Value of every input pin in the algebra's domain

    @type  algebra: object
    @param algebra: FuncAlgebra, TernaryAlgebra or compatible

    @rtype:   dict( str -> value )
    @returns: Value of every output pin
    """
    f = gtype.function
    if f == 'const0':
        return {'Y': algebra.const(0)}
    if f == 'const1':
        return {'Y': algebra.const(1)}
    if f == 'buf':
        return {'Y': inputs['A']}
    if f == 'inv':
        return {'Y': algebra.not_(inputs['A'])}
    if f == 'and':
        return {'Y': algebra.and_(inputs['A'], inputs['B'])}
    if f == 'or':
        return {'Y': algebra.or_(inputs['A'], inputs['B'])}
    if f == 'xor':
        return {'Y': algebra.xor(inputs['A'], inputs['B'])}
    if f == 'xnor':
        return {'Y': algebra.not_(algebra.xor(inputs['A'], inputs['B']))}
    if f == 'mux':
        return {'Y': algebra.ite(inputs['S'], inputs['A'], inputs['B'])}
    if f == 'lut':
        key = next(iter(gtype.config_keys))
        return {'O': algebra.lut(config[key], [inputs[p] for p in gtype.lut_inputs])}
    if f == 'carry':
        return {'CO': _maj(algebra, inputs['I0'], inputs['I1'], inputs['CI'])}
    if f == 'carry4':
        out = {}
        carry = algebra.or_(inputs['CI'], inputs['CYINIT'])
        for i in range(4):
            s = inputs[f'S[{i}]']
            out[f'O[{i}]'] = algebra.xor(s, carry)
            carry = algebra.ite(s, carry, inputs[f'DI[{i}]'])
            out[f'CO[{i}]'] = carry
        return out
    raise BuildError(f"{gtype.name} has no combinational semantics")


# Build Boolean functions of nets over cone boundaries
class FunctionBuilder:
    """
    Derive BoolFunc expressions of nets.

    A net is a variable when it is a cone boundary (global input, sequential
    output, dangling), when `stop` accepts it, or when `leaves` assigns it.
    Constant nets become constants. Results are memoized per builder.
    """

    def __init__(self,
        netlist : Netlist,
        stop    : Callable[[int], bool] | None = None,
        leaves  : Mapping[int, BoolFunc] | None = None,
        gates   : Iterable[int] | None = None):
        self.netlist = netlist
        self.stop    = stop
        self.leaves  = dict(leaves or {})
        self.gates   = frozenset(gates) if gates is not None else None
        self.algebra = FuncAlgebra()
        self.memo: dict[int, BoolFunc] = {}

    # Is a net a variable of the functions built
    def is_leaf(self, nid: int) -> bool:
        if nid in self.leaves:
            return True
        if self.netlist.is_cone_boundary(nid):
            return True
        if self.stop is not None and self.stop(nid):
            return True
        if self.gates is not None:
            return self.netlist.nets[nid].sources[0][0] not in self.gates
        return False

    def _leaf(self, nid: int) -> BoolFunc:
        if nid in self.leaves:
            return self.leaves[nid]
        c = self.netlist.constant(nid)
        if c is not None:
            return const(c)
        return var(nid)

    # Function of one net
    def function(self, nid: int) -> BoolFunc:
        memo = self.memo
        if nid in memo:
            return memo[nid]
        netlist = self.netlist
        stack = [nid]
        active: set[int] = set()
        while stack:
            n = stack[-1]
            if n in memo:
                stack.pop()
                continue
            if self.is_leaf(n):
                memo[n] = self._leaf(n)
                stack.pop()
                continue
            gate = netlist.gates[netlist.nets[n].sources[0][0]]
            pending = [src for _, src in gate.inputs() if src not in memo]
            if pending:
                if n in active:
                    raise BuildError(f"combinational cycle through gate {gate.name}")
                active.add(n)
                stack.extend(pending)
                continue
            values = evaluate_gate(gate.type, gate.config,
                                   {p: memo[src] for p, src in gate.inputs()}, self.algebra)
            for pin, out in gate.outputs():
                if pin in values:
                    memo.setdefault(out, values[pin])
            active.discard(n)
            stack.pop()
        return memo[nid]

    # Functions of several nets
    def functions(self, nids: Iterable[int]) -> list[BoolFunc]:
        return [self.function(n) for n in nids]


# Evaluate a set of nets on concrete cone-input values
def evaluate_nets(netlist: Netlist, nids: Iterable[int], values: Mapping[Hashable, int]) -> dict[int, int]:
    builder = FunctionBuilder(netlist)
    return {n: builder.function(n).evaluate(values) for n in nids}
