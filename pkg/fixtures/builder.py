"""
    Netlist construction helpers mapping word-level structures onto the
    primitives of one architecture library, the way a synthesizer packs
    them: sum logic into LUTs, carries into the carry primitive, registers
    into the flip-flop variant matching their enable and reset.

    Gate and net ids are permuted under a seed when the netlist is built.
"""

import numpy as np

from typing import Callable, Sequence

from netlist.errors  import BuildError, ConfigError
from netlist.ir      import CONST0_NAME, CONST1_NAME, GateSpec, NetSpec, Netlist, build_netlist
from netlist.labels  import GroundTruth
from netlist.library import GateLibrary


ARCHITECTURES = ('ice40-like', 'x7-like')

# A net with an optional inversion, as read by a structure
Literal = tuple[int, bool]


def lit(nid: int, inverted: bool = False) -> Literal:
    return (nid, inverted)


# Incremental netlist description with ground truth
class NetlistBuilder:

    def __init__(self, architecture: str, seed: int = 0):
        if architecture not in ARCHITECTURES:
            raise ConfigError(f"unsupported architecture {architecture}")
        self.library = GateLibrary.get(architecture)
        self.arch    = architecture
        self.seed    = seed
        self.nets: list[NetSpec] = []
        self.gates: list[GateSpec] = []
        self.truth = GroundTruth()
        self.const0 = self.net(CONST0_NAME)
        self.const1 = self.net(CONST1_NAME)
        self._clock: int | None = None

    # Nets

    def net(self, name: str, global_in: bool = False, global_out: bool = False) -> int:
        nid = len(self.nets)
        self.nets.append(NetSpec(nid, name, global_in, global_out))
        return nid

    def const(self, value: int) -> int:
        return self.const1 if value else self.const0

    def constant(self, nid: int) -> int | None:
        return {self.const0: 0, self.const1: 1}.get(nid)

    def name(self, nid: int) -> str:
        return self.nets[nid].name

    def input(self, name: str) -> int:
        return self.net(name, global_in=True)

    def inputs(self, base: str, width: int) -> list[int]:
        return [self.input(f"{base}[{i}]") for i in range(width)]

    def output(self, nid: int) -> int:
        self.nets[nid].global_out = True
        return nid

    def wires(self, base: str, width: int, global_out: bool = False) -> list[int]:
        return [self.net(f"{base}[{i}]", global_out=global_out) for i in range(width)]

    @property
    def clock(self) -> int:
        if self._clock is None:
            self._clock = self.input('clk')
        return self._clock

    # Gates

    def gate(self, type_name: str, name: str, pins: dict[str, int], config: dict[str, int] | None = None) -> int:
        gid = len(self.gates)
        self.gates.append(GateSpec(gid, name, type_name, dict(pins), dict(config or {})))
        return gid

    # A LUT computing function(*input bits) into out
    def lut(self, name: str, inputs: Sequence[int], function: Callable[..., int], out: int) -> int:
        """
        Pack a function into one LUT.

        @type  inputs: list( int )
        @param inputs: Nets read by I0, I1, ... in order

        @type  function: callable
        @param function: Bit function of the inputs, I0 first

        @raise BuildError: more inputs than the LUT of the library has
        """
        k = len(inputs)
        if self.arch == 'ice40-like':
            if k > 4:
                raise BuildError(f"{name}: {k} inputs do not fit SB_LUT4")
            size, type_name, key = 4, 'SB_LUT4', 'LUT_INIT'
        else:
            if not 1 <= k <= 6:
                raise BuildError(f"{name}: {k} inputs do not fit a LUT")
            size, type_name, key = k, f"LUT{k}", 'INIT'
        init = 0
        for index in range(1 << size):
            bits = [(index >> j) & 1 for j in range(k)]
            init |= (function(*bits) & 1) << index
        pins = {f"I{j}": (inputs[j] if j < k else self.const0) for j in range(size)}
        pins['O'] = out
        return self.gate(type_name, name, pins, {key: init})

    # Net carrying the value of a literal, through an inverter LUT when needed
    def physical(self, literal: Literal, name: str) -> int:
        nid, inverted = literal
        if not inverted:
            return nid
        value = self.constant(nid)
        if value is not None:
            return self.const(1 - value)
        out = self.net(f"{name}_n")
        self.lut(f"{name}_inv", [nid], lambda a: 1 - a, out)
        return out

    # A flip-flop with optional enable and synchronous reset
    def flipflop(self, name: str, d: int, q: int, enable: int | None = None,
                 reset: int | None = None, init: int = 0) -> int:
        if self.arch == 'ice40-like':
            pins = {'C': self.clock, 'D': d, 'Q': q}
            type_name = 'SB_DFF'
            if enable is not None:
                type_name += 'E'
                pins['E'] = enable
            if reset is not None:
                type_name += 'SR'
                pins['R'] = reset
            return self.gate(type_name, name, pins)
        pins = {'C': self.clock, 'CE': enable if enable is not None else self.const1,
                'R': reset if reset is not None else self.const0, 'D': d, 'Q': q}
        return self.gate('FDRE', name, pins, {'INIT': init})

    # A labelled register word, Q nets named base[i]
    def register(self, base: str, d: Sequence[int], enable: int | None = None,
                 reset: int | None = None, outputs: bool = False) -> list[int]:
        q = self.wires(base, len(d), global_out=outputs)
        order = self.truth.bit_orders.setdefault(base, {})
        for i, (dn, qn) in enumerate(zip(d, q)):
            name = f"{base}_reg[{i}]"
            self.flipflop(name, dn, qn, enable, reset)
            self.truth.labels[name] = base
            order[name] = i
        if len(d) < 2:
            del self.truth.bit_orders[base]
        return q

    # Ripple-carry addition of two literal words with a constant carry-in
    def carry_add(self, prefix: str, xs: Sequence[Literal], ys: Sequence[Literal], cin: int,
                  sums: Sequence[int] | None, cout: int | None = None, clear: int | None = None):
        """
        Map x + y + cin onto the carry primitive of the architecture.

        x is the first operand: it feeds I0 of SB_CARRY and DI of CARRY4.
        Inversions are folded into the sum LUTs and realized by inverter
        LUTs where the carry primitive reads the operand.

        @type  sums: list( int ) | None
        @param sums: Nets of the sum bits, None when only the carry is used

        @type  cout: int | None
        @param cout: Net of the carry out of the top bit

        @type  clear: int | None
        @param clear: Net forcing every sum bit to 0
        """
        if len(xs) != len(ys):
            raise BuildError(f"{prefix}: operand widths differ")
        if self.arch == 'ice40-like':
            self._ice40_add(prefix, xs, ys, cin, sums, cout, clear)
        else:
            self._x7_add(prefix, xs, ys, cin, sums, cout, clear)

    def _ice40_add(self, prefix, xs, ys, cin, sums, cout, clear):
        width = len(xs)
        carry = self.const(cin)
        for i in range(width):
            x = self.physical(xs[i], f"{prefix}_x[{i}]")
            y = self.physical(ys[i], f"{prefix}_y[{i}]")
            if i == width - 1:
                nxt = cout if cout is not None else self.net(f"{prefix}_co")
            else:
                nxt = self.net(f"{prefix}_c[{i + 1}]")
            self.gate('SB_CARRY', f"{prefix}_carry[{i}]", {'I0': x, 'I1': y, 'CI': carry, 'CO': nxt})
            if sums is not None:
                self.lut(f"{prefix}_sum[{i}]", *self._sum_function(xs[i], ys[i], carry, clear), sums[i])
            carry = nxt

    def _x7_add(self, prefix, xs, ys, cin, sums, cout, clear):
        width = len(xs)
        blocks = (width + 3) // 4
        ci, cyinit = self.const0, self.const(cin)
        for k in range(blocks):
            pins = {'CI': ci, 'CYINIT': cyinit}
            for j in range(4):
                i = 4 * k + j
                if i >= width:
                    pins[f"S[{j}]"] = pins[f"DI[{j}]"] = self.const0
                    continue
                pins[f"S[{j}]"] = self._propagate(f"{prefix}_s[{i}]", xs[i], ys[i])
                pins[f"DI[{j}]"] = self.physical(xs[i], f"{prefix}_di[{i}]")
                if sums is not None:
                    if clear is None:
                        pins[f"O[{j}]"] = sums[i]
                    else:
                        o = self.net(f"{prefix}_o[{i}]")
                        pins[f"O[{j}]"] = o
                        self.lut(f"{prefix}_clr[{i}]", [o, clear], lambda a, r: 0 if r else a, sums[i])
                if i == width - 1 and cout is not None:
                    pins[f"CO[{j}]"] = cout
            if k < blocks - 1:
                ci = pins['CO[3]'] = self.net(f"{prefix}_co[{k}]")
                cyinit = self.const0
            self.gate('CARRY4', f"{prefix}_carry[{k}]", pins)

    # LUT inputs and function of one sum bit
    def _sum_function(self, x: Literal, y: Literal, carry: int, clear: int | None):
        (xn, xi), (yn, yi) = x, y
        inputs = [xn, yn, carry] + ([clear] if clear is not None else [])

        def function(a, b, c, r=0):
            return 0 if r else (a ^ xi) ^ (b ^ yi) ^ c
        return inputs, function

    # Propagate signal x ^ y of one CARRY4 position
    def _propagate(self, name: str, x: Literal, y: Literal) -> int:
        (xn, xi), (yn, yi) = x, y
        xc, yc = self.constant(xn), self.constant(yn)
        if xc is not None and yc is not None:
            return self.const((xc ^ xi) ^ (yc ^ yi))
        out = self.net(name)
        if xc is not None:
            self.lut(f"{name}_lut", [yn], lambda b: (b ^ yi) ^ (xc ^ xi), out)
        elif yc is not None:
            self.lut(f"{name}_lut", [xn], lambda a: (a ^ xi) ^ (yc ^ yi), out)
        else:
            self.lut(f"{name}_lut", [xn, yn], lambda a, b: (a ^ xi) ^ (b ^ yi), out)
        return out

    # Bitwise select: out = sel ? a : b
    def word_mux(self, prefix: str, sel: int, a: Sequence[int], b: Sequence[int], out: Sequence[int]):
        for i, (an, bn, on) in enumerate(zip(a, b, out)):
            self.lut(f"{prefix}_mux[{i}]", [an, bn, sel], lambda x, y, s: x if s else y, on)

    # Record an intended arithmetic structure
    def arithmetic(self, name: str, model: dict, operands: Sequence[Sequence[int]], outputs: Sequence[int]):
        entry = {'name': name, **model,
                 'operands': [[self.name(n) for n in op] for op in operands],
                 'outputs' : [self.name(n) for n in outputs]}
        self.truth.arithmetic.append(entry)

    # Validate and permute ids
    def build(self) -> Netlist:
        rng = np.random.default_rng(self.seed)
        net_ids = rng.permutation(len(self.nets))
        gate_ids = rng.permutation(len(self.gates))
        nets = [NetSpec(int(net_ids[n.id]), n.name, n.global_in, n.global_out) for n in self.nets]
        gates = [GateSpec(int(gate_ids[g.id]), g.name, g.type,
                          {p: int(net_ids[n]) for p, n in g.pins.items()}, g.config)
                 for g in self.gates]
        return build_netlist(self.library, gates, nets)
