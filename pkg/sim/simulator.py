"""
    Cycle-based three-valued netlist simulation.

    At every rising edge of the single clock, all sequential gates sample
    the values settled before the edge and update together, then the
    combinational gates settle in topological order. Unknown state is X
    and every operator propagates X.

    Flip-flops start X unless configured with INIT. Asynchronous resets and
    sets are sampled at the edge like synchronous ones. Block RAMs start
    cleared and register their read data (old value on a same-address
    write), the read register starts X. MAC blocks accumulate A * B modulo
    2^32 from 0, R clears and CE enables.
"""

import logging
import networkx as nx
import numpy as np

from typing import Iterable, Mapping

from netlist.errors    import SimulationError
from netlist.ir        import Gate, Netlist
from netlist.library   import FF, BRAM, DSP, CLOCK, ENABLE, RESET
from netlist.semantics import TernaryAlgebra, evaluate_gate
from sim.stimulus      import Stimulus
from sim.waveform      import Waveform, X


log = logging.getLogger(__name__)


# Next value of a flip-flop
def _next_ff(gate: Gate, value) -> int:
    spec = gate.type.ff
    q = value(gate.net(spec.output))
    d = value(gate.net(spec.data))
    en = value(gate.net(spec.enable)) if spec.enable else 1

    def loaded(q, d, en):
        if en == 1:
            return d
        if en == 0:
            return q
        return d if d == q else X

    normal = loaded(q, d, en)
    if not spec.clear:
        return normal
    r = value(gate.net(spec.clear))
    cleared = spec.clear_value
    if spec.gated:
        cleared = loaded(q, spec.clear_value, en)
    if r == 1:
        return cleared
    if r == 0:
        return normal
    return normal if normal == cleared else X


# Word of pin values, None when any bit is X
def _word(gate: Gate, pins: Iterable[str], value) -> int | None:
    out = 0
    for i, p in enumerate(pins):
        n = gate.net(p)
        v = 0 if n is None else value(n)
        if v == X:
            return None
        out |= v << i
    return out


# Simulate a netlist
class Simulator:
    """
    Cycle-based simulator of one netlist.

    @raise SimulationError: multiple clocks or a combinational cycle
    """

    def __init__(self, netlist: Netlist, clock: str | None = None,
                 initial: Mapping[str, object] | None = None):
        self.netlist = netlist
        self.algebra = TernaryAlgebra()
        self.initial = dict(initial or {})

        clocks = sorted({g.net(g.type.pins_with_role(CLOCK)[0]) for g in netlist.sequential_gates()})
        if clock is not None:
            found = netlist.net_by_name(clock)
            if found is None:
                raise SimulationError(f"no clock net {clock}")
            self.clock = found.id
        elif len(clocks) > 1:
            raise SimulationError("multiple clocks: " + ', '.join(netlist.nets[n].name for n in clocks))
        else:
            self.clock = clocks[0] if clocks else None
        if self.clock is not None and any(c != self.clock for c in clocks):
            raise SimulationError("multiple clocks: " + ', '.join(netlist.nets[n].name for n in clocks))

        self.order = self._levelize()
        self.sequential = netlist.sequential_gates()

    # Combinational gates in topological order
    def _levelize(self) -> list[Gate]:
        netlist = self.netlist
        comb = [g for g in netlist.gates if not g.is_sequential]
        ids = {g.id for g in comb}
        graph = nx.DiGraph()
        graph.add_nodes_from(ids)
        for g in comb:
            for _, n in g.inputs():
                for src, _ in netlist.nets[n].sources:
                    if src in ids:
                        graph.add_edge(src, g.id)
        try:
            order = list(nx.lexicographical_topological_sort(graph))
        except nx.NetworkXUnfeasible:
            cycle = nx.find_cycle(graph)
            names = [netlist.gates[a].name for a, _ in cycle]
            raise SimulationError(f"combinational cycle through {', '.join(names)}", names)
        return [netlist.gates[g] for g in order]

    # Initial state of the sequential gates
    def _reset_state(self, values: np.ndarray):
        netlist = self.netlist
        self.memories: dict[int, dict[int, int]] = {}
        self.accumulators: dict[int, int | None] = {}
        for g in self.sequential:
            if g.category == FF:
                q = g.net(g.type.ff.output)
                if q is not None:
                    values[q] = g.config.get('INIT', X) if 'INIT' in g.type.config_keys else X
            elif g.category == BRAM:
                contents = self.initial.get('memories', {}).get(g.name, {})
                self.memories[g.id] = {int(a): int(v) for a, v in contents.items()}
            elif g.category == DSP:
                self.accumulators[g.id] = 0
                self._drive_word(g, g.type.pin_groups[2].pins, 0, values)

        for name, v in self.initial.get('nets', {}).items():
            net = netlist.net_by_name(name)
            if net is None:
                raise SimulationError(f"initial state names unknown net {name}")
            values[net.id] = X if v in ('x', 'X', None) else int(v)

    def _drive_word(self, gate: Gate, pins: Iterable[str], word: int | None, values: np.ndarray):
        for i, p in enumerate(pins):
            n = gate.net(p)
            if n is not None:
                values[n] = X if word is None else (word >> i) & 1

    # Apply the inputs of sample t and settle
    def _settle(self, values: np.ndarray, stimulus: Stimulus, t: int):
        netlist = self.netlist
        for n in self._inputs:
            values[n] = stimulus.value(netlist.nets[n].name, t)
        if self.clock is not None:
            values[self.clock] = 1
        values[netlist.const0] = 0
        values[netlist.const1] = 1
        algebra = self.algebra
        for g in self.order:
            inputs = {p: int(values[n]) for p, n in g.inputs()}
            outs = evaluate_gate(g.type, g.config, inputs, algebra)
            for p, n in g.outputs():
                if p in outs:
                    values[n] = outs[p]

    # Sample every sequential gate and update them together
    def _edge(self, values: np.ndarray):
        updates: list[tuple[Gate, object]] = []
        value = lambda n: int(values[n])
        for g in self.sequential:
            if g.category == FF:
                updates.append((g, _next_ff(g, value)))
            elif g.category == BRAM:
                updates.append((g, self._bram(g, value)))
            elif g.category == DSP:
                updates.append((g, self._mac(g, value)))
        for g, result in updates:
            if g.category == FF:
                q = g.net(g.type.ff.output)
                if q is not None:
                    values[q] = result
            elif g.category == BRAM:
                read = result
                if read is not False:
                    self._drive_word(g, g.type.pin_groups[3].pins, read, values)
            else:
                self._drive_word(g, g.type.pin_groups[2].pins, result, values)

    # Block RAM edge, returns the new read data or False to hold it
    def _bram(self, g: Gate, value):
        enables = g.type.pins_with_role(ENABLE)
        re, we = (value(g.net(p)) for p in enables)
        raddr_g, waddr_g, wdata_g, _ = g.type.pin_groups
        memory = self.memories[g.id]
        result = False
        if re == 1:
            addr = _word(g, raddr_g.pins, value)
            result = None if addr is None else memory.get(addr, 0)
        elif re == X:
            result = None
        if we != 0:
            addr = _word(g, waddr_g.pins, value)
            data = _word(g, wdata_g.pins, value)
            if we == X or addr is None:
                log.warning("sim.bram_unknown_write gate=%s", g.name)
            else:
                memory[addr] = data if data is not None else 0
                if data is None:
                    log.warning("sim.bram_unknown_data gate=%s addr=%d", g.name, addr)
        return result

    # Multiply-accumulate edge
    def _mac(self, g: Gate, value) -> int | None:
        ce = value(g.net(g.type.pins_with_role(ENABLE)[0]))
        r  = value(g.net(g.type.pins_with_role(RESET)[0]))
        acc = self.accumulators[g.id]
        if r == 1:
            acc = 0
        elif r == X:
            acc = None
        elif ce == 1:
            a = _word(g, g.type.pin_groups[0].pins, value)
            b = _word(g, g.type.pin_groups[1].pins, value)
            acc = None if acc is None or a is None or b is None else (acc + a * b) & 0xFFFFFFFF
        elif ce == X:
            acc = None
        self.accumulators[g.id] = acc
        return acc

    # Run the simulation
    def run(self, stimulus: Stimulus, cycles: int, watch: Iterable[str] | None = None) -> Waveform:
        """
        Simulate a number of clock cycles.

        @type  stimulus: Stimulus
        @param stimulus: Values of the global inputs

        @type  cycles: int
        @param cycles: Number of rising edges

        @type  watch: list( str ) | None
        @param watch: Names of the recorded nets, all named nets by default

        @rtype:   Waveform
        @returns: cycles + 1 samples

        @raise SimulationError: an input has no value
        """
        netlist = self.netlist
        self._inputs = [n for n in netlist.global_inputs if n != self.clock]
        for n in self._inputs:
            if not stimulus.covers(netlist.nets[n].name):
                raise SimulationError(f"undefined input {netlist.nets[n].name}")

        if watch is None:
            rows = [n.id for n in netlist.nets if n.constant is None]
        else:
            rows = []
            for name in watch:
                net = netlist.net_by_name(name)
                if net is None:
                    raise SimulationError(f"no net {name} to record")
                rows.append(net.id)

        values = np.full(len(netlist.nets), X, dtype=np.uint8)
        record = np.empty((len(rows), cycles + 1), dtype=np.uint8)
        self._reset_state(values)
        self._settle(values, stimulus, 0)
        record[:, 0] = values[rows]
        for t in range(1, cycles + 1):
            self._edge(values)
            self._settle(values, stimulus, t)
            record[:, t] = values[rows]

        clock = netlist.nets[self.clock].name if self.clock is not None else None
        log.info("sim.done cycles=%d nets=%d", cycles, len(rows))
        return Waveform([netlist.nets[n].name for n in rows], record, clock)


# Simulate a netlist for some cycles
def simulate(netlist: Netlist, stimulus: Stimulus, cycles: int, clock: str | None = None,
             initial: Mapping[str, object] | None = None, watch: Iterable[str] | None = None) -> Waveform:
    return Simulator(netlist, clock or stimulus.clock, initial).run(stimulus, cycles, watch)
