"""
    Copy-on-edit builder for netlists and sub-circuit replacement.
"""

import logging

from dataclasses import dataclass
from typing      import Iterable

from logic.boolfunc    import EquivalenceChecker, var
from netlist.errors    import BuildError, EquivalenceError
from netlist.ir        import Netlist, NetSpec, GateSpec, ModuleGroup, build_netlist
from netlist.library   import OUT
from netlist.semantics import FunctionBuilder


log = logging.getLogger(__name__)


# Mutable copy of a netlist, rebuilt into a new validated netlist
class NetlistEditor:

    # Copy the gates and nets of a netlist
    def __init__(self, netlist: Netlist):
        self.library = netlist.library
        self.nets  = {n.id: NetSpec(n.id, n.name, n.global_in, n.global_out) for n in netlist.nets}
        self.gates = {g.id: GateSpec(g.id, g.name, g.type.name, dict(g.pins), dict(g.config))
                      for g in netlist.gates}
        self.constants = {netlist.const0: 0, netlist.const1: 1}
        self.const0 = netlist.const0
        self.const1 = netlist.const1

        self._next_net  = len(netlist.nets)
        self._next_gate = len(netlist.gates)
        self._net_names  = {n.name for n in netlist.nets}
        self._gate_names = {g.name for g in netlist.gates}

        # connectivity of the edited state
        self._driver:  dict[int, tuple[int, str]] = {}
        self._readers: dict[int, set[tuple[int, str]]] = {n: set() for n in self.nets}
        for g in self.gates.values():
            self._connect(g)

        self.added   = 0
        self.removed = 0

    def _direction(self, gate: GateSpec, pin: str) -> str:
        return self.library.type(gate.type).pin(pin).direction

    def _connect(self, gate: GateSpec):
        for pin, nid in gate.pins.items():
            if self._direction(gate, pin) == OUT:
                self._driver[nid] = (gate.id, pin)
            else:
                self._readers[nid].add((gate.id, pin))

    def _disconnect(self, gate: GateSpec):
        for pin, nid in gate.pins.items():
            if self._direction(gate, pin) == OUT:
                if self._driver.get(nid) == (gate.id, pin):
                    del self._driver[nid]
            else:
                self._readers[nid].discard((gate.id, pin))

    @staticmethod
    def _unique(base: str, names: set[str]) -> str:
        name, k = base, 1
        while name in names:
            name = f"{base}_{k}"
            k += 1
        names.add(name)
        return name

    def const_net(self, value: int) -> int:
        return self.const1 if value else self.const0

    def constant(self, nid: int) -> int | None:
        return self.constants.get(nid)

    def driver(self, nid: int) -> tuple[int, str] | None:
        return self._driver.get(nid)

    def readers(self, nid: int) -> list[tuple[int, str]]:
        return sorted(self._readers.get(nid, ()))

    # Create a new internal net
    def add_net(self, name: str | None = None) -> int:
        nid = self._next_net
        self._next_net += 1
        self.nets[nid] = NetSpec(nid, self._unique(name or f"$n{nid}", self._net_names))
        self._readers[nid] = set()
        return nid

    # Create a new gate
    def add_gate(self, type_name: str, pins: dict[str, int], config: dict[str, int] | None = None,
                 name: str | None = None) -> int:
        gtype = self.library.type(type_name)
        gid = self._next_gate
        self._next_gate += 1
        spec = GateSpec(gid, self._unique(name or f"$g{gid}", self._gate_names),
                        gtype.name, dict(pins), dict(config or {}))
        for pin, nid in pins.items():
            if gtype.pin(pin).direction == OUT and nid in self._driver:
                raise BuildError(f"multi-driven net {self.nets[nid].name}")
        self.gates[gid] = spec
        self._connect(spec)
        self.added += 1
        return gid

    # Delete a gate, its nets stay in place
    def remove_gate(self, gid: int):
        spec = self.gates.pop(gid)
        self._disconnect(spec)
        self._gate_names.discard(spec.name)
        self.removed += 1

    # Bind a pin of a gate to another net
    def rebind(self, gid: int, pin: str, nid: int):
        spec = self.gates[gid]
        self._disconnect(spec)
        spec.pins[pin] = nid
        self._connect(spec)

    # Move every reader of `drop` to `keep` and delete `drop`
    def merge_nets(self, keep: int, drop: int):
        """
        Merge two nets, the dropped net must have no driver left.

        A global output flag moves to the kept net together with the output
        name, so interface names survive the merge.

        @type  keep: int
        @param keep: The net that stays

        @type  drop: int
        @param drop: The net that disappears
        """
        if keep == drop:
            return
        dspec, kspec = self.nets[drop], self.nets[keep]
        if drop in self._driver:
            raise BuildError(f"cannot merge net {dspec.name}: still driven")
        if dspec.global_in or drop in self.constants:
            raise BuildError(f"cannot merge net {dspec.name}: global input or constant")
        if dspec.global_out:
            if kspec.global_in or kspec.global_out or keep in self.constants:
                raise BuildError(f"cannot merge global output {dspec.name} into {kspec.name}")
            kspec.global_out = True
            self._net_names.discard(kspec.name)
            kspec.name = dspec.name
        for gid, pin in sorted(self._readers[drop]):
            self.rebind(gid, pin, keep)
        del self.nets[drop]
        del self._readers[drop]
        if not dspec.global_out:
            self._net_names.discard(dspec.name)

    # Can a net be merged away
    def mergeable(self, keep: int, drop: int) -> bool:
        dspec, kspec = self.nets[drop], self.nets[keep]
        if dspec.global_in or drop in self.constants:
            return False
        if dspec.global_out:
            return not (kspec.global_in or kspec.global_out or keep in self.constants)
        return True

    # Validate and build the edited netlist
    def build(self, modules: Iterable[ModuleGroup] = ()) -> Netlist:
        nets = []
        for nid, spec in self.nets.items():
            orphan = (nid not in self._driver and not self._readers[nid]
                      and not spec.global_in and not spec.global_out
                      and nid not in self.constants)
            if not orphan:
                nets.append(spec)
        return build_netlist(self.library, list(self.gates.values()), nets, modules)


# Map of the boundary nets of a replacement fragment to netlist nets
@dataclass
class BoundaryMap:
    inputs  : dict[str, int]
    outputs : dict[str, int]


# Replace a set of gates by a fragment netlist
def replace_subcircuit(netlist: Netlist, gates: Iterable[int], fragment: Netlist,
                       boundary: BoundaryMap, check: bool = True) -> Netlist:
    """
    Remove a set of gates and splice a fragment in their place.

    The fragment's global inputs and outputs are its boundary: each one is
    mapped by name to a net of the netlist. Every net driven by the removed
    gates and read elsewhere (or a global output) must be covered.

    @type  netlist: Netlist
    @param netlist: The netlist to edit

    @type  gates: set( int )
    @param gates: Ids of the gates to remove

    @type  fragment: Netlist
    @param fragment: The replacement, built in a library the netlist includes

    @type  boundary: BoundaryMap
    @param boundary: Fragment boundary net name to netlist net id

    @type  check: bool
    @param check: Verify each boundary output before committing

    @rtype:   Netlist
    @returns: The edited netlist

    @raise BuildError:       uncovered boundary net or unknown fragment net
    @raise EquivalenceError: a boundary output changed its function
    """
    gates = frozenset(gates)

    # nets crossing the cut on the output side
    crossing = set()
    for gid in gates:
        for _, nid in netlist.gates[gid].outputs():
            net = netlist.nets[nid]
            if net.global_out or any(d not in gates for d, _ in net.destinations):
                crossing.add(nid)
    covered = set(boundary.outputs.values())
    missing = sorted(crossing - covered)
    if missing:
        names = ', '.join(netlist.nets[n].name for n in missing)
        raise BuildError(f"uncovered boundary net {names}")

    frag_in  = {fragment.nets[n].name: n for n in fragment.global_inputs}
    frag_out = {fragment.nets[n].name: n for n in fragment.global_outputs}
    for name in frag_in:
        if name not in boundary.inputs:
            raise BuildError(f"fragment input {name} has no boundary mapping")
    for name in boundary.outputs:
        if name not in frag_out:
            raise BuildError(f"boundary output {name} is not a fragment output")

    if check:
        old = FunctionBuilder(netlist, gates=gates)
        new = FunctionBuilder(fragment, leaves={frag_in[name]: var(nid) for name, nid in boundary.inputs.items()
                                                if name in frag_in})
        checker = EquivalenceChecker()
        for name, nid in sorted(boundary.outputs.items()):
            result = checker.check(old.function(nid), new.function(frag_out[name]))
            if not result:
                raise EquivalenceError(f"replacement changes {netlist.nets[nid].name}: {result.status}",
                                       result.counterexample)

    editor = NetlistEditor(netlist)
    for gid in sorted(gates):
        editor.remove_gate(gid)

    # fragment net id -> netlist net id
    mapping: dict[int, int] = {fragment.const0: editor.const0, fragment.const1: editor.const1}
    for name, nid in boundary.inputs.items():
        if name in frag_in:
            mapping[frag_in[name]] = nid
    for name, nid in boundary.outputs.items():
        if fragment.driver(frag_out[name]) is not None:
            mapping[frag_out[name]] = nid
    for net in fragment.nets:
        if net.id not in mapping:
            mapping[net.id] = editor.add_net()

    for gate in fragment.gates:
        editor.add_gate(gate.type.name, {p: mapping[n] for p, n in gate.pins.items()},
                        gate.config, name=gate.name)

    # outputs wired straight to an input or a constant
    for name, nid in sorted(boundary.outputs.items()):
        fnet = frag_out[name]
        if fragment.driver(fnet) is not None:
            continue
        source = mapping[fnet]
        if editor.mergeable(source, nid):
            editor.merge_nets(source, nid)
        else:
            editor.add_gate('BUF', {'A': source, 'Y': nid})

    log.debug("edit.replace removed=%d added=%d", len(gates), len(fragment.gates))
    return editor.build()
