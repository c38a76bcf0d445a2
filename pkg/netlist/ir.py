"""
    Core data model of a flattened gate-level netlist.

    A Netlist is immutable once built: passes produce new netlists through
    netlist.edit.NetlistEditor. Gate and net ids are dense and follow the
    ascending order of the ids given at build time, so every iteration over
    gates or nets is deterministic.
"""

import logging
import networkx as nx

from dataclasses import dataclass, field
from typing      import Iterable, Iterator

from netlist.errors  import BuildError
from netlist.library import GateLibrary, GateType, OUT, CONSTANT


log = logging.getLogger(__name__)

# Names of the two constant nets
CONST0_NAME = '$const0'
CONST1_NAME = '$const1'

# module group kinds, each kind is an independent layer
MODULE_KINDS = ('register', 'word-mux', 'arithmetic', 'interface', 'control', 'bram', 'dsp', 'other')


# Description of a net handed to build_netlist
@dataclass
class NetSpec:
    id         : int
    name       : str
    global_in  : bool = False
    global_out : bool = False


# Description of a gate handed to build_netlist
@dataclass
class GateSpec:
    id     : int
    name   : str
    type   : str
    pins   : dict[str, int]
    config : dict[str, int] = field(default_factory=dict)


# A gate of a built netlist
@dataclass(eq=False)
class Gate:
    id     : int
    name   : str
    type   : GateType
    config : dict[str, int]
    pins   : dict[str, int]

    def __repr__(self):
        return f"Gate({self.id}, {self.name}, {self.type.name})"

    @property
    def category(self) -> str:
        return self.type.category

    @property
    def is_sequential(self) -> bool:
        return self.type.is_sequential

    # Net bound to a pin, None for an unbound output
    def net(self, pin: str) -> int | None:
        return self.pins.get(pin)

    # Bound input pins in type order
    def inputs(self) -> list[tuple[str, int]]:
        return [(p, self.pins[p]) for p in self.type.inputs if p in self.pins]

    # Bound output pins in type order
    def outputs(self) -> list[tuple[str, int]]:
        return [(p, self.pins[p]) for p in self.type.outputs if p in self.pins]


# A net of a built netlist
@dataclass(eq=False)
class Net:
    id           : int
    name         : str
    sources      : list[tuple[int, str]] = field(default_factory=list)
    destinations : list[tuple[int, str]] = field(default_factory=list)
    global_in    : bool = False
    global_out   : bool = False
    constant     : int | None = None
    dangling     : bool = False

    def __repr__(self):
        return f"Net({self.id}, {self.name})"


# A word-level structure layered on top of the netlist
@dataclass
class ModuleGroup:
    name       : str
    kind       : str
    gates      : frozenset[int]
    pin_groups : dict[str, list[tuple[int, str, int | None]]] = field(default_factory=dict)
    locked     : bool = False
    provenance : list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in MODULE_KINDS:
            raise BuildError(f"unknown module kind {self.kind}")
        self.gates = frozenset(self.gates)
        for pg, pins in self.pin_groups.items():
            indices = [i for (_, _, i) in pins if i is not None]
            if len(indices) != len(set(indices)):
                raise BuildError(f"module {self.name}: repeated index in pin group {pg}")


# Combinational fan-in cone of a set of nets
@dataclass(frozen=True)
class Cone:
    outputs : tuple[int, ...]
    gates   : tuple[int, ...]
    inputs  : tuple[int, ...]


# A validated, immutable netlist
class Netlist:

    def __init__(self, library: GateLibrary, gates: list[Gate], nets: list[Net],
                 modules: Iterable[ModuleGroup] = ()):
        self.library = library
        self.gates   = gates
        self.nets    = nets
        self.modules = tuple(modules)

        self.const0 = next(n.id for n in nets if n.constant == 0)
        self.const1 = next(n.id for n in nets if n.constant == 1)

        self._gate_names = {g.name: g.id for g in gates}
        self._net_names  = {n.name: n.id for n in nets}
        self._graph: nx.DiGraph | None = None

    def __repr__(self):
        return f"Netlist({self.library.name}, {len(self.gates)} gates, {len(self.nets)} nets)"

    # Structural equality: same library, names, types, configs and bindings
    def __eq__(self, other) -> bool:
        if not isinstance(other, Netlist):
            return NotImplemented
        return self.signature() == other.signature()

    __hash__ = None

    # Canonical description independent of ids
    def signature(self) -> tuple:
        nets = tuple(sorted((n.name, n.global_in, n.global_out, n.constant) for n in self.nets))
        gates = tuple(sorted(
            (g.name, g.type.name, tuple(sorted(g.config.items())),
             tuple(sorted((p, self.nets[n].name) for p, n in g.pins.items())))
            for g in self.gates))
        return (self.library.name, nets, gates)

    def gate(self, gid: int) -> Gate:
        return self.gates[gid]

    def net(self, nid: int) -> Net:
        return self.nets[nid]

    def gate_by_name(self, name: str) -> Gate | None:
        gid = self._gate_names.get(name)
        return None if gid is None else self.gates[gid]

    def net_by_name(self, name: str) -> Net | None:
        nid = self._net_names.get(name)
        return None if nid is None else self.nets[nid]

    # Gate and pin driving a net
    def driver(self, nid: int) -> tuple[Gate, str] | None:
        sources = self.nets[nid].sources
        if not sources:
            return None
        gid, pin = sources[0]
        return self.gates[gid], pin

    # Gates and pins reading a net
    def readers(self, nid: int) -> list[tuple[Gate, str]]:
        return [(self.gates[g], p) for g, p in self.nets[nid].destinations]

    def constant(self, nid: int) -> int | None:
        return self.nets[nid].constant

    def const_net(self, value: int) -> int:
        return self.const1 if value else self.const0

    @property
    def global_inputs(self) -> list[int]:
        return [n.id for n in self.nets if n.global_in]

    @property
    def global_outputs(self) -> list[int]:
        return [n.id for n in self.nets if n.global_out]

    def dangling_nets(self) -> list[int]:
        return [n.id for n in self.nets if n.dangling]

    def gates_of_category(self, *categories: str) -> list[Gate]:
        return [g for g in self.gates if g.category in categories]

    def sequential_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.is_sequential]

    def combinational_gates(self) -> list[Gate]:
        return [g for g in self.gates if not g.is_sequential and g.category != CONSTANT]

    # Gates driving the inputs of a gate
    def fanin_gates(self, gid: int) -> list[int]:
        out = set()
        for _, nid in self.gates[gid].inputs():
            for src, _ in self.nets[nid].sources:
                out.add(src)
        return sorted(out)

    # Gates reading the outputs of a gate
    def fanout_gates(self, gid: int) -> list[int]:
        out = set()
        for _, nid in self.gates[gid].outputs():
            for dst, _ in self.nets[nid].destinations:
                out.add(dst)
        return sorted(out)

    # Does a net start a cone (sequential output, global input, constant or dangling)
    def is_cone_boundary(self, nid: int) -> bool:
        net = self.nets[nid]
        if net.constant is not None or net.global_in or not net.sources:
            return True
        return self.gates[net.sources[0][0]].is_sequential

    # Gate-to-gate graph through nets
    def gate_graph(self) -> nx.DiGraph:
        if self._graph is None:
            graph = nx.DiGraph()
            graph.add_nodes_from(g.id for g in self.gates)
            for net in self.nets:
                for src, _ in net.sources:
                    for dst, _ in net.destinations:
                        graph.add_edge(src, dst)
            self._graph = graph
        return self._graph

    # Combinational gates reachable backward from a net
    def combinational_fanin_cone(self, nid: int) -> Cone:
        """
        Collect the combinational gates feeding a net.

        The walk stops at sequential outputs, global inputs, constants and
        dangling nets. The nets where it stopped are the cone inputs; constant
        nets are not reported as inputs.

        @type  nid: int
        @param nid: The net to start from

        @rtype:   Cone
        @returns: The cone gates and its frontier, both sorted by id
        """
        return self.fanin_cone([nid])

    # Combinational fan-in cone of several nets at once
    def fanin_cone(self, nids: Iterable[int], stop: set[int] | None = None) -> Cone:
        nids = list(nids)
        gates: set[int] = set()
        inputs: set[int] = set()
        seen: set[int] = set()
        stack = list(nids)
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            net = self.nets[nid]
            if net.constant is not None:
                continue
            if self.is_cone_boundary(nid) or (stop is not None and nid in stop):
                inputs.add(nid)
                continue
            gate = self.gates[net.sources[0][0]]
            if gate.id in gates:
                continue
            gates.add(gate.id)
            for _, src in gate.inputs():
                if src not in seen:
                    stack.append(src)
        return Cone(tuple(nids), tuple(sorted(gates)), tuple(sorted(inputs)))

    # Strongly connected components of the gate graph
    def sequential_sccs(self) -> list[frozenset[int]]:
        """
        Find the cycles of the gate graph.

        @rtype:   list( frozenset( int ) )
        @returns: SCCs with more than one gate or with a self-loop, ordered
                  by their lowest gate id
        """
        graph = self.gate_graph()
        sccs = []
        for comp in nx.strongly_connected_components(graph):
            if len(comp) > 1:
                sccs.append(frozenset(comp))
            else:
                (g,) = tuple(comp)
                if graph.has_edge(g, g):
                    sccs.append(frozenset(comp))
        sccs.sort(key=min)
        return sccs

    # Copy of the netlist with another set of module groups
    def with_modules(self, modules: Iterable[ModuleGroup]) -> 'Netlist':
        modules = list(modules)
        layers: dict[str, dict[int, str]] = {}
        for m in modules:
            layer = layers.setdefault(m.kind, {})
            for gid in m.gates:
                if gid in layer:
                    raise BuildError(f"gate {self.gates[gid].name} in modules {layer[gid]} and {m.name}")
                layer[gid] = m.name
        copy = Netlist.__new__(Netlist)
        copy.__dict__.update(self.__dict__)
        copy.modules = tuple(modules)
        return copy

    def iter_gates(self, type_name: str) -> Iterator[Gate]:
        return (g for g in self.gates if g.type.name == type_name)


# Validate gate and net descriptions and build a netlist
def build_netlist(library: GateLibrary, gates: list[GateSpec], nets: list[NetSpec],
                  modules: Iterable[ModuleGroup] = ()) -> Netlist:
    """
    Build a validated netlist.

    Ids are renumbered densely in ascending order of the given ids. The two
    constant nets are added when missing. Nets without a source that are
    neither global inputs nor constants are flagged dangling.

    @type  library: GateLibrary
    @param library: The library resolving gate types

    @type  gates: list( GateSpec )
    @param gates: Gate descriptions, pins bound to net ids

    @type  nets: list( NetSpec )
    @param nets: Net descriptions

    @rtype:   Netlist
    @returns: The validated netlist

    @raise BuildError: duplicate id or name, multi-driven net, unknown gate
                       type, unbound input pin or unresolved net
    """
    _check_unique([n.id for n in nets], "net id")
    _check_unique([g.id for g in gates], "gate id")
    _check_unique([n.name for n in nets], "net name")
    _check_unique([g.name for g in gates], "gate name")

    nets = sorted(nets, key=lambda n: n.id)
    names = {n.name for n in nets}
    next_id = (nets[-1].id + 1) if nets else 0
    for name in (CONST0_NAME, CONST1_NAME):
        if name not in names:
            nets.append(NetSpec(next_id, name))
            next_id += 1

    # dense renumbering
    net_index = {spec.id: i for i, spec in enumerate(nets)}
    built_nets = []
    for i, spec in enumerate(nets):
        constant = 0 if spec.name == CONST0_NAME else 1 if spec.name == CONST1_NAME else None
        built_nets.append(Net(i, spec.name, global_in=spec.global_in,
                              global_out=spec.global_out, constant=constant))

    built_gates = []
    for i, spec in enumerate(sorted(gates, key=lambda g: g.id)):
        gtype = library.type(spec.type)
        config = _check_config(spec, gtype)
        pins: dict[str, int] = {}
        for pin, nid in spec.pins.items():
            gtype.pin(pin)
            if nid not in net_index:
                raise BuildError(f"gate {spec.name}: pin {pin} bound to unknown net {nid}")
            pins[pin] = net_index[nid]
        for pin in gtype.inputs:
            if pin not in pins:
                raise BuildError(f"gate {spec.name}: unbound input pin {pin}")
        built_gates.append(Gate(i, spec.name, gtype, config, pins))

    for gate in built_gates:
        for pin, nid in gate.pins.items():
            net = built_nets[nid]
            if gate.type.pin(pin).direction == OUT:
                if net.sources:
                    other = built_gates[net.sources[0][0]].name
                    raise BuildError(f"multi-driven net {net.name} (gates {other} and {gate.name})")
                if net.global_in or net.constant is not None:
                    raise BuildError(f"multi-driven net {net.name} (input driven by gate {gate.name})")
                net.sources.append((gate.id, pin))
            else:
                net.destinations.append((gate.id, pin))

    dangling = []
    for net in built_nets:
        net.destinations.sort()
        if not net.sources and not net.global_in and net.constant is None:
            net.dangling = True
            dangling.append(net.name)
    if dangling:
        log.warning("netlist.dangling count=%d nets=%s", len(dangling), ','.join(dangling[:8]))

    netlist = Netlist(library, built_gates, built_nets)
    return netlist.with_modules(modules) if modules else netlist


def _check_unique(values: list, what: str):
    seen = set()
    for v in values:
        if v in seen:
            raise BuildError(f"duplicate {what} {v}")
        seen.add(v)


def _check_config(spec: GateSpec, gtype: GateType) -> dict[str, int]:
    config = {}
    for key, value in spec.config.items():
        width = gtype.config_keys.get(key)
        if width is None:
            raise BuildError(f"gate {spec.name}: unknown config key {key} for {gtype.name}")
        if value < 0 or value >> width:
            raise BuildError(f"gate {spec.name}: bad init width, expected {width}")
        config[key] = int(value)
    if gtype.category == 'lut':
        for key in gtype.config_keys:
            if key not in config:
                raise BuildError(f"gate {spec.name}: missing config {key}")
    return config
