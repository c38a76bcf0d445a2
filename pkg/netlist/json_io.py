"""
    Read and write the JSON netlist exchange format.

    {
      "library": "ice40-like",
      "gates": [{"id", "name", "type", "config": {key: "0x..."}, "pins": {pin: net id}}],
      "nets":  [{"id", "name", "global_in", "global_out"}],
      "modules": [{"name", "kind", "gates": [gate names], "locked", "pin_groups"}]   (optional)
    }

    Configuration values are hexadecimal strings, most-significant nibble
    first. A Verilog-style sized literal ("16'h8000") is also accepted.
"""

import re
import json

from netlist.errors  import BuildError, ParseError
from netlist.ir      import Netlist, NetSpec, GateSpec, ModuleGroup, build_netlist
from netlist.library import GateLibrary


_SIZED = re.compile(r"^\s*(\d+)\s*'\s*[hH]\s*([0-9a-fA-F_]+)\s*$")
_HEX   = re.compile(r"^\s*0[xX]([0-9a-fA-F_]+)\s*$")


# Format a configuration value for the given bit width
def format_hex(value: int, width: int) -> str:
    digits = max(1, (width + 3) // 4)
    return '0x' + format(value, f'0{digits}x')


# Read a configuration value and check its width
def parse_hex(text: str, width: int, where: str = '') -> int:
    prefix = f"{where}: " if where else ''
    if not isinstance(text, str):
        raise ParseError(f"{prefix}config value must be a hex string")
    if found := _SIZED.match(text):
        size = int(found.group(1))
        value = int(found.group(2).replace('_', ''), 16)
        if size != width or value >> width:
            raise ParseError(f"{prefix}bad init width, expected {width}")
        return value
    if found := _HEX.match(text):
        digits = found.group(1).replace('_', '')
        value = int(digits, 16)
        if len(digits) != max(1, (width + 3) // 4) or value >> width:
            raise ParseError(f"{prefix}bad init width, expected {width}")
        return value
    raise ParseError(f"{prefix}malformed config value {text!r}")


def _require(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key}")
    value = obj[key]
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ParseError(f"{where}: field {key} has the wrong type")
    return value


# Parse a JSON netlist document
def parse_json_netlist(text: str, library: GateLibrary | None = None) -> Netlist:
    """
    Parse the JSON exchange format into a validated netlist.

    @type  text: str
    @param text: The JSON document

    @type  library: GateLibrary | None
    @param library: Library resolving gate types, defaults to the one
                    named by the document

    @rtype:   Netlist
    @returns: The netlist, configuration preserved bit-exactly

    @raise ParseError: schema violation or bad init width
    @raise BuildError: unknown gate type or malformed netlist
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ParseError("document must be an object")

    name = _require(doc, 'library', str, 'document')
    if library is None:
        library = GateLibrary.get(name)
        if library is None:
            raise ParseError(f"unknown library {name}")

    nets = []
    for i, entry in enumerate(_require(doc, 'nets', list, 'document')):
        where = f"nets[{i}]"
        nets.append(NetSpec(
            _require(entry, 'id', int, where),
            _require(entry, 'name', str, where),
            bool(entry.get('global_in', False)),
            bool(entry.get('global_out', False))))

    gates = []
    for i, entry in enumerate(_require(doc, 'gates', list, 'document')):
        where = f"gates[{i}]"
        gname = _require(entry, 'name', str, where)
        gtype = library.type(_require(entry, 'type', str, where))
        config = {}
        for key, value in entry.get('config', {}).items():
            width = gtype.config_keys.get(key)
            if width is None:
                raise BuildError(f"gate {gname}: unknown config key {key} for {gtype.name}")
            config[key] = parse_hex(value, width, f"gate {gname} {key}")
        pins = {}
        for pin, nid in _require(entry, 'pins', dict, where).items():
            if not isinstance(nid, int) or isinstance(nid, bool):
                raise ParseError(f"{where}: pin {pin} must name a net id")
            pins[pin] = nid
        gates.append(GateSpec(_require(entry, 'id', int, where), gname, gtype.name, pins, config))

    netlist = build_netlist(library, gates, nets)

    modules = []
    for i, entry in enumerate(doc.get('modules', [])):
        where = f"modules[{i}]"
        members = []
        for gname in _require(entry, 'gates', list, where):
            gate = netlist.gate_by_name(gname)
            if gate is None:
                raise ParseError(f"{where}: unknown gate {gname}")
            members.append(gate.id)
        pin_groups = {}
        for pg, refs in entry.get('pin_groups', {}).items():
            pin_groups[pg] = [(netlist.gate_by_name(g).id, pin, index) for g, pin, index in refs]
        modules.append(ModuleGroup(
            _require(entry, 'name', str, where),
            _require(entry, 'kind', str, where),
            frozenset(members), pin_groups,
            bool(entry.get('locked', False))))
    return netlist.with_modules(modules) if modules else netlist


# Convert a netlist into the JSON document structure
def netlist_to_dict(netlist: Netlist) -> dict:
    doc = {
        'library': netlist.library.name,
        'nets': [{
            'id'         : n.id,
            'name'       : n.name,
            'global_in'  : n.global_in,
            'global_out' : n.global_out,
        } for n in netlist.nets],
        'gates': [{
            'id'     : g.id,
            'name'   : g.name,
            'type'   : g.type.name,
            'config' : {k: format_hex(v, g.type.config_keys[k]) for k, v in sorted(g.config.items())},
            'pins'   : dict(sorted(g.pins.items())),
        } for g in netlist.gates],
    }
    if netlist.modules:
        doc['modules'] = [{
            'name'       : m.name,
            'kind'       : m.kind,
            'gates'      : [netlist.gates[g].name for g in sorted(m.gates)],
            'locked'     : m.locked,
            'pin_groups' : {pg: [[netlist.gates[g].name, pin, index] for g, pin, index in refs]
                            for pg, refs in sorted(m.pin_groups.items())},
        } for m in netlist.modules]
    return doc


# Serialize a netlist, deterministic key ordering
def write_json_netlist(netlist: Netlist) -> str:
    return json.dumps(netlist_to_dict(netlist), indent=1, sort_keys=True) + '\n'


def read_netlist_file(path: str, library: GateLibrary | None = None) -> Netlist:
    with open(path, 'r') as file:
        text = file.read()
    if path.endswith('.v'):
        from netlist.verilog import parse_structural_verilog
        return parse_structural_verilog(text, library)
    return parse_json_netlist(text, library)


def write_netlist_file(path: str, netlist: Netlist):
    with open(path, 'w') as file:
        file.write(write_json_netlist(netlist))
