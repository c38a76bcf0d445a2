"""
    Control net classification.

    A net is control when every pin it feeds has a control role (select,
    enable, reset, set, clock). The set is closed backwards through
    combinational logic whose outputs are all control: such a gate's inputs
    are control as soon as every other reader is control too. Nets feeding
    both a control pin and a data pin stay data.
"""

import logging

from dataclasses import dataclass, field
from typing      import Iterable

from netlist.ir      import ModuleGroup, Netlist
from netlist.library import CONTROL_ROLES


log = logging.getLogger(__name__)

# provenance of a control net
PIN_ROLE = 'pin-role'
CLOSURE  = 'closure'
USER     = 'user'


# Nets classified as control, with the reason for each
@dataclass
class ControlSet:
    nets       : frozenset[int] = frozenset()
    provenance : dict[int, str] = field(default_factory=dict)
    roles      : dict[int, tuple[str, ...]] = field(default_factory=dict)

    def __contains__(self, nid: int) -> bool:
        return nid in self.nets

    def __len__(self) -> int:
        return len(self.nets)

    # Review listing keyed by net name
    def to_dict(self, netlist: Netlist) -> dict:
        return {netlist.nets[n].name: {'provenance': self.provenance[n], 'roles': list(self.roles.get(n, ()))}
                for n in sorted(self.nets)}


# Classify the control nets of a netlist
def classify_control(netlist: Netlist, groupings: Iterable[ModuleGroup] = (),
                     user: Iterable[str] = ()) -> ControlSet:
    """
    Find the nets that only steer computation.

    @type  netlist: Netlist
    @param netlist: A preprocessed netlist, MUX2 gates explicit

    @type  groupings: list( ModuleGroup )
    @param groupings: Known module groups, outputs of 'control' groups are
                      control by declaration

    @type  user: list( str )
    @param user: Names of nets declared control

    @rtype:   ControlSet
    @returns: The control nets with their provenance
    """
    provenance: dict[int, str] = {}
    roles: dict[int, tuple[str, ...]] = {}

    for net in netlist.nets:
        if net.constant is not None or net.global_out or not net.destinations:
            continue
        pin_roles = {netlist.gates[g].type.pin(p).role for g, p in net.destinations}
        if pin_roles <= set(CONTROL_ROLES):
            provenance[net.id] = PIN_ROLE
            roles[net.id] = tuple(sorted(pin_roles))

    for name in user:
        net = netlist.net_by_name(name)
        if net is not None:
            provenance.setdefault(net.id, USER)
        else:
            log.warning("control.unknown_net name=%s", name)
    for group in groupings:
        if group.kind != 'control':
            continue
        for gid in sorted(group.gates):
            for _, n in netlist.gates[gid].outputs():
                provenance.setdefault(n, USER)

    # backward closure through combinational gates
    changed = True
    while changed:
        changed = False
        for gate in netlist.combinational_gates():
            outs = [n for _, n in gate.outputs()]
            if not outs or any(n not in provenance for n in outs):
                continue
            for _, n in gate.inputs():
                net = netlist.nets[n]
                if n in provenance or net.constant is not None or net.global_out:
                    continue
                if all(_feeds_control(netlist, g, p, provenance) for g, p in net.destinations):
                    provenance[n] = CLOSURE
                    changed = True

    log.info("control.done nets=%d pin_role=%d closure=%d user=%d", len(provenance),
             sum(1 for v in provenance.values() if v == PIN_ROLE),
             sum(1 for v in provenance.values() if v == CLOSURE),
             sum(1 for v in provenance.values() if v == USER))
    return ControlSet(frozenset(provenance), provenance, roles)


# A reader pin is a control pin or an input of combinational logic whose outputs are all control
def _feeds_control(netlist: Netlist, gid: int, pin: str, control: dict[int, str]) -> bool:
    gate = netlist.gates[gid]
    if gate.type.pin(pin).role in CONTROL_ROLES:
        return True
    if gate.is_sequential:
        return False
    outs = [n for _, n in gate.outputs()]
    return bool(outs) and all(n in control for n in outs)
