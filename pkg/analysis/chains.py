"""
    Carry chain discovery.
"""

from dataclasses import dataclass

from netlist.errors  import NetlistError
from netlist.ir      import Netlist
from netlist.library import CARRY, GateLibrary


# One bit position of a carry chain
@dataclass(frozen=True)
class CarryPosition:
    gate     : int
    index    : int
    carry_in : str
    carry_out: str
    operands : tuple[str, ...]


# A maximal chain of connected carry gates, position 0 receives the carry in
@dataclass(frozen=True)
class CarryChain:
    positions : tuple[CarryPosition, ...]
    arch      : str

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def head(self) -> int:
        return self.positions[0].gate

    # Carry gate ids in chain order
    @property
    def gates(self) -> tuple[int, ...]:
        out = []
        for p in self.positions:
            if not out or out[-1] != p.gate:
                out.append(p.gate)
        return tuple(out)


# Positions of one carry gate
def _positions(netlist: Netlist, gid: int) -> list[CarryPosition]:
    gate = netlist.gates[gid]
    if gate.type.function == 'carry4':
        return [CarryPosition(gid, i, 'CI' if i == 0 else f'CO[{i - 1}]', f'CO[{i}]', (f'DI[{i}]', f'S[{i}]'))
                for i in range(4)]
    return [CarryPosition(gid, 0, 'CI', 'CO', ('I0', 'I1'))]


# Pin of a carry gate that forwards the carry to the next gate
def _chain_out(netlist: Netlist, gid: int) -> str:
    return 'CO[3]' if netlist.gates[gid].type.function == 'carry4' else 'CO'


# Find maximal carry chains
def find_carry_chains(netlist: Netlist, arch: str | None = None) -> list[CarryChain]:
    """
    Scan for connected carry gates.

    Consecutive gates are linked carry-out to carry-in. CARRY4 blocks are
    unrolled into four bit positions.

    @type  netlist: Netlist
    @param netlist: The netlist to scan

    @type  arch: str | None
    @param arch: Architecture library name, defaults to the netlist's

    @rtype:   list( CarryChain )
    @returns: Chains ordered by the id of their head gate

    @raise NetlistError: unknown architecture
    """
    arch = arch or netlist.library.name
    library = GateLibrary.get(arch)
    if library is None or not library.carry_types():
        raise NetlistError(f"unknown architecture {arch}")

    carries = [g.id for g in netlist.gates if g.category == CARRY]
    successor: dict[int, int] = {}
    has_predecessor: set[int] = set()
    for gid in carries:
        out = netlist.gates[gid].net(_chain_out(netlist, gid))
        if out is None:
            continue
        nexts = sorted(g.id for g, pin in netlist.readers(out) if g.category == CARRY and pin == 'CI')
        if nexts:
            successor[gid] = nexts[0]
            has_predecessor.add(nexts[0])

    chains = []
    for gid in carries:
        if gid in has_predecessor:
            continue
        positions = []
        current = gid
        visited = set()
        while current is not None and current not in visited:
            visited.add(current)
            positions += _positions(netlist, current)
            current = successor.get(current)
        chains.append(CarryChain(tuple(positions), arch))

    # rings of carries have no head, start them at their lowest id
    covered = {g for c in chains for g in c.gates}
    for gid in carries:
        if gid not in covered:
            positions, current = [], gid
            while current is not None and current not in covered:
                covered.add(current)
                positions += _positions(netlist, current)
                current = successor.get(current)
            chains.append(CarryChain(tuple(positions), arch))

    chains.sort(key=lambda c: c.head)
    return chains
