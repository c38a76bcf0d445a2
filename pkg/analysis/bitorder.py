"""
    Bit-order propagation.

    Pin groups with a known order (arithmetic operands and results, BRAM and
    DSP ports, user seeds) lend their indices to neighbouring register and
    MUX groups through order-preserving paths: buffers, inverters, MUX2
    data pins, flip-flop D to Q and plain nets. Each neighbour proposes one
    index record; a consensus over the records orders the group.
"""

import logging

from collections import Counter
from dataclasses import dataclass, field
from typing      import Iterable, Sequence

from netlist.ir      import Netlist, ModuleGroup
from netlist.library import FF, BRAM, DSP


log = logging.getLogger(__name__)

EXACT     = 'exact'
SHIFTED   = 'shifted'
MAJORITY  = 'majority'
ITERATIVE = 'iterative-majority'

INITIAL    = 'initial'
PROPAGATED = 'propagated'

# record entry of a pin without a proposal
MISSING = None


# Nets of a word with their bit index
@dataclass
class OrderedGroup:
    name : str
    nets : dict[int, int]


# Order given to a group
@dataclass
class OrderAssignment:
    group     : str
    indices   : dict[int, int]
    source    : str
    mechanism : str | None = None
    round     : int = 0

    def to_dict(self, netlist: Netlist) -> dict:
        return {
            'group'     : self.group,
            'indices'   : {netlist.gates[g].name: i for g, i in sorted(self.indices.items(), key=lambda kv: kv[1])},
            'source'    : self.source,
            'mechanism' : self.mechanism,
            'round'     : self.round,
        }


# Outcome of a propagation run
@dataclass
class BitOrderResult:
    assignments : dict[str, OrderAssignment]
    unordered   : list[str]
    rounds      : int
    initial     : list[str] = field(default_factory=list)

    def orders(self, netlist: Netlist, source: str | None = None) -> dict[str, dict[str, int]]:
        return {name: {netlist.gates[g].name: i for g, i in a.indices.items()}
                for name, a in self.assignments.items() if source is None or a.source == source}


# Is a list of indices a permutation of 0..n-1
def _is_permutation(values: Sequence[int]) -> bool:
    return sorted(values) == list(range(len(values)))


def _rebase(values: Sequence[int]) -> list[int]:
    low = min(values)
    return [v - low for v in values]


def _self_conflicting(record: Sequence[int | None]) -> bool:
    present = [v for v in record if v is not MISSING]
    return len(present) != len(set(present))


# Agree on one order from index records
def consensus(records: Iterable[Sequence[int | None]], size: int) -> tuple[list[int], str] | None:
    """
    Reduce index records to one order.

    The mechanisms are tried in sequence: exact agreement, agreement up to
    a shift (rebased to 0), per-pin majority over all pins, then iterative
    majority where entries repeating an index inside their record, or
    repeating one already taken, are masked.

    @type  records: list( list( int | None ) )
    @param records: One proposal per origin, None for a missing index

    @type  size: int
    @param size: Number of pins of the group

    @rtype:   tuple( list( int ), str ) | None
    @returns: The order and the mechanism that produced it
    """
    records = [list(r) for r in records]
    if any(len(r) != size for r in records):
        raise ValueError(f"records must have {size} entries")
    if not records or size == 0:
        return None
    complete = [r for r in records if MISSING not in r and not _self_conflicting(r)]

    if complete:
        first = complete[0]
        if all(r == first for r in complete) and _is_permutation(first):
            return first, EXACT
        rebased = [_rebase(r) for r in complete]
        if all(r == rebased[0] for r in rebased) and _is_permutation(rebased[0]):
            return rebased[0], SHIFTED

        # per-pin strict majority over complete records
        order = []
        for pin in range(size):
            value, count = Counter(r[pin] for r in complete).most_common(1)[0]
            if 2 * count <= len(complete):
                break
            order.append(value)
        if len(order) == size and _is_permutation(order):
            return order, MAJORITY

    # iterative majority over all records
    assigned: list[int | None] = [MISSING] * size
    changed = True
    while changed:
        changed = False
        taken = {v for v in assigned if v is not MISSING}
        votes = [Counter() for _ in range(size)]
        for r in records:
            live = {pin: v for pin, v in enumerate(r)
                    if v is not MISSING and assigned[pin] is MISSING and v not in taken}
            repeated = {v for v, c in Counter(live.values()).items() if c > 1}
            for pin, v in live.items():
                if v not in repeated:
                    votes[pin][v] += 1
        proposals = {}
        for pin in range(size):
            if assigned[pin] is not MISSING or not votes[pin]:
                continue
            ranked = votes[pin].most_common(2)
            if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
                continue
            proposals[pin] = ranked[0][0]
        clashes = {v for v, c in Counter(proposals.values()).items() if c > 1}
        for pin, v in proposals.items():
            if v not in clashes:
                assigned[pin] = v
                changed = True
    if MISSING in assigned:
        return None
    order = _rebase(assigned)
    return (order, ITERATIVE) if _is_permutation(order) else None


# Known orders of the BRAM and DSP port words
def port_orders(netlist: Netlist) -> list[OrderedGroup]:
    out = []
    for gate in netlist.gates:
        if gate.category not in (BRAM, DSP):
            continue
        for group in gate.type.pin_groups:
            nets = {}
            for i, pin in enumerate(group.pins):
                n = gate.net(pin)
                if n is not None and netlist.constant(n) is None:
                    nets.setdefault(n, i)
            if nets:
                out.append(OrderedGroup(f"{gate.name}.{group.name}", nets))
    return out


# Known orders of module pin groups
def module_orders(netlist: Netlist, modules: Iterable[ModuleGroup]) -> list[OrderedGroup]:
    out = []
    for m in modules:
        for pg, pins in m.pin_groups.items():
            nets = {}
            for gid, pin, i in pins:
                n = netlist.gates[gid].net(pin)
                if i is not None and n is not None and netlist.constant(n) is None:
                    nets.setdefault(n, i)
            if nets:
                out.append(OrderedGroup(f"{m.name}.{pg}", nets))
    return out


# Nets through which a unit member meets its neighbours
def _member_nets(netlist: Netlist, gid: int) -> tuple[list[int], list[int]]:
    gate = netlist.gates[gid]
    if gate.category == FF:
        ff = gate.type.ff
        d, q = gate.net(ff.data), gate.net(ff.output)
        return [n for n in (d,) if n is not None], [n for n in (q,) if n is not None]
    if gate.type.function == 'mux':
        return [gate.net('A'), gate.net('B')], [gate.net('Y')]
    return [n for _, n in gate.inputs()], [n for _, n in gate.outputs()]


# Walks along order-preserving paths
class _Walker:

    def __init__(self, netlist: Netlist, control: set[int]):
        self.netlist = netlist
        self.control = control

    # Nets reachable backward from a net
    def backward(self, nid: int) -> list[int]:
        netlist = self.netlist
        out, stack, seen = [], [nid], set()
        while stack:
            n = stack.pop()
            if n is None or n in seen or n in self.control or netlist.constant(n) is not None:
                continue
            seen.add(n)
            out.append(n)
            found = netlist.driver(n)
            if found is None:
                continue
            gate, _ = found
            f = gate.type.function
            if f in ('buf', 'inv'):
                stack.append(gate.net('A'))
            elif f == 'mux':
                stack += [gate.net('A'), gate.net('B')]
            elif gate.category == FF:
                stack.append(gate.net(gate.type.ff.data))
        return out

    # Nets reachable forward from a net
    def forward(self, nid: int) -> list[int]:
        netlist = self.netlist
        out, stack, seen = [], [nid], set()
        while stack:
            n = stack.pop()
            if n is None or n in seen or n in self.control:
                continue
            seen.add(n)
            out.append(n)
            for gate, pin in netlist.readers(n):
                f = gate.type.function
                if f in ('buf', 'inv') or (f == 'mux' and pin in ('A', 'B')):
                    stack.append(gate.net('Y'))
                elif gate.category == FF and pin == gate.type.ff.data:
                    stack.append(gate.net(gate.type.ff.output))
        return out


# Propagate known orders to register and MUX groups
def propagate(netlist: Netlist, units: Iterable[ModuleGroup], ordered: Iterable[OrderedGroup] = (),
              control_nets: Iterable[int] = (), max_rounds: int = 20,
              seeds: dict[str, dict[int, int]] | None = None) -> BitOrderResult:
    """
    Order groups round by round.

    A round collects one index record per neighbouring ordered word for
    every unordered group, against the state at the start of the round,
    and annotates the groups where consensus succeeds.

    @type  netlist: Netlist
    @param netlist: The netlist

    @type  units: list( ModuleGroup )
    @param units: Register and MUX groups to order

    @type  ordered: list( OrderedGroup )
    @param ordered: Words with a known order

    @type  control_nets: list( int )
    @param control_nets: Nets the walks never enter

    @type  max_rounds: int
    @param max_rounds: Round cap

    @type  seeds: dict( str -> dict( int -> int ) )
    @param seeds: Initial orders of units, gate id to index

    @rtype:   BitOrderResult
    @returns: Assignments of every ordered unit and the names left unordered
    """
    units = [u for u in units if len(u.gates) >= 2]
    walker = _Walker(netlist, set(control_nets))
    assignments: dict[str, OrderAssignment] = {}
    for name, indices in (seeds or {}).items():
        assignments[name] = OrderAssignment(name, dict(indices), INITIAL)

    # net -> [(origin, index)] of the fixed words
    fixed: dict[int, list[tuple[str, int]]] = {}
    for og in ordered:
        for n, i in og.nets.items():
            fixed.setdefault(n, []).append((og.name, i))

    def unit_nets(unit: ModuleGroup, indices: dict[int, int]) -> dict[int, int]:
        nets = {}
        for g, i in indices.items():
            ins, outs = _member_nets(netlist, g)
            for n in outs + (ins if netlist.gates[g].category == FF else []):
                nets.setdefault(n, i)
        return nets

    by_name = {u.name: u for u in units}
    walks: dict[int, tuple[list[int], list[int]]] = {}
    for u in units:
        for g in u.gates:
            ins, outs = _member_nets(netlist, g)
            back = [m for n in ins for m in walker.backward(n)]
            fwd  = [m for n in outs for m in walker.forward(n)]
            walks[g] = (back, fwd)

    rounds = 0
    for rounds in range(1, max_rounds + 1):
        index = {n: list(v) for n, v in fixed.items()}
        for name, a in assignments.items():
            if name in by_name:
                for n, i in unit_nets(by_name[name], a.indices).items():
                    index.setdefault(n, []).append((name, i))

        decided = []
        for u in units:
            if u.name in assignments:
                continue
            members = sorted(u.gates)
            proposals: dict[str, dict[int, set[int]]] = {}
            for g in members:
                back, fwd = walks[g]
                for n in back + fwd:
                    for origin, i in index.get(n, ()):
                        if origin == u.name:
                            continue
                        proposals.setdefault(origin, {}).setdefault(g, set()).add(i)
            records = []
            for origin in sorted(proposals):
                seen = proposals[origin]
                records.append([min(seen[g]) if len(seen.get(g, ())) == 1 else MISSING for g in members])
            found = consensus(records, len(members)) if records else None
            if found is not None:
                order, mechanism = found
                decided.append(OrderAssignment(u.name, dict(zip(members, order)), PROPAGATED, mechanism, rounds))

        if not decided:
            rounds -= 1
            break
        for a in decided:
            assignments[a.group] = a
            log.info("bitorder.annotate group=%s round=%d mechanism=%s", a.group, rounds, a.mechanism)

    unordered = [u.name for u in units if u.name not in assignments]
    for name in unordered:
        log.info("bitorder.unordered group=%s size=%d", name, len(by_name[name].gates))
    return BitOrderResult(assignments, unordered, max(rounds, 0),
                          [n for n, a in assignments.items() if a.source == INITIAL])


# Fractions of truth groups ordered and ordered correctly
def score_against_truth(assignment: dict[str, dict[str, int]],
                        truth_orders: dict[str, dict[str, int]]) -> tuple[float, float]:
    """
    Score orders against ground truth.

    A truth group counts as ordered when all its gates carry an index from
    the same assigned group. It is correct when those indices, rebased to
    start at 0, equal the truth indices rebased the same way.

    @type  assignment: dict( str -> dict( str -> int ) )
    @param assignment: Group to gate name to index

    @type  truth_orders: dict( str -> dict( str -> int ) )
    @param truth_orders: Truth group to gate name to index

    @rtype:   tuple( float, float )
    @returns: Ordered fraction over truth groups, correct fraction over the
              ordered ones (0.0 when none is ordered)
    """
    where: dict[str, tuple[str, int]] = {}
    for group, indices in assignment.items():
        for gate, i in indices.items():
            where[gate] = (group, i)

    total = ordered = correct = 0
    for _, truth in sorted(truth_orders.items()):
        if not truth:
            continue
        total += 1
        gates = sorted(truth)
        found = [where.get(g) for g in gates]
        if any(f is None for f in found) or len({f[0] for f in found}) != 1:
            continue
        ordered += 1
        if _rebase([f[1] for f in found]) == _rebase([truth[g] for g in gates]):
            correct += 1
    if not total:
        return 0.0, 0.0
    return ordered / total, (correct / ordered if ordered else 0.0)
