"""
    Candidate generation for arithmetic identification.

    Structural candidates grow a gate set around a carry chain by layers of
    succeeding and preceding combinational gates. Functional candidates
    derive the output functions of a structural candidate and propose
    operand partitions, control inputs and bit orders from them.
"""

import itertools
import logging
import math

from dataclasses import dataclass, field
from typing      import Iterable

from analysis.chains  import CarryChain
from logic.boolfunc   import BoolFunc, EquivalenceChecker, NODE_BUDGET
from netlist.errors   import PassError
from netlist.ir       import Netlist
from netlist.library  import CARRY, CONSTANT, IO, SELECT, ENABLE, FF
from netlist.semantics import FunctionBuilder


log = logging.getLogger(__name__)

# operand families
BINARY = 'binary'
UNARY  = 'unary'


# A gate set around a carry chain
@dataclass(frozen=True)
class StructuralCandidate:
    chain   : CarryChain
    gates   : frozenset[int]
    inputs  : tuple[int, ...]
    outputs : tuple[int, ...]
    variant : str


# One interpretation of a structural candidate
@dataclass
class FunctionalCandidate:
    structure : StructuralCandidate
    functions : dict[int, BoolFunc]
    outputs   : list[int]
    operands  : list[list[int]]
    controls  : list[int]
    family    : str
    variation : int = 0
    feedback  : bool = False
    hints     : dict = field(default_factory=dict)

    # Operand variables interleaved bit by bit
    @property
    def order(self) -> list[int]:
        out = []
        for bits in itertools.zip_longest(*self.operands):
            out += [b for b in bits if b is not None]
        return out

    @property
    def width(self) -> int:
        return len(self.operands[0])


# Can a gate join the candidate of a chain
def _expandable(netlist: Netlist, gid: int, chain_gates: frozenset[int]) -> bool:
    gate = netlist.gates[gid]
    if gate.is_sequential or gate.category in (CONSTANT, IO):
        return False
    return gate.category != CARRY or gid in chain_gates


# Nets driven by a gate set
def _driven(netlist: Netlist, gates: Iterable[int]) -> set[int]:
    return {n for g in gates for _, n in netlist.gates[g].outputs()}


# Boundary nets of a gate set
def boundary(netlist: Netlist, gates: frozenset[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """
    Compute the inputs and outputs of a gate set.

    @type  netlist: Netlist
    @param netlist: The netlist

    @type  gates: frozenset( int )
    @param gates: The gate set

    @rtype:   tuple( tuple( int ), tuple( int ) )
    @returns: Input nets (read, not driven, not constant) and output nets
              (driven, read outside the set or global outputs), sorted
    """
    driven = _driven(netlist, gates)
    inputs = set()
    for g in gates:
        for _, n in netlist.gates[g].inputs():
            if n not in driven and netlist.constant(n) is None:
                inputs.add(n)
    outputs = set()
    for n in driven:
        net = netlist.nets[n]
        if net.global_out or any(d not in gates for d, _ in net.destinations):
            outputs.add(n)
    return tuple(sorted(inputs)), tuple(sorted(outputs))


# Absorb driver gates that only feed the set and read nothing new
def _absorb(netlist: Netlist, gates: set[int], chain_gates: frozenset[int]) -> set[int]:
    changed = True
    while changed:
        changed = False
        driven = _driven(netlist, gates)
        inputs, _ = boundary(netlist, frozenset(gates))
        known = driven | set(inputs)
        for n in inputs:
            found = netlist.driver(n)
            if found is None:
                continue
            d = found[0]
            if d.id in gates or not _expandable(netlist, d.id, chain_gates):
                continue
            outs = [o for _, o in d.outputs()]
            if any(netlist.nets[o].global_out for o in outs):
                continue
            if any(r not in gates for o in outs for r, _ in netlist.nets[o].destinations):
                continue
            if all(src in known or netlist.constant(src) is not None for _, src in d.inputs()):
                gates.add(d.id)
                changed = True
    return gates


def _succeed(netlist: Netlist, gates: set[int], chain_gates: frozenset[int]) -> set[int]:
    out = set(gates)
    for n in _driven(netlist, gates):
        for r, _ in netlist.nets[n].destinations:
            if _expandable(netlist, r, chain_gates):
                out.add(r)
    return out


def _precede(netlist: Netlist, gates: set[int], chain_gates: frozenset[int]) -> set[int]:
    out = set(gates)
    inputs, _ = boundary(netlist, frozenset(gates))
    for n in inputs:
        found = netlist.driver(n)
        if found is not None and _expandable(netlist, found[0].id, chain_gates):
            out.add(found[0].id)
    return out


# Nets the chain reads on its operand and carry-in pins
def _chain_reads(netlist: Netlist, chain: CarryChain) -> set[int]:
    out = set()
    for p in chain.positions:
        gate = netlist.gates[p.gate]
        for pin in p.operands + (p.carry_in,):
            n = gate.net(pin)
            if n is not None and netlist.constant(n) is None:
                out.add(n)
    return out


# Add gates beside the chain that compute from its operands only
def _siblings(netlist: Netlist, gates: set[int], chain: CarryChain) -> set[int]:
    """
    Add the combinational readers of the chain operand nets whose inputs
    are all known to the set.

    A sibling never feeds a carry gate of another chain. The low sum bit of
    a chain whose carry in folded to a constant is such a gate: it reads
    the operand bits only.

    @rtype:   set( int )
    @returns: The enlarged gate set
    """
    chain_gates = frozenset(chain.gates)
    out = set(gates)
    frontier = _chain_reads(netlist, chain)
    while frontier:
        driven = _driven(netlist, out)
        inputs, _ = boundary(netlist, frozenset(out))
        known = driven | set(inputs)
        added = set()
        for n in sorted(frontier):
            for r, _ in netlist.nets[n].destinations:
                if r in out or r in added or not _expandable(netlist, r, chain_gates):
                    continue
                gate = netlist.gates[r]
                if not all(src in known or netlist.constant(src) is not None for _, src in gate.inputs()):
                    continue
                feeds_carry = any(netlist.gates[d].category == CARRY and d not in chain_gates
                                  for _, o in gate.outputs() for d, _ in netlist.nets[o].destinations)
                if not feeds_carry:
                    added.add(r)
        out |= added
        frontier = _driven(netlist, added)
    return out


# One expansion step: absorb, then take in siblings when asked
def _grow(netlist: Netlist, gates: set[int], chain: CarryChain, siblings: bool) -> set[int]:
    chain_gates = frozenset(chain.gates)
    gates = _absorb(netlist, gates, chain_gates)
    if siblings:
        gates = _absorb(netlist, _siblings(netlist, gates, chain), chain_gates)
    return gates


# Grow the candidate gate sets of a chain
def build_structural_candidates(chain: CarryChain, netlist: Netlist,
                                layers: int = 2, max_variants: int = 256) -> list[StructuralCandidate]:
    """
    Build structural candidates around a carry chain.

    Variant (p, s) adds s layers of succeeding gates then p layers of
    preceding gates to the chain. After every layer, gates that only feed
    the set and read only its boundary are absorbed. Variants suffixed
    with "+" also take in the siblings of the chain after every layer,
    gates computing from the chain operands and the set alone.

    @type  chain: CarryChain
    @param chain: The carry chain

    @type  netlist: Netlist
    @param netlist: The netlist holding the chain

    @type  layers: int
    @param layers: Maximum number of layers in each direction

    @type  max_variants: int
    @param max_variants: Maximum number of candidates kept

    @rtype:   list( StructuralCandidate )
    @returns: Candidates deduplicated by gate set, smallest expansion first
    """
    chain_gates = frozenset(chain.gates)
    seen: set[frozenset[int]] = set()
    out = []
    overflow = 0
    grid = sorted(itertools.product(range(layers + 1), range(layers + 1), (False, True)),
                  key=lambda pst: (pst[0] + pst[1], pst[1], pst[0], pst[2]))
    for p, s, siblings in grid:
        gates = _grow(netlist, set(chain_gates), chain, siblings)
        for _ in range(s):
            gates = _grow(netlist, _succeed(netlist, gates, chain_gates), chain, siblings)
        for _ in range(p):
            gates = _grow(netlist, _precede(netlist, gates, chain_gates), chain, siblings)
        key = frozenset(gates)
        if key in seen:
            continue
        seen.add(key)
        if len(out) >= max_variants:
            overflow += 1
            continue
        inputs, outputs = boundary(netlist, key)
        out.append(StructuralCandidate(chain, key, inputs, outputs, f"p{p}s{s}" + ("+" if siblings else "")))
    if overflow:
        log.info("arith.variant_cap chain=%s kept=%d dropped=%d",
                 netlist.gates[chain.head].name, len(out), overflow)
    return out


# Does a candidate output reach one of its inputs through flip-flops
def has_feedback(netlist: Netlist, outputs: Iterable[int], inputs: Iterable[int], depth: int = 64) -> bool:
    targets = set(inputs)
    seen = set()
    frontier = list(outputs)
    for _ in range(depth):
        nxt = []
        for n in frontier:
            if n in seen:
                continue
            seen.add(n)
            for gid, pin in netlist.nets[n].destinations:
                gate = netlist.gates[gid]
                if gate.category == FF:
                    if pin != gate.type.ff.data:
                        continue
                    q = gate.net(gate.type.ff.output)
                    if q is None:
                        continue
                    if q in targets:
                        return True
                    nxt.append(q)
                elif not gate.is_sequential:
                    nxt += [o for _, o in gate.outputs()]
        if not nxt:
            return False
        frontier = nxt
    return False


# Chain position reached by each input
def _ranks(chain: CarryChain, netlist: Netlist, builder: FunctionBuilder, inputs: Iterable[int]) -> dict[int, int]:
    rank = {x: len(chain) for x in inputs}
    for i, pos in enumerate(chain.positions):
        gate = netlist.gates[pos.gate]
        pins = list(pos.operands) + ([pos.carry_in] if i == 0 else [])
        for pin in pins:
            n = gate.net(pin)
            if n is None:
                continue
            for x in builder.function(n).support:
                if x in rank and rank[x] > i:
                    rank[x] = i
    return rank


# Inputs reaching the first operand pin of a carry position
def _first_operand_inputs(chain: CarryChain, netlist: Netlist, builder: FunctionBuilder) -> set[int]:
    out = set()
    for pos in chain.positions:
        n = netlist.gates[pos.gate].net(pos.operands[0])
        if n is not None:
            out |= builder.function(n).support
    return out


# Inputs read by select or enable pins inside the candidate
def _select_inputs(netlist: Netlist, cand: StructuralCandidate) -> set[int]:
    inputs = set(cand.inputs)
    out = set()
    for g in cand.gates:
        gate = netlist.gates[g]
        for pin, n in gate.inputs():
            if n in inputs and gate.type.pin(pin).role in (SELECT, ENABLE):
                out.add(n)
    return out


# Orders of groups of tied elements, at most `cap`, and whether some were dropped
def _variations(groups: list[list], cap: int) -> tuple[list[list], bool]:
    total = math.prod(math.factorial(len(g)) for g in groups)
    options = [itertools.permutations(g) for g in groups]
    out = []
    for combo in itertools.islice(itertools.product(*options), cap):
        out.append([x for part in combo for x in part])
    return out, total > cap


def _tie_groups(items: list, key) -> list[list]:
    return [list(g) for _, g in itertools.groupby(items, key=key)]


# Propose functional interpretations of a structural candidate
def derive_functional_candidates(cand: StructuralCandidate, netlist: Netlist,
                                 max_width: int = 33, max_controls: int = 6,
                                 max_variations: int = 8,
                                 budget: int = NODE_BUDGET) -> list[FunctionalCandidate]:
    """
    Derive output functions and propose operand partitions.

    Inputs influencing more outputs are less significant, outputs depending
    on fewer inputs are less significant. Control inputs are the inputs
    whose cofactors make the most outputs constant, then inputs read by
    select pins, then the most influential ones. Exact ties in either order
    produce variations.

    @type  cand: StructuralCandidate
    @param cand: The structural candidate

    @type  netlist: Netlist
    @param netlist: The netlist holding the candidate

    @rtype:   list( FunctionalCandidate )
    @returns: Candidates with the fewest controls first

    @raise PassError: more outputs than max_width
    """
    if len(cand.outputs) > max_width:
        raise PassError('arith', f"width cap exceeded: {len(cand.outputs)} outputs, cap {max_width}")
    if not cand.outputs or not cand.inputs:
        return []

    builder = FunctionBuilder(netlist, gates=cand.gates)
    functions = {o: builder.function(o) for o in cand.outputs}
    rank = _ranks(cand.chain, netlist, builder, cand.inputs)
    checker = EquivalenceChecker(sorted(cand.inputs, key=lambda x: (rank[x], x)), budget)

    support = {o: frozenset(x for x in cand.inputs if checker.depends(f, x)) for o, f in functions.items()}
    influence = {x: sum(1 for o in cand.outputs if x in support[o]) for x in cand.inputs}
    first = _first_operand_inputs(cand.chain, netlist, builder)
    selects = _select_inputs(netlist, cand)

    # outputs made constant by a cofactor of each input
    constant = {}
    for x in cand.inputs:
        best = 0
        for value in (0, 1):
            count = sum(1 for f in functions.values() if f.substitute({x: value}).is_const)
            best = max(best, count)
        constant[x] = best

    # output order
    carry_driven = {o for o in cand.outputs if netlist.driver(o)[0].category == CARRY and 'CO' in netlist.driver(o)[1]}
    def out_key(o):
        return (len(support[o]), max((rank[x] for x in support[o]), default=0), o in carry_driven)
    ordered_outputs = sorted(cand.outputs, key=lambda o: out_key(o) + (o,))
    output_orders, capped = _variations(_tie_groups(ordered_outputs, out_key), max_variations)

    control_rank = sorted(cand.inputs, key=lambda x: (-constant[x], -(x in selects), -influence[x], -rank[x], x))
    n_in, n_out = len(cand.inputs), len(cand.outputs)
    feedback = None
    out: list[FunctionalCandidate] = []

    for k in range(0, min(max_controls, n_in - 1) + 1):
        controls = sorted(control_rank[:k])
        data = [x for x in cand.inputs if x not in controls]
        data_key = lambda x: (-influence[x], rank[x])
        data = sorted(data, key=lambda x: data_key(x) + (x,))
        m = len(data)

        # two operands of m/2 bits
        if m >= 2 and m % 2 == 0 and n_out in (1, m // 2, m // 2 + 1):
            pairs = []
            for i in range(0, m, 2):
                a, b = data[i], data[i + 1]
                if (b in first) and not (a in first):
                    a, b = b, a
                pairs.append((a, b))
            pair_key = lambda p: (data_key(p[0]), data_key(p[1]))
            orders, dropped = _variations(_tie_groups(pairs, pair_key), max_variations)
            capped |= dropped
            for v, order in enumerate(orders):
                for swap in (False, True):
                    a = [p[1] if swap else p[0] for p in order]
                    b = [p[0] if swap else p[1] for p in order]
                    for w, outs in enumerate(output_orders):
                        out.append(FunctionalCandidate(cand, functions, outs, [a, b], controls, BINARY,
                                                       len(out), hints={'swapped': swap, 'order': v, 'outputs': w}))

        # one operand of m bits
        if m >= 1 and n_out in (m, m + 1):
            if feedback is None:
                feedback = has_feedback(netlist, cand.outputs, cand.inputs)
            orders, dropped = _variations(_tie_groups(data, data_key), max_variations)
            capped |= dropped
            for v, order in enumerate(orders):
                for w, outs in enumerate(output_orders):
                    out.append(FunctionalCandidate(cand, functions, outs, [list(order)], controls, UNARY,
                                                   len(out), feedback, {'order': v, 'outputs': w}))

    if capped:
        log.info("arith.variation_cap variant=%s cap=%d", cand.variant, max_variations)
    return out
