"""
    Dataflow grouping of single-bit gates into word-level structures.

    Every target gate starts in its own group, known groups are locked.
    Groups sharing their control signature and their predecessor groups or
    their successor groups are merged. A merged group whose successors (or
    predecessors) are several anchored words whose widths add up to its
    size is split along them. Rounds repeat until nothing changes.
"""

import logging

from dataclasses import dataclass
from typing      import Iterable

from netlist.ir      import Netlist, ModuleGroup
from netlist.library import FF, BRAM, DSP, CLOCK, ENABLE, RESET, SET, SELECT


log = logging.getLogger(__name__)

STRICT = 'strict'
LOOSE  = 'loose'

# pseudo groups of the global inputs and outputs
INPUTS  = 'IN'
OUTPUTS = 'OUT'

SIGNATURE_ROLES = {STRICT: (CLOCK, ENABLE, RESET, SET, SELECT), LOOSE: (CLOCK, ENABLE, SELECT)}


# Result of a grouping run
@dataclass
class Grouping:
    target : str
    groups : list[ModuleGroup]
    rounds : int = 0

    # Group name of every grouped gate
    def labels(self) -> dict[int, str]:
        return {g: m.name for m in self.groups for g in m.gates}

    # Groups large enough to be words
    def word_groups(self, min_size: int = 2) -> list[ModuleGroup]:
        return [m for m in self.groups if len(m.gates) >= min_size]

    def named_labels(self, netlist: Netlist) -> dict[str, str]:
        return {netlist.gates[g].name: name for g, name in self.labels().items()}

    def to_dict(self, netlist: Netlist) -> dict:
        return {
            'target' : self.target,
            'rounds' : self.rounds,
            'groups' : [{'name': m.name, 'size': len(m.gates), 'locked': m.locked,
                         'gates': sorted(netlist.gates[g].name for g in m.gates),
                         'provenance': m.provenance}
                        for m in self.groups],
        }


# Target gates of a grouping run
def target_gates(netlist: Netlist, target: str) -> list[int]:
    if target == 'ff':
        return [g.id for g in netlist.gates if g.category == FF]
    if target == 'mux':
        return [g.id for g in netlist.gates if g.type.function == 'mux']
    return [g.id for g in netlist.gates if g.type.name == target]


def _kind(target: str) -> str:
    return {'ff': 'register', 'mux': 'word-mux'}.get(target, 'other')


# An anchored word: a context group or one of its pin groups
@dataclass(frozen=True)
class _Word:
    anchor : str
    pins   : str | None
    width  : int


# Walks through combinational logic between target gates and anchors
class _Tracer:

    def __init__(self, netlist: Netlist, targets: set[int], anchors: dict[int, str],
                 words: dict[tuple[int, str], _Word]):
        self.netlist = netlist
        self.targets = targets
        self.anchors = anchors
        self.words   = words

    # Token of a gate pin reached by a walk, None to keep walking
    def _token(self, gid: int, pin: str):
        if gid in self.targets:
            return ('g', gid)
        if gid in self.anchors:
            word = self.words.get((gid, pin))
            return ('a', self.anchors[gid], word.pins if word else None)
        gate = self.netlist.gates[gid]
        if gate.is_sequential:
            return ('s', gid)
        return None

    # Endpoints reached backward from the data pins of a gate
    def predecessors(self, gid: int, pins: Iterable[str]) -> set:
        netlist = self.netlist
        out, seen = set(), set()
        stack = [netlist.gates[gid].net(p) for p in pins]
        while stack:
            n = stack.pop()
            if n is None or n in seen:
                continue
            seen.add(n)
            net = netlist.nets[n]
            if net.constant is not None:
                continue
            if net.global_in or not net.sources:
                out.add((INPUTS,))
                continue
            src, pin = net.sources[0]
            token = self._token(src, pin)
            if token is not None:
                out.add(token)
                continue
            stack += [i for _, i in netlist.gates[src].inputs()]
        return out

    # Endpoints reached forward from the outputs of a gate
    def successors(self, gid: int) -> set:
        netlist = self.netlist
        out, seen = set(), set()
        stack = [n for _, n in netlist.gates[gid].outputs()]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            net = netlist.nets[n]
            if net.global_out:
                out.add((OUTPUTS,))
            for dst, pin in net.destinations:
                gate = netlist.gates[dst]
                if gate.type.pin(pin).role == CLOCK:
                    continue
                token = self._token(dst, pin)
                if token is not None:
                    out.add(token)
                    continue
                stack += [o for _, o in gate.outputs()]
        return out


# Anchors: context groups plus every BRAM and DSP gate
def _anchors(netlist: Netlist, context: list[ModuleGroup]) -> tuple[dict[int, str], dict[tuple[int, str], _Word], dict[str, int]]:
    anchors: dict[int, str] = {}
    words: dict[tuple[int, str], _Word] = {}
    widths: dict[str, int] = {}
    for m in context:
        for g in m.gates:
            anchors.setdefault(g, m.name)
        widths[m.name] = len(m.gates)
        for pg, pins in m.pin_groups.items():
            w = _Word(m.name, pg, len(pins))
            for gid, pin, _ in pins:
                words[(gid, pin)] = w
    for gate in netlist.gates:
        if gate.category in (BRAM, DSP) and gate.id not in anchors:
            name = f"{gate.category}:{gate.name}"
            anchors[gate.id] = name
            widths[name] = 1
            for group in gate.type.pin_groups:
                w = _Word(name, group.name, len(group.pins))
                for pin in group.pins:
                    words[(gate.id, pin)] = w
    return anchors, words, widths


# Group target gates
def group(netlist: Netlist, target: str = 'ff', known_groups: Iterable[ModuleGroup] = (),
          signature: str = STRICT, max_rounds: int = 50) -> Grouping:
    """
    Group the target gates of a netlist.

    @type  netlist: Netlist
    @param netlist: The netlist

    @type  target: str
    @param target: 'ff', 'mux' or a gate type name

    @type  known_groups: list( ModuleGroup )
    @param known_groups: Groups of target gates are locked seeds, any
                         other group is a context anchor

    @type  signature: str
    @param signature: 'strict' compares clock, enable, reset, set and select
                      nets, 'loose' ignores reset and set nets

    @type  max_rounds: int
    @param max_rounds: Round cap

    @rtype:   Grouping
    @returns: A partition of the target gates
    """
    targets = target_gates(netlist, target)
    target_set = set(targets)
    known_groups = list(known_groups)
    locked = [m for m in known_groups if m.gates and m.gates <= target_set]
    context = [m for m in known_groups if m not in locked]
    anchors, words, widths = _anchors(netlist, context)
    tracer = _Tracer(netlist, target_set, anchors, words)
    word_widths = {(w.anchor, w.pins): w.width for w in words.values()}
    roles = SIGNATURE_ROLES[signature]

    # per-gate facts, computed once
    control: dict[int, tuple] = {}
    preds: dict[int, set] = {}
    succs: dict[int, set] = {}
    for gid in targets:
        gate = netlist.gates[gid]
        nets, data = [], []
        for pin, n in gate.inputs():
            role = gate.type.pin(pin).role
            if role in roles:
                nets.append(n)
            elif role not in (CLOCK, ENABLE, RESET, SET, SELECT):
                data.append(pin)
        control[gid] = tuple(sorted(nets))
        preds[gid] = tracer.predecessors(gid, data)
        succs[gid] = tracer.successors(gid)

    # seeds
    member: dict[int, str] = {}
    groups: dict[str, dict] = {}
    for m in locked:
        groups[m.name] = {'gates': set(m.gates), 'locked': True, 'provenance': list(m.provenance) or ['known'],
                          'module': m}
        for g in m.gates:
            member[g] = m.name
    for gid in targets:
        if gid not in member:
            name = f"g{gid}"
            groups[name] = {'gates': {gid}, 'locked': False, 'provenance': ['seed']}
            member[gid] = name
    cannot: set[frozenset[str]] = set()

    def resolve(tokens: set) -> frozenset:
        out = set()
        for t in tokens:
            if t[0] == 'g':
                out.add(('g', member[t[1]]))
            else:
                out.add(t)
        return frozenset(out)

    def signature_of(name: str) -> tuple:
        return control[min(groups[name]['gates'])]

    def side(name: str, facts: dict[int, set]) -> frozenset:
        return resolve(set().union(*(facts[g] for g in groups[name]['gates'])))

    def merge_buckets(facts: dict[int, set], why: str) -> int:
        buckets: dict[tuple, list[str]] = {}
        for name in sorted(groups, key=lambda n: min(groups[n]['gates'])):
            if groups[name]['locked']:
                continue
            key = side(name, facts)
            if not key:
                continue
            buckets.setdefault((signature_of(name), key), []).append(name)
        merged = 0
        for names in buckets.values():
            # greedy subsets free of cannot-link pairs, lowest gate id first
            while len(names) > 1:
                head, rest, left = names[0], [], []
                taken = [head]
                for n in names[1:]:
                    if any(frozenset((n, t)) in cannot for t in taken):
                        left.append(n)
                    else:
                        taken.append(n)
                for n in taken[1:]:
                    g = groups.pop(n)
                    groups[head]['gates'] |= g['gates']
                    groups[head]['provenance'].append(f"{why} {n}")
                    for gid in g['gates']:
                        member[gid] = head
                    for pair in [p for p in cannot if n in p]:
                        cannot.discard(pair)
                        (other,) = pair - {n}
                        cannot.add(frozenset((head, other)))
                    merged += 1
                names = left
        return merged

    # word of each member on one side, None when not exactly one anchored word
    def member_word(gid: int, facts: dict[int, set]):
        found = set()
        for t in facts[gid]:
            if t[0] == 'a':
                found.add((t[1], t[2]))
            elif t[0] == 'g' and groups[member[t[1]]]['locked']:
                found.add((member[t[1]], None))
        return found.pop() if len(found) == 1 else None

    def word_width(word) -> int:
        anchor, pins = word
        if anchor in groups:
            return len(groups[anchor]['gates'])
        if pins is None:
            return widths.get(anchor, 0)
        return word_widths.get(word, 0)

    def split_pass() -> int:
        count = 0
        for name in sorted(groups, key=lambda n: min(groups[n]['gates'])):
            g = groups[name]
            if g['locked'] or len(g['gates']) < 2:
                continue
            for facts, why in ((succs, 'split-successors'), (preds, 'split-predecessors')):
                parts: dict = {}
                for gid in g['gates']:
                    word = member_word(gid, facts)
                    if word is None:
                        parts = None
                        break
                    parts.setdefault(word, set()).add(gid)
                if not parts or len(parts) < 2:
                    continue
                if any(len(ms) != word_width(w) for w, ms in parts.items()):
                    continue
                pieces = sorted(parts.values(), key=min)
                new_names = []
                del groups[name]
                for ms in pieces:
                    n = f"g{min(ms)}"
                    groups[n] = {'gates': set(ms), 'locked': False, 'provenance': g['provenance'] + [why]}
                    for gid in ms:
                        member[gid] = n
                    new_names.append(n)
                for i, a in enumerate(new_names):
                    for b in new_names[i + 1:]:
                        cannot.add(frozenset((a, b)))
                log.info("group.split group=%s parts=%s", name, [len(p) for p in pieces])
                count += 1
                break
        return count

    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        merged = merge_buckets(preds, 'merged-predecessors')
        merged += merge_buckets(succs, 'merged-successors')
        split = split_pass()
        log.debug("group.round round=%d merged=%d split=%d groups=%d", rounds, merged, split, len(groups))
        if not merged and not split:
            break
    else:
        log.info("group.round_cap rounds=%d", max_rounds)

    kind = _kind(target)
    out = []
    for name in sorted(groups, key=lambda n: min(groups[n]['gates'])):
        g = groups[name]
        if g['locked']:
            out.append(g['module'])
        else:
            out.append(ModuleGroup(name, kind, frozenset(g['gates']), provenance=g['provenance']))
    small = sum(1 for m in out if len(m.gates) < 2)
    log.info("group.done target=%s groups=%d singletons=%d rounds=%d", target, len(out), small, rounds)
    return Grouping(target, out, rounds)
