import itertools
import numpy as np
import pytest

from analysis.arith      import arithmetic_modules, classify_arithmetic
from analysis.bitorder   import (EXACT, INITIAL, ITERATIVE, MAJORITY, PROPAGATED, SHIFTED,
                                 OrderedGroup, consensus, module_orders, port_orders, propagate,
                                 score_against_truth)
from analysis.grouping   import target_gates
from analysis.preprocess import preprocess
from fixtures.builder    import NetlistBuilder, lit
from fixtures.generator  import FixtureSpec, generate
from netlist.ir          import ModuleGroup


@pytest.mark.parametrize('records, expected', [
    ([[0, 1, 2], [0, 1, 2]], ([0, 1, 2], EXACT)),
    ([[1, 2, 3], [0, 1, 2]], ([0, 1, 2], SHIFTED)),
    ([[0, 1, 2], [0, 1, 2], [2, 1, 0]], ([0, 1, 2], MAJORITY)),
    ([[0, 1, None], [0, None, 2]], ([0, 1, 2], ITERATIVE)),
    ([[4, None, 6], [None, 5, None]], ([0, 1, 2], ITERATIVE)),
    ([[0, 0, 1]], None),
    ([[0, 1, 2], [2, 1, 0]], None),
    ([], None),
])
def test_consensus(records, expected):
    assert consensus(records, 3) == expected


# Worked records, one per mechanism
@pytest.mark.parametrize('records, expected', [
    ([[1, 2, 3], [2, 3, 4]], ([0, 1, 2], SHIFTED)),
    ([[0, 1, 2], [0, 1, 2], [4, 3, 7]], ([0, 1, 2], MAJORITY)),
    ([[0, None, 2], [0, None, 2], [None, 1, 1]], ([0, 1, 2], ITERATIVE)),
])
def test_consensus_worked_records(records, expected):
    assert consensus(records, 3) == expected


# Order agreeing with the most record entries, complete records rebased
def _best_order(records, size):
    def agreement(order):
        total = 0
        for r in records:
            low = min(r) if None not in r else 0
            total += sum(1 for pin, v in enumerate(r) if v is not None and v - low == order[pin])
        return total

    scores = sorted(((agreement(p), list(p)) for p in itertools.permutations(range(size))), reverse=True)
    if scores[0][0] == scores[1][0]:
        return None
    return scores[0][1]


def _consensus_cases(count=50, seed=7):
    rng = np.random.default_rng(seed)
    cases = []
    for k in range(count):
        size = int(rng.integers(3, 7))
        truth = [int(v) for v in rng.permutation(size)]
        kind = (SHIFTED, MAJORITY, ITERATIVE)[k % 3]
        if kind == SHIFTED:
            offsets = [int(o) for o in rng.integers(0, 6, size=int(rng.integers(2, 5)))]
            offsets[0] = max(offsets[0], 1)
            records = [[v + o for v in truth] for o in offsets]
        elif kind == MAJORITY:
            half = int(rng.integers(1, 3))
            records = [list(truth) for _ in range(half + 1)]
            for _ in range(half):
                other = truth
                while other == truth:
                    other = [int(v) for v in rng.permutation(size)]
                offset = int(rng.integers(0, 4))
                records.append([v + offset for v in other])
            records = [records[i] for i in rng.permutation(len(records))]
        else:
            records = []
            for _ in range(int(rng.integers(2, 4))):
                mask = rng.random(size) < 0.4
                if not mask.any():
                    mask[int(rng.integers(size))] = True
                records.append([None if m else v for m, v in zip(mask, truth)])
            for pin in range(size):
                if all(r[pin] is None for r in records):
                    records.append([truth[pin] if p == pin else None for p in range(size)])
            # one record repeating an index is masked out
            a, b = (int(p) for p in rng.choice(size, 2, replace=False))
            noisy = [None] * size
            noisy[a] = noisy[b] = truth[a]
            records.append(noisy)
        cases.append((kind, truth, records))
    return cases


@pytest.mark.parametrize('kind, truth, records', _consensus_cases())
def test_consensus_matches_exhaustive_search(kind, truth, records):
    assert _best_order(records, len(truth)) == truth
    assert consensus(records, len(truth)) == (truth, kind)


def test_consensus_record_length():
    with pytest.raises(ValueError):
        consensus([[0, 1]], 3)


def test_score_against_truth():
    truth = {'A': {'a0': 0, 'a1': 1}, 'B': {'b0': 0, 'b1': 1}}
    assert score_against_truth({'g': {'a0': 5, 'a1': 6}}, truth) == (0.5, 1.0)
    assert score_against_truth({'g': {'a0': 1, 'a1': 0}}, truth) == (0.5, 0.0)
    # split across two groups is not ordered
    assert score_against_truth({'g': {'a0': 0}, 'h': {'a1': 1}}, truth) == (0.0, 0.0)
    assert score_against_truth({}, {}) == (0.0, 0.0)


# Register units named after the ground truth
def _truth_units(netlist, truth) -> list[ModuleGroup]:
    return [ModuleGroup(label, 'register', frozenset(netlist.gate_by_name(g).id for g in gates))
            for label, gates in truth.groups().items()]


def _truth_indices(netlist, truth, name) -> dict[int, int]:
    return {netlist.gate_by_name(g).id: i for g, i in truth.bit_orders[name].items()}


@pytest.mark.parametrize('arch', ['ice40-like', 'x7-like'])
def test_counter_ordered_from_arithmetic(arch):
    fixture = generate(FixtureSpec('counter-with-reset', 4, arch))
    netlist, _ = preprocess(fixture.netlist)
    structures, _ = classify_arithmetic(netlist)
    modules = arithmetic_modules(netlist, structures)

    result = propagate(netlist, _truth_units(netlist, fixture.truth), module_orders(netlist, modules))
    assignment = result.assignments['q']
    assert assignment.source == PROPAGATED
    assert assignment.mechanism == EXACT
    assert assignment.round == 1
    assert assignment.indices == _truth_indices(netlist, fixture.truth, 'q')
    assert result.unordered == []


def test_word_mux_ordered_from_seed():
    fixture = generate(FixtureSpec('word-mux-fanout', 4))
    netlist, _ = preprocess(fixture.netlist)
    mux = ModuleGroup('mux', 'word-mux', frozenset(target_gates(netlist, 'mux')))
    units = _truth_units(netlist, fixture.truth) + [mux]
    seeds = {'ra': _truth_indices(netlist, fixture.truth, 'ra')}

    result = propagate(netlist, units, seeds=seeds)
    assert result.initial == ['ra']
    assert result.assignments['ra'].source == INITIAL
    assert result.unordered == []
    assert result.assignments['rb'].round == 2
    ordered, correct = score_against_truth(result.orders(netlist), fixture.truth.bit_orders)
    assert ordered == 1.0
    assert correct == 1.0


def test_control_nets_block_walks():
    fixture = generate(FixtureSpec('word-mux-fanout', 4))
    netlist, _ = preprocess(fixture.netlist)
    units = _truth_units(netlist, fixture.truth)
    a_nets = {netlist.net_by_name(f"ra[{i}]").id: i for i in range(4)}
    ordered = [OrderedGroup('ra.Q', a_nets)]

    free = propagate(netlist, units, ordered)
    assert 'ro' in free.assignments
    blocked = propagate(netlist, units, ordered, control_nets=list(a_nets))
    assert 'ro' not in blocked.assignments
    assert 'ro' in blocked.unordered


def test_round_cap():
    fixture = generate(FixtureSpec('word-mux-fanout', 4))
    netlist, _ = preprocess(fixture.netlist)
    units = _truth_units(netlist, fixture.truth)
    seeds = {'ra': _truth_indices(netlist, fixture.truth, 'ra')}
    result = propagate(netlist, units, seeds=seeds, max_rounds=1)
    assert result.rounds == 1
    assert 'rb' in result.unordered


# Adder into a register, a word MUX and a BRAM write port
def _propagation_chain(arch: str, width: int = 8):
    b = NetlistBuilder(arch)
    r_in = b.register('r_in', b.inputs('a', width), enable=b.input('en_in'))
    s = b.wires('sum', width)
    b.carry_add('add', [lit(n) for n in r_in], [lit(n) for n in b.inputs('b', width)], 0, s)
    r_sum = b.register('r_sum', s, enable=b.input('en_sum'))
    r_alt = b.register('r_alt', b.inputs('c', width), enable=b.input('en_alt'))
    y = b.wires('y', width)
    b.word_mux('sel', b.input('sel'), r_sum, r_alt, y)

    ram, abits, din, dout = ('SB_RAM256x16', 8, 'WDATA', 'RDATA') if arch == 'ice40-like' else \
                            ('RAMB18E1', 9, 'DI', 'DO')
    pins = {'CLK': b.clock, 'RE': b.input('re'), 'WE': b.input('we')}
    pins.update({f"RADDR[{i}]": n for i, n in enumerate(b.inputs('raddr', abits))})
    pins.update({f"WADDR[{i}]": n for i, n in enumerate(b.inputs('waddr', abits))})
    pins.update({f"{din}[{i}]": n for i, n in enumerate(list(y) + [b.const0] * (16 - width))})
    pins.update({f"{dout}[{i}]": n for i, n in enumerate(b.wires('q', 16, global_out=True))})
    b.gate(ram, 'ram', pins)
    return b.build(), b.truth


@pytest.mark.parametrize('arch', ['ice40-like', 'x7-like'])
def test_propagation_chain(arch):
    netlist, truth = _propagation_chain(arch)
    netlist, _ = preprocess(netlist)
    structures, _ = classify_arithmetic(netlist)
    modules = arithmetic_modules(netlist, structures)
    mux = ModuleGroup('mux', 'word-mux', frozenset(target_gates(netlist, 'mux')))
    units = _truth_units(netlist, truth) + [mux]

    result = propagate(netlist, units, module_orders(netlist, modules) + port_orders(netlist))
    assert result.unordered == []
    assert sorted(result.assignments) == ['mux', 'r_alt', 'r_in', 'r_sum']
    assert all(1 <= a.round <= 2 for a in result.assignments.values())
    assert score_against_truth(result.orders(netlist), truth.bit_orders) == (1.0, 1.0)
    for g, i in result.assignments['mux'].indices.items():
        gate = netlist.gates[g]
        data = {netlist.nets[gate.net(p)].name for p in ('A', 'B')}
        assert f"r_sum[{i}]" in data
