import numpy as np
import pytest

from analysis.decompose  import Decomposer, mux_count, plan_function
from analysis.preprocess import (deduplicate_gates, decompose_luts, preprocess, propagate_constants,
                                 remove_buffers)
from fixtures.generator  import FixtureSpec, generate
from logic.boolfunc      import equivalent, from_lut_init
from logic.truthtable    import int_to_table
from netlist.library     import CARRY, LUT
from netlist.semantics   import evaluate_nets


def _types(netlist) -> list[str]:
    return sorted(g.type.name for g in netlist.gates)


# Values of named nets for named input values
def _outputs(netlist, names, values):
    inputs = {netlist.net_by_name(k).id: v for k, v in values.items() if netlist.net_by_name(k) is not None}
    ids = [netlist.net_by_name(n).id for n in names]
    got = evaluate_nets(netlist, ids, inputs)
    return [got[i] for i in ids]


def test_mux_extraction(small):
    s = small('ice40-like')
    a, b, sel = s.net('a', global_in=True), s.net('b', global_in=True), s.net('sel', global_in=True)
    y, zero = s.net('y', global_out=True), s.net('$const0')
    # O = sel ? a : b over (I0, I1, I2) = (a, b, sel)
    init = sum(1 << i for i in range(8) if ((i >> 0) & 1 if (i >> 2) & 1 else (i >> 1) & 1))
    s.gate('SB_LUT4', 'm', {'LUT_INIT': init}, I0=a, I1=b, I2=sel, I3=zero, O=y)
    netlist, report = preprocess(s.build())

    assert _types(netlist) == ['MUX2']
    (mux,) = netlist.gates
    assert netlist.nets[mux.net('S')].name == 'sel'
    assert netlist.nets[mux.net('A')].name == 'a'
    assert netlist.nets[mux.net('B')].name == 'b'
    assert netlist.nets[mux.net('Y')].name == 'y'
    assert report.luts_replaced == 1
    assert report.muxes_extracted == 1


def test_constant_identity(small):
    s = small('primitive')
    a = s.net('a', global_in=True)
    one = s.net('$const1')
    t, y = s.net('t'), s.net('y', global_out=True)
    s.gate('AND2', 'g1', A=a, B=one, Y=t)
    s.gate('XOR2', 'g2', A=t, B=a, Y=y)
    netlist, report = propagate_constants(s.build())
    # AND with 1 is a copy, then XOR of a net with itself is 0
    assert _types(netlist) == ['CONST0']
    assert netlist.nets[netlist.gates[0].net('Y')].name == 'y'
    assert report.other_simplifications == 2


def test_constant_mux_select(small):
    s = small('primitive')
    a, b = s.net('a', global_in=True), s.net('b', global_in=True)
    one = s.net('$const1')
    m, y = s.net('m'), s.net('y', global_out=True)
    s.gate('MUX2', 'mux', S=one, A=a, B=b, Y=m)
    s.gate('INV', 'inv', A=m, Y=y)
    netlist, _ = propagate_constants(s.build())
    (inv,) = netlist.gates
    assert netlist.nets[inv.net('A')].name == 'a'


def test_buffer_and_inverter_pairs(small):
    s = small('primitive')
    a, b = s.net('a', global_in=True), s.net('b', global_in=True)
    t, u, v = s.net('t'), s.net('u'), s.net('v')
    y = s.net('y', global_out=True)
    s.gate('BUF', 'buf', A=a, Y=t)
    s.gate('INV', 'inv1', A=t, Y=u)
    s.gate('INV', 'inv2', A=u, Y=v)
    s.gate('AND2', 'and', A=v, B=b, Y=y)
    netlist, report = remove_buffers(s.build())
    assert _types(netlist) == ['AND2']
    gate = netlist.gates[0]
    assert {netlist.nets[gate.net('A')].name, netlist.nets[gate.net('B')].name} == {'a', 'b'}
    assert report.buffers_removed == 3


def test_global_output_buffer_stays(small):
    s = small('primitive')
    a, y = s.net('a', global_in=True), s.net('y', global_out=True)
    s.gate('BUF', 'out', A=a, Y=y)
    netlist, report = remove_buffers(s.build())
    assert _types(netlist) == ['BUF']
    assert report.buffers_removed == 0


def test_dead_logic_swept(small):
    s = small('primitive')
    a, b = s.net('a', global_in=True), s.net('b', global_in=True)
    dead, y = s.net('dead'), s.net('y', global_out=True)
    s.gate('AND2', 'unused', A=a, B=b, Y=dead)
    s.gate('OR2', 'used', A=a, B=b, Y=y)
    netlist, report = remove_buffers(s.build())
    assert [g.name for g in netlist.gates] == ['used']
    assert report.other_simplifications == 1


def test_duplicates_merged(small):
    s = small('ice40-like')
    a, b = s.net('a', global_in=True), s.net('b', global_in=True)
    zero = s.net('$const0')
    t1, t2, y = s.net('t1'), s.net('t2'), s.net('y', global_out=True)
    # the same AND over permuted LUT inputs
    s.gate('SB_LUT4', 'l1', {'LUT_INIT': 0x8888}, I0=a, I1=b, I2=zero, I3=zero, O=t1)
    s.gate('SB_LUT4', 'l2', {'LUT_INIT': 0x8888}, I0=b, I1=a, I2=zero, I3=zero, O=t2)
    s.gate('XOR2', 'x', A=t1, B=t2, Y=y)
    netlist, report = deduplicate_gates(s.build())
    assert report.duplicates_removed == 1
    x = netlist.gate_by_name('x')
    assert x.net('A') == x.net('B')


def test_registers_never_merged(small):
    s = small('ice40-like')
    clk, d = s.net('clk', global_in=True), s.net('d', global_in=True)
    q1, q2 = s.net('q1', global_out=True), s.net('q2', global_out=True)
    s.gate('SB_DFF', 'r1', C=clk, D=d, Q=q1)
    s.gate('SB_DFF', 'r2', C=clk, D=d, Q=q2)
    netlist, report = deduplicate_gates(s.build())
    assert report.duplicates_removed == 0
    assert len(netlist.gates) == 2


@pytest.mark.parametrize('init', [0x8, 0xe, 0x6, 0x9, 0xca, 0x96, 0xe8, 0x1234, 0xfe01])
def test_decomposition_plans(init):
    k = 2 if init < 0x10 else 3 if init < 0x100 else 4
    variables = list(range(10, 10 + k))
    table = int_to_table(init, 1 << k)
    plan = Decomposer().plan(variables, table)
    assert equivalent(plan_function(plan), from_lut_init(init, variables))


def test_decomposition_prefers_mux():
    # I2 ? I1 : I0
    plan = Decomposer().plan([1, 2, 3], int_to_table(0xca, 8))
    assert plan[0] == 'mux' and plan[1] == 3
    assert mux_count(plan) == 1


def test_carry_gates_survive_decomposition():
    fixture = generate(FixtureSpec('adder', 4, 'ice40-like'))
    netlist, report = decompose_luts(fixture.netlist)
    assert not netlist.gates_of_category(LUT)
    assert len(netlist.gates_of_category(CARRY)) == 4
    assert report.luts_replaced == 4


@pytest.mark.parametrize('kind', ['adder', 'subtractor', 'comparator', 'const-mul'])
@pytest.mark.parametrize('arch', ['ice40-like', 'x7-like'])
def test_preprocess_preserves_function(kind, arch):
    fixture = generate(FixtureSpec(kind, 6, arch))
    before = fixture.netlist
    after, report = preprocess(before)
    assert report.gates_before == len(before.gates)
    assert report.gates_after == len(after.gates)
    assert not after.gates_of_category(LUT)

    outputs = sorted(before.nets[n].name for n in before.global_outputs)
    inputs = [before.nets[n].name for n in before.global_inputs]
    rng = np.random.default_rng(3)
    for _ in range(16):
        values = {name: int(rng.integers(0, 2)) for name in inputs}
        assert _outputs(after, outputs, values) == _outputs(before, outputs, values)


def test_preprocess_is_idempotent():
    fixture = generate(FixtureSpec('subtractor', 4, 'x7-like'))
    once, _ = preprocess(fixture.netlist)
    twice, report = preprocess(once)
    assert report.luts_replaced == 0
    assert len(twice.gates) == len(once.gates)
