import pytest

from netlist.edit    import BoundaryMap, NetlistEditor, replace_subcircuit
from netlist.errors  import BuildError, EquivalenceError, ParseError
from netlist.ir      import CONST0_NAME, CONST1_NAME, GateSpec, ModuleGroup, NetSpec, build_netlist
from netlist.json_io import format_hex, parse_hex, parse_json_netlist, write_json_netlist, read_netlist_file
from netlist.labels  import GroundTruth, derive_ground_truth, read_ground_truth, read_labels, write_ground_truth
from netlist.library import CARRY, CLOCK, ENABLE, FF, GateLibrary
from netlist.semantics import evaluate_nets
from netlist.verilog import parse_structural_verilog


VERILOG = """
// registered AND of two inputs
module top(input clk, input [1:0] a, output y);
  wire n1;
  SB_LUT4 #(.LUT_INIT(16'h8888)) u1 (.I0(a[0]), .I1(a[1]), .I2(1'b0), .I3(1'b0), .O(n1));
  SB_DFFE r_reg (.C(clk), .E(1'b1), .D(n1), .Q(y));
endmodule
"""


def test_libraries_registered():
    for name in ('primitive', 'ice40-like', 'x7-like'):
        assert isinstance(GateLibrary.get(name), GateLibrary)
        assert GateLibrary.get(name).name == name
    assert GateLibrary.get('ecp5') is None
    ice40 = GateLibrary.get('ice40-like')
    assert 'MUX2' in ice40
    assert ice40.type('SB_CARRY').category == CARRY
    dffe = ice40.type('SB_DFFE')
    assert dffe.category == FF
    assert dffe.pins_with_role(CLOCK) == ['C']
    assert dffe.pins_with_role(ENABLE) == ['E']
    assert GateLibrary.get('x7-like').type('CARRY4').group_of('S[2]') == ('S', 2)


def test_unknown_gate_type():
    with pytest.raises(BuildError):
        GateLibrary.get('primitive').type('SB_LUT4')


def test_build_adds_constants(and_register):
    netlist = and_register
    names = {n.name for n in netlist.nets}
    assert CONST0_NAME in names and CONST1_NAME in names
    assert netlist.constant(netlist.const0) == 0
    assert netlist.constant(netlist.const1) == 1
    assert [netlist.nets[n].name for n in netlist.global_inputs] == ['clk', 'a', 'b']
    assert [netlist.nets[n].name for n in netlist.global_outputs] == ['q']


def test_driver_and_readers(and_register):
    netlist = and_register
    y = netlist.net_by_name('y').id
    gate, pin = netlist.driver(y)
    assert (gate.name, pin) == ('u_and', 'O')
    assert [(g.name, p) for g, p in netlist.readers(y)] == [('q_reg', 'D')]
    assert netlist.gate_by_name('u_and').config['LUT_INIT'] == 0x8888


def test_fanin_cone_stops_at_registers(and_register):
    netlist = and_register
    cone = netlist.combinational_fanin_cone(netlist.net_by_name('y').id)
    assert [netlist.gates[g].name for g in cone.gates] == ['u_and']
    assert sorted(netlist.nets[n].name for n in cone.inputs) == ['a', 'b']


def test_multi_driven_net(small):
    s = small('primitive')
    a, y = s.net('a', global_in=True), s.net('y')
    s.gate('INV', 'g1', A=a, Y=y)
    s.gate('BUF', 'g2', A=a, Y=y)
    with pytest.raises(BuildError, match='multi-driven'):
        s.build()


def test_driven_input_rejected(small):
    s = small('primitive')
    a, b = s.net('a', global_in=True), s.net('b', global_in=True)
    s.gate('INV', 'g1', A=a, Y=b)
    with pytest.raises(BuildError):
        s.build()


def test_duplicate_names(small):
    s = small('primitive')
    a, y, z = s.net('a', global_in=True), s.net('y'), s.net('z')
    s.gate('INV', 'g', A=a, Y=y)
    s.gate('INV', 'g', A=a, Y=z)
    with pytest.raises(BuildError, match='duplicate gate name'):
        s.build()


def test_unbound_input(small):
    s = small('primitive')
    a, y = s.net('a', global_in=True), s.net('y')
    s.gate('AND2', 'g', A=a, Y=y)
    with pytest.raises(BuildError, match='unbound input'):
        s.build()


def test_bad_config(small):
    s = small('x7-like')
    a, y = s.net('a', global_in=True), s.net('y')
    s.gate('LUT1', 'g', {'INIT': 0x7}, I0=a, O=y)
    with pytest.raises(BuildError, match='init width'):
        s.build()


def test_dangling_net(small):
    s = small('primitive')
    a, floating, y = s.net('a', global_in=True), s.net('floating'), s.net('y', global_out=True)
    s.gate('AND2', 'g', A=a, B=floating, Y=y)
    netlist = s.build()
    assert [netlist.nets[n].name for n in netlist.dangling_nets()] == ['floating']


def test_register_loop_scc(small):
    s = small('ice40-like')
    clk, q, d = s.net('clk', global_in=True), s.net('q', global_out=True), s.net('d')
    zero = s.net('$const0')
    s.gate('SB_LUT4', 'inv', {'LUT_INIT': 0x5555}, I0=q, I1=zero, I2=zero, I3=zero, O=d)
    s.gate('SB_DFF', 'toggle', C=clk, D=d, Q=q)
    netlist = s.build()
    (scc,) = netlist.sequential_sccs()
    assert sorted(netlist.gates[g].name for g in scc) == ['inv', 'toggle']



def test_flipflop_sccs(small):
    s = small('ice40-like')
    clk, a = s.net('clk', global_in=True), s.net('a', global_in=True)
    q1, q2, q3, q4 = s.net('q1'), s.net('q2'), s.net('q3', global_out=True), s.net('q4', global_out=True)
    s.gate('SB_DFF', 'left', C=clk, D=q2, Q=q1)
    s.gate('SB_DFF', 'right', C=clk, D=q1, Q=q2)
    s.gate('SB_DFF', 'hold', C=clk, D=q3, Q=q3)
    s.gate('SB_DFF', 'plain', C=clk, D=a, Q=q4)
    netlist = s.build()
    sccs = netlist.sequential_sccs()
    assert len(sccs) == 2
    assert sorted(sorted(netlist.gates[g].name for g in scc) for scc in sccs) == [['hold'], ['left', 'right']]


def test_ids_are_dense():
    library = GateLibrary.get('primitive')
    nets = [NetSpec(40, 'a', global_in=True), NetSpec(7, 'y', global_out=True)]
    gates = [GateSpec(99, 'g', 'INV', {'A': 40, 'Y': 7})]
    netlist = build_netlist(library, gates, nets)
    assert [n.name for n in netlist.nets][:2] == ['y', 'a']
    assert netlist.gates[0].pins == {'A': 1, 'Y': 0}


def test_module_layers_are_exclusive(and_register):
    netlist = and_register
    gid = netlist.gate_by_name('q_reg').id
    first = ModuleGroup('r0', 'register', frozenset([gid]))
    second = ModuleGroup('r1', 'register', frozenset([gid]))
    with pytest.raises(BuildError):
        netlist.with_modules([first, second])
    other = ModuleGroup('m0', 'other', frozenset([gid]))
    assert len(netlist.with_modules([first, other]).modules) == 2


def test_module_repeated_index():
    with pytest.raises(BuildError, match='repeated index'):
        ModuleGroup('w', 'register', frozenset([0, 1]), {'Q': [(0, 'Q', 0), (1, 'Q', 0)]})


def test_hex_values():
    assert format_hex(0x8888, 16) == '0x8888'
    assert format_hex(1, 64) == '0x' + '0' * 15 + '1'
    assert parse_hex('16\'h8888', 16) == 0x8888
    assert parse_hex('0x0001', 16) == 1
    with pytest.raises(ParseError, match='init width'):
        parse_hex('0x1', 16)
    with pytest.raises(ParseError, match='init width'):
        parse_hex('8\'hff', 16)
    with pytest.raises(ParseError):
        parse_hex('255', 16)


def test_json_preserves_structure(and_register, tmp_path):
    gid = and_register.gate_by_name('q_reg').id
    netlist = and_register.with_modules([ModuleGroup('q', 'register', frozenset([gid]), locked=True)])
    text = write_json_netlist(netlist)
    again = parse_json_netlist(text)
    assert again == netlist
    assert again.gate_by_name('u_and').config == {'LUT_INIT': 0x8888}
    assert [(m.name, m.locked) for m in again.modules] == [('q', True)]
    assert write_json_netlist(again) == text

    path = tmp_path / 'n.json'
    path.write_text(text)
    assert read_netlist_file(str(path)) == netlist


@pytest.mark.parametrize('text, match', [
    ('[]', 'object'),
    ('{"nets": [], "gates": []}', 'library'),
    ('{"library": "ice40-like", "nets": [{"id": 0}], "gates": []}', 'name'),
    ('{"library": "nope", "nets": [], "gates": []}', 'unknown library'),
    ('{not json', 'invalid JSON'),
])
def test_json_schema_errors(text, match):
    with pytest.raises(ParseError, match=match):
        parse_json_netlist(text)


def test_json_unknown_type():
    text = '{"library": "primitive", "nets": [], "gates": [{"id": 0, "name": "g", "type": "SB_LUT4", "pins": {}}]}'
    with pytest.raises(BuildError):
        parse_json_netlist(text)


def test_verilog_subset():
    netlist = parse_structural_verilog(VERILOG, GateLibrary.get('ice40-like'))
    lut = netlist.gate_by_name('u1')
    assert lut.config == {'LUT_INIT': 0x8888}
    assert netlist.nets[lut.net('I0')].name == 'a[0]'
    assert netlist.nets[lut.net('I2')].constant == 0
    reg = netlist.gate_by_name('r_reg')
    assert netlist.nets[reg.net('E')].constant == 1
    assert netlist.net_by_name('y').global_out
    assert netlist.net_by_name('a[1]').global_in

    a0, a1 = netlist.net_by_name('a[0]').id, netlist.net_by_name('a[1]').id
    n1 = netlist.net_by_name('n1').id
    assert evaluate_nets(netlist, [n1], {a0: 1, a1: 1}) == {n1: 1}
    assert evaluate_nets(netlist, [n1], {a0: 1, a1: 0}) == {n1: 0}


def test_verilog_defparam_and_assign():
    text = """
    module m (a, y);
      input a;
      output y;
      wire t;
      LUT1 inv (.I0(a), .O(t));
      defparam inv.INIT = 2'b01;
      assign y = t;
    endmodule
    """
    netlist = parse_structural_verilog(text, GateLibrary.get('x7-like'))
    assert netlist.gate_by_name('inv').config == {'INIT': 1}
    (buf,) = [g for g in netlist.gates if g.type.name == 'BUF']
    assert netlist.nets[buf.net('Y')].name == 'y'


@pytest.mark.parametrize('body', [
    'always @(posedge clk) y <= a;',
    'assign y = a & b;',
    'FOO u (.A(a));',
    'SB_LUT4 #(.LUT_INIT(16\'h1)) u (.I0(a), .I1(a), .I2(a), .I3(a), .O(y), .Q(y));',
])
def test_verilog_rejects(body):
    text = f"module m(input a, input b, input clk, output y);\n{body}\nendmodule\n"
    with pytest.raises(ParseError):
        parse_structural_verilog(text, GateLibrary.get('ice40-like'))


def test_verilog_needs_library():
    with pytest.raises(ParseError):
        parse_structural_verilog(VERILOG, None)


def test_editor_merge_keeps_output_name(small):
    s = small('primitive')
    a = s.net('a', global_in=True)
    t, y = s.net('t'), s.net('y', global_out=True)
    s.gate('INV', 'g1', A=a, Y=t)
    s.gate('BUF', 'g2', A=t, Y=y)
    netlist = s.build()
    editor = NetlistEditor(netlist)
    buf = netlist.gate_by_name('g2')
    editor.remove_gate(buf.id)
    editor.merge_nets(buf.net('A'), buf.net('Y'))
    edited = editor.build()
    assert [g.name for g in edited.gates] == ['g1']
    assert edited.nets[edited.gate_by_name('g1').net('Y')].name == 'y'
    assert edited.net_by_name('y').global_out


def test_derive_ground_truth(small):
    s = small('ice40-like')
    clk = s.net('clk', global_in=True)
    for i in range(3):
        d, q = s.net(f"d[{i}]", global_in=True), s.net(f"cnt[{i}]", global_out=True)
        s.gate('SB_DFF', f"cnt_reg[{i}]", C=clk, D=d, Q=q)
    d, q = s.net('flag_d', global_in=True), s.net('flag', global_out=True)
    s.gate('SB_DFF', 'flag_q', C=clk, D=d, Q=q)
    truth = derive_ground_truth(s.build())
    assert truth.labels == {'cnt_reg[0]': 'cnt', 'cnt_reg[1]': 'cnt', 'cnt_reg[2]': 'cnt', 'flag_q': 'flag'}
    assert truth.bit_orders == {'cnt': {'cnt_reg[0]': 0, 'cnt_reg[1]': 1, 'cnt_reg[2]': 2}}


def test_ground_truth_files(tmp_path):
    truth = GroundTruth({'a_reg[0]': 'a', 'a_reg[1]': 'a'}, {'a': {'a_reg[0]': 0, 'a_reg[1]': 1}})
    bundle = tmp_path / 'truth.json'
    write_ground_truth(str(bundle), truth)
    assert read_ground_truth(str(bundle)) == truth
    assert read_labels(str(bundle)) == truth.labels

    bare = tmp_path / 'labels.json'
    bare.write_text('{"x_reg": "x", "y_reg": "y"}')
    assert read_ground_truth(str(bare)) == GroundTruth({'x_reg': 'x', 'y_reg': 'y'})
    assert read_labels(str(bare)) == {'x_reg': 'x', 'y_reg': 'y'}

    bare.write_text('{"x_reg": 3}')
    with pytest.raises(ParseError):
        read_labels(str(bare))


# Two-input fragment z = op(x, y) in the primitive library
def _fragment(small, type_name: str):
    s = small('primitive')
    x, y = s.net('x', global_in=True), s.net('y', global_in=True)
    z = s.net('z', global_out=True)
    s.gate(type_name, 'g_new', A=x, B=y, Y=z)
    return s.build()


def test_replace_subcircuit(and_register, small):
    netlist = and_register
    lut = netlist.gate_by_name('u_and')
    a, b, y = (netlist.net_by_name(n).id for n in 'aby')
    boundary = BoundaryMap({'x': a, 'y': b}, {'z': y})

    edited = replace_subcircuit(netlist, {lut.id}, _fragment(small, 'AND2'), boundary)
    assert sorted(g.type.name for g in edited.gates) == ['AND2', 'SB_DFF']
    gate = edited.gate_by_name('g_new')
    assert edited.nets[gate.net('Y')].name == 'y'
    assert {edited.nets[gate.net(p)].name for p in 'AB'} == {'a', 'b'}
    assert edited.nets[edited.gate_by_name('q_reg').net('D')].name == 'y'

    with pytest.raises(EquivalenceError):
        replace_subcircuit(netlist, {lut.id}, _fragment(small, 'OR2'), boundary)
    with pytest.raises(BuildError):
        replace_subcircuit(netlist, {lut.id}, _fragment(small, 'AND2'), BoundaryMap({'x': a, 'y': b}, {}))
