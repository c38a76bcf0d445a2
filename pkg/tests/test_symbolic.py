import pytest

from analysis.arith      import classify_arithmetic
from analysis.control    import classify_control
from analysis.preprocess import preprocess
from fixtures.generator  import FixtureSpec, generate
from netlist.errors      import ParseError, TraceError
from sim.simulator       import simulate
from sim.stimulus        import random_stimulus
from symbolic.export     import export_equations, port_words
from symbolic.expr       import Const, Sym, WordOp, evaluate, from_dict, postorder, symbols, to_dict
from symbolic.loops      import break_loops, register_graph
from symbolic.script     import replay_script, run_script, script_symbols
from symbolic.trace      import Endpoints, parse_target, replay, trace, trace_targets


# Preprocessed fixture, its waveform and control nets
def _recorded(spec: FixtureSpec, cycles: int, **stimulus):
    netlist, _ = preprocess(generate(spec).netlist)
    waveform = simulate(netlist, random_stimulus(netlist, cycles, seed=5, **stimulus), cycles)
    return netlist, waveform, classify_control(netlist)


@pytest.mark.parametrize('kind, width', [
    ('counter-with-reset', 4), ('mac-loop', 4), ('register-pipeline', 4), ('mixed-soc-slice', 8),
])
def test_loop_cuts(kind, width):
    fixture = generate(FixtureSpec(kind, width))
    assert len(break_loops(fixture.netlist)) == fixture.expected['loop_cuts']


def test_register_graph_edges():
    fixture = generate(FixtureSpec('register-pipeline', 3, stages=2))
    netlist = fixture.netlist
    graph = register_graph(netlist)
    first = netlist.gate_by_name('stage0_reg[1]').id
    second = netlist.gate_by_name('stage1_reg[1]').id
    assert graph.has_edge(first, second)
    assert not graph.has_edge(second, first)


def test_minimum_cut_of_a_ring(small):
    s = small('ice40-like')
    clk = s.net('clk', global_in=True)
    q = [s.net(f"q{i}", global_out=i == 2) for i in range(3)]
    for i in range(3):
        s.gate('SB_DFF', f"r{i}", C=clk, D=q[i - 1], Q=q[i])
    netlist = s.build()
    cut = break_loops(netlist)
    assert len(cut) == 1
    assert cut == frozenset({netlist.gate_by_name('r0').id})


@pytest.mark.parametrize('target', ['nope', 'q@x', 'q@-1', '@3x'])
def test_parse_target_errors(target):
    with pytest.raises(TraceError):
        parse_target(target)


def test_parse_target():
    assert parse_target('q[0]@12') == ('q[0]', 12)
    assert parse_target('odd@name@3') == ('odd@name', 3)


def test_word_mux_trace():
    netlist, waveform, control = _recorded(FixtureSpec('word-mux-fanout', 4), 12,
                                           hold={'sel': 1, 'en_a': 1, 'en_b': 1, 'en_o': 1, 'en_p': 1})
    assert netlist.net_by_name('sel').id in control
    result = trace_targets(netlist, waveform, control, [f"ro[{i}]@10" for i in range(4)])
    for i, eq in enumerate(result.equations):
        assert symbols([eq.expr]) == [f"a[{i}]@8"]
        assert replay(eq, result.definitions, waveform) == waveform.value(f"ro[{i}]", 10)
    assert result.definitions == []


def test_marked_registers_stop_traces():
    netlist, waveform, control = _recorded(FixtureSpec('word-mux-fanout', 4), 12,
                                           hold={'sel': 0, 'en_a': 1, 'en_b': 1, 'en_o': 1, 'en_p': 1})
    marked = frozenset(netlist.gate_by_name(f"rb_reg[{i}]").id for i in range(4))
    eq, defs = trace(netlist, 'rp[2]', 6, waveform, control, Endpoints(marked))
    assert symbols([eq.expr]) == ['rb[2]@5']
    assert replay(eq, defs, waveform) == waveform.value('rp[2]', 6)


def test_trace_rejects_bad_targets():
    netlist, waveform, control = _recorded(FixtureSpec('word-mux-fanout', 4), 6, hold={'sel': 1})
    with pytest.raises(TraceError):
        trace(netlist, 'ro[0]', 7, waveform, control)
    with pytest.raises(TraceError):
        trace(netlist, 'no-such-net', 3, waveform, control)


def test_initial_state_symbol():
    netlist, waveform, control = _recorded(FixtureSpec('word-mux-fanout', 4), 6, hold={'sel': 1})
    # before the first edge a register holds its initial state
    eq, _ = trace(netlist, 'ro[1]', 0, waveform, control)
    assert symbols([eq.expr]) == ['ro[1]@0']


@pytest.mark.parametrize('use_structures', [False, True])
def test_counter_trace(use_structures):
    netlist, waveform, control = _recorded(FixtureSpec('counter-with-reset', 4, 'x7-like'), 30,
                                           reset={'rst': 1})
    structures = classify_arithmetic(netlist)[0] if use_structures else ()
    result = trace_targets(netlist, waveform, control, [f"q[{i}]@20" for i in range(4)],
                           structures=structures)
    assert len(break_loops(netlist)) == 4
    assert len(result.definitions) == 4
    for i, eq in enumerate(result.equations):
        assert replay(eq, result.definitions, waveform) == waveform.value(f"q[{i}]", 20)
    folded = any(isinstance(n, WordOp) for d in result.definitions for n in postorder([d.expr]))
    assert folded == use_structures


def test_mac_trace_and_script():
    netlist, waveform, control = _recorded(FixtureSpec('mac-loop', 4), 20, hold={'ce': 1}, reset={'rst': 1})
    result = trace_targets(netlist, waveform, control)
    assert len(result.equations) == 32
    assert [d.name for d in result.definitions] == ['v1']
    (definition,) = result.definitions
    assert isinstance(definition.expr, WordOp) and definition.expr.op == 'mac'
    for eq in result.equations:
        assert replay(eq, result.definitions, waveform) == waveform.value(netlist.nets[eq.net].name, 20)

    script = export_equations(netlist, result, port_words(netlist), 'mac')
    assert script.startswith("# equations traced on mac")
    assert any(line.startswith('sym p_19 32 ') for line in script.splitlines())
    assert any(line.startswith('out p_20 32 ') for line in script.splitlines())
    assert set(script_symbols(script)) == set(s for s in symbols([definition.expr]) if '@' in s)
    replayed = replay_script(script, waveform)
    assert replayed.words['p_20'] == waveform.word([f"p[{i}]" for i in range(32)], 20)
    for i in range(32):
        assert replayed.bits[f"p[{i}]@20"] == waveform.value(f"p[{i}]", 20)


def test_trace_result_document():
    netlist, waveform, control = _recorded(FixtureSpec('mac-loop', 4), 6, hold={'ce': 1}, reset={'rst': 1})
    result = trace_targets(netlist, waveform, control, ['p[0]@5'])
    doc = result.to_dict(netlist)
    assert doc['equations'][0]['target'] == 'p[0]@5'
    assert doc['equations'][0]['definitions'] == ['v1']
    assert from_dict(doc['definitions'][0]['expr']) == result.definitions[0].expr


def test_expression_documents():
    expr = WordOp('add', (Sym('x', 4), Const(3, 4)), 4, 4)
    assert from_dict(to_dict(expr)) == expr
    assert evaluate(expr, {'x': 14}) == 1


def test_run_script():
    text = "\n".join([
        "# four-bit example",
        "sym a 4 x[0]@1 x[1]@1 x[2]@1 x[3]@1",
        "def v1 4 = a + 3",
        "out y 4 y[0]@2 y[1]@2 y[2]@2 y[3]@2 = v1 ^ a",
        "out f 1 f@2 = slt(a, 2, 4)",
        "out g 3 = ite(bit(a, 0), 7, 1)",
        "out h 2 = cat(bit(a, 2), bit(a, 0))",
        "out m 4 = mask(0 - a, 4)",
    ])
    result = run_script(text, {'x[0]@1': 1, 'x[1]@1': 0, 'x[2]@1': 1, 'x[3]@1': 0})
    assert result.words == {'y': 13, 'f': 0, 'g': 7, 'h': 3, 'm': 11}
    assert [result.bits[f"y[{i}]@2"] for i in range(4)] == [1, 0, 1, 1]
    assert script_symbols(text) == [f"x[{i}]@1" for i in range(4)]


@pytest.mark.parametrize('text', [
    "import os",
    "def v1 4 = __import__('os')",
    "def v1 4 = undefined + 1",
    "def v1 4 = a.b",
    "sym a 2 x@1",
    "sym a 1 missing@1",
    "def 1v 4 = 3",
    "out y 2 y0 = 1",
])
def test_script_rejects(text):
    with pytest.raises(ParseError):
        run_script(text, {'x@1': 1})
