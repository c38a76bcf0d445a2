import pytest

from fixtures.generator import FixtureSpec, generate
from netlist.errors     import ParseError, SimulationError, TraceError
from sim.simulator      import simulate
from sim.stimulus       import (Stimulus, load_stimulus, random_stimulus, stimulus_from_dict,
                                stimulus_from_waveform)
from sim.vcd            import read_vcd, read_vcd_file, write_vcd, write_vcd_file
from sim.waveform       import X, Waveform


def _bus(name: str, width: int) -> list[str]:
    return [f"{name}[{i}]" for i in range(width)]


@pytest.mark.parametrize('arch', ['ice40-like', 'x7-like'])
def test_counter(arch):
    fixture = generate(FixtureSpec('counter-with-reset', 8, arch))
    stimulus = random_stimulus(fixture.netlist, 300, reset={'rst': 1})
    waveform = simulate(fixture.netlist, stimulus, 300)
    assert waveform.samples == 301
    assert waveform.clock == 'clk'
    q = _bus('q', 8)
    for t in range(2, 301):
        assert waveform.word(q, t) == (t - 2) % 256


def test_flipflops_start_unknown():
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    waveform = simulate(fixture.netlist, random_stimulus(fixture.netlist, 4, reset={'rst': 1}), 4)
    assert waveform.value('q[0]', 0) == X
    assert waveform.word(_bus('q', 4), 0) is None
    assert waveform.word(_bus('q', 4), 1) == 0


def test_adder_settles_every_sample():
    fixture = generate(FixtureSpec('adder', 6, 'x7-like'))
    waveform = simulate(fixture.netlist, random_stimulus(fixture.netlist, 50, seed=4), 50)
    for t in range(51):
        a, b = waveform.word(_bus('a', 6), t), waveform.word(_bus('b', 6), t)
        assert waveform.word(_bus('y', 6), t) == (a + b) % 64


def test_mac_accumulates():
    fixture = generate(FixtureSpec('mac-loop', 8))
    stimulus = random_stimulus(fixture.netlist, 40, seed=1, hold={'ce': 1}, reset={'rst': 1})
    waveform = simulate(fixture.netlist, stimulus, 40)
    total = 0
    for t in range(2, 41):
        assert waveform.word(_bus('p', 32), t) == total
        total += waveform.word(_bus('a', 8), t) * waveform.word(_bus('b', 8), t)


def test_initial_values():
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    stimulus = Stimulus({'rst': [0]})
    initial = {'nets': {f"q[{i}]": (5 >> i) & 1 for i in range(4)}}
    waveform = simulate(fixture.netlist, stimulus, 3, initial=initial)
    assert [waveform.word(_bus('q', 4), t) for t in range(4)] == [5, 6, 7, 8]


def test_watch_restricts_recording():
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    stimulus = random_stimulus(fixture.netlist, 5, reset={'rst': 1})
    waveform = simulate(fixture.netlist, stimulus, 5, watch=['q[0]', 'rst'])
    assert waveform.names == ['q[0]', 'rst']
    with pytest.raises(SimulationError):
        simulate(fixture.netlist, stimulus, 5, watch=['nope'])


def test_undefined_input():
    fixture = generate(FixtureSpec('adder', 4))
    with pytest.raises(SimulationError):
        simulate(fixture.netlist, Stimulus({'a[0]': [1]}), 2)


def test_multiple_clocks(small):
    s = small('ice40-like')
    c1, c2, d = s.net('c1', global_in=True), s.net('c2', global_in=True), s.net('d', global_in=True)
    q1, q2 = s.net('q1', global_out=True), s.net('q2', global_out=True)
    s.gate('SB_DFF', 'r1', C=c1, D=d, Q=q1)
    s.gate('SB_DFF', 'r2', C=c2, D=d, Q=q2)
    netlist = s.build()
    with pytest.raises(SimulationError):
        simulate(netlist, Stimulus(default=0), 2)
    with pytest.raises(SimulationError):
        simulate(netlist, Stimulus(default=0), 2, clock='c1')


def test_stimulus_document():
    fixture = generate(FixtureSpec('adder', 4))
    stimulus = stimulus_from_dict({'inputs': {'a[0]': [1, 0]}, 'words': {'b': [3, 12]}, 'default': 0},
                                  fixture.netlist)
    assert stimulus.value('a[0]', 5) == 0
    assert [stimulus.value(f"b[{i}]", 0) for i in range(4)] == [1, 1, 0, 0]
    assert [stimulus.value(f"b[{i}]", 1) for i in range(4)] == [0, 0, 1, 1]
    assert stimulus.value('a[3]', 0) == 0
    with pytest.raises(ParseError):
        stimulus_from_dict({'inputs': {'a[0]': [2]}})


def test_stimulus_file(tmp_path):
    path = tmp_path / 'stim.yaml'
    path.write_text("clock: clk\ncycles: 7\ninputs:\n  rst: [1, 0]\n")
    stimulus = load_stimulus(str(path))
    assert stimulus.clock == 'clk'
    assert stimulus.cycles == 7
    assert stimulus.value('rst', 3) == 0
    with pytest.raises(SimulationError):
        stimulus.value('en', 0)


def test_random_stimulus():
    fixture = generate(FixtureSpec('word-mux-fanout', 4))
    stimulus = random_stimulus(fixture.netlist, 20, seed=2, hold={'sel': 1}, reset={'en_a': 0},
                               reset_cycles=3, exclude=['clk'])
    assert not stimulus.covers('clk')
    assert stimulus.value('sel', 13) == 1
    assert [stimulus.value('en_a', t) for t in range(5)] == [0, 0, 0, 1, 1]
    assert stimulus == random_stimulus(fixture.netlist, 20, seed=2, hold={'sel': 1}, reset={'en_a': 0},
                                       reset_cycles=3, exclude=['clk'])


def test_replay_recorded_inputs():
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    first = simulate(fixture.netlist, random_stimulus(fixture.netlist, 30, seed=9, reset={'rst': 1}), 30)
    again = simulate(fixture.netlist, stimulus_from_waveform(first, fixture.netlist), 30)
    assert again == first


def test_vcd(tmp_path):
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    waveform = simulate(fixture.netlist, random_stimulus(fixture.netlist, 12, reset={'rst': 1}), 12)
    text = write_vcd(waveform)
    assert "$timescale 1 ns $end" in text
    assert f"samples {waveform.samples} period {waveform.period} clock clk" in text
    assert 'x' in text.split('$dumpvars')[1].split('$end')[0]
    parsed = read_vcd(text)
    assert parsed == waveform
    assert parsed.clock == 'clk'

    path = str(tmp_path / 'wave.vcd')
    write_vcd_file(path, waveform)
    assert read_vcd_file(path) == waveform


def test_vcd_without_comment():
    text = "\n".join([
        "$timescale 1ns $end", "$scope module top $end",
        "$var wire 1 ! a $end", "$var wire 1 \" b $end",
        "$upscope $end", "$enddefinitions $end",
        "#0", "0!", "1\"", "#5", "1!", "#15", "0\"", "#20",
    ])
    waveform = read_vcd(text)
    assert list(waveform.series('a')) == [0, 1, 1, 1]
    assert list(waveform.series('b')) == [1, 1, 1, 0]


def test_vcd_rejects_garbage():
    with pytest.raises(ParseError):
        read_vcd("$var wire 1 ! a $end\n#0\n1?\n")
    with pytest.raises(ParseError):
        read_vcd("$scope module top $end $var wire 1 ! a $end $upscope $end $enddefinitions $end #0 1?\n")


def test_vcd_vectors_and_high_impedance(caplog):
    text = "\n".join([
        "$timescale 1 ns $end", "$scope module top $end",
        "$var wire 3 ! v $end", "$var wire 1 \" e $end",
        "$upscope $end", "$enddefinitions $end",
        "#0", "b101 !", "z\"", "#10", "b1z0 !", "1\"", "#20", "b11 !",
    ])
    waveform = read_vcd(text)
    assert waveform.names == ["v[0]", "v[1]", "v[2]", "e"]
    assert list(waveform.series("v[0]")) == [1, 0, 1]
    assert list(waveform.series("v[1]")) == [0, X, 1]
    assert list(waveform.series("v[2]")) == [1, 1, 0]
    assert list(waveform.series("e")) == [X, 1, 1]
    assert "vcd.z_as_x" in caplog.text


def test_waveform_access():
    waveform = Waveform(['a', 'b'], [[0, 1, X], [1, 1, 0]], 'clk')
    assert waveform.word(['a', 'b'], 1) == 3
    assert waveform.word(['a', 'b'], 2) is None
    assert waveform.restrict(['b', 'zz']).names == ['b']
    other = Waveform(['a', 'b'], [[0, 1, X], [1, 0, 0]])
    assert waveform.differences(other) == {'b': 1}
    with pytest.raises(TraceError):
        waveform.value('a', 3)
    with pytest.raises(TraceError):
        waveform.series('c')
    with pytest.raises(ValueError):
        Waveform(['a'], [[0], [1]])
