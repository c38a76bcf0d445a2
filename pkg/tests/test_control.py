from analysis.control    import CLOSURE, PIN_ROLE, USER, classify_control
from analysis.preprocess import preprocess
from fixtures.generator  import FixtureSpec, generate
from netlist.ir          import ModuleGroup


def _named(netlist, control) -> dict[str, str]:
    return {netlist.nets[n].name: control.provenance[n] for n in control.nets}


def test_word_mux_controls():
    fixture = generate(FixtureSpec('word-mux-fanout', 4))
    netlist, _ = preprocess(fixture.netlist)
    control = classify_control(netlist)
    named = _named(netlist, control)
    assert named['sel'] == PIN_ROLE
    assert named['clk'] == PIN_ROLE
    assert all(named[f"en_{r}"] == PIN_ROLE for r in 'abop')
    assert not any(name.startswith(('a[', 'b[', 'ra[', 'rb[')) for name in named)
    assert control.roles[netlist.net_by_name('sel').id] == ('select',)


# en = x AND y drives the enable, z also feeds a data pin
def _gated(small):
    s = small('ice40-like')
    clk, x, y, z = (s.net(n, global_in=True) for n in ('clk', 'x', 'y', 'z'))
    en, en2, q, q2 = s.net('en'), s.net('en2'), s.net('q', global_out=True), s.net('q2', global_out=True)
    s.gate('AND2', 'g_en', A=x, B=y, Y=en)
    s.gate('AND2', 'g_en2', A=x, B=z, Y=en2)
    s.gate('SB_DFFE', 'r1', C=clk, E=en, D=z, Q=q)
    s.gate('SB_DFFE', 'r2', C=clk, E=en2, D=y, Q=q2)
    return s.build()


def test_backward_closure(small):
    netlist = _gated(small)
    named = _named(netlist, classify_control(netlist))
    assert named['en'] == PIN_ROLE
    assert named['en2'] == PIN_ROLE
    assert named['x'] == CLOSURE
    # y and z also reach D pins
    assert 'y' not in named
    assert 'z' not in named


def test_user_and_declared_controls(small):
    netlist = _gated(small)
    declared = ModuleGroup('ctl', 'control', frozenset({netlist.gate_by_name('g_en').id}))
    control = classify_control(netlist, [declared], user=['z', 'missing'])
    named = _named(netlist, control)
    assert named['z'] == USER
    assert named['en'] == PIN_ROLE
    assert 'missing' not in named

    doc = control.to_dict(netlist)
    assert doc['en'] == {'provenance': PIN_ROLE, 'roles': ['enable']}
    assert doc['z']['roles'] == []
    assert len(control) == len(doc)
