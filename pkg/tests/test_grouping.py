import pytest

from analysis.arith      import arithmetic_modules, classify_arithmetic
from analysis.grouping   import LOOSE, STRICT, group, target_gates
from analysis.metrics    import nmi, purity, size_histogram
from analysis.preprocess import preprocess
from fixtures.generator  import FixtureSpec, generate
from netlist.errors      import NetlistError
from netlist.ir          import ModuleGroup


# Register grouping the way the pipeline runs it
def _register_grouping(fixture, signature=STRICT):
    netlist, _ = preprocess(fixture.netlist)
    structures, _ = classify_arithmetic(netlist)
    modules = arithmetic_modules(netlist, structures)
    return netlist, group(netlist, 'ff', modules, signature)


@pytest.mark.parametrize('kind, arch', [
    ('register-pipeline', 'ice40-like'),
    ('word-mux-fanout', 'ice40-like'),
    ('word-mux-fanout', 'x7-like'),
    ('counter-with-reset', 'x7-like'),
    ('mixed-soc-slice', 'ice40-like'),
])
def test_registers_recovered(kind, arch):
    fixture = generate(FixtureSpec(kind, 8, arch))
    netlist, grouping = _register_grouping(fixture)
    labels = grouping.named_labels(netlist)
    assert nmi(labels, fixture.truth.labels) == pytest.approx(fixture.expected['nmi'])
    assert purity(labels, fixture.truth.labels) == pytest.approx(fixture.expected['purity'])
    assert len(grouping.groups) == fixture.expected['register_groups']


def test_partition_covers_targets():
    fixture = generate(FixtureSpec('mixed-soc-slice', 8))
    netlist, grouping = _register_grouping(fixture)
    members = [g for m in grouping.groups for g in m.gates]
    assert sorted(members) == sorted(target_gates(netlist, 'ff'))
    assert all(m.kind == 'register' for m in grouping.groups)


def test_word_mux_grouping():
    fixture = generate(FixtureSpec('word-mux-fanout', 6))
    netlist, registers = _register_grouping(fixture)
    muxes = group(netlist, 'mux', registers.word_groups())
    (word,) = muxes.word_groups()
    assert len(word.gates) == 6
    assert word.kind == 'word-mux'


def test_known_group_stays_locked():
    fixture = generate(FixtureSpec('register-pipeline', 4, stages=2))
    netlist = fixture.netlist
    # two bits from different stages pinned together
    odd = frozenset(netlist.gate_by_name(n).id for n in ('stage0_reg[0]', 'stage1_reg[3]'))
    known = ModuleGroup('pinned', 'register', odd, locked=True)
    grouping = group(netlist, 'ff', [known])
    (pinned,) = [m for m in grouping.groups if m.name == 'pinned']
    assert pinned.gates == odd
    assert pinned.locked


def test_signature_separates_enables():
    fixture = generate(FixtureSpec('word-mux-fanout', 4))
    strict = group(fixture.netlist, 'ff', signature=STRICT)
    loose = group(fixture.netlist, 'ff', signature=LOOSE)
    assert len(strict.word_groups()) == 4
    assert len(loose.word_groups()) == 4


def test_grouping_report():
    fixture = generate(FixtureSpec('register-pipeline', 4, stages=2))
    grouping = group(fixture.netlist)
    doc = grouping.to_dict(fixture.netlist)
    assert doc['target'] == 'ff'
    assert sorted(g['size'] for g in doc['groups']) == [4, 4]
    assert grouping.rounds >= 1


def test_metrics():
    truth = {'a0': 'A', 'a1': 'A', 'b0': 'B', 'b1': 'B'}
    assert nmi({'a0': 'x', 'a1': 'x', 'b0': 'y', 'b1': 'y'}, truth) == pytest.approx(1.0)
    assert purity({'a0': 'x', 'a1': 'x', 'b0': 'x', 'b1': 'x'}, truth) == pytest.approx(0.5)
    assert nmi({'a0': 'x', 'a1': 'x', 'b0': 'x', 'b1': 'x'}, truth) == pytest.approx(0.0)
    # singletons are pure
    assert purity({k: k for k in truth}, truth) == pytest.approx(1.0)
    # unlabeled gates are ignored
    assert purity({'a0': 'x', 'zz': 'y'}, truth) == pytest.approx(1.0)


def test_metrics_need_overlap():
    with pytest.raises(NetlistError):
        nmi({'x': 'a'}, {'y': 'b'})


def test_size_histogram():
    assert size_histogram([8, 8, 1, 1, 1, 4]) == [(1, 3), (8, 2), (4, 1)]
    assert size_histogram([2, 3, 4], top=2) == [(4, 1), (3, 1)]


@pytest.mark.parametrize('seed', range(5))
@pytest.mark.parametrize('arch', ['ice40-like', 'x7-like'])
@pytest.mark.parametrize('kind', ['register-pipeline', 'mixed-soc-slice'])
def test_grouping_across_seeds(kind, arch, seed):
    fixture = generate(FixtureSpec(kind, 8, arch, seed))
    netlist, grouping = _register_grouping(fixture)
    labels = grouping.named_labels(netlist)
    assert nmi(labels, fixture.truth.labels) == pytest.approx(1.0)
    assert purity(labels, fixture.truth.labels) == pytest.approx(1.0)
