import pytest

from fixtures.builder   import ARCHITECTURES, NetlistBuilder, lit
from fixtures.generator import KINDS, FixtureSpec, generate
from netlist.errors     import BuildError, ConfigError
from netlist.labels     import GroundTruth


@pytest.mark.parametrize('spec', [
    FixtureSpec('divider'),
    FixtureSpec('adder', architecture='ecp5'),
    FixtureSpec('adder', width=1),
    FixtureSpec('const-mul', width=2),
    FixtureSpec('mac-loop', width=32),
    FixtureSpec('register-pipeline', stages=0),
])
def test_invalid_specs(spec):
    with pytest.raises(ConfigError):
        generate(spec)


@pytest.mark.parametrize('arch', ARCHITECTURES)
@pytest.mark.parametrize('kind', KINDS)
def test_every_kind_builds(kind, arch):
    fixture = generate(FixtureSpec(kind, 8, arch))
    expected = fixture.expected
    assert expected['kind'] == kind
    assert expected['gates'] == len(fixture.netlist.gates)
    assert expected['chains'] == sum(expected['arithmetic'].values())
    assert expected['register_groups'] == len(fixture.truth.groups())
    # every labeled gate exists
    assert all(fixture.netlist.gate_by_name(g) is not None for g in fixture.truth.labels)


def test_truth_round_trip():
    fixture = generate(FixtureSpec('mixed-soc-slice', 8))
    assert GroundTruth.from_dict(fixture.truth.to_dict()) == fixture.truth


def test_seed_permutes_ids():
    a = generate(FixtureSpec('adder', 4, seed=1)).netlist
    b = generate(FixtureSpec('adder', 4, seed=2)).netlist
    assert a == b
    assert [g.name for g in a.gates] != [g.name for g in b.gates]


def test_register_truth():
    fixture = generate(FixtureSpec('register-pipeline', 3, stages=2))
    assert fixture.truth.groups() == {
        'stage0': [f"stage0_reg[{i}]" for i in range(3)],
        'stage1': [f"stage1_reg[{i}]" for i in range(3)],
    }
    assert fixture.truth.bit_orders['stage1'] == {f"stage1_reg[{i}]": i for i in range(3)}


def test_carry_add_widths():
    b = NetlistBuilder('ice40-like')
    x, y = b.inputs('x', 3), b.inputs('y', 2)
    with pytest.raises(BuildError):
        b.carry_add('bad', [lit(n) for n in x], [lit(n) for n in y], 0, b.wires('s', 3))
