import pytest

from analysis.arith     import (ArithmeticStructure, _rank, arithmetic_modules, classify_arithmetic,
                                simulate_structure, verify)
from analysis.candidates import build_structural_candidates, derive_functional_candidates
from analysis.chains    import find_carry_chains
from analysis.models    import (ADDITION, COMPARATOR, CONST_MUL, COUNTER, NEGATION, SUBTRACTION,
                                ArithmeticModel)
from analysis.preprocess import preprocess
from fixtures.generator import MUL_SHIFT, FixtureSpec, generate
from netlist.errors     import NetlistError


ARCHS = ['ice40-like', 'x7-like']


def test_model_semantics():
    assert ArithmeticModel(ADDITION, 8).evaluate(200, 100) == 44
    assert ArithmeticModel(ADDITION, 8, carry_out=True).evaluate(200, 100) == 300
    assert ArithmeticModel(SUBTRACTION, 4).evaluate(3, 5) == 14
    assert ArithmeticModel(NEGATION, 4).evaluate(1) == 15
    assert ArithmeticModel(COUNTER, 4, n=15).evaluate(0) == 15
    assert ArithmeticModel(CONST_MUL, 8, c=7).evaluate(40) == 24
    assert ArithmeticModel(COMPARATOR, 4, relation='lt').evaluate(3, 12) == 1
    assert ArithmeticModel(COMPARATOR, 4, relation='lt', signed=True).evaluate(3, 12) == 0
    assert ArithmeticModel(COMPARATOR, 4, relation='le').evaluate(5, 5) == 1


def test_model_text():
    assert ArithmeticModel(COUNTER, 4, n=1).describe() == "A + 1"
    assert ArithmeticModel(COUNTER, 4, n=15).describe() == "A - 1"
    assert ArithmeticModel(COMPARATOR, 8, relation='lt', signed=True).describe() == "A < B (signed)"
    model = ArithmeticModel(CONST_MUL, 8, c=7)
    assert ArithmeticModel.from_dict(model.to_dict()) == model


@pytest.mark.parametrize('doc', [
    {'identity': 'division', 'width': 4},
    {'identity': COUNTER, 'width': 4, 'n': 0},
    {'identity': CONST_MUL, 'width': 4},
    {'identity': COMPARATOR, 'width': 4, 'relation': 'gt'},
])
def test_model_rejects(doc):
    with pytest.raises(ValueError):
        ArithmeticModel(**doc)


def test_priority_order():
    models = [ArithmeticModel(COMPARATOR, 4, relation='eq'), ArithmeticModel(ADDITION, 4),
              ArithmeticModel(COUNTER, 4, n=1)]
    assert [m.identity for m in sorted(models, key=lambda m: m.priority)] == [COUNTER, ADDITION, COMPARATOR]


@pytest.mark.parametrize('arch, width, expected', [
    ('ice40-like', 8, 8), ('x7-like', 8, 8), ('x7-like', 6, 8), ('x7-like', 9, 12),
])
def test_carry_chains(arch, width, expected):
    fixture = generate(FixtureSpec('adder', width, arch))
    (chain,) = find_carry_chains(fixture.netlist)
    assert len(chain) == expected
    assert chain.head == chain.gates[0]
    assert chain.arch == arch


def test_carry_chains_need_carry_library():
    fixture = generate(FixtureSpec('adder', 4))
    with pytest.raises(NetlistError):
        find_carry_chains(fixture.netlist, 'primitive')


@pytest.mark.parametrize('arch', ARCHS)
@pytest.mark.parametrize('kind, width, signed', [
    ('adder', 8, False),
    ('subtractor', 8, False),
    ('comparator', 8, False),
    ('comparator', 8, True),
    ('counter-with-reset', 6, False),
    ('const-mul', 8, False),
])
def test_classification(arch, kind, width, signed):
    fixture = generate(FixtureSpec(kind, width, arch, signed=signed))
    netlist, _ = preprocess(fixture.netlist)
    structures, summary = classify_arithmetic(netlist)

    assert summary.counts == fixture.expected['arithmetic']
    assert summary.chains_total == fixture.expected['chains']
    assert summary.undecided == 0
    for s in structures:
        assert s.verified
        assert simulate_structure(netlist, s, vectors=200)


def test_candidate_phases():
    fixture = generate(FixtureSpec('adder', 4))
    netlist, _ = preprocess(fixture.netlist)
    (chain,) = find_carry_chains(netlist)
    candidates = build_structural_candidates(chain, netlist)
    assert candidates[0].variant == 'p0s0'
    assert all(set(chain.gates) <= c.gates for c in candidates)
    assert len({c.gates for c in candidates}) == len(candidates)
    assert len(build_structural_candidates(chain, netlist, max_variants=1)) == 1

    found = []
    for c in candidates:
        for f in derive_functional_candidates(c, netlist):
            s = verify(f)
            if s is not None and s.verified:
                found.append(s.model.identity)
    assert ADDITION in found


def test_classified_adder_details():
    fixture = generate(FixtureSpec('adder', 4))
    netlist, _ = preprocess(fixture.netlist)
    (s,), summary = classify_arithmetic(netlist)
    assert s.model.identity == ADDITION and s.model.width == 4
    doc = s.to_dict(netlist)
    assert doc['model']['text'] == "A + B"
    assert {f"y[{i}]" for i in range(4)} <= set(doc['outputs'])
    operands = sorted(sorted(op['nets']) for op in doc['operands'])
    assert operands == [sorted(f"a[{i}]" for i in range(4)), sorted(f"b[{i}]" for i in range(4))]
    assert summary.classified_fraction > 0.5


def test_counter_is_preferred_over_addition():
    fixture = generate(FixtureSpec('counter-with-reset', 4, 'x7-like'))
    netlist, _ = preprocess(fixture.netlist)
    (s,), _ = classify_arithmetic(netlist)
    assert s.model.identity == COUNTER
    assert s.model.n == 1


def test_parallel_jobs_agree():
    fixture = generate(FixtureSpec('mixed-soc-slice', 8))
    netlist, _ = preprocess(fixture.netlist)
    serial, s1 = classify_arithmetic(netlist)
    parallel, s2 = classify_arithmetic(netlist, jobs=4)
    assert s1 == s2
    assert [s.chain for s in serial] == [s.chain for s in parallel]


def test_arithmetic_modules():
    fixture = generate(FixtureSpec('mixed-soc-slice', 8))
    netlist, _ = preprocess(fixture.netlist)
    structures, summary = classify_arithmetic(netlist)
    modules = arithmetic_modules(netlist, structures)
    assert len(modules) == summary.chains_verified
    for m in modules:
        assert m.kind == 'arithmetic'
        assert m.locked

    annotated = netlist.with_modules(modules)
    assert len(annotated.modules) == len(modules)
    claimed = [g for m in modules for g in m.gates]
    assert len(claimed) == len(set(claimed))


@pytest.mark.parametrize('width', [2, 4, 8])
def test_ice40_low_sum_bit(width):
    fixture = generate(FixtureSpec('adder', width, 'ice40-like'))
    netlist, _ = preprocess(fixture.netlist)
    (chain,) = find_carry_chains(netlist)
    candidates = build_structural_candidates(chain, netlist)
    widest = max(len(c.outputs) for c in candidates if c.variant.endswith('+'))
    assert widest > max(len(c.outputs) for c in candidates if not c.variant.endswith('+'))

    structures, summary = classify_arithmetic(netlist)
    assert summary.counts[ADDITION] == 1
    (s,) = structures
    assert s.model.identity == ADDITION
    assert s.model.width == width
    assert len(s.outputs) == width
    assert simulate_structure(netlist, s, vectors=1000)


# A full-width match beats a narrower one of higher priority
def test_identify_prefers_coverage():
    narrow = ArithmeticStructure(0, (0, 1), ArithmeticModel(NEGATION, 1), [[5]], [7], {})
    full = ArithmeticStructure(0, (0, 1, 2), ArithmeticModel(ADDITION, 2), [[5, 6], [8, 9]], [7, 10], {})
    controlled = ArithmeticStructure(0, (0, 1, 2), ArithmeticModel(ADDITION, 2), [[5, 6], [8, 9]], [7, 10],
                                     {11: 0})
    counter = ArithmeticStructure(0, (0, 1, 2), ArithmeticModel(COUNTER, 2, n=1), [[5, 6]], [7, 10], {11: 0})
    ranked = sorted([(0, narrow), (1, controlled), (2, full), (3, counter)], key=lambda e: _rank(*e))
    assert [s for _, s in ranked] == [full, counter, controlled, narrow]


def _oracle_cases() -> list:
    kinds = [('adder', False), ('subtractor', False), ('comparator', False), ('comparator', True),
             ('counter-with-reset', False), ('const-mul', False)]
    return [(kind, signed, width) for kind, signed in kinds for width in range(2, 17)
            if kind != 'const-mul' or width > MUL_SHIFT]


@pytest.mark.parametrize('seed', range(5))
@pytest.mark.parametrize('arch', ARCHS)
@pytest.mark.parametrize('kind, signed, width', _oracle_cases())
def test_classification_oracle(kind, signed, width, arch, seed):
    fixture = generate(FixtureSpec(kind, width, arch, seed, signed=signed))
    netlist, _ = preprocess(fixture.netlist)
    structures, summary = classify_arithmetic(netlist)
    assert summary.counts == fixture.expected['arithmetic']

    (entry,) = fixture.truth.arithmetic
    (s,) = structures
    assert s.verified
    assert s.model.identity == entry['identity']
    assert s.model.width == width
    truth_operands = {tuple(op) for op in entry['operands']}
    for op in s.operands:
        assert tuple(netlist.nets[n].name for n in op) in truth_operands
    assert simulate_structure(netlist, s, vectors=1000, seed=seed)
