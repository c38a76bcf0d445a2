"""
    Synthetic benchmark netlists with embedded ground truth.

    Every kind is mapped onto the primitives of the chosen architecture
    library by fixtures.builder. The ground truth carries the register
    labels, their bit orders and the intended arithmetic; the expected
    results give what a clean analysis run should report.
"""

import logging

from dataclasses import dataclass, field

from analysis.models   import (ADDITION, SUBTRACTION, COUNTER, CONST_MUL, COMPARATOR,
                               MODEL_PRIORITY, UNKNOWN)
from fixtures.builder  import ARCHITECTURES, NetlistBuilder, lit
from netlist.errors    import ConfigError
from netlist.ir        import Netlist
from netlist.labels    import GroundTruth
from netlist.library   import DSP


log = logging.getLogger(__name__)

KINDS = ('adder', 'subtractor', 'counter-with-reset', 'comparator', 'const-mul',
         'register-pipeline', 'word-mux-fanout', 'mac-loop', 'mixed-soc-slice', 'hilbert-like')

# the kinds with one arithmetic structure
ARITHMETIC_KINDS = ('adder', 'subtractor', 'counter-with-reset', 'comparator', 'const-mul')

MAX_WIDTH = 64

# widths of the hard blocks
DSP_WIDTH = 16

# shift of the constant multiplier, c = 2^k - 1
MUL_SHIFT = 2

# delay line of the hilbert-like filter and its tap pairs
HILBERT_TAPS = 10
HILBERT_ADDS = 7


# Description of a fixture
@dataclass
class FixtureSpec:
    kind         : str
    width        : int = 8
    architecture : str = 'ice40-like'
    seed         : int = 0
    signed       : bool = False
    stages       : int = 4

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown fixture kind {self.kind}")
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"unsupported architecture {self.architecture}")
        if not 2 <= self.width <= MAX_WIDTH:
            raise ConfigError(f"width {self.width} outside 2..{MAX_WIDTH}")
        if self.kind in ('const-mul', 'mixed-soc-slice') and self.width <= MUL_SHIFT:
            raise ConfigError(f"{self.kind} needs a width above {MUL_SHIFT}")
        if self.kind in ('mac-loop', 'mixed-soc-slice') and self.width > DSP_WIDTH:
            raise ConfigError(f"{self.kind} supports widths up to {DSP_WIDTH}")
        if self.stages < 1:
            raise ConfigError("a pipeline needs at least one stage")


# A generated fixture
@dataclass
class Fixture:
    spec     : FixtureSpec
    netlist  : Netlist
    truth    : GroundTruth
    expected : dict = field(default_factory=dict)


# Structures

def _adder(b: NetlistBuilder, name: str, x: list[int], y: list[int], out: list[int]):
    b.carry_add(name, [lit(n) for n in x], [lit(n) for n in y], 0, out)
    b.arithmetic(name, {'identity': ADDITION, 'width': len(x)}, [x, y], out)


def _subtractor(b: NetlistBuilder, name: str, x: list[int], y: list[int], out: list[int]):
    b.carry_add(name, [lit(n) for n in x], [lit(n, True) for n in y], 1, out)
    b.arithmetic(name, {'identity': SUBTRACTION, 'width': len(x)}, [x, y], out)


# x < y as the carry out of y + ~x
def _less_than(b: NetlistBuilder, name: str, x: list[int], y: list[int], out: int, signed: bool):
    top = len(x) - 1
    xs = [lit(n) for n in y]
    ys = [lit(n, True) for n in x]
    if signed:
        xs[top] = lit(y[top], True)
        ys[top] = lit(x[top])
    b.carry_add(name, xs, ys, 0, None, cout=out)
    b.arithmetic(name, {'identity': COMPARATOR, 'width': len(x), 'relation': 'lt', 'signed': signed},
                 [x, y], [out])


# (x << k) - x
def _const_mul(b: NetlistBuilder, name: str, x: list[int], out: list[int]):
    shifted = [lit(b.const0)] * MUL_SHIFT + [lit(n) for n in x[:len(x) - MUL_SHIFT]]
    b.carry_add(name, shifted, [lit(n, True) for n in x], 1, out)
    b.arithmetic(name, {'identity': CONST_MUL, 'width': len(x), 'c': (1 << MUL_SHIFT) - 1}, [x], out)


# Counter register with a synchronous reset, returns the count
def _counter(b: NetlistBuilder, name: str, width: int, rst: int, outputs: bool) -> list[int]:
    d = b.wires(f"{name}_d", width)
    if b.arch == 'ice40-like':
        q = b.register(name, d, outputs=outputs)
        b.carry_add(f"{name}_inc", [lit(n) for n in q], [lit(b.const0)] * width, 1, d, clear=rst)
    else:
        q = b.register(name, d, reset=rst, outputs=outputs)
        b.carry_add(f"{name}_inc", [lit(n) for n in q], [lit(b.const0)] * width, 1, d)
    b.arithmetic(f"{name}_inc", {'identity': COUNTER, 'width': width, 'n': 1}, [q], d)
    return q


# A MAC block accumulating x * y, returns its output nets
def _mac(b: NetlistBuilder, name: str, x: list[int], y: list[int], ce: int, rst: int, base: str) -> list[int]:
    out = b.wires(base, 2 * DSP_WIDTH, global_out=True)
    pad = lambda word: list(word) + [b.const0] * (DSP_WIDTH - len(word))
    if b.arch == 'ice40-like':
        type_name, enable, reset, port = 'SB_MAC16', 'CE', 'R', 'O'
    else:
        type_name, enable, reset, port = 'DSP48E1', 'CE', 'RST', 'P'
    pins = {'CLK': b.clock, enable: ce, reset: rst}
    pins.update({f"A[{i}]": n for i, n in enumerate(pad(x))})
    pins.update({f"B[{i}]": n for i, n in enumerate(pad(y))})
    pins.update({f"{port}[{i}]": n for i, n in enumerate(out)})
    b.gate(type_name, name, pins)
    return out


# Kinds

def _gen_adder(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    a, c = b.inputs('a', w), b.inputs('b', w)
    _adder(b, 'add', a, c, b.wires('y', w, global_out=True))


def _gen_subtractor(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    a, c = b.inputs('a', w), b.inputs('b', w)
    _subtractor(b, 'sub', a, c, b.wires('y', w, global_out=True))


def _gen_counter(b: NetlistBuilder, spec: FixtureSpec):
    _counter(b, 'q', spec.width, b.input('rst'), outputs=True)


def _gen_comparator(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    a, c = b.inputs('a', w), b.inputs('b', w)
    _less_than(b, 'cmp', a, c, b.output(b.net('lt')), spec.signed)


def _gen_const_mul(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    _const_mul(b, 'mul', b.inputs('a', w), b.wires('y', w, global_out=True))


def _gen_pipeline(b: NetlistBuilder, spec: FixtureSpec):
    word = b.inputs('din', spec.width)
    for s in range(spec.stages):
        word = b.register(f"stage{s}", word, enable=b.input(f"en{s}"), outputs=s == spec.stages - 1)


# Two source registers, a word MUX and two registers reading its output
def _gen_word_mux(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    ra = b.register('ra', b.inputs('a', w), enable=b.input('en_a'))
    rb = b.register('rb', b.inputs('b', w), enable=b.input('en_b'))
    y = b.wires('y', w)
    b.word_mux('sel', b.input('sel'), ra, rb, y)
    b.register('ro', y, enable=b.input('en_o'), outputs=True)
    b.register('rp', y, enable=b.input('en_p'), outputs=True)


def _gen_mac(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    _mac(b, 'mac', b.inputs('a', w), b.inputs('b', w), b.input('ce'), b.input('rst'), 'p')


# Every other kind around one datapath, wired through a word MUX
def _gen_mixed(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    rst = b.input('rst')
    load = lambda name: b.register(name, b.inputs(f"{name}_in", w), enable=b.input(f"en_{name}"))
    ra, rb, rc, rd = load('ra'), load('rb'), load('rc'), load('rd')

    s = b.wires('sum', w)
    _adder(b, 'add', ra, rb, s)
    r_sum = b.register('r_sum', s, enable=b.input('en_sum'))

    diff = b.wires('diff', w)
    _subtractor(b, 'sub', rc, rd, diff)
    r_diff = b.register('r_diff', diff, enable=b.input('en_diff'))

    m = b.wires('prod', w)
    _const_mul(b, 'mul', ra, m)
    r_mul = b.register('r_mul', m, enable=b.input('en_mul'))

    _counter(b, 'cnt', w, rst, outputs=True)

    flag = b.net('lt')
    _less_than(b, 'cmp', r_sum, r_diff, flag, spec.signed)
    b.register('r_lt', [flag], outputs=True)

    word = r_diff
    for k in range(max(spec.stages // 2, 1)):
        word = b.register(f"pipe{k}", word, enable=b.input(f"en_pipe{k}"))
    for n in word:
        b.output(n)

    y = b.wires('y', w)
    b.word_mux('sel', b.input('sel'), r_sum, r_mul, y)
    r_o1 = b.register('r_o1', y, enable=b.input('en_o1'))
    r_o2 = b.register('r_o2', y, enable=b.input('en_o2'))
    _mac(b, 'mac', r_o1, r_o2, b.input('ce'), rst, 'p')


# Delay line with tap differences summed pairwise: 10 subtractions, 7 additions
def _gen_hilbert(b: NetlistBuilder, spec: FixtureSpec):
    w = spec.width
    taps, word = [], b.inputs('x', w)
    for k in range(HILBERT_TAPS):
        word = b.register(f"z{k}", word)
        taps.append(word)
    diffs = []
    for j in range(HILBERT_TAPS):
        d = b.wires(f"d{j}", w)
        _subtractor(b, f"sub{j}", taps[j], taps[(j + 3) % HILBERT_TAPS], d)
        diffs.append(b.register(f"rs{j}", d))
    for k in range(HILBERT_ADDS):
        s = b.wires(f"s{k}", w)
        _adder(b, f"add{k}", diffs[k], diffs[k + 3], s)
        b.register(f"y{k}", s, outputs=True)


_GENERATORS = {
    'adder'              : _gen_adder,
    'subtractor'         : _gen_subtractor,
    'counter-with-reset' : _gen_counter,
    'comparator'         : _gen_comparator,
    'const-mul'          : _gen_const_mul,
    'register-pipeline'  : _gen_pipeline,
    'word-mux-fanout'    : _gen_word_mux,
    'mac-loop'           : _gen_mac,
    'mixed-soc-slice'    : _gen_mixed,
    'hilbert-like'       : _gen_hilbert,
}


# Expected analysis results of a fixture
def _expected(spec: FixtureSpec, netlist: Netlist, truth: GroundTruth) -> dict:
    counts = {m: 0 for m in MODEL_PRIORITY + (UNKNOWN,)}
    for entry in truth.arithmetic:
        counts[entry['identity']] += 1
    groups = truth.groups()
    # every counter bit feeds itself back, a MAC block its accumulator
    loops = sum(e['width'] for e in truth.arithmetic if e['identity'] == COUNTER)
    loops += sum(1 for g in netlist.gates if g.category == DSP)
    return {
        'kind'            : spec.kind,
        'architecture'    : spec.architecture,
        'width'           : spec.width,
        'chains'          : len(truth.arithmetic),
        'arithmetic'      : counts,
        'register_groups' : len(groups),
        'ordered_groups'  : len(truth.bit_orders),
        'nmi'             : 1.0,
        'purity'          : 1.0,
        'loop_cuts'       : loops,
        'gates'           : len(netlist.gates),
    }


# Generate a fixture
def generate(spec: FixtureSpec) -> Fixture:
    """
    Build the netlist, ground truth and expected results of a fixture.

    @type  spec: FixtureSpec
    @param spec: Kind, width, architecture and seed

    @rtype:   Fixture
    @returns: The generated fixture

    @raise ConfigError: unknown kind or unsupported width and architecture
    """
    spec.validate()
    builder = NetlistBuilder(spec.architecture, spec.seed)
    _GENERATORS[spec.kind](builder, spec)
    netlist = builder.build()
    truth = builder.truth
    log.info("fixture.done kind=%s arch=%s width=%d gates=%d nets=%d",
             spec.kind, spec.architecture, spec.width, len(netlist.gates), len(netlist.nets))
    return Fixture(spec, netlist, truth, _expected(spec, netlist, truth))
