"""
    Define the gate libraries: gate types, their pins and roles.

    Three libraries are registered: "primitive" (the decomposition target),
    "ice40-like" and "x7-like". Both architecture libraries include the
    primitive types so that decomposed netlists stay in one library.
"""

from typing_extensions import Self
from dataclasses       import dataclass

from netlist.errors import BuildError


# gate categories
LUT       = 'lut'
CARRY     = 'carry'
FF        = 'ff'
BRAM      = 'bram'
DSP       = 'dsp'
PRIMITIVE = 'primitive-comb'
IO        = 'io'
CONSTANT  = 'constant'

CATEGORIES = (LUT, CARRY, FF, BRAM, DSP, PRIMITIVE, IO, CONSTANT)
SEQUENTIAL = (FF, BRAM, DSP)

# pin roles
DATA      = 'data'
SELECT    = 'select'
ENABLE    = 'enable'
CLOCK     = 'clock'
RESET     = 'reset'
SET       = 'set'
CARRY_IN  = 'carry-in'
CARRY_OUT = 'carry-out'
ADDRESS   = 'address'
NONE      = 'none'

ROLES         = (DATA, SELECT, ENABLE, CLOCK, RESET, SET, CARRY_IN, CARRY_OUT, ADDRESS, NONE)
CONTROL_ROLES = (SELECT, ENABLE, RESET, SET, CLOCK)

IN  = 'in'
OUT = 'out'


# A pin of a gate type
@dataclass(frozen=True)
class PinSpec:
    name      : str
    direction : str
    role      : str = DATA


# An ordered set of pins forming one word, bit 0 first
@dataclass(frozen=True)
class PinGroup:
    name       : str
    pins       : tuple[str, ...]
    descending : bool = False


# Storage behaviour of a flip-flop type
@dataclass(frozen=True)
class FFSpec:
    clock       : str = 'C'
    data        : str = 'D'
    output      : str = 'Q'
    enable      : str | None = None
    clear       : str | None = None
    clear_value : int = 0
    asynchronous: bool = False
    gated       : bool = False


# Define a gate type
class GateType:

    # Create a gate type from its pins and configuration
    def __init__(self,
        name        : str,
        category    : str,
        function    : str,
        pins        : list[PinSpec],
        pin_groups  : list[PinGroup] = (),
        config_keys : dict[str, int] | None = None,
        lut_inputs  : tuple[str, ...] = (),
        ff          : FFSpec | None = None):

        self.name        = name
        self.category    = category
        self.function    = function
        self.pins        = tuple(pins)
        self.pin_groups  = tuple(pin_groups)
        self.config_keys = dict(config_keys or {})
        self.lut_inputs  = tuple(lut_inputs)
        self.ff          = ff

        if category not in CATEGORIES:
            raise Exception(f"{name}: unknown category {category}")

        self._pins = {}
        for p in self.pins:
            if p.name in self._pins:
                raise Exception(f"{name}: duplicate pin {p.name}")
            if p.role not in ROLES:
                raise Exception(f"{name}: unknown role {p.role} on pin {p.name}")
            self._pins[p.name] = p

        # every pin belongs to at most one pin group
        self._group_of: dict[str, tuple[str, int]] = {}
        for g in self.pin_groups:
            for i, pin in enumerate(g.pins):
                if pin not in self._pins:
                    raise Exception(f"{name}: pin group {g.name} names unknown pin {pin}")
                if pin in self._group_of:
                    raise Exception(f"{name}: pin {pin} in two pin groups")
                self._group_of[pin] = (g.name, i)

        if self.is_sequential and len(self.pins_with_role(CLOCK)) != 1:
            raise Exception(f"{name}: sequential type must declare exactly one clock pin")

    def __repr__(self):
        return f"GateType({self.name}, {self.category})"

    @property
    def is_sequential(self) -> bool:
        return self.category in SEQUENTIAL

    @property
    def is_combinational(self) -> bool:
        return not self.is_sequential

    @property
    def inputs(self) -> list[str]:
        return [p.name for p in self.pins if p.direction == IN]

    @property
    def outputs(self) -> list[str]:
        return [p.name for p in self.pins if p.direction == OUT]

    # Get the description of a pin
    def pin(self, name: str) -> PinSpec:
        spec = self._pins.get(name)
        if spec is None:
            raise BuildError(f"{self.name} has no pin {name}")
        return spec

    def has_pin(self, name: str) -> bool:
        return name in self._pins

    def pins_with_role(self, role: str) -> list[str]:
        return [p.name for p in self.pins if p.role == role]

    # Get the pin group and bit index of a pin, if any
    def group_of(self, pin: str) -> tuple[str, int] | None:
        return self._group_of.get(pin)

    def group(self, name: str) -> PinGroup:
        for g in self.pin_groups:
            if g.name == name:
                return g
        raise BuildError(f"{self.name} has no pin group {name}")


# Define a set of gate types
class GateLibrary:

    # Store the names of registered libraries
    NAMES = []

    # Store the libraries by name
    LIBRARIES = {}

    # Register a library
    def __init__(self, name: str, types: list[GateType], includes: list[str] = ()):
        self.name  = name
        self.types: dict[str, GateType] = {}
        for parent in includes:
            for t in GateLibrary.LIBRARIES[parent].types.values():
                self._add(t)
        for t in types:
            self._add(t)

        GateLibrary.LIBRARIES[self.name] = self
        if self.name not in GateLibrary.NAMES:
            GateLibrary.NAMES.append(self.name)

    def _add(self, t: GateType):
        if t.name in self.types:
            raise Exception(f"{self.name}: duplicate gate type {t.name}")
        self.types[t.name] = t

    def __repr__(self):
        return f"{self.name}: {', '.join(self.types)}"

    def __contains__(self, name: str) -> bool:
        return name in self.types

    # Get a gate type, fails on unknown names
    def type(self, name: str) -> GateType:
        t = self.types.get(name)
        if t is None:
            raise BuildError(f"unknown gate type {name} in library {self.name}")
        return t

    # Get the carry gate types of the library
    def carry_types(self) -> list[GateType]:
        return [t for t in self.types.values() if t.category == CARRY]

    # Load a library by name
    @classmethod
    def get(cls, name: str) -> Self | None:
        return cls.LIBRARIES.get(name)


def _bus(name: str, width: int) -> list[str]:
    return [f"{name}[{i}]" for i in range(width)]


def _ins(names: list[str], role: str = DATA) -> list[PinSpec]:
    return [PinSpec(n, IN, role) for n in names]


def _outs(names: list[str], role: str = DATA) -> list[PinSpec]:
    return [PinSpec(n, OUT, role) for n in names]


def _lut(name: str, k: int, key: str) -> GateType:
    inputs = [f"I{i}" for i in range(k)]
    return GateType(name, LUT, 'lut',
        _ins(inputs) + _outs(['O']),
        config_keys = {key: 1 << k},
        lut_inputs  = tuple(inputs))


def _gate2(name: str, function: str) -> GateType:
    return GateType(name, PRIMITIVE, function, _ins(['A', 'B']) + _outs(['Y']))


def _flipflop(name: str, enable: str | None, clear: str | None, role: str | None,
              clear_value: int, asynchronous: bool, gated: bool, init: bool) -> GateType:
    pins = [PinSpec('C', IN, CLOCK)]
    if enable:
        pins.append(PinSpec(enable, IN, ENABLE))
    if clear:
        pins.append(PinSpec(clear, IN, role))
    pins += [PinSpec('D', IN, DATA), PinSpec('Q', OUT, DATA)]
    return GateType(name, FF, 'dff', pins,
        config_keys = {'INIT': 1} if init else None,
        ff = FFSpec(enable=enable, clear=clear, clear_value=clear_value,
                    asynchronous=asynchronous, gated=gated))


def _bram(name: str, clock: str, abits: int, dbits: int, din: str, dout: str) -> GateType:
    raddr, waddr = _bus('RADDR', abits), _bus('WADDR', abits)
    wdata, rdata = _bus(din, dbits), _bus(dout, dbits)
    return GateType(name, BRAM, 'bram',
        [PinSpec(clock, IN, CLOCK), PinSpec('RE', IN, ENABLE), PinSpec('WE', IN, ENABLE)]
        + _ins(raddr, ADDRESS) + _ins(waddr, ADDRESS) + _ins(wdata) + _outs(rdata),
        pin_groups = [PinGroup('RADDR', tuple(raddr), True), PinGroup('WADDR', tuple(waddr), True),
                      PinGroup(din, tuple(wdata), True), PinGroup(dout, tuple(rdata), True)])


def _dsp(name: str, enable: str, reset: str, out: str) -> GateType:
    a, b, o = _bus('A', 16), _bus('B', 16), _bus(out, 32)
    return GateType(name, DSP, 'mac',
        [PinSpec('CLK', IN, CLOCK), PinSpec(enable, IN, ENABLE), PinSpec(reset, IN, RESET)]
        + _ins(a) + _ins(b) + _outs(o),
        pin_groups = [PinGroup('A', tuple(a), True), PinGroup('B', tuple(b), True),
                      PinGroup(out, tuple(o), True)])


# Primitive combinational gates, the target of LUT decomposition
GateLibrary('primitive', [
    GateType('CONST0', CONSTANT,  'const0', _outs(['Y'])),
    GateType('CONST1', CONSTANT,  'const1', _outs(['Y'])),
    GateType('BUF',    PRIMITIVE, 'buf',    _ins(['A']) + _outs(['Y'])),
    GateType('INV',    PRIMITIVE, 'inv',    _ins(['A']) + _outs(['Y'])),
    _gate2('AND2',  'and'),
    _gate2('OR2',   'or'),
    _gate2('XOR2',  'xor'),
    _gate2('XNOR2', 'xnor'),
    GateType('MUX2', PRIMITIVE, 'mux',
        [PinSpec('S', IN, SELECT)] + _ins(['A', 'B']) + _outs(['Y'])),
])


# Lattice iCE40-like: LUT4, carry, DFF variants, RAM, MAC16
def _ice40_flipflops() -> list[GateType]:
    out = []
    for e in ('', 'E'):
        enable = 'E' if e else None
        out.append(_flipflop(f"SB_DFF{e}", enable, None, None, 0, False, False, False))
        # (suffix, pin, role, value, asynchronous)
        for suffix, pin, role, value, asynchronous in (
                ('R',  'R', RESET, 0, True),  ('S',  'S', SET, 1, True),
                ('SR', 'R', RESET, 0, False), ('SS', 'S', SET, 1, False)):
            out.append(_flipflop(f"SB_DFF{e}{suffix}", enable, pin, role, value,
                                 asynchronous, gated=bool(e) and not asynchronous, init=False))
    return out


GateLibrary('ice40-like', [
    _lut('SB_LUT4', 4, 'LUT_INIT'),
    GateType('SB_CARRY', CARRY, 'carry',
        _ins(['I0', 'I1']) + [PinSpec('CI', IN, CARRY_IN), PinSpec('CO', OUT, CARRY_OUT)]),
    *_ice40_flipflops(),
    _bram('SB_RAM256x16', 'CLK', 8, 16, 'WDATA', 'RDATA'),
    _dsp('SB_MAC16', 'CE', 'R', 'O'),
], includes=['primitive'])


# Xilinx 7-series-like: LUT1-6, CARRY4, FDxE, RAMB18, DSP48
_carry4_s, _carry4_di = _bus('S', 4), _bus('DI', 4)
_carry4_o, _carry4_co = _bus('O', 4), _bus('CO', 4)

GateLibrary('x7-like', [
    *[_lut(f"LUT{k}", k, 'INIT') for k in range(1, 7)],
    GateType('CARRY4', CARRY, 'carry4',
        [PinSpec('CI', IN, CARRY_IN), PinSpec('CYINIT', IN, CARRY_IN)]
        + _ins(_carry4_di) + _ins(_carry4_s) + _outs(_carry4_o) + _outs(_carry4_co, CARRY_OUT),
        pin_groups = [PinGroup('S', tuple(_carry4_s), True), PinGroup('DI', tuple(_carry4_di), True),
                      PinGroup('O', tuple(_carry4_o), True), PinGroup('CO', tuple(_carry4_co), True)]),
    _flipflop('FDRE', 'CE', 'R',   RESET, 0, False, False, True),
    _flipflop('FDSE', 'CE', 'S',   SET,   1, False, False, True),
    _flipflop('FDCE', 'CE', 'CLR', RESET, 0, True,  False, True),
    _flipflop('FDPE', 'CE', 'PRE', SET,   1, True,  False, True),
    _bram('RAMB18E1', 'CLK', 9, 16, 'DI', 'DO'),
    _dsp('DSP48E1', 'CE', 'RST', 'P'),
], includes=['primitive'])
