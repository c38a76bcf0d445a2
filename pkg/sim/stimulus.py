"""
    Values applied to the global inputs, cycle by cycle.

    Stimulus YAML:

        clock: clk                # optional, found from the clock pins otherwise
        cycles: 300               # optional default run length
        default: 0                # optional value of unlisted inputs
        inputs:
          rst: [1, 1, 0]          # bit sequence, the last value is held
          en: 1                   # constant
        words:
          a: [3, 5, 7]            # integers over a[0], a[1], ...
"""

import yaml
import numpy as np

from dataclasses import dataclass, field
from typing      import Iterable

from netlist.errors import ParseError, SimulationError
from netlist.ir     import Netlist
from sim.waveform   import Waveform


# Per-cycle values of the global inputs
@dataclass
class Stimulus:
    values  : dict[str, list[int]] = field(default_factory=dict)
    clock   : str | None = None
    default : int | None = None
    cycles  : int | None = None

    # Value of an input during sample t, the last listed value is held
    def value(self, name: str, t: int) -> int:
        seq = self.values.get(name)
        if seq is None or not seq:
            if self.default is None:
                raise SimulationError(f"undefined input {name}")
            return self.default
        return seq[min(t, len(seq) - 1)]

    def covers(self, name: str) -> bool:
        return name in self.values or self.default is not None


# Spread integers over the bits of a bus named base[i]
def _word_bits(base: str, words: list[int], netlist: Netlist | None) -> dict[str, list[int]]:
    if netlist is not None:
        width = sum(1 for n in netlist.global_inputs if netlist.nets[n].name.startswith(f"{base}["))
    else:
        width = max((int(w).bit_length() for w in words), default=1)
    width = max(width, 1)
    return {f"{base}[{i}]": [(int(w) >> i) & 1 for w in words] for i in range(width)}


# Build a stimulus from a parsed document
def stimulus_from_dict(doc: dict, netlist: Netlist | None = None) -> Stimulus:
    if not isinstance(doc, dict):
        raise ParseError("stimulus must be a mapping")
    values: dict[str, list[int]] = {}
    for name, seq in (doc.get('inputs') or {}).items():
        seq = seq if isinstance(seq, list) else [seq]
        if any(v not in (0, 1) for v in seq):
            raise ParseError(f"stimulus: input {name} must hold bits")
        values[str(name)] = [int(v) for v in seq]
    for base, words in (doc.get('words') or {}).items():
        words = words if isinstance(words, list) else [words]
        values.update(_word_bits(str(base), words, netlist))
    default = doc.get('default')
    return Stimulus(values, doc.get('clock'), None if default is None else int(default), doc.get('cycles'))


def load_stimulus(path: str, netlist: Netlist | None = None) -> Stimulus:
    with open(path, 'r') as file:
        try:
            doc = yaml.safe_load(file)
        except yaml.YAMLError as e:
            raise ParseError(f"{path}: {e}") from e
    return stimulus_from_dict(doc or {}, netlist)


# Stimulus replaying the global inputs recorded in a waveform
def stimulus_from_waveform(waveform: Waveform, netlist: Netlist) -> Stimulus:
    values = {}
    for n in netlist.global_inputs:
        name = netlist.nets[n].name
        if name in waveform and name != waveform.clock:
            values[name] = [int(v) for v in waveform.series(name)]
    return Stimulus(values, waveform.clock, None, waveform.samples - 1)


# Random values with held inputs and a reset prologue
def random_stimulus(netlist: Netlist, cycles: int, seed: int = 0,
                    hold: dict[str, int] | None = None,
                    reset: dict[str, int] | None = None,
                    reset_cycles: int = 2,
                    exclude: Iterable[str] = ()) -> Stimulus:
    """
    Draw random input bits.

    @type  netlist: Netlist
    @param netlist: The netlist whose global inputs are driven

    @type  cycles: int
    @param cycles: Number of clock cycles

    @type  seed: int
    @param seed: Seed of the generator

    @type  hold: dict( str -> int )
    @param hold: Inputs kept at a constant value

    @type  reset: dict( str -> int )
    @param reset: Reset inputs with their active value, active during the
                  first reset_cycles samples and inactive afterwards

    @rtype:   Stimulus
    @returns: The stimulus
    """
    rng = np.random.default_rng(seed)
    hold, reset = dict(hold or {}), dict(reset or {})
    skip = set(exclude)
    values = {}
    for n in netlist.global_inputs:
        name = netlist.nets[n].name
        if name in skip:
            continue
        if name in hold:
            values[name] = [int(hold[name])]
        elif name in reset:
            active = int(reset[name])
            values[name] = [active] * reset_cycles + [1 - active]
        else:
            values[name] = [int(v) for v in rng.integers(0, 2, size=cycles + 1)]
    return Stimulus(values, None, None, cycles)
