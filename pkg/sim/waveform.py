"""
    Sampled net values over clock cycles.

    Values are 0, 1 or X (2). Sample 0 holds the values settled before the
    first clock edge, sample t the values settled after edge t.
"""

import numpy as np

from numpy     import ndarray
from typing    import Iterable, Sequence

from netlist.errors import TraceError


X = 2


# Values of named nets over samples
class Waveform:

    def __init__(self, names: Sequence[str], values: ndarray, clock: str | None = None, period: int = 10):
        values = np.asarray(values, dtype=np.uint8)
        if values.ndim != 2 or values.shape[0] != len(names):
            raise ValueError(f"expected {len(names)} rows of samples, got shape {values.shape}")
        self.names  = list(names)
        self.values = values
        self.clock  = clock
        self.period = period
        self.index  = {n: i for i, n in enumerate(self.names)}

    def __repr__(self):
        return f"Waveform({len(self.names)} nets, {self.samples} samples)"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Waveform):
            return NotImplemented
        if sorted(self.names) != sorted(other.names) or self.samples != other.samples:
            return False
        return all(np.array_equal(self.series(n), other.series(n)) for n in self.names)

    __hash__ = None

    @property
    def samples(self) -> int:
        return self.values.shape[1]

    def __contains__(self, name: str) -> bool:
        return name in self.index

    # Values of one net
    def series(self, name: str) -> ndarray:
        row = self.index.get(name)
        if row is None:
            raise TraceError(f"net {name} is not in the waveform")
        return self.values[row]

    # Value of one net at one sample
    def value(self, name: str, t: int) -> int:
        if not 0 <= t < self.samples:
            raise TraceError(f"sample {t} outside the waveform (0..{self.samples - 1})")
        return int(self.series(name)[t])

    # Integer held by several nets at one sample, bit 0 first, None if any is X
    def word(self, names: Sequence[str], t: int) -> int | None:
        value = 0
        for i, n in enumerate(names):
            v = self.value(n, t)
            if v == X:
                return None
            value |= v << i
        return value

    # Copy restricted to some nets, in the given order
    def restrict(self, names: Iterable[str]) -> 'Waveform':
        names = [n for n in names if n in self.index]
        return Waveform(names, self.values[[self.index[n] for n in names]] if names else
                        np.zeros((0, self.samples), np.uint8), self.clock, self.period)

    # Nets that differ between two waveforms, with their first differing sample
    def differences(self, other: 'Waveform', names: Iterable[str] | None = None) -> dict[str, int]:
        names = list(names) if names is not None else [n for n in self.names if n in other]
        out = {}
        for n in names:
            a, b = self.series(n), other.series(n)
            diff = np.flatnonzero(a != b)
            if diff.size:
                out[n] = int(diff[0])
        return out
