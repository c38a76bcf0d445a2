"""
    Value change dump reading and writing.

    Written dumps hold one 1-bit wire per net, a `$comment samples N period P
    clock C $end` header line and sample t at time t * P. Reading accepts
    scalar and vector changes; a vector variable `v` of width w becomes the
    nets v[0] .. v[w-1]. Z values are read as X.
"""

import io
import logging
import numpy as np

from vcd        import VCDWriter
from vcd.reader import TokenKind, VCDParseError, tokenize

from netlist.errors import ParseError
from sim.waveform   import Waveform, X


log = logging.getLogger(__name__)

_SCALAR = {'0': 0, '1': 1, 'x': X, 'X': X, 'z': X, 'Z': X}
_CHAR   = {0: 0, 1: 1, X: 'x'}

_IGNORED = (TokenKind.DATE, TokenKind.VERSION, TokenKind.TIMESCALE, TokenKind.SCOPE, TokenKind.UPSCOPE,
            TokenKind.DUMPVARS, TokenKind.DUMPALL, TokenKind.DUMPON, TokenKind.DUMPOFF, TokenKind.END)


# Dump a waveform into an open text stream
def _dump(waveform: Waveform, stream, timescale: str, scope: str):
    comment = f"samples {waveform.samples} period {waveform.period}"
    if waveform.clock:
        comment += f" clock {waveform.clock}"
    names = sorted(waveform.names)
    rows = {n: waveform.series(n) for n in names}
    writer = VCDWriter(stream, timescale=timescale, comment=comment)
    variables = {n: writer.register_var(scope, n, 'wire', size=1, init=_CHAR[int(rows[n][0])])
                 for n in names}
    for t in range(1, waveform.samples):
        for n in names:
            if rows[n][t] != rows[n][t - 1]:
                writer.change(variables[n], t * waveform.period, _CHAR[int(rows[n][t])])
    writer.close(waveform.samples * waveform.period)


# Render a waveform as VCD text
def write_vcd(waveform: Waveform, timescale: str = '1 ns', scope: str = 'top') -> str:
    """
    Dump a waveform.

    @type  waveform: Waveform
    @param waveform: The waveform

    @type  timescale: str
    @param timescale: Time unit written in the header

    @type  scope: str
    @param scope: Name of the single module scope

    @rtype:   str
    @returns: The VCD text, nets in name order
    """
    buffer = io.StringIO()
    _dump(waveform, buffer, timescale, scope)
    return buffer.getvalue()


# Net names of one variable declaration
def _var_names(decl) -> list[str]:
    if decl.size == 1:
        return [decl.reference if not isinstance(decl.bit_index, int) else f"{decl.reference}[{decl.bit_index}]"]
    return [f"{decl.reference}[{b}]" for b in range(decl.size)]


# Parse VCD text into a waveform
def read_vcd(text: str) -> Waveform:
    """
    Read a dump into per-sample values.

    The sampling period comes from the samples comment, otherwise from the
    smallest time step. Each sample holds the last value at or before its
    time.

    @type  text: str
    @param text: The VCD text

    @rtype:   Waveform
    @returns: The sampled values

    @raise ParseError: malformed dump or unknown identifier
    """
    variables: dict[str, list[str]] = {}
    names: list[str] = []
    samples = period = None
    clock = None
    declared = False
    changes: list[tuple[int, str, int]] = []
    time = 0
    z_seen = False

    try:
        for token in tokenize(io.BytesIO(text.encode())):
            kind = token.kind
            if kind in _IGNORED:
                continue
            if kind == TokenKind.VAR:
                decl = token.data
                bits = _var_names(decl)
                if decl.size == 1:
                    variables.setdefault(decl.id_code, []).extend(bits)
                else:
                    variables.setdefault(decl.id_code, bits)
                names += [b for b in bits if b not in names]
            elif kind == TokenKind.COMMENT:
                body = token.data.split()
                if body and body[0] == 'samples':
                    fields = dict(zip(body[::2], body[1::2]))
                    samples = int(fields.get('samples', 0))
                    period = int(fields.get('period', 1))
                    clock = fields.get('clock')
            elif kind == TokenKind.ENDDEFINITIONS:
                declared = True
            elif not declared:
                raise ParseError(f"vcd: value change before $enddefinitions ({kind.name})")
            elif kind == TokenKind.CHANGE_TIME:
                time = int(token.data)
            elif kind == TokenKind.CHANGE_SCALAR:
                code, value = token.data.id_code, str(token.data.value)
                if code not in variables:
                    raise ParseError(f"vcd: unknown identifier {code!r}")
                z_seen |= value in 'zZ'
                for name in variables[code]:
                    changes.append((time, name, _SCALAR.get(value, X)))
            elif kind == TokenKind.CHANGE_VECTOR:
                code, value = token.data.id_code, token.data.value
                if code not in variables:
                    raise ParseError(f"vcd: unknown identifier {code!r}")
                bits = variables[code]
                if isinstance(value, int):
                    values = [(value >> b) & 1 for b in range(len(bits))]
                else:
                    digits = value.rjust(len(bits), '0' if value[0] in '01' else value[0])
                    z_seen |= any(d in 'zZ' for d in digits)
                    values = [_SCALAR.get(digits[-1 - b], X) for b in range(len(bits))]
                for name, v in zip(bits, values):
                    changes.append((time, name, v))
            else:
                raise ParseError(f"vcd: {kind.name.lower()} values are not supported")
    except VCDParseError as e:
        raise ParseError(f"vcd: {e}") from e
    if not declared:
        raise ParseError("vcd: missing $enddefinitions")
    if z_seen:
        log.warning("vcd.z_as_x high impedance values read as X")

    # sampling
    times = sorted({t for t, _, _ in changes})
    if period is None:
        steps = [b - a for a, b in zip(times, times[1:]) if b > a]
        period = min(steps) if steps else 1
    if samples is None:
        samples = (times[-1] // period + 1) if times else 1

    index = {n: k for k, n in enumerate(names)}
    values = np.full((len(names), samples), X, dtype=np.uint8)
    changes.sort(key=lambda c: c[0])
    for t, name, v in changes:
        start = (t + period - 1) // period
        if start < samples:
            values[index[name], start:] = v
    return Waveform(names, values, clock, period)


def read_vcd_file(path: str) -> Waveform:
    with open(path, 'r') as file:
        return read_vcd(file.read())


def write_vcd_file(path: str, waveform: Waveform):
    with open(path, 'w') as file:
        _dump(waveform, file, '1 ns', 'top')
