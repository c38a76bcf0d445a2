"""
    Export traced equations as a script.

    Bit symbols are packed into word symbols wherever a recovered word
    (port bus or ordered register group) is read completely at one cycle,
    and traced bits of one word are written as a single word output. Word
    operations folded from arithmetic structures are written as integer
    arithmetic; everything else stays bit level. The dialect is described
    in docs/script.md and run by symbolic.script.
"""

import logging
import os
import re

from dataclasses import dataclass
from jinja2      import Environment, FileSystemLoader
from typing      import Iterable, Mapping, Sequence

from analysis.bitorder import BitOrderResult
from netlist.ir        import ModuleGroup, Netlist
from netlist.library   import FF
from symbolic.expr     import Bit, Expr, render, symbols
from symbolic.trace    import TraceResult, definition_order, parse_target


log = logging.getLogger(__name__)

_TEMPLATES = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'templates')
_BUS = re.compile(r'^(?P<base>.+)\[(?P<index>\d+)\]$')


# A declared symbol or output line of the script
@dataclass
class _Line:
    ident : str
    width : int
    bits  : list[str]
    text  : str = ''


# Port buses base[i] of the global inputs and outputs
def port_words(netlist: Netlist) -> dict[str, list[int | None]]:
    buses: dict[str, dict[int, int]] = {}
    for net in netlist.nets:
        if not (net.global_in or net.global_out):
            continue
        m = _BUS.match(net.name)
        if m:
            buses.setdefault(m['base'], {})[int(m['index'])] = net.id
    out = {}
    for base, bits in sorted(buses.items()):
        if len(bits) > 1:
            out[base] = [bits.get(i) for i in range(max(bits) + 1)]
    return out


# Register groups with their recovered order, Q nets bit 0 first
def register_words(netlist: Netlist, units: Iterable[ModuleGroup],
                   orders: BitOrderResult | None) -> dict[str, list[int | None]]:
    out = {}
    for unit in units:
        flops = [g for g in sorted(unit.gates) if netlist.gates[g].category == FF]
        if len(flops) < 2:
            continue
        assignment = orders.assignments.get(unit.name) if orders is not None else None
        if assignment is None:
            out[unit.name] = [None] * len(flops)
            continue
        bits: list[int | None] = [None] * len(flops)
        for g in flops:
            i = assignment.indices.get(g)
            q = netlist.gates[g].net(netlist.gates[g].type.ff.output)
            if i is not None and 0 <= i < len(bits) and bits[i] is None:
                bits[i] = q
        out[unit.name] = bits
    return out


# Writer of the equation script
class ScriptWriter:
    """
    Render traced equations.

    @type  netlist: Netlist
    @param netlist: The traced netlist

    @type  words: dict( str -> list( int | None ) )
    @param words: Word groups by name, net ids bit 0 first, None where the
                  bit order of a member is unknown
    """

    def __init__(self, netlist: Netlist, words: Mapping[str, Sequence[int | None]] | None = None):
        self.netlist = netlist
        self.words: dict[str, list[int]] = {}
        for name, bits in (words or {}).items():
            bits = list(bits)
            if any(b is None for b in bits) or len(set(bits)) != len(bits):
                log.warning("export.unordered group=%s emitted bit level", name)
                continue
            self.words[name] = bits
        env = Environment(loader=FileSystemLoader(_TEMPLATES), trim_blocks=True,
                          lstrip_blocks=True, keep_trailing_newline=True)
        self.template = env.get_template('equations.txt.j2')
        self.idents: set[str] = set()

    def _ident(self, text: str) -> str:
        base = re.sub(r'\W', '_', text)
        if not base or base[0].isdigit():
            base = 's_' + base
        if base.startswith('v') and base[1:].isdigit():
            base = 's_' + base
        ident, k = base, 1
        while ident in self.idents:
            k += 1
            ident = f"{base}_{k}"
        self.idents.add(ident)
        return ident

    def _name(self, nid: int) -> str:
        return self.netlist.nets[nid].name

    # Declare the word and bit symbols read from the waveform
    def _declare(self, names: list[str]) -> tuple[list[_Line], dict[str, tuple[str, int]], dict[tuple, str], dict[str, str]]:
        present = set(names)
        cycles = sorted({parse_target(n)[1] for n in names})
        lines, bit_of, packed, single = [], {}, {}, {}
        for group, nets in sorted(self.words.items()):
            for c in cycles:
                bits = [f"{self._name(n)}@{c}" for n in nets]
                if not all(b in present for b in bits) or any(b in bit_of for b in bits):
                    continue
                ident = self._ident(f"{group}_{c}")
                lines.append(_Line(ident, len(bits), bits))
                packed[tuple(bits)] = ident
                for i, b in enumerate(bits):
                    bit_of[b] = (ident, i)
        for n in names:
            if n not in bit_of:
                ident = self._ident(n.replace('@', '_'))
                single[n] = ident
                lines.append(_Line(ident, 1, [n]))
        return lines, bit_of, packed, single

    # Output lines, one per traced word when all its bits were traced from one expression
    def _outputs(self, result: TraceResult, draw) -> list[_Line]:
        by_target = {(e.net, e.cycle): e for e in result.equations}
        used: set[tuple[int, int]] = set()
        lines = []
        for group, nets in sorted(self.words.items()):
            for c in sorted({e.cycle for e in result.equations}):
                keys = [(n, c) for n in nets]
                if not all(k in by_target and k not in used for k in keys):
                    continue
                exprs = [by_target[k].expr for k in keys]
                ident = self._ident(f"{group}_{c}")
                bits = [f"{self._name(n)}@{c}" for n in nets]
                lines.append(_Line(ident, len(nets), bits, self._word_text(exprs, draw)))
                used.update(keys)
        for e in result.equations:
            key = (e.net, e.cycle)
            if key in used:
                continue
            target = f"{self._name(e.net)}@{e.cycle}"
            used.add(key)
            lines.append(_Line(self._ident('out_' + target.replace('@', '_')), 1, [target], draw(e.expr)))
        return lines

    @staticmethod
    def _word_text(exprs: list[Expr], draw) -> str:
        first = exprs[0]
        if isinstance(first, Bit) and all(isinstance(e, Bit) and e.word == first.word and e.index == i
                                          for i, e in enumerate(exprs)):
            text = draw(first.word)
            if first.word.width > len(exprs):
                return f"({text} & {hex((1 << len(exprs)) - 1)})"
            return text
        return 'cat(' + ', '.join(draw(e) for e in exprs) + ')'

    # Script text of a trace result
    def write(self, result: TraceResult, design: str = '') -> str:
        self.idents = set()
        definitions = definition_order(result.definitions)
        roots = [e.expr for e in result.equations] + [d.expr for d in definitions]
        names = [s for s in symbols(roots) if '@' in s]
        sym_lines, bit_of, packed, single = self._declare(names)
        self.idents.update(d.name for d in definitions)

        def draw(expr: Expr) -> str:
            return render(expr, lambda s: single.get(s.name, s.name), bit_of, packed)

        def_lines = [_Line(d.name, d.expr.width, [], draw(d.expr)) for d in definitions]
        out_lines = self._outputs(result, draw)
        return self.template.render(design=design or 'netlist', symbols=sym_lines,
                                    definitions=def_lines, outputs=out_lines)


# Export equations with word grouping
def export_equations(netlist: Netlist, result: TraceResult,
                     words: Mapping[str, Sequence[int | None]] | None = None, design: str = '') -> str:
    """
    Write the script of a trace result.

    @type  netlist: Netlist
    @param netlist: The traced netlist

    @type  result: TraceResult
    @param result: Equations and definitions

    @type  words: dict( str -> list( int | None ) )
    @param words: Word groups, port buses when None

    @rtype:   str
    @returns: The script text
    """
    if words is None:
        words = port_words(netlist)
    return ScriptWriter(netlist, words).write(result, design)
