"""
    Netlist normalization passes.

    Fixed order: constants, buffers, dedup, decompose, buffers, dedup. Every
    pass returns a new netlist and a PreprocessReport. Only LUTs, primitive
    gates and constant drivers are rewritten: carry primitives and sequential
    gates are kept as they are (the arithmetic identification reads the carry
    chains, sequential gates hold state).
"""

import logging
import numpy as np

from dataclasses import dataclass, field, asdict

from logic.boolfunc    import BoolFunc, EquivalenceChecker, FuncAlgebra, const, var, truth_tables
from logic.truthtable  import depends_on
from netlist.edit      import NetlistEditor
from netlist.ir        import Netlist
from netlist.library   import LUT, PRIMITIVE, CONSTANT, OUT
from netlist.semantics import evaluate_gate
from analysis.decompose import Decomposer, PRIMITIVE_OF, plan_function, mux_count


log = logging.getLogger(__name__)

# categories the passes may rewrite
REWRITABLE = (LUT, PRIMITIVE, CONSTANT)

PASS_ORDER = ('constants', 'buffers', 'dedup', 'decompose', 'buffers', 'dedup')


# Counts of one or several passes
@dataclass
class PreprocessReport:
    luts_replaced         : int = 0
    buffers_removed       : int = 0
    muxes_extracted       : int = 0
    primitives_emitted    : int = 0
    duplicates_removed    : int = 0
    other_simplifications : int = 0
    gates_removed         : int = 0
    gates_emitted         : int = 0
    gates_before          : int = 0
    gates_after           : int = 0
    passes                : list[dict] = field(default_factory=list)

    @property
    def changes(self) -> int:
        return self.gates_removed + self.gates_emitted + self.other_simplifications

    # Add the counts of a later pass
    def extend(self, other: 'PreprocessReport', name: str):
        for key in ('luts_replaced', 'buffers_removed', 'muxes_extracted', 'primitives_emitted',
                    'duplicates_removed', 'other_simplifications', 'gates_removed', 'gates_emitted'):
            setattr(self, key, getattr(self, key) + getattr(other, key))
        self.gates_after = other.gates_after
        entry = asdict(other)
        entry.pop('passes')
        entry['pass'] = name
        self.passes.append(entry)

    def to_dict(self) -> dict:
        return asdict(self)


# Function of every output of an edited gate, constants folded
def _edited_functions(editor: NetlistEditor, gid: int) -> dict[str, BoolFunc]:
    spec = editor.gates[gid]
    gtype = editor.library.type(spec.type)
    inputs = {}
    for pin in gtype.inputs:
        nid = spec.pins[pin]
        c = editor.constant(nid)
        inputs[pin] = const(c) if c is not None else var(nid)
    return evaluate_gate(gtype, spec.config, inputs, FuncAlgebra())


def _rewritable(editor: NetlistEditor, gid: int) -> bool:
    return editor.library.type(editor.gates[gid].type).category in REWRITABLE


def _outputs(editor: NetlistEditor, gid: int) -> list[tuple[str, int]]:
    spec = editor.gates[gid]
    gtype = editor.library.type(spec.type)
    return [(p, spec.pins[p]) for p in gtype.outputs if p in spec.pins]


def _is_global_out(editor: NetlistEditor, nid: int) -> bool:
    return editor.nets[nid].global_out


# Support and truth table of a small function over sorted net ids
def _signature(f: BoolFunc) -> tuple[tuple[int, ...], bytes] | None:
    variables = sorted(f.support)
    if len(variables) > 16:
        return None
    table = truth_tables([f], variables)[0]
    keep = [v for i, v in enumerate(variables) if depends_on(table, i)]
    if len(keep) != len(variables):
        table = truth_tables([f], keep)[0]
    return tuple(keep), table.tobytes()


def _start(netlist: Netlist) -> tuple[NetlistEditor, PreprocessReport]:
    return NetlistEditor(netlist), PreprocessReport(gates_before=len(netlist.gates))


def _finish(editor: NetlistEditor, report: PreprocessReport, name: str) -> Netlist:
    report.gates_removed += editor.removed
    report.gates_emitted += editor.added
    out = editor.build()
    report.gates_after = len(out.gates)
    log.info("preprocess.%s removed=%d emitted=%d before=%d after=%d",
             name, editor.removed, editor.added, report.gates_before, report.gates_after)
    return out


# Tie the output net of a removed gate to a constant or an existing net
def _redirect(editor: NetlistEditor, source: int, out: int) -> bool:
    if editor.mergeable(source, out):
        editor.merge_nets(source, out)
        return True
    return False


# Replace gates with constant-determined outputs by constant bindings
def propagate_constants(netlist: Netlist) -> tuple[Netlist, PreprocessReport]:
    """
    Fold constants until fixpoint.

    A gate whose outputs are all constant is removed and its output nets
    bound to the constant nets; a global output gets a CONST0/CONST1 driver
    instead. A gate reduced to one of its inputs by a constant (MUX2 with a
    constant select, AND2 with a 1) is removed by merging nets.

    @rtype:   (Netlist, PreprocessReport)
    @returns: The simplified netlist and its report
    """
    editor, report = _start(netlist)
    changed = True
    while changed:
        changed = False
        for gid in sorted(editor.gates):
            if gid not in editor.gates or not _rewritable(editor, gid):
                continue
            spec = editor.gates[gid]
            gtype = editor.library.type(spec.type)
            outputs = _outputs(editor, gid)
            if not outputs:
                continue

            functions = _edited_functions(editor, gid)
            folded = {}
            for pin, out in outputs:
                f = functions[pin]
                if f.is_const:
                    folded[pin] = ('const', f.value)
                elif f.op == BoolFunc.VAR and gtype.category != CONSTANT and gtype.function != 'buf':
                    has_constant = any(editor.constant(n) is not None for _, n in
                                       ((p, spec.pins[p]) for p in gtype.inputs))
                    if has_constant:
                        folded[pin] = ('net', f.key)
            if len(folded) != len(outputs):
                continue

            # constant gates driving global outputs stay
            if gtype.category == CONSTANT and all(_is_global_out(editor, n) for _, n in outputs):
                continue

            kinds = {k for k, _ in folded.values()}
            bindings = [(out, folded[pin]) for pin, out in outputs]
            editor.remove_gate(gid)
            for out, (kind, value) in bindings:
                source = editor.const_net(value) if kind == 'const' else value
                if _redirect(editor, source, out):
                    continue
                if kind == 'const':
                    editor.add_gate('CONST1' if value else 'CONST0', {'Y': out}, name=f"{spec.name}$const")
                else:
                    editor.add_gate('BUF', {'A': source, 'Y': out}, name=f"{spec.name}$buf")
            report.other_simplifications += 1
            if 'net' in kinds:
                log.debug("preprocess.constants identity gate=%s", spec.name)
            changed = True

    return _finish(editor, report, 'constants'), report


# Remove combinational gates whose outputs reach nothing
def _sweep_dead(editor: NetlistEditor) -> int:
    swept = 0
    changed = True
    while changed:
        changed = False
        for gid in sorted(editor.gates):
            if gid not in editor.gates or not _rewritable(editor, gid):
                continue
            outputs = _outputs(editor, gid)
            if all(not editor.readers(n) and not _is_global_out(editor, n) for _, n in outputs):
                editor.remove_gate(gid)
                swept += 1
                changed = True
    return swept


# Identity of a single-output gate: the input it copies or inverts
def _identity(editor: NetlistEditor, gid: int) -> tuple[int, bool] | None:
    outputs = _outputs(editor, gid)
    if len(outputs) != 1:
        return None
    f = _edited_functions(editor, gid)[outputs[0][0]]
    if f.is_const or len(f.support) > 6:
        return None
    sig = _signature(f)
    if sig is None or len(sig[0]) != 1:
        return None
    table = np.frombuffer(sig[1], np.uint8)
    return sig[0][0], bool(table[1] == 1)


# Remove buffers and inverter pairs by merging nets
def remove_buffers(netlist: Netlist) -> tuple[Netlist, PreprocessReport]:
    """
    Remove gates that copy one of their inputs.

    Detection is functional (truth table over the gate inputs), so LUTs
    realizing an identity are removed too. Two chained inverters fold into
    a net merge. Gates driving global outputs are kept. Combinational gates
    left without readers are swept afterwards.

    @rtype:   (Netlist, PreprocessReport)
    @returns: The simplified netlist and its report
    """
    editor, report = _start(netlist)
    changed = True
    while changed:
        changed = False
        for gid in sorted(editor.gates):
            if gid not in editor.gates or not _rewritable(editor, gid):
                continue
            found = _identity(editor, gid)
            if found is None:
                continue
            source, positive = found
            (_, out), = _outputs(editor, gid)
            if _is_global_out(editor, out):
                continue

            if positive:
                editor.remove_gate(gid)
                editor.merge_nets(source, out)
                report.buffers_removed += 1
                changed = True
                continue

            # inverter of an inverter
            driver = editor.driver(source)
            if driver is None or not _rewritable(editor, driver[0]):
                continue
            inner = _identity(editor, driver[0])
            if inner is None or inner[1]:
                continue
            origin = inner[0]
            editor.remove_gate(gid)
            editor.merge_nets(origin, out)
            report.buffers_removed += 1
            if not editor.readers(source) and not _is_global_out(editor, source):
                editor.remove_gate(driver[0])
                report.buffers_removed += 1
            changed = True

    report.other_simplifications += _sweep_dead(editor)
    return _finish(editor, report, 'buffers'), report


# Merge combinational gates computing the same function on the same nets
def deduplicate_gates(netlist: Netlist) -> tuple[Netlist, PreprocessReport]:
    """
    Merge duplicate combinational gates until fixpoint.

    Single-output rewritable gates are keyed by their function: the sorted
    semantic support and the truth table over it, so permuted LUT inputs
    still match. Other combinational gates are keyed by type, configuration
    and pin bindings. Sequential gates are never merged.

    @rtype:   (Netlist, PreprocessReport)
    @returns: The simplified netlist and its report
    """
    editor, report = _start(netlist)
    changed = True
    while changed:
        changed = False
        buckets: dict[tuple, list[int]] = {}
        for gid in sorted(editor.gates):
            spec = editor.gates[gid]
            gtype = editor.library.type(spec.type)
            if gtype.is_sequential or gtype.category == CONSTANT:
                continue
            outputs = _outputs(editor, gid)
            if not outputs:
                continue
            key = None
            if gtype.category in REWRITABLE and len(outputs) == 1:
                f = _edited_functions(editor, gid)[outputs[0][0]]
                if not f.is_const:
                    sig = _signature(f)
                    if sig is not None:
                        key = ('f',) + sig
            if key is None:
                key = ('s', gtype.name, tuple(sorted(spec.config.items())),
                       tuple(sorted((p, n) for p, n in spec.pins.items()
                                    if gtype.pin(p).direction != OUT)),
                       tuple(p for p, _ in outputs))
            buckets.setdefault(key, []).append(gid)

        for key, members in buckets.items():
            if len(members) < 2:
                continue
            # a gate driving a global output survives
            globals_ = [g for g in members if any(_is_global_out(editor, n) for _, n in _outputs(editor, g))]
            keep = globals_[0] if globals_ else members[0]
            for gid in members:
                if gid == keep or gid in globals_:
                    continue
                # same type, or single output: outputs line up by position
                kept = _outputs(editor, keep)
                dropped = _outputs(editor, gid)
                if len(kept) != len(dropped):
                    continue
                editor.remove_gate(gid)
                for (_, k), (_, out) in zip(kept, dropped):
                    editor.merge_nets(k, out)
                report.duplicates_removed += 1
                changed = True

    return _finish(editor, report, 'dedup'), report


# Replace every LUT by a primitive subcircuit
def decompose_luts(netlist: Netlist, decomposer: Decomposer | None = None) -> tuple[Netlist, PreprocessReport]:
    """
    Decompose LUTs into primitive gates.

    LUTs are processed in ascending output net id order. Each replacement is
    checked against the LUT function before commit; a failing cone keeps
    its LUT and the incident is logged.

    @rtype:   (Netlist, PreprocessReport)
    @returns: The decomposed netlist and its report
    """
    decomposer = decomposer or Decomposer()
    checker = EquivalenceChecker()
    editor, report = _start(netlist)

    luts = [g for g in netlist.gates if g.category == LUT]
    luts.sort(key=lambda g: g.pins.get('O', -1))
    for lut in luts:
        out = lut.pins.get('O')
        if out is None:
            continue
        f = _edited_functions(editor, lut.id)['O']
        variables = sorted(f.support)
        table = truth_tables([f], variables)[0]
        plan = decomposer.plan(variables, table)

        result = checker.check(plan_function(plan), f)
        if not result:
            log.warning("decompose.aborted gate=%s status=%s", lut.name, result.status)
            continue

        editor.remove_gate(lut.id)
        report.luts_replaced += 1
        before = editor.added
        _emit(editor, plan, out, lut.name)
        report.primitives_emitted += editor.added - before
        report.muxes_extracted += mux_count(plan)

    return _finish(editor, report, 'decompose'), report


# Emit the gates of a plan, the root drives `out`
def _emit(editor: NetlistEditor, plan: tuple, out: int, base: str):
    made: dict[tuple, int] = {}
    count = [0]

    def name() -> str:
        count[0] += 1
        return f"{base}$d{count[0]}"

    def emit(node: tuple, target: int | None) -> int:
        kind = node[0]
        if kind == 'const':
            return editor.const_net(node[1])
        if kind == 'var':
            return node[1]
        if target is None and node in made:
            return made[node]
        if kind == 'mux':
            a = emit(node[2], None)
            b = emit(node[3], None)
            pins = {'S': node[1], 'A': b, 'B': a}
        elif kind == 'not':
            pins = {'A': emit(node[1], None)}
        else:
            pins = {'A': emit(node[1], None), 'B': emit(node[2], None)}
        pins['Y'] = target if target is not None else editor.add_net()
        editor.add_gate(PRIMITIVE_OF[kind], pins, name=name())
        made[node] = pins['Y']
        return pins['Y']

    if plan[0] in ('const', 'var'):
        source = emit(plan, None)
        if not _redirect(editor, source, out):
            if plan[0] == 'const':
                editor.add_gate('CONST1' if plan[1] else 'CONST0', {'Y': out}, name=name())
            else:
                editor.add_gate('BUF', {'A': source, 'Y': out}, name=name())
    else:
        emit(plan, out)


# Run the passes in the fixed order
def preprocess(netlist: Netlist, passes: tuple[str, ...] = PASS_ORDER) -> tuple[Netlist, PreprocessReport]:
    """
    Run the normalization passes.

    @type  netlist: Netlist
    @param netlist: The netlist to normalize

    @type  passes: tuple( str )
    @param passes: Pass names, default constants, buffers, dedup,
                   decompose, buffers, dedup

    @rtype:   (Netlist, PreprocessReport)
    @returns: The normalized netlist and the combined report
    """
    runners = {
        'constants' : propagate_constants,
        'buffers'   : remove_buffers,
        'dedup'     : deduplicate_gates,
        'decompose' : decompose_luts,
    }
    total = PreprocessReport(gates_before=len(netlist.gates), gates_after=len(netlist.gates))
    for name in passes:
        netlist, report = runners[name](netlist)
        total.extend(report, name)
    return netlist, total
