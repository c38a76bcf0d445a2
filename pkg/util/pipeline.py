"""
    End-to-end pipeline: preprocess, arithmetic identification, grouping,
    bit-order propagation, simulation and guided symbolic execution, run
    in this order over one netlist.

    Artifacts written to the output directory:
        preprocessed.json  netlist after preprocessing
        arith.json         netlist with the arithmetic module groups
        grouped.json       netlist with every module group
        waveform.vcd       recorded simulation
        trace.json         equations and intermediate variables
        equations.txt      exported equation script
        report.json        the report
"""

import logging
import os

from dataclasses import dataclass, field, asdict

from analysis.arith      import ArithmeticStructure, arithmetic_modules, classify_arithmetic
from analysis.bitorder   import BitOrderResult, INITIAL, module_orders, port_orders, propagate
from analysis.control    import ControlSet, classify_control
from analysis.grouping   import Grouping, STRICT, LOOSE, group
from analysis.metrics    import size_histogram
from analysis.preprocess import preprocess
from netlist.errors      import ConfigError, NetlistError, ParseError, PassError
from netlist.ir          import MODULE_KINDS, ModuleGroup, Netlist
from netlist.json_io     import write_netlist_file
from netlist.labels      import GroundTruth, read_ground_truth
from sim.simulator       import simulate
from sim.stimulus        import load_stimulus, random_stimulus
from sim.vcd             import read_vcd_file, write_vcd_file
from sim.waveform        import Waveform
from symbolic.export     import export_equations, port_words, register_words
from symbolic.loops      import break_loops
from symbolic.trace      import Endpoints, trace_targets
from util.cli            import load_netlist, load_yaml, write_json, write_text
from util.report         import evaluate, make_report, write_report


log = logging.getLogger(__name__)

PASSES = ('preprocess', 'arith', 'group', 'bitorder', 'simulate', 'trace')

# a pass needs the result of another one
REQUIRES = {'bitorder': 'group'}


# Configuration of a pipeline run
@dataclass
class PipelineConfig:
    input              : str
    output             : str = 'out'
    library            : str | None = None
    passes             : tuple[str, ...] = PASSES
    labels             : str | None = None
    known_groups       : str | None = None
    arith_layers       : int = 2
    arith_max_controls : int = 6
    arith_max_width    : int = 33
    arith_max_variants : int = 256
    group_rounds       : int = 50
    group_signature    : str = STRICT
    bitorder_rounds    : int = 20
    bitorder_seeds     : str | None = None
    stimulus           : str | None = None
    waveform           : str | None = None
    sim_cycles         : int = 100
    reset              : list[str] = field(default_factory=list)
    trace_targets      : list[str] | None = None
    trace_unroll       : int = 1
    control_nets       : list[str] = field(default_factory=list)
    marked_registers   : list[str] = field(default_factory=list)
    symbolize_bram     : bool = False
    seed               : int = 0
    jobs               : int = 1

    # Check the pass list and the options
    def validate(self):
        """
        @raise ConfigError: unknown or repeated pass, passes out of order,
                            missing prerequisite or out-of-range option
        """
        passes = list(self.passes)
        unknown = [p for p in passes if p not in PASSES]
        if unknown:
            raise ConfigError(f"unknown passes {', '.join(unknown)}, expected {', '.join(PASSES)}")
        if len(set(passes)) != len(passes):
            raise ConfigError("a pass is listed twice")
        positions = [PASSES.index(p) for p in passes]
        for (a, pa), (b, pb) in zip(zip(passes, positions), zip(passes[1:], positions[1:])):
            if pb < pa:
                raise ConfigError(f"pass {b} must run before {a}")
        for p, needed in REQUIRES.items():
            if p in passes and needed not in passes:
                raise ConfigError(f"pass {p} needs {needed}")
        if 'trace' in passes and 'simulate' not in passes and self.waveform is None:
            raise ConfigError("pass trace needs simulate or a recorded waveform")
        if self.group_signature not in (STRICT, LOOSE):
            raise ConfigError(f"unknown group signature {self.group_signature}")
        for key in ('arith_layers', 'arith_max_controls', 'arith_max_width', 'arith_max_variants',
                    'group_rounds', 'bitorder_rounds', 'sim_cycles', 'trace_unroll', 'jobs'):
            if getattr(self, key) < (0 if key in ('arith_layers', 'arith_max_controls') else 1):
                raise ConfigError(f"{key} out of range: {getattr(self, key)}")

    def echo(self) -> dict:
        doc = asdict(self)
        doc['passes'] = list(self.passes)
        return doc


# Results handed from pass to pass
@dataclass
class _State:
    netlist    : Netlist
    truth      : GroundTruth | None = None
    known      : list[ModuleGroup] = field(default_factory=list)
    structures : list[ArithmeticStructure] = field(default_factory=list)
    modules    : list[ModuleGroup] = field(default_factory=list)
    grouping   : Grouping | None = None
    muxes      : Grouping | None = None
    orders     : BitOrderResult | None = None
    waveform   : Waveform | None = None
    control    : ControlSet | None = None


# Known groups from YAML: {groups: [{name, kind, gates, pin_groups}]}
def load_known_groups(path: str, netlist: Netlist) -> list[ModuleGroup]:
    doc = load_yaml(path)
    out = []
    for i, entry in enumerate(doc.get('groups') or []):
        where = f"{path}: groups[{i}]"
        if not isinstance(entry, dict) or 'name' not in entry or 'gates' not in entry:
            raise ParseError(f"{where}: a group needs a name and gates")
        kind = entry.get('kind', 'register')
        if kind not in MODULE_KINDS:
            raise ParseError(f"{where}: unknown kind {kind}")
        gates = []
        for name in entry['gates']:
            gate = netlist.gate_by_name(str(name))
            if gate is None:
                raise ParseError(f"{where}: unknown gate {name}")
            gates.append(gate.id)
        pin_groups = {}
        for pg, refs in (entry.get('pin_groups') or {}).items():
            pins = []
            for ref in refs:
                gate = netlist.gate_by_name(str(ref[0]))
                if gate is None:
                    raise ParseError(f"{where}: unknown gate {ref[0]}")
                pins.append((gate.id, str(ref[1]), None if ref[2] is None else int(ref[2])))
            pin_groups[pg] = pins
        out.append(ModuleGroup(str(entry['name']), kind, frozenset(gates), pin_groups, locked=True,
                               provenance=['known']))
    return out


# Bit-order seeds from YAML: {group name: {gate name: index}}
def load_order_seeds(path: str, netlist: Netlist) -> dict[str, dict[int, int]]:
    seeds = {}
    for group_name, indices in load_yaml(path).items():
        seeds[str(group_name)] = {}
        for name, i in (indices or {}).items():
            gate = netlist.gate_by_name(str(name))
            if gate is None:
                raise ParseError(f"{path}: unknown gate {name}")
            seeds[str(group_name)][gate.id] = int(i)
    return seeds


# Module group carried over to a rewritten netlist by gate name
def _remap(module: ModuleGroup, old: Netlist, new: Netlist) -> ModuleGroup:
    ids = {}
    for g in module.gates:
        gate = new.gate_by_name(old.gates[g].name)
        if gate is not None:
            ids[g] = gate.id
    pin_groups = {pg: [(ids[g], pin, i) for g, pin, i in pins if g in ids]
                  for pg, pins in module.pin_groups.items()}
    return ModuleGroup(module.name, module.kind, frozenset(ids.values()), pin_groups,
                       module.locked, module.provenance)


# Passes

def _preprocess(config: PipelineConfig, state: _State) -> dict:
    before = state.netlist
    state.netlist, report = preprocess(before)
    state.known = [_remap(m, before, state.netlist) for m in state.known]
    write_netlist_file(os.path.join(config.output, 'preprocessed.json'), state.netlist)
    return {'preprocess': report.to_dict()}


def _arith(config: PipelineConfig, state: _State) -> dict:
    netlist = state.netlist
    structures, summary = classify_arithmetic(
        netlist, layers=config.arith_layers, max_controls=config.arith_max_controls,
        max_width=config.arith_max_width, max_variants=config.arith_max_variants, jobs=config.jobs)
    state.structures = structures
    state.modules = arithmetic_modules(netlist, structures)
    write_netlist_file(os.path.join(config.output, 'arith.json'), netlist.with_modules(state.modules))
    return {'arithmetic': {'summary': summary.to_dict(),
                           'structures': [s.to_dict(netlist) for s in structures]}}


def _group(config: PipelineConfig, state: _State) -> dict:
    netlist = state.netlist
    known = state.known + state.modules
    state.grouping = group(netlist, 'ff', known, config.group_signature, config.group_rounds)
    # MUX words are traced between register words
    context = known + state.grouping.word_groups()
    state.muxes = group(netlist, 'mux', context, config.group_signature, config.group_rounds)
    registers = state.grouping.groups
    muxes = state.muxes.word_groups()
    modules = {m.name: m for m in state.modules + registers + muxes}
    write_netlist_file(os.path.join(config.output, 'grouped.json'), netlist.with_modules(modules.values()))
    return {
        'grouping': {
            'groups'    : len(registers),
            'words'     : len(state.grouping.word_groups()),
            'rounds'    : state.grouping.rounds,
            'labels'    : state.grouping.named_labels(netlist),
            'histogram' : size_histogram([len(m.gates) for m in registers]),
        },
        'mux_grouping': {
            'groups'    : len(muxes),
            'rounds'    : state.muxes.rounds,
            'histogram' : size_histogram([len(m.gates) for m in muxes]),
        },
    }


def _bitorder(config: PipelineConfig, state: _State) -> dict:
    netlist = state.netlist
    seeds = load_order_seeds(config.bitorder_seeds, netlist) if config.bitorder_seeds else None
    units = state.grouping.word_groups() + state.muxes.word_groups() + [
        m for m in state.known if m.kind in ('register', 'word-mux')]
    ordered = port_orders(netlist) + module_orders(netlist, state.modules + state.known)
    control = classify_control(netlist, state.known)
    result = propagate(netlist, units, ordered, control.nets, config.bitorder_rounds, seeds)
    state.orders = result
    initial = {name: {netlist.gates[g].name: i for g, i in a.indices.items()}
               for name, a in result.assignments.items() if a.source == INITIAL or a.round <= 1}
    return {'bitorder': {
        'rounds'         : result.rounds,
        'units'          : len(units),
        'ordered'        : len(result.assignments),
        'unordered'      : result.unordered,
        'orders'         : result.orders(netlist),
        'initial_orders' : initial,
        'assignments'    : [a.to_dict(netlist) for _, a in sorted(result.assignments.items())],
    }}


def _simulate(config: PipelineConfig, state: _State) -> dict:
    netlist = state.netlist
    if config.stimulus:
        stimulus = load_stimulus(config.stimulus, netlist)
        cycles = stimulus.cycles or config.sim_cycles
    else:
        for name in config.reset:
            if netlist.net_by_name(name) is None:
                raise ConfigError(f"reset input {name} is not a net of the netlist")
        stimulus = random_stimulus(netlist, config.sim_cycles, config.seed,
                                   reset={name: 1 for name in config.reset})
        cycles = config.sim_cycles
    state.waveform = simulate(netlist, stimulus, cycles)
    write_vcd_file(os.path.join(config.output, 'waveform.vcd'), state.waveform)
    return {'simulation': {'cycles': cycles, 'nets': len(state.waveform.names),
                           'clock': state.waveform.clock, 'waveform': 'waveform.vcd'}}


def _trace(config: PipelineConfig, state: _State) -> dict:
    netlist = state.netlist
    if state.waveform is None:
        state.waveform = read_vcd_file(config.waveform)
    state.control = classify_control(netlist, state.known, config.control_nets)
    marked = []
    for name in config.marked_registers:
        gate = netlist.gate_by_name(name)
        if gate is None:
            raise ConfigError(f"marked register {name} is not a gate of the netlist")
        marked.append(gate.id)
    cuts = break_loops(netlist)
    endpoints = Endpoints(frozenset(marked), cuts)
    result = trace_targets(netlist, state.waveform, state.control, config.trace_targets, endpoints,
                           state.structures, config.symbolize_bram, config.trace_unroll)
    write_json(os.path.join(config.output, 'trace.json'), result.to_dict(netlist))

    words = port_words(netlist)
    if state.grouping is not None:
        words.update(register_words(netlist, state.grouping.word_groups(), state.orders))
    script = export_equations(netlist, result, words, os.path.basename(config.input))
    write_text(os.path.join(config.output, 'equations.txt'), script)
    return {'trace': {
        'equations'      : len(result.equations),
        'definitions'    : len(result.definitions),
        'loop_cuts'      : sorted(netlist.gates[g].name for g in cuts),
        'initial_states' : result.initial_states,
        'control'        : state.control.to_dict(netlist),
        'script'         : 'equations.txt',
    }}


_RUNNERS = {
    'preprocess' : _preprocess,
    'arith'      : _arith,
    'group'      : _group,
    'bitorder'   : _bitorder,
    'simulate'   : _simulate,
    'trace'      : _trace,
}


# Run the configured passes
def run_pipeline(config: PipelineConfig) -> dict:
    """
    Run the pipeline and write its artifacts.

    @type  config: PipelineConfig
    @param config: The run configuration

    @rtype:   dict
    @returns: The report, also written to report.json

    @raise ConfigError: invalid configuration
    @raise PassError: a pass failed, carries the pass name
    """
    config.validate()
    os.makedirs(config.output, exist_ok=True)
    try:
        state = _State(load_netlist(config.input, config.library))
        if config.labels:
            state.truth = read_ground_truth(config.labels)
        state.known = list(state.netlist.modules)
        if config.known_groups:
            state.known += load_known_groups(config.known_groups, state.netlist)
    except NetlistError as e:
        raise PassError('load', str(e)) from e

    sections = {}
    for name in config.passes:
        log.info("pipeline.pass name=%s", name)
        try:
            sections.update(_RUNNERS[name](config, state))
        except PassError:
            raise
        except NetlistError as e:
            raise PassError(name, str(e)) from e

    report = make_report(config.echo(), sections)
    if state.truth is not None:
        report['evaluation'] = evaluate(report, state.truth, os.path.basename(config.input))
    write_report(os.path.join(config.output, 'report.json'), report)
    log.info("pipeline.done passes=%s", ','.join(config.passes))
    return report
