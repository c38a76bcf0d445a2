#!target/env/bin/python3

"""
    Guided symbolic execution: trace target nets at given cycles back to
    global inputs, stores and loop-cut registers, steering every control
    net by its recorded value, and export the equations as a script.
"""


import os
import sys

from dataclasses       import dataclass, field
from analysis.arith    import classify_arithmetic
from analysis.control  import classify_control
from netlist.errors    import ConfigError
from sim.vcd           import read_vcd_file
from symbolic.export   import export_equations, port_words
from symbolic.loops    import break_loops
from symbolic.trace    import Endpoints, trace_targets
from util.cli          import load_netlist, make_parser, run_tool, setup_logging, write_json, write_text


def main():
    parser = make_parser(
        prog="netlist_trace",
        description="Trace nets symbolically along a recorded waveform.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to trace, preprocessed")

    parser.add_argument('-w', '--waveform',
        dest='waveform',
        required=True,
        help="VCD waveform recorded on the same netlist")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the equations and definitions as JSON")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('-t', '--target',
        dest='targets',
        nargs='*',
        help="Targets as net@cycle, every global output at the last sample when absent")

    parser.add_argument('--control',
        dest='control',
        nargs='*',
        default=[],
        help="Nets declared control")

    parser.add_argument('--marked',
        dest='marked',
        nargs='*',
        default=[],
        help="Registers where traces stop")

    parser.add_argument('--unroll',
        dest='unroll',
        type=int,
        default=1,
        help="Loop iterations expanded before a loop-cut register becomes a variable")

    parser.add_argument('--symbolize-bram',
        dest='symbolize_bram',
        default=False,
        action='store_true',
        help="Read memories as symbols instead of recorded words")

    parser.add_argument('--arith',
        dest='arith',
        default=False,
        action='store_true',
        help="Fold identified arithmetic structures into word operations")

    parser.add_argument('--script',
        dest='script',
        help="File where to write the equation script")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.waveform,
        args.output,
        args.library,
        args.targets,
        args.control,
        args.marked,
        args.unroll,
        args.symbolize_bram,
        args.arith,
        args.script)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input          : str
    waveform       : str
    output         : str
    library        : str | None = None
    targets        : list[str] | None = None
    control        : list[str] = field(default_factory=list)
    marked         : list[str] = field(default_factory=list)
    unroll         : int = 1
    symbolize_bram : bool = False
    arith          : bool = False
    script         : str | None = None

    # Trace and export
    def run(self):
        if self.unroll < 1:
            raise ConfigError(f"unroll out of range: {self.unroll}")
        netlist = load_netlist(self.input, self.library)
        waveform = read_vcd_file(self.waveform)
        control = classify_control(netlist, netlist.modules, self.control)

        marked = []
        for name in self.marked:
            gate = netlist.gate_by_name(name)
            if gate is None:
                raise ConfigError(f"marked register {name} is not a gate of the netlist")
            marked.append(gate.id)
        endpoints = Endpoints(frozenset(marked), break_loops(netlist))
        structures = classify_arithmetic(netlist)[0] if self.arith else []

        result = trace_targets(netlist, waveform, control, self.targets, endpoints,
                               structures, self.symbolize_bram, self.unroll)
        write_json(self.output, result.to_dict(netlist))
        if self.script:
            write_text(self.script, export_equations(netlist, result, port_words(netlist), os.path.basename(self.input)))
        print(f"{len(result.equations)} equations, {len(result.definitions)} definitions")


if __name__ == '__main__':
    main()
