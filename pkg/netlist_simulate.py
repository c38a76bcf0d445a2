#!target/env/bin/python3

"""
    Simulate a netlist cycle by cycle with three-valued logic and record
    the waveform of every net as a VCD file.
"""


import sys

from dataclasses    import dataclass, field
from netlist.errors import ConfigError
from sim.simulator  import simulate
from sim.stimulus   import load_stimulus, random_stimulus
from sim.vcd        import write_vcd_file
from util.cli       import load_netlist, load_yaml, make_parser, run_tool, setup_logging


def main():
    parser = make_parser(
        prog="netlist_simulate",
        description="Simulate a netlist and record a VCD waveform.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to simulate")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the VCD waveform")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('-s', '--stimulus',
        dest='stimulus',
        help="YAML stimulus, random inputs when absent")

    parser.add_argument('--cycles',
        dest='cycles',
        type=int,
        default=100,
        help="Number of clock cycles")

    parser.add_argument('--seed',
        dest='seed',
        type=int,
        default=0,
        help="Seed of the random stimulus")

    parser.add_argument('--reset',
        dest='reset',
        nargs='*',
        default=[],
        help="Inputs held at 1 during the first two samples of a random stimulus")

    parser.add_argument('--hold',
        dest='hold',
        nargs='*',
        default=[],
        help="Inputs held at 1 during the whole random stimulus")

    parser.add_argument('--clock',
        dest='clock',
        help="Clock net, found from the flip-flops when absent")

    parser.add_argument('--initial',
        dest='initial',
        help="YAML initial state: {nets: {name: value}, memories: {gate: {addr: word}}}")

    parser.add_argument('--watch',
        dest='watch',
        nargs='*',
        help="Nets to record, all when absent")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.output,
        args.library,
        args.stimulus,
        args.cycles,
        args.seed,
        args.reset,
        args.hold,
        args.clock,
        args.initial,
        args.watch)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input    : str
    output   : str
    library  : str | None = None
    stimulus : str | None = None
    cycles   : int = 100
    seed     : int = 0
    reset    : list[str] = field(default_factory=list)
    hold     : list[str] = field(default_factory=list)
    clock    : str | None = None
    initial  : str | None = None
    watch    : list[str] | None = None

    # Simulate and record
    def run(self):
        if self.cycles < 1:
            raise ConfigError(f"cycles out of range: {self.cycles}")
        netlist = load_netlist(self.input, self.library)
        if self.stimulus:
            stimulus = load_stimulus(self.stimulus, netlist)
            cycles = stimulus.cycles or self.cycles
        else:
            for name in self.reset + self.hold:
                if netlist.net_by_name(name) is None:
                    raise ConfigError(f"input {name} is not a net of the netlist")
            exclude = [self.clock] if self.clock else []
            stimulus = random_stimulus(netlist, self.cycles, self.seed,
                                       hold={name: 1 for name in self.hold},
                                       reset={name: 1 for name in self.reset},
                                       exclude=exclude)
            cycles = self.cycles
        initial = load_yaml(self.initial) if self.initial else None
        waveform = simulate(netlist, stimulus, cycles, self.clock, initial, self.watch)
        write_vcd_file(self.output, waveform)
        print(f"{waveform.samples} samples of {len(waveform.names)} nets")


if __name__ == '__main__':
    main()
