#!target/env/bin/python3

"""
    Identify the arithmetic structures built around the carry chains of a
    netlist and check them against the model library.
"""


import os
import sys

from dataclasses         import dataclass
from analysis.arith      import arithmetic_modules, classify_arithmetic, simulate_structure
from analysis.preprocess import preprocess
from netlist.json_io     import write_netlist_file
from util.cli            import load_netlist, make_parser, run_tool, setup_logging, write_json


def main():
    parser = make_parser(
        prog="netlist_arith",
        description="Identify adders, subtractors, counters and comparators.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to analyse")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the structures and the summary")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('--preprocess',
        dest='preprocess',
        default=False,
        action='store_true',
        help="Normalize the netlist first")

    parser.add_argument('--layers',
        dest='layers',
        type=int,
        default=2,
        help="Expansion layers around a chain")

    parser.add_argument('--max-controls',
        dest='max_controls',
        type=int,
        default=6,
        help="Most control inputs enumerated per candidate")

    parser.add_argument('--max-width',
        dest='max_width',
        type=int,
        default=33,
        help="Widest operand considered")

    parser.add_argument('--max-variants',
        dest='max_variants',
        type=int,
        default=256,
        help="Most structural variants per chain")

    parser.add_argument('--check-vectors',
        dest='check_vectors',
        type=int,
        default=0,
        help="Random vectors simulated per verified structure, 0 skips the check")

    parser.add_argument('--netlist-out',
        dest='netlist_out',
        help="File where to write the netlist with the arithmetic module groups")

    parser.add_argument('-j', '--jobs',
        dest='jobs',
        type=int,
        default=1,
        help="Chains processed concurrently")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.output,
        args.library,
        args.preprocess,
        args.layers,
        args.max_controls,
        args.max_width,
        args.max_variants,
        args.check_vectors,
        args.netlist_out,
        args.jobs)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input         : str
    output        : str
    library       : str | None = None
    preprocess    : bool = False
    layers        : int = 2
    max_controls  : int = 6
    max_width     : int = 33
    max_variants  : int = 256
    check_vectors : int = 0
    netlist_out   : str | None = None
    jobs          : int = 1

    # Classify every chain
    def run(self):
        netlist = load_netlist(self.input, self.library)
        if self.preprocess:
            netlist, _ = preprocess(netlist)
        structures, summary = classify_arithmetic(
            netlist, layers=self.layers, max_controls=self.max_controls,
            max_width=self.max_width, max_variants=self.max_variants, jobs=self.jobs)

        doc = {'design': os.path.basename(self.input), 'summary': summary.to_dict(), 'structures': []}
        for s in structures:
            entry = s.to_dict(netlist)
            if self.check_vectors and s.verified:
                entry['simulation_check'] = simulate_structure(netlist, s, self.check_vectors)
            doc['structures'].append(entry)
        write_json(self.output, doc)
        if self.netlist_out:
            write_netlist_file(self.netlist_out, netlist.with_modules(arithmetic_modules(netlist, structures)))

        counts = ', '.join(f"{k} {v}" for k, v in summary.counts.items() if v)
        print(f"{summary.chains_total} chains, {summary.chains_verified} verified: {counts}")


if __name__ == '__main__':
    main()
