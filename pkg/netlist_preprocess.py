#!target/env/bin/python3

"""
    Normalize a netlist: constant propagation, buffer removal, duplicate
    removal and LUT decomposition into primitive gates.
"""


import sys

from dataclasses         import dataclass
from analysis.preprocess import PASS_ORDER, preprocess
from netlist.errors      import ConfigError
from netlist.json_io     import write_netlist_file
from util.cli            import load_netlist, make_parser, run_tool, setup_logging, write_json


def main():
    parser = make_parser(
        prog="netlist_preprocess",
        description="Normalize a netlist before the analyses.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to normalize")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the normalized netlist")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('--passes',
        dest='passes',
        nargs='+',
        default=list(PASS_ORDER),
        help="Passes to run, in order")

    parser.add_argument('--report',
        dest='report',
        help="File where to write the counts of every pass")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.output,
        args.library,
        tuple(args.passes),
        args.report)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input   : str
    output  : str
    library : str | None = None
    passes  : tuple[str, ...] = PASS_ORDER
    report  : str | None = None

    # Run the passes
    def run(self):
        unknown = set(self.passes) - set(PASS_ORDER)
        if unknown:
            raise ConfigError(f"unknown passes {', '.join(sorted(unknown))}")
        netlist = load_netlist(self.input, self.library)
        netlist, report = preprocess(netlist, self.passes)
        write_netlist_file(self.output, netlist)
        if self.report:
            write_json(self.report, report.to_dict())
        print(f"gates {report.gates_before} -> {report.gates_after}, "
              f"luts replaced {report.luts_replaced}, muxes {report.muxes_extracted}")


if __name__ == '__main__':
    main()
