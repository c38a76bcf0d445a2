#!target/env/bin/python3

"""
    Convert a structural Verilog or JSON netlist into the canonical JSON
    exchange format, optionally with ground-truth labels derived from the
    synthesizer register names.
"""


import sys

from dataclasses     import dataclass
from netlist.json_io import write_netlist_file
from netlist.labels  import derive_ground_truth, write_ground_truth
from util.cli        import load_netlist, make_parser, run_tool, setup_logging


def main():
    parser = make_parser(
        prog="netlist_convert",
        description="Convert a netlist to the JSON exchange format.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to read (.json or structural Verilog .v)")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the JSON netlist")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('--labels-out',
        dest='labels_out',
        help="File where to write labels derived from register names")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.output,
        args.library,
        args.labels_out)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input      : str
    output     : str
    library    : str | None = None
    labels_out : str | None = None

    # Convert the netlist
    def run(self):
        netlist = load_netlist(self.input, self.library)
        write_netlist_file(self.output, netlist)
        if self.labels_out:
            write_ground_truth(self.labels_out, derive_ground_truth(netlist))


if __name__ == '__main__':
    main()
