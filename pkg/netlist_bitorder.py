#!target/env/bin/python3

"""
    Order the bits of register and MUX words by propagating the known
    orders of BRAM and DSP ports and of arithmetic operands.
"""


import sys

from dataclasses       import dataclass
from analysis.bitorder import INITIAL, module_orders, port_orders, propagate, score_against_truth
from analysis.control  import classify_control
from analysis.grouping import group
from netlist.labels    import read_ground_truth
from util.cli          import load_netlist, make_parser, run_tool, setup_logging, write_json
from util.pipeline     import load_order_seeds


def main():
    parser = make_parser(
        prog="netlist_bitorder",
        description="Propagate bit orders to register and MUX words.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist, with its arithmetic and register groups when known")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the orders")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('--rounds',
        dest='rounds',
        type=int,
        default=20,
        help="Most propagation rounds")

    parser.add_argument('--seeds',
        dest='seeds',
        help="YAML file of known orders, group name to gate name to index")

    parser.add_argument('--truth',
        dest='truth',
        help="Ground truth scored against the orders")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.output,
        args.library,
        args.rounds,
        args.seeds,
        args.truth)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input   : str
    output  : str
    library : str | None = None
    rounds  : int = 20
    seeds   : str | None = None
    truth   : str | None = None

    # Order the words
    def run(self):
        netlist = load_netlist(self.input, self.library)
        modules = list(netlist.modules)
        units = [m for m in modules if m.kind in ('register', 'word-mux') and len(m.gates) > 1]
        if not any(m.kind == 'register' for m in units):
            # no register groups recorded, group them here
            context = [m for m in modules if m.kind != 'register']
            units += group(netlist, 'ff', context).word_groups()
            units += group(netlist, 'mux', context).word_groups()
        ordered = port_orders(netlist) + module_orders(netlist, modules)
        control = classify_control(netlist, modules)
        seeds = load_order_seeds(self.seeds, netlist) if self.seeds else None
        result = propagate(netlist, units, ordered, control.nets, self.rounds, seeds)

        doc = {
            'rounds'      : result.rounds,
            'units'       : len(units),
            'unordered'   : result.unordered,
            'orders'      : result.orders(netlist),
            'assignments' : [a.to_dict(netlist) for _, a in sorted(result.assignments.items())],
        }
        line = f"{len(result.assignments)} of {len(units)} words ordered in {result.rounds} rounds"
        if self.truth:
            truth = read_ground_truth(self.truth)
            initial = {name: {netlist.gates[g].name: i for g, i in a.indices.items()}
                       for name, a in result.assignments.items() if a.source == INITIAL or a.round <= 1}
            doc['initial_ordered'], _ = score_against_truth(initial, truth.bit_orders)
            doc['final_ordered'], doc['correct'] = score_against_truth(doc['orders'], truth.bit_orders)
            line += f", ordered {doc['final_ordered']:.2f}, correct {doc['correct']:.2f}"
        write_json(self.output, doc)
        print(line)


if __name__ == '__main__':
    main()
