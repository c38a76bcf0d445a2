#!target/env/bin/python3

"""
    Group the registers (or MUX gates) of a netlist into words by iterated
    partition refinement, and score the grouping when labels are given.
"""


import sys

from dataclasses       import dataclass
from analysis.grouping import LOOSE, STRICT, group
from analysis.metrics  import nmi, purity, size_histogram
from netlist.json_io   import write_netlist_file
from netlist.labels    import read_labels
from util.cli          import load_netlist, make_parser, run_tool, setup_logging, write_json
from util.pipeline     import load_known_groups


def main():
    parser = make_parser(
        prog="netlist_group",
        description="Group registers or MUX gates into words.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to group, module groups it carries are context")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="File where to write the groups")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('-t', '--target',
        dest='target',
        default='ff',
        help="'ff', 'mux' or a gate type name")

    parser.add_argument('--known',
        dest='known',
        help="YAML file of known module groups")

    parser.add_argument('--signature',
        dest='signature',
        default=STRICT,
        choices=(STRICT, LOOSE),
        help="Control nets compared between candidate members")

    parser.add_argument('--rounds',
        dest='rounds',
        type=int,
        default=50,
        help="Most refinement rounds")

    parser.add_argument('--labels',
        dest='labels',
        help="Ground-truth labels scored against the grouping")

    parser.add_argument('--netlist-out',
        dest='netlist_out',
        help="File where to write the netlist with the groups")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.input,
        args.output,
        args.library,
        args.target,
        args.known,
        args.signature,
        args.rounds,
        args.labels,
        args.netlist_out)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    input       : str
    output      : str
    library     : str | None = None
    target      : str = 'ff'
    known       : str | None = None
    signature   : str = STRICT
    rounds      : int = 50
    labels      : str | None = None
    netlist_out : str | None = None

    # Group and score
    def run(self):
        netlist = load_netlist(self.input, self.library)
        known = list(netlist.modules)
        if self.known:
            known += load_known_groups(self.known, netlist)
        if self.target != 'ff':
            registers = group(netlist, 'ff', known, self.signature, self.rounds)
            known += registers.word_groups()
        grouping = group(netlist, self.target, known, self.signature, self.rounds)

        doc = grouping.to_dict(netlist)
        doc['histogram'] = size_histogram([len(m.gates) for m in grouping.groups])
        if self.labels:
            truth = read_labels(self.labels)
            found = grouping.named_labels(netlist)
            doc['nmi'] = nmi(found, truth)
            doc['purity'] = purity(found, truth)
        write_json(self.output, doc)
        if self.netlist_out:
            modules = {m.name: m for m in list(netlist.modules) + grouping.groups}
            write_netlist_file(self.netlist_out, netlist.with_modules(modules.values()))

        line = f"{len(grouping.groups)} groups in {grouping.rounds} rounds"
        if self.labels:
            line += f", nmi {doc['nmi']:.3f}, purity {doc['purity']:.3f}"
        print(line)


if __name__ == '__main__':
    main()
