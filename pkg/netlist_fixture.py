#!target/env/bin/python3

"""
    Generate a synthetic netlist with its ground truth and the results the
    analyses are expected to reach on it.
"""


import os
import sys

from dataclasses        import dataclass
from fixtures.builder   import ARCHITECTURES
from fixtures.generator import KINDS, FixtureSpec, generate
from netlist.json_io    import write_netlist_file
from netlist.labels     import write_ground_truth
from util.cli           import make_parser, run_tool, setup_logging, write_json


def main():
    parser = make_parser(
        prog="netlist_fixture",
        description="Generate a synthetic netlist with ground truth.")

    parser.add_argument('-k', '--kind',
        dest='kind',
        required=True,
        choices=KINDS,
        help="Fixture kind")

    parser.add_argument('-w', '--width',
        dest='width',
        type=int,
        default=8,
        help="Word width")

    parser.add_argument('-a', '--arch',
        dest='arch',
        default=ARCHITECTURES[0],
        choices=ARCHITECTURES,
        help="Target architecture")

    parser.add_argument('--seed',
        dest='seed',
        type=int,
        default=0,
        help="Seed of the id permutation")

    parser.add_argument('--signed',
        dest='signed',
        default=False,
        action='store_true',
        help="Signed comparison for the comparator")

    parser.add_argument('--stages',
        dest='stages',
        type=int,
        default=4,
        help="Stages of a register pipeline")

    parser.add_argument('-o', '--output',
        dest='output',
        required=True,
        help="Folder where to write netlist.json, truth.json and expected.json")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        FixtureSpec(args.kind, args.width, args.arch, args.seed, args.signed, args.stages),
        args.output)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    spec   : FixtureSpec
    output : str

    # Generate and write the fixture
    def run(self):
        fixture = generate(self.spec)
        os.makedirs(self.output, exist_ok=True)
        write_netlist_file(os.path.join(self.output, 'netlist.json'), fixture.netlist)
        write_ground_truth(os.path.join(self.output, 'truth.json'), fixture.truth)
        write_json(os.path.join(self.output, 'expected.json'), fixture.expected)
        print(f"{self.spec.kind} {self.spec.architecture} width {self.spec.width}: "
              f"{len(fixture.netlist.gates)} gates")


if __name__ == '__main__':
    main()
