#!target/env/bin/python3

"""
    Compute the evaluation table of one or more pipeline reports against
    their ground truth.
"""


import os
import sys

from dataclasses    import dataclass, field
from netlist.errors import ConfigError
from netlist.labels import read_ground_truth
from util.cli       import make_parser, run_tool, setup_logging, write_json
from util.report    import evaluate, format_rows, read_report


def main():
    parser = make_parser(
        prog="netlist_eval",
        description="Evaluate pipeline reports against ground truth.")

    parser.add_argument('-r', '--report',
        dest='reports',
        nargs='+',
        required=True,
        help="Pipeline reports")

    parser.add_argument('-t', '--truth',
        dest='truths',
        nargs='*',
        default=[],
        help="Ground truth of every report, in the same order")

    parser.add_argument('-o', '--output',
        dest='output',
        help="File where to write the rows as JSON")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(
        args.reports,
        args.truths,
        args.output)
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    reports : list[str]
    truths  : list[str] = field(default_factory=list)
    output  : str | None = None

    # Evaluate every report
    def run(self):
        if self.truths and len(self.truths) != len(self.reports):
            raise ConfigError(f"{len(self.reports)} reports but {len(self.truths)} ground truths")
        rows = []
        for i, path in enumerate(self.reports):
            truth = read_ground_truth(self.truths[i]) if self.truths else None
            design = os.path.basename(os.path.dirname(os.path.abspath(path)))
            rows.append(evaluate(read_report(path), truth, design))
        if self.output:
            write_json(self.output, rows)
        print(format_rows(rows), end='')


if __name__ == '__main__':
    main()
