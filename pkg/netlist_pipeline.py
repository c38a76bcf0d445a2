#!target/env/bin/python3

"""
    Run the whole analysis over one netlist: preprocessing, arithmetic
    identification, grouping, bit-order propagation, simulation and guided
    symbolic execution, then write the report.
"""


import sys

from dataclasses       import dataclass
from analysis.grouping import LOOSE, STRICT
from util.cli          import make_parser, run_tool, setup_logging
from util.pipeline     import PASSES, PipelineConfig, run_pipeline
from util.report       import format_rows


def main():
    parser = make_parser(
        prog="netlist_pipeline",
        description="Run every analysis over a netlist.")

    parser.add_argument('-i', '--input',
        dest='input',
        required=True,
        help="Netlist to analyse")

    parser.add_argument('-o', '--output',
        dest='output',
        default='out',
        help="Folder where to write the artifacts and report.json")

    parser.add_argument('--lib', '--library',
        dest='library',
        help="Gate library, required for Verilog")

    parser.add_argument('-p', '--passes',
        dest='passes',
        nargs='+',
        default=list(PASSES),
        help="Passes to run, in the order " + ', '.join(PASSES))

    parser.add_argument('--labels',
        dest='labels',
        help="Ground truth, adds the evaluation row to the report")

    parser.add_argument('--known-groups',
        dest='known_groups',
        help="YAML file of known module groups")

    parser.add_argument('--arith-layers',
        dest='arith_layers',
        type=int,
        default=2,
        help="Expansion layers around a chain")

    parser.add_argument('--arith-max-controls',
        dest='arith_max_controls',
        type=int,
        default=6,
        help="Most control inputs enumerated per candidate")

    parser.add_argument('--arith-max-width',
        dest='arith_max_width',
        type=int,
        default=33,
        help="Widest operand considered")

    parser.add_argument('--arith-max-variants',
        dest='arith_max_variants',
        type=int,
        default=256,
        help="Most structural variants per chain")

    parser.add_argument('--group-rounds',
        dest='group_rounds',
        type=int,
        default=50,
        help="Most grouping rounds")

    parser.add_argument('--group-signature',
        dest='group_signature',
        default=STRICT,
        choices=(STRICT, LOOSE),
        help="Control nets compared between candidate members")

    parser.add_argument('--bitorder-rounds',
        dest='bitorder_rounds',
        type=int,
        default=20,
        help="Most propagation rounds")

    parser.add_argument('--bitorder-seeds',
        dest='bitorder_seeds',
        help="YAML file of known orders")

    parser.add_argument('--stimulus',
        dest='stimulus',
        help="YAML stimulus, random inputs when absent")

    parser.add_argument('--waveform',
        dest='waveform',
        help="Recorded VCD waveform traced when simulate does not run")

    parser.add_argument('--sim-cycles',
        dest='sim_cycles',
        type=int,
        default=100,
        help="Number of simulated clock cycles")

    parser.add_argument('--reset',
        dest='reset',
        nargs='*',
        default=[],
        help="Reset inputs of the random stimulus")

    parser.add_argument('--trace-targets',
        dest='trace_targets',
        nargs='*',
        help="Targets as net@cycle, every global output at the last sample when absent")

    parser.add_argument('--trace-unroll',
        dest='trace_unroll',
        type=int,
        default=1,
        help="Loop iterations expanded before a variable is introduced")

    parser.add_argument('--control-nets',
        dest='control_nets',
        nargs='*',
        default=[],
        help="Nets declared control")

    parser.add_argument('--marked-registers',
        dest='marked_registers',
        nargs='*',
        default=[],
        help="Registers where traces stop")

    parser.add_argument('--symbolize-bram',
        dest='symbolize_bram',
        default=False,
        action='store_true',
        help="Read memories as symbols")

    parser.add_argument('--seed',
        dest='seed',
        type=int,
        default=0,
        help="Seed of the random stimulus")

    parser.add_argument('-j', '--jobs',
        dest='jobs',
        type=int,
        default=1,
        help="Chains processed concurrently")

    args = parser.parse_args()
    setup_logging(args.log_level)
    config = Config(PipelineConfig(
        args.input,
        args.output,
        args.library,
        tuple(args.passes),
        args.labels,
        args.known_groups,
        args.arith_layers,
        args.arith_max_controls,
        args.arith_max_width,
        args.arith_max_variants,
        args.group_rounds,
        args.group_signature,
        args.bitorder_rounds,
        args.bitorder_seeds,
        args.stimulus,
        args.waveform,
        args.sim_cycles,
        args.reset,
        args.trace_targets,
        args.trace_unroll,
        args.control_nets,
        args.marked_registers,
        args.symbolize_bram,
        args.seed,
        args.jobs))
    sys.exit(run_tool(config))


# Store configuration for running this script
@dataclass
class Config:
    pipeline : PipelineConfig

    # Run the pipeline and print the evaluation row when there is one
    def run(self):
        report = run_pipeline(self.pipeline)
        if 'evaluation' in report:
            print(format_rows([report['evaluation']]), end='')
        else:
            print(f"passes {', '.join(self.pipeline.passes)} done, report in {self.pipeline.output}")


if __name__ == '__main__':
    main()
