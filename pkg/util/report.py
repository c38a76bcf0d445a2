"""
    Versioned JSON reports and the evaluation row computed from a report
    and a ground-truth bundle.

    report:  {"schema_version": 1, "version": "...", "config": {...},
              "preprocess": {...}, "arithmetic": {...}, "grouping": {...},
              "mux_grouping": {...}, "bitorder": {...}, "simulation": {...},
              "trace": {...}}

    Sections of passes that did not run are absent.
"""

import json
import logging

from analysis.bitorder import score_against_truth
from analysis.metrics  import nmi, purity
from analysis.models   import MODEL_PRIORITY, UNKNOWN
from netlist.errors    import NetlistError, ParseError
from netlist.labels    import GroundTruth


log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
VERSION = '0.3.0'

# value of a column without ground truth
NA = 'N/A'

COLUMNS = ('design', 'chains', *MODEL_PRIORITY, UNKNOWN, 'classified', 'nmi', 'purity', 'groups',
           'initial_ordered', 'final_ordered', 'correct')


def make_report(config: dict, sections: dict) -> dict:
    report = {'schema_version': SCHEMA_VERSION, 'version': VERSION, 'config': config}
    report.update(sections)
    return report


def write_report(path: str, report: dict):
    with open(path, 'w') as file:
        json.dump(report, file, indent=1, sort_keys=True)
        file.write('\n')


def read_report(path: str) -> dict:
    with open(path, 'r') as file:
        try:
            report = json.load(file)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(report, dict) or 'schema_version' not in report:
        raise ParseError(f"{path}: not a report")
    if report['schema_version'] != SCHEMA_VERSION:
        raise ParseError(f"{path}: schema version {report['schema_version']}, expected {SCHEMA_VERSION}")
    return report


# Table row of a design
def evaluate(report: dict, truth: GroundTruth | None, design: str = '') -> dict:
    """
    Compute the evaluation row of a run.

    Columns whose ground truth is missing are N/A. Gates named by the
    ground truth but absent from the report are listed, not fatal.

    @type  report: dict
    @param report: A pipeline report

    @type  truth: GroundTruth | None
    @param truth: Labels, bit orders and intended arithmetic

    @rtype:   dict
    @returns: The row, with a 'missing' list of unmatched gate names
    """
    row = {c: NA for c in COLUMNS}
    row['design'] = design or report.get('config', {}).get('input', '')
    row['missing'] = []

    arith = report.get('arithmetic')
    if arith is not None:
        summary = arith['summary']
        row['chains'] = summary['chains_total']
        for model in MODEL_PRIORITY + (UNKNOWN,):
            row[model] = summary['counts'].get(model, 0)
        row['classified'] = summary['classified_fraction']

    grouping = report.get('grouping')
    if grouping is not None:
        row['groups'] = grouping['groups']
        labels = truth.labels if truth is not None else {}
        if labels:
            found = grouping['labels']
            row['missing'] = sorted(set(labels) - set(found))
            if row['missing']:
                log.warning("eval.missing count=%d gates=%s", len(row['missing']),
                            ','.join(row['missing'][:8]))
            try:
                row['nmi'] = nmi(found, labels)
                row['purity'] = purity(found, labels)
            except NetlistError as e:
                log.warning("eval.no_overlap reason=%r", str(e))

    bitorder = report.get('bitorder')
    if bitorder is not None and truth is not None and truth.bit_orders:
        initial, _ = score_against_truth(bitorder['initial_orders'], truth.bit_orders)
        final, correct = score_against_truth(bitorder['orders'], truth.bit_orders)
        row['initial_ordered'] = initial
        row['final_ordered'] = final
        row['correct'] = correct
    return row


# Fixed-width text table of evaluation rows
def format_rows(rows: list[dict]) -> str:
    def cell(v) -> str:
        if isinstance(v, float):
            return f"{v:.2f}"
        return str(v)

    table = [list(COLUMNS)] + [[cell(r.get(c, NA)) for c in COLUMNS] for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(COLUMNS))]
    return '\n'.join('  '.join(v.ljust(w) for v, w in zip(line, widths)).rstrip() for line in table) + '\n'
