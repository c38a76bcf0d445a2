import json
import pytest

from dataclasses import dataclass

import netlist_eval
import netlist_fixture
import netlist_group
import netlist_simulate

from analysis.preprocess import preprocess
from fixtures.generator  import FixtureSpec, generate
from netlist.errors      import BuildError, ConfigError, ParseError, PassError, SimulationError
from netlist.json_io     import read_netlist_file, write_netlist_file
from netlist.labels      import read_ground_truth, write_ground_truth
from sim.vcd             import read_vcd_file
from util.cli            import EXIT_CONFIG, EXIT_INPUT, EXIT_OK, EXIT_PASS, exit_code, load_netlist, run_tool
from util.pipeline       import PipelineConfig, load_known_groups, run_pipeline
from util.report         import COLUMNS, NA, evaluate, format_rows, read_report


@dataclass
class Failing:
    error : Exception | None

    def run(self):
        if self.error is not None:
            raise self.error


def _cause(error: Exception, cause: Exception) -> Exception:
    error.__cause__ = cause
    return error


@pytest.mark.parametrize('error, code', [
    (ConfigError("bad option"), EXIT_CONFIG),
    (ParseError("bad file"), EXIT_INPUT),
    (BuildError("bad netlist"), EXIT_INPUT),
    (FileNotFoundError("nope.json"), EXIT_INPUT),
    (SimulationError("two clocks"), EXIT_PASS),
    (PassError('arith', "budget"), EXIT_PASS),
    (_cause(PassError('load', "bad"), ParseError("bad")), EXIT_INPUT),
])
def test_exit_codes(error, code):
    assert exit_code(error) == code


def test_run_tool_reports_one_line(capsys):
    assert run_tool(Failing(None)) == EXIT_OK
    assert run_tool(Failing(PassError('trace', "control x is X"))) == EXIT_PASS
    line = capsys.readouterr().err.strip()
    assert line.startswith("error=PassError exit=4 pass=trace message=")
    assert '\n' not in line


def test_verilog_needs_library(tmp_path):
    path = tmp_path / 'top.v'
    path.write_text("module top(); endmodule\n")
    with pytest.raises(ConfigError):
        load_netlist(str(path))
    with pytest.raises(ConfigError):
        load_netlist(str(path), 'ecp5')


def test_fixture_tool(tmp_path):
    netlist_fixture.Config(FixtureSpec('counter-with-reset', 4), str(tmp_path)).run()
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    assert read_netlist_file(str(tmp_path / 'netlist.json')) == fixture.netlist
    assert read_ground_truth(str(tmp_path / 'truth.json')) == fixture.truth
    with open(tmp_path / 'expected.json') as file:
        assert json.load(file) == fixture.expected


def test_simulate_tool(tmp_path):
    fixture = generate(FixtureSpec('counter-with-reset', 4))
    write_netlist_file(str(tmp_path / 'counter.json'), fixture.netlist)
    out = str(tmp_path / 'wave.vcd')
    netlist_simulate.Config(str(tmp_path / 'counter.json'), out, cycles=10, reset=['rst'], watch=['q[0]']).run()
    waveform = read_vcd_file(out)
    assert waveform.names == ['q[0]']
    assert waveform.samples == 11
    with pytest.raises(ConfigError):
        netlist_simulate.Config(str(tmp_path / 'counter.json'), out, reset=['nope']).run()
    with pytest.raises(ConfigError):
        netlist_simulate.Config(str(tmp_path / 'counter.json'), out, cycles=0).run()


# Write a fixture and run the pipeline on it
def _run(tmp_path, spec: FixtureSpec, **options) -> dict:
    fixture = generate(spec)
    source = tmp_path / spec.kind
    source.mkdir()
    write_netlist_file(str(source / 'netlist.json'), fixture.netlist)
    write_ground_truth(str(source / 'truth.json'), fixture.truth)
    config = PipelineConfig(str(source / 'netlist.json'), str(source / 'out'),
                            labels=str(source / 'truth.json'), **options)
    return run_pipeline(config)


def test_pipeline_counter(tmp_path):
    report = _run(tmp_path, FixtureSpec('counter-with-reset', 4, 'x7-like'), reset=['rst'], sim_cycles=20)
    out = tmp_path / 'counter-with-reset' / 'out'
    for name in ('preprocessed.json', 'arith.json', 'grouped.json', 'waveform.vcd', 'trace.json',
                 'equations.txt', 'report.json'):
        assert (out / name).exists()
    assert read_report(str(out / 'report.json')) == json.loads(json.dumps(report))

    row = report['evaluation']
    assert row['counter'] == 1
    assert row['unknown'] == 0
    assert row['groups'] == 1
    assert row['nmi'] == pytest.approx(1.0)
    assert row['final_ordered'] == pytest.approx(1.0)
    assert row['correct'] == pytest.approx(1.0)
    assert row['missing'] == []
    assert len(report['trace']['loop_cuts']) == 4


def test_pipeline_word_mux(tmp_path):
    report = _run(tmp_path, FixtureSpec('word-mux-fanout', 4), passes=('preprocess', 'arith', 'group'))
    row = report['evaluation']
    assert row['chains'] == 0
    assert row['groups'] == 4
    assert row['purity'] == pytest.approx(1.0)
    assert row['final_ordered'] == NA
    assert report['mux_grouping']['groups'] == 1
    assert 'simulation' not in report


def test_pipeline_wraps_failures(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text("{")
    with pytest.raises(PassError) as info:
        run_pipeline(PipelineConfig(str(path), str(tmp_path / 'out')))
    assert info.value.pass_name == 'load'
    assert exit_code(info.value) == EXIT_INPUT


@pytest.mark.parametrize('options', [
    {'passes': ('group', 'preprocess')},
    {'passes': ('preprocess', 'preprocess')},
    {'passes': ('fold',)},
    {'passes': ('bitorder',)},
    {'passes': ('trace',)},
    {'group_signature': 'fuzzy'},
    {'sim_cycles': 0},
    {'arith_layers': -1},
])
def test_pipeline_options(options, tmp_path):
    with pytest.raises(ConfigError):
        PipelineConfig('in.json', str(tmp_path), **options).validate()


def test_known_groups(tmp_path):
    fixture = generate(FixtureSpec('register-pipeline', 2, stages=1))
    path = tmp_path / 'known.yaml'
    path.write_text("groups:\n  - name: s0\n    gates: ['stage0_reg[0]', 'stage0_reg[1]']\n")
    (group,) = load_known_groups(str(path), fixture.netlist)
    assert group.kind == 'register' and group.locked
    assert len(group.gates) == 2
    path.write_text("groups:\n  - name: s0\n    gates: ['nope']\n")
    with pytest.raises(ParseError):
        load_known_groups(str(path), fixture.netlist)


def test_evaluation_without_truth():
    row = evaluate({'schema_version': 1, 'config': {'input': 'x.json'}}, None)
    assert row['design'] == 'x.json'
    assert all(row[c] == NA for c in COLUMNS if c != 'design')
    table = format_rows([row, dict(row, design='y.json', nmi=0.5)])
    lines = table.splitlines()
    assert lines[0].split() == list(COLUMNS)
    assert lines[2].split()[COLUMNS.index('nmi')] == '0.50'


@pytest.mark.parametrize('text', ["{", "[]", '{"version": "0.3.0"}', '{"schema_version": 7}'])
def test_read_report_rejects(text, tmp_path):
    path = tmp_path / 'report.json'
    path.write_text(text)
    with pytest.raises(ParseError):
        read_report(str(path))


def test_eval_tool(tmp_path, capsys):
    _run(tmp_path, FixtureSpec('register-pipeline', 4, stages=2), passes=('preprocess', 'group', 'bitorder'))
    base = tmp_path / 'register-pipeline'
    report, truth = str(base / 'out' / 'report.json'), str(base / 'truth.json')
    rows = str(tmp_path / 'rows.json')
    netlist_eval.Config([report], [truth], rows).run()
    printed = capsys.readouterr().out.splitlines()
    assert printed[1].startswith('out ')
    with open(rows) as file:
        (row,) = json.load(file)
    assert row['design'] == 'out'
    assert row['groups'] == 2
    with pytest.raises(ConfigError):
        netlist_eval.Config([report, report], [truth]).run()


def test_group_tool_mux_target(tmp_path, capsys):
    netlist, _ = preprocess(generate(FixtureSpec('word-mux-fanout', 6)).netlist)
    write_netlist_file(str(tmp_path / 'mux.json'), netlist)
    out = str(tmp_path / 'groups.json')
    netlist_group.Config(str(tmp_path / 'mux.json'), out, target='mux').run()
    with open(out) as file:
        doc = json.load(file)
    assert doc['target'] == 'mux'
    assert [g['size'] for g in doc['groups']] == [6]
    assert capsys.readouterr().out.startswith("1 groups")


@pytest.mark.parametrize('seed', range(5))
@pytest.mark.parametrize('arch', ['ice40-like', 'x7-like'])
def test_pipeline_mixed_slice(tmp_path, arch, seed):
    spec = FixtureSpec('mixed-soc-slice', 8, arch, seed)
    report = _run(tmp_path, spec, passes=('preprocess', 'arith', 'group', 'bitorder'))
    row = report['evaluation']
    for model, count in generate(spec).expected['arithmetic'].items():
        assert row[model] == count
    assert row['nmi'] == pytest.approx(1.0)
    assert row['purity'] == pytest.approx(1.0)
    assert row['final_ordered'] >= 0.85
    assert row['correct'] >= 0.95
    assert report['mux_grouping']['groups'] == 1
    assert [tuple(h) for h in report['mux_grouping']['histogram']] == [(8, 1)]
