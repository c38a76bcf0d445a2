"""
    Plumbing shared by the command-line tools: logging, input loading and
    the exit code of every error class.

    Exit codes: 0 ok, 2 configuration error, 3 input error (unreadable or
    malformed file), 4 pass failure.
"""

import json
import logging
import os
import sys
import yaml

from configargparse import ArgParser, YAMLConfigFileParser

from netlist.errors  import BuildError, ConfigError, NetlistError, ParseError, PassError
from netlist.ir      import Netlist
from netlist.json_io import read_netlist_file
from netlist.library import GateLibrary


log = logging.getLogger(__name__)

EXIT_OK     = 0
EXIT_CONFIG = 2
EXIT_INPUT  = 3
EXIT_PASS   = 4

LOG_LEVELS = ('debug', 'info', 'warning', 'error')


# Parser with a YAML config file option
def make_parser(prog: str, description: str) -> ArgParser:
    parser = ArgParser(
        prog=prog,
        description=description,
        config_file_parser_class=YAMLConfigFileParser)

    parser.add_argument('-c', '--config',
        is_config_file=True,
        help="config file path")

    parser.add_argument('--log-level',
        dest='log_level',
        default='warning',
        choices=LOG_LEVELS,
        help="Verbosity of the structured log on stderr")

    return parser


def setup_logging(level: str = 'warning'):
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(levelname)s %(name)s %(message)s",
        stream=sys.stderr,
        force=True)


# Exit code of an error
def exit_code(error: Exception) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, (ParseError, BuildError, FileNotFoundError, IsADirectoryError)):
        return EXIT_INPUT
    if isinstance(error, PassError) and isinstance(error.__cause__, (ParseError, BuildError)):
        return EXIT_INPUT
    return EXIT_PASS


# Run a tool configuration, reporting errors as one line on stderr
def run_tool(config) -> int:
    """
    Run config.run() and map errors to exit codes.

    @rtype:   int
    @returns: The exit code
    """
    try:
        config.run()
    except (ConfigError, NetlistError, FileNotFoundError, IsADirectoryError) as e:
        code = exit_code(e)
        where = getattr(e, 'pass_name', None)
        fields = [f"error={type(e).__name__}", f"exit={code}"]
        if where:
            fields.append(f"pass={where}")
        fields.append(f"message={json.dumps(str(e))}")
        print(' '.join(fields), file=sys.stderr)
        return code
    return EXIT_OK


# Resolve a library name
def library(name: str | None) -> GateLibrary | None:
    if name is None:
        return None
    found = GateLibrary.get(name)
    if found is None:
        raise ConfigError(f"unknown library {name}, expected one of {', '.join(GateLibrary.NAMES)}")
    return found


# Load a JSON or structural Verilog netlist
def load_netlist(path: str, library_name: str | None = None) -> Netlist:
    lib = library(library_name)
    if path.endswith('.v') and lib is None:
        raise ConfigError("reading Verilog needs --library")
    netlist = read_netlist_file(path, lib)
    log.info("cli.loaded path=%s gates=%d nets=%d", path, len(netlist.gates), len(netlist.nets))
    return netlist


def load_yaml(path: str) -> dict:
    with open(path, 'r') as file:
        try:
            doc = yaml.safe_load(file)
        except yaml.YAMLError as e:
            raise ParseError(f"{path}: {e}") from e
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a mapping")
    return doc


def write_json(path: str, doc):
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, 'w') as file:
        json.dump(doc, file, indent=1, sort_keys=True)
        file.write('\n')


def write_text(path: str, text: str):
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, 'w') as file:
        file.write(text)
