"""
    Errors raised by the netlist tools.
"""


# Base of every error raised while loading or analysing a netlist
class NetlistError(Exception):
    pass


# The netlist is malformed (duplicate ids, multi-driven nets, unknown types)
class BuildError(NetlistError):
    pass


# An input document (JSON, Verilog, VCD, script) could not be read
class ParseError(NetlistError):
    pass


# A replacement did not preserve the function of a boundary output
class EquivalenceError(NetlistError):

    def __init__(self, message: str, counterexample: dict | None = None):
        super().__init__(message)
        self.counterexample = counterexample


# The simulator cannot run the netlist with the given stimulus
class SimulationError(NetlistError):

    def __init__(self, message: str, gates: list[str] | None = None):
        super().__init__(message)
        self.gates = gates or []


# Guided symbolic execution hit an unresolvable situation
class TraceError(NetlistError):
    pass


# A pass failed, keeps the name of the pass for the report
class PassError(NetlistError):

    def __init__(self, pass_name: str, message: str):
        super().__init__(f"{pass_name}: {message}")
        self.pass_name = pass_name


# The configuration of a tool is invalid
class ConfigError(Exception):
    pass
