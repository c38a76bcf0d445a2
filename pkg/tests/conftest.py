import pytest

from netlist.ir      import GateSpec, NetSpec, build_netlist
from netlist.library import GateLibrary


# Names mapped to ids in declaration order
class SmallNetlist:

    def __init__(self, library: str):
        self.library = GateLibrary.get(library)
        self.nets: list[NetSpec] = []
        self.gates: list[GateSpec] = []

    def net(self, name: str, global_in: bool = False, global_out: bool = False) -> int:
        self.nets.append(NetSpec(len(self.nets), name, global_in, global_out))
        return len(self.nets) - 1

    def gate(self, type_name: str, name: str, config: dict | None = None, **pins) -> int:
        self.gates.append(GateSpec(len(self.gates), name, type_name,
                                   {p.replace('_', '[', 1) + ']' if '_' in p else p: n for p, n in pins.items()},
                                   dict(config or {})))
        return len(self.gates) - 1

    def build(self):
        return build_netlist(self.library, self.gates, self.nets)


@pytest.fixture
def small():
    return SmallNetlist


# y = a AND b, registered into q
@pytest.fixture
def and_register():
    s = SmallNetlist('ice40-like')
    clk = s.net('clk', global_in=True)
    a, b = s.net('a', global_in=True), s.net('b', global_in=True)
    y, q = s.net('y'), s.net('q', global_out=True)
    zero = s.net('$const0')
    s.gate('SB_LUT4', 'u_and', {'LUT_INIT': 0x8888}, I0=a, I1=b, I2=zero, I3=zero, O=y)
    s.gate('SB_DFF', 'q_reg', C=clk, D=y, Q=q)
    return s.build()
