"""
    Ground-truth files: gate labels, bit orders and intended arithmetic.

    labels file:  {"gate name": "group name", ...}
    bundle file:  {"labels": {...},
                   "bit_orders": {"group name": {"gate name": index}},
                   "arithmetic": [{"name": "add", "identity": "addition", "width": 8,
                                   "operands": [[net names]], "outputs": [net names]}]}
"""

import json
import re

from dataclasses import dataclass, field

from netlist.errors import ParseError


# Ground truth of a design
@dataclass
class GroundTruth:
    labels     : dict[str, str] = field(default_factory=dict)
    bit_orders : dict[str, dict[str, int]] = field(default_factory=dict)
    arithmetic : list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'labels'     : dict(sorted(self.labels.items())),
            'bit_orders' : {g: dict(sorted(o.items())) for g, o in sorted(self.bit_orders.items())},
            'arithmetic' : self.arithmetic,
        }

    @staticmethod
    def from_dict(doc: dict) -> 'GroundTruth':
        if not isinstance(doc, dict):
            raise ParseError("ground truth must be an object")
        labels = doc.get('labels', {})
        if not all(isinstance(k, str) and isinstance(v, str) for k, v in labels.items()):
            raise ParseError("labels must map gate names to group names")
        return GroundTruth(dict(labels),
                           {g: {k: int(v) for k, v in o.items()} for g, o in doc.get('bit_orders', {}).items()},
                           list(doc.get('arithmetic', [])))

    # Groups of the labels, members sorted
    def groups(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for gate, label in sorted(self.labels.items()):
            out.setdefault(label, []).append(gate)
        return out


def read_labels(path: str) -> dict[str, str]:
    with open(path, 'r') as file:
        try:
            doc = json.load(file)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON: {e}") from e
    # a full bundle is accepted as a labels file
    if isinstance(doc, dict) and 'labels' in doc and isinstance(doc['labels'], dict):
        doc = doc['labels']
    return GroundTruth.from_dict({'labels': doc}).labels


def read_ground_truth(path: str) -> GroundTruth:
    with open(path, 'r') as file:
        try:
            doc = json.load(file)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: invalid JSON: {e}") from e
    # a bare labels file is a bundle without orders
    if isinstance(doc, dict) and doc and not doc.keys() & {'labels', 'bit_orders', 'arithmetic'}:
        doc = {'labels': doc}
    return GroundTruth.from_dict(doc)


def write_ground_truth(path: str, truth: GroundTruth):
    with open(path, 'w') as file:
        json.dump(truth.to_dict(), file, indent=1, sort_keys=True)
        file.write('\n')


# register name patterns of synthesizers: base_reg[3], base_q[3], base[3], base_reg
_REGISTER_NAME = re.compile(r'^(?P<base>.+?)(?:_reg|_q)?(?:\[(?P<index>\d+)\])?$')


# Ground truth derived from the flip-flop names of a netlist
def derive_ground_truth(netlist) -> GroundTruth:
    """
    Label every flip-flop with the base of its name.

    Names carrying a bit index give the bit orders of their group.

    @type  netlist: Netlist
    @param netlist: A netlist with synthesizer instance names

    @rtype:   GroundTruth
    @returns: Labels and bit orders, no arithmetic
    """
    truth = GroundTruth()
    for gate in netlist.gates:
        if gate.category != 'ff':
            continue
        m = _REGISTER_NAME.match(gate.name)
        truth.labels[gate.name] = m['base']
        if m['index'] is not None:
            truth.bit_orders.setdefault(m['base'], {})[gate.name] = int(m['index'])
    truth.bit_orders = {g: o for g, o in truth.bit_orders.items() if len(o) > 1}
    return truth
