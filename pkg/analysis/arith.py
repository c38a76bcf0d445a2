"""
    Arithmetic structure identification.

    Phase one is architecture dependent: carry chains and the gate sets
    grown around them (analysis.chains, analysis.candidates). Phase two
    only looks at Boolean functions: for every control assignment the
    candidate outputs are checked against the model library
    (analysis.models).
"""

import itertools
import logging
import numpy as np

from concurrent.futures import ThreadPoolExecutor
from dataclasses        import dataclass, field

from analysis.chains     import CarryChain, find_carry_chains
from analysis.candidates import (FunctionalCandidate, UNARY, build_structural_candidates,
                                 derive_functional_candidates)
from analysis.models     import (ArithmeticModel, MODEL_PRIORITY, UNKNOWN,
                                 binary_models, unary_models)
from logic.boolfunc      import (EquivalenceChecker, ColumnAlgebra, NODE_BUDGET, EQUIVALENT, UNDECIDED,
                                 fold, substitute_all)
from logic.words         import word_vars
from netlist.errors      import PassError
from netlist.ir          import Netlist, ModuleGroup
from netlist.semantics   import FunctionBuilder


log = logging.getLogger(__name__)

VERIFIED = 'verified'


# An identified arithmetic structure
@dataclass
class ArithmeticStructure:
    chain            : int
    gates            : tuple[int, ...]
    model            : ArithmeticModel
    operands         : list[list[int]]
    outputs          : list[int]
    controls         : dict[int, int]
    assignments      : list[dict[int, int]] = field(default_factory=list)
    constant_outputs : list[tuple[dict[int, int], int]] = field(default_factory=list)
    status           : str = VERIFIED
    also_matches     : list[str] = field(default_factory=list)
    variant          : str = ''

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    def to_dict(self, netlist: Netlist) -> dict:
        name = lambda n: netlist.nets[n].name
        return {
            'chain'    : netlist.gates[self.chain].name,
            'gates'    : sorted(netlist.gates[g].name for g in self.gates),
            'model'    : self.model.to_dict(),
            'operands' : [{'nets': [name(n) for n in op]} for op in self.operands],
            'outputs'  : [name(n) for n in self.outputs],
            'controls' : {name(n): v for n, v in sorted(self.controls.items())},
            'assignments' : [{name(n): v for n, v in sorted(a.items())} for a in self.assignments],
            'constant_outputs' : [{'controls': {name(n): v for n, v in sorted(a.items())}, 'value': value}
                                  for a, value in self.constant_outputs],
            'also_matches' : self.also_matches,
            'status'   : self.status,
            'variant'  : self.variant,
        }


# Per-model counts and the classified fraction
@dataclass
class ArithmeticSummary:
    counts            : dict[str, int]
    undecided         : int
    chains_total      : int
    chains_verified   : int
    classified_gates  : int
    comb_gates        : int

    @property
    def classified_fraction(self) -> float:
        return self.classified_gates / self.comb_gates if self.comb_gates else 0.0

    def to_dict(self) -> dict:
        return {
            'counts'              : dict(self.counts),
            'undecided'           : self.undecided,
            'chains_total'        : self.chains_total,
            'chains_verified'     : self.chains_verified,
            'classified_gates'    : self.classified_gates,
            'comb_gates'          : self.comb_gates,
            'classified_fraction' : self.classified_fraction,
        }


# Check a functional candidate under every control assignment
def verify(cand: FunctionalCandidate, budget: int = NODE_BUDGET,
           max_controls: int = 6) -> ArithmeticStructure | None:
    """
    Verify a functional candidate against the model library.

    Every assignment of the control inputs is substituted and the outputs
    are compared bit by bit with each applicable model. Assignments under
    which all outputs are constant are recorded apart.

    @type  cand: FunctionalCandidate
    @param cand: The candidate

    @type  budget: int
    @param budget: BDD node budget of each check

    @type  max_controls: int
    @param max_controls: Candidates with more controls are skipped

    @rtype:   ArithmeticStructure | None
    @returns: The structure of the first model in priority order that held
              under some assignment, an undecided structure when a check ran
              out of budget and none held, None otherwise
    """
    if len(cand.controls) > max_controls:
        log.info("arith.control_cap controls=%d cap=%d", len(cand.controls), max_controls)
        return None

    functions = [cand.functions[o] for o in cand.outputs]
    operands  = [word_vars(op) for op in cand.operands]
    passing: dict[ArithmeticModel, list[dict[int, int]]] = {}
    undecided: list[ArithmeticModel] = []
    constants = []

    for values in itertools.product((0, 1), repeat=len(cand.controls)):
        assignment = dict(zip(cand.controls, values))
        outputs = substitute_all(functions, assignment)
        if all(f.is_const for f in outputs):
            constants.append((assignment, sum(f.value << i for i, f in enumerate(outputs))))
            continue

        if cand.family == UNARY:
            models = unary_models(outputs, cand.operands[0], cand.feedback)
        else:
            models = binary_models(outputs, cand.width)
        checker = EquivalenceChecker(cand.order, budget)
        for model in models:
            if len(outputs) != model.output_width:
                continue
            result = checker.check_all(outputs, model.bits(*operands))
            if result.status == EQUIVALENT:
                passing.setdefault(model, []).append(assignment)
            elif result.status == UNDECIDED:
                undecided.append(model)

    if passing:
        ranked = sorted(passing, key=lambda m: (m.priority, list(passing).index(m)))
        best = ranked[0]
        return ArithmeticStructure(
            cand.structure.chain.head, tuple(sorted(cand.structure.gates)), best,
            [list(op) for op in cand.operands], list(cand.outputs),
            dict(passing[best][0]), [dict(a) for a in passing[best]], constants,
            VERIFIED, [m.describe() for m in ranked[1:]], cand.structure.variant)
    if undecided:
        best = min(undecided, key=lambda m: m.priority)
        log.info("arith.undecided chain=%d model=%s", cand.structure.chain.head, best.identity)
        return ArithmeticStructure(
            cand.structure.chain.head, tuple(sorted(cand.structure.gates)), best,
            [list(op) for op in cand.operands], list(cand.outputs), {}, [], constants,
            UNDECIDED, [], cand.structure.variant)
    return None


# Coverage first: word width and outputs, then fewest controls, then model priority
def _rank(index: int, s: ArithmeticStructure) -> tuple:
    return (-s.model.width, -len(s.outputs), len(s.controls), s.model.priority, -len(s.gates), index)


# Identify the arithmetic of one chain
def identify_chain(chain: CarryChain, netlist: Netlist,
                   layers: int = 2, max_controls: int = 6, max_width: int = 33,
                   max_variants: int = 256, budget: int = NODE_BUDGET) -> ArithmeticStructure | None:
    found: list[tuple[int, ArithmeticStructure]] = []
    for index, sc in enumerate(build_structural_candidates(chain, netlist, layers, max_variants)):
        try:
            fcs = derive_functional_candidates(sc, netlist, max_width, max_controls, budget=budget)
        except PassError as e:
            log.info("arith.skipped chain=%s variant=%s reason=%r",
                     netlist.gates[chain.head].name, sc.variant, str(e))
            continue
        for fc in fcs:
            structure = verify(fc, budget, max_controls)
            if structure is not None:
                found.append((index, structure))
                if structure.verified:
                    break

    if not found:
        return None
    verified = [(i, s) for i, s in found if s.verified]
    pool = verified or found
    _, best = min(pool, key=lambda e: _rank(*e))
    return best


# Run both phases over every chain
def classify_arithmetic(netlist: Netlist, arch: str | None = None,
                        layers: int = 2, max_controls: int = 6, max_width: int = 33,
                        max_variants: int = 256, budget: int = NODE_BUDGET,
                        jobs: int = 1) -> tuple[list[ArithmeticStructure], ArithmeticSummary]:
    """
    Identify the arithmetic structures of a netlist.

    @type  netlist: Netlist
    @param netlist: The netlist, normally preprocessed

    @type  arch: str | None
    @param arch: Architecture library name, defaults to the netlist's

    @type  jobs: int
    @param jobs: Number of chains processed concurrently

    @rtype:   tuple( list( ArithmeticStructure ), ArithmeticSummary )
    @returns: Structures ordered by chain head and the summary
    """
    chains = find_carry_chains(netlist, arch)

    def work(chain):
        return identify_chain(chain, netlist, layers, max_controls, max_width, max_variants, budget)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, chains))
    else:
        results = [work(c) for c in chains]

    structures = [s for s in results if s is not None]
    counts = {m: 0 for m in MODEL_PRIORITY + (UNKNOWN,)}
    classified: set[int] = set()
    undecided = 0
    for s in structures:
        if s.verified:
            counts[s.model.identity] += 1
            classified |= set(s.gates)
        else:
            undecided += 1
    verified = sum(1 for s in structures if s.verified)
    counts[UNKNOWN] = len(chains) - verified

    comb = {g.id for g in netlist.combinational_gates()}
    summary = ArithmeticSummary(counts, undecided, len(chains), verified, len(classified & comb), len(comb))
    log.info("arith.summary chains=%d verified=%d undecided=%d classified=%.3f",
             len(chains), verified, undecided, summary.classified_fraction)
    return structures, summary


# Check a structure by random simulation of its gates
def simulate_structure(netlist: Netlist, structure: ArithmeticStructure,
                       vectors: int = 1000, seed: int = 0) -> bool:
    """
    Drive random operand values through the structure gates.

    Control inputs take the recorded assignment. The outputs must match
    the integer semantics of the model on every vector.

    @rtype:   bool
    @returns: True when every vector matched
    """
    rng = np.random.default_rng(seed)
    builder = FunctionBuilder(netlist, gates=structure.gates)
    functions = builder.functions(structure.outputs)
    width = structure.model.width

    columns = {n: np.full(vectors, bool(v)) for n, v in structure.controls.items()}
    values = []
    for op in structure.operands:
        words = rng.integers(0, 1 << width, size=vectors, dtype=np.int64)
        values.append(words)
        for i, n in enumerate(op):
            columns[n] = ((words >> i) & 1).astype(bool)

    variables = set().union(*(f.support for f in functions)) if functions else set()
    missing = variables.difference(columns)
    if missing:
        log.info("arith.simulate_unbound nets=%s", sorted(missing))
        return False
    bits = fold(functions, ColumnAlgebra(columns, vectors))
    for j in range(vectors):
        got = sum(int(bool(np.asarray(b)[j])) << i for i, b in enumerate(bits))
        expected = structure.model.evaluate(*(int(v[j]) for v in values))
        if got != expected:
            return False
    return True


# Module groups of the verified structures
def arithmetic_modules(netlist: Netlist, structures: list[ArithmeticStructure]) -> list[ModuleGroup]:
    """
    Lay the verified structures out as locked arithmetic module groups.

    A gate already claimed by an earlier structure stays with it. Operand
    and output pin groups map bit i to the pin reading or driving the net.

    @rtype:   list( ModuleGroup )
    @returns: One group per verified structure, in structure order
    """
    claimed: set[int] = set()
    out = []
    for k, s in enumerate(structures):
        if not s.verified:
            continue
        gates = frozenset(s.gates) - claimed
        if not gates:
            continue
        claimed |= gates
        groups = {}
        for label, nets in zip('AB', s.operands):
            pins = []
            for i, n in enumerate(nets):
                reader = next(((g, p) for g, p in netlist.nets[n].destinations if g in gates), None)
                if reader is not None:
                    pins.append((reader[0], reader[1], i))
            groups[label] = pins
        ys = []
        for i, n in enumerate(s.outputs):
            gid, pin = netlist.nets[n].sources[0]
            if gid in gates:
                ys.append((gid, pin, i))
        groups['Y'] = ys
        out.append(ModuleGroup(f"arith{k}", 'arithmetic', gates, groups, locked=True,
                               provenance=[f"{s.model.identity} {s.model.describe()}"]))
    return out
