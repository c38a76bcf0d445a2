"""
    Sequential loop breaking.

    Registers are the nodes of a dependency graph: r1 -> r2 when an output
    of r1 reaches a data or control input of r2 through combinational
    logic. MAC blocks depend on their own accumulator. Every cyclic
    component is cut by a minimum set of registers, the lexicographically
    smallest by id among the minimum ones.
"""

import itertools
import logging
import math
import networkx as nx

from netlist.ir      import Netlist
from netlist.library import CLOCK, DSP


log = logging.getLogger(__name__)

# Largest number of subsets tried per cut size before the greedy fallback
EXACT_LIMIT = 100_000


# Register dependency graph
def register_graph(netlist: Netlist) -> nx.DiGraph:
    graph = nx.DiGraph()
    for gate in netlist.sequential_gates():
        graph.add_node(gate.id)
        if gate.category == DSP:
            graph.add_edge(gate.id, gate.id)
        for pin, nid in gate.inputs():
            if gate.type.pin(pin).role == CLOCK:
                continue
            for frontier in netlist.fanin_cone([nid]).inputs:
                driver = netlist.driver(frontier)
                if driver is not None and driver[0].is_sequential:
                    graph.add_edge(driver[0].id, gate.id)
    return graph


# Minimum feedback vertex set of one strongly connected component
def _cut_component(graph: nx.DiGraph, nodes: list[int]) -> set[int]:
    sub = graph.subgraph(nodes)
    forced = {n for n in nodes if sub.has_edge(n, n)}
    rest = [n for n in nodes if n not in forced]
    remaining = sub.subgraph(rest)
    if nx.is_directed_acyclic_graph(remaining):
        return forced

    for k in range(1, len(rest) + 1):
        if math.comb(len(rest), k) > EXACT_LIMIT:
            log.info("loops.greedy component=%d size=%d", min(nodes), len(nodes))
            return forced | _greedy_cut(remaining)
        for combo in itertools.combinations(rest, k):
            kept = [n for n in rest if n not in combo]
            if nx.is_directed_acyclic_graph(remaining.subgraph(kept)):
                return forced | set(combo)
    return forced | set(rest)


# Remove the busiest register of a cycle until none is left
def _greedy_cut(graph: nx.DiGraph) -> set[int]:
    graph = nx.DiGraph(graph)
    cut = set()
    while True:
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            return cut
        members = sorted({a for a, _ in cycle})
        pick = max(members, key=lambda n: (graph.in_degree(n) * graph.out_degree(n), -n))
        cut.add(pick)
        graph.remove_node(pick)


# Registers whose removal leaves no sequential loop
def break_loops(netlist: Netlist) -> frozenset[int]:
    """
    Choose the loop-cut registers.

    @type  netlist: Netlist
    @param netlist: The netlist

    @rtype:   frozenset( int )
    @returns: Gate ids of the loop-cut registers, empty for feed-forward logic
    """
    graph = register_graph(netlist)
    cut: set[int] = set()
    for comp in sorted(nx.strongly_connected_components(graph), key=min):
        nodes = sorted(comp)
        if len(nodes) == 1 and not graph.has_edge(nodes[0], nodes[0]):
            continue
        cut |= _cut_component(graph, nodes)
    log.info("loops.done registers=%d cut=%d", graph.number_of_nodes(), len(cut))
    return frozenset(cut)
