"""
    Decompose LUT functions into primitive gates with MUX preference.

    A function is first matched against single-primitive shapes (literal,
    AND/OR of literals, XOR/XNOR parity). Otherwise every Shannon split is
    tried: a split whose cofactors are constant or complementary becomes an
    AND2/OR2/XOR2, any other split becomes a MUX2. The cheapest tree wins,
    cost being (gates, muxes with a constant data input). Ties go to the
    split with the lowest summed cofactor entropy, then the lowest net id.
"""

import numpy as np

from numpy      import ndarray
from typing     import Sequence
from functools  import lru_cache

from logic.boolfunc   import BoolFunc, FuncAlgebra, const, var
from logic.truthtable import cofactor_table, depends_on, table_entropy


# Plan nodes (tuples, hashable):
#   ('const', c)  ('var', net)  ('not', p)
#   ('and'|'or'|'xor'|'xnor', p, q)  ('mux', net, p0, p1)
Plan = tuple


# Cost of a decomposition tree
def plan_cost(plan: Plan) -> tuple[int, int]:
    return _cost(plan)


@lru_cache(maxsize=None)
def _cost(plan: Plan) -> tuple[int, int]:
    kind = plan[0]
    if kind in ('const', 'var'):
        return (0, 0)
    if kind == 'not':
        g, m = _cost(plan[1])
        return (g + 1, m)
    if kind == 'mux':
        g0, m0 = _cost(plan[2])
        g1, m1 = _cost(plan[3])
        const_input = plan[2][0] == 'const' or plan[3][0] == 'const'
        return (1 + g0 + g1, m0 + m1 + (1 if const_input else 0))
    ga, ma = _cost(plan[1])
    gb, mb = _cost(plan[2])
    return (1 + ga + gb, ma + mb)


# Drop the variables a table does not depend on
def reduce_support(variables: Sequence[int], table: ndarray) -> tuple[tuple[int, ...], ndarray]:
    variables = list(variables)
    i = 0
    while i < len(variables):
        if depends_on(table, i):
            i += 1
        else:
            table = cofactor_table(table, i, 0)
            del variables[i]
    return tuple(variables), table


def _literal(v: int, positive: bool) -> Plan:
    return ('var', v) if positive else ('not', ('var', v))


def _chain(op: str, plans: list[Plan]) -> Plan:
    out = plans[0]
    for p in plans[1:]:
        out = (op, out, p)
    return out


# Match single-primitive shapes on a reduced table
def _recognize(variables: tuple[int, ...], table: ndarray) -> Plan | None:
    n = len(variables)
    if n == 0:
        return ('const', int(table[0]))
    ones = np.flatnonzero(table)
    if n == 1:
        return ('var', variables[0]) if table[1] else ('not', ('var', variables[0]))

    # AND of literals: a single minterm
    if ones.size == 1:
        row = int(ones[0])
        return _chain('and', [_literal(v, bool((row >> i) & 1)) for i, v in enumerate(variables)])

    # OR of literals: a single maxterm
    if ones.size == table.size - 1:
        row = int(np.flatnonzero(table == 0)[0])
        return _chain('or', [_literal(v, not (row >> i) & 1) for i, v in enumerate(variables)])

    # parity
    index = np.arange(table.size)
    parity = np.zeros(table.size, np.uint8)
    for i in range(n):
        parity ^= ((index >> i) & 1).astype(np.uint8)
    leaves = [('var', v) for v in variables]
    if np.array_equal(table, parity):
        return _chain('xor', leaves)
    if np.array_equal(table, 1 - parity):
        return ('xnor', _chain('xor', leaves[:-1]), leaves[-1])
    return None


# Decomposition planner with a memo over (support, table)
class Decomposer:

    def __init__(self):
        self.memo: dict[tuple, Plan] = {}

    # Best plan for a truth table over ordered variables
    def plan(self, variables: Sequence[int], table: ndarray) -> Plan:
        """
        Find the cheapest primitive tree of a function.

        @type  variables: list( int )
        @param variables: Net ids, variable i is bit i of the row index

        @type  table: ndarray (2^n) uint8
        @param table: The truth table

        @rtype:   Plan
        @returns: The decomposition tree
        """
        variables, table = reduce_support(variables, np.ascontiguousarray(table, np.uint8))
        key = (variables, table.tobytes())
        found = self.memo.get(key)
        if found is not None:
            return found

        best = _recognize(variables, table)
        if best is None:
            candidates = []
            for i, v in enumerate(variables):
                t0 = cofactor_table(table, i, 0)
                t1 = cofactor_table(table, i, 1)
                rest = variables[:i] + variables[i + 1:]
                plan = self._split(v, rest, t0, t1)
                entropy = table_entropy(t0) + table_entropy(t1)
                candidates.append((plan_cost(plan), entropy, v, plan))
            candidates.sort(key=lambda c: (c[0], c[1], c[2]))
            best = candidates[0][3]

        self.memo[key] = best
        return best

    # Plan of f = v ? t1 : t0
    def _split(self, v: int, rest: tuple[int, ...], t0: ndarray, t1: ndarray) -> Plan:
        lit = ('var', v)
        c0 = _constant(t0)
        c1 = _constant(t1)
        if c0 == 0:
            return ('and', lit, self.plan(rest, t1))
        if c1 == 0:
            return ('and', ('not', lit), self.plan(rest, t0))
        if c1 == 1:
            return ('or', lit, self.plan(rest, t0))
        if c0 == 1:
            return ('or', ('not', lit), self.plan(rest, t1))
        if np.array_equal(t1, 1 - t0):
            return ('xor', lit, self.plan(rest, t0))
        return ('mux', v, self.plan(rest, t0), self.plan(rest, t1))


def _constant(table: ndarray) -> int | None:
    if not table.any():
        return 0
    if table.all():
        return 1
    return None


# Boolean function of a plan over net variables
def plan_function(plan: Plan) -> BoolFunc:
    return _plan_function(plan)


@lru_cache(maxsize=4096)
def _plan_function(plan: Plan) -> BoolFunc:
    algebra = FuncAlgebra()
    kind = plan[0]
    if kind == 'const':
        return const(plan[1])
    if kind == 'var':
        return var(plan[1])
    if kind == 'not':
        return algebra.not_(_plan_function(plan[1]))
    if kind == 'mux':
        return algebra.ite(var(plan[1]), _plan_function(plan[3]), _plan_function(plan[2]))
    a, b = _plan_function(plan[1]), _plan_function(plan[2])
    if kind == 'and':
        return algebra.and_(a, b)
    if kind == 'or':
        return algebra.or_(a, b)
    if kind == 'xor':
        return algebra.xor(a, b)
    return algebra.not_(algebra.xor(a, b))


# Primitive gate type of a plan node
PRIMITIVE_OF = {'not': 'INV', 'and': 'AND2', 'or': 'OR2', 'xor': 'XOR2', 'xnor': 'XNOR2', 'mux': 'MUX2'}


# Count the MUX2 nodes of a plan
def mux_count(plan: Plan) -> int:
    kind = plan[0]
    if kind in ('const', 'var'):
        return 0
    if kind == 'mux':
        return 1 + mux_count(plan[2]) + mux_count(plan[3])
    return sum(mux_count(p) for p in plan[1:])
