"""
    Boolean functions over named variables.

    Functions are hash-consed expression DAGs: two structurally identical
    functions are the same object. Variables are net ids (int) or symbol
    names (str). Equivalence is decided exhaustively up to EXHAUSTIVE_LIMIT
    support variables, then by randomized counterexample search followed by a
    BDD canonical-form check bounded by a node budget.
"""

import itertools
import logging
import threading
import weakref
import numpy as np

from dd           import autoref as _bdd
from numpy        import ndarray
from dataclasses  import dataclass
from typing       import Hashable, Iterable, Mapping, Sequence

from logic.truthtable import first_difference, depends_on, int_to_table


log = logging.getLogger(__name__)

# Above this number of variables truth tables are not enumerated
EXHAUSTIVE_LIMIT = 20

# Rows evaluated at once when enumerating truth tables
CHUNK_BITS = 16

# Random vectors tried before building canonical forms
RANDOM_SAMPLES = 4096

# Default number of BDD nodes before giving up
NODE_BUDGET = 200_000

EQUIVALENT = 'equivalent'
DIFFERENT  = 'different'
UNDECIDED  = 'undecided-at-budget'


# Sort key for variables, integers (net ids) first
def var_key(v: Hashable) -> tuple:
    if isinstance(v, (int, np.integer)):
        return (0, int(v), '')
    return (1, 0, str(v))


# A node of a Boolean function
class BoolFunc:
    __slots__ = ('op', 'args', 'key', 'uid', 'support', '_semantic', '__weakref__')

    # operator names
    CONST = 'const'
    VAR   = 'var'
    NOT   = 'not'
    AND   = 'and'
    OR    = 'or'
    XOR   = 'xor'
    ITE   = 'ite'

    def __repr__(self) -> str:
        return self.to_text()

    def __reduce__(self):
        raise TypeError("BoolFunc nodes are interned and cannot be pickled")

    # operators for convenience
    def __invert__(self):          return not_(self)
    def __and__(self, other):      return and_(self, other)
    def __or__(self, other):       return or_(self, other)
    def __xor__(self, other):      return xor(self, other)

    @property
    def is_const(self) -> bool:
        return self.op == BoolFunc.CONST

    @property
    def value(self) -> int:
        if self.op != BoolFunc.CONST:
            raise ValueError("not a constant function")
        return self.key

    # Fold the DAG bottom-up with the given algebra
    def fold(self, algebra, leaves: Mapping | None = None):
        return fold([self], algebra, leaves)[0]

    # Evaluate the function for a complete assignment
    def evaluate(self, assignment: Mapping[Hashable, int]) -> int:
        return int(self.fold(IntAlgebra(assignment)))

    # Shannon cofactor on one variable
    def cofactor(self, var: Hashable, value: int) -> 'BoolFunc':
        return substitute(self, {var: value})

    # Replace variables simultaneously
    def substitute(self, assignment: Mapping) -> 'BoolFunc':
        return substitute(self, assignment)

    # Truth table of the function over an ordered list of variables
    def truth_table(self, order: Sequence[Hashable]) -> ndarray:
        return truth_tables([self], order)[0]

    # Exact set of variables the function depends on
    def semantic_support(self) -> frozenset:
        if self._semantic is None:
            self._semantic = EquivalenceChecker().semantic_support(self)
        return self._semantic

    # Readable prefix notation
    def to_text(self, names: Mapping | None = None) -> str:
        def leaf(node):
            if names is not None and node.key in names:
                return str(names[node.key])
            return f"n{node.key}" if isinstance(node.key, int) else str(node.key)
        return fold([self], TextAlgebra(leaf), None, leaf_nodes=True)[0]


_lock    = threading.Lock()
_table   = weakref.WeakValueDictionary()
_counter = itertools.count()


# Find or create the unique node for (op, key, args)
def _make(op: str, args: tuple = (), key=None) -> BoolFunc:
    ident = (op, key, args)
    with _lock:
        node = _table.get(ident)
        if node is None:
            node = BoolFunc.__new__(BoolFunc)
            node.op   = op
            node.args = args
            node.key  = key
            node.uid  = next(_counter)
            node._semantic = None
            if op == BoolFunc.VAR:
                node.support = frozenset((key,))
            elif op == BoolFunc.CONST:
                node.support = frozenset()
            elif len(args) == 1:
                node.support = args[0].support
            else:
                node.support = frozenset().union(*(a.support for a in args))
            _table[ident] = node
    return node


ZERO = _make(BoolFunc.CONST, (), 0)
ONE  = _make(BoolFunc.CONST, (), 1)


def const(value: int) -> BoolFunc:
    return ONE if value else ZERO


def var(name: Hashable) -> BoolFunc:
    return _make(BoolFunc.VAR, (), name)


def _is_not_of(a: BoolFunc, b: BoolFunc) -> bool:
    return (a.op == BoolFunc.NOT and a.args[0] is b) or (b.op == BoolFunc.NOT and b.args[0] is a)


def _ordered(a: BoolFunc, b: BoolFunc) -> tuple:
    return (a, b) if a.uid <= b.uid else (b, a)


def not_(a: BoolFunc) -> BoolFunc:
    if a.op == BoolFunc.CONST:
        return const(1 - a.key)
    if a.op == BoolFunc.NOT:
        return a.args[0]
    return _make(BoolFunc.NOT, (a,))


def _and2(a: BoolFunc, b: BoolFunc) -> BoolFunc:
    if a is ZERO or b is ZERO: return ZERO
    if a is ONE:               return b
    if b is ONE:               return a
    if a is b:                 return a
    if _is_not_of(a, b):       return ZERO
    return _make(BoolFunc.AND, _ordered(a, b))


def _or2(a: BoolFunc, b: BoolFunc) -> BoolFunc:
    if a is ONE or b is ONE:   return ONE
    if a is ZERO:              return b
    if b is ZERO:              return a
    if a is b:                 return a
    if _is_not_of(a, b):       return ONE
    return _make(BoolFunc.OR, _ordered(a, b))


def _xor2(a: BoolFunc, b: BoolFunc) -> BoolFunc:
    if a.op == BoolFunc.CONST: return not_(b) if a.key else b
    if b.op == BoolFunc.CONST: return not_(a) if b.key else a
    if a is b:                 return ZERO
    if _is_not_of(a, b):       return ONE
    # push negations out so that XNOR has one representation
    if a.op == BoolFunc.NOT:   return not_(_xor2(a.args[0], b))
    if b.op == BoolFunc.NOT:   return not_(_xor2(a, b.args[0]))
    return _make(BoolFunc.XOR, _ordered(a, b))


def and_(*args: BoolFunc) -> BoolFunc:
    result = ONE
    for a in args:
        result = _and2(result, a)
    return result


def or_(*args: BoolFunc) -> BoolFunc:
    result = ZERO
    for a in args:
        result = _or2(result, a)
    return result


def xor(*args: BoolFunc) -> BoolFunc:
    result = ZERO
    for a in args:
        result = _xor2(result, a)
    return result


def xnor(a: BoolFunc, b: BoolFunc) -> BoolFunc:
    return not_(_xor2(a, b))


def ite(s: BoolFunc, t: BoolFunc, e: BoolFunc) -> BoolFunc:
    if s.op == BoolFunc.CONST:     return t if s.key else e
    if t is e:                     return t
    if s.op == BoolFunc.NOT:       return ite(s.args[0], e, t)
    if t is ONE  and e is ZERO:    return s
    if t is ZERO and e is ONE:     return not_(s)
    if t is ZERO:                  return _and2(not_(s), e)
    if t is ONE:                   return _or2(s, e)
    if e is ZERO:                  return _and2(s, t)
    if e is ONE:                   return _or2(not_(s), t)
    if t is s:                     return _or2(s, e)
    if e is s:                     return _and2(s, t)
    if _is_not_of(t, e):           return _xor2(s, e)
    return _make(BoolFunc.ITE, (s, t, e))


# Algebra building Boolean functions, the identity fold
class FuncAlgebra:

    def const(self, value):       return const(value)
    def var(self, name):          return var(name)
    def not_(self, a):            return not_(a)
    def and_(self, a, b):         return _and2(a, b)
    def or_(self, a, b):          return _or2(a, b)
    def xor(self, a, b):          return _xor2(a, b)
    def ite(self, s, t, e):       return ite(s, t, e)
    def lut(self, init, inputs):  return lut_function(init, inputs)


# Algebra evaluating a function on integers
class IntAlgebra:

    def __init__(self, assignment: Mapping):
        self.assignment = assignment

    def const(self, value):       return value
    def var(self, name):          return int(self.assignment[name]) & 1
    def not_(self, a):            return 1 - a
    def and_(self, a, b):         return a & b
    def or_(self, a, b):          return a | b
    def xor(self, a, b):          return a ^ b
    def ite(self, s, t, e):       return t if s else e


# Algebra evaluating a function on columns of bits
class ColumnAlgebra:

    def __init__(self, columns: Mapping, size: int):
        self.columns = columns
        self.size    = size

    def const(self, value):       return np.full(self.size, bool(value))
    def var(self, name):          return self.columns[name]
    def not_(self, a):            return ~a
    def and_(self, a, b):         return a & b
    def or_(self, a, b):          return a | b
    def xor(self, a, b):          return a ^ b
    def ite(self, s, t, e):       return np.where(s, t, e)


# Algebra printing a function
class TextAlgebra:

    def __init__(self, leaf):
        self.leaf = leaf

    def const(self, value):       return str(value)
    def not_(self, a):            return f"NOT({a})"
    def and_(self, a, b):         return f"AND({a}, {b})"
    def or_(self, a, b):          return f"OR({a}, {b})"
    def xor(self, a, b):          return f"XOR({a}, {b})"
    def ite(self, s, t, e):       return f"ITE({s}, {t}, {e})"


# List the nodes of DAGs children first
def postorder(roots: Iterable[BoolFunc]) -> list[BoolFunc]:
    seen: set[int] = set()
    order: list[BoolFunc] = []
    stack = [(r, False) for r in reversed(list(roots))]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if node.uid in seen:
            continue
        seen.add(node.uid)
        stack.append((node, True))
        for a in reversed(node.args):
            if a.uid not in seen:
                stack.append((a, False))
    return order


# Fold several DAGs bottom-up with a shared memo
def fold(roots: Sequence[BoolFunc], algebra, leaves: Mapping | None = None,
         leaf_nodes: bool = False) -> list:
    """
    Evaluate DAGs bottom-up with an algebra.

    @type  roots: list( BoolFunc )
    @param roots: The functions to evaluate

    @type  algebra: object with const, var, not_, and_, or_, xor, ite
    @param algebra: Interpretation of the operators

    @type  leaves: dict( var -> value ) | None
    @param leaves: Values of variables, overriding algebra.var

    @type  leaf_nodes: bool
    @param leaf_nodes: Pass the variable node itself to algebra.leaf

    @rtype:   list
    @returns: The value of each root
    """
    memo: dict[int, object] = {}
    for node in postorder(roots):
        op = node.op
        if op == BoolFunc.CONST:
            value = algebra.const(node.key)
        elif op == BoolFunc.VAR:
            if leaf_nodes:
                value = algebra.leaf(node)
            elif leaves is not None and node.key in leaves:
                value = leaves[node.key]
            else:
                value = algebra.var(node.key)
        elif op == BoolFunc.NOT:
            value = algebra.not_(memo[node.args[0].uid])
        elif op == BoolFunc.AND:
            value = algebra.and_(memo[node.args[0].uid], memo[node.args[1].uid])
        elif op == BoolFunc.OR:
            value = algebra.or_(memo[node.args[0].uid], memo[node.args[1].uid])
        elif op == BoolFunc.XOR:
            value = algebra.xor(memo[node.args[0].uid], memo[node.args[1].uid])
        else:
            s, t, e = node.args
            value = algebra.ite(memo[s.uid], memo[t.uid], memo[e.uid])
        memo[node.uid] = value
    return [memo[r.uid] for r in roots]


# Replace variables by functions or constants, simultaneously
def substitute(f: BoolFunc, assignment: Mapping) -> BoolFunc:
    if not assignment or f.support.isdisjoint(assignment.keys()):
        return f
    leaves = {k: (v if isinstance(v, BoolFunc) else const(int(v))) for k, v in assignment.items()}
    return fold([f], FuncAlgebra(), leaves)[0]


def substitute_all(funcs: Sequence[BoolFunc], assignment: Mapping) -> list[BoolFunc]:
    leaves = {k: (v if isinstance(v, BoolFunc) else const(int(v))) for k, v in assignment.items()}
    return fold(funcs, FuncAlgebra(), leaves)


# Build the function of a LUT from its init vector
def lut_function(init, inputs: Sequence[BoolFunc]) -> BoolFunc:
    """
    Build the Shannon tree of a LUT over arbitrary input functions.

    @type  init: int | ndarray
    @param init: The init vector, entry sum(v_i * 2^i) is the output for v

    @type  inputs: list( BoolFunc )
    @param inputs: The function driving each LUT input, I0 first

    @rtype:   BoolFunc
    @returns: The function of the LUT output
    """
    width = 1 << len(inputs)
    bits = int_to_table(init, width) if isinstance(init, int) else np.asarray(init, np.uint8)
    if bits.shape[0] != width:
        raise ValueError(f"width mismatch, init has {bits.shape[0]} bits, expected {width}")

    def tree(level: int, offset: int) -> BoolFunc:
        if level == 0:
            return const(int(bits[offset]))
        half = 1 << (level - 1)
        low  = tree(level - 1, offset)
        high = tree(level - 1, offset + half)
        return ite(inputs[level - 1], high, low)

    return tree(len(inputs), 0)


# Function whose truth table is the given LUT init vector
def from_lut_init(init, input_vars: Sequence[Hashable], width: int | None = None) -> BoolFunc:
    expected = 1 << len(input_vars)
    if width is not None and width != expected:
        raise ValueError(f"width mismatch, init has {width} bits, expected {expected}")
    if isinstance(init, int) and init >> expected:
        raise ValueError(f"width mismatch, init does not fit in {expected} bits")
    return lut_function(init, [var(v) for v in input_vars])


# Order variables: explicit order first, the rest ascending
def order_variables(funcs: Iterable[BoolFunc], order: Sequence[Hashable] | None = None) -> list:
    support = frozenset().union(*(f.support for f in funcs))
    if order is None:
        return sorted(support, key=var_key)
    head = [v for v in order if v in support]
    rest = sorted(support.difference(head), key=var_key)
    return head + rest


# Truth tables of several functions over the same variables
def truth_tables(funcs: Sequence[BoolFunc], order: Sequence[Hashable]) -> list[ndarray]:
    count = len(order)
    if count > EXHAUSTIVE_LIMIT:
        raise ValueError(f"too many variables for a truth table: {count}")
    chunks = [[] for _ in funcs]
    for columns, size in _enumerate_chunks(order):
        values = fold(funcs, ColumnAlgebra(columns, size))
        for i, v in enumerate(values):
            chunks[i].append(np.asarray(v, dtype=np.uint8))
    return [np.concatenate(c) if len(c) > 1 else c[0] for c in chunks]


# Enumerate all input vectors chunk by chunk
def _enumerate_chunks(order: Sequence[Hashable]):
    count = len(order)
    total = 1 << count
    step  = min(total, 1 << CHUNK_BITS)
    for start in range(0, total, step):
        index = np.arange(start, start + step, dtype=np.int64)
        columns = {v: ((index >> i) & 1).astype(bool) for i, v in enumerate(order)}
        yield columns, step


# Outcome of an equivalence query
@dataclass(frozen=True)
class Equivalence:
    status         : str
    counterexample : dict | None = None

    def __bool__(self) -> bool:
        return self.status == EQUIVALENT

    @property
    def decided(self) -> bool:
        return self.status != UNDECIDED


class _BudgetExceeded(Exception):
    pass


# Algebra building BDD nodes in a dd manager
class _BddAlgebra:

    def __init__(self, context: 'BddContext'):
        self.context = context
        self.bdd     = context.bdd

    def const(self, value):  return self.bdd.true if value else self.bdd.false
    def var(self, name):     return self.bdd.var(self.context.name(name))
    def not_(self, a):       return self._check(~a)
    def and_(self, a, b):    return self._check(a & b)
    def or_(self, a, b):     return self._check(a | b)
    def xor(self, a, b):     return self._check(self.bdd.apply('xor', a, b))
    def ite(self, s, t, e):  return self._check(self.bdd.ite(s, t, e))

    def _check(self, node):
        if len(self.bdd) > self.context.budget:
            raise _BudgetExceeded()
        return node


# A BDD manager with a fixed variable order and a node budget
class BddContext:

    def __init__(self, variables: Sequence[Hashable], budget: int = NODE_BUDGET):
        self.bdd    = _bdd.BDD()
        self.budget = budget
        self.names: dict[Hashable, str] = {}
        self.vars:  dict[str, Hashable] = {}
        self.memo:  dict[BoolFunc, object] = {}
        for v in variables:
            self.name(v)

    # BDD variable name of a function variable, declared on first use
    def name(self, v: Hashable) -> str:
        if v not in self.names:
            n = f"x{len(self.names)}"
            self.bdd.declare(n)
            self.names[v] = n
            self.vars[n]  = v
        return self.names[v]

    # Build the BDD of a function, None when the budget is exceeded
    def build(self, f: BoolFunc):
        if f in self.memo:
            return self.memo[f]
        algebra = _BddAlgebra(self)
        memo = self.memo
        try:
            for node in postorder([f]):
                if node in memo:
                    continue
                op = node.op
                if op == BoolFunc.CONST:   value = algebra.const(node.key)
                elif op == BoolFunc.VAR:   value = algebra.var(node.key)
                elif op == BoolFunc.NOT:   value = algebra.not_(memo[node.args[0]])
                elif op == BoolFunc.AND:   value = algebra.and_(memo[node.args[0]], memo[node.args[1]])
                elif op == BoolFunc.OR:    value = algebra.or_(memo[node.args[0]], memo[node.args[1]])
                elif op == BoolFunc.XOR:   value = algebra.xor(memo[node.args[0]], memo[node.args[1]])
                else:
                    s, t, e = node.args
                    value = algebra.ite(memo[s], memo[t], memo[e])
                memo[node] = value
        except _BudgetExceeded:
            return None
        return memo[f]

    # Assignment satisfying a node, over function variables
    def pick(self, node) -> dict | None:
        found = self.bdd.pick(node)
        if found is None:
            return None
        return {self.vars[n]: int(bool(b)) for n, b in found.items()}

    # Variables a node depends on
    def support(self, node) -> frozenset:
        return frozenset(self.vars[n] for n in self.bdd.support(node))


# Decide equivalence and dependence with a shared budget and variable order
class EquivalenceChecker:
    """
    Decision procedure shared by a batch of queries.

    Queries with at most EXHAUSTIVE_LIMIT variables enumerate the truth
    table. Larger ones first search random vectors for a counterexample and
    then compare canonical BDDs built in the given variable order.
    """

    def __init__(self,
        order   : Sequence[Hashable] | None = None,
        budget  : int = NODE_BUDGET,
        samples : int = RANDOM_SAMPLES,
        seed    : int = 0):
        self.order   = list(order) if order is not None else None
        self.budget  = budget
        self.samples = samples
        self.rng     = np.random.default_rng(seed)
        self.context: BddContext | None = None

    def _context(self, funcs: Sequence[BoolFunc]) -> BddContext:
        if self.context is None:
            self.context = BddContext(order_variables(funcs, self.order), self.budget)
        return self.context

    def _random_columns(self, variables: Sequence[Hashable]) -> dict:
        bits = self.rng.integers(0, 2, size=(len(variables), self.samples)).astype(bool)
        return {v: bits[i] for i, v in enumerate(variables)}

    # Check f == g
    def check(self, f: BoolFunc, g: BoolFunc) -> Equivalence:
        if f is g:
            return Equivalence(EQUIVALENT)
        variables = order_variables([f, g], self.order)

        # exhaustive enumeration
        if len(variables) <= EXHAUSTIVE_LIMIT:
            for columns, size in _enumerate_chunks(variables):
                a, b = fold([f, g], ColumnAlgebra(columns, size))
                diff = first_difference(np.asarray(a, np.uint8), np.asarray(b, np.uint8))
                if diff >= 0:
                    return Equivalence(DIFFERENT, {v: int(columns[v][diff]) for v in variables})
            return Equivalence(EQUIVALENT)

        # randomized counterexample search
        columns = self._random_columns(variables)
        a, b = fold([f, g], ColumnAlgebra(columns, self.samples))
        diff = np.flatnonzero(np.asarray(a) != np.asarray(b))
        if diff.size:
            j = int(diff[0])
            return Equivalence(DIFFERENT, {v: int(columns[v][j]) for v in variables})

        # canonical forms
        context = self._context([f, g])
        u = context.build(f)
        w = context.build(g) if u is not None else None
        if u is None or w is None:
            log.info("boolfunc.undecided vars=%d budget=%d", len(variables), self.budget)
            return Equivalence(UNDECIDED)
        if u == w:
            return Equivalence(EQUIVALENT)
        found = context.pick(context.bdd.apply('xor', u, w)) or {}
        return Equivalence(DIFFERENT, {v: found.get(v, 0) for v in variables})

    # Check fs[i] == gs[i] for every i, stopping at the first difference
    def check_all(self, fs: Sequence[BoolFunc], gs: Sequence[BoolFunc]) -> Equivalence:
        if len(fs) != len(gs):
            return Equivalence(DIFFERENT)
        pairs = [(f, g) for f, g in zip(fs, gs) if f is not g]
        if not pairs:
            return Equivalence(EQUIVALENT)

        # one shared random pass rejects most wrong guesses
        variables = order_variables([h for p in pairs for h in p], self.order)
        if variables:
            columns = self._random_columns(variables)
            values = fold([h for p in pairs for h in p], ColumnAlgebra(columns, self.samples))
            for i in range(len(pairs)):
                diff = np.flatnonzero(np.asarray(values[2 * i]) != np.asarray(values[2 * i + 1]))
                if diff.size:
                    j = int(diff[0])
                    return Equivalence(DIFFERENT, {v: int(columns[v][j]) for v in variables})

        undecided = False
        for f, g in pairs:
            result = self.check(f, g)
            if result.status == DIFFERENT:
                return result
            undecided |= result.status == UNDECIDED
        return Equivalence(UNDECIDED if undecided else EQUIVALENT)

    # Exact support of a function
    def semantic_support(self, f: BoolFunc) -> frozenset:
        variables = order_variables([f], self.order)
        if not variables:
            return frozenset()
        if len(variables) <= EXHAUSTIVE_LIMIT:
            table = truth_tables([f], variables)[0]
            return frozenset(v for i, v in enumerate(variables) if depends_on(table, i))

        # variables witnessed by random flips, then the BDD for the rest
        found: set = set()
        columns = self._random_columns(variables)
        base = np.asarray(f.fold(ColumnAlgebra(columns, self.samples)))
        for v in variables:
            flipped = dict(columns)
            flipped[v] = ~columns[v]
            if np.any(np.asarray(f.fold(ColumnAlgebra(flipped, self.samples))) != base):
                found.add(v)
        if len(found) == len(variables):
            return frozenset(found)
        context = self._context([f])
        node = context.build(f)
        if node is None:
            log.info("boolfunc.support_undecided vars=%d budget=%d", len(variables), self.budget)
            return frozenset(variables)
        return frozenset(found) | context.support(node)

    # Does f depend on var
    def depends(self, f: BoolFunc, v: Hashable) -> bool:
        if v not in f.support:
            return False
        if f._semantic is None:
            f._semantic = self.semantic_support(f)
        return v in f._semantic


# Check f == g over the union of their supports
def equivalent(f: BoolFunc, g: BoolFunc,
               order: Sequence[Hashable] | None = None,
               budget: int = NODE_BUDGET) -> Equivalence:
    return EquivalenceChecker(order, budget).check(f, g)


# Shannon cofactor on one variable
def cofactor(f: BoolFunc, v: Hashable, value: int) -> BoolFunc:
    return substitute(f, {v: value})


# Number of output functions whose cofactors on var differ
def influence_count(outputs: Sequence[BoolFunc], v: Hashable,
                    checker: EquivalenceChecker | None = None) -> int:
    checker = checker or EquivalenceChecker()
    return sum(1 for f in outputs if checker.depends(f, v))
