"""
    Arithmetic model library.

    Every model gives its expected output bits over operand variables (the
    reference for equivalence checking) and its integer semantics (the
    reference for simulation and for word folding in traces).
"""

from dataclasses import dataclass, asdict

from logic.boolfunc import BoolFunc
from logic.words    import (Word, add, add_const, subtract, negate, const_mul,
                            less_than, less_equal, equal, to_signed)


ADDITION    = 'addition'
SUBTRACTION = 'subtraction'
COUNTER     = 'counter'
NEGATION    = 'negation'
CONST_MUL   = 'const-mul'
COMPARATOR  = 'comparator'
UNKNOWN     = 'unknown'

# most specific first
MODEL_PRIORITY = (COUNTER, NEGATION, CONST_MUL, ADDITION, SUBTRACTION, COMPARATOR)
IDENTITIES     = MODEL_PRIORITY + (UNKNOWN,)

RELATIONS = ('eq', 'lt', 'le')


# A model with its parameters
@dataclass(frozen=True)
class ArithmeticModel:
    identity  : str
    width     : int
    n         : int | None = None
    c         : int | None = None
    relation  : str | None = None
    signed    : bool = False
    carry_out : bool = False

    def __post_init__(self):
        if self.identity not in IDENTITIES:
            raise ValueError(f"unknown model {self.identity}")
        if self.identity == COUNTER and not self.n:
            raise ValueError("counter increment must not be 0")
        if self.identity == CONST_MUL and not self.c:
            raise ValueError("multiplier must not be 0")
        if self.identity == COMPARATOR and self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation}")

    @property
    def priority(self) -> int:
        return MODEL_PRIORITY.index(self.identity) if self.identity in MODEL_PRIORITY else len(MODEL_PRIORITY)

    # Number of operands
    @property
    def arity(self) -> int:
        if self.identity in (ADDITION, SUBTRACTION, COMPARATOR):
            return 1 if self.n is not None else 2
        return 1

    # Number of output bits
    @property
    def output_width(self) -> int:
        if self.identity == COMPARATOR:
            return 1
        return self.width + (1 if self.carry_out else 0)

    # Increment as a signed value, counters counting down are negative
    @property
    def step(self) -> int | None:
        return None if self.n is None else to_signed(self.n, self.width)

    # Expected output bits
    def bits(self, a: Word, b: Word | None = None) -> Word:
        ident = self.identity
        if ident in (COUNTER, ADDITION) and self.n is not None:
            s, carry = add_const(a, self.n)
            return s + [carry] if self.carry_out else s
        if ident == ADDITION:
            s, carry = add(a, b)
            return s + [carry] if self.carry_out else s
        if ident == SUBTRACTION:
            s, carry = subtract(a, b)
            return s + [carry] if self.carry_out else s
        if ident == NEGATION:
            return negate(a)
        if ident == CONST_MUL:
            return const_mul(a, self.c)
        if ident == COMPARATOR:
            if self.relation == 'eq':
                return [equal(a, b)]
            if self.relation == 'lt':
                return [less_than(a, b, self.signed)]
            return [less_equal(a, b, self.signed)]
        raise ValueError(f"model {ident} has no bits")

    # Integer semantics over the output bits
    def evaluate(self, a: int, b: int = 0) -> int:
        width = self.width
        mask = (1 << width) - 1
        full = (1 << self.output_width) - 1
        a &= mask
        b &= mask
        ident = self.identity
        if ident in (COUNTER, ADDITION) and self.n is not None:
            return (a + self.n) & full
        if ident == ADDITION:
            return (a + b) & full
        if ident == SUBTRACTION:
            return (a + (~b & mask) + 1) & full
        if ident == NEGATION:
            return -a & mask
        if ident == CONST_MUL:
            return (self.c * a) & mask
        if ident == COMPARATOR:
            if self.signed:
                a, b = to_signed(a, width), to_signed(b, width)
            if self.relation == 'eq':
                return int(a == b)
            if self.relation == 'lt':
                return int(a < b)
            return int(a <= b)
        raise ValueError(f"model {ident} has no semantics")

    # Readable form, e.g. "A + B" or "A - 1"
    def describe(self) -> str:
        ident = self.identity
        if ident in (COUNTER, ADDITION) and self.n is not None:
            step = self.step
            return f"A - {-step}" if step < 0 else f"A + {step}"
        if ident == ADDITION:
            return "A + B"
        if ident == SUBTRACTION:
            return "A - B"
        if ident == NEGATION:
            return "-A"
        if ident == CONST_MUL:
            return f"{self.c} * A"
        if ident == COMPARATOR:
            op = {'eq': '==', 'lt': '<', 'le': '<='}[self.relation]
            return f"A {op} B" + (" (signed)" if self.signed else "")
        return "?"

    def to_dict(self) -> dict:
        doc = {k: v for k, v in asdict(self).items() if v is not None}
        doc['text'] = self.describe()
        return doc

    @staticmethod
    def from_dict(doc: dict) -> 'ArithmeticModel':
        return ArithmeticModel(**{k: v for k, v in doc.items() if k != 'text'})


# Value of constant bits, None when one of them is not constant
def _constant_value(bits: list[BoolFunc]) -> int | None:
    value = 0
    for i, f in enumerate(bits):
        if not f.is_const:
            return None
        value |= f.value << i
    return value


# Models worth checking for one operand
def unary_models(outputs: list[BoolFunc], a: list, feedback: bool) -> list[ArithmeticModel]:
    """
    Propose single-operand models, constants recovered by evaluation.

    The increment n is the output at A = 0, the multiplier c the output at
    A = 1. Counters need a feedback path, otherwise A + n is an addition
    with a constant.

    @type  outputs: list( BoolFunc )
    @param outputs: Output functions, bit 0 first

    @type  a: list
    @param a: Operand variables, bit 0 first

    @type  feedback: bool
    @param feedback: Whether the outputs feed the operand back

    @rtype:   list( ArithmeticModel )
    @returns: Models in priority order
    """
    width = len(a)
    carry_out = len(outputs) == width + 1
    low = outputs[:width]
    at_zero = _constant_value([f.substitute({v: 0 for v in a}) for f in low])
    at_one  = _constant_value([f.substitute({v: int(i == 0) for i, v in enumerate(a)}) for f in low])

    out = []
    if at_zero and feedback:
        out.append(ArithmeticModel(COUNTER, width, n=at_zero, carry_out=carry_out))
    if not carry_out:
        out.append(ArithmeticModel(NEGATION, width))
        if at_one is not None and at_zero == 0 and at_one not in (0, 1):
            out.append(ArithmeticModel(CONST_MUL, width, c=at_one))
    if at_zero and not feedback:
        out.append(ArithmeticModel(ADDITION, width, n=at_zero, carry_out=carry_out))
    return out


# Models worth checking for two operands
def binary_models(outputs: list[BoolFunc], width: int) -> list[ArithmeticModel]:
    if len(outputs) == 1:
        return [ArithmeticModel(COMPARATOR, width, relation=r, signed=s)
                for r in RELATIONS for s in (False, True) if not (r == 'eq' and s)]
    carry_out = len(outputs) == width + 1
    return [ArithmeticModel(ADDITION, width, carry_out=carry_out),
            ArithmeticModel(SUBTRACTION, width, carry_out=carry_out)]
