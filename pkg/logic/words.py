"""
    Bit-blasted word operations.

    A word is a list of BoolFunc, bit 0 (LSB) first. These are the reference
    models that arithmetic candidates are checked against.
"""

from typing         import Hashable, Sequence
from logic.boolfunc import BoolFunc, ZERO, ONE, const, var, not_, and_, or_, xor, xnor, ite


Word = list[BoolFunc]


# Word of variables
def word_vars(names: Sequence[Hashable]) -> Word:
    return [var(n) for n in names]


# Word holding a constant
def const_word(value: int, width: int) -> Word:
    return [const((value >> i) & 1) for i in range(width)]


# Bitwise complement
def invert(a: Word) -> Word:
    return [not_(x) for x in a]


# Ripple-carry addition, returns the sum and the carry out
def add(a: Word, b: Word, carry_in: BoolFunc = ZERO) -> tuple[Word, BoolFunc]:
    if len(a) != len(b):
        raise ValueError(f"operand widths differ: {len(a)} and {len(b)}")
    out: Word = []
    carry = carry_in
    for x, y in zip(a, b):
        half = xor(x, y)
        out.append(xor(half, carry))
        carry = or_(and_(x, y), and_(carry, half))
    return out, carry


# A - B as A + ~B + 1, the carry out is the "no borrow" flag
def subtract(a: Word, b: Word) -> tuple[Word, BoolFunc]:
    return add(a, invert(b), ONE)


# Two's complement negation
def negate(a: Word) -> Word:
    return add(invert(a), const_word(0, len(a)), ONE)[0]


# Add a constant
def add_const(a: Word, n: int) -> tuple[Word, BoolFunc]:
    return add(a, const_word(n, len(a)))


# Multiply by a constant, truncated to the word width
def const_mul(a: Word, c: int) -> Word:
    width = len(a)
    acc = const_word(0, width)
    for k in range(width):
        if (c >> k) & 1:
            shifted = [ZERO] * k + a[:width - k]
            acc = add(acc, shifted)[0]
    return acc


# Unsigned or signed A < B
def less_than(a: Word, b: Word, signed: bool = False) -> BoolFunc:
    if signed:
        a = a[:-1] + [not_(a[-1])]
        b = b[:-1] + [not_(b[-1])]
    return not_(subtract(a, b)[1])


# Unsigned or signed A <= B
def less_equal(a: Word, b: Word, signed: bool = False) -> BoolFunc:
    return not_(less_than(b, a, signed))


# A == B
def equal(a: Word, b: Word) -> BoolFunc:
    return and_(*(xnor(x, y) for x, y in zip(a, b)))


# Select between two words
def mux(s: BoolFunc, a: Word, b: Word) -> Word:
    return [ite(s, y, x) for x, y in zip(a, b)]


# Integer held by a list of bits, bit 0 first
def bits_to_int(bits: Sequence[int]) -> int:
    value = 0
    for i, b in enumerate(bits):
        value |= (int(b) & 1) << i
    return value


# Bits of an integer, bit 0 first
def int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


# Interpret an unsigned value as two's complement
def to_signed(value: int, width: int) -> int:
    value &= (1 << width) - 1
    return value - (1 << width) if value >> (width - 1) else value
