"""
    Common kernels to process truth tables.

    A truth table over n ordered variables is an array of 2^n uint8 values
    where entry `sum(v_i * 2^i)` holds the output for the input vector v.
"""

import numpy as np

from numba import njit
from numpy import ndarray


# Expand an integer bit-vector into a truth table
def int_to_table(value: int, width: int) -> ndarray:
    """
    Expand a bit-vector into an array of bits, bit 0 first.

    @type  value: int
    @param value: The bit-vector (e.g. a LUT init vector)

    @type  width: int
    @param width: Number of bits to expand

    @rtype:   ndarray (width) uint8
    @returns: The bits of the vector
    """
    raw = value.to_bytes((width + 7) // 8, 'little')
    bits = np.unpackbits(np.frombuffer(raw, np.uint8), bitorder='little')
    return bits[:width].copy()


# Fold a truth table back into an integer bit-vector
def table_to_int(table: ndarray) -> int:
    packed = np.packbits(table.astype(np.uint8), bitorder='little')
    return int.from_bytes(packed.tobytes(), 'little')


# Compute the Shannon cofactor of a truth table
@njit(fastmath=True)
def cofactor_table(table: ndarray, index: int, value: int) -> ndarray:
    """
    Restrict a variable of the truth table to a constant.

    @type  table: ndarray (2^n) uint8
    @param table: The truth table

    @type  index: int
    @param index: Position of the variable to restrict

    @type  value: int
    @param value: Value assigned to the variable (0 or 1)

    @rtype:   ndarray (2^(n-1)) uint8
    @returns: The truth table over the remaining variables
    """
    size = table.shape[0] // 2
    low  = 1 << index
    out  = np.zeros(size, np.uint8)
    for j in range(size):
        high = (j >> index) << (index + 1)
        rest = j & (low - 1)
        if value != 0:
            out[j] = table[high | low | rest]
        else:
            out[j] = table[high | rest]
    return out


# Check if a truth table depends on one of its variables
@njit(fastmath=True)
def depends_on(table: ndarray, index: int) -> bool:
    low = 1 << index
    for j in range(table.shape[0]):
        if (j & low) == 0 and table[j] != table[j | low]:
            return True
    return False


# Binary entropy of the output distribution of a truth table
@njit(fastmath=True)
def table_entropy(table: ndarray) -> float:
    ones = 0
    for j in range(table.shape[0]):
        ones += table[j]
    p = ones / table.shape[0]
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))


# Locate the first row where two truth tables differ
@njit(fastmath=True)
def first_difference(a: ndarray, b: ndarray) -> int:
    for j in range(a.shape[0]):
        if a[j] != b[j]:
            return j
    return -1


# Evaluate a LUT over many input vectors at once
@njit(fastmath=True)
def lut_lookup(init: ndarray, columns: ndarray) -> ndarray:
    """
    Look up the LUT output for a batch of input vectors.

    @type  init: ndarray (2^k) uint8
    @param init: The LUT init vector expanded into bits, bit 0 first

    @type  columns: ndarray (k, m) uint8
    @param columns: Value of each LUT input (I0 first) for m vectors

    @rtype:   ndarray (m) uint8
    @returns: The LUT output for each vector
    """
    count = columns.shape[1]
    out = np.zeros(count, np.uint8)
    for j in range(count):
        index = 0
        for i in range(columns.shape[0]):
            index |= (columns[i, j] & 1) << i
        out[j] = init[index]
    return out
