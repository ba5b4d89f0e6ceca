"""Linear algebra over GF(2) on int bitsets.

A vector is an int whose bit j is coordinate j; a matrix is a list of such
row ints.  All routines are deterministic and return canonical (reduced
row echelon) bases so downstream output is reproducible.
"""

from typing import List, Optional


def rref(rows: List[int]) -> List[int]:
    """Reduced row echelon basis of the row space, pivots high bit first."""
    basis: List[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
            basis.sort(reverse=True)
    # back-substitute so each pivot appears in exactly one row
    for i in range(len(basis)):
        piv = basis[i].bit_length() - 1
        for j in range(len(basis)):
            if j != i and (basis[j] >> piv) & 1:
                basis[j] ^= basis[i]
    basis.sort(reverse=True)
    return basis


def rank(rows: List[int]) -> int:
    return len(rref(rows))


def reduce_vec(vec: int, basis: List[int]) -> int:
    """Residue of vec modulo the span of basis (basis need not be reduced)."""
    for b in rref(basis):
        vec = min(vec, vec ^ b)
    return vec


def in_span(vec: int, basis: List[int]) -> bool:
    return reduce_vec(vec, basis) == 0


def kernel(rows: List[int], ncols: int) -> List[int]:
    """Canonical basis of {x : row·x = 0 for every row}, x of width ncols."""
    basis: List[int] = []
    reduced = rref(rows)
    pivot_cols = {r.bit_length() - 1 for r in reduced}
    free_cols = [c for c in range(ncols) if c not in pivot_cols]
    for fc in free_cols:
        vec = 1 << fc
        for r in reduced:
            pc = r.bit_length() - 1
            if (r >> fc) & 1:
                vec |= 1 << pc
        basis.append(vec)
    return rref(basis)


def solve(rows: List[int], rhs: List[int], ncols: int) -> Optional[int]:
    """One solution x (width ncols) of row_i · x = rhs_i, or None."""
    aug = [(rows[i] << 1) | (rhs[i] & 1) for i in range(len(rows))]
    red = rref(aug)
    x = 0
    for r in red:
        if r == 1:
            return None
        pc = r.bit_length() - 1
        if (r & 1) and pc >= 1:
            x |= 1 << (pc - 1)
    # verify (handles non-pivot interactions)
    for i in range(len(rows)):
        if bin(rows[i] & x).count("1") % 2 != (rhs[i] & 1):
            return None
    return x


def intersect(basis_a: List[int], basis_b: List[int], ncols: int) -> List[int]:
    """Canonical basis of span(A) ∩ span(B) (Zassenhaus on bitsets)."""
    # rows (a, a) for a in A and (b, 0) for b in B; kernel projection trick:
    # eliminate on high block; rows with zero high block carry intersection
    # in the low block.
    stacked = [(a << ncols) | a for a in basis_a] + [b << ncols for b in basis_b]
    basis: List[int] = []
    out: List[int] = []
    for row in stacked:
        for b in basis:
            row = min(row, row ^ b)
        if row >> ncols:
            basis.append(row)
            basis.sort(reverse=True)
        elif row:
            out.append(row)
    return rref(out)


def dot(a: int, b: int) -> int:
    """GF(2) inner product."""
    return bin(a & b).count("1") & 1
