"""Global Selmer groups as F2 kernels of local restriction conditions.

A Selmer structure is: the image of the local connecting map at every place
of T, an explicitly twisted 2-dimensional space at each chain place, and the
unramified condition everywhere else.  The "ray" variant relaxes T to the
full local cohomology, which is what makes dimension bookkeeping across
chain extensions checkable by two independent routes.
"""

from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import f2
from .arith import (
    INFINITY,
    factor,
    smallest_nonresidue,
    square_class_vector,
    squarefree_mul,
)
from .curve import TwoTorsionCurve
from .localdescent import (
    LocalSubspace,
    local_image,
    pair_width,
    twisted_pair_subspace,
    unramified_subspace,
)


class ConsistencyViolation(Exception):
    """Two independent computations of the same invariant disagree."""


def pi_value(p: int, bit: int) -> int:
    """The uniformizer choice at p: p itself, or p times a unit nonsquare."""
    return p if bit == 0 else p * smallest_nonresidue(p)


@dataclass(frozen=True)
class SelmerStructureSpec:
    """T places, chain of (prime, uniformizer bit), and the mode."""

    curve: TwoTorsionCurve
    T: Tuple[int, ...]
    chain: Tuple[Tuple[int, int], ...] = ()
    mode: str = "standard"  # "standard" or "ray"

    def __post_init__(self):
        if self.mode not in ("standard", "ray"):
            raise ValueError(f"unknown mode {self.mode!r}")
        tset = set(self.T)
        chain_primes = [p for p, _ in self.chain]
        if len(set(chain_primes)) != len(chain_primes):
            raise ValueError("repeated chain prime")
        if tset & set(chain_primes):
            raise ValueError("chain prime inside T")

    def extend(self, p: int, bit: int) -> "SelmerStructureSpec":
        return replace(self, chain=self.chain + ((p, bit),))

    def truncate(self, length: int) -> "SelmerStructureSpec":
        return replace(self, chain=self.chain[:length])

    def as_mode(self, mode: str) -> "SelmerStructureSpec":
        return replace(self, mode=mode)


@dataclass(frozen=True)
class SelmerElement:
    """A pair of squarefree integers modulo squares."""

    d1: int
    d2: int

    def __mul__(self, other: "SelmerElement") -> "SelmerElement":
        return SelmerElement(
            squarefree_mul(self.d1, other.d1), squarefree_mul(self.d2, other.d2)
        )

    def is_trivial(self) -> bool:
        return self.d1 == 1 and self.d2 == 1


@dataclass(frozen=True)
class SelmerGroup:
    spec: SelmerStructureSpec
    gens: Tuple[int, ...]
    exponent_basis: Tuple[int, ...]
    basis: Tuple[SelmerElement, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def member(self, el: SelmerElement) -> bool:
        vec = _element_to_exponents(el, self.gens)
        if vec is None:
            return False
        return f2.in_span(vec, list(self.exponent_basis))

    def elements(self) -> List[SelmerElement]:
        out = [SelmerElement(1, 1)]
        for b in self.basis:
            out += [x * b for x in out]
        return out


def support_generators(spec: SelmerStructureSpec) -> Tuple[int, ...]:
    odd = sorted(
        {v for v in spec.T if v not in (INFINITY, 2)} | {p for p, _ in spec.chain}
    )
    return (-1, 2, *odd)


def _element_to_exponents(el: SelmerElement, gens: Sequence[int]) -> Optional[int]:
    """Exponent bitvector of (d1, d2) over gens, or None if unsupported."""
    vec = 0
    for c, d in enumerate((el.d1, el.d2)):
        if d == 0:
            return None
        n = d
        for g, gen in enumerate(gens):
            if gen == -1:
                if n < 0:
                    n = -n
                    vec |= 1 << (c * len(gens) + g)
            else:
                e = 0
                while n % gen == 0:
                    n //= gen
                    e += 1
                if e % 2:
                    vec |= 1 << (c * len(gens) + g)
        if n != 1:
            return None
    return vec


def _exponents_to_element(vec: int, gens: Sequence[int]) -> SelmerElement:
    ds = []
    for c in (0, 1):
        d = 1
        for g, gen in enumerate(gens):
            if (vec >> (c * len(gens) + g)) & 1:
                d *= gen
        ds.append(d)
    return SelmerElement(ds[0], ds[1])


def local_condition_at(
    spec: SelmerStructureSpec, v: int
) -> Optional[LocalSubspace]:
    """The condition subspace at v, or None for an unconstrained (full) place."""
    chain_map = dict(spec.chain)
    if v in chain_map:
        return twisted_pair_subspace(spec.curve, v, pi_value(v, chain_map[v]))
    if v in spec.T:
        if spec.mode == "ray":
            return None
        return local_image(spec.curve, v)
    if v == INFINITY:
        raise ValueError("the real place must belong to T")
    return unramified_subspace(v)


def restriction_rows(
    gens: Sequence[int], v: int, condition: LocalSubspace
) -> List[int]:
    """Ambient F2 constraints expressing res_v(element) ∈ condition."""
    w = pair_width(v)
    lw = w // 2
    gen_vecs = [square_class_vector(g, v) for g in gens]
    functionals = f2.kernel(list(condition.basis), w)
    rows = []
    for phi in functionals:
        row = 0
        for c in (0, 1):
            for g, gv in enumerate(gen_vecs):
                if f2.dot(phi >> (c * lw), gv) & 1:
                    row |= 1 << (c * len(gens) + g)
        rows.append(row)
    return rows


def structure_group(spec: SelmerStructureSpec) -> SelmerGroup:
    """The Selmer group of the structure, with a canonical basis."""
    gens = support_generators(spec)
    n = 2 * len(gens)
    rows: List[int] = []
    places = list(spec.T) + [p for p, _ in spec.chain]
    for v in places:
        cond = local_condition_at(spec, v)
        if cond is None:
            continue
        rows += restriction_rows(gens, v, cond)
    basis_vecs = f2.kernel(rows, n)
    elements = tuple(_exponents_to_element(v, gens) for v in basis_vecs)
    return SelmerGroup(spec, gens, tuple(basis_vecs), elements)


def sel2(
    curve: TwoTorsionCurve, hint_primes: Iterable[int] = ()
) -> SelmerGroup:
    """The 2-Selmer group of E/Q: image conditions at ∞, 2 and every prime
    of bad reduction, unramified elsewhere."""
    bad = curve.bad_primes(hint_primes=hint_primes)
    T = (INFINITY, 2) + tuple(p for p in bad if p != 2)
    return structure_group(SelmerStructureSpec(curve, T))


def restriction_dim(group: SelmerGroup, v: int) -> int:
    """Dimension of res_v(group) inside the local pair space."""
    vecs = [
        square_class_vector(b.d1, v)
        | (square_class_vector(b.d2, v) << (pair_width(v) // 2))
        for b in group.basis
    ]
    return f2.rank(vecs)


def restriction_space(group: SelmerGroup, v: int) -> LocalSubspace:
    vecs = [
        square_class_vector(b.d1, v)
        | (square_class_vector(b.d2, v) << (pair_width(v) // 2))
        for b in group.basis
    ]
    return LocalSubspace.spanned_by(v, vecs)


def rank_change(
    spec: SelmerStructureSpec,
    p: int,
    bit: int,
    check: bool = True,
) -> int:
    """Dimension change when the chain is extended by (p, bit).

    Computed directly from the two kernels, and (when check is set)
    re-derived from the local case analysis: +2 when the old group is
    locally invisible at p and the relaxed group restricts exactly onto the
    new twisted condition, -2 when the old group restricts onto a full
    2-dimensional space, 0 otherwise.  Disagreement raises.
    """
    g_old = structure_group(spec)
    g_new = structure_group(spec.extend(p, bit))
    n_direct = g_new.dim - g_old.dim
    if check:
        res_dim = restriction_dim(g_old, p)
        if res_dim == 2:
            n_lemma = -2
        elif res_dim == 0:
            relaxed = _relaxed_group(spec, p)
            a_space = restriction_space(relaxed, p)
            l_new = twisted_pair_subspace(spec.curve, p, pi_value(p, bit))
            n_lemma = 2 if a_space.basis == l_new.basis else 0
        else:
            n_lemma = 0
        if n_lemma != n_direct:
            raise ConsistencyViolation(
                f"rank change at {p}: direct {n_direct}, local analysis {n_lemma}"
            )
    return n_direct


def _relaxed_group(spec: SelmerStructureSpec, p: int) -> SelmerGroup:
    """Group of the structure with the full condition at the new place p."""
    gens = support_generators(spec.extend(p, 0))
    n = 2 * len(gens)
    rows: List[int] = []
    for v in list(spec.T) + [q for q, _ in spec.chain]:
        cond = local_condition_at(spec, v)
        if cond is None:
            continue
        rows += restriction_rows(gens, v, cond)
    basis_vecs = f2.kernel(rows, n)
    elements = tuple(_exponents_to_element(v, gens) for v in basis_vecs)
    return SelmerGroup(spec, gens, tuple(basis_vecs), elements)


def twist_chain_identity(
    curve: TwoTorsionCurve,
    T: Tuple[int, ...],
    d: int,
    d_primes: Sequence[int],
) -> Tuple[int, int]:
    """dim Sel2(E^d) and the chain-structure dimension it must equal minus 2.

    d must be a squarefree twist, locally a square at every place of T, with
    d_primes its (verified) odd prime factors.  Returns the pair of
    dimensions (sel2 of the twist, structure group over the first r-1
    ramified places with uniformizers cut out by d).
    """
    from .arith import is_local_square, jacobi_symbol

    for v in T:
        if not is_local_square(d, v):
            raise ValueError(f"twist is not a local square at {v}")
    ram = sorted(d_primes)
    if d < 0 or any(d % (q * q) == 0 for q in ram):
        raise ValueError("twist must be positive and squarefree here")
    chain = []
    for q in ram[:-1]:
        cof = d // q
        bit = 0 if jacobi_symbol(cof, q) == 1 else 1
        chain.append((q, bit))
    spec = SelmerStructureSpec(curve, T, tuple(chain))
    g = structure_group(spec)
    twist_group = sel2(curve.quadratic_twist(d), hint_primes=list(d_primes))
    return twist_group.dim, g.dim


def diag_dims(spec: SelmerStructureSpec) -> Tuple[int, int, int]:
    """(dim V1, dim V2, dim V3) of the ray-mode group: elements of the form
    (x, 1), (1, x), and (x, x) respectively."""
    g = structure_group(spec.as_mode("ray"))
    ng = len(g.gens)
    n = 2 * ng
    basis = list(g.exponent_basis)
    low = [1 << i for i in range(ng)]
    high = [1 << (ng + i) for i in range(ng)]
    diag = [(1 << i) | (1 << (ng + i)) for i in range(ng)]
    return (
        len(f2.intersect(basis, low, n)),
        len(f2.intersect(basis, high, n)),
        len(f2.intersect(basis, diag, n)),
    )


def _span(basis: Sequence[int]) -> List[int]:
    out = [0]
    for b in basis:
        out += [x ^ b for x in out]
    return out


def project_away(
    el: SelmerElement, companions: Sequence[Tuple[int, int]]
) -> SelmerElement:
    """Strip companion classes: for each (prime, companion class value) with
    odd valuation in a coordinate, multiply that coordinate by the class."""
    d1, d2 = el.d1, el.d2
    for p, cls in companions:
        if d1 % p == 0:
            d1 = squarefree_mul(d1, cls)
        if d2 % p == 0:
            d2 = squarefree_mul(d2, cls)
    return SelmerElement(d1, d2)
