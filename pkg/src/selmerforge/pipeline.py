"""The end-to-end rank-1 machine.

Starting from a 3-generic curve, the pipeline arranges a parity pre-twist,
builds an auxiliary twist kappa whose Selmer structure has a prescribed
five-element basis ramified at five split-multiplicative witness places,
derives four affine linear forms whose simultaneous prime values complete
kappa to a suitable twist t, searches a box for such a prime quadruple, and
assembles a certificate: dim Sel2(E^t) = 3 together with an explicitly
constructed non-torsion rational point, so that rank E^t = 1 exactly.

Every "choose a prime such that ..." step compiles to quadratic-symbol
demands for the constrained prime search; every stage postcondition is
re-verified by recomputation, and failures name the stage and constraint.
"""

import json
import logging
import sys
from dataclasses import dataclass
from itertools import permutations
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import _kernels, f2
from .arith import (
    INFINITY,
    PrimeSearchError,
    SymbolConstraint,
    crt,
    factor,
    find_prime,
    hilbert_symbol,
    is_local_square,
    is_prime,
    jacobi_symbol,
    small_primes,
    smallest_nonresidue,
    square_class_at,
    val,
)
from .curve import TwoTorsionCurve, is_nontorsion
from .finfield import SquareSystemInstance, solve_square_system
from .genericity import GenericityFailure, construct_3generic, is_n_generic
from .localdescent import (
    LocalSubspace,
    local_image,
    pair_vec,
    twisted_pair_subspace,
)
from .rootnumber import check_parity_twist_prime
from .selmer import (
    ConsistencyViolation,
    SelmerElement,
    SelmerStructureSpec,
    _element_to_exponents,
    _exponents_to_element,
    pi_value,
    project_away,
    rank_change,
    sel2,
    structure_group,
    support_generators,
    twist_chain_identity,
)

import gmpy2
import numpy as np

logger = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# configuration and failure types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    """All search bounds and the seed; serialized into certificates."""

    seed: int = 0
    genericity_prime_bound: int = 10**6
    # prime searches: at most this many folded demands stay as filter checks;
    # the rest are absorbed into the progression modulus.
    max_unfolded_demands: int = 26
    # entries of an arithmetic progression scanned before giving up
    progression_budget: int = 1 << 34
    # candidate primes retried per stage step before the stage fails
    stage_retry_budget: int = 12
    # quadruple scan
    sieve_bound: int = 1 << 24
    shell_width: int = 1 << 16
    box_bound: int = 1 << 25

    def trust_base(self) -> Dict:
        return {
            "primalityMode": "mr-deterministic<3.3e24;bpsw+mr64-above",
            "searchBounds": {
                "genericityPrimeBound": self.genericity_prime_bound,
                "maxUnfoldedDemands": self.max_unfolded_demands,
                "progressionBudget": self.progression_budget,
                "stageRetryBudget": self.stage_retry_budget,
                "sieveBound": self.sieve_bound,
                "shellWidth": self.shell_width,
                "boxBound": self.box_bound,
            },
            "seed": self.seed,
        }


def ensure_text_int_capacity(bits: int) -> None:
    """Raise the interpreter's int<->str conversion guard enough to print or
    parse an integer of the given bit length (certificates carry the twist t,
    which runs to thousands of digits)."""
    digits = bits // 3 + 100
    if sys.get_int_max_str_digits() < digits:
        sys.set_int_max_str_digits(digits)


class StageFailure(Exception):
    """A construction stage exhausted its search or lost a postcondition."""

    def __init__(self, stage: str, reason: str):
        self.stage = stage
        self.reason = reason
        super().__init__(f"[{stage}] {reason}")


class InconsistentDemands(Exception):
    """A symbol-demand set has no solution (parity conflict)."""


class QuadrupleSearchError(Exception):
    """The quadruple box was exhausted; carries the scan statistics."""

    def __init__(self, stats: Dict):
        self.stats = stats
        super().__init__(f"quadruple box exhausted: {stats}")


# --------------------------------------------------------------------------
# demand compilation: constrained prime search
# --------------------------------------------------------------------------
#
# A demand on the searched prime p is either
#   ("sym", x, eps): jacobi(x, p) == eps      (x a nonzero integer), or
#   ("res", v, eps): jacobi(p, v) == eps      (v an odd prime).
# With p's residue class mod 8 fixed, both reduce to F2-linear equations over
# the bits b_v = [p is a nonsquare mod v].  Equations over the smallest
# moduli are folded into the progression (a fixed residue class mod v); the
# rest stay as runtime symbol checks for the progression filter.


def _bit(eps: int) -> int:
    return 0 if eps == 1 else 1


def _recip_bit(v: int, mod8: int) -> int:
    """Parity flip between jacobi(v, p) and jacobi(p, v) for p = mod8 (8)."""
    return (((v - 1) // 2) % 2) * (((mod8 - 1) // 2) % 2) % 2


def _neg_one_bit(mod8: int) -> int:
    return 1 if mod8 % 4 == 3 else 0


def _two_bit(mod8: int) -> int:
    return 1 if mod8 % 8 in (3, 5) else 0


def _demand_equations(
    demands: Sequence[Tuple[str, int, int]],
    mod8: int,
    hint_primes: Sequence[int],
) -> List[Tuple[frozenset, int]]:
    """Normalize demands to (odd prime support, target parity) equations."""
    eqs: List[Tuple[frozenset, int]] = []
    for kind, x, eps in demands:
        t = _bit(eps)
        if kind == "res":
            eqs.append((frozenset([x]), t))
            continue
        if kind != "sym":
            raise ValueError(f"unknown demand kind {kind!r}")
        if x == 0:
            raise ValueError("demand on zero")
        fac = factor(x, hint_primes=hint_primes)
        if fac.unit < 0:
            t ^= _neg_one_bit(mod8)
        support = set()
        for q, e in fac.factors:
            if e % 2 == 0:
                continue
            if q == 2:
                t ^= _two_bit(mod8)
            else:
                # jacobi(q, p) = jacobi(p, q) * reciprocity correction
                t ^= _recip_bit(q, mod8)
                support.add(q)
        eqs.append((frozenset(support), t))
    return eqs


def _satisfiable(eqs: List[Tuple[frozenset, int]]) -> bool:
    """GF(2) solvability of the parity system."""
    cols: Dict[int, int] = {}
    rows = []
    for support, t in eqs:
        row = 0
        for v in support:
            row |= 1 << cols.setdefault(v, len(cols))
        rows.append((row, t))
    n = len(cols)
    a_rows = [r for r, _ in rows]
    ab_rows = [r | (t << n) for r, t in rows]
    return f2.rank(a_rows) == f2.rank(ab_rows)


def _fold_equations(
    eqs: List[Tuple[frozenset, int]], max_unfolded: int
) -> Tuple[Dict[int, int], List[Tuple[frozenset, int]]]:
    """Assign symbol bits for the smallest moduli until few equations remain.

    Each assignment is checked to keep the whole system solvable, so folding
    never manufactures a conflict.  Returns (assigned bits per modulus,
    remaining equations over unassigned moduli); raises InconsistentDemands
    when the demands themselves have no common solution.
    """
    eqs = list(eqs)
    assigned: Dict[int, int] = {}

    def simplify() -> None:
        nonlocal eqs
        out = []
        seen = set()
        for support, t in eqs:
            kept = frozenset(v for v in support if v not in assigned)
            for v in support - kept:
                t ^= assigned[v]
            if not kept:
                if t:
                    raise InconsistentDemands("conflicting symbol demands")
                continue
            key = (kept, t)
            if key not in seen:
                seen.add(key)
                out.append(key)
        eqs = out

    if not _satisfiable(eqs):
        raise InconsistentDemands("conflicting symbol demands")
    simplify()
    while len(eqs) > max_unfolded:
        v = min(min(s) for s, _ in eqs)
        bit = next((t for s, t in eqs if s == frozenset([v])), 0)
        if not _satisfiable(
            [(s, t) for s, t in eqs if v not in s]
            + [(s - {v}, t ^ bit) for s, t in eqs if v in s]
        ):
            bit ^= 1
        assigned[v] = bit
        simplify()
    return assigned, eqs


def _search_prime(
    demands: Sequence[Tuple[str, int, int]],
    config: PipelineConfig,
    mod8: int = 1,
    exclude: Iterable[int] = (),
    hint_primes: Sequence[int] = (),
) -> int:
    """Smallest prime ≡ mod8 (8) meeting all demands, within budget."""
    eqs = _demand_equations(demands, mod8, hint_primes)
    assigned, remaining = _fold_equations(eqs, config.max_unfolded_demands)
    congruences = [(mod8, 8)]
    for v, bit in sorted(assigned.items()):
        congruences.append((1 if bit == 0 else smallest_nonresidue(v), v))
    r, m = crt(congruences)
    filter_demands = []
    for support, t in remaining:
        c = 1
        for v in support:
            c *= v
            t ^= _recip_bit(v, mod8)
        filter_demands.append((c, 1 if t == 0 else -1))
    bound = r + m * config.progression_budget
    return find_prime(
        SymbolConstraint(r, m, tuple(sorted(filter_demands))),
        exclude=exclude,
        bound=bound,
    )


# --------------------------------------------------------------------------
# witness places and their local displays
# --------------------------------------------------------------------------

# role of the six witness places: which coefficient difference each divides
_WITNESS_ROLES = ("alpha", "beta", "gamma", "beta", "alpha", "gamma")
# coordinate occupancy of the class carried at each witness index (1-based):
# "both" = the class enters both coordinates, "first"/"second" = one of them
_WITNESS_SHAPES = ("both", "first", "second", "first", "both", "second")

# Legendre-symbol targets: rows = the four linear-form values, columns = the
# five witness places carrying the class basis.
_FORM_TARGETS = (
    (-1, -1, +1, +1, +1),
    (-1, +1, -1, -1, +1),
    (+1, -1, -1, +1, -1),
    (+1, +1, +1, -1, -1),
)

# required invariant-sum bits of the class-basis components against the first
# three quadruple primes (None = unconstrained)
_INVARIANT_TARGETS = (
    (1, 1, 1, 0, 0, 0, 0, 0, 0, 0),
    (None, None, None, None, 0, 1, 1, 0, 0, 0),
    (None, None, None, None, None, None, None, None, 1, 1),
)


def _difference(curve: TwoTorsionCurve, role: str) -> int:
    return {"alpha": curve.alpha, "beta": curve.beta, "gamma": curve.gamma}[role]


def _display_space(curve: TwoTorsionCurve, w: int, role: str) -> LocalSubspace:
    """The expected local image at a witness place of the given role."""
    eps = smallest_nonresidue(w)
    vecs = {
        "alpha": [pair_vec(w, w, w), pair_vec(eps, eps, w)],
        "beta": [pair_vec(w, 1, w), pair_vec(eps, 1, w)],
        "gamma": [pair_vec(1, w, w), pair_vec(1, eps, w)],
    }[role]
    return LocalSubspace.spanned_by(w, vecs)


def select_witnesses(curve: TwoTorsionCurve, witness) -> Tuple[int, ...]:
    """The six witness places (two smallest per coefficient difference),
    ordered by role pattern alpha, beta, gamma, beta, alpha, gamma."""
    by_pair = [sorted(ps) for ps in witness.primes_by_pair]
    for ps in by_pair:
        if len(ps) < 2:
            raise StageFailure("witnesses", "need two witness primes per difference")
    alpha_ps, beta_ps, gamma_ps = by_pair
    ws = (alpha_ps[0], beta_ps[0], gamma_ps[0], beta_ps[1], alpha_ps[1], gamma_ps[1])
    for w, role in zip(ws, _WITNESS_ROLES):
        if w % 8 != 1 or w <= 5:
            raise StageFailure("witnesses", f"witness {w} fails the congruence/size check")
        img = local_image(curve, w)
        if img.basis != _display_space(curve, w, role).basis:
            raise StageFailure(
                "witnesses", f"local image at {w} does not match the {role} display"
            )
    return ws


def _shape_pair(shape: str, rep: int) -> Tuple[int, int]:
    if shape == "both":
        return rep, rep
    if shape == "first":
        return rep, 1
    return 1, rep


def _admissible_bits(
    space: LocalSubspace, v: int, shape_tbits: Sequence[Tuple[str, int]]
) -> List[int]:
    """Symbol bits b at v such that multiplying the tracked classes by a new
    prime of that bit keeps every affected coordinate pattern inside space."""
    ns = smallest_nonresidue(v)
    out = []
    for b in (0, 1):
        ok = True
        for shape, t in shape_tbits:
            if (t ^ b) == 0:
                continue
            d1, d2 = _shape_pair(shape, ns)
            if not space.contains_pair(d1, d2):
                ok = False
                break
        if ok:
            out.append(b)
    return out


def _sym_bit(x: int, v: int) -> int:
    return _bit(jacobi_symbol(x, v))


# --------------------------------------------------------------------------
# auxiliary twist
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AuxiliaryTwist:
    """A squarefree kappa = product of the chain primes, whose full-chain
    Selmer structure has a five-element basis ramified one-for-one at the
    witness places with the prescribed valuation pattern."""

    curve: TwoTorsionCurve
    T: Tuple[int, ...]
    chain: Tuple[Tuple[int, int], ...]
    kappa: int
    witnesses: Tuple[int, ...]  # six places
    companions: Tuple[Tuple[int, int], ...]  # (witness place, partner prime) x6
    couplers: Tuple[int, int, int]
    z_basis: Tuple[SelmerElement, ...]  # five elements
    stage_ledger: Dict

    def spec(self) -> SelmerStructureSpec:
        return SelmerStructureSpec(self.curve, self.T, self.chain)

    def verify(self) -> None:
        """Re-check the defining invariants from scratch."""
        kappa = 1
        for p, _ in self.chain:
            kappa *= p
        if kappa != self.kappa:
            raise ConsistencyViolation("kappa is not the chain product")
        if self.kappa <= 0 or self.kappa % 8 != 1:
            raise ConsistencyViolation("kappa fails positivity / 1 mod 8")
        for v in self.T:
            if not is_local_square(self.kappa, v):
                raise ConsistencyViolation(f"kappa is not a local square at {v}")
        abg = self.curve.alpha * self.curve.beta * self.curve.gamma
        if int(gmpy2.gcd(self.kappa, abg)) != 1:
            raise ConsistencyViolation("kappa shares a factor with the differences")
        g = structure_group(self.spec())
        if g.dim != 5:
            raise ConsistencyViolation(f"final structure dimension {g.dim} != 5")
        pattern = ((1, 1), (1, 0), (0, 1), (1, 0), (1, 1))
        for i, z in enumerate(self.z_basis):
            if not g.member(z):
                raise ConsistencyViolation(f"basis element {i + 1} not in the group")
            for k, w in enumerate(self.witnesses[:5]):
                want = pattern[i] if k == i else (0, 0)
                got = (val(z.d1, w) % 2, val(z.d2, w) % 2)
                if got != want:
                    raise ConsistencyViolation(
                        f"valuation pattern of element {i + 1} at place {w}: "
                        f"{got} != {want}"
                    )
        vecs = [_element_to_exponents(z, g.gens) for z in self.z_basis]
        if any(v is None for v in vecs) or f2.rank([v for v in vecs if v is not None]) != 5:
            raise ConsistencyViolation("basis elements are dependent")


def _diag_witnesses(spec: SelmerStructureSpec):
    """Elements of the relaxed-at-T group of the forms (x,1), (1,x), (x,x)."""
    g = structure_group(spec.as_mode("ray"))
    ng = len(g.gens)
    n = 2 * ng
    low = [1 << i for i in range(ng)]
    high = [1 << (ng + i) for i in range(ng)]
    diag = [(1 << i) | (1 << (ng + i)) for i in range(ng)]
    out = []
    for block in (low, high, diag):
        vecs = f2.intersect(list(g.exponent_basis), block, n)
        out.append([_exponents_to_element(v, g.gens) for v in vecs])
    return tuple(out)


def _coord_demands(el: SelmerElement, bits: Tuple[int, int]):
    """Demands pinning the residue pattern of an element at the new prime.

    Raises InconsistentDemands when a coordinate is trivial but a nonzero
    bit is requested.
    """
    out = []
    for d, b in ((el.d1, bits[0]), (el.d2, bits[1])):
        if d == 1:
            if b:
                raise InconsistentDemands("trivial coordinate cannot be a nonsquare")
            continue
        out.append(("sym", d, 1 if b == 0 else -1))
    return out


def _self_place_requirement(curve: TwoTorsionCurve, shape: str) -> Tuple[int, int]:
    """(value that must be a square at the ramified place, value whose symbol
    must be -1 there once multiplied by the unit part) for a class of the
    given coordinate shape to meet the twisted condition with unit-twist."""
    al, be, ga = curve.alpha, curve.beta, curve.gamma
    if shape == "both":
        return be * ga, -be
    if shape == "first":
        return -al * ga, -al
    return al * be, al


def _try_bits_for(
    spec: SelmerStructureSpec, p: int, want: int
) -> Optional[Tuple[int, int]]:
    """(bit, n) for the first uniformizer bit giving rank change == want."""
    for bit in (0, 1):
        n = rank_change(spec, p, bit)
        if n == want:
            return bit, n
    return None


def build_auxiliary_twist(
    curve: TwoTorsionCurve,
    witnesses: Tuple[int, ...],
    config: PipelineConfig = PipelineConfig(),
) -> AuxiliaryTwist:
    """Construct the auxiliary twist through the staged chain extension."""
    T = sel2(curve).spec.T
    T_odd = [v for v in T if v not in (INFINITY, 2)]
    spec = SelmerStructureSpec(curve, T)
    base_dim = structure_group(spec).dim
    if base_dim % 2 == 0:
        raise StageFailure("setup", f"starting dimension {base_dim} is even")
    ledger: Dict = {"startDim": base_dim}
    hints: List[int] = sorted(
        set(T_odd)
        | set(
            factor(abs(curve.alpha * curve.beta * curve.gamma), hint_primes=T_odd).primes()
        )
    )
    exclude = set(T_odd) | {2}

    def extend(p: int, bit: int) -> int:
        nonlocal spec
        n = rank_change(spec, p, bit)
        spec = spec.extend(p, bit)
        exclude.add(p)
        hints.append(p)
        return n

    # ---- stage "span": make the symbol matrix over the support generators
    # full-rank, so classes unramified outside the support are trivial.
    gens = support_generators(spec)
    rows: List[int] = []
    span_primes: List[int] = []
    dims: List[int] = []
    for q in small_primes()[1:]:
        if f2.rank(rows) == len(gens):
            break
        if q in exclude:
            continue
        row = 0
        for i, gen in enumerate(gens):
            if square_class_at(gen, q).bits[1]:
                row |= 1 << i
        if f2.rank(rows + [row]) == f2.rank(rows):
            continue
        g_dim = structure_group(spec).dim
        best = None
        for bit in (0, 1):
            n = rank_change(spec, q, bit)
            if g_dim == 1 and n < 0:
                continue
            if best is None or n < best[1]:
                best = (bit, n)
        rows.append(row)
        span_primes.append(q)
        extend(q, best[0])
        dims.append(structure_group(spec).dim)
    if f2.rank(rows) != len(gens):
        raise StageFailure("span", "ran out of small primes before full rank")
    logger.info("span done: %d primes, dim %d", len(span_primes), structure_group(spec).dim)
    ledger["span"] = {
        "primes": list(span_primes),
        "matrixRank": f2.rank(rows),
        "generators": [int(g) for g in gens],
        "dims": list(dims),
    }

    # ---- stage "reduce": force the dimension down to one.
    reduce_primes: List[int] = []
    rank2_patterns = (((1, 0), (0, 1)), ((1, 0), (1, 1)), ((0, 1), (1, 1)))

    def drop_step(stage: str, base_demands: List[Tuple[str, int, int]]) -> int:
        """Extend by a prime where two group elements restrict independently,
        cutting the dimension by two."""
        g = structure_group(spec)
        for i in range(g.dim):
            for jdx in range(i + 1, g.dim):
                for pat in rank2_patterns:
                    try:
                        demands = (
                            base_demands
                            + _coord_demands(g.basis[i], pat[0])
                            + _coord_demands(g.basis[jdx], pat[1])
                        )
                        p = _search_prime(
                            demands, config, exclude=exclude, hint_primes=hints
                        )
                    except (InconsistentDemands, PrimeSearchError):
                        continue
                    n = extend(p, 0)
                    if n != -2:
                        raise StageFailure(stage, f"expected a -2 step at {p}, got {n}")
                    return p
        raise StageFailure(stage, "no residue pattern admits a prime")

    while structure_group(spec).dim > 1:
        reduce_primes.append(drop_step("reduce", []))
    logger.info("reduce done: %s", reduce_primes)
    ledger["reduce"] = {"primes": reduce_primes, "dim": 1}

    # ---- stage "diagonal": clear the relaxed-group classes supported on a
    # single coordinate or the diagonal.  At any prime ≡ 1 (mod 8) at most
    # two of the three shape-blocking values can be nonsquares, so a killed
    # class can regenerate in the unblocked shape; each step is therefore
    # accepted only when the total count went down.
    al, be, ga = curve.alpha, curve.beta, curve.gamma
    special = (al * be, -al * ga, be * ga)
    diag_steps: List[Dict] = []
    budget = config.stage_retry_budget * 4
    while True:
        v1, v2, v3 = _diag_witnesses(spec)
        counts = (len(v1), len(v2), len(v3))
        if counts[1] == 0 and counts[2] == 0 and counts[0] <= 1:
            break
        if budget <= 0:
            raise StageFailure("diagonal", "retry budget exhausted")
        budget -= 1
        witness_vals: List[int] = []
        for els in (v3, v2, v1):
            for el in els:
                for d in (el.d1, el.d2):
                    if d != 1:
                        witness_vals.append(d)
                        break
        witness_vals = witness_vals[:2]
        accepted = False
        for x, y in permutations(special, 2):
            try:
                demands = [("sym", d, -1) for d in witness_vals]
                demands += [("sym", x, -1), ("sym", y, -1)]
                p = _search_prime(demands, config, exclude=exclude, hint_primes=hints)
            except (InconsistentDemands, PrimeSearchError):
                continue
            got = _try_bits_for(spec, p, 0)
            if got is None:
                exclude.add(p)
                continue
            trial = spec.extend(p, got[0])
            t1, t2, t3 = (len(v) for v in _diag_witnesses(trial))
            if t1 + t2 + t3 < sum(counts) and t2 <= counts[1] and t3 <= counts[2]:
                extend(p, got[0])
                diag_steps.append({"prime": p, "bit": got[0], "diag": t1 + t2 + t3})
                accepted = True
                break
            exclude.add(p)
        if not accepted:
            raise StageFailure("diagonal", "no demand combination makes progress")
    logger.info("diagonal done: %s", diag_steps)
    ledger["diagonal"] = diag_steps
    span_chain = tuple(spec.chain)  # everything before the companion stage

    # ---- stage "companion": one partner prime per witness place.
    companions: List[Tuple[int, int]] = []
    for j in range(6):
        w = witnesses[j]
        shape = _WITNESS_SHAPES[j]
        demands: List[Tuple[str, int, int]] = [("res", w, 1)]
        req_square, _ = _self_place_requirement(curve, shape)
        demands.append(("sym", req_square, 1))
        # symbol interlock with the earlier partners.  For the partner that
        # will share our coupler, the coupler's residue bit at each of the two
        # places is forced twice (keeping the sibling class a local square,
        # and hitting the unit match of the class ramified there); the two
        # forcings must coincide, which is a symbol condition on this prime.
        _, own_match = _self_place_requirement(curve, shape)
        for k, (wk, pk) in enumerate(companions):
            if k % 2 == 0 and j == k + 1:
                _, mk = _self_place_requirement(curve, _WITNESS_SHAPES[k])
                demands.append(("sym", wk * pk * own_match * w, -1))
                tbit = 1 ^ _sym_bit(w * mk * wk, pk)
                demands.append(("res", pk, 1 if tbit == 0 else -1))
            else:
                demands.append(("sym", wk * pk, 1))
                demands.append(("res", pk, 1 if _sym_bit(w, pk) == 0 else -1))
        # membership pins at the support places and the chain so far
        for v in T_odd:
            if v == w:
                continue
            adm = _admissible_bits(local_image(curve, v), v, [(shape, _sym_bit(w, v))])
            if not adm:
                raise StageFailure("companion", f"no admissible class at place {v}")
            if len(adm) == 1:
                demands.append(("res", v, 1 if adm[0] == 0 else -1))
        for q, bit in span_chain:
            space = twisted_pair_subspace(curve, q, pi_value(q, bit))
            adm = _admissible_bits(space, q, [(shape, _sym_bit(w, q))])
            if not adm:
                raise StageFailure("companion", f"no admissible class at chain place {q}")
            if len(adm) == 1:
                demands.append(("res", q, 1 if adm[0] == 0 else -1))
        p = _search_prime(demands, config, exclude=exclude, hint_primes=hints)
        extend(p, 1)
        companions.append((w, p))
        logger.info("companion %d for witness %d: %d (dim %d)", j + 1, w, p,
                    structure_group(spec).dim)
    comp_list = [(w * p) for w, p in companions]
    g2 = structure_group(spec)
    ng = len(g2.gens)
    v_basis = []
    for c in comp_list:
        e1 = _element_to_exponents(SelmerElement(c, 1), g2.gens)
        e2 = _element_to_exponents(SelmerElement(1, c), g2.gens)
        v_basis += [e1, e2]
    inter = f2.intersect(list(g2.exponent_basis), v_basis, 2 * ng)
    if inter:
        raise StageFailure(
            "companion", "the partner-class plane meets the Selmer group nontrivially"
        )
    ledger["companion"] = {
        "pairs": [[w, p] for w, p in companions],
        "dim": g2.dim,
        "planeIntersection": 0,
    }
    companion_group = g2
    proj_pairs = [(p, w * p) for w, p in companions]

    # ---- stage "consolidate": six primes restoring dimension one.
    consolidate: List[int] = []
    for step in range(6):
        g = structure_group(spec)
        base_demands = [("sym", c, 1) for c in comp_list]
        placed = False
        if g.dim == 1:
            el = g.basis[0]
            for attempt in range(config.stage_retry_budget):
                demands = base_demands + _coord_demands(el, (0, 0))
                p = _search_prime(demands, config, exclude=exclude, hint_primes=hints)
                got = _try_bits_for(spec, p, 0)
                if got is None:
                    exclude.add(p)
                    continue
                extend(p, got[0])
                consolidate.append(p)
                placed = True
                break
        else:
            consolidate.append(drop_step("consolidate", base_demands))
            placed = True
        if not placed:
            raise StageFailure("consolidate", f"no usable prime at step {step + 1}")
    g = structure_group(spec)
    if g.dim != 1:
        raise StageFailure("consolidate", f"dimension {g.dim} != 1 after six steps")
    survivor = g.basis[0]
    if not companion_group.member(survivor):
        raise StageFailure("consolidate", "survivor left the companion-stage group")
    surv_proj = project_away(survivor, proj_pairs)
    if surv_proj.d1 == 1:
        raise StageFailure("consolidate", "survivor has trivial first coordinate")
    logger.info("consolidate done: %s", consolidate)
    ledger["consolidate"] = {
        "primes": consolidate,
        "survivor": [survivor.d1, survivor.d2],
        "projected": [surv_proj.d1, surv_proj.d2],
    }

    # ---- stage "couple": three primes, each lifting a witness pair into the
    # group as two explicit ramified classes.
    couplers: List[int] = []
    c_elements: List[SelmerElement] = []
    for k, (j1, j2) in enumerate(((0, 1), (2, 3), (4, 5))):
        g = structure_group(spec)
        demands = []
        for el in g.basis:
            demands += _coord_demands(el, (0, 0))
        for j in (j1, j2):
            w, pc = companions[j]
            shape = _WITNESS_SHAPES[j]
            req_square, match_val = _self_place_requirement(curve, shape)
            # own ramified place: the unit part must hit the twisted condition
            demands.append(("sym", req_square, 1))
            demands.append(("sym", match_val * w * pc, -1))
            # the partner's ramified place: compile the unit match onto us
            target = _sym_bit(match_val * w, pc) ^ 1
            demands.append(("res", pc, 1 if target == 0 else -1))
        own_places = {companions[j1][1], companions[j2][1]}
        for v in T_odd:
            pairs = [
                (_WITNESS_SHAPES[j], _sym_bit(comp_list[j], v)) for j in (j1, j2)
            ]
            adm = _admissible_bits(local_image(curve, v), v, pairs)
            if not adm:
                raise StageFailure("couple", f"no admissible class at place {v}")
            if len(adm) == 1:
                demands.append(("res", v, 1 if adm[0] == 0 else -1))
        for q, bit in spec.chain:
            if q in own_places:
                continue
            space = twisted_pair_subspace(curve, q, pi_value(q, bit))
            pairs = [
                (_WITNESS_SHAPES[j], _sym_bit(comp_list[j], q)) for j in (j1, j2)
            ]
            adm = _admissible_bits(space, q, pairs)
            if not adm:
                raise StageFailure("couple", f"no admissible class at chain place {q}")
            if len(adm) == 1:
                demands.append(("res", q, 1 if adm[0] == 0 else -1))
        placed = False
        for attempt in range(config.stage_retry_budget):
            p = _search_prime(demands, config, exclude=exclude, hint_primes=hints)
            n = rank_change(spec, p, 1)
            if n != 2:
                exclude.add(p)
                continue
            extend(p, 1)
            couplers.append(p)
            placed = True
            logger.info("coupler %d: %d (dim %d)", k + 1, p, structure_group(spec).dim)
            break
        if not placed:
            raise StageFailure("couple", f"no +2 extension found for pair {k + 1}")
        g = structure_group(spec)
        for j in (j1, j2):
            w, pc = companions[j]
            cls = w * pc * couplers[-1]
            el = SelmerElement(*_shape_pair(_WITNESS_SHAPES[j], cls))
            if not g.member(el):
                raise StageFailure(
                    "couple", f"lifted class for witness {w} is not in the group"
                )
            c_elements.append(el)
    g = structure_group(spec)
    basis_candidates = [survivor] + c_elements
    vecs = [_element_to_exponents(el, g.gens) for el in basis_candidates]
    if g.dim != 7 or any(v is None for v in vecs) or f2.rank(vecs) != 7:
        raise StageFailure("couple", "the seven expected classes do not form a basis")
    ledger["couple"] = {"primes": couplers, "dim": 7}

    # ---- stage "collapse": cut away the survivor and the sixth class.
    retained = [c_elements[i] for i in (0, 1, 2, 3, 4)]
    retained_vals = [
        comp_list[0] * couplers[0],
        comp_list[1] * couplers[0],
        comp_list[2] * couplers[1],
        comp_list[3] * couplers[1],
        comp_list[4] * couplers[2],
    ]
    sixth_val = comp_list[5] * couplers[2]
    demands = [("sym", survivor.d1, -1), ("sym", sixth_val, -1)]
    demands += [("sym", c, 1) for c in retained_vals]
    placed = False
    for attempt in range(config.stage_retry_budget):
        p = _search_prime(demands, config, exclude=exclude, hint_primes=hints)
        n = rank_change(spec, p, 0)
        if n != -2:
            exclude.add(p)
            continue
        extend(p, 0)
        placed = True
        break
    if not placed:
        raise StageFailure("collapse", "no -2 extension found")
    g = structure_group(spec)
    if g.dim != 5 or not all(g.member(el) for el in retained):
        raise StageFailure("collapse", "retained classes do not span the group")
    logger.info("collapse done: %d", spec.chain[-1][0])
    ledger["collapse"] = {"prime": spec.chain[-1][0], "dim": 5}

    # ---- stage "close": one last prime making the chain product a local
    # square everywhere on the support.
    partial = 1
    for q, _ in spec.chain:
        partial *= q
    mod8 = partial % 8  # odd residues are self-inverse mod 8
    demands = [("sym", c, 1) for c in retained_vals]
    for v in T_odd:
        demands.append(("res", v, jacobi_symbol(partial, v)))
    placed = False
    for attempt in range(config.stage_retry_budget):
        p = _search_prime(
            demands, config, mod8=mod8, exclude=exclude, hint_primes=hints
        )
        got = _try_bits_for(spec, p, 0)
        if got is None:
            exclude.add(p)
            continue
        extend(p, got[0])
        placed = True
        break
    if not placed:
        raise StageFailure("close", "no neutral extension found")
    kappa = partial * spec.chain[-1][0]
    logger.info("close done: kappa has %d bits", kappa.bit_length())
    ledger["close"] = {"prime": spec.chain[-1][0], "kappa": kappa}

    aux = AuxiliaryTwist(
        curve=curve,
        T=T,
        chain=tuple(spec.chain),
        kappa=kappa,
        witnesses=tuple(witnesses),
        companions=tuple(companions),
        couplers=tuple(couplers),
        z_basis=tuple(retained),
        stage_ledger=ledger,
    )
    aux.verify()
    return aux


# --------------------------------------------------------------------------
# parity pre-twist
# --------------------------------------------------------------------------


def pretwist_odd_parity(
    curve: TwoTorsionCurve, config: PipelineConfig = PipelineConfig()
) -> Tuple[int, TwoTorsionCurve]:
    """Arrange odd Selmer dimension, spending one genericity witness if the
    dimension starts even."""
    dim = sel2(curve).dim
    if dim % 2 == 1:
        return 1, curve
    witness = is_n_generic(curve, 1)
    if isinstance(witness, GenericityFailure):
        raise StageFailure("pretwist", str(witness))
    # sacrifice the largest witness prime of the best-stocked pair
    lists = [sorted(ps) for ps in witness.primes_by_pair]
    v = max(ps[-1] for ps in lists if ps)
    demands = [("res", 3, 1), ("res", v, -1)]
    for p in sel2(curve).spec.T:
        if p in (INFINITY, 2, 3, v):
            continue
        demands.append(("res", p, 1))
    q = _search_prime(demands, config, exclude={v, 3})
    check_parity_twist_prime(curve, q)
    twisted = curve.quadratic_twist(q)
    new_dim = sel2(twisted, hint_primes=[q]).dim
    if new_dim % 2 != 1:
        raise ConsistencyViolation("parity did not flip under the pre-twist")
    return q, twisted


# --------------------------------------------------------------------------
# linear forms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearFormSystem:
    """Four affine forms whose prime values complete kappa to a suitable
    twist; L_i = A x + B_i y + C_i for i < 3 and L_4 = A y + C_4."""

    curve: TwoTorsionCurve
    aux: AuxiliaryTwist
    rho: int
    N: int
    m: int
    lam: int
    mu1: int
    mu2: int

    @property
    def A(self) -> int:
        return self.rho**2 * self.aux.kappa * self.m

    def coefficients(self) -> List[Tuple[int, int, int]]:
        r2k = self.rho**2 * self.aux.kappa
        rows = []
        for a in self.curve.roots:
            rows.append(
                (
                    self.A,
                    -a * r2k * self.A,
                    r2k * self.mu1 - a * r2k**2 * self.mu2 - a * r2k * self.lam + 1,
                )
            )
        rows.append((0, self.A, r2k * self.mu2 + self.lam))
        return rows

    def values(self, x: int, y: int) -> List[int]:
        return [A_ * x + B_ * y + C_ for A_, B_, C_ in self.coefficients()]

    def point_ingredients(self, x: int, y: int) -> Tuple[int, int]:
        """(c, d) with L_i = c - a_i d and d = rho^2 kappa L_4."""
        r2k = self.rho**2 * self.aux.kappa
        c = r2k * (self.m * x + self.mu1) + 1
        d = r2k * (r2k * (self.m * y + self.mu2) + self.lam)
        return c, d

    def verify(self) -> None:
        curve, aux = self.curve, self.aux
        ws = aux.witnesses[:5]
        n_check = 1
        for v in aux.T:
            if v in (INFINITY, 2) or v in ws:
                continue
            n_check *= v
        if n_check != self.N or self.rho != 8 * self.N:
            raise ConsistencyViolation("support product mismatch in rho")
        m_check = 1
        for w in ws:
            m_check *= w
        if m_check != self.m:
            raise ConsistencyViolation("witness product mismatch in m")
        if self.lam % self.rho != 1:
            raise ConsistencyViolation("lambda is not 1 mod rho")
        for p, bit in aux.chain:
            cof = aux.kappa // p
            if _bit(jacobi_symbol(cof * self.lam, p)) != bit:
                raise ConsistencyViolation(f"uniformizer class mismatch at {p}")
        # the twenty target symbols
        vals = self.values(0, 0)
        r2k = self.rho**2 * aux.kappa
        consts = [
            r2k * self.mu1 - a * r2k**2 * self.mu2 - a * r2k * self.lam + 1
            for a in curve.roots
        ] + [r2k * self.mu2 + self.lam]
        for i, cval in enumerate(consts):
            for k, w in enumerate(ws):
                if jacobi_symbol(cval, w) != _FORM_TARGETS[i][k]:
                    raise ConsistencyViolation(
                        f"target symbol ({i + 1},{k + 1}) not achieved"
                    )
        # form values stay units at every prime dividing rho * m * kappa
        for p, _ in aux.chain:
            if self.lam % p == 0:
                raise ConsistencyViolation(f"lambda vanishes at chain prime {p}")
        for w in ws:
            for cval in consts:
                if cval % w == 0:
                    raise ConsistencyViolation(f"form value vanishes at {w}")


def build_linear_forms(
    aux: AuxiliaryTwist, config: PipelineConfig = PipelineConfig()
) -> LinearFormSystem:
    curve = aux.curve
    ws = aux.witnesses[:5]
    N = 1
    for v in aux.T:
        if v in (INFINITY, 2) or v in ws:
            continue
        N *= v
    rho = 8 * N
    m = 1
    for w in ws:
        m *= w
    # lambda: unit classes at the chain primes, trivial along rho
    congruences = [(1, rho)]
    for p, bit in aux.chain:
        cof = (aux.kappa // p) % p
        c = int(gmpy2.invert(cof, p))
        if bit:
            c = c * smallest_nonresidue(p) % p
        congruences.append((c, p))
    lam = crt(congruences)[0]
    # mu1, mu2: three symbol constraints per witness place
    r2k = rho**2 * aux.kappa
    us: List[Tuple[int, int]] = []
    vs: List[Tuple[int, int]] = []
    for k, w in enumerate(ws):
        role = _WITNESS_ROLES[k]
        drop = {"alpha": 1, "beta": 2, "gamma": 2}[role]
        keep = [i for i in range(3) if i != drop] + [3]
        i_kept, i_drop = [i for i in range(3) if i != drop][0], drop
        # the dropped row must genuinely coincide with its partner
        partner = {1: 0, 2: 0 if role == "beta" else 1}[drop]
        a = curve.roots
        if (a[drop] - a[partner]) % w != 0:
            raise ConsistencyViolation(f"rows {partner + 1},{drop + 1} differ at {w}")
        if _FORM_TARGETS[drop][k] != _FORM_TARGETS[partner][k]:
            raise ConsistencyViolation("coinciding rows have different targets")
        cs: List[int] = []
        deltas: List[int] = []
        lams: List[int] = []
        ns = smallest_nonresidue(w)
        for i in keep:
            if i < 3:
                cs += [r2k % w, (-a[i] * r2k * r2k) % w]
                lams.append((a[i] * r2k * lam - 1) % w)
            else:
                cs += [0, r2k % w]
                lams.append((-lam) % w)
            deltas.append(1 if _FORM_TARGETS[i][k] == 1 else ns)
        inst = SquareSystemInstance(w, tuple(cs), tuple(deltas), tuple(lams))
        sol = solve_square_system(inst, seed=config.seed)
        us.append((sol[0], w))
        vs.append((sol[1], w))
    mu1 = crt(us)[0]
    mu2 = crt(vs)[0]
    system = LinearFormSystem(
        curve=curve, aux=aux, rho=rho, N=N, m=m, lam=lam, mu1=mu1, mu2=mu2
    )
    system.verify()
    return system


# --------------------------------------------------------------------------
# quadruple search
# --------------------------------------------------------------------------


def _fermat2(n: int) -> bool:
    return n > 1 and gmpy2.powmod(2, n - 1, n) == 1


_sieve_prime_cache: Dict[int, List[int]] = {}


def _sieve_primes(bound: int) -> List[int]:
    """Odd primes below ``bound`` (2 never divides a form value)."""
    if bound not in _sieve_prime_cache:
        flags = np.ones(bound, dtype=bool)
        flags[:2] = False
        for p in range(2, int(bound**0.5) + 1):
            if flags[p]:
                flags[p * p :: p] = False
        flags[2] = False
        _sieve_prime_cache[bound] = [int(p) for p in np.nonzero(flags)[0]]
    return _sieve_prime_cache[bound]


def find_prime_quadruple(
    system: LinearFormSystem,
    config: PipelineConfig = PipelineConfig(),
    exclusions: Iterable[int] = (),
) -> Tuple[int, int, Tuple[int, int, int, int]]:
    """Deterministic expanding-shell scan for (x, y) making all four form
    values positive primes; returns the first hit in shell-then-(x, y) order.

    The trial sieve treats divisibility by a small prime as compositeness,
    so form values must exceed ``config.sieve_bound`` throughout the box."""

    coeffs = system.coefficients()
    A = system.A
    excl = set(int(v) for v in exclusions)
    rs = [r for r in _sieve_primes(config.sieve_bound) if A % r != 0]
    rs_np = np.array(rs, dtype=np.int64)
    ainv = np.array([int(gmpy2.invert(A % r, r)) for r in rs], dtype=np.int64)
    b_mod = [np.array([B % r for r in rs], dtype=np.int64) for _, B, _ in coeffs[:3]]
    c_mod = [np.array([C % r for r in rs], dtype=np.int64) for _, _, C in coeffs[:3]]
    c4_mod = np.array([coeffs[3][2] % r for r in rs], dtype=np.int64)
    stats = {
        "shells": 0,
        "rowsScanned": 0,
        "rowsGood": 0,
        "cellsSieved": 0,
        "survivors": 0,
        "fermatTests": 0,
    }
    H = config.shell_width
    good_rows: List[int] = []

    def row_starts(y: int, x0: int) -> Tuple[np.ndarray, np.ndarray]:
        yr = np.mod(y, rs_np)
        starts = []
        steps = []
        for i in range(3):
            bad = np.mod(np.mod(-(b_mod[i] * yr + c_mod[i]), rs_np) * ainv, rs_np)
            starts.append(np.mod(bad - x0, rs_np))
            steps.append(rs_np)
        return np.concatenate(starts), np.concatenate(steps)

    def scan_row(y: int, x0: int, x1: int) -> List[Tuple[int, int]]:
        width = x1 - x0
        starts, steps = row_starts(y, x0)
        mask = _kernels.sieve_line(width, starts, steps)
        stats["cellsSieved"] += width
        hits = []
        l4 = coeffs[3][1] * y + coeffs[3][2]
        for off in np.nonzero(mask)[0]:
            x = x0 + int(off)
            vals = [Ar * x + Br * y + Cr for Ar, Br, Cr in coeffs[:3]] + [l4]
            if any(v <= 1 for v in vals):
                continue
            stats["survivors"] += 1
            order = sorted(range(3), key=lambda i: vals[i])
            ok = True
            for i in order:
                stats["fermatTests"] += 1
                if not _fermat2(vals[i]):
                    ok = False
                    break
            if not ok:
                continue
            qs = vals
            if len(set(qs)) != 4:
                continue
            if any(q in excl for q in qs):
                continue
            if not all(is_prime(q) for q in qs):
                continue
            hits.append((x, y))
        return hits

    shell = 0
    while shell * H < config.box_bound:
        lo = shell * H
        hi = min((shell + 1) * H, config.box_bound)
        stats["shells"] += 1
        # new rows in [lo, hi): the fourth form depends on y alone
        bad_y = np.mod(np.mod(-c4_mod, rs_np) * ainv, rs_np)
        y_starts = np.mod(bad_y - lo, rs_np)
        y_mask = _kernels.sieve_line(hi - lo, y_starts, rs_np)
        new_good = []
        for off in np.nonzero(y_mask)[0]:
            y = lo + int(off)
            stats["rowsScanned"] += 1
            l4 = coeffs[3][1] * y + coeffs[3][2]
            stats["fermatTests"] += 1
            if l4 > 1 and _fermat2(l4):
                new_good.append(y)
        stats["rowsGood"] += len(new_good)
        hits: List[Tuple[int, int]] = []
        for y in good_rows:
            hits += scan_row(y, lo, hi)
        for y in new_good:
            hits += scan_row(y, 0, hi)
        good_rows += new_good
        logger.info("shell %d: rows %d good %d survivors %d",
                    shell, stats["rowsScanned"], stats["rowsGood"], stats["survivors"])
        if hits:
            x, y = min(hits)
            qs = tuple(system.values(x, y))
            return x, y, qs
        shell += 1
    raise QuadrupleSearchError(stats)


# --------------------------------------------------------------------------
# assembly and certification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SuitableTwistCertificate:
    curve: Tuple[int, int, int]
    t0: int
    kappa: int
    chain: Tuple[Tuple[int, int], ...]
    stage_ledger: Dict
    z_basis: Tuple[Tuple[int, int], ...]
    linear_forms: Dict
    quadruple: Dict
    t: int
    chain_dims: Tuple[int, int, int, int]
    point: Tuple[int, int, int, int]
    selmer_dim: int
    conclusion: str
    trust_base: Dict

    def to_dict(self) -> Dict:
        return {
            "curve": list(self.curve),
            "t0": self.t0,
            "kappa": self.kappa,
            "chain": [[p, b] for p, b in self.chain],
            "stageLedger": self.stage_ledger,
            "zBasis": [list(z) for z in self.z_basis],
            "linearForms": self.linear_forms,
            "quadruple": self.quadruple,
            "t": self.t,
            "chainDims": list(self.chain_dims),
            "point": list(self.point),
            "selmerDim": self.selmer_dim,
            "conclusion": self.conclusion,
            "trustBase": self.trust_base,
        }

    def to_json(self) -> str:
        widest = max(
            [self.t, self.kappa, *self.point]
            + [abs(int(v)) for v in self.linear_forms.values()]
        )
        ensure_text_int_capacity(widest.bit_length())
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_dict(d: Dict) -> "SuitableTwistCertificate":
        return SuitableTwistCertificate(
            curve=tuple(d["curve"]),
            t0=int(d["t0"]),
            kappa=int(d["kappa"]),
            chain=tuple((int(p), int(b)) for p, b in d["chain"]),
            stage_ledger=d["stageLedger"],
            z_basis=tuple((int(a), int(b)) for a, b in d["zBasis"]),
            linear_forms=d["linearForms"],
            quadruple=d["quadruple"],
            t=int(d["t"]),
            chain_dims=tuple(int(x) for x in d["chainDims"]),
            point=tuple(int(x) for x in d["point"]),
            selmer_dim=int(d["selmerDim"]),
            conclusion=d["conclusion"],
            trust_base=d["trustBase"],
        )

    @staticmethod
    def from_json(s: str) -> "SuitableTwistCertificate":
        ensure_text_int_capacity(4 * len(s))
        return SuitableTwistCertificate.from_dict(json.loads(s))


def _invariant_bits(z_components: Sequence[int], q: int, Tprime: Sequence[int]):
    """Each component's cup-product invariant sum against the class of q,
    computed two ways: local symbols over the support, and evaluation at q."""
    out = []
    for z in z_components:
        total = 0
        for v in Tprime:
            total ^= _bit(hilbert_symbol(z, q, v))
        direct = 0 if z == 1 else _bit(jacobi_symbol(z, q))
        out.append((total, direct))
    return out


def assemble_suitable_twist(
    system: LinearFormSystem,
    x: int,
    y: int,
    t0: int = 1,
    config: PipelineConfig = PipelineConfig(),
    original_curve: Optional[TwoTorsionCurve] = None,
) -> SuitableTwistCertificate:
    aux = system.aux
    curve = aux.curve
    qs = system.values(x, y)
    if any(not is_prime(q) or q <= 0 for q in qs) or len(set(qs)) != 4:
        raise ConsistencyViolation("quadruple values are not distinct positive primes")
    t = aux.kappa
    for q in qs:
        t *= q
    mod_check = 8 * system.N * aux.kappa
    for q in qs[:3]:
        if q % mod_check != 1:
            raise ConsistencyViolation("quadruple congruence failed")
    if qs[3] % mod_check != system.lam % mod_check:
        raise ConsistencyViolation("fourth-value congruence failed")
    # locally a square on the whole support
    for v in aux.T:
        if not is_local_square(t, v):
            raise ConsistencyViolation(f"twist is not a local square at {v}")
    # invariant sums, two routes, against the prescribed bits
    Tprime = list(aux.T) + [p for p, _ in aux.chain]
    components: List[int] = []
    for d1, d2 in ((z.d1, z.d2) for z in aux.z_basis):
        components += [d1, d2]
    for j, q in enumerate(qs[:3]):
        pairs = _invariant_bits(components, q, Tprime)
        for i, (total, direct) in enumerate(pairs):
            if total != direct:
                raise ConsistencyViolation(
                    f"invariant-sum routes disagree for component {i + 1} at value {j + 1}"
                )
            want = _INVARIANT_TARGETS[j][i]
            if want is not None and total != want:
                raise ConsistencyViolation(
                    f"invariant sum {total} != {want} for component {i + 1}, value {j + 1}"
                )
    # chain dimensions across the first three quadruple primes
    spec = aux.spec()
    dims = [structure_group(spec).dim]
    for q in qs[:3]:
        cof = t // q
        bit = _bit(jacobi_symbol(cof, q))
        spec = spec.extend(q, bit)
        dims.append(structure_group(spec).dim)
    if dims != [5, 3, 1, 1]:
        raise ConsistencyViolation(f"chain dimensions {dims} != [5, 3, 1, 1]")
    # the explicit point
    c, d = system.point_ingredients(x, y)
    prod = d
    for a in curve.roots:
        prod *= c - a * d
    if system.rho**2 * t != prod:
        raise ConsistencyViolation("point identity failed")
    twisted = curve.quadratic_twist(t)
    px = Fraction(t * c, d)
    py = Fraction(system.rho * t**2, d**2)
    if not twisted.on_curve((px, py)):
        raise ConsistencyViolation("constructed point is not on the twist")
    if not is_nontorsion(twisted, (px, py)):
        raise ConsistencyViolation("constructed point is torsion")
    all_primes = [p for p, _ in aux.chain] + list(qs)
    twist_dim, struct_dim = twist_chain_identity(curve, aux.T, t, all_primes)
    if twist_dim != 3 or struct_dim != 1:
        raise ConsistencyViolation(
            f"final dimensions (sel2 {twist_dim}, structure {struct_dim}) are wrong"
        )
    base = original_curve if original_curve is not None else curve
    return SuitableTwistCertificate(
        curve=(base.a1, base.a2, base.a3),
        t0=t0,
        kappa=aux.kappa,
        chain=tuple(aux.chain),
        stage_ledger=aux.stage_ledger,
        z_basis=tuple((z.d1, z.d2) for z in aux.z_basis),
        linear_forms={
            "rho": system.rho,
            "m": system.m,
            "lambda": system.lam,
            "mu1": system.mu1,
            "mu2": system.mu2,
        },
        quadruple={"x": x, "y": y, "q": list(qs)},
        t=t,
        chain_dims=(5, 3, 1, 1),
        point=(px.numerator, px.denominator, py.numerator, py.denominator),
        selmer_dim=3,
        conclusion="rank=1",
        trust_base=config.trust_base(),
    )


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    rank: Optional[int]
    checks: Tuple[Tuple[str, bool, str], ...]

    def failing(self) -> List[str]:
        return [name for name, ok, _ in self.checks if not ok]


def certify_rank_one(
    curve: TwoTorsionCurve,
    t: int,
    point: Tuple[Fraction, Fraction],
    hint_primes: Iterable[int] = (),
) -> Verdict:
    """Standalone re-verification: full 2-torsion, Selmer dimension 3, and a
    non-torsion point together pin the rank of the twist at exactly 1."""
    results: List[Tuple[str, bool, str]] = []

    def check(name: str, fn) -> bool:
        try:
            ok, detail = fn()
        except Exception as exc:  # a verdict, never an exception
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
        return bool(ok)

    twisted = None

    def torsion_check():
        r = sorted(curve.roots)
        return len(set(r)) == 3, f"roots {r}"

    def twist_check():
        nonlocal twisted
        if t == 0:
            return False, "zero twist"
        fac = factor(t, hint_primes=list(hint_primes))
        if any(e > 1 for _, e in fac.factors) or fac.unit < 0:
            return False, "twist is not positive and squarefree"
        twisted = curve.quadratic_twist(t)
        return True, f"twist by {len(fac.factors)} primes"

    def point_check():
        return twisted.on_curve(point), "exact curve membership"

    def nontorsion_check():
        return is_nontorsion(twisted, point), "infinite order"

    def selmer_check():
        dim = sel2(twisted, hint_primes=list(hint_primes)).dim
        return dim == 3, f"dim Sel2 = {dim}"

    ok = check("full 2-torsion", torsion_check)
    ok = check("squarefree positive twist", twist_check) and ok
    if twisted is not None:
        ok = check("point on curve", point_check) and ok
        ok = check("point non-torsion", nontorsion_check) and ok
        ok = check("selmer dimension 3", selmer_check) and ok
    else:
        ok = False
    return Verdict(accepted=ok, rank=1 if ok else None, checks=tuple(results))


def verify_certificate(cert: SuitableTwistCertificate) -> Verdict:
    """Recompute every certificate claim from scratch."""
    results: List[Tuple[str, bool, str]] = []

    def check(name: str, fn) -> bool:
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
        return bool(ok)

    state: Dict = {}

    def structural():
        curve = TwoTorsionCurve(*cert.curve)
        state["base"] = curve
        if cert.t0 == 1:
            state["curve"] = curve
        else:
            check_parity_twist_prime(curve, cert.t0)
            state["curve"] = curve.quadratic_twist(cert.t0)
        kappa = 1
        for p, _ in cert.chain:
            if not is_prime(p):
                return False, f"chain entry {p} is not prime"
            kappa *= p
        if kappa != cert.kappa:
            return False, "kappa is not the chain product"
        qs = [int(q) for q in cert.quadruple["q"]]
        if len(set(qs)) != 4 or not all(is_prime(q) for q in qs):
            return False, "quadruple entries are not four distinct primes"
        t = kappa
        for q in qs:
            t *= q
        if t != cert.t:
            return False, "t is not kappa times the quadruple"
        if cert.conclusion != "rank=1":
            return False, f"unexpected conclusion {cert.conclusion!r}"
        ledger_chain = (
            list(cert.stage_ledger.get("span", {}).get("primes", []))
            + [p for p in cert.stage_ledger.get("reduce", {}).get("primes", [])]
            + [s["prime"] for s in cert.stage_ledger.get("diagonal", [])]
            + [p for _, p in cert.stage_ledger.get("companion", {}).get("pairs", [])]
            + list(cert.stage_ledger.get("consolidate", {}).get("primes", []))
            + list(cert.stage_ledger.get("couple", {}).get("primes", []))
            + [cert.stage_ledger.get("collapse", {}).get("prime")]
            + [cert.stage_ledger.get("close", {}).get("prime")]
        )
        if [p for p, _ in cert.chain] != [p for p in ledger_chain if p is not None]:
            return False, "stage ledger does not match the chain"
        return True, f"t has {len(cert.chain) + 4} prime factors"

    def auxiliary():
        curve = state["curve"]
        T = sel2(curve, hint_primes=[p for p, _ in cert.chain]).spec.T
        ws: List[int] = []
        for i in range(5):
            z1, z2 = cert.z_basis[i]
            ram = [
                v
                for v in T
                if v not in (INFINITY, 2)
                and (val(z1, v) % 2 != 0 or val(z2, v) % 2 != 0)
            ]
            if len(ram) != 1:
                return False, f"basis element {i + 1} is not ramified at one support place"
            ws.append(ram[0])
        state["witnesses"] = ws
        aux = AuxiliaryTwist(
            curve=curve,
            T=T,
            chain=cert.chain,
            kappa=cert.kappa,
            witnesses=tuple(ws) + (0,),
            companions=(),
            couplers=(0, 0, 0),
            z_basis=tuple(SelmerElement(a, b) for a, b in cert.z_basis),
            stage_ledger=cert.stage_ledger,
        )
        aux.verify()
        state["aux"] = aux
        state["T"] = T
        return True, f"witness places {ws}"

    def forms():
        aux = state["aux"]
        curve = state["curve"]
        ws = state["witnesses"]
        N = 1
        for v in state["T"]:
            if v in (INFINITY, 2) or v in ws:
                continue
            N *= v
        lf = cert.linear_forms
        system = LinearFormSystem(
            curve=curve,
            aux=aux,
            rho=int(lf["rho"]),
            N=N,
            m=int(lf["m"]),
            lam=int(lf["lambda"]),
            mu1=int(lf["mu1"]),
            mu2=int(lf["mu2"]),
        )
        system.verify()
        state["system"] = system
        x, y = int(cert.quadruple["x"]), int(cert.quadruple["y"])
        if system.values(x, y) != [int(q) for q in cert.quadruple["q"]]:
            return False, "form values at (x, y) do not equal the quadruple"
        return True, "forms verified"

    def assembly():
        system = state["system"]
        x, y = int(cert.quadruple["x"]), int(cert.quadruple["y"])
        rebuilt = assemble_suitable_twist(
            system, x, y, t0=cert.t0, original_curve=state["base"]
        )
        if rebuilt.chain_dims != cert.chain_dims:
            return False, "chain dimensions differ"
        if rebuilt.point != cert.point:
            return False, "point differs"
        if rebuilt.selmer_dim != cert.selmer_dim:
            return False, "selmer dimension differs"
        return True, "assembly reproduced"

    def final():
        curve = state["curve"]
        px = Fraction(cert.point[0], cert.point[1])
        py = Fraction(cert.point[2], cert.point[3])
        hint = [p for p, _ in cert.chain] + [int(q) for q in cert.quadruple["q"]]
        verdict = certify_rank_one(curve, cert.t, (px, py), hint_primes=hint)
        return verdict.accepted, "; ".join(
            f"{n}:{'ok' if ok else 'FAIL'}" for n, ok, _ in verdict.checks
        )

    ok = check("structure", structural)
    if ok:
        ok = check("auxiliary twist", auxiliary) and ok
    if ok:
        ok = check("linear forms", forms) and ok
    if ok:
        ok = check("assembly", assembly) and ok
    if ok:
        ok = check("rank certification", final) and ok
    return Verdict(accepted=ok, rank=1 if ok else None, checks=tuple(results))


# --------------------------------------------------------------------------
# the full hunt
# --------------------------------------------------------------------------


def hunt_rank1(config: PipelineConfig = PipelineConfig()) -> SuitableTwistCertificate:
    """Construct a 3-generic curve and drive it to a rank-1 certificate."""
    curve, _witness = construct_3generic(config.seed, config.genericity_prime_bound)
    t0, base = pretwist_odd_parity(curve, config)
    witness = is_n_generic(base, 2, hint_primes=[t0] if t0 != 1 else [])
    if isinstance(witness, GenericityFailure):
        raise StageFailure("pretwist", f"lost genericity: {witness}")
    ws = select_witnesses(base, witness)
    aux = build_auxiliary_twist(base, ws, config)
    system = build_linear_forms(aux, config)
    exclusions = {p for p, _ in aux.chain} | set(
        v for v in aux.T if v not in (INFINITY,)
    )
    x, y, _qs = find_prime_quadruple(system, config, exclusions=exclusions)
    return assemble_suitable_twist(
        system, x, y, t0=t0, config=config, original_curve=curve
    )
