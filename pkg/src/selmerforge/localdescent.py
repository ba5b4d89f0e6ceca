"""Local 2-descent data: packed square-class vectors, subspaces of
Q_v*/sq x Q_v*/sq, and images of the local connecting map for curves with
full rational 2-torsion.

The image of E(Q_v)/2E(Q_v) has F2-dimension 2 at odd places, 3 at 2, and
1 at the real place; computations stop as soon as that dimension is reached,
and raise if the lifting window is exhausted first, so results are never
silently wrong.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from . import f2
from .arith import (
    INFINITY,
    Rat,
    hilbert_symbol,
    is_local_square,
    local_bits_width,
    square_class_vector,
    val,
)
from .curve import TwoTorsionCurve


class LiftingDepthError(Exception):
    """The residue tree was exhausted before the image dimension was reached."""


def pair_width(v: int) -> int:
    return 2 * local_bits_width(v)


def pair_vec(d1: Rat, d2: Rat, v: int) -> int:
    """Packed class of (d1, d2): first coordinate in the low bits."""
    w = local_bits_width(v)
    return square_class_vector(d1, v) | (square_class_vector(d2, v) << w)


@dataclass(frozen=True)
class LocalSubspace:
    """Subspace of Q_v*/sq x Q_v*/sq with a canonical reduced basis."""

    place: int
    basis: Tuple[int, ...]

    @staticmethod
    def spanned_by(place: int, vectors: Iterable[int]) -> "LocalSubspace":
        return LocalSubspace(place, tuple(f2.rref(list(vectors))))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def member(self, vec: int) -> bool:
        return f2.in_span(vec, list(self.basis))

    def contains_pair(self, d1: Rat, d2: Rat) -> bool:
        return self.member(pair_vec(d1, d2, self.place))


def pairing_bit(u: int, w: int, v: int) -> int:
    """The descent pairing <(x,y),(x',y')> = (x,y')_v (x',y)_v as a bit."""
    lw = local_bits_width(v)
    mask = (1 << lw) - 1
    b = _hilbert_bit_vec(u & mask, w >> lw, v) ^ _hilbert_bit_vec(w & mask, u >> lw, v)
    return b


_HB_CACHE: Dict[Tuple[int, int, int], int] = {}


def _class_rep(vec: int, v: int) -> int:
    """A small integer representing the packed single-coordinate class vec."""
    if v == INFINITY:
        return -1 if vec & 1 else 1
    if v == 2:
        r = (3 if vec >> 1 & 1 else 1) * (5 if vec >> 2 & 1 else 1) % 8
        return r * (2 if vec & 1 else 1)
    from .arith import smallest_nonresidue

    rep = smallest_nonresidue(v) if vec >> 1 & 1 else 1
    return rep * (v if vec & 1 else 1)


def _hilbert_bit_vec(u: int, w: int, v: int) -> int:
    key = (u, w, v)
    if key not in _HB_CACHE:
        a, b = _class_rep(u, v), _class_rep(w, v)
        _HB_CACHE[key] = 0 if hilbert_symbol(a, b, v) == 1 else 1
    return _HB_CACHE[key]


def is_isotropic(sub: LocalSubspace) -> bool:
    """All pairs of basis vectors orthogonal under the descent pairing."""
    for i, u in enumerate(sub.basis):
        for w in sub.basis[i:]:
            if pairing_bit(u, w, sub.place) != 0:
                return False
    return True


def image_dim_target(v: int) -> int:
    if v == INFINITY:
        return 1
    if v == 2:
        return 3
    return 2


def torsion_image_vectors(curve: TwoTorsionCurve, v: int) -> List[int]:
    """Classes of the connecting map on the rational 2-torsion."""
    al, be, ga = curve.alpha, curve.beta, curve.gamma
    return [pair_vec(al * be, al, v), pair_vec(-al, -al * ga, v)]


def _real_image(curve: TwoTorsionCurve) -> LocalSubspace:
    r1, r2, r3 = sorted(curve.roots)
    xs = [Fraction(r1 + r2, 2), Fraction(r3 + 1)]
    vecs = []
    for x in xs:
        fx = curve.rhs(x)
        if fx > 0:
            vecs.append(pair_vec(x - curve.a1, x - curve.a2, INFINITY))
    vecs += torsion_image_vectors(curve, INFINITY)
    return LocalSubspace.spanned_by(INFINITY, vecs)


def _determined(d: int, p: int, k: int) -> bool:
    """Class of (x - a) constant on the disc x = x0 + O(p^k), d = x0 - a."""
    margin = 3 if p == 2 else 1
    return d != 0 and val(d, p) <= k - margin


def _finite_image(curve: TwoTorsionCurve, p: int, window: Optional[int]) -> LocalSubspace:
    target = image_dim_target(p)
    basis: List[int] = []

    def push(vec: int) -> bool:
        nonlocal basis
        new = f2.rref(basis + [vec])
        if len(new) > len(basis):
            basis = new
        return len(basis) >= target

    for vec in torsion_image_vectors(curve, p):
        if push(vec):
            return LocalSubspace(p, tuple(basis))

    if p > 10**7:
        raise LiftingDepthError(
            f"torsion classes dependent at {p}: place too large to enumerate"
        )
    if window is None:
        window = 2 * val(curve.discriminant, p) + 8

    def try_x(x: Fraction) -> bool:
        fx = curve.rhs(x)
        if fx != 0 and is_local_square(fx, p):
            return push(pair_vec(x - curve.a1, x - curve.a2, p))
        return False

    # negative valuation branch: x = u / p^(2j)
    units = (1, 3, 5, 7) if p == 2 else range(1, p)
    for j in (1, 2) if p == 2 else (1,):
        for u in units:
            if try_x(Fraction(u, p ** (2 * j))):
                return LocalSubspace(p, tuple(basis))

    # integral branch: breadth-first refinement of residue discs
    level = [0]
    for k in range(window + 1):
        next_level: List[int] = []
        pk = p**k
        for x0 in level:
            ds = [x0 - a for a in curve.roots]
            if all(_determined(d, p, k) for d in ds):
                if try_x(Fraction(x0)):
                    return LocalSubspace(p, tuple(basis))
            elif k < window:
                next_level.extend(x0 + t * pk for t in range(p))
        level = sorted(next_level)
        if not level:
            break
    raise LiftingDepthError(f"image at {p} not resolved within window {window}")


_IMAGE_CACHE: Dict[Tuple[TwoTorsionCurve, int], LocalSubspace] = {}


def local_image(
    curve: TwoTorsionCurve, v: int, window: Optional[int] = None
) -> LocalSubspace:
    """Image of E(Q_v)/2E(Q_v) under (x - a1, x - a2), as a LocalSubspace."""
    key = (curve, v)
    if window is None and key in _IMAGE_CACHE:
        return _IMAGE_CACHE[key]
    img = _real_image(curve) if v == INFINITY else _finite_image(curve, v, window)
    if img.dim != image_dim_target(v):
        raise LiftingDepthError(f"image at {v} has dimension {img.dim}")
    if window is None:
        _IMAGE_CACHE[key] = img
    return img


def split_multiplicative_image(curve: TwoTorsionCurve, p: int) -> LocalSubspace:
    """Closed-form image at an odd place p ≡ 1 mod 4 where exactly one root
    difference has odd valuation and the other two are invertible squares."""
    if p % 4 != 1:
        raise ValueError("closed form needs a residue field of size 1 mod 4")
    al, be, ga = curve.alpha, curve.beta, curve.gamma
    vals = [val(d, p) for d in (al, be, ga)]
    unit = 1 << 1  # nonsquare unit class
    pi = 1 << 0  # odd valuation, square unit
    w = local_bits_width(p)

    def ok_square(d: int) -> bool:
        return val(d, p) == 0 and is_local_square(d, p)

    if vals[0] % 2 == 1 and ok_square(be) and ok_square(ga):
        vecs = [pi | (pi << w), unit | (unit << w)]
    elif vals[1] % 2 == 1 and ok_square(al) and ok_square(ga):
        vecs = [pi, unit]
    elif vals[2] % 2 == 1 and ok_square(al) and ok_square(be):
        vecs = [pi << w, unit << w]
    else:
        raise ValueError("curve/place pair not of the supported shape")
    return LocalSubspace.spanned_by(p, vecs)


def unramified_subspace(v: int) -> LocalSubspace:
    """Classes with both coordinates of even valuation (finite v only)."""
    if v == INFINITY:
        raise ValueError("no unramified condition at the real place")
    w = local_bits_width(v)
    vecs = [1 << (c * w + i) for c in (0, 1) for i in range(1, w)]
    return LocalSubspace.spanned_by(v, vecs)


def full_subspace(v: int) -> LocalSubspace:
    w = pair_width(v)
    return LocalSubspace.spanned_by(v, [1 << i for i in range(w)])


def twisted_pair_subspace(curve: TwoTorsionCurve, p: int, pi: int) -> LocalSubspace:
    """Span of (alpha*beta, pi*alpha) and (-pi*alpha, -alpha*gamma) at p."""
    al, be, ga = curve.alpha, curve.beta, curve.gamma
    return LocalSubspace.spanned_by(
        p, [pair_vec(al * be, pi * al, p), pair_vec(-pi * al, -al * ga, p)]
    )


def local_condition(
    kind: str,
    curve: TwoTorsionCurve,
    v: int,
    pi: Optional[int] = None,
) -> LocalSubspace:
    """Selmer local condition: 'unramified', 'full', 'image', 'twisted-pair'."""
    if kind == "unramified":
        return unramified_subspace(v)
    if kind == "full":
        return full_subspace(v)
    if kind == "image":
        return local_image(curve, v)
    if kind == "twisted-pair":
        if pi is None:
            raise ValueError("twisted-pair condition needs a uniformizer")
        return twisted_pair_subspace(curve, v, pi)
    raise ValueError(f"unknown condition kind {kind!r}")
