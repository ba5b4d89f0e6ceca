"""Elliptic curves y^2 = (x - a1)(x - a2)(x - a3) with integer roots:
group law, torsion detection, quadratic twists, reduction types at p >= 5.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .arith import factor, is_local_square, jacobi_symbol, val, val_unit

Point = Optional[Tuple[Fraction, Fraction]]  # None is the point at infinity


class OutsideScope(Exception):
    """Input falls outside the supported class of curves or places."""


class ReductionType(Enum):
    GOOD = "good"
    SPLIT_MULTIPLICATIVE = "split multiplicative"
    NONSPLIT_MULTIPLICATIVE = "nonsplit multiplicative"
    ADDITIVE_POTENTIALLY_GOOD = "additive potentially good"


@dataclass(frozen=True, order=True)
class TwoTorsionCurve:
    """y^2 = (x - a1)(x - a2)(x - a3) with distinct integer roots."""

    a1: int
    a2: int
    a3: int

    def __post_init__(self):
        if len({self.a1, self.a2, self.a3}) != 3:
            raise ValueError("roots must be distinct")

    @property
    def roots(self) -> Tuple[int, int, int]:
        return (self.a1, self.a2, self.a3)

    @property
    def alpha(self) -> int:
        return self.a1 - self.a2

    @property
    def beta(self) -> int:
        return self.a1 - self.a3

    @property
    def gamma(self) -> int:
        return self.a2 - self.a3

    @property
    def discriminant(self) -> int:
        return 16 * (self.alpha * self.beta * self.gamma) ** 2

    def rhs(self, x: Fraction) -> Fraction:
        return (x - self.a1) * (x - self.a2) * (x - self.a3)

    def on_curve(self, pt: Point) -> bool:
        if pt is None:
            return True
        x, y = pt
        return y * y == self.rhs(x)

    def two_torsion(self) -> List[Point]:
        return [None] + [(Fraction(a), Fraction(0)) for a in self.roots]

    def quadratic_twist(self, d: int) -> "TwoTorsionCurve":
        """Twist by a squarefree d: same model with roots scaled by d."""
        if d == 0:
            raise ValueError("twist by zero")
        return TwoTorsionCurve(d * self.a1, d * self.a2, d * self.a3)

    def bad_primes(self, hint_primes: Iterable[int] = ()) -> Tuple[int, ...]:
        return factor(self.discriminant, hint_primes=hint_primes).primes()


def new_curve(a1: int, a2: int, a3: int) -> TwoTorsionCurve:
    return TwoTorsionCurve(a1, a2, a3)


def _weier(curve: TwoTorsionCurve) -> Tuple[int, int, int]:
    """Coefficients (s1, s2, s3) of y^2 = x^3 - s1 x^2 + s2 x - s3."""
    a1, a2, a3 = curve.roots
    return (a1 + a2 + a3, a1 * a2 + a1 * a3 + a2 * a3, a1 * a2 * a3)


def negate(pt: Point) -> Point:
    if pt is None:
        return None
    return (pt[0], -pt[1])


def add_points(curve: TwoTorsionCurve, p: Point, q: Point) -> Point:
    """Chord-tangent addition with exact rational arithmetic."""
    if p is None:
        return q
    if q is None:
        return p
    x1, y1 = p
    x2, y2 = q
    if x1 == x2:
        if y1 == -y2:
            return None
        # tangent: dy/dx = f'(x) / 2y
        s1, s2, _ = _weier(curve)
        lam = (3 * x1 * x1 - 2 * s1 * x1 + s2) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    # y^2 = x^3 - s1 x^2 + ... gives x1 + x2 + x3 = lam^2 + s1
    x3 = lam * lam + _weier(curve)[0] - x1 - x2
    y3 = lam * (x1 - x3) - y1
    return (x3, y3)


def scalar_multiple(curve: TwoTorsionCurve, k: int, pt: Point) -> Point:
    if k < 0:
        return scalar_multiple(curve, -k, negate(pt))
    acc: Point = None
    base = pt
    while k:
        if k & 1:
            acc = add_points(curve, acc, base)
        base = add_points(curve, base, base)
        k >>= 1
    return acc


def is_nontorsion(curve: TwoTorsionCurve, pt: Point) -> bool:
    """True iff pt has infinite order; torsion over Q has order <= 12, so a
    point is nontorsion iff no multiple k*pt with k <= 12 is the identity."""
    if pt is None:
        return False
    if not curve.on_curve(pt):
        raise ValueError("point not on curve")
    cur: Point = None
    for _ in range(12):
        cur = add_points(curve, cur, pt)
        if cur is None:
            return False
    return True


def search_points(curve: TwoTorsionCurve, height_bound: int) -> List[Point]:
    """Affine rational points with |num(x)|, den(x) <= height_bound."""
    out: List[Point] = []
    for den in range(1, height_bound + 1):
        for num in range(-height_bound, height_bound + 1):
            x = Fraction(num, den)
            if x.numerator != num or x.denominator != den:
                continue  # not in lowest terms; seen already
            fx = curve.rhs(x)
            if fx < 0:
                continue
            ynum = fx.numerator
            yden = fx.denominator
            rn = _isqrt_exact(ynum)
            rd = _isqrt_exact(yden)
            if rn is None or rd is None:
                continue
            y = Fraction(rn, rd)
            out.append((x, y))
            if y != 0:
                out.append((x, -y))
    return out


def _isqrt_exact(n: int) -> Optional[int]:
    import gmpy2

    r = int(gmpy2.isqrt(n))
    return r if r * r == n else None


def _minimal_at(curve: TwoTorsionCurve, p: int) -> TwoTorsionCurve:
    """Translate so a1 = 0 and strip p^2 from common root scale."""
    a1, a2, a3 = curve.roots
    b2, b3 = a2 - a1, a3 - a1
    while b2 % (p * p) == 0 and b3 % (p * p) == 0:
        b2 //= p * p
        b3 //= p * p
    return TwoTorsionCurve(0, b2, b3)


def reduction_type(curve: TwoTorsionCurve, p: int) -> ReductionType:
    """Reduction type at a prime p >= 5 (p in {2, 3} is out of scope)."""
    if p in (2, 3) or not p >= 5:
        raise OutsideScope(f"reduction type supported only at primes >= 5, got {p}")
    c = _minimal_at(curve, p)
    if c.discriminant % p:
        return ReductionType.GOOD
    diffs = {
        (0, 1): c.alpha,  # a1 - a2
        (0, 2): c.beta,
        (1, 2): c.gamma,
    }
    vanishing = [k for k, d in diffs.items() if d % p == 0]
    if len(vanishing) == 1:
        (i, j) = vanishing[0]
        k = ({0, 1, 2} - {i, j}).pop()
        roots = c.roots
        # the two colliding roots vs the third: node slopes differ by a
        # square factor (r_i - r_k); split iff that is a residue mod p
        t = (roots[i] - roots[k]) % p
        if jacobi_symbol(t, p) == 1:
            return ReductionType.SPLIT_MULTIPLICATIVE
        return ReductionType.NONSPLIT_MULTIPLICATIVE
    # all three roots collide: additive; potentially good iff v(j) >= 0,
    # i.e. 3 v(c4) >= v(disc)
    a1, a2, a3 = c.roots
    s1 = a1 + a2 + a3
    s2 = a1 * a2 + a1 * a3 + a2 * a3
    c4 = 16 * (s1 * s1 - 3 * s2)
    vdisc = val(c.discriminant, p)
    vc4 = val(c4, p) if c4 else vdisc  # c4 = 0 means j = 0
    if 3 * vc4 >= vdisc:
        return ReductionType.ADDITIVE_POTENTIALLY_GOOD
    raise OutsideScope(f"potentially multiplicative additive reduction at {p}")
