"""Exact rational/modular arithmetic: quadratic symbols, square classes,
factorization, CRT, and constraint-driven prime search.

Places of Q are plain ints: a prime p, or the constant INFINITY (0) for the
real place.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import gmpy2
import numpy as np

INFINITY = 0

Rat = Union[int, Fraction]

# Miller-Rabin with this witness set is deterministic below this bound.
_MR_BOUND = 3317044064679887385961981
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_TRIAL_BOUND = 10**6
_small_primes_cache: Optional[np.ndarray] = None
_small_primes_list: Optional[List[int]] = None


class FactorizationError(Exception):
    """Raised when factoring exceeds its effort budget."""


def small_primes() -> List[int]:
    """All primes below 10**6, sieved once and cached."""
    global _small_primes_cache, _small_primes_list
    if _small_primes_list is None:
        sieve = np.ones(_TRIAL_BOUND, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(_TRIAL_BOUND**0.5) + 1):
            if sieve[p]:
                sieve[p * p :: p] = False
        _small_primes_cache = np.nonzero(sieve)[0].astype(np.int64)
        _small_primes_list = [int(p) for p in _small_primes_cache]
    return _small_primes_list


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin below 3.3e24, BPSW + 64 rounds above."""
    n = int(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n < _MR_BOUND:
        d = n - 1
        r = 0
        while d % 2 == 0:
            d //= 2
            r += 1
        for a in _MR_WITNESSES:
            x = pow(a, d, n)
            if x in (1, n - 1):
                continue
            for _ in range(r - 1):
                x = x * x % n
                if x == n - 1:
                    break
            else:
                return False
        return True
    return bool(gmpy2.is_prime(gmpy2.mpz(n), 64))


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a|n); n must be odd and positive."""
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"jacobi_symbol needs odd positive n, got {n}")
    return int(gmpy2.jacobi(gmpy2.mpz(a), gmpy2.mpz(n)))


def _as_int_pair(x: Rat) -> int:
    """Integer in the same rational square class as x."""
    if isinstance(x, Fraction):
        if x == 0:
            raise ValueError("zero has no square class")
        return x.numerator * x.denominator
    if x == 0:
        raise ValueError("zero has no square class")
    return int(x)


def val(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


def val_unit(n: int, p: int) -> Tuple[int, int]:
    """(v_p(n), unit part) for a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a: Rat, b: Rat, v: int) -> int:
    """Hilbert symbol (a,b)_v over Q_v; v is a prime or INFINITY."""
    a = _as_int_pair(a)
    b = _as_int_pair(b)
    if v == INFINITY:
        return -1 if (a < 0 and b < 0) else 1
    p = v
    if p == 2:
        va, ua = val_unit(a, 2)
        vb, ub = val_unit(b, 2)
        eps = ((ua - 1) // 2) * ((ub - 1) // 2)
        omega_a = (ua * ua - 1) // 8
        omega_b = (ub * ub - 1) // 8
        e = eps + va * omega_b + vb * omega_a
        return -1 if e % 2 else 1
    va, ua = val_unit(a, p)
    vb, ub = val_unit(b, p)
    s = 1
    if (va * vb) % 2 and p % 4 == 3:
        s = -s
    if vb % 2:
        s *= jacobi_symbol(ua, p)
    if va % 2:
        s *= jacobi_symbol(ub, p)
    return s


@dataclass(frozen=True)
class LocalSquareClass:
    """Square class of Q_v*: valuation parity plus unit data.

    bits layout (vector, low bit first):
      odd p:    (valuation parity, 1 iff unit part is a nonsquare mod p)
      p = 2:    (valuation parity, 1 iff unit ≡ 3 mod 4, 1 iff unit ≡ 5,7 mod 8)
      INFINITY: (1 iff negative,)
    The all-zero vector is the trivial class; vectors add under multiplication.
    """

    place: int
    bits: Tuple[int, ...]

    @property
    def vector(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def is_trivial(self) -> bool:
        return not any(self.bits)


def local_bits_width(v: int) -> int:
    """Dimension of Q_v*/squares as an F2 space."""
    if v == INFINITY:
        return 1
    if v == 2:
        return 3
    return 2


def square_class_at(x: Rat, v: int) -> LocalSquareClass:
    """Image of a nonzero rational in Q_v*/(Q_v*)^2."""
    n = _as_int_pair(x)
    if v == INFINITY:
        return LocalSquareClass(v, (1 if n < 0 else 0,))
    if v == 2:
        e, u = val_unit(n, 2)
        r = u % 8
        return LocalSquareClass(v, (e % 2, 1 if r in (3, 7) else 0, 1 if r in (5, 7) else 0))
    e, u = val_unit(n, v)
    return LocalSquareClass(v, (e % 2, 1 if jacobi_symbol(u, v) == -1 else 0))


def square_class_vector(x: Rat, v: int) -> int:
    """square_class_at as a packed F2 vector."""
    return square_class_at(x, v).vector


def is_local_square(x: Rat, v: int) -> bool:
    return square_class_at(x, v).is_trivial()


@dataclass(frozen=True)
class Factorization:
    """unit in {1,-1} and sorted prime powers with positive exponents."""

    unit: int
    factors: Tuple[Tuple[int, int], ...]

    def value(self) -> int:
        n = self.unit
        for p, e in self.factors:
            n *= p**e
        return n

    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def squarefree_part(self) -> int:
        n = self.unit
        for p, e in self.factors:
            if e % 2:
                n *= p
        return n


def _brent_rho(n: int, budget: int) -> Optional[int]:
    """Brent's cycle variant of Pollard rho; deterministic parameter sweep."""
    for c in range(1, 20):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = y
        steps = 0
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = int(gmpy2.gcd(q, n))
                k += m
                steps += min(m, r - k + m)
                if steps > budget:
                    return None
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = int(gmpy2.gcd(abs(x - ys), n))
        if g != n:
            return g
    return None


def factor(
    n: int,
    hint_primes: Iterable[int] = (),
    rho_budget: int = 2_000_000,
) -> Factorization:
    """Factor a nonzero integer: hinted divisions, trial division below 10**6,
    then Pollard rho with a hard effort cap.  Raises FactorizationError
    rather than returning a partial answer."""
    if n == 0:
        raise ValueError("cannot factor zero")
    unit = 1 if n > 0 else -1
    n = abs(n)
    found: Dict[int, int] = {}
    for p in sorted(set(int(q) for q in hint_primes)):
        if p > 1 and n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            found[p] = e
    for p in small_primes():
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            found[p] = found.get(p, 0) + e
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            found[m] = found.get(m, 0) + 1
            continue
        root = gmpy2.isqrt(m)
        if root * root == m:
            stack += [int(root), int(root)]
            continue
        d = _brent_rho(m, rho_budget)
        if d is None or d in (1, m):
            raise FactorizationError(f"effort cap exceeded on cofactor of {m.bit_length()} bits")
        stack += [d, m // d]
    return Factorization(unit, tuple(sorted(found.items())))


def squarefree_mul(a: int, b: int) -> int:
    """Product of two squarefree integers, reduced to its squarefree part."""
    g = int(gmpy2.gcd(abs(a), abs(b)))
    return (a // g) * (b // g)


def crt(congruences: Sequence[Tuple[int, int]]) -> Tuple[int, int]:
    """Solve x ≡ r_i (mod m_i); returns (x, lcm).  Raises on inconsistency."""
    x, m = 0, 1
    for r, mi in congruences:
        if mi <= 0:
            raise ValueError("moduli must be positive")
        g = int(gmpy2.gcd(m, mi))
        if (r - x) % g:
            raise ValueError("inconsistent congruences")
        lcm = m // g * mi
        t = ((r - x) // g * int(gmpy2.invert(m // g, mi // g))) % (mi // g)
        x = (x + m * t) % lcm
        m = lcm
    return x, m


@dataclass(frozen=True)
class SymbolConstraint:
    """Find p ≡ residue (mod modulus) with jacobi(c, p) == eps for each demand."""

    residue: int = 1
    modulus: int = 1
    demands: Tuple[Tuple[int, int], ...] = ()


class PrimeSearchError(Exception):
    """No prime satisfying the constraint was found below the bound."""


# Largest odd prime modulus for which we build a residue lookup table in the
# progression filter; demands whose value has a bigger odd prime factor are
# re-checked directly on the (already sparse) candidates instead.
_TABLE_LIMIT = 1 << 17


def _demand_tables(demands: Sequence[Tuple[int, int]]):
    """Decompose each jacobi demand into parity tables over small moduli.

    jacobi(c, p) for odd positive p is multiplicative in c; writing
    c = sign * 2^e * prod q^f, the sign and 2 parts depend on p mod 8, and by
    reciprocity each odd q part depends on p mod q and p mod 4.  Returns
    (moduli, per-demand list of (modulus index, table), per-demand target bit);
    table[r] is the parity contribution, or 2 for a dead residue.  Demands
    whose value has an odd-multiplicity prime factor above the table limit
    (or resists factoring) are skipped — callers must verify them directly.
    """
    moduli: List[int] = [8]
    mod_index = {8: 0}
    specs = []
    targets = []
    for c, eps in demands:
        try:
            fac = factor(c)
        except FactorizationError:
            continue
        if any(q > _TABLE_LIMIT and f % 2 for q, f in fac.factors):
            continue
        t8 = [0] * 8
        if fac.unit < 0:
            for r in (3, 5, 7, 1):
                if (r - 1) // 2 % 2:
                    t8[r] ^= 1
        e2 = dict(fac.factors).get(2, 0)
        if e2 % 2:
            for r in (3, 5):
                t8[r] ^= 1
        parts = [(0, t8)]
        for q, f in fac.factors:
            if q == 2 or f % 2 == 0:
                continue
            if q % 4 == 3:
                for r in (3, 7):
                    parts[0][1][r] ^= 1
            if q not in mod_index:
                mod_index[q] = len(moduli)
                moduli.append(q)
            tq = [0] * q
            for r in range(q):
                if r == 0:
                    tq[r] = 2
                elif jacobi_symbol(r, q) == -1:
                    tq[r] = 1
            parts.append((mod_index[q], tq))
        specs.append(parts)
        targets.append(1 if eps == -1 else 0)
    return moduli, specs, targets


def _check_demands_direct(p: int, demands: Sequence[Tuple[int, int]]) -> bool:
    return all(jacobi_symbol(c, p) == eps for c, eps in demands)


def find_prime(
    constraint: SymbolConstraint,
    exclude: Iterable[int] = (),
    bound: int = 10**9,
) -> int:
    """Smallest prime satisfying the constraint, not in exclude, below bound."""
    excl = set(int(x) for x in exclude)
    r, m = constraint.residue % constraint.modulus, constraint.modulus
    # merge oddness into the progression
    if m % 2 == 0:
        if r % 2 == 0:
            if r == 2 and not constraint.demands and 2 not in excl and bound >= 2:
                return 2
            raise PrimeSearchError("even residue class contains at most one prime")
    else:
        r, m = crt([(r, m), (1, 2)])
    return _find_prime_vector(r, m, constraint.demands, excl, bound)


def _find_prime_vector(r, m, demands, excl, bound):
    from . import _kernels

    moduli, specs, targets = _demand_tables(demands)
    block = 1 << 20
    k0 = 0
    while True:
        n0 = r + m * k0
        if n0 > bound:
            raise PrimeSearchError(f"no prime below {bound}")
        cand = _kernels.filter_progression(
            n0, m, block, moduli, specs, targets
        )
        for n in cand:
            n = int(n)
            if n < 2 or n > bound:
                continue
            if n not in excl and is_prime(n) and _check_demands_direct(n, demands):
                return n
        k0 += block


def mod_sqrt(a: int, p: int) -> int:
    """Square root mod an odd prime (Tonelli-Shanks); raises if nonresidue."""
    a %= p
    if a == 0:
        return 0
    if jacobi_symbol(a, p) != 1:
        raise ValueError("not a quadratic residue")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while jacobi_symbol(z, p) != -1:
        z += 1
    m, c, t, rt = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, rt = t * c % p, rt * b % p
    return rt


def smallest_nonresidue(p: int) -> int:
    """Smallest quadratic nonresidue mod an odd prime."""
    for g in range(2, p):
        if jacobi_symbol(g, p) == -1:
            return g
    raise ValueError("no nonresidue found")
