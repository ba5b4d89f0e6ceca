"""Solver for the three-equation square system over a prime field F_q:

    c1 u + c2 v = d1 s1^2 + l1
    c3 u + c4 v = d2 s2^2 + l2
    c5 u + c6 v = d3 s3^2 + l3

with s1, s2, s3 nonzero, under the nondegeneracy conditions
c1 c4 - c2 c3, c1 c6 - c2 c5, c3 c6 - c4 c5 all nonzero.  Eliminating (u, v)
from the first two equations reduces the third to a ternary square
condition, which a scan over (s1, s2) settles.
"""

import random
from dataclasses import dataclass
from typing import Optional, Tuple

from .arith import is_prime, jacobi_symbol, mod_sqrt


class UnsolvableInstance(Exception):
    """Scan exhausted without a solution (cannot happen for valid instances)."""


@dataclass(frozen=True)
class SquareSystemInstance:
    q: int
    c: Tuple[int, int, int, int, int, int]
    delta: Tuple[int, int, int]
    lam: Tuple[int, int, int]

    def __post_init__(self):
        q = self.q
        if q <= 5 or not is_prime(q):
            raise ValueError("q must be a prime greater than 5")
        c = tuple(x % q for x in self.c)
        d = tuple(x % q for x in self.delta)
        l = tuple(x % q for x in self.lam)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "lam", l)
        if any(x == 0 for x in d):
            raise ValueError("delta coefficients must be nonzero")
        c1, c2, c3, c4, c5, c6 = c
        for name, det in (
            ("c1c4-c2c3", c1 * c4 - c2 * c3),
            ("c1c6-c2c5", c1 * c6 - c2 * c5),
            ("c3c6-c4c5", c3 * c6 - c4 * c5),
        ):
            if det % q == 0:
                raise ValueError(f"degenerate instance: {name} = 0 mod q")


Solution = Tuple[int, int, int, int, int]  # (u, v, s1, s2, s3)


def _uv_from(inst: SquareSystemInstance, s1: int, s2: int) -> Tuple[int, int]:
    q = inst.q
    c1, c2, c3, c4, _, _ = inst.c
    d1, d2, _ = inst.delta
    l1, l2, _ = inst.lam
    r1 = (d1 * s1 * s1 + l1) % q
    r2 = (d2 * s2 * s2 + l2) % q
    det_inv = pow(c1 * c4 - c2 * c3, -1, q)
    u = (c4 * r1 - c2 * r2) * det_inv % q
    v = (-c3 * r1 + c1 * r2) * det_inv % q
    return u, v


def _finish(inst: SquareSystemInstance, s1: int, s2: int) -> Optional[Solution]:
    q = inst.q
    _, _, _, _, c5, c6 = inst.c
    d3 = inst.delta[2]
    l3 = inst.lam[2]
    u, v = _uv_from(inst, s1, s2)
    w = (c5 * u + c6 * v - l3) * pow(d3, -1, q) % q
    if w == 0 or jacobi_symbol(w, q) != 1:
        return None
    r = mod_sqrt(w, q)
    s3 = min(r, q - r)
    return (u, v, s1, s2, s3)


def verify_solution(inst: SquareSystemInstance, sol: Solution) -> bool:
    u, v, s1, s2, s3 = sol
    q = inst.q
    if any(s % q == 0 for s in (s1, s2, s3)):
        return False
    c = inst.c
    rows = ((c[0], c[1]), (c[2], c[3]), (c[4], c[5]))
    ss = (s1, s2, s3)
    for i in range(3):
        lhs = (rows[i][0] * u + rows[i][1] * v) % q
        rhs = (inst.delta[i] * ss[i] * ss[i] + inst.lam[i]) % q
        if lhs != rhs:
            return False
    return True


def solve_square_system(
    inst: SquareSystemInstance,
    method: str = "auto",
    seed: int = 0,
    max_random_tries: int = 10**6,
) -> Solution:
    """A solution (u, v, s1, s2, s3); s_i nonzero, all equations verified.

    method 'lex' scans (s1, s2) in lexicographic order and is fully
    deterministic; 'random' uses a seeded generator and is faster for large
    q; 'auto' picks lex for q below 10**4.
    """
    if method == "auto":
        method = "lex" if inst.q < 10**4 else "random"
    q = inst.q
    if method == "lex":
        for s1 in range(1, q):
            for s2 in range(1, q):
                sol = _finish(inst, s1, s2)
                if sol is not None:
                    assert verify_solution(inst, sol)
                    return sol
        raise UnsolvableInstance(f"no solution over F_{q}")
    if method == "random":
        rng = random.Random(seed)
        for _ in range(max_random_tries):
            s1 = rng.randrange(1, q)
            s2 = rng.randrange(1, q)
            sol = _finish(inst, s1, s2)
            if sol is not None:
                assert verify_solution(inst, sol)
                return sol
        raise UnsolvableInstance(f"random scan budget exhausted over F_{q}")
    raise ValueError(f"unknown method {method!r}")
