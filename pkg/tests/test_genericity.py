import math
import random

import pytest

from selmerforge.arith import factor, jacobi_symbol
from selmerforge.curve import TwoTorsionCurve
from selmerforge.genericity import (
    ConicSolution,
    GenericityFailure,
    GenericityWitness,
    NotLocallySolvable,
    conic_solve,
    construct_3generic,
    is_n_generic,
)


def check_conic_solution(sol: ConicSolution) -> None:
    """Oracle: direct substitution plus the primitivity and gcd contracts."""
    a, b, c, X, Y, Z = sol.a, sol.b, sol.c, sol.X, sol.Y, sol.Z
    assert a * X * X + b * Y * Y == c * Z * Z
    assert (X, Y, Z) != (0, 0, 0)
    assert math.gcd(math.gcd(X, Y), Z) == 1
    assert math.gcd(Y * Z, a) == 1
    assert math.gcd(X * Z, b) == 1
    assert math.gcd(X * Y, c) == 1


def qualifying_primes_by_trial_division(coeffs, i, j, k, limit=10**6):
    """Oracle: factor the difference by plain trial division and re-apply
    the four conditions directly.  Requires the difference to factor
    completely below the limit."""
    diff = abs(coeffs[i] - coeffs[j])
    other = coeffs[k] - coeffs[i]
    out = []
    rest, p = diff, 2
    while p <= limit and rest > 1:
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            if (
                p > 5
                and p % 8 == 1
                and e % 2 == 1
                and other % p != 0
                and jacobi_symbol(other, p) == 1
            ):
                out.append(p)
        p += 1
    assert rest == 1, "oracle needs a smooth difference"
    return out


def small_1generic_curve():
    """Three-prime instance of the nine-prime construction: the smallest
    primes = 1 mod 8 with pairwise Legendre symbol +1 are 17, 89, 257."""
    sol = conic_solve(17, 89, 257)
    return TwoTorsionCurve(0, -17 * sol.X**2, -257 * sol.Z**2)


def test_conic_frozen_examples():
    sol = conic_solve(2, 3, 5)
    check_conic_solution(sol)
    assert (sol.X, sol.Y, sol.Z) == (1, 1, 1)

    sol = conic_solve(1, 1, 1)
    check_conic_solution(sol)

    with pytest.raises(NotLocallySolvable) as exc:
        conic_solve(1, 1, 7)
    assert exc.value.place == 7


def test_conic_rejects_bad_coefficients():
    with pytest.raises(ValueError):
        conic_solve(4, 3, 5)  # not squarefree
    with pytest.raises(ValueError):
        conic_solve(6, 10, 7)  # not pairwise coprime
    with pytest.raises(ValueError):
        conic_solve(-2, 3, 5)


def test_conic_random_locally_solvable_triples():
    rng = random.Random(20260827)
    solved = 0
    while solved < 30:
        vals = []
        while len(vals) < 3:
            v = rng.randrange(1, 10**4)
            f = factor(v)
            if any(e > 1 for _, e in f.factors):
                continue
            if any(math.gcd(v, w) != 1 for w in vals):
                continue
            vals.append(v)
        a, b, c = vals
        try:
            sol = conic_solve(a, b, c)
        except NotLocallySolvable:
            continue
        check_conic_solution(sol)
        solved += 1


def test_conic_solution_type_validates():
    with pytest.raises(ValueError):
        ConicSolution(2, 3, 5, 0, 0, 0)
    with pytest.raises(ValueError):
        ConicSolution(2, 3, 5, 1, 1, 2)
    with pytest.raises(ValueError):
        ConicSolution(2, 3, 5, 2, 2, 2)  # not primitive


def test_n0_is_trivially_generic():
    res = is_n_generic(TwoTorsionCurve(0, 1, -1), 0)
    assert isinstance(res, GenericityWitness)
    assert all(len(ps) >= 0 for ps in res.primes_by_pair)


def test_small_differences_fail_n1():
    res = is_n_generic(TwoTorsionCurve(0, 1, -1), 1)
    assert isinstance(res, GenericityFailure)
    assert res.pair == (0, 1)
    assert res.found == ()


def test_witness_matches_trial_division_oracle():
    curve = small_1generic_curve()
    res = is_n_generic(curve, 1)
    assert isinstance(res, GenericityWitness)
    coeffs = (curve.a1, curve.a2, curve.a3)
    pairs = ((0, 1, 2), (0, 2, 1), (1, 2, 0))
    for (i, j, k), got in zip(pairs, res.primes_by_pair):
        assert sorted(got) == qualifying_primes_by_trial_division(coeffs, i, j, k)


def test_witness_reverifies_and_rejects_tampering():
    curve = small_1generic_curve()
    res = is_n_generic(curve, 1)
    assert isinstance(res, GenericityWitness)
    res.verify()
    with pytest.raises(ValueError):
        GenericityWitness(res.coefficients, res.n, ((13,), res.primes_by_pair[1], res.primes_by_pair[2]))


def test_construct_3generic_end_to_end():
    curve, witness = construct_3generic()
    # independent re-check, including all three gcd side conditions upstream
    res = is_n_generic(curve, 3, hint_primes=[p for ps in witness.primes_by_pair for p in ps])
    assert isinstance(res, GenericityWitness)
    assert all(len(ps) >= 3 for ps in res.primes_by_pair)
    # the three differences multiply to abc times a square
    abc = 1
    for ps in witness.primes_by_pair:
        for p in ps:
            abc *= p
    prod = curve.alpha * curve.beta * curve.gamma
    q, r = divmod(abs(prod), abc)
    assert r == 0
    s = math.isqrt(q)
    assert s * s == q


def test_construct_3generic_deterministic():
    c1, w1 = construct_3generic(seed=0)
    c2, w2 = construct_3generic(seed=0)
    assert (c1.a1, c1.a2, c1.a3) == (c2.a1, c2.a2, c2.a3)
    assert w1.primes_by_pair == w2.primes_by_pair
