import random

import pytest

from selmerforge.arith import SymbolConstraint, find_prime, jacobi_symbol
from selmerforge.curve import (
    OutsideScope,
    ReductionType,
    new_curve,
    reduction_type,
)
from selmerforge.rootnumber import (
    local_root_number,
    parity_crosscheck,
    parity_flip_crosscheck,
    parity_ratio_formula,
    twist_parity_ratio,
)


def random_curve(rng, bound=30):
    while True:
        roots = rng.sample(range(-bound, bound + 1), 3)
        try:
            return new_curve(*roots)
        except ValueError:
            continue


def test_good_reduction_sign_exhaustive():
    e = new_curve(0, 17, 1)
    for p in range(5, 200):
        if not all(p % q for q in (2, 3, 5, 7, 11, 13)) and p not in (5, 7, 11, 13):
            continue
        from selmerforge.arith import is_prime

        if not is_prime(p) or e.discriminant % p == 0:
            continue
        assert local_root_number(e, p) == 1


def test_multiplicative_signs():
    e = new_curve(0, 17, 1)
    assert reduction_type(e, 17) == ReductionType.SPLIT_MULTIPLICATIVE
    assert local_root_number(e, 17) == -1
    # a nonsplit example: nonresidue slope
    rng = random.Random(0)
    found = 0
    while found < 5:
        e = random_curve(rng, 40)
        for p in (5, 7, 11, 13):
            try:
                rt = reduction_type(e, p)
            except OutsideScope:
                continue
            if rt == ReductionType.NONSPLIT_MULTIPLICATIVE:
                assert local_root_number(e, p) == 1
                found += 1


def test_additive_sign_floor_formula():
    # v(disc) = 6 at 5: exponent floor(30/12) = 2, sign +1
    e = new_curve(0, 5, 10)
    assert reduction_type(e, 5) == ReductionType.ADDITIVE_POTENTIALLY_GOOD
    assert local_root_number(e, 5) == 1
    # at 7: floor(42/12) = 3, sign -1
    e7 = new_curve(0, 7, 14)
    assert local_root_number(e7, 7) == -1
    with pytest.raises(OutsideScope):
        local_root_number(e, 2)
    with pytest.raises(OutsideScope):
        local_root_number(e, 3)


def test_parity_ratio_formula():
    assert parity_ratio_formula(13) == -1
    assert parity_ratio_formula(7) == 1


def admissible_pair(rng):
    """Random (E, q) meeting the pre-twist prime conditions."""
    while True:
        e = random_curve(rng, 25)
        odd_bad = [p for p in e.bad_primes() if p >= 5]
        split = [
            p
            for p in odd_bad
            if reduction_type(e, p) == ReductionType.SPLIT_MULTIPLICATIVE
        ]
        if not split:
            continue
        v = rng.choice(split)
        demands = [(v, -1)]
        demands += [(l, 1) for l in odd_bad if l != v]
        if 3 in e.bad_primes():
            demands += [(3, 1)]
        q = find_prime(SymbolConstraint(1, 24, tuple(demands)), exclude=set(odd_bad))
        return e, q, v


def test_twist_parity_ratio_validation():
    rng = random.Random(1)
    e, q, v = admissible_pair(rng)
    assert twist_parity_ratio(e, q) == -1  # admissible q is always 1 mod 8
    with pytest.raises(ValueError):
        twist_parity_ratio(e, 2)
    with pytest.raises(ValueError):
        twist_parity_ratio(e, v)  # divides the discriminant


def test_parity_flip_on_twenty_admissible_pairs():
    rng = random.Random(2)
    for _ in range(20):
        e, q, _ = admissible_pair(rng)
        assert parity_flip_crosscheck(e, q), (e, q)


def test_parity_crosscheck_reports_honestly():
    e = new_curve(0, 1, -1)
    rep = parity_crosscheck(e)
    assert rep.selmer_dim == 2
    assert rep.global_root_number is None  # places 2, 3, infinity out of scope
    assert rep.agrees is None
    assert any("out of scope" in s for s in rep.local_signs.values())
