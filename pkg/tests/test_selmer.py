import random

import pytest

from selmerforge.arith import INFINITY, SymbolConstraint, find_prime, jacobi_symbol
from selmerforge.curve import new_curve
from selmerforge.localdescent import local_image, pair_width
from selmerforge.selmer import (
    SelmerElement,
    SelmerStructureSpec,
    diag_dims,
    project_away,
    rank_change,
    restriction_dim,
    sel2,
    structure_group,
    twist_chain_identity,
)


def random_curve(rng, bound=30):
    while True:
        roots = rng.sample(range(-bound, bound + 1), 3)
        try:
            return new_curve(*roots)
        except ValueError:
            continue


def exhaustive_sel2_dim(curve):
    """Independent oracle: scan every square-class pair supported on the bad
    set and test local membership at each relevant place."""
    from selmerforge.arith import square_class_vector

    bad = curve.bad_primes()
    gens = [-1] + list(bad)
    divisors = [1]
    for g in gens:
        divisors += [d * g for d in divisors]
    places = [INFINITY] + list(bad)
    images = {v: local_image(curve, v) for v in places}
    classes = {
        v: {d: square_class_vector(d, v) for d in divisors} for v in places
    }
    count = 0
    for d1 in divisors:
        for d2 in divisors:
            ok = True
            for v in places:
                w = pair_width(v) // 2
                vec = classes[v][d1] | (classes[v][d2] << w)
                if not images[v].member(vec):
                    ok = False
                    break
            if ok:
                count += 1
    dim = count.bit_length() - 1
    assert 1 << dim == count
    return dim


def test_sel2_frozen_dimensions():
    assert sel2(new_curve(0, 1, -1)).dim == 2
    assert sel2(new_curve(0, 5, -5)).dim == 3


def test_sel2_contains_torsion_images():
    rng = random.Random(0)
    for _ in range(10):
        e = random_curve(rng, 25)
        g = sel2(e)
        from selmerforge.arith import factor

        d1 = factor(e.alpha * e.beta).squarefree_part()
        d2 = factor(e.alpha).squarefree_part()
        assert g.member(SelmerElement(d1, d2))
        assert g.member(
            SelmerElement(
                factor(-e.alpha).squarefree_part(),
                factor(-e.alpha * e.gamma).squarefree_part(),
            )
        )
        assert g.dim >= 2


def test_sel2_matches_exhaustive_oracle():
    rng = random.Random(1)
    for _ in range(20):
        e = random_curve(rng, 50)
        assert sel2(e).dim == exhaustive_sel2_dim(e)


def test_structure_group_is_deterministic():
    e = new_curve(0, 5, -5)
    spec = SelmerStructureSpec(e, (INFINITY, 2, 5), ((17, 0), (41, 1)))
    a = structure_group(spec)
    b = structure_group(spec)
    assert a.exponent_basis == b.exponent_basis
    assert a.basis == b.basis


def base_spec(curve):
    bad = curve.bad_primes()
    T = (INFINITY, 2) + tuple(p for p in bad if p != 2)
    return SelmerStructureSpec(curve, T)


def test_structure_group_matches_sel2_on_empty_chain():
    rng = random.Random(2)
    for _ in range(5):
        e = random_curve(rng, 20)
        assert structure_group(base_spec(e)).dim == sel2(e).dim


def test_rank_change_fifty_extensions():
    rng = random.Random(3)
    steps = 0
    while steps < 50:
        e = random_curve(rng, 20)
        spec = base_spec(e)
        used = set(spec.T)
        dims = [structure_group(spec).dim]
        for _ in range(rng.randint(1, 3)):
            while True:
                p = rng.choice([3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41])
                if p not in used:
                    break
            bit = rng.randint(0, 1)
            n = rank_change(spec, p, bit, check=True)
            assert n in (-2, 0, 2)
            spec = spec.extend(p, bit)
            used.add(p)
            dims.append(dims[-1] + n)
            steps += 1
        # parity constant along the chain
        assert len({d % 2 for d in dims}) == 1
        assert structure_group(spec).dim == dims[-1]


def make_admissible_twist(curve, rng, nprimes):
    """A positive squarefree d, locally square at every place of T."""
    T_odd = [p for p in curve.bad_primes() if p != 2]
    exclude = set(curve.bad_primes())
    primes = []
    if nprimes == 1:
        demands = tuple((l, 1) for l in T_odd)
        q = find_prime(SymbolConstraint(1, 8, demands), exclude=exclude)
        primes = [q]
    else:
        q1 = find_prime(
            SymbolConstraint(1 + 8 * rng.randint(0, 40), 8 * 41, ()),
            exclude=exclude,
            bound=10**7,
        )
        # both primes are 1 mod 8 and positive, so (q|l) = (l|q); compensate
        # q2 so the product is a square at 2 and at each odd bad prime
        demands = tuple((l, jacobi_symbol(q1, l)) for l in T_odd)
        q2 = find_prime(SymbolConstraint(1, 8, demands), exclude=exclude | {q1})
        primes = [q1, q2]
    d = 1
    for q in primes:
        d *= q
    return d, primes


def test_twist_chain_identity_fifty_pairs():
    rng = random.Random(4)
    done = 0
    while done < 50:
        e = random_curve(rng, 15)
        d, primes = make_admissible_twist(e, rng, rng.choice([1, 2]))
        T = (INFINITY, 2) + tuple(p for p in e.bad_primes() if p != 2)
        twist_dim, chain_dim = twist_chain_identity(e, T, d, primes)
        assert twist_dim == 2 + chain_dim, (e, d)
        done += 1


def test_twist_chain_identity_rejects_bad_twist():
    e = new_curve(0, 5, -5)
    T = (INFINITY, 2, 5)
    with pytest.raises(ValueError):
        twist_chain_identity(e, T, 3, [3])  # 3 is not a square at 2


def test_diag_dims_and_restriction():
    e = new_curve(0, 5, -5)
    spec = base_spec(e)
    v1, v2, v3 = diag_dims(spec)
    ray = structure_group(spec.as_mode("ray"))
    assert 0 <= v1 <= ray.dim and 0 <= v2 <= ray.dim and 0 <= v3 <= ray.dim
    g = structure_group(spec)
    for v in spec.T:
        if v != INFINITY:
            assert restriction_dim(g, v) <= min(g.dim, pair_width(v))


def test_project_away():
    el = SelmerElement(3 * 17, 5 * 17)
    out = project_away(el, [(17, 7 * 17)])
    assert out == SelmerElement(3 * 7, 5 * 7)
    # untouched when the prime does not divide a coordinate
    assert project_away(SelmerElement(3, 5), [(17, 7 * 17)]) == SelmerElement(3, 5)
