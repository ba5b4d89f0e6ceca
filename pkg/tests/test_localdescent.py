import random
from fractions import Fraction

import pytest

from selmerforge import f2
from selmerforge.arith import (
    INFINITY,
    is_local_square,
    jacobi_symbol,
    local_bits_width,
    square_class_vector,
)
from selmerforge.curve import TwoTorsionCurve, new_curve
from selmerforge.localdescent import (
    LiftingDepthError,
    LocalSubspace,
    full_subspace,
    image_dim_target,
    is_isotropic,
    local_condition,
    local_image,
    pair_vec,
    pairing_bit,
    split_multiplicative_image,
    torsion_image_vectors,
    twisted_pair_subspace,
    unramified_subspace,
)


def random_curve(rng, bound=30):
    while True:
        roots = rng.sample(range(-bound, bound + 1), 3)
        try:
            return new_curve(*roots)
        except ValueError:
            continue


def sample_image_classes(curve, p, rng, tries=400):
    """Independent sampling oracle: classes of (x-a1, x-a2) over random
    rational x with f(x) a local square."""
    out = set()
    for _ in range(tries):
        vnum = rng.randint(0, 3)
        vden = rng.randint(0, 2)
        x = Fraction(
            rng.randint(1, 200) * p**vnum * rng.choice([1, -1]),
            rng.randint(1, 200) * p ** (2 * vden),
        )
        fx = curve.rhs(x)
        if fx != 0 and x not in curve.roots and is_local_square(fx, p):
            out.add(pair_vec(x - curve.a1, x - curve.a2, p))
    return out


def test_image_dimension_isotropy_and_sampling():
    rng = random.Random(0)
    for _ in range(15):
        e = random_curve(rng, 20)
        for v in [INFINITY, 2, 3, 5, 7, 11]:
            img = local_image(e, v)
            assert img.dim == image_dim_target(v)
            assert is_isotropic(img)
            for t in torsion_image_vectors(e, v):
                assert img.member(t)
            if v not in (INFINITY, 2):
                sampled = sample_image_classes(e, v, rng, tries=150)
                for s in sampled:
                    assert img.member(s)


def test_image_maximality_at_odd_places():
    # no unramified class outside the image pairs trivially with all of it
    rng = random.Random(1)
    for _ in range(10):
        e = random_curve(rng, 15)
        for p in (3, 5, 13):
            img = local_image(e, p)
            for u in range(1 << 4):
                w = local_bits_width(p)
                unram = (u & 1) == 0 and ((u >> w) & 1) == 0
                if not unram or img.member(u):
                    continue
                assert any(pairing_bit(u, b, p) for b in img.basis)


def test_image_good_odd_place_is_unramified():
    e = new_curve(0, 17, 1)
    for p in (5, 7, 11):
        assert e.discriminant % p
        assert local_image(e, p).basis == unramified_subspace(p).basis


def test_image_real_place_frozen():
    e = new_curve(0, 1, -1)
    img = local_image(e, INFINITY)
    assert img.basis == (3,)  # (-1, -1)


def test_image_split_multiplicative_frozen():
    e = new_curve(0, 17, 1)
    img = local_image(e, 17)
    # alpha = -17: odd valuation; beta = -1, gamma = 16 are squares mod 17
    assert img.basis == split_multiplicative_image(e, 17).basis
    w = local_bits_width(17)
    assert img.member(0b01 | (0b01 << w))  # (pi, pi)
    assert img.member(0b10 | (0b10 << w))  # (eps, eps)
    assert not img.member(0b01)  # (pi, 1)


def synthesize_case(rng, case):
    """Curve and odd prime p ≡ 1 mod 4 meeting one closed-form hypothesis."""
    p = rng.choice([5, 13, 17, 29, 37])
    while True:
        a1 = rng.randint(-20, 20)
        u = rng.choice([1, 3, 7, 9])  # keep v_p odd = 1
        s = rng.randint(1, p - 1)
        t = rng.randint(1, p - 1)
        if jacobi_symbol(s, p) != 1 or jacobi_symbol(t, p) != 1:
            continue
        if case == 0:  # v(alpha) odd; beta, gamma unit squares
            a2 = a1 - p * u
            a3 = a1 - s
        elif case == 1:  # v(beta) odd; alpha, gamma unit squares
            a3 = a1 - p * u
            a2 = a1 - s
        else:  # v(gamma) odd; alpha, beta unit squares
            a2 = a1 - s
            a3 = a2 - p * u
        try:
            e = new_curve(a1, a2, a3)
        except ValueError:
            continue
        al, be, ga = e.alpha, e.beta, e.gamma
        odd_one = (al, be, ga)[case]
        others = [d for d in (al, be, ga) if d != odd_one]
        if (
            (abs(odd_one) // p) % p != 0
            and all(d % p and jacobi_symbol(d, p) == 1 for d in others)
        ):
            return e, p


def test_closed_form_agreement_thirty_per_case():
    rng = random.Random(2)
    for case in (0, 1, 2):
        for _ in range(30):
            e, p = synthesize_case(rng, case)
            enum = local_image(e, p)
            closed = split_multiplicative_image(e, p)
            assert enum.basis == closed.basis, (e, p, case)


def test_case_i_uniqueness_of_unramified_class():
    # at a case-(i) place, the only nontrivial unramified class orthogonal
    # to (pi, pi) is (eps, eps)
    rng = random.Random(3)
    e, p = synthesize_case(rng, 0)
    w = local_bits_width(p)
    pipi = 0b01 | (0b01 << w)
    good = [
        u
        for u in range(1, 1 << (2 * w))
        if (u & 1) == 0 and ((u >> w) & 1) == 0 and pairing_bit(u, pipi, p) == 0
    ]
    assert good == [0b10 | (0b10 << w)]


def test_twisted_pair_and_conditions():
    e = new_curve(0, 5, -5)
    p = 17  # good reduction at 17
    for pi in (17, 3 * 17):
        sub = twisted_pair_subspace(e, p, pi)
        assert sub.dim == 2
        assert is_isotropic(sub)
        assert sub.contains_pair(e.alpha * e.beta, pi * e.alpha)
        assert sub.contains_pair(-pi * e.alpha, -e.alpha * e.gamma)
    assert local_condition("unramified", e, p).dim == 2
    assert local_condition("full", e, p).dim == 4
    assert local_condition("full", e, 2).dim == 6
    assert local_condition("image", e, p).dim == 2
    assert local_condition("twisted-pair", e, p, pi=17).dim == 2
    with pytest.raises(ValueError):
        local_condition("twisted-pair", e, p)
    with pytest.raises(ValueError):
        local_condition("nope", e, p)


def test_lifting_window_failure_is_explicit():
    e = new_curve(0, 9, 27)  # torsion classes dependent at 3
    with pytest.raises(LiftingDepthError):
        local_image(e, 3, window=1)


def test_restrict_membership_of_torsion_everywhere():
    rng = random.Random(4)
    for _ in range(8):
        e = random_curve(rng, 12)
        for v in (INFINITY, 2, 3, 5, 19):
            img = local_image(e, v)
            assert img.contains_pair(e.alpha * e.beta, e.alpha)
            assert img.contains_pair(-e.alpha, -e.alpha * e.gamma)
