import random

from selmerforge import f2


def random_rows(rng, n, ncols):
    return [rng.getrandbits(ncols) for _ in range(n)]


def brute_span(rows):
    span = {0}
    for r in rows:
        span |= {x ^ r for x in span}
    return span


def test_rref_spans_same_space():
    rng = random.Random(1)
    for _ in range(50):
        rows = random_rows(rng, rng.randint(0, 6), 8)
        basis = f2.rref(rows)
        assert brute_span(rows) == brute_span(basis)
        assert len(basis) == f2.rank(rows)


def test_rref_canonical():
    rng = random.Random(2)
    for _ in range(30):
        rows = random_rows(rng, 5, 10)
        basis = f2.rref(rows)
        shuffled = rows[:]
        rng.shuffle(shuffled)
        assert f2.rref(shuffled) == basis


def test_in_span_matches_enumeration():
    rng = random.Random(3)
    for _ in range(30):
        rows = random_rows(rng, 4, 7)
        span = brute_span(rows)
        for v in range(128):
            assert f2.in_span(v, rows) == (v in span)


def test_kernel():
    rng = random.Random(4)
    for _ in range(50):
        ncols = rng.randint(1, 10)
        rows = random_rows(rng, rng.randint(0, 6), ncols)
        ker = f2.kernel(rows, ncols)
        assert len(ker) == ncols - f2.rank(rows)
        for v in brute_span(ker):
            for r in rows:
                assert f2.dot(r, v) == 0


def test_solve():
    rng = random.Random(5)
    for _ in range(100):
        ncols = rng.randint(1, 8)
        rows = random_rows(rng, rng.randint(1, 6), ncols)
        x_true = rng.getrandbits(ncols)
        rhs = [f2.dot(r, x_true) for r in rows]
        x = f2.solve(rows, rhs, ncols)
        assert x is not None
        assert all(f2.dot(rows[i], x) == rhs[i] for i in range(len(rows)))


def test_solve_inconsistent():
    # x0 = 0 and x0 = 1 simultaneously
    assert f2.solve([1, 1], [0, 1], 1) is None


def test_intersect():
    rng = random.Random(6)
    for _ in range(50):
        ncols = 8
        a = random_rows(rng, 3, ncols)
        b = random_rows(rng, 3, ncols)
        inter = brute_span(a) & brute_span(b)
        got = brute_span(f2.intersect(a, b, ncols))
        assert got == inter
