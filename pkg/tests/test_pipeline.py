import random

import pytest

from selmerforge.arith import is_prime, jacobi_symbol
from selmerforge.pipeline import (
    InconsistentDemands,
    PipelineConfig,
    QuadrupleSearchError,
    SuitableTwistCertificate,
    _demand_equations,
    _fold_equations,
    _search_prime,
    find_prime_quadruple,
)

# toy scans need a tiny sieve bound: every form value must exceed it
CFG = PipelineConfig(sieve_bound=8, shell_width=16, box_bound=256)


def check_demands(p, demands):
    for kind, x, eps in demands:
        if kind == "sym":
            assert jacobi_symbol(x, p) == eps, (x, p)
        else:
            assert jacobi_symbol(p, x) == eps, (p, x)


def test_search_prime_honors_mixed_demands():
    demands = [
        ("sym", -15, 1),
        ("sym", 77, -1),
        ("res", 13, 1),
        ("res", 19, -1),
    ]
    p = _search_prime(demands, PipelineConfig(), mod8=1)
    assert is_prime(p) and p % 8 == 1
    check_demands(p, demands)
    assert p == _search_prime(demands, PipelineConfig(), mod8=1)


def test_search_prime_other_residue_classes():
    demands = [("sym", -1, -1), ("sym", 2, -1), ("res", 7, 1)]
    p = _search_prime(demands, PipelineConfig(), mod8=3)
    assert p % 8 == 3
    check_demands(p, demands)


def test_search_prime_respects_exclusions():
    demands = [("res", 5, 1)]
    p = _search_prime(demands, PipelineConfig(), mod8=1)
    p2 = _search_prime(demands, PipelineConfig(), mod8=1, exclude={p})
    assert p2 != p
    check_demands(p2, demands)


def test_direct_conflict_detected():
    with pytest.raises(InconsistentDemands):
        _search_prime([("res", 5, 1), ("res", 5, -1)], PipelineConfig())


def test_hidden_conflict_detected():
    # b3 = 0, b5 = 0, but b3 + b5 = 1: no prime p = 1 (8) can satisfy all
    demands = [("res", 3, 1), ("res", 5, 1), ("sym", 15, -1)]
    with pytest.raises(InconsistentDemands):
        _search_prime(demands, PipelineConfig(), mod8=1)


def test_folding_preserves_solutions():
    """Folding assigns bits without losing the solutions of the system."""
    rng = random.Random(7)
    mods = [3, 5, 7, 11, 13, 17, 19, 23]
    for _ in range(50):
        truth = {v: rng.randrange(2) for v in mods}
        eqs = []
        for _ in range(12):
            support = frozenset(rng.sample(mods, rng.randrange(1, 4)))
            target = 0
            for v in support:
                target ^= truth[v]
            eqs.append((support, target))
        assigned, remaining = _fold_equations(eqs, max_unfolded=3)
        assert len(remaining) <= 3
        # the folded assignment extends to a full solution: solve the
        # remainder by brute force over its support
        support = sorted({v for s, _ in remaining for v in s})
        assert len(support) <= 16
        for bits in range(1 << len(support)):
            cand = dict(assigned)
            cand.update(
                {v: (bits >> i) & 1 for i, v in enumerate(support)}
            )
            if all(
                sum(cand[v] for v in s) % 2 == t
                for s, t in remaining
            ):
                full = {v: cand.get(v, 0) for v in mods}
                ok = all(
                    sum(full[v] for v in s) % 2 == t for s, t in eqs
                )
                assert ok
                break
        else:
            pytest.fail("folded system lost all solutions")


def test_demand_equations_use_reciprocity():
    # for p = 1 (8) there is no correction: jacobi(q, p) == jacobi(p, q)
    eqs = _demand_equations([("sym", 21, -1)], mod8=1, hint_primes=())
    assert eqs == [(frozenset({3, 7}), 1)]
    # for p = 3 (8), both 3 and 7 are 3 (4): two flips cancel; -1 flips once
    eqs = _demand_equations([("sym", -21, -1)], mod8=3, hint_primes=())
    assert eqs == [(frozenset({3, 7}), 0)]


class _ToyForms:
    """Minimal stand-in for a linear-form system: four affine forms with the
    scanner's shape (shared x-coefficient; the fourth depends on y alone)."""

    def __init__(self, A, coeffs):
        self.A = A
        self._coeffs = coeffs

    def coefficients(self):
        return self._coeffs

    def values(self, x, y):
        return tuple(a * x + b * y + c for a, b, c in self._coeffs)


TOY = _ToyForms(
    210,
    [
        (210, 0, 109),
        (210, 2, 101),
        (210, 4, 103),
        (0, 210, 97),
    ],
)


def brute_quadruple(system, box, exclusions=()):
    """Reference scan: same shell semantics, direct primality checks."""
    excl = set(exclusions)
    H = CFG.shell_width
    lo = 0
    while lo < box:
        hi = min(lo + H, box)
        hits = []
        for y in range(hi):
            for x in range(hi):
                if max(x, y) < lo:
                    continue
                vals = system.values(x, y)
                if (
                    all(v > 1 and is_prime(v) for v in vals)
                    and len(set(vals)) == 4
                    and not any(v in excl for v in vals)
                ):
                    hits.append((x, y))
        if hits:
            return min(hits)
        lo = hi
    return None


def test_quadruple_scan_matches_reference():
    expect = brute_quadruple(TOY, CFG.box_bound)
    assert expect is not None
    x, y, qs = find_prime_quadruple(TOY, CFG)
    assert (x, y) == expect
    assert qs == TOY.values(x, y)
    assert all(is_prime(q) for q in qs)


def test_quadruple_scan_determinism():
    a = find_prime_quadruple(TOY, CFG)
    b = find_prime_quadruple(TOY, CFG)
    assert a == b


def test_quadruple_scan_honors_exclusions():
    x0, y0, qs0 = find_prime_quadruple(TOY, CFG)
    x1, y1, _ = find_prime_quadruple(TOY, CFG, exclusions=[qs0[0]])
    assert (x1, y1) == brute_quadruple(TOY, CFG.box_bound, [qs0[0]])
    assert (x1, y1) != (x0, y0)


def test_quadruple_exhaustion_reports_statistics():
    tiny = PipelineConfig(sieve_bound=8, shell_width=4, box_bound=4)
    # the first form is always divisible by 5, so no hit exists
    hopeless = _ToyForms(210, [(210, 0, 115)] + TOY.coefficients()[1:])
    with pytest.raises(QuadrupleSearchError) as err:
        find_prime_quadruple(hopeless, tiny)
    stats = err.value.stats
    assert stats["shells"] == 1
    assert stats["rowsScanned"] == 4
    assert stats["cellsSieved"] >= 0


def test_certificate_json_round_trip():
    cert = SuitableTwistCertificate(
        curve=(0, 5, -5),
        t0=1,
        kappa=105,
        chain=((3, 1), (5, 0), (7, 1)),
        stage_ledger={"span": [[3, 1]]},
        z_basis=((15, 1), (1, 35)),
        linear_forms={"rho": 8, "m": 15, "lambda": 1, "mu1": 2, "mu2": 3},
        quadruple={"x": 4, "y": 5, "q": [11, 13, 17, 19]},
        t=105 * 11 * 13 * 17 * 19,
        chain_dims=(5, 3, 1, 1),
        point=(1, 2, 3, 4),
        selmer_dim=3,
        conclusion="rank=1",
        trust_base={"primalityMode": "BPSW+MR", "searchBounds": {}, "seed": 0},
    )
    again = SuitableTwistCertificate.from_json(cert.to_json())
    assert again == cert
    assert again.to_json() == cert.to_json()


def test_certificate_schema_field_names():
    d = SuitableTwistCertificate.from_json(
        SuitableTwistCertificate(
            curve=(0, 1, -1),
            t0=1,
            kappa=1,
            chain=(),
            stage_ledger={},
            z_basis=(),
            linear_forms={},
            quadruple={},
            t=1,
            chain_dims=(5, 3, 1, 1),
            point=(0, 1, 0, 1),
            selmer_dim=3,
            conclusion="rank=1",
            trust_base={},
        ).to_json()
    ).to_dict()
    assert set(d) == {
        "curve", "t0", "kappa", "chain", "stageLedger", "zBasis",
        "linearForms", "quadruple", "t", "chainDims", "point",
        "selmerDim", "conclusion", "trustBase",
    }
