"""numpy fallback implementations of the hot scan kernels."""

import numpy as np


def filter_progression(n0, m, count, moduli, specs, targets):
    """Values n0 + m*k (k < count) passing all symbol parity demands.

    specs[d] is a list of (modulus index, table) pairs; table[r] is the
    parity bit contributed by residue r, or 2 for a residue where the
    symbol vanishes.  targets[d] is the required total parity.
    """
    alive = np.arange(count, dtype=np.int64)
    r0s = [n0 % q for q in moduli]
    steps = [m % q for q in moduli]
    # evaluate demands on the shrinking survivor list; each tabled demand
    # halves it, so the first demand dominates the cost
    for parts, target in sorted(zip(specs, targets), key=lambda s: len(s[0])):
        if alive.size == 0:
            break
        parity = np.zeros(alive.size, dtype=np.uint8)
        dead = np.zeros(alive.size, dtype=bool)
        for mi, table in parts:
            q = moduli[mi]
            vals = np.asarray(table, dtype=np.uint8)[(r0s[mi] + steps[mi] * alive) % q]
            dead |= vals == 2
            parity ^= vals & 1
        alive = alive[~dead & (parity == target)]
    return [n0 + m * int(k) for k in alive]


def sieve_quadruple_block(xs, ys, primes, coeffs):
    """Boolean mask: cells where no form L_i(x,y) vanishes mod a sieve prime.

    coeffs has shape (len(primes), 4, 3): residues (A, B, C) of each linear
    form A*x + B*y + C per sieve prime.
    """
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    ok = np.ones(len(xs), dtype=bool)
    for j, p in enumerate(primes):
        xr = xs % p
        yr = ys % p
        for i in range(4):
            a, b, c = (int(v) for v in coeffs[j][i])
            ok &= (a * xr + b * yr + c) % p != 0
        if not ok.any():
            break
    return ok


def sieve_line(width, starts, steps):
    """Alive mask over offsets 0..width-1 after strided dead-marking.

    For each (start, step) pair, offsets start, start+step, start+2*step, ...
    are marked dead.  Returns a uint8 array (1 = alive).
    """
    mask = np.ones(int(width), dtype=np.uint8)
    for s, p in zip(starts, steps):
        s = int(s)
        p = int(p)
        if 0 <= s < width:
            mask[s::p] = 0
    return mask
