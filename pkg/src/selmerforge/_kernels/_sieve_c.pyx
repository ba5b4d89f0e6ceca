# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels: symbol-constrained progression filter and the
four-form sieve used by the prime quadruple search."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t


def filter_progression(object n0, object m, int count, list moduli,
                       list specs, list targets):
    """Same contract as the numpy fallback; per-candidate C loop with
    residues computed lazily and demands checked cheapest-first."""
    cdef int nmod = len(moduli)
    cdef int ndem = len(specs)
    cdef cnp.ndarray[int64_t, ndim=1] r0 = np.empty(max(nmod, 1), dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] st = np.empty(max(nmod, 1), dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] mods = np.empty(max(nmod, 1), dtype=np.int64)
    cdef int j, d, k
    for j in range(nmod):
        mods[j] = moduli[j]
        r0[j] = n0 % moduli[j]
        st[j] = m % moduli[j]
    # flatten demand tables into one array with offsets, cheapest demand first
    ordered = sorted(zip(specs, targets), key=lambda s: len(s[0]))
    flat = []
    part_mod = []
    part_off = []
    part_start = [0]
    targ_list = []
    for parts, target in ordered:
        for mi, table in parts:
            part_mod.append(mi)
            part_off.append(len(flat))
            flat.extend(table)
        part_start.append(len(part_mod))
        targ_list.append(target)
    cdef cnp.ndarray[uint8_t, ndim=1] tabs = np.asarray(flat, dtype=np.uint8) \
        if flat else np.zeros(1, dtype=np.uint8)
    cdef cnp.ndarray[int64_t, ndim=1] pmod = np.asarray(part_mod, dtype=np.int64) \
        if part_mod else np.zeros(1, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] poff = np.asarray(part_off, dtype=np.int64) \
        if part_off else np.zeros(1, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] pstart = np.asarray(part_start, dtype=np.int64)
    cdef cnp.ndarray[uint8_t, ndim=1] targ = np.asarray(targ_list, dtype=np.uint8) \
        if targ_list else np.zeros(1, dtype=np.uint8)
    cdef cnp.ndarray[uint8_t, ndim=1] keep = np.zeros(count, dtype=np.uint8)
    cdef int ok
    cdef uint8_t parity, t
    cdef int64_t i, mi_, r
    for k in range(count):
        ok = 1
        for d in range(ndem):
            parity = 0
            for i in range(pstart[d], pstart[d + 1]):
                mi_ = pmod[i]
                r = (r0[mi_] + st[mi_] * k) % mods[mi_]
                t = tabs[poff[i] + r]
                if t == 2:
                    ok = 0
                    break
                parity ^= t
            if not ok or parity != targ[d]:
                ok = 0
                break
        keep[k] = ok
    ks = np.nonzero(keep)[0]
    return [int(n0 + m * int(k)) for k in ks]


def sieve_quadruple_block(object xs_in, object ys_in, object primes_in,
                          object coeffs_in):
    """Boolean mask: cells where no form A*x + B*y + C vanishes mod any
    sieve prime; coeffs_in has shape (nprimes, 4, 3)."""
    cdef cnp.ndarray[int64_t, ndim=1] xs = np.ascontiguousarray(xs_in, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] ys = np.ascontiguousarray(ys_in, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] ps = np.ascontiguousarray(primes_in, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=3] cf = np.ascontiguousarray(coeffs_in, dtype=np.int64)
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t np_ = ps.shape[0]
    cdef cnp.ndarray[uint8_t, ndim=1] ok = np.ones(n, dtype=np.uint8)
    cdef Py_ssize_t k, j, i
    cdef int64_t p, xr, yr, v
    for k in range(n):
        for j in range(np_):
            p = ps[j]
            xr = xs[k] % p
            if xr < 0:
                xr += p
            yr = ys[k] % p
            if yr < 0:
                yr += p
            for i in range(4):
                v = (cf[j, i, 0] * xr + cf[j, i, 1] * yr + cf[j, i, 2]) % p
                if v == 0:
                    ok[k] = 0
                    break
            if not ok[k]:
                break
    return ok.view(np.bool_)


def sieve_line(object width_in, object starts_in, object steps_in):
    """Alive mask over offsets 0..width-1 after strided dead-marking;
    same contract as the numpy fallback."""
    cdef Py_ssize_t width = int(width_in)
    cdef cnp.ndarray[int64_t, ndim=1] starts = np.ascontiguousarray(starts_in, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] steps = np.ascontiguousarray(steps_in, dtype=np.int64)
    cdef cnp.ndarray[uint8_t, ndim=1] mask = np.ones(width, dtype=np.uint8)
    cdef Py_ssize_t j, n = starts.shape[0]
    cdef int64_t s, p
    for j in range(n):
        s = starts[j]
        p = steps[j]
        if s < 0:
            continue
        while s < width:
            mask[s] = 0
            s += p
    return mask
