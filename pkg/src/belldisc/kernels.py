"""Numeric inner loops: monomial expansion and two-photon output statistics.

Each kernel exists twice, a numba ``@njit`` version and a vectorised numpy
version. :mod:`belldisc._accel` picks one at call time, and both must agree
to 1e-12 (tests check this).

Monomials are handled here as sorted rows of integer mode indices. A row is
packed into one int64 key in base ``base`` (most significant digit first), so
``base ** n_photons`` has to stay below 2**63. With at most 8 photons and
64 modes it does.
"""
import numpy as np

from ._accel import njit, use_numba

MAX_KEY_BASE = 64


@njit(cache=True, nogil=True)
def _expand_numba(mon_idx, coeffs, img_ptr, img_out, img_coef, base):
    n_terms, n = mon_idx.shape
    total = 0
    for t in range(n_terms):
        c = 1
        for k in range(n):
            m = mon_idx[t, k]
            c *= img_ptr[m + 1] - img_ptr[m]
        total += c
    keys = np.empty(total, np.int64)
    vals = np.empty(total, np.complex128)
    ctr = np.zeros(n, np.int64)
    buf = np.empty(n, np.int64)
    pos = 0
    for t in range(n_terms):
        empty = False
        for k in range(n):
            m = mon_idx[t, k]
            if img_ptr[m + 1] == img_ptr[m]:
                empty = True
        if empty:
            continue
        for k in range(n):
            ctr[k] = 0
        while True:
            p = 1.0 + 0.0j
            for k in range(n):
                m = mon_idx[t, k]
                j = img_ptr[m] + ctr[k]
                p *= img_coef[j]
                buf[k] = img_out[j]
            for a in range(1, n):
                x = buf[a]
                b = a - 1
                while b >= 0 and buf[b] > x:
                    buf[b + 1] = buf[b]
                    b -= 1
                buf[b + 1] = x
            key = 0
            for k in range(n):
                key = key * base + buf[k]
            keys[pos] = key
            vals[pos] = coeffs[t] * p
            pos += 1
            k = n - 1
            while k >= 0:
                m = mon_idx[t, k]
                ctr[k] += 1
                if ctr[k] < img_ptr[m + 1] - img_ptr[m]:
                    break
                ctr[k] = 0
                k -= 1
            if k < 0:
                break
    return keys[:pos], vals[:pos]


def _expand_numpy(mon_idx, coeffs, img_ptr, img_out, img_coef, base):
    # Substitute one column at a time so memory tracks the output size.
    n_terms, n = mon_idx.shape
    counts = np.diff(img_ptr)
    rows = mon_idx.copy()
    vals = coeffs.copy()
    for k in range(n):
        m = rows[:, k]
        cnt = counts[m]
        src = np.repeat(np.arange(rows.shape[0]), cnt)
        first = np.cumsum(cnt) - cnt
        j = img_ptr[m][src] + np.arange(src.size) - first[src]
        rows = rows[src]
        rows[:, k] = img_out[j]
        vals = vals[src] * img_coef[j]
    rows = np.sort(rows, axis=1)
    weights = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (rows @ weights).astype(np.int64), vals


def expand(mon_idx, coeffs, img_ptr, img_out, img_coef, base):
    """Substitute every mode of every monomial by its image and expand.

    Args:
        mon_idx: (terms, n) int64 mode indices, one monomial per row.
        coeffs: (terms,) complex amplitudes.
        img_ptr, img_out, img_coef: CSR table; the image of mode ``m`` is
            ``sum(img_coef[j] * mode(img_out[j]) for j in img_ptr[m]:img_ptr[m+1])``.
        base: key base, larger than every output index.

    Returns:
        Unreduced ``(keys, vals)``; the same key may repeat.
    """
    args = (
        np.ascontiguousarray(mon_idx, dtype=np.int64),
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(img_ptr, dtype=np.int64),
        np.ascontiguousarray(img_out, dtype=np.int64),
        np.ascontiguousarray(img_coef, dtype=np.complex128),
        int(base),
    )
    if use_numba():
        return _expand_numba(*args)
    return _expand_numpy(*args)


def reduce_terms(keys, vals, prune):
    """Merge equal keys by summation and drop sums with ``|v| < prune``."""
    if keys.size == 0:
        return keys, vals
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    v = vals[order]
    starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
    sums = np.add.reduceat(v, starts)
    keep = np.abs(sums) >= prune
    return k[starts][keep], sums[keep]


def decode_keys(keys, n, base):
    """Inverse of the key packing: (len(keys), n) sorted index rows."""
    out = np.empty((keys.size, n), np.int64)
    rest = keys.copy()
    for j in range(n - 1, -1, -1):
        out[:, j] = rest % base
        rest //= base
    return out


@njit(cache=True, nogil=True)
def _pair_probs_numba(unitary, coef_mats):
    m = unitary.shape[0]
    n_states = coef_mats.shape[0]
    n_events = m * (m + 1) // 2
    out = np.zeros((n_states, n_events))
    for s in range(n_states):
        c = coef_mats[s]
        tmp = np.zeros((m, m), np.complex128)
        for i in range(m):
            for q in range(m):
                acc = 0.0j
                for p in range(m):
                    acc += unitary[i, p] * c[p, q]
                tmp[i, q] = acc
        amp = np.zeros((m, m), np.complex128)
        for i in range(m):
            for j in range(m):
                acc = 0.0j
                for q in range(m):
                    acc += tmp[i, q] * unitary[j, q]
                amp[i, j] = acc
        e = 0
        for i in range(m):
            for j in range(i, m):
                if i == j:
                    a = amp[i, i]
                    out[s, e] = 2.0 * (a.real * a.real + a.imag * a.imag)
                else:
                    a = amp[i, j] + amp[j, i]
                    out[s, e] = a.real * a.real + a.imag * a.imag
                e += 1
    return out


def _pair_probs_numpy(unitary, coef_mats):
    amp = np.einsum("ip,spq,jq->sij", unitary, coef_mats, unitary)
    iu, ju = np.triu_indices(unitary.shape[0])
    sym = amp[:, iu, ju] + amp[:, ju, iu]
    diag = iu == ju
    sym[:, diag] = amp[:, iu[diag], iu[diag]]
    probs = np.abs(sym) ** 2
    probs[:, diag] *= 2.0
    return probs


def pair_probabilities(unitary, coef_mats):
    """Event probabilities of two-photon states after a linear network.

    ``coef_mats[s, p, q]`` is the amplitude of the monomial a_p a_q in state
    ``s`` (each monomial stored once, p <= q). Events are the unordered output
    pairs (i <= j) in row-major upper-triangle order; bunched events carry the
    2! bosonic weight.
    """
    u = np.ascontiguousarray(unitary, dtype=np.complex128)
    c = np.ascontiguousarray(coef_mats, dtype=np.complex128)
    if use_numba():
        return _pair_probs_numba(u, c)
    return _pair_probs_numpy(u, c)
