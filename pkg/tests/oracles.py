"""Independent reference implementations used by the tests.

Nothing here calls the package's expansion code. States are turned into
dense occupation-number vectors, linear optics is applied through matrix
permanents, and element matrices are written out from the textbook
conventions rather than read back from the elements.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def permanent(mat: np.ndarray) -> complex:
    """Ryser-free brute force; fine for the <= 4x4 matrices used here."""
    n = mat.shape[0]
    if n == 0:
        return 1.0
    return sum(np.prod([mat[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n)))


def occupations(n_photons: int, n_modes: int) -> list[tuple[int, ...]]:
    """All occupation tuples with ``n_photons`` photons over ``n_modes`` modes."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n_modes), n_photons):
        occ = [0] * n_modes
        for m in combo:
            occ[m] += 1
        out.append(tuple(occ))
    return out


def to_dense(terms, mode_index: dict, n_photons: int) -> dict[tuple[int, ...], complex]:
    """Ket amplitudes: polynomial coefficient times sqrt(prod n!)."""
    out: dict[tuple[int, ...], complex] = {}
    n_modes = len(mode_index)
    for modes, c in terms:
        if len(modes) != n_photons:
            continue
        occ = [0] * n_modes
        for m in modes:
            occ[mode_index[m]] += 1
        w = math.prod(math.factorial(k) for k in occ)
        key = tuple(occ)
        out[key] = out.get(key, 0) + c * math.sqrt(w)
    return out


def dense_vector(terms, mode_index: dict, n_photons: int) -> np.ndarray:
    basis = occupations(n_photons, len(mode_index))
    amp = to_dense(terms, mode_index, n_photons)
    return np.array([amp.get(b, 0) for b in basis], complex)


def _expand(occ):
    return [m for m, k in enumerate(occ) for _ in range(k)]


def transfer_matrix(u: np.ndarray, n_photons: int) -> np.ndarray:
    """Action of the single-particle map ``u`` on the n-photon Fock sector.

    ``a_j^dag -> sum_i u[i, j] a_i^dag``; the matrix element between
    occupations is perm(u[out, in]) / sqrt(prod n_in! prod n_out!).
    """
    basis = occupations(n_photons, u.shape[0])
    big = np.zeros((len(basis), len(basis)), complex)
    for c, occ_in in enumerate(basis):
        cols = _expand(occ_in)
        win = math.prod(math.factorial(k) for k in occ_in)
        for r, occ_out in enumerate(basis):
            rows = _expand(occ_out)
            wout = math.prod(math.factorial(k) for k in occ_out)
            big[r, c] = permanent(u[np.ix_(rows, cols)]) / math.sqrt(win * wout)
    return big


def bs_matrix(t: float) -> np.ndarray:
    """a -> sqrt(t) a + sqrt(1-t) b ; b -> sqrt(1-t) a - sqrt(t) b (columns are images)."""
    r, q = math.sqrt(t), math.sqrt(1 - t)
    return np.array([[r, q], [q, -r]])


def hwp_matrix(angle: float) -> np.ndarray:
    """h -> cos 2a h + sin 2a v ; v -> sin 2a h - cos 2a v."""
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return np.array([[c, s], [s, -c]])


def embed(n_modes: int, idx: list[int], block: np.ndarray) -> np.ndarray:
    u = np.eye(n_modes, dtype=complex)
    u[np.ix_(idx, idx)] = block
    return u
