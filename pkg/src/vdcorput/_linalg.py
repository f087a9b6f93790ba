"""Small shared linear-algebra helpers (complex, finite dimensional)."""

from __future__ import annotations

import numpy as np


def cplx_inner(x, y):
    """Inner product conjugate-linear in the second slot: sum x_i * conj(y_i)."""
    return complex(np.vdot(np.asarray(y), np.asarray(x)))


def spectral_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitize(a):
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def asymmetry(a) -> float:
    a = np.asarray(a, dtype=complex)
    return spectral_norm(a - a.conj().T)


def eigh_desc(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    vals, vecs = np.linalg.eigh(hermitize(a))
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def min_eig(a) -> float:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(hermitize(a)).min())


def complex_to_pairs(a):
    """Complex ndarray -> nested lists of [re, im] pairs (row major)."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [complex_to_pairs(row) for row in a]


def pairs_to_complex(data):
    """Inverse of complex_to_pairs."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise ValueError("expected nested [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
