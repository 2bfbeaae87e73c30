"""Dense complex linear algebra and channel sampling.

Thin, contract-checked wrappers over numpy's LAPACK bindings plus the
complex Gaussian sampler every simulation draws from.  Eigenvalues are
always returned in descending order.  All functions are pure; callers own
their generators and never share one across workers.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateInputError


class EigenDecomposition(NamedTuple):
    values: np.ndarray  # real, descending
    vectors: np.ndarray  # column i pairs with values[i]


def hermitian_eig(a: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.linalg.norm(a - a.conj().T) > 1e-12 * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh(a)
    return EigenDecomposition(values[::-1].copy(), vectors[:, ::-1].copy())


def orthonormalize(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of m (rows >= cols).

    The output spans exactly span(m); column phases are normalized so that
    Gaussian inputs yield the invariant distribution on unitary frames.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError(f"expected rows >= cols, got shape {m.shape}")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] < 1e-12 * sv[0]:
        raise DegenerateInputError("matrix is numerically rank deficient")
    return _qr_orthonormalize(m)


def _qr_orthonormalize(m: np.ndarray) -> np.ndarray:
    """QR-based orthonormalization without the rank check; supports stacks."""
    q, r = np.linalg.qr(m)
    d = np.diagonal(r, axis1=-2, axis2=-1).copy()
    d[np.abs(d) == 0.0] = 1.0
    return q * (d / np.abs(d))[..., None, :]


def sample_gaussian_matrix(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """rows x cols matrix of i.i.d. CN(0,1) entries (Re and Im ~ N(0, 1/2))."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) * math.sqrt(0.5)
