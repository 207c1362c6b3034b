"""Dense complex matrix kernels.

Everything downstream stores morphism blocks as ``numpy`` complex arrays.
The helpers here are pure: equal inputs give bit-identical outputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NonSquare, NotHermitian, NotPositive, ShapeMismatch

EPS_NUM = 1e-9
TAU_REL = 1e-8


@dataclass(frozen=True)
class TolerancePolicy:
    eps_num: float = EPS_NUM
    tau_rel: float = TAU_REL

    def __post_init__(self):
        if not 0 < self.eps_num < 1:
            raise ValueError(f"eps_num out of range: {self.eps_num}")
        if self.tau_rel <= 0:
            raise ValueError(f"tau_rel must be positive: {self.tau_rel}")

    def tau_spec(self, largest):
        return self.tau_rel * max(float(largest), 0.0)


DEFAULT = TolerancePolicy()


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    basis: np.ndarray


class SpectralWarning(UserWarning):
    """Raised through ``warnings`` when an eigenvalue sits near the cutoff."""


def cmat(a):
    return np.asarray(a, dtype=complex)


def dag(a):
    return np.conj(a).T


def opnorm(a):
    """Operator norm, sqrt of the top eigenvalue of a*a."""
    a = cmat(a)
    if a.size == 0:
        return 0.0
    if a.shape[0] < a.shape[1]:
        a = dag(a)
    g = dag(a) @ a
    w = np.linalg.eigvalsh((g + dag(g)) / 2)
    return float(np.sqrt(max(w[-1], 0.0)))


def _fix_phases(v):
    # first component above noise level made real positive, column by column
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        k = int(np.argmax(np.abs(col) > 1e-12 * max(np.abs(col).max(), 1e-300)))
        z = col[k]
        if abs(z) > 0:
            v[:, j] = col * (abs(z) / z)
    return v


def hermitian_eig(a, tol: TolerancePolicy = DEFAULT) -> SpectralDecomposition:
    a = cmat(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"shape {a.shape}")
    if a.size == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0), complex))
    scale = opnorm(a)
    if opnorm(a - dag(a)) > tol.eps_num * max(scale, 1.0):
        raise NotHermitian("matrix is not Hermitian")
    w, v = np.linalg.eigh((a + dag(a)) / 2)
    return SpectralDecomposition(w, _fix_phases(v))


_TAGS = ("pseudo_inverse", "support_projection", "identity")


def apply_spectral_function(a, f: str, tol: TolerancePolicy = DEFAULT):
    if f not in _TAGS:
        raise ValueError(f"unknown spectral function {f!r}")
    w, v = hermitian_eig(a, tol)
    if w.size == 0:
        return cmat(a).copy()
    top = max(abs(w[0]), abs(w[-1]))
    if w[0] < -tol.eps_num * max(top, 1.0):
        raise NotPositive(f"min eigenvalue {w[0]:.3e}")
    tau = tol.tau_spec(w[-1])
    if np.any((w > tau / 10) & (w < 10 * tau)):
        warnings.warn("eigenvalue within a decade of the spectral cutoff", SpectralWarning)
    keep = w > tau
    if f == "pseudo_inverse":
        g = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    elif f == "support_projection":
        g = keep.astype(float)
    else:
        g = np.where(keep, w, 0.0)
    return (v * g) @ dag(v)


def gram_orthonormal_basis(gram, tol: TolerancePolicy = DEFAULT):
    """Return ``(V, rank)`` with ``V* gram V = 1_rank``.

    ``V`` has ``gram.shape[0]`` rows; its columns are combinations of the
    spanning vectors that gram describes, orthonormal for that gram.
    """
    w, v = hermitian_eig(gram, tol)
    if w.size == 0:
        return np.zeros((0, 0), complex), 0
    if w[0] < -tol.eps_num * max(abs(w[-1]), 1.0):
        raise NotPositive(f"min eigenvalue {w[0]:.3e}")
    keep = w > tol.tau_spec(w[-1])
    # largest first, so the leading vectors are the dominant directions
    idx = np.nonzero(keep)[0][::-1]
    iso = v[:, idx] / np.sqrt(w[idx])
    return iso, int(idx.size)


def residuals(a, kind: str, b=None) -> float:
    a = cmat(a)
    if kind == "equality":
        b = cmat(b)
        if a.shape != b.shape:
            raise ShapeMismatch(f"{a.shape} vs {b.shape}")
        return opnorm(a - b)
    if kind == "unitarity":
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeMismatch(f"unitarity needs a square matrix, got {a.shape}")
        n = a.shape[0]
        return max(opnorm(dag(a) @ a - np.eye(n)), opnorm(a @ dag(a) - np.eye(n)))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{kind} needs a square matrix, got {a.shape}")
    if kind == "projection":
        return max(opnorm(a @ a - a), opnorm(a - dag(a)))
    if kind == "positivity":
        if a.size == 0:
            return 0.0
        h = (a + dag(a)) / 2
        w = np.linalg.eigvalsh(h)
        return max(opnorm(a - dag(a)), max(-w[0], 0.0))
    raise ValueError(f"unknown residual kind {kind!r}")


def min_eig(a) -> float:
    """Smallest eigenvalue of the Hermitian part; +inf for empty input."""
    a = cmat(a)
    if a.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh((a + dag(a)) / 2)[0])


def isometry_residual(v) -> float:
    v = cmat(v)
    return opnorm(dag(v) @ v - np.eye(v.shape[1]))


def block_diag(blocks):
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.where(np.abs(d) > 0, np.abs(d), 1.0))


def random_hermitian(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (z + dag(z)) / 2
