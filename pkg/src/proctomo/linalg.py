"""Dense complex linear-algebra kernel used throughout the package.

Conventions fixed here and relied on everywhere else:

* ``vec`` is strictly column-stacking (Fortran order).  The row-stacked
  coordinate vector of a matrix ``A`` is obtained as ``vec(A.T)``, never via a
  second convention.
* Permutations are stored as index arrays and applied in O(n) with fancy
  indexing; they are never materialized as dense matrices outside of test
  oracles.
* ``partial_trace_first`` traces out the first (most significant) tensor
  factor, so that ``Tr_1(vec(S) vec(T)^dag) = S T^dag``.

Everything is a pure function of its inputs and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Hermiticity check, relative to the matrix norm.
HERMITIAN_RTOL = 1e-10
# Eigenvalues below this fraction of the largest are clamped to zero in
# psd_sqrt; eigenvalues more negative than NEGATIVE_EIG_RTOL are an error.
EIG_CLIP_RTOL = 1e-12
NEGATIVE_EIG_RTOL = 1e-10


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + dagger(a)) / 2


def frob(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization of a matrix."""
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"vec expects a non-empty matrix, got shape {a.shape}")
    return a.reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`.  Defaults to a square matrix."""
    v = np.asarray(v).reshape(-1)
    if rows is None:
        rows = int(round(np.sqrt(v.size)))
        cols = rows
    elif cols is None:
        cols = v.size // rows
    if rows * cols != v.size:
        raise ValueError(f"cannot unvec length {v.size} into {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


@dataclass(frozen=True)
class Permutation:
    """A permutation stored as an index array.

    ``apply(v) == v[forward]``, which is the action of the 0/1 matrix whose
    row ``i`` has its one in column ``forward[i]``.
    """

    forward: np.ndarray

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.intp)
        object.__setattr__(self, "forward", fwd)
        if not np.array_equal(np.sort(fwd), np.arange(fwd.size)):
            raise ValueError("forward is not a bijection on 0..size-1")

    @property
    def size(self) -> int:
        return self.forward.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.size:
            raise ValueError(f"vector length {v.shape[0]} != permutation size {self.size}")
        return v[self.forward]

    def inverse(self) -> "Permutation":
        return Permutation(np.argsort(self.forward))

    def matrix(self) -> np.ndarray:
        """Dense 0/1 matrix (test oracles only)."""
        return np.eye(self.size)[self.forward]


def transpose_permutation(rows: int, cols: int) -> Permutation:
    """Permutation K with ``K.apply(vec(A)) == vec(A.T)`` for rows x cols A."""
    if rows < 1 or cols < 1:
        raise ValueError("matrix dimensions must be positive")
    p = np.arange(rows * cols)
    return Permutation((p % cols) * rows + p // cols)


def reshuffle_permutation(d: int) -> Permutation:
    """Index reshuffle R aligning vec of a d^2 x d^2 process matrix with the
    block structure of the stacked input-state parameterization.

    Writing an index of length d^4 in base d as (u, v, x, y), R swaps the two
    middle digits.  R is an involution, so R == R^T == R^-1.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    c = np.arange(d**4)
    y = c % d
    x = (c // d) % d
    v = (c // d**2) % d
    u = c // d**3
    return Permutation(u * d**3 + x * d**2 + v * d + y)


def partial_trace_first(x: np.ndarray, d: int) -> np.ndarray:
    """Trace out the first tensor factor of a d^2 x d^2 matrix.

    For X = vec(S) vec(T)^dag this returns S @ T^dag.
    """
    x = np.asarray(x)
    if x.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} matrix, got {x.shape}")
    return x.reshape(d, d, d, d).trace(axis1=0, axis2=2)


def hermitian_eig(x: np.ndarray, check: bool = True):
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, u)`` with eigenvalues ``w`` sorted descending and unitary
    ``u`` such that ``x = u @ diag(w) @ u^dag``.  The input is symmetrized
    first; it must be Hermitian within HERMITIAN_RTOL relative to its norm.
    """
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {x.shape}")
    scale = max(frob(x), 1.0)
    if check and frob(x - dagger(x)) > HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w, u = np.linalg.eigh(hermitian_part(x))
    return w[::-1], u[:, ::-1]


def psd_sqrt(x: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Tiny negative eigenvalues (rounding noise) are clamped to zero; a
    significantly negative eigenvalue raises ValueError.
    """
    w, u = hermitian_eig(x)
    top = max(w[0], 0.0)
    if w[-1] < -NEGATIVE_EIG_RTOL * max(top, 1.0):
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[-1]:.3e}")
    w = np.where(w > EIG_CLIP_RTOL * max(top, 0.0), w, 0.0)
    return (u * np.sqrt(w)) @ dagger(u)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary (QR of a complex Gaussian, phase-fixed)."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases
