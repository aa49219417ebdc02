"""Dense vector/matrix kernel and seeded random generation.

All operations are deterministic. Random constructors are pure functions of
the seed: the bit stream comes from the counter-based Philox generator and
Gaussians are produced by an explicit Box-Muller transform, so identical
seeds give bit-identical output on every platform.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError, ParameterError, SizeError

# Entry budget for kron output; anything larger than this is a mistake at
# desk scale and would silently eat memory.
_MAX_KRON_ENTRIES = 50_000_000

DEFAULT_RANK_TOL = 1e-12


def _all_finite(arr: np.ndarray) -> bool:
    # one reduction on the fast path; the sum is non-finite whenever any
    # entry is, and a finite-but-overflowing sum falls back to the full scan
    s = arr.sum()
    if np.isfinite(s):
        return True
    return bool(np.isfinite(arr).all())


def as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise SizeError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not _all_finite(v):
        raise NumericError(f"{name} contains non-finite entries")
    return v


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise SizeError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not _all_finite(m):
        raise NumericError(f"{name} contains non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product with an output-size guard."""
    a = as_matrix(a, "kron left factor")
    b = as_matrix(b, "kron right factor")
    entries = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if entries > _MAX_KRON_ENTRIES:
        raise SizeError(f"kron output would have {entries} entries")
    return np.kron(a, b)


def pseudoinverse(a, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse.

    Uses the closed form A^T (A A^T)^-1 when A has full row rank, otherwise
    an SVD construction where singular values below ``tol * sigma_max`` are
    treated as zero.
    """
    a = as_matrix(a, "pseudoinverse input")
    rows, cols = a.shape
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.zeros((cols, rows))
    if rows <= cols and s[-1] > tol * smax:
        # full row rank shortcut
        return np.linalg.solve(a @ a.T, a).T
    keep = s > tol * smax
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return (vt.T * s_inv) @ u.T


class SeededRng:
    """Deterministic random stream.

    Bits come from numpy's Philox (a counter-based generator with a stable,
    versioned stream); uniforms are 53-bit doubles in [0, 1) and normals are
    produced pairwise by the Box-Muller transform.
    """

    algorithm = "philox4x64-10+box-muller"

    def __init__(self, seed: int):
        if not (0 <= int(seed) < 2**64):
            raise ParameterError("seed must fit in 64 unsigned bits")
        self.seed = int(seed)
        self._bits = np.random.Generator(np.random.Philox(self.seed))

    def uniform(self, *shape) -> np.ndarray:
        return self._bits.random(shape)

    def normal(self, *shape) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        half = (count + 1) // 2
        u1 = 1.0 - self._bits.random(half)  # (0, 1], keeps log finite
        u2 = self._bits.random(half)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
        z = z[:count]
        return z.reshape(shape) if shape else float(z[0])

    def integers(self, low: int, high: int, size: int) -> np.ndarray:
        """Integers in [low, high) derived from the uniform stream."""
        u = self.uniform(size)
        return (low + np.floor(u * (high - low))).astype(int)


def random_gaussian_matrix(rng: SeededRng, rows: int, cols: int) -> np.ndarray:
    return rng.normal(rows, cols)


def random_psd(rng: SeededRng, n: int) -> np.ndarray:
    """Symmetric positive semi-definite matrix G^T G from a Gaussian G."""
    g = rng.normal(n, n)
    a = g.T @ g
    return 0.5 * (a + a.T)


def random_orthogonal_rows(rng: SeededRng, rows: int, cols: int) -> np.ndarray:
    """Matrix with orthonormal rows via Gram-Schmidt on Gaussian rows.

    Degenerate draws (near-zero residual during orthogonalization) are
    resampled from the same stream, so the result stays a pure function of
    the seed.
    """
    if rows > cols:
        raise ParameterError(f"need rows <= cols, got {rows}x{cols}")
    q = np.zeros((rows, cols))
    i = 0
    while i < rows:
        v = rng.normal(cols)
        for j in range(i):
            v = v - (q[j] @ v) * q[j]
        norm = np.linalg.norm(v)
        if norm < 1e-8 * np.sqrt(cols):
            continue  # resample this row
        q[i] = v / norm
        i += 1
    return q
