"""Dense float64 linear algebra, scalar activations, and seeded randomness.

Matrices are 2-D row-major numpy arrays, vectors 1-D. Every public
operation validates shapes and guarantees a finite result. `Rng` wraps
numpy's PCG64 generator and supports label-based forking so that any
derived stream is reproducible from the root seed alone.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import InputError, NumericError, ShapeError

Matrix = np.ndarray
Vector = np.ndarray

_U64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(seed: int, label: str) -> int:
    """Stable 64-bit child seed from a parent seed and a text label."""
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class Rng:
    """Deterministic random stream with fork-by-label child derivation.

    Two instances built from the same seed emit identical draws; children
    depend only on (seed, label), never on how much the parent has drawn,
    so independent consumers can fork in any order.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _U64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def fork(self, label: str) -> "Rng":
        return Rng(derive_seed(self.seed, label))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, mean=0.0, std=1.0, size=None):
        return self._gen.normal(mean, std, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice(self, n, size=None, replace=True):
        return self._gen.choice(n, size=size, replace=replace)


def as_matrix(values) -> Matrix:
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return a


def as_vector(values) -> Vector:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={v.ndim}")
    return v


def _require_finite(a: np.ndarray, op: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{op} produced non-finite values")
    return a


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product with explicit conformance checking."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return _require_finite(a @ b, "matmul")


def pinv(a: Matrix, rel_cutoff: float = 1e-12) -> Matrix:
    """Moore-Penrose pseudo-inverse via SVD.

    Reciprocals of singular values below ``rel_cutoff * sigma_max`` are
    zeroed, which makes the result the minimum-norm least-squares solver
    for rank-deficient systems.
    """
    a = as_matrix(a)
    if a.size == 0:
        raise InputError("pinv of an empty matrix")
    if not (0.0 < rel_cutoff < 1.0):
        raise InputError(f"rel_cutoff must lie in (0, 1), got {rel_cutoff}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge: {exc}") from exc
    inv_s = np.zeros_like(s)
    if s.size and s[0] > 0.0:
        keep = s > rel_cutoff * s[0]
        inv_s[keep] = 1.0 / s[keep]
    return _require_finite((vt.T * inv_s) @ u.T, "pinv")


def sigmoid(x):
    """Numerically stable logistic function, elementwise on arrays."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def logit(v, eps: float = 1e-12):
    """Inverse sigmoid; inputs are clamped into [eps, 1-eps] first."""
    v = np.clip(np.asarray(v, dtype=np.float64), eps, 1.0 - eps)
    out = np.log(v) - np.log1p(-v)
    return out if out.ndim else float(out)


def softmax(z: Vector) -> Vector:
    """Max-shifted softmax; entries positive and summing to one."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise InputError("softmax of an empty vector")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)
