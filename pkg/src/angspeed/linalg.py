"""Small fixed-size linear algebra and rotation-group operators.

Vectors are numpy arrays of shape (3,) or (2,), matrices (3, 3) or (2, 2).
Nothing here mutates its inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NotRotation, NotSkew

TOL_SKEW = 1e-9
TOL_ORTH = 1e-9
SMALL_ANGLE = 1e-8


def skew(v) -> np.ndarray:
    """Return the matrix ``S`` with ``S @ w == np.cross(v, w)``."""
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(M, tol: float = TOL_SKEW) -> np.ndarray:
    """Inverse of :func:`skew`. Raises NotSkew if ``M + M.T`` is not ~0."""
    M = np.asarray(M, dtype=float)
    asym = float(np.linalg.norm(M + M.T))
    if not asym <= tol:
        raise NotSkew(f"|M + M^T|_F = {asym:.3g} exceeds {tol:.3g}")
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def vee_general(M) -> np.ndarray:
    """``vee`` of the skew part of an arbitrary 3x3 matrix."""
    M = np.asarray(M, dtype=float)
    A = 0.5 * (M - M.T)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def frobenius_inner(A, B) -> float:
    """trace(A^T B)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    return float(np.vdot(A, B))


def frobenius_norm(A) -> float:
    return math.sqrt(frobenius_inner(A, A))


def so3_exp(v) -> np.ndarray:
    """Rodrigues formula exp([v]_x).

    Uses R = I + a [v]_x + b (v v^T - |v|^2 I), with a second-order Taylor
    expansion of a, b below ``SMALL_ANGLE``.
    """
    x, y, z = float(v[0]), float(v[1]), float(v[2])
    th2 = x * x + y * y + z * z
    th = math.sqrt(th2)
    if th < SMALL_ANGLE:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    bxy, bxz, byz = b * x * y, b * x * z, b * y * z
    return np.array(
        [
            [1.0 - b * (y * y + z * z), bxy - a * z, bxz + a * y],
            [bxy + a * z, 1.0 - b * (x * x + z * z), byz - a * x],
            [bxz - a * y, byz + a * x, 1.0 - b * (x * x + y * y)],
        ]
    )


def rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def orthonormality_error(R) -> float:
    R = np.asarray(R, dtype=float)
    return float(np.linalg.norm(R.T @ R - np.eye(R.shape[0])))


def is_rotation(R, tol: float = TOL_ORTH) -> bool:
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] not in (2, 3):
        return False
    if not np.all(np.isfinite(R)):
        return False
    return orthonormality_error(R) <= tol and np.linalg.det(R) > 0


def as_rotation(R, dim: int | None = None, tol: float = TOL_ORTH) -> np.ndarray:
    """Validate ``R`` as an element of SO(2) or SO(3) and return it as an array."""
    R = np.array(R, dtype=float)
    if dim is not None and R.shape != (dim, dim):
        raise NotRotation(f"expected shape ({dim}, {dim}), got {R.shape}")
    if not is_rotation(R, tol):
        err = orthonormality_error(R) if R.ndim == 2 and R.shape[0] == R.shape[1] else math.nan
        raise NotRotation(f"not a rotation matrix (|R^T R - I|_F = {err:.3g})")
    return R
