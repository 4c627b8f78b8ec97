"""Dense 4th-order probability tensors, their three unfoldings, and spectral quantities.

All matrices are plain numpy arrays of float64.  Index conventions follow the
1-based state convention of the rest of the package: the unfolding that groups
variables (1,2) against (3,4) places entry (x1,x2,x3,x4) at row x1+n(x2-1),
column x3+n(x4-1), and analogously for the other two groupings.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .exceptions import NumericalError


class QuartetRelation(IntEnum):
    """The three ways to pair four variables, in the fixed order used everywhere."""

    PAIR_12_34 = 1
    PAIR_13_24 = 2
    PAIR_14_23 = 3

    @property
    def groups(self):
        """The two index pairs (1-based variable positions) of this pairing."""
        return {
            QuartetRelation.PAIR_12_34: ((1, 2), (3, 4)),
            QuartetRelation.PAIR_13_24: ((1, 3), (2, 4)),
            QuartetRelation.PAIR_14_23: ((1, 4), (2, 3)),
        }[self]


# Axis permutation bringing (row-pair, column-pair) first for each grouping.
_UNFOLD_AXES = {
    QuartetRelation.PAIR_12_34: (0, 1, 2, 3),
    QuartetRelation.PAIR_13_24: (0, 2, 1, 3),
    QuartetRelation.PAIR_14_23: (0, 3, 1, 2),
}


@dataclass(frozen=True)
class JointTensor4:
    """Joint probability table of four discrete variables with n states each.

    ``values[x1-1, x2-1, x3-1, x4-1]`` is the probability (or relative
    frequency for ``kind="empirical"``) of the outcome (x1, x2, x3, x4).
    """

    values: np.ndarray
    kind: str = "exact"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 4 or len(set(v.shape)) != 1:
            raise ValueError(f"expected an n x n x n x n array, got shape {v.shape}")
        if self.kind not in ("exact", "empirical"):
            raise ValueError(f"kind must be 'exact' or 'empirical', got {self.kind!r}")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("tensor entries must be finite and nonnegative")
        if abs(v.sum() - 1.0) > 1e-9:
            raise ValueError(f"tensor entries must sum to 1, got {v.sum()!r}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SpectralSummary:
    """Full singular spectrum of a matrix plus the two norms derived from it."""

    singular_values: np.ndarray
    nuclear_norm: float
    frobenius_norm: float


def unfold(tensor: JointTensor4, grouping: QuartetRelation) -> np.ndarray:
    """Reshape the 4-way table into the n^2 x n^2 matrix of the given grouping.

    Rows enumerate the states of the grouping's first pair (first variable
    fastest), columns those of the second pair.
    """
    n = tensor.n
    axes = _UNFOLD_AXES[QuartetRelation(grouping)]
    return tensor.values.transpose(axes).reshape(n * n, n * n, order="F")


def refold(matrix: np.ndarray, grouping: QuartetRelation, n: int,
           kind: str = "exact") -> JointTensor4:
    """Inverse of :func:`unfold`: rebuild the tensor from one of its unfoldings."""
    m = np.asarray(matrix, dtype=float)
    if m.shape != (n * n, n * n):
        raise ValueError(f"expected shape {(n * n, n * n)}, got {m.shape}")
    axes = _UNFOLD_AXES[QuartetRelation(grouping)]
    permuted = m.reshape(n, n, n, n, order="F")
    inverse = np.argsort(axes)
    return JointTensor4(permuted.transpose(inverse), kind=kind)


def spectral(matrix: np.ndarray) -> SpectralSummary:
    """Singular values plus nuclear and Frobenius norms of a dense matrix."""
    m = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    try:
        sv = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular value decomposition failed: {exc}") from exc
    return SpectralSummary(
        singular_values=sv,
        nuclear_norm=float(sv.sum()),
        frobenius_norm=float(np.linalg.norm(m)),
    )


def nuclear_norm(matrix: np.ndarray) -> float:
    """Sum of all singular values."""
    return spectral(matrix).nuclear_norm


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (m1*m2) x (n1*n2)."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def khatri_rao(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise Kronecker product of two matrices with equal column counts."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(
            f"column counts must match, got shapes {a.shape} and {b.shape}")
    # (a_col x) kron (b_col): index i*rows_b + j, i.e. b runs fastest.
    return (a[:, None, :] * b[None, :, :]).reshape(a.shape[0] * b.shape[0], a.shape[1])


def numerical_rank(matrix: np.ndarray, tol: float = 1e-8) -> int:
    """Number of singular values above tol times the largest one."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    sv = spectral(matrix).singular_values
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))
