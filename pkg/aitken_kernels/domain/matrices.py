"""Matrix value types shared by the linear algebra layer and Gram assembly."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List

import numpy as np

from ..errors import AsymmetricMatrix, InvalidMatrix, ShapeError

SYMMETRY_TOLERANCE = 1e-8
POINT_MAJOR = "point-major"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric matrix; symmetrized on construction."""
    dim: int
    entries: np.ndarray
    asymmetry: float = 0.0

    @classmethod
    def from_array(cls, a: Any, tolerance: float = SYMMETRY_TOLERANCE) -> SymMatrix:
        """Symmetrize (A + Aᵀ)/2, rejecting non-finite or visibly asymmetric input."""
        arr = np.asarray(a, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ShapeError(f"expected a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidMatrix("matrix has non-finite entries")

        asymmetry = float(np.max(np.abs(arr - arr.T)))
        scale = max(1.0, float(np.linalg.norm(arr)))
        if asymmetry > tolerance * scale:
            raise AsymmetricMatrix(
                f"asymmetry {asymmetry:.3e} exceeds {tolerance:.1e} relative",
                witness={"asymmetry": asymmetry},
            )
        return cls(dim=arr.shape[0], entries=_frozen((arr + arr.T) / 2.0), asymmetry=asymmetry)

    @classmethod
    def identity(cls, dim: int) -> SymMatrix:
        return cls.from_array(np.eye(dim))

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


class Classification(str, Enum):
    """Spectral class of a symmetric matrix."""
    PD = "PD"
    PSD = "PSD"
    INDEFINITE = "INDEFINITE"


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues plus their classification."""
    eigenvalues: np.ndarray
    min_eig: float
    max_abs_eig: float
    classification: Classification
    tolerance_used: float

    @property
    def at_least_psd(self) -> bool:
        return self.classification is not Classification.INDEFINITE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classification": self.classification.value,
            "min_eig": self.min_eig,
            "max_abs_eig": self.max_abs_eig,
            "tolerance_used": self.tolerance_used,
            "dim": int(self.eigenvalues.size),
        }


@dataclass(frozen=True)
class BlockGram:
    """
    p×p grid of N×N blocks [K_{m,n}(x_μ, x_ν)] and its flattened form.

    Flattened index is μ·p + m (point-major, 0-based).
    """
    p: int
    n_points: int
    blocks: np.ndarray
    flattened: SymMatrix
    layout: str = POINT_MAJOR
    provenance: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_blocks(cls, blocks: Any, provenance: Dict[str, Any] = None) -> BlockGram:
        """Assemble from an array of shape (p, p, N, N)."""
        blocks = np.asarray(blocks, dtype=float)
        if blocks.ndim != 4 or blocks.shape[0] != blocks.shape[1] or blocks.shape[2] != blocks.shape[3]:
            raise ShapeError(f"blocks must have shape (p, p, N, N), got {blocks.shape}")
        p, _, n, _ = blocks.shape
        flat = SymMatrix.from_array(point_major(blocks))
        return cls(
            p=p,
            n_points=n,
            blocks=_frozen(from_point_major(flat.entries, p)),
            flattened=flat,
            provenance=dict(provenance or {}),
        )

    def block(self, m: int, n: int) -> np.ndarray:
        return self.blocks[m, n]

    def values(self) -> List[float]:
        """Row-major flattened values."""
        return self.flattened.entries.ravel().tolist()


def point_major(blocks: np.ndarray) -> np.ndarray:
    """(p, p, N, N) block grid -> (N·p, N·p) matrix indexed by μ·p + m."""
    p, _, n, _ = blocks.shape
    return np.ascontiguousarray(blocks.transpose(2, 0, 3, 1)).reshape(n * p, n * p)


def from_point_major(flat: np.ndarray, p: int) -> np.ndarray:
    """Inverse of point_major."""
    n = flat.shape[0] // p
    return np.ascontiguousarray(flat.reshape(n, p, n, p).transpose(1, 3, 0, 2))
