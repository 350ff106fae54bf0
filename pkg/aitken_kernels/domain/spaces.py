"""
Point spaces X, Y and X×Y on which kernels and families live.
Points are 1-D float arrays; product points are the concatenation (x, y).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from ..errors import DomainError, ParamError

SPHERE_TOLERANCE = 1e-10


class SpaceKind(str, Enum):
    EUCLIDEAN = "euclidean"
    SPHERE = "sphere"
    PRODUCT = "product"
    OPAQUE = "opaque"


@dataclass(frozen=True)
class PointSpace:
    """A point space with sampling and validation helpers."""
    kind: SpaceKind
    dim: int = 0
    left: Optional[PointSpace] = None
    right: Optional[PointSpace] = None
    size: int = 0

    @classmethod
    def euclidean(cls, dim: int) -> PointSpace:
        if dim < 1:
            raise ParamError(f"euclidean dimension must be >= 1, got {dim}")
        return cls(kind=SpaceKind.EUCLIDEAN, dim=dim)

    @classmethod
    def sphere(cls, dim: int) -> PointSpace:
        """Unit sphere S^dim in R^(dim+1)."""
        if dim < 1:
            raise ParamError(f"sphere dimension must be >= 1, got {dim}")
        return cls(kind=SpaceKind.SPHERE, dim=dim)

    @classmethod
    def product(cls, left: PointSpace, right: PointSpace) -> PointSpace:
        return cls(kind=SpaceKind.PRODUCT, left=left, right=right)

    @classmethod
    def opaque(cls, size: int) -> PointSpace:
        """Index set {0, ..., size-1}; points are 1-element arrays."""
        if size < 1:
            raise ParamError(f"opaque space needs at least one element, got {size}")
        return cls(kind=SpaceKind.OPAQUE, size=size)

    @property
    def coord_dim(self) -> int:
        """Number of coordinates of a point."""
        if self.kind is SpaceKind.EUCLIDEAN:
            return self.dim
        if self.kind is SpaceKind.SPHERE:
            return self.dim + 1
        if self.kind is SpaceKind.PRODUCT:
            return self.left.coord_dim + self.right.coord_dim
        return 1

    def split(self, z: Any) -> Tuple[np.ndarray, np.ndarray]:
        """Product point -> (x, y)."""
        if self.kind is not SpaceKind.PRODUCT:
            raise DomainError(f"split() needs a product space, got {self.kind.value}")
        z = np.asarray(z, dtype=float)
        k = self.left.coord_dim
        return z[:k], z[k:]

    def join(self, x: Any, y: Any) -> np.ndarray:
        return np.concatenate([np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))])

    def validate(self, points: Sequence[Any], tolerance: float = SPHERE_TOLERANCE) -> np.ndarray:
        """Return points as an (N, coord_dim) array, raising DomainError with the row index."""
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1) if self.coord_dim == 1 else arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] != self.coord_dim:
            raise DomainError(
                f"expected points with {self.coord_dim} coordinates, got shape {arr.shape}",
                witness={"shape": list(arr.shape)},
            )
        if not np.all(np.isfinite(arr)):
            raise DomainError("points contain non-finite coordinates")
        for i, row in enumerate(arr):
            self._check_point(row, i, tolerance)
        return arr

    def _check_point(self, z: np.ndarray, index: int, tolerance: float) -> None:
        if self.kind is SpaceKind.SPHERE:
            norm = float(np.linalg.norm(z))
            if abs(norm - 1.0) > tolerance:
                raise DomainError(
                    f"sphere point {index} has norm {norm:.12g}",
                    witness={"row": index, "norm": norm},
                )
        elif self.kind is SpaceKind.PRODUCT:
            x, y = self.split(z)
            self.left._check_point(x, index, tolerance)
            self.right._check_point(y, index, tolerance)
        elif self.kind is SpaceKind.OPAQUE:
            if z[0] != int(z[0]) or not 0 <= z[0] < self.size:
                raise DomainError(f"opaque point {index} is not an index below {self.size}", witness={"row": index})

    def project(self, points: np.ndarray) -> np.ndarray:
        """Rescale sphere coordinates (also inside product points) to unit norm."""
        points = np.asarray(points, dtype=float)
        if self.kind is SpaceKind.SPHERE:
            return points / np.linalg.norm(points, axis=1, keepdims=True)
        if self.kind is SpaceKind.PRODUCT:
            split = self.left.coord_dim
            return np.hstack([self.left.project(points[:, :split]), self.right.project(points[:, split:])])
        return points

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n random points (distinct with probability one, except opaque)."""
        if self.kind is SpaceKind.EUCLIDEAN:
            return rng.normal(size=(n, self.dim))
        if self.kind is SpaceKind.SPHERE:
            z = rng.normal(size=(n, self.dim + 1))
            return z / np.linalg.norm(z, axis=1, keepdims=True)
        if self.kind is SpaceKind.PRODUCT:
            return np.hstack([self.left.sample(rng, n), self.right.sample(rng, n)])
        if n > self.size:
            raise ParamError(f"cannot draw {n} distinct points from an index set of size {self.size}")
        return rng.choice(self.size, size=n, replace=False).astype(float).reshape(-1, 1)

    def distance(self, z: Any, w: Any) -> float:
        """Euclidean norm or geodesic distance; product spaces are not metrized."""
        z, w = np.asarray(z, float), np.asarray(w, float)
        if self.kind is SpaceKind.EUCLIDEAN:
            return float(np.linalg.norm(z - w))
        if self.kind is SpaceKind.SPHERE:
            return geodesic(z, w)
        raise DomainError(f"no metric on {self.kind.value} spaces")

    def to_dict(self) -> Dict[str, Any]:
        if self.kind is SpaceKind.PRODUCT:
            return {"kind": "product", "left": self.left.to_dict(), "right": self.right.to_dict()}
        if self.kind is SpaceKind.OPAQUE:
            return {"kind": "opaque", "size": self.size}
        return {"kind": self.kind.value, "dim": self.dim}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> PointSpace:
        kind = data.get("kind")
        if kind == "euclidean":
            return cls.euclidean(int(data["dim"]))
        if kind == "sphere":
            return cls.sphere(int(data["dim"]))
        if kind == "product":
            return cls.product(cls.from_dict(data["left"]), cls.from_dict(data["right"]))
        if kind == "opaque":
            return cls.opaque(int(data["size"]))
        raise ParamError(f"unknown space kind: {kind!r}")


def geodesic(z: np.ndarray, w: np.ndarray) -> float:
    """Great-circle distance; the inner product is clamped to [-1, 1]."""
    return float(np.arccos(np.clip(np.dot(z, w), -1.0, 1.0)))
