"""
Domain value types for aitken_kernels.
"""
from .matrices import (
    BlockGram,
    Classification,
    SpectralReport,
    SymMatrix,
    point_major,
)
from .reports import CheckReport, SuiteReport, jsonable
from .spaces import PointSpace, SpaceKind, geodesic

__all__ = [
    # Matrices
    'SymMatrix',
    'SpectralReport',
    'Classification',
    'BlockGram',
    'point_major',

    # Spaces
    'PointSpace',
    'SpaceKind',
    'geodesic',

    # Reports
    'CheckReport',
    'SuiteReport',
    'jsonable'
]
