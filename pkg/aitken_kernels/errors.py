"""
Error hierarchy for kernel construction and verification.
Witness-carrying errors expose the offending indices or points as a dict.
"""
from typing import Any, Dict, Optional


class AitkenKernelError(Exception):
    """Base class for all package errors."""

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.witness = witness or {}


class InvalidMatrix(AitkenKernelError):
    """Matrix has non-finite entries or an unusable shape."""


class AsymmetricMatrix(InvalidMatrix):
    """Asymmetry exceeds the symmetrization tolerance."""


class ShapeError(AitkenKernelError):
    """Operands have incompatible shapes."""


class NotPositiveDefinite(AitkenKernelError):
    """A Cholesky pivot was not positive."""


class RangeError(AitkenKernelError):
    """An entrywise exponential would overflow."""


class CatalogMiss(AitkenKernelError):
    """Unknown catalog or recipe name."""


class ParamError(AitkenKernelError):
    """Parameters outside the valid range of a family or builder."""


class NoMeasure(AitkenKernelError):
    """Function has no representing measure attached."""


class QuadratureError(AitkenKernelError):
    """Quadrature did not converge."""


class FamilyInvalid(AitkenKernelError):
    """A family violates its structural hypothesis."""


class DomainError(AitkenKernelError):
    """Points do not belong to the declared space."""


class KernelEvalError(AitkenKernelError):
    """Kernel evaluation failed at a specific (m, n, z, z') witness."""


class IntegrabilityError(AitkenKernelError):
    """A mixture sum diverged on a sampled pair."""


class DuplicatePoints(AitkenKernelError):
    """Gram assembly received repeated points."""


class SchemaError(AitkenKernelError):
    """Spec or point file does not match its schema."""
