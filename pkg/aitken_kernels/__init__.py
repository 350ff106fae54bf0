"""
aitken_kernels - matrix-valued positive definite kernels built from bounded
completely monotone functions, with numerical certificates for every claim.
"""

__version__ = "0.1.0"
