"""
Dense symmetric linear algebra and the Schur/Hadamard calculus.

Eigenvalues come from a cyclic Jacobi solver run in round-robin order, so each
round applies n/2 disjoint rotations as whole-row and whole-column numpy updates.
"""
from functools import lru_cache
from typing import Any, List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import structlog

from .config import get_settings
from .domain.matrices import Classification, SpectralReport, SymMatrix
from .domain.reports import CheckReport
from .errors import InvalidMatrix, NotPositiveDefinite, RangeError, ShapeError
from .runtime import make_rng

logger = structlog.get_logger()

MatrixLike = Union[SymMatrix, np.ndarray]

EXP_OVERFLOW_BOUND = -700.0


def _as_array(m: Any) -> np.ndarray:
    arr = np.asarray(m.entries if isinstance(m, SymMatrix) else m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix("matrix has non-finite entries")
    return arr


@lru_cache(maxsize=64)
def _round_robin(n: int) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
    """Circle-method schedule: n-1 (or n) rounds of disjoint (p < q) pairs."""
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        pairs = [
            (min(players[i], players[size - 1 - i]), max(players[i], players[size - 1 - i]))
            for i in range(size // 2)
        ]
        pairs = [(a, b) for a, b in pairs if b < n]
        rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi, ascending."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if n == 1 or scale == 0.0:
        return np.sort(np.diag(a))

    rounds = _round_robin(n)
    # rotations treat |a_pq| at or below this as zero
    negligible = 1e-3 * tol * scale
    previous = np.inf
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= tol * scale or off >= previous:
            break
        previous = off

        for P, Q in rounds:
            apq = a[P, Q]
            app = a[P, P]
            aqq = a[Q, Q]
            zero = np.abs(apq) <= negligible
            theta = (aqq - app) / (2.0 * np.where(zero, 1.0, apq))
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = np.where(zero, 0.0, sign / (np.abs(theta) + np.hypot(theta, 1.0)))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            rows_p, rows_q = a[P, :].copy(), a[Q, :].copy()
            a[P, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[Q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            cols_p, cols_q = a[:, P].copy(), a[:, Q].copy()
            a[:, P] = cols_p * c - cols_q * s
            a[:, Q] = cols_p * s + cols_q * c
            a[P, Q] = 0.0
            a[Q, P] = 0.0

    return np.sort(np.diag(a))


def classify(
    eigenvalues: np.ndarray,
    tol_psd: Optional[float] = None,
    tol_pd: Optional[float] = None,
) -> SpectralReport:
    """Attach PD / PSD / INDEFINITE to a sorted eigenvalue array."""
    tolerances = get_settings().tolerances
    tol_psd = tolerances.tol_psd if tol_psd is None else tol_psd
    tol_pd = tolerances.tol_pd if tol_pd is None else tol_pd
    if tol_psd <= 0 or tol_pd <= 0:
        raise ValueError("tolerances must be positive")

    eigenvalues = np.sort(np.asarray(eigenvalues, dtype=float))
    min_eig = float(eigenvalues[0])
    max_abs = float(np.max(np.abs(eigenvalues)))
    threshold = tol_psd * max(1.0, max_abs)

    if min_eig > tol_pd:
        label = Classification.PD
    elif min_eig >= -threshold:
        label = Classification.PSD
    else:
        label = Classification.INDEFINITE

    return SpectralReport(
        eigenvalues=eigenvalues,
        min_eig=min_eig,
        max_abs_eig=max_abs,
        classification=label,
        tolerance_used=threshold,
    )


def eig_sym(
    m: MatrixLike,
    tol_psd: Optional[float] = None,
    tol_pd: Optional[float] = None,
    method: str = "jacobi",
) -> SpectralReport:
    """Spectrum and classification of a symmetric matrix."""
    arr = _as_array(m)
    if method == "jacobi":
        eigenvalues = jacobi_eigenvalues(arr)
    elif method == "lapack":
        eigenvalues = np.linalg.eigvalsh(arr)
    else:
        raise ValueError(f"unknown eigensolver: {method}")
    return classify(eigenvalues, tol_psd, tol_pd)


def cholesky_pd(m: MatrixLike) -> np.ndarray:
    """Lower Cholesky factor; NotPositiveDefinite when a pivot is not positive."""
    arr = _as_array(m)
    try:
        return scipy.linalg.cholesky(arr, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"matrix is not positive definite: {e}") from e


def det_and_inverse(m: MatrixLike) -> Tuple[float, SymMatrix]:
    """Determinant and inverse of a PD matrix from its Cholesky factor."""
    factor = cholesky_pd(m)
    det = float(np.prod(np.diag(factor)) ** 2)
    inverse = scipy.linalg.cho_solve((factor, True), np.eye(factor.shape[0]), check_finite=False)
    return det, SymMatrix.from_array(inverse)


def quadratic_form_inverse(m: MatrixLike, h: np.ndarray) -> Tuple[float, float]:
    """(hᵀ M⁻¹ h, log det M) for PD M via one triangular solve."""
    factor = cholesky_pd(m)
    w = scipy.linalg.solve_triangular(factor, np.asarray(h, dtype=float), lower=True, check_finite=False)
    return float(w @ w), float(2.0 * np.sum(np.log(np.diag(factor))))


def schur_product(a: Any, b: Any) -> Any:
    """Entrywise product; SymMatrix in, SymMatrix out."""
    left = a.entries if isinstance(a, SymMatrix) else np.asarray(a)
    right = b.entries if isinstance(b, SymMatrix) else np.asarray(b)
    if left.shape != right.shape:
        raise ShapeError(f"shape mismatch: {left.shape} vs {right.shape}")
    product = left * right
    if isinstance(a, SymMatrix) and isinstance(b, SymMatrix):
        return SymMatrix.from_array(product)
    return product


def hadamard_exp_neg(a: MatrixLike) -> SymMatrix:
    """Hadamard exponential of −A, i.e. [exp(−A_{μν})]."""
    arr = _as_array(a)
    if np.any(arr < EXP_OVERFLOW_BOUND):
        i, j = np.unravel_index(np.argmin(arr), arr.shape)
        raise RangeError(
            f"entry ({i}, {j}) = {arr[i, j]:.3g} overflows exp(-A)",
            witness={"index": [int(i), int(j)]},
        )
    return SymMatrix.from_array(np.exp(-arr))


def hermitian_embedding(z: np.ndarray) -> SymMatrix:
    """Real symmetric 2n×2n form [[Re, −Im], [Im, Re]] of a Hermitian matrix."""
    z = np.asarray(z, dtype=complex)
    re, im = z.real, z.imag
    return SymMatrix.from_array(np.block([[re, -im], [im, re]]))


def zero_sum_basis(n_points: int, block: int = 1) -> np.ndarray:
    """
    Orthonormal basis of {c : Σ_μ c_μ = 0} with c_μ ∈ R^block in point-major order.

    Built from the Helmert basis of the scalar hyperplane tensored with I_block.
    """
    helmert = np.zeros((n_points, max(n_points - 1, 0)))
    for k in range(1, n_points):
        norm = np.sqrt(k * (k + 1.0))
        helmert[:k, k - 1] = 1.0 / norm
        helmert[k, k - 1] = -k / norm
    return np.kron(helmert, np.eye(block))


def negative_type_check(
    m: MatrixLike,
    trials: int,
    rng_seed: int,
    block: int = 1,
    tolerance: Optional[float] = None,
) -> CheckReport:
    """
    Sample cᵀMc on the zero-sum subspace; pass when no value is positive.

    The random trials and the basis vectors are backed by the exact maximum,
    the top eigenvalue of M compressed to the subspace.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    arr = _as_array(m)
    dim = arr.shape[0]
    if dim % block:
        raise ShapeError(f"dimension {dim} is not a multiple of block size {block}")
    tolerance = get_settings().tolerances.negative_type if tolerance is None else tolerance
    threshold = tolerance * max(1.0, float(np.max(np.abs(arr))))

    basis = zero_sum_basis(dim // block, block)
    if basis.shape[1] == 0:
        return CheckReport(check="negative_type", passed=True, margin=0.0, seed=rng_seed,
                           details={"subspace_dim": 0})

    rng = make_rng(rng_seed)
    candidates: List[np.ndarray] = [basis[:, k] for k in range(basis.shape[1])]
    for _ in range(trials):
        c = basis @ rng.normal(size=basis.shape[1])
        candidates.append(c / np.linalg.norm(c))
    compressed = basis.T @ arr @ basis
    top_values, top_vectors = np.linalg.eigh((compressed + compressed.T) / 2.0)
    candidates.append(basis @ top_vectors[:, -1])

    values = np.array([c @ arr @ c for c in candidates])
    worst = int(np.argmax(values))
    worst_value = float(values[worst])
    passed = worst_value <= threshold
    witness = None if passed else {"c": candidates[worst], "value": worst_value}
    return CheckReport(
        check="negative_type",
        passed=passed,
        margin=-worst_value,
        seed=rng_seed,
        witness=witness,
        details={"subspace_dim": int(basis.shape[1]), "threshold": threshold,
                 "exact_max": float(top_values[-1]), "trials": trials},
    )


def strict_exp_condition_margin(a: MatrixLike, block: int = 1) -> Tuple[float, Optional[dict]]:
    """
    Worst slack of A_ii + A_jj < 2 A_ij over all i ≠ j.

    For a negative-type A, exp(∘−A) is PD exactly when the returned margin is
    positive. The witness names the point-major (point, component) pairs.
    """
    arr = _as_array(a)
    n = arr.shape[0]
    if n == 1:
        return np.inf, None
    diag = np.diag(arr)
    slack = 2.0 * arr - diag[:, None] - diag[None, :]
    np.fill_diagonal(slack, np.inf)
    i, j = np.unravel_index(np.argmin(slack), slack.shape)
    margin = float(slack[i, j])
    witness = {
        "i": [int(i // block), int(i % block)],
        "j": [int(j // block), int(j % block)],
        "slack": margin,
    }
    return margin, witness
