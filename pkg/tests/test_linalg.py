"""Tests for the dense linear algebra layer and the matrix value types."""
import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aitken_kernels.domain.matrices import BlockGram, Classification, SymMatrix, point_major
from aitken_kernels.errors import (
    AsymmetricMatrix,
    InvalidMatrix,
    NotPositiveDefinite,
    RangeError,
    ShapeError,
)
from aitken_kernels.linalg import (
    cholesky_pd,
    det_and_inverse,
    eig_sym,
    hadamard_exp_neg,
    hermitian_embedding,
    jacobi_eigenvalues,
    negative_type_check,
    quadratic_form_inverse,
    schur_product,
    strict_exp_condition_margin,
    zero_sum_basis,
)

MAX_DIM = 8


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def squared_distances(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sum(diff ** 2, axis=-1)


@st.composite
def symmetric_matrices(draw, max_dim=MAX_DIM):
    n = draw(st.integers(min_value=1, max_value=max_dim))
    a = draw(arrays(
        np.float64, (n, n),
        elements=st.floats(min_value=-10.0, max_value=10.0, allow_subnormal=False),
    ))
    return (a + a.T) / 2.0


class TestSymMatrix:
    """SymMatrix construction."""

    def test_symmetrizes_small_asymmetry(self):
        """Asymmetry under tolerance is averaged away and recorded."""
        m = SymMatrix.from_array([[1.0, 2.0], [2.0 + 1e-12, 1.0]])
        assert m.entries[0, 1] == m.entries[1, 0]
        assert m.asymmetry == pytest.approx(1e-12, rel=1e-3)

    def test_rejects_visible_asymmetry(self):
        """Asymmetry above 1e-8 relative is an error."""
        with pytest.raises(AsymmetricMatrix):
            SymMatrix.from_array([[1.0, 1e-3], [0.0, 1.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidMatrix):
            SymMatrix.from_array([[1.0, np.nan], [np.nan, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(ShapeError):
            SymMatrix.from_array(np.ones((2, 3)))

    def test_entries_are_read_only(self):
        m = SymMatrix.identity(3)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 2.0


class TestEigSym:
    """Jacobi eigensolver and classification."""

    def test_diagonal_is_pd(self):
        report = eig_sym(np.diag([3.0, 1.0, 2.0]))
        assert report.classification is Classification.PD
        assert np.allclose(report.eigenvalues, [1.0, 2.0, 3.0])

    def test_rank_one_is_psd(self):
        """Eigenvalues 0 and 2 classify as PSD, not PD."""
        report = eig_sym(np.ones((2, 2)))
        assert report.classification is Classification.PSD
        assert abs(report.min_eig) < 1e-12

    def test_indefinite(self):
        report = eig_sym([[1.0, 2.0], [2.0, 1.0]])
        assert report.classification is Classification.INDEFINITE
        assert report.min_eig == pytest.approx(-1.0)
        assert not report.at_least_psd

    def test_tolerance_used_scales_with_spectrum(self):
        report = eig_sym(np.diag([100.0, 1.0]), tol_psd=1e-6)
        assert report.tolerance_used == pytest.approx(1e-4)

    def test_non_finite_is_invalid(self):
        with pytest.raises(InvalidMatrix):
            eig_sym(np.array([[np.inf]]))

    def test_lapack_cross_check(self, rng):
        """Both methods agree on a random 40x40 matrix."""
        a = rng.normal(size=(40, 40))
        a = a + a.T
        jacobi = eig_sym(a).eigenvalues
        lapack = eig_sym(a, method="lapack").eigenvalues
        assert np.max(np.abs(jacobi - lapack)) < 1e-10 * np.linalg.norm(a)

    def test_odd_dimension(self, rng):
        """Round-robin schedule pads odd sizes with a dummy index."""
        a = rng.normal(size=(7, 7))
        a = a @ a.T
        assert np.allclose(jacobi_eigenvalues(a), np.linalg.eigvalsh(a), atol=1e-10 * np.linalg.norm(a))

    @pytest.mark.parametrize("tiny", [1e-310, 5e-324, 1e-300])
    def test_subnormal_off_diagonal(self, tiny):
        """Off-diagonals far below the spectrum scale are skipped without overflow."""
        a = np.array([[1e10, tiny, 0.0], [tiny, -1e10, 1.0], [0.0, 1.0, 2.0]])
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            eigenvalues = jacobi_eigenvalues(a)
        assert np.allclose(eigenvalues, np.linalg.eigvalsh(a), rtol=0.0, atol=1e-12 * np.linalg.norm(a))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            eig_sym(np.eye(2), method="power")

    def test_to_dict(self):
        data = eig_sym(np.eye(3)).to_dict()
        assert data["classification"] == "PD"
        assert data["dim"] == 3


class TestCholesky:
    """Cholesky-based helpers."""

    def test_factor(self):
        a = np.array([[4.0, 2.0], [2.0, 3.0]])
        factor = cholesky_pd(a)
        assert np.allclose(factor @ factor.T, a)
        assert factor[0, 1] == 0.0

    def test_not_pd(self):
        with pytest.raises(NotPositiveDefinite):
            cholesky_pd([[1.0, 2.0], [2.0, 1.0]])

    def test_det_and_inverse(self):
        det, inverse = det_and_inverse(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert det == pytest.approx(3.0)
        assert np.allclose(inverse.entries, np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0)

    def test_quadratic_form_inverse(self):
        value, log_det = quadratic_form_inverse(np.diag([2.0, 4.0]), np.array([2.0, 2.0]))
        assert value == pytest.approx(3.0)
        assert log_det == pytest.approx(np.log(8.0))


class TestSchurHadamard:
    """Schur products and Hadamard exponentials."""

    def test_schur_product_of_sym_matrices(self):
        a = SymMatrix.from_array([[2.0, 1.0], [1.0, 2.0]])
        b = SymMatrix.from_array([[1.0, 3.0], [3.0, 1.0]])
        product = schur_product(a, b)
        assert isinstance(product, SymMatrix)
        assert np.allclose(product.entries, [[2.0, 3.0], [3.0, 2.0]])

    def test_schur_product_complex(self):
        product = schur_product(np.array([[1j, 1.0]]), np.array([[1j, 2.0]]))
        assert np.allclose(product, [[-1.0, 2.0]])

    def test_schur_shape_mismatch(self):
        with pytest.raises(ShapeError):
            schur_product(np.eye(2), np.eye(3))

    def test_hadamard_exp_neg(self):
        result = hadamard_exp_neg(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(result.entries, [[1.0, np.exp(-1.0)], [np.exp(-1.0), 1.0]])

    def test_hadamard_overflow(self):
        with pytest.raises(RangeError) as info:
            hadamard_exp_neg(np.array([[0.0, -800.0], [-800.0, 0.0]]))
        assert info.value.witness["index"] in ([0, 1], [1, 0])

    def test_hermitian_embedding_doubles_spectrum(self):
        z = np.array([[1.0, 1j], [-1j, 1.0]])
        report = eig_sym(hermitian_embedding(z))
        assert np.allclose(report.eigenvalues, [0.0, 0.0, 2.0, 2.0], atol=1e-12)
        assert report.at_least_psd


class TestNegativeType:
    """Zero-sum subspace checks."""

    def test_zero_sum_basis(self):
        basis = zero_sum_basis(4, block=2)
        assert basis.shape == (8, 6)
        assert np.allclose(basis.T @ basis, np.eye(6))
        assert np.allclose(basis.reshape(4, 2, 6).sum(axis=0), 0.0)

    @pytest.mark.parametrize("trial_seed", [0, 1, 2])
    def test_squared_distances_pass(self, rng, trial_seed):
        points = rng.normal(size=(6, 3))
        report = negative_type_check(squared_distances(points), trials=16, rng_seed=trial_seed)
        assert report.passed
        assert report.details["subspace_dim"] == 5

    def test_identity_fails_with_witness(self):
        """cᵀIc = ‖c‖² > 0 on the zero-sum subspace."""
        report = negative_type_check(np.eye(4), trials=8, rng_seed=3)
        assert report.passed is False
        assert report.witness["value"] > 0
        assert abs(np.sum(report.witness["c"])) < 1e-12

    def test_equality_case_passes(self):
        """diag(1, -1) gives exactly zero on the zero-sum line."""
        report = negative_type_check(np.diag([1.0, -1.0]), trials=8, rng_seed=0)
        assert report.passed

    def test_block_layout(self, rng):
        distances = squared_distances(rng.normal(size=(5, 2)))
        report = negative_type_check(np.kron(distances, np.eye(2)), trials=8, rng_seed=1, block=2)
        assert report.passed
        assert report.details["subspace_dim"] == 8

    def test_block_mismatch(self):
        with pytest.raises(ShapeError):
            negative_type_check(np.eye(5), trials=4, rng_seed=0, block=2)

    def test_single_point(self):
        report = negative_type_check(np.eye(1), trials=4, rng_seed=0)
        assert report.passed
        assert report.details["subspace_dim"] == 0

    def test_strict_margin(self, rng):
        points = rng.normal(size=(4, 2))
        distances = squared_distances(points)
        margin, witness = strict_exp_condition_margin(distances)
        off_diagonal = distances[~np.eye(4, dtype=bool)]
        assert margin == pytest.approx(2.0 * off_diagonal.min())
        assert witness["i"] != witness["j"]

    def test_strict_margin_equality(self):
        margin, _ = strict_exp_condition_margin(np.zeros((3, 3)))
        assert margin == 0.0

    def test_strict_margin_single_entry(self):
        margin, witness = strict_exp_condition_margin(np.eye(1))
        assert margin == np.inf
        assert witness is None


class TestBlockGram:
    """Point-major layout."""

    def test_layout(self, rng):
        blocks = rng.normal(size=(2, 2, 3, 3))
        blocks = (blocks + blocks.transpose(1, 0, 3, 2)) / 2.0
        gram = BlockGram.from_blocks(blocks, provenance={"source": "test"})
        flat = gram.flattened.entries
        for m in range(2):
            for n in range(2):
                for mu in range(3):
                    for nu in range(3):
                        assert flat[mu * 2 + m, nu * 2 + n] == pytest.approx(blocks[m, n, mu, nu])
        assert np.allclose(gram.blocks, blocks)
        assert gram.layout == "point-major"
        assert gram.provenance == {"source": "test"}

    def test_rejects_bad_shape(self):
        with pytest.raises(ShapeError):
            BlockGram.from_blocks(np.zeros((2, 3, 4, 4)))

    def test_point_major_shape(self):
        assert point_major(np.zeros((3, 3, 2, 2))).shape == (6, 6)


@seed(1)
@settings(max_examples=60, deadline=None)
@given(a=symmetric_matrices())
def test_jacobi_matches_lapack(a):
    """Jacobi eigenvalues agree with LAPACK to 1e-10 relative."""
    scale = max(1.0, float(np.linalg.norm(a)))
    assert np.max(np.abs(jacobi_eigenvalues(a) - np.linalg.eigvalsh(a))) <= 1e-10 * scale


@seed(2)
@settings(max_examples=60, deadline=None)
@given(a=symmetric_matrices())
def test_eigenvalue_sum_is_trace(a):
    report = eig_sym(a)
    scale = max(1.0, float(np.sum(np.abs(report.eigenvalues))))
    assert abs(np.sum(report.eigenvalues) - np.trace(a)) <= 1e-9 * scale


@seed(3)
@settings(max_examples=40, deadline=None)
@given(
    left=arrays(np.float64, (4, 5), elements=st.floats(-3.0, 3.0, allow_subnormal=False)),
    right=arrays(np.float64, (4, 5), elements=st.floats(-3.0, 3.0, allow_subnormal=False)),
)
def test_schur_product_preserves_psd(left, right):
    """Entrywise product of two Gram matrices is PSD."""
    product = schur_product(SymMatrix.from_array(left.T @ left), SymMatrix.from_array(right.T @ right))
    assert eig_sym(product).at_least_psd


@seed(4)
@settings(max_examples=40, deadline=None)
@given(
    factor=arrays(np.float64, (4, 4), elements=st.floats(-3.0, 3.0, allow_subnormal=False)),
    weights=arrays(np.float64, (4,), elements=st.floats(0.5, 2.0)),
)
def test_pd_times_unit_diagonal_psd_is_pd(factor, weights):
    """PD ∘ (PSD with unit diagonal) stays PD."""
    pd = np.diag(weights) + factor @ factor.T
    vectors = factor + np.eye(4)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms < 1e-3):
        return
    unit = vectors / norms[:, None]
    correlation = unit @ unit.T
    report = eig_sym(schur_product(SymMatrix.from_array(pd), SymMatrix.from_array(correlation)))
    assert report.min_eig > 0
