"""Tests for the matrix-valued kernel constructions."""
import math

import numpy as np
import pytest
import scipy.special

from aitken_kernels.builders import (
    CONSTRUCTIONS,
    PowerParam,
    apply_det_power,
    build_cauchy_cross,
    build_gneiting_classic,
    build_gneiting_single,
    build_matern_cross,
    build_mixture_kernel,
    build_product_kernel,
    build_product_mixture_kernel,
    build_quadratic_kernel,
)
from aitken_kernels.domain.spaces import PointSpace
from aitken_kernels.errors import FamilyInvalid, IntegrabilityError, KernelEvalError, ParamError
from aitken_kernels.families import (
    ScalarCNDKernel,
    cauchy_mixture,
    descriptor,
    gaussian_kernel,
    geodesic_distance,
    linear_maps,
    make_G_block_diagonal,
    make_G_constant,
    make_G_kernel_diag,
    make_G_sphere,
    make_H_difference,
    matern_mixture,
    mixture_from_atoms,
    shifted_sq_distance,
    unit_mixture,
)
from aitken_kernels.scalar_cm import bernstein_get, catalog_get


@pytest.fixture
def plane():
    return PointSpace.euclidean(2)


@pytest.fixture
def line():
    return PointSpace.euclidean(1)


@pytest.fixture
def exp_neg():
    return catalog_get("exp_neg")


def identity_H(space, p=1, dim=1):
    return make_H_difference(linear_maps([np.eye(dim)] * p), space)


class TestPowerParam:
    """Determinant exponent validation."""

    @pytest.mark.parametrize("value", [0, -1, 1.5, True])
    def test_invalid(self, value):
        with pytest.raises(ParamError):
            PowerParam(value)

    def test_default(self):
        assert PowerParam().l == 1


class TestQuadraticKernel:
    """Single-set construction."""

    def test_gaussian(self, plane, exp_neg):
        G = make_G_constant(np.eye(2), p=1, space=plane)
        K = build_quadratic_kernel(exp_neg, G, identity_H(plane, dim=2), seed=1)
        z, w = np.array([0.0, 1.0]), np.array([1.0, 3.0])
        assert K(z, w).shape == (1, 1)
        assert K(z, w)[0, 0] == pytest.approx(math.exp(-5.0))
        assert K(z, z)[0, 0] == pytest.approx(1.0)

    def test_determinant_power(self, plane, exp_neg):
        G = make_G_constant(2.0 * np.eye(2), p=1, space=plane)
        H = identity_H(plane, dim=2)
        z, w = np.array([0.0, 0.0]), np.array([1.0, 1.0])
        base = math.exp(-1.0)
        assert build_quadratic_kernel(exp_neg, G, H, seed=1)(z, w)[0, 0] == pytest.approx(base / 2.0)
        assert apply_det_power(exp_neg, G, H, 2, seed=1)(z, w)[0, 0] == pytest.approx(base / 4.0)
        assert apply_det_power(exp_neg, G, H, 3, seed=1)(z, w)[0, 0] == pytest.approx(base / 8.0)
        assert apply_det_power(exp_neg, G, H, 2, seed=1).provenance["power_anchor"].startswith("Section 5")

    def test_provenance(self, plane, exp_neg):
        G = make_G_constant(np.eye(2), p=1, space=plane)
        K = build_quadratic_kernel(exp_neg, G, identity_H(plane, dim=2), seed=1)
        assert K.provenance["construction"] == "quadratic"
        assert K.provenance["theorem"] == "thm21"
        assert K.provenance["anchor"] == "Theorem 2.1"
        assert K.provenance["power_l"] == 1
        assert "power_anchor" not in K.provenance
        assert set(K.provenance["certificates"]) == {"G", "H"}
        assert "unsafe" not in K.provenance

    def test_refuses_uncertified_family(self, line, exp_neg):
        G = make_G_kernel_diag(gaussian_kernel(1.0), q=1, p=1, space=line)
        with pytest.raises(FamilyInvalid):
            build_quadratic_kernel(exp_neg, G, identity_H(line), seed=1)

    def test_unsafe_build_is_recorded(self, line, exp_neg):
        G = make_G_kernel_diag(gaussian_kernel(1.0), q=1, p=1, space=line)
        K = build_quadratic_kernel(exp_neg, G, identity_H(line), unsafe=True, seed=1)
        assert K.provenance["unsafe"] is True
        assert K.provenance["certificates"]["G"]["pass"] is False

    def test_block_diagonal_refused(self, line, exp_neg):
        G = make_G_block_diagonal([shifted_sq_distance(1.0), shifted_sq_distance(2.0)], q=1, space=line)
        with pytest.raises(FamilyInvalid):
            build_quadratic_kernel(exp_neg, G, identity_H(line, p=2), unsafe=True)

    def test_shape_mismatch(self, line, exp_neg):
        G = make_G_constant([[1.0]], p=2, space=line)
        with pytest.raises(ParamError):
            build_quadratic_kernel(exp_neg, G, identity_H(line, p=1), seed=1)

    def test_singular_G_entry(self, line, exp_neg):
        G = make_G_kernel_diag(lambda y, y_prime: 0.0, q=1, p=1, space=line)
        K = build_quadratic_kernel(exp_neg, G, identity_H(line), unsafe=True, seed=1)
        with pytest.raises(KernelEvalError) as excinfo:
            K(np.array([0.0]), np.array([1.0]))
        assert excinfo.value.witness["m"] == 0

    def test_mixture_with_unit_atom_matches_plain(self, plane, exp_neg):
        G = make_G_constant(np.eye(2), p=1, space=plane)
        H = identity_H(plane, dim=2)
        plain = build_quadratic_kernel(exp_neg, G, H, seed=1)
        mixed = build_mixture_kernel(exp_neg, G, H, unit_mixture(1, plane), seed=1)
        z, w = np.array([0.3, -0.2]), np.array([1.1, 0.4])
        assert mixed(z, w)[0, 0] == pytest.approx(plain(z, w)[0, 0])

    def test_mixture_overflow(self, line):
        phi = catalog_get("constant", {"c": 1.0})
        G = make_G_constant([[1.0]], p=1, space=line)
        mix = mixture_from_atoms([(1e-300, 1e300), (1.0, 1e300)], lambda m, n, s, z, w: 1e300, 1, line)
        K = build_mixture_kernel(phi, G, identity_H(line), mix, unsafe=True, seed=1)
        with pytest.raises(IntegrabilityError):
            K(np.array([0.0]), np.array([1.0]))


class TestProductKernels:
    """Constructions on X × Y."""

    @pytest.fixture
    def sphere_time(self):
        G = make_G_sphere(p=2, q=1, d=2)
        H = make_H_difference(linear_maps([[[1.0]], [[0.5]]]), PointSpace.euclidean(1))
        return G, H

    def test_product_domain(self, sphere_time, exp_neg):
        G, H = sphere_time
        K = build_product_kernel(exp_neg, G, H, seed=1)
        assert K.p == 2
        assert K.domain.coord_dim == 4
        z = np.array([0.5, 1.0, 0.0, 0.0])
        w = np.array([0.0, 0.0, 1.0, 0.0])
        value = K(z, w)
        assert value.shape == (2, 2)
        # entry (0, 1): G = 0 + 1 + 2 + π/2, H = 0.5 − 0.5·0
        g = 3.0 + math.pi / 2.0
        assert value[0, 1] == pytest.approx(math.exp(-0.25 / g) / math.sqrt(g))

    def test_product_mixture_matches_product_for_unit_atom(self, sphere_time, exp_neg):
        G, H = sphere_time
        domain = PointSpace.product(H.space, G.space)
        plain = build_product_kernel(exp_neg, G, H, seed=1)
        mixed = build_product_mixture_kernel(exp_neg, G, H, unit_mixture(2, domain), seed=1)
        z = np.array([0.1, 0.0, 1.0, 0.0])
        w = np.array([-0.4, 0.6, 0.0, 0.8])
        assert np.allclose(mixed(z, w), plain(z, w))


class TestGneiting:
    """Gneiting-type constructions."""

    def test_single_set(self, line, exp_neg):
        K = build_gneiting_single(exp_neg, shifted_sq_distance(1.0, line), identity_H(line), q=1, seed=1)
        d2 = 4.0
        assert K(np.array([0.0]), np.array([2.0]))[0, 0] == pytest.approx(
            (1.0 + d2) ** -0.5 * math.exp(-d2 / (1.0 + d2))
        )

    def test_single_set_needs_positive_g(self, exp_neg):
        sphere = PointSpace.sphere(2)
        H = make_H_difference(linear_maps([np.eye(3)]), sphere)
        with pytest.raises(FamilyInvalid):
            build_gneiting_single(exp_neg, geodesic_distance(2), H, q=3)

    def test_single_set_dimension_mismatch(self, line, exp_neg):
        with pytest.raises(ParamError):
            build_gneiting_single(exp_neg, shifted_sq_distance(1.0, line), identity_H(line), q=2)

    def test_single_set_non_cnd_g(self, line, exp_neg):
        gaussian = ScalarCNDKernel(gaussian_kernel(1.0), True, descriptor("gaussian"), line)
        with pytest.raises(FamilyInvalid):
            build_gneiting_single(exp_neg, gaussian, identity_H(line), q=1, seed=1)

    def test_classic(self, exp_neg):
        f = bernstein_get("affine", {"a": 1.0, "b": 1.0})
        K = build_gneiting_classic(exp_neg, f, r=1.0, q_s=2, d=1)
        z = np.array([0.0, 0.0, 0.0])
        w = np.array([1.0, 1.0, 2.0])
        assert K(z, w)[0, 0] == pytest.approx(math.exp(-2.0 / 5.0) / 5.0)
        assert K.provenance["construction"] == "gneiting_classic"
        assert K.provenance["anchor"].startswith("Eq. 2")

    def test_classic_exponent_bound(self, exp_neg):
        f = bernstein_get("affine", {"a": 1.0, "b": 1.0})
        with pytest.raises(ParamError, match="r >= q_s/2"):
            build_gneiting_classic(exp_neg, f, r=0.5, q_s=2, d=1)
        with pytest.raises(ParamError, match="d/2"):
            build_gneiting_classic(exp_neg, f, r=0.5, q_s=1, d=2)


class TestCrossCovariances:
    """Matérn and Cauchy cross-covariance models against their mixture forms."""

    @pytest.fixture
    def families(self, line):
        G = make_G_constant([[2.0]], p=2, space=line)
        H = make_H_difference(linear_maps([[[1.0]], [[1.0]]]), line)
        return G, H, PointSpace.product(line, line)

    @pytest.mark.parametrize("pair", [(0.0, 0.0), (0.0, 0.7), (0.5, 2.0), (-1.0, 1.5)])
    def test_matern_matches_mixture(self, families, exp_neg, pair):
        G, H, domain = families
        v = [0.5, 1.5]
        cross = build_matern_cross(G, H, v, np.ones((2, 2)), seed=1)
        mixed = build_product_mixture_kernel(exp_neg, G, H, matern_mixture(v, 1.0, domain), seed=1)
        z, w = np.array([pair[0], 0.0]), np.array([pair[1], 1.0])
        assert np.allclose(cross(z, w), mixed(z, w), rtol=1e-6, atol=0.0)

    def test_matern_zero_lag(self, families):
        G, H, _ = families
        cross = build_matern_cross(G, H, [0.5, 1.5], np.ones((2, 2)), seed=1)
        value = cross(np.zeros(2), np.zeros(2))
        expected = scipy.special.gamma(np.add.outer([0.5, 1.5], [0.5, 1.5]) / 2.0) / math.sqrt(2.0)
        assert np.allclose(value, expected)

    def test_matern_coefficients_must_be_psd(self, families):
        G, H, _ = families
        with pytest.raises(ParamError):
            build_matern_cross(G, H, [0.5, 3.0], [[1.0, 10.0], [10.0, 1.0]], seed=1)

    def test_matern_smoothness_count(self, families):
        G, H, _ = families
        with pytest.raises(ParamError):
            build_matern_cross(G, H, [0.5], np.ones((2, 2)), seed=1)

    @pytest.mark.parametrize("pair", [(0.0, 0.0), (0.0, 0.5), (0.3, 1.8)])
    def test_cauchy_matches_mixture(self, families, exp_neg, pair):
        G, H, domain = families
        v, c = [1.0, 2.0], 0.5
        cross = build_cauchy_cross(G, H, c=c, gamma=1.0, v_list=v, seed=1)
        mixed = build_product_mixture_kernel(exp_neg, G, H, cauchy_mixture(v, c, domain), seed=1)
        z, w = np.array([pair[0], 0.0]), np.array([pair[1], 0.0])
        assert np.allclose(cross(z, w), mixed(z, w), rtol=1e-7, atol=0.0)

    def test_cauchy_closed_form(self, families):
        G, H, _ = families
        cross = build_cauchy_cross(G, H, c=1.0, gamma=0.5, v_list=[1.0, 1.0], seed=1)
        a = 1.0 / 2.0
        expected = scipy.special.gamma(2.0) / math.sqrt(2.0) * (1.0 + math.sqrt(a)) ** -2.0
        assert cross(np.array([0.0, 0.0]), np.array([1.0, 0.0]))[0, 1] == pytest.approx(expected)

    def test_cauchy_small_smoothness_flagged(self, families):
        G, H, _ = families
        cross = build_cauchy_cross(G, H, c=1.0, gamma=1.0, v_list=[0.5, 1.0], seed=1)
        assert cross.provenance["flags"] == ["nu_le_one"]

    @pytest.mark.parametrize("c, gamma", [(1.0, 0.0), (1.0, 1.5), (0.0, 1.0)])
    def test_cauchy_invalid(self, families, c, gamma):
        G, H, _ = families
        with pytest.raises(ParamError):
            build_cauchy_cross(G, H, c=c, gamma=gamma, v_list=[1.0, 1.0])


def test_constructions_listed():
    assert set(CONSTRUCTIONS) == {
        "quadratic", "gneiting_single", "gneiting_classic", "mixture",
        "product", "product_mixture", "matern_cross", "cauchy_cross",
    }


@pytest.mark.parametrize("name, theorem, anchor", [
    ("quadratic", "thm21", "Theorem 2.1"),
    ("gneiting_single", "gneiting_single", "Theorem 2.4"),
    ("gneiting_classic", "gneiting_classic", "Eq. 2"),
    ("mixture", "thm31", "Theorem 3.1"),
    ("product", "thm41", "Theorem 4.1"),
    ("product_mixture", "thm42", "Theorem 4.2"),
    ("matern_cross", "matern_cross", "Example 5.1"),
    ("cauchy_cross", "cauchy_cross", "Example 5.2"),
])
def test_construction_anchors(name, theorem, anchor):
    assert CONSTRUCTIONS[name].theorem == theorem
    assert CONSTRUCTIONS[name].anchor.startswith(anchor)
